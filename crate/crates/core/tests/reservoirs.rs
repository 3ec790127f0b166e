use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdes_core::paths::Path;
use rdes_core::reservoir::{
    extract_batch, rcde_extract, rfcde_extract, rrde_extract, Activation, CommutatorMode, FeatureMatrix,
    ReservoirSpec, ReservoirState, Variant,
};
use rdes_core::Error;

fn random_path(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Path {
    let mut v = Array2::zeros((len, dim));
    for i in 1..len {
        for j in 0..dim {
            v[[i, j]] = v[[i - 1, j]] + 0.3 * (rng.random::<f64>() - 0.5);
        }
    }
    Path::from_values(v).unwrap()
}

fn max_rel(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
}

fn specs(width: usize, dim: usize, seed: u64) -> Vec<ReservoirSpec> {
    vec![
        ReservoirSpec::rcde(width, dim, seed),
        ReservoirSpec::rfcde(width, dim, 8, 1.0, seed),
        ReservoirSpec::rrde(width, dim, 2, 3, seed),
    ]
}

#[test]
fn constant_path_returns_scaled_initial_state() {
    let p = Path::from_values(Array2::from_elem((7, 2), 0.4)).unwrap();
    for spec in specs(16, 2, 3) {
        let spec = spec.with_scales(0.7, 0.5, 1.3);
        let state = ReservoirState::<f64>::new(&spec).unwrap();
        let z = state.extract(&p).unwrap();
        let expected = state.initial_state().mapv(|v| 1.3 * v);
        assert_eq!(z, expected, "{}", spec.variant);
    }
}

#[test]
fn rcde_single_step_unrolls() {
    let (n, sa, sb, s0) = (12, 0.8, 0.6, 1.5);
    let spec = ReservoirSpec::rcde(n, 3, 11).with_scales(sa, sb, s0);
    let state = ReservoirState::<f64>::new(&spec).unwrap();
    for k in 0..3 {
        let mut v = Array2::zeros((2, 3));
        v[[1, k]] = 1.0;
        let z = rcde_extract(&state, &Path::from_values(v).unwrap()).unwrap();
        let z0 = state.initial_state().mapv(|x| s0 * x);
        // scaled_matrix(k) = A_k / sqrt(N)
        let expected = &z0 + &(state.scaled_matrix(k).dot(&z0) * sa) + &(state.bias(k).to_owned() * sb);
        assert!(max_rel(&z, &expected) < 1e-14);
    }
}

#[test]
fn rfcde_single_step_scales_bias_inside_the_sum() {
    let (n, sa, sb) = (10, 0.9, 0.4);
    let spec = ReservoirSpec::rfcde(n, 2, 4, 1.0, 5).with_scales(sa, sb, 1.0);
    let state = ReservoirState::<f64>::new(&spec).unwrap();
    let p = Path::from_values(array![[0.0, 0.1], [0.5, -0.2]]).unwrap();
    let rff = state.rff().unwrap().clone();
    let dx = rff.lift_path(&p).unwrap().as_path().increments();
    let z0 = state.initial_state().to_owned();
    let mut expected = z0.clone();
    for i in 0..8 {
        expected = expected
            + state.scaled_matrix(i).dot(&z0) * (sa * dx[[0, i]])
            + state.bias(i).to_owned() * (sb * dx[[0, i]] / (n as f64).sqrt());
    }
    let z = rfcde_extract(&state, &rff, &p).unwrap();
    assert!(max_rel(&z, &expected) < 1e-13);
}

#[test]
fn rrde_single_window_matches_explicit_commutators() {
    let n = 9;
    let spec = ReservoirSpec::rrde(n, 2, 2, 4, 2).with_scales(0.7, 0.0, 1.0);
    let state = ReservoirState::<f64>::new(&spec).unwrap();
    let p = Path::from_values(array![[0.0, 0.0], [0.3, 0.1], [0.2, 0.5], [-0.1, 0.4], [0.0, 0.2]]).unwrap();
    let basis = state.basis().unwrap().clone();
    let l = rdes_core::tensor::log_signature(&p, 2, &basis).unwrap();
    let (b1, b2) = (state.scaled_matrix(0), state.scaled_matrix(1));
    let comm = b1.dot(&b2) - b2.dot(&b1);
    let pi = &b1 * l.coeffs()[0] + &b2 * l.coeffs()[1] + &comm * l.coeffs()[2];
    let z0 = state.initial_state().to_owned();
    let expected = &z0 + &(pi.dot(&z0) * 0.7);
    let z = rrde_extract(&state, &p).unwrap();
    assert!(max_rel(&z, &expected) < 1e-13);
}

#[test]
fn linear_in_initial_state_for_all_variants() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = random_path(&mut rng, 13, 2);
    for spec in specs(20, 2, 9) {
        let state = ReservoirState::<f64>::new(&spec.clone().with_scales(1.1, 0.0, 1.0)).unwrap();
        let z = state.extract(&p).unwrap();
        let doubled = state.initial_state().mapv(|v| -2.5 * v);
        let z2 = state.clone().with_initial_state(doubled).unwrap().extract(&p).unwrap();
        assert!(max_rel(&z2, &(z * -2.5)) < 1e-12, "{}", spec.variant);
    }
}

#[test]
fn level_one_unit_chunk_rrde_equals_rcde() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..20 {
        let dim = 1 + trial % 3;
        let p = random_path(&mut rng, 6 + trial, dim);
        for mode in [CommutatorMode::Dense, CommutatorMode::MatrixFree] {
            for act in [Activation::Identity, Activation::Tanh] {
                let mut rrde = ReservoirSpec::rrde(24, dim, 1, 1, 40 + trial as u64).with_activation(act);
                rrde.commutators = mode;
                let rcde = ReservoirSpec::rcde(24, dim, 40 + trial as u64).with_activation(act);
                let a = ReservoirState::<f64>::new(&rrde).unwrap().extract(&p).unwrap();
                let b = ReservoirState::<f64>::new(&rcde).unwrap().extract(&p).unwrap();
                assert!(max_rel(&a, &b) <= 1e-10);
            }
        }
    }
}

#[test]
fn dense_and_matrix_free_commutators_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_path(&mut rng, 17, 3);
    for act in [Activation::Identity, Activation::Relu] {
        let mut spec = ReservoirSpec::rrde(16, 3, 3, 4, 8)
            .with_scales(0.9, 0.3, 1.0)
            .with_activation(act);
        spec.commutators = CommutatorMode::Dense;
        let dense = ReservoirState::<f64>::new(&spec).unwrap().extract(&p).unwrap();
        spec.commutators = CommutatorMode::MatrixFree;
        let free = ReservoirState::<f64>::new(&spec).unwrap().extract(&p).unwrap();
        assert!(max_rel(&dense, &free) < 1e-10);
    }
}

#[test]
fn duplicated_samples_leave_rrde_features_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = random_path(&mut rng, 13, 2);
    let v = p.values();
    let mut doubled = Array2::zeros((2 * v.nrows() - 1, 2));
    for i in 0..v.nrows() {
        doubled.row_mut(2 * i).assign(&v.row(i));
        if i + 1 < v.nrows() {
            doubled.row_mut(2 * i + 1).assign(&v.row(i));
        }
    }
    let q = Path::from_values(doubled).unwrap();
    let s1 = ReservoirSpec::rrde(20, 2, 3, 3, 6).with_activation(Activation::Tanh);
    let s2 = ReservoirSpec { chunk_size: 6, ..s1.clone() };
    let a = ReservoirState::<f64>::new(&s1).unwrap().extract(&p).unwrap();
    let b = ReservoirState::<f64>::new(&s2).unwrap().extract(&q).unwrap();
    assert!(max_rel(&a, &b) <= 1e-10);
}

#[test]
fn extraction_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = random_path(&mut rng, 20, 2);
    for spec in specs(32, 2, 77) {
        let a = ReservoirState::<f64>::new(&spec).unwrap().extract(&p).unwrap();
        let b = ReservoirState::<f64>::new(&spec).unwrap().extract(&p).unwrap();
        assert_eq!(a, b);
        let other = ReservoirSpec { seed: 78, ..spec };
        assert_ne!(a, ReservoirState::<f64>::new(&other).unwrap().extract(&p).unwrap());
    }
}

#[test]
fn batch_rows_match_single_extractions_and_permute() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let paths: Vec<Path> = (0..20).map(|i| random_path(&mut rng, 8 + i % 5, 2)).collect();
    for spec in specs(16, 2, 12) {
        let spec = spec.with_scales(0.8, 0.4, 1.0).with_activation(Activation::Tanh);
        let state = ReservoirState::<f64>::new(&spec).unwrap();
        let one = extract_batch(&state, &paths[..1]).unwrap();
        assert_eq!(one.values().row(0), state.extract(&paths[0]).unwrap());
        let all = extract_batch(&state, &paths).unwrap();
        assert_eq!(all.rows(), 20);
        for (i, p) in paths.iter().enumerate() {
            let single = state.extract(p).unwrap();
            assert!(max_rel(&all.values().row(i).to_owned(), &single) < 1e-12);
        }
        let perm: Vec<usize> = (0..20).map(|i| (i * 7) % 20).collect();
        let permuted: Vec<Path> = perm.iter().map(|&i| paths[i].clone()).collect();
        let again = extract_batch(&state, &permuted).unwrap();
        for (r, &i) in perm.iter().enumerate() {
            assert_eq!(again.values().row(r), all.values().row(i));
        }
        assert_eq!(all.variant(), spec.variant);
        assert_eq!(all.spec_hash(), spec.hash());
    }
}

#[test]
fn trajectory_ends_at_extracted_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = random_path(&mut rng, 11, 2);
    for spec in specs(8, 2, 1) {
        let state = ReservoirState::<f64>::new(&spec).unwrap();
        let traj = state.trajectory(&p).unwrap();
        let updates = if spec.variant == Variant::Rrde { 4 } else { 10 };
        assert_eq!(traj.nrows(), updates + 1);
        assert_eq!(traj.row(0), state.initial_state());
        assert_eq!(traj.row(updates), state.extract(&p).unwrap());
    }
}

#[test]
fn rcde_and_rrde_share_draws() {
    let a = ReservoirState::<f64>::new(&ReservoirSpec::rcde(6, 2, 4)).unwrap();
    let b = ReservoirState::<f64>::new(&ReservoirSpec::rrde(6, 2, 2, 1, 4)).unwrap();
    assert_eq!(a.initial_state(), b.initial_state());
    assert_eq!(a.scaled_matrix(1), b.scaled_matrix(1));
    assert_eq!(b.commutator(0).unwrap(), b.scaled_matrix(0));
}

#[test]
fn errors_are_reported() {
    let p = Path::from_values(array![[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]]).unwrap();
    let rrde = ReservoirState::<f64>::new(&ReservoirSpec::rrde(4, 2, 2, 5, 0)).unwrap();
    assert!(matches!(rrde.extract(&p), Err(Error::ChunkTooLong { chunk: 5, steps: 2 })));
    let rcde = ReservoirState::<f64>::new(&ReservoirSpec::rcde(4, 3, 0)).unwrap();
    assert!(matches!(rcde.extract(&p), Err(Error::Mismatch(_))));
    assert!(rrde_extract(&rcde, &p).is_err());

    let steep = Path::from_values(Array2::from_shape_fn((60, 1), |(i, _)| 50.0 * i as f64)).unwrap();
    let hot = ReservoirSpec::rcde(16, 1, 0).with_scales(40.0, 0.0, 1.0);
    let state = ReservoirState::<f64>::new(&hot).unwrap();
    match state.extract(&steep) {
        Err(Error::Overflow { sigma_a, .. }) => assert_eq!(sigma_a, 40.0),
        other => panic!("expected overflow, got {other:?}"),
    }
    match extract_batch(&state, &[p.clone().slice(0, 1).unwrap().cast::<f64>(), steep]) {
        Err(Error::Batch { failures, .. }) => {
            assert_eq!(failures.len(), 2);
            assert!(matches!(failures[1], Error::Sample { index: 1, .. }));
        }
        other => panic!("expected batch error, got {other:?}"),
    }
}

#[test]
fn feature_matrix_round_trips_to_17_digits() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let values = Array2::from_shape_fn((5, 4), |_| (rng.random::<f64>() - 0.5) * 1e3);
    let fm = FeatureMatrix::new(values.clone(), Variant::Rrde, "abc").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.txt");
    fm.save(&file).unwrap();
    let back = FeatureMatrix::load(&file).unwrap();
    assert_eq!(back.variant(), Variant::Rrde);
    assert_eq!(back.spec_hash(), "abc");
    for (a, b) in back.values().iter().zip(values.iter()) {
        assert!((a - b).abs() <= 1e-16 * b.abs());
    }
    assert!(fm.format().starts_with("#features n=5 N=4 variant=rrde spec=abc\n"));
    let bad = std::fs::read_to_string(&file).unwrap().replace("#features n=5", "#features n=6");
    assert!(matches!(FeatureMatrix::parse(&bad, &file), Err(Error::Parse { .. })));
    let mut nan = values;
    nan[[2, 1]] = f64::NAN;
    assert!(matches!(
        FeatureMatrix::new(nan, Variant::Rcde, ""),
        Err(Error::NonFiniteFeature { row: 2, col: 1 })
    ));
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = random_path(&mut rng, 15, 2);
    for spec in specs(32, 2, 3) {
        let a = ReservoirState::<f64>::new(&spec).unwrap().extract(&p).unwrap();
        let b = ReservoirState::<f32>::new(&spec).unwrap().extract(&p.cast::<f32>()).unwrap();
        let b = b.mapv(|v| v as f64);
        assert!(max_rel(&b, &a) < 1e-4, "{}", spec.variant);
    }
}
