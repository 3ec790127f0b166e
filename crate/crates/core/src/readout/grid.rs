use std::fmt;
use std::time::Instant;

use ndarray::Axis;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::LabeledDataset;
use crate::reservoir::{extract_batch, Activation, ReservoirSpec, ReservoirState, Variant};
use crate::seed::{self, stream};

use super::metrics::{median, Metrics};
use super::ridge::{fit_ridge, RidgeModel};

/// Hyperparameter lattice and validation protocol.
///
/// An empty reservoir list keeps the base spec's value. `num_fourier`,
/// `frequency_scale` and `level` are only expanded for the variant they
/// affect.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSearchConfig {
    pub sigma_a: Vec<f64>,
    pub sigma_b: Vec<f64>,
    pub sigma_0: Vec<f64>,
    pub activation: Vec<Activation>,
    pub num_fourier: Vec<usize>,
    pub level: Vec<usize>,
    pub frequency_scale: Vec<f64>,
    pub lambda: Vec<f64>,
    pub normalize: Vec<bool>,
    pub folds: usize,
    pub runs: usize,
    pub seed: u64,
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

impl Default for GridSearchConfig {
    fn default() -> Self {
        GridSearchConfig {
            sigma_a: Vec::new(),
            sigma_b: Vec::new(),
            sigma_0: Vec::new(),
            activation: Vec::new(),
            num_fourier: Vec::new(),
            level: Vec::new(),
            frequency_scale: Vec::new(),
            lambda: log_grid(1e-4, 1e3, 8),
            normalize: vec![true],
            folds: 3,
            runs: 3,
            seed: 0,
        }
    }
}

impl GridSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("lambda", self.lambda.is_empty()),
            ("normalize", self.normalize.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::invalid(format!("grid field `{name}` is empty")));
        }
        if self.folds < 2 {
            return Err(Error::invalid(format!("need at least 2 folds, got {}", self.folds)));
        }
        if self.runs == 0 {
            return Err(Error::invalid("need at least one run"));
        }
        if let Some(l) = self.lambda.iter().find(|l| !(**l > 0.0)) {
            return Err(Error::invalid(format!("lambda must be > 0, got {l}")));
        }
        Ok(())
    }

    /// Reservoir specs of the lattice in lexicographic order.
    pub fn reservoir_specs(&self, base: &ReservoirSpec) -> Vec<ReservoirSpec> {
        fn or_base<V: Clone>(list: &[V], base: V, applies: bool) -> Vec<V> {
            if list.is_empty() || !applies {
                vec![base]
            } else {
                list.to_vec()
            }
        }
        let rf = base.variant == Variant::Rfcde;
        let sigma_a = or_base(&self.sigma_a, base.sigma_a, true);
        let sigma_b = or_base(&self.sigma_b, base.sigma_b, true);
        let sigma_0 = or_base(&self.sigma_0, base.sigma_0, true);
        let activation = or_base(&self.activation, base.activation, true);
        let fourier = or_base(&self.num_fourier, base.num_fourier, rf);
        let scales = or_base(&self.frequency_scale, base.frequency_scale, rf);
        let levels = or_base(&self.level, base.level, base.variant == Variant::Rrde);
        let mut out = Vec::new();
        for &sa in &sigma_a {
            for &sb in &sigma_b {
                for &s0 in &sigma_0 {
                    for &act in &activation {
                        for &f in &fourier {
                            for &fs in &scales {
                                for &m in &levels {
                                    out.push(ReservoirSpec {
                                        sigma_a: sa,
                                        sigma_b: sb,
                                        sigma_0: s0,
                                        activation: act,
                                        num_fourier: f,
                                        frequency_scale: fs,
                                        level: m,
                                        ..base.clone()
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One point of the lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub spec: ReservoirSpec,
    pub lambda: f64,
    pub normalize: bool,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.spec;
        write!(
            f,
            "{} N={} act={} sigma_a={} sigma_b={} sigma_0={}",
            s.variant, s.width, s.activation, s.sigma_a, s.sigma_b, s.sigma_0
        )?;
        match s.variant {
            Variant::Rfcde => write!(f, " F={} freq={}", s.num_fourier, s.frequency_scale)?,
            Variant::Rrde => write!(f, " m={} chunk={}", s.level, s.chunk_size)?,
            Variant::Rcde => {}
        }
        write!(f, " lambda={:e} normalize={}", self.lambda, self.normalize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub candidate: Candidate,
    pub cv_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: Candidate,
    pub best_cv_accuracy: f64,
    pub scores: Vec<CandidateScore>,
    /// Test metrics of the best candidate, one per run.
    pub runs: Vec<Metrics>,
    pub median_accuracy: f64,
}

/// Reservoir seed of run `r`. Run 0 is also the one searched on.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    seed::derive(seed, stream::RUN, run as u64)
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed::derive(seed, stream::FOLDS, 0));
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[i] = next % k;
            next += 1;
        }
    }
    folds
}

/// Reservoir plus fitted readout.
#[derive(Clone, Debug)]
pub struct FittedPipeline {
    pub state: ReservoirState<f64>,
    pub model: RidgeModel,
}

pub fn fit_pipeline(train: &LabeledDataset, spec: &ReservoirSpec, lambda: f64, normalize: bool) -> Result<FittedPipeline> {
    let state = ReservoirState::new(spec)?;
    let feats = extract_batch(&state, &train.paths)?;
    let model = fit_ridge(feats.values().view(), &train.labels, train.num_classes, lambda, normalize)?;
    Ok(FittedPipeline { state, model })
}

impl FittedPipeline {
    pub fn predict(&self, ds: &LabeledDataset) -> Result<Vec<usize>> {
        let feats = extract_batch(&self.state, &ds.paths)?;
        self.model.predict(feats.values().view())
    }

    pub fn evaluate(&self, ds: &LabeledDataset) -> Result<Metrics> {
        let pred = self.predict(ds)?;
        Metrics::compute(&ds.labels, &pred, ds.num_classes)
    }
}

fn cv_accuracy(
    feats: &ndarray::Array2<f64>,
    train: &LabeledDataset,
    folds: &[usize],
    k: usize,
    lambda: f64,
    normalize: bool,
) -> Result<f64> {
    let mut total = 0.0;
    for f in 0..k {
        let fit_idx: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] != f).collect();
        let val_idx: Vec<usize> = (0..folds.len()).filter(|&i| folds[i] == f).collect();
        if val_idx.is_empty() {
            return Err(Error::invalid(format!("fold {f} is empty")));
        }
        let labels: Vec<usize> = fit_idx.iter().map(|&i| train.labels[i]).collect();
        let model = fit_ridge(
            feats.select(Axis(0), &fit_idx).view(),
            &labels,
            train.num_classes,
            lambda,
            normalize,
        )?;
        let pred = model.predict(feats.select(Axis(0), &val_idx).view())?;
        let hits = val_idx.iter().zip(&pred).filter(|(&i, &p)| train.labels[i] == p).count();
        total += hits as f64 / val_idx.len() as f64;
    }
    Ok(total / k as f64)
}

/// Exhaustive k-fold search on `train`, then `runs` refits of the winner with
/// fresh reservoir seeds, each scored once on `test`.
///
/// Ranking: highest mean validation accuracy, then smaller `λ`, then lattice
/// order. Candidates whose extraction or fit fails are recorded and skipped.
pub fn grid_search(
    train: &LabeledDataset,
    test: &LabeledDataset,
    base: &ReservoirSpec,
    grid: &GridSearchConfig,
) -> Result<GridSearchResult> {
    grid.validate()?;
    let folds = stratified_folds(&train.labels, grid.folds, grid.seed);
    let mut scores = Vec::new();
    // (accuracy, lambda, lattice position)
    let mut best: Option<(f64, f64, usize)> = None;
    let mut first_error = None;
    for spec in grid.reservoir_specs(base) {
        let spec = ReservoirSpec {
            seed: run_seed(grid.seed, 0),
            ..spec
        };
        let feats = ReservoirState::<f64>::new(&spec).and_then(|s| extract_batch(&s, &train.paths));
        for &normalize in &grid.normalize {
            for &lambda in &grid.lambda {
                let candidate = Candidate {
                    spec: spec.clone(),
                    lambda,
                    normalize,
                };
                let acc = match &feats {
                    Ok(f) => cv_accuracy(f.values(), train, &folds, grid.folds, lambda, normalize),
                    Err(e) => Err(Error::invalid(e.to_string())),
                };
                let pos = scores.len();
                match acc {
                    Ok(a) => {
                        let better = match best {
                            None => true,
                            Some((ba, bl, _)) => a > ba || (a == ba && lambda < bl),
                        };
                        if better {
                            best = Some((a, lambda, pos));
                        }
                        scores.push(CandidateScore {
                            candidate,
                            cv_accuracy: Some(a),
                            error: None,
                        });
                    }
                    Err(e) => {
                        log::debug!("grid point {candidate} failed: {e}");
                        let err = Error::Config {
                            config: candidate.to_string(),
                            source: Box::new(e),
                        };
                        let message = err.to_string();
                        first_error.get_or_insert(err);
                        scores.push(CandidateScore {
                            candidate,
                            cv_accuracy: None,
                            error: Some(message),
                        });
                    }
                }
            }
        }
    }
    let Some((best_acc, _, pos)) = best else {
        return Err(first_error.unwrap_or_else(|| Error::invalid("empty grid")));
    };
    let chosen = scores[pos].candidate.clone();
    let mut runs = Vec::with_capacity(grid.runs);
    for r in 0..grid.runs {
        let spec = ReservoirSpec {
            seed: run_seed(grid.seed, r),
            ..chosen.spec.clone()
        };
        let wrap = |e: Error| Error::Config {
            config: chosen.to_string(),
            source: Box::new(e),
        };
        let t0 = Instant::now();
        let pipe = fit_pipeline(train, &spec, chosen.lambda, chosen.normalize).map_err(wrap)?;
        let fit_time = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let mut metrics = pipe.evaluate(test).map_err(wrap)?;
        metrics.timings.insert("fit".into(), fit_time);
        metrics.timings.insert("evaluate".into(), t1.elapsed().as_secs_f64());
        runs.push(metrics);
    }
    let accs: Vec<f64> = runs.iter().map(|m| m.accuracy).collect();
    Ok(GridSearchResult {
        best: chosen,
        best_cv_accuracy: best_acc,
        scores,
        runs,
        median_accuracy: median(&accs),
    })
}
