use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::Path;

/// What to do when every entry of a channel is removed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelLossPolicy {
    #[default]
    Reject,
    FillZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionConfig {
    pub missing_prob: f64,
    pub seed: u64,
    #[serde(default)]
    pub on_channel_loss: ChannelLossPolicy,
}

impl CorruptionConfig {
    pub fn new(missing_prob: f64, seed: u64) -> Self {
        CorruptionConfig {
            missing_prob,
            seed,
            on_channel_loss: ChannelLossPolicy::Reject,
        }
    }
}

/// Removes each `(t, i)` entry independently with probability `p`, then
/// fills the holes by linear interpolation in time within each channel.
/// Leading and trailing gaps take the nearest surviving value.
pub fn corrupt_and_impute(path: &Path, cfg: &CorruptionConfig) -> Result<Path> {
    let p = cfg.missing_prob;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("missing probability {p} outside [0, 1]")));
    }
    let (len, dim) = (path.len(), path.dim());
    let mut rng = seed::rng(cfg.seed);
    let mut keep = vec![true; len * dim];
    for k in keep.iter_mut() {
        *k = rng.random::<f64>() >= p;
    }

    let times = path.times();
    let mut values = path.values().to_owned();
    for c in 0..dim {
        let survivors: Vec<usize> = (0..len).filter(|&t| keep[t * dim + c]).collect();
        if survivors.is_empty() {
            match cfg.on_channel_loss {
                ChannelLossPolicy::Reject => return Err(Error::ChannelLost { channel: c }),
                ChannelLossPolicy::FillZero => {
                    values.column_mut(c).fill(0.0);
                    continue;
                }
            }
        }
        let first = survivors[0];
        let last = *survivors.last().unwrap();
        for t in 0..first {
            values[[t, c]] = values[[first, c]];
        }
        for t in last + 1..len {
            values[[t, c]] = values[[last, c]];
        }
        for pair in survivors.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (ta, tb) = (times[a], times[b]);
            let (va, vb) = (values[[a, c]], values[[b, c]]);
            for t in a + 1..b {
                let w = (times[t] - ta) / (tb - ta);
                values[[t, c]] = va + w * (vb - va);
            }
        }
    }
    Path::new(times.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn sample_path() -> Path {
        let values = Array2::from_shape_fn((40, 3), |(t, c)| ((t * 7 + c * 3) % 11) as f64 - 5.0);
        Path::from_values(values).unwrap()
    }

    #[test]
    fn zero_probability_is_identity() {
        let p = sample_path();
        assert_eq!(corrupt_and_impute(&p, &CorruptionConfig::new(0.0, 3)).unwrap(), p);
    }

    #[test]
    fn full_loss_is_rejected_by_default() {
        let p = sample_path();
        let err = corrupt_and_impute(&p, &CorruptionConfig::new(1.0, 3)).unwrap_err();
        assert!(matches!(err, Error::ChannelLost { channel: 0 }));

        let cfg = CorruptionConfig {
            on_channel_loss: ChannelLossPolicy::FillZero,
            ..CorruptionConfig::new(1.0, 3)
        };
        let q = corrupt_and_impute(&p, &cfg).unwrap();
        assert!(q.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interior_gap_is_linearly_interpolated() {
        let p = Path::from_values(array![[0.0], [5.0], [2.0]]).unwrap();
        // find a seed that drops only the middle entry
        let seed = (0..10_000u64)
            .find(|&s| {
                let mut rng = seed::rng(s);
                let draws: Vec<bool> = (0..3).map(|_| rng.random::<f64>() >= 0.5).collect();
                draws == [true, false, true]
            })
            .unwrap();
        let q = corrupt_and_impute(&p, &CorruptionConfig::new(0.5, seed)).unwrap();
        assert_eq!(q.values().column(0).to_vec(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn survivors_are_untouched_and_output_complete() {
        let p = sample_path();
        let cfg = CorruptionConfig::new(0.4, 11);
        let q = corrupt_and_impute(&p, &cfg).unwrap();
        let mut rng = seed::rng(cfg.seed);
        for t in 0..p.len() {
            for c in 0..p.dim() {
                let kept = rng.random::<f64>() >= cfg.missing_prob;
                if kept {
                    assert_eq!(q.values()[[t, c]], p.values()[[t, c]]);
                }
                assert!(q.values()[[t, c]].is_finite());
            }
        }
        assert_eq!(q.times(), p.times());
    }

    #[test]
    fn edges_use_constant_extrapolation() {
        let p = Path::from_values(array![[9.0], [9.0], [1.0], [3.0], [9.0]]).unwrap();
        let seed = (0..100_000u64)
            .find(|&s| {
                let mut rng = seed::rng(s);
                let draws: Vec<bool> = (0..5).map(|_| rng.random::<f64>() >= 0.5).collect();
                draws == [false, false, true, true, false]
            })
            .unwrap();
        let q = corrupt_and_impute(&p, &CorruptionConfig::new(0.5, seed)).unwrap();
        assert_eq!(q.values().column(0).to_vec(), vec![1.0, 1.0, 1.0, 3.0, 3.0]);
    }
}
