//! Experiment configuration, read from a TOML file.
//!
//! Every section is optional; missing fields take the desk-scale defaults
//! below, and the resolved values are echoed in each report.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rdes_core::paths::{AugmentationConfig, ChannelLossPolicy, DatasetFormat, HurstVariant};
use rdes_core::readout::GridSearchConfig;
use rdes_core::reservoir::{Activation, CommutatorMode, ReservoirSpec, Variant};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    KernelConvergence,
    Hurst,
    MissingData,
    Timing,
    CustomDataset,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::KernelConvergence => "kernel-convergence",
            ExperimentKind::Hurst => "hurst",
            ExperimentKind::MissingData => "missing-data",
            ExperimentKind::Timing => "timing",
            ExperimentKind::CustomDataset => "custom-dataset",
        })
    }
}

/// Reservoir fields shared by every command. The variant, input
/// dimension and seed are filled in by the command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirConfig {
    pub width: usize,
    pub activation: Activation,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub sigma_0: f64,
    pub num_fourier: usize,
    pub frequency_scale: f64,
    pub level: usize,
    pub chunk_size: usize,
    pub commutators: CommutatorMode,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        ReservoirConfig {
            width: 64,
            activation: Activation::Identity,
            sigma_a: 1.0,
            sigma_b: 0.0,
            sigma_0: 1.0,
            num_fourier: 32,
            frequency_scale: 1.0,
            level: 2,
            chunk_size: 8,
            commutators: CommutatorMode::Auto,
        }
    }
}

impl ReservoirConfig {
    pub fn spec(&self, variant: Variant, input_dim: usize, seed: u64) -> ReservoirSpec {
        ReservoirSpec {
            variant,
            width: self.width,
            input_dim,
            activation: self.activation,
            sigma_a: self.sigma_a,
            sigma_b: self.sigma_b,
            sigma_0: self.sigma_0,
            seed,
            num_fourier: self.num_fourier,
            frequency_scale: self.frequency_scale,
            level: self.level,
            chunk_size: self.chunk_size,
            commutators: self.commutators,
        }
    }
}

/// Which pair of paths the convergence study compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// Two smooth 2D curves sampled at 50 points.
    Smooth,
    /// Two constant 2D paths; every kernel equals 1.
    Constant,
    /// `x_file` and `y_file`.
    Files,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub variant: Variant,
    pub widths: Vec<usize>,
    pub num_seeds: usize,
    pub pair: PairKind,
    pub x_file: Option<PathBuf>,
    pub y_file: Option<PathBuf>,
    /// PDE refinement of the oracle.
    pub refinement: usize,
    /// Fourier feature counts for RF-CDE; one ladder per entry.
    pub fourier: Vec<usize>,
    /// Fourier feature count of the RF-CDE oracle.
    pub oracle_features: usize,
    /// Final error must be within `max(stderr_multiple·se, relative_tolerance·|oracle|)`.
    pub stderr_multiple: f64,
    pub relative_tolerance: f64,
    /// Slack, in combined standard errors, allowed between consecutive widths.
    pub monotone_stderr: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            variant: Variant::Rcde,
            widths: vec![256, 1024, 4096],
            num_seeds: 50,
            pair: PairKind::Smooth,
            x_file: None,
            y_file: None,
            refinement: 16,
            fourier: vec![256, 1024],
            oracle_features: 8192,
            stderr_multiple: 3.0,
            relative_tolerance: 0.05,
            monotone_stderr: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HurstConfig {
    pub variant: HurstVariant,
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub length: usize,
    pub dim: usize,
    /// Reservoirs to evaluate, each with its own grid search.
    pub models: Vec<Variant>,
}

impl Default for HurstConfig {
    fn default() -> Self {
        HurstConfig {
            variant: HurstVariant::V1,
            n_train_per_class: 20,
            n_test_per_class: 10,
            length: 128,
            dim: 3,
            models: vec![Variant::Rcde, Variant::Rfcde, Variant::Rrde],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissingConfig {
    pub probabilities: Vec<f64>,
    /// Corruption seed; derived from the global seed when absent.
    pub seed: Option<u64>,
    pub on_channel_loss: ChannelLossPolicy,
}

impl Default for MissingConfig {
    fn default() -> Self {
        MissingConfig {
            probabilities: vec![0.0, 0.2, 0.4],
            seed: None,
            on_channel_loss: ChannelLossPolicy::Reject,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingConfig {
    pub lengths: Vec<usize>,
    pub width: usize,
    pub num_fourier: usize,
    pub dim: usize,
    /// Paths extracted per timed call; times are reported per path.
    pub batch: usize,
    pub repetitions: usize,
    pub warmup: usize,
    /// R-RDE window length, fixed across the ladder.
    pub chunk_size: usize,
    pub models: Vec<Variant>,
    /// Slopes of these models are checked against `slope_range`.
    pub checked: Vec<Variant>,
    pub slope_range: (f64, f64),
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            lengths: vec![100, 200, 400, 800],
            width: 128,
            num_fourier: 64,
            dim: 3,
            batch: 4,
            repetitions: 3,
            warmup: 1,
            chunk_size: 10,
            models: vec![Variant::Rcde, Variant::Rfcde, Variant::Rrde],
            checked: vec![Variant::Rcde, Variant::Rfcde],
            slope_range: (0.8, 1.3),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Detected from the path (file or directory) when absent.
    pub format: Option<DatasetFormat>,
    pub models: Option<Vec<Variant>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional in the file; the subcommand decides and a mismatch is an error.
    pub experiment: Option<ExperimentKind>,
    /// Global seed. Data, folds, reservoirs and corruption derive from it;
    /// `grid.seed` is overwritten with it on resolution.
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub reservoir: ReservoirConfig,
    pub preprocess: AugmentationConfig,
    pub grid: GridSearchConfig,
    pub kernel: KernelConfig,
    pub hurst: HurstConfig,
    pub missing: MissingConfig,
    pub timing: TimingConfig,
    pub dataset: DatasetConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            seed: 0,
            out: None,
            reservoir: ReservoirConfig::default(),
            preprocess: AugmentationConfig {
                time_augment: true,
                lead_lag: true,
                minmax_scale: true,
                ..Default::default()
            },
            grid: GridSearchConfig {
                sigma_a: vec![0.5, 1.0, 2.0],
                activation: vec![Activation::Identity, Activation::Tanh],
                frequency_scale: vec![0.5, 2.0],
                ..Default::default()
            },
            kernel: KernelConfig::default(),
            hurst: HurstConfig::default(),
            missing: MissingConfig::default(),
            timing: TimingConfig::default(),
            dataset: DatasetConfig::default(),
        }
    }
}

fn config_error(field: &str, message: impl fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {message}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Fixes the experiment kind, rejecting a file written for another one,
    /// and ties the grid seed to the global seed.
    pub fn resolve(mut self, kind: ExperimentKind) -> Result<Self, CliError> {
        self.grid.seed = self.seed;
        match self.experiment {
            Some(k) if k != kind => {
                return Err(config_error(
                    "experiment",
                    format!("file is for `{k}` but the command runs `{kind}`"),
                ))
            }
            _ => self.experiment = Some(kind),
        }
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> Option<ExperimentKind> {
        self.experiment
    }

    /// Checks the sections the chosen experiment reads.
    pub fn validate(&self) -> Result<(), CliError> {
        let r = &self.reservoir;
        if r.width == 0 {
            return Err(config_error("reservoir.width", "must be positive"));
        }
        if self.preprocess.validate().is_err() {
            return Err(config_error("preprocess.resample_length", "must be >= 2"));
        }
        let Some(kind) = self.experiment else {
            return Ok(());
        };
        match kind {
            ExperimentKind::KernelConvergence => self.validate_kernel(),
            ExperimentKind::Hurst | ExperimentKind::MissingData => {
                self.validate_hurst()?;
                self.validate_grid()?;
                if kind == ExperimentKind::MissingData {
                    let m = &self.missing;
                    if m.probabilities.is_empty() {
                        return Err(config_error("missing.probabilities", "must be nonempty"));
                    }
                    if let Some(p) = m.probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                        return Err(config_error("missing.probabilities", format!("{p} outside [0, 1]")));
                    }
                }
                Ok(())
            }
            ExperimentKind::Timing => self.validate_timing(),
            ExperimentKind::CustomDataset => {
                self.validate_grid()?;
                let d = &self.dataset;
                for (field, path) in [("dataset.train", &d.train), ("dataset.test", &d.test)] {
                    match path {
                        None => return Err(config_error(field, "required for custom-dataset")),
                        Some(p) if !p.exists() => {
                            return Err(config_error(field, format!("{} does not exist", p.display())))
                        }
                        Some(_) => {}
                    }
                }
                if d.models.as_ref().is_some_and(Vec::is_empty) {
                    return Err(config_error("dataset.models", "must be nonempty"));
                }
                Ok(())
            }
        }
    }

    fn validate_kernel(&self) -> Result<(), CliError> {
        let k = &self.kernel;
        if self.reservoir.activation != Activation::Identity {
            return Err(config_error(
                "reservoir.activation",
                format!("the infinite-width limits need `id`, got `{}`", self.reservoir.activation),
            ));
        }
        if k.widths.is_empty() || k.widths.contains(&0) {
            return Err(config_error("kernel.widths", "must be a nonempty list of positive widths"));
        }
        if k.num_seeds < 2 {
            return Err(config_error("kernel.num_seeds", "need at least 2 seeds for a standard error"));
        }
        if k.refinement == 0 {
            return Err(config_error("kernel.refinement", "must be positive"));
        }
        if k.variant == Variant::Rfcde && (k.fourier.is_empty() || k.fourier.contains(&0)) {
            return Err(config_error("kernel.fourier", "must be a nonempty list of positive counts"));
        }
        if k.variant == Variant::Rfcde && k.oracle_features == 0 {
            return Err(config_error("kernel.oracle_features", "must be positive"));
        }
        if k.pair == PairKind::Files {
            for (field, path) in [("kernel.x_file", &k.x_file), ("kernel.y_file", &k.y_file)] {
                match path {
                    None => return Err(config_error(field, "required when pair = \"files\"")),
                    Some(p) if !p.is_file() => {
                        return Err(config_error(field, format!("{} does not exist", p.display())))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    fn validate_hurst(&self) -> Result<(), CliError> {
        let h = &self.hurst;
        if h.n_train_per_class == 0 || h.n_test_per_class == 0 {
            return Err(config_error("hurst.n_train_per_class", "sample counts must be positive"));
        }
        if h.length < 2 {
            return Err(config_error("hurst.length", "must be >= 2"));
        }
        if h.dim == 0 {
            return Err(config_error("hurst.dim", "must be positive"));
        }
        if h.models.is_empty() {
            return Err(config_error("hurst.models", "must be nonempty"));
        }
        Ok(())
    }

    fn validate_grid(&self) -> Result<(), CliError> {
        self.grid.validate().map_err(|e| config_error("grid", e))
    }

    fn validate_timing(&self) -> Result<(), CliError> {
        let t = &self.timing;
        if t.lengths.is_empty() || t.lengths.iter().any(|&l| l < 2) {
            return Err(config_error("timing.lengths", "need at least one length >= 2"));
        }
        if t.width == 0 || t.dim == 0 || t.batch == 0 || t.num_fourier == 0 || t.chunk_size == 0 {
            return Err(config_error(
                "timing",
                "width, dim, batch, num_fourier and chunk_size must be positive",
            ));
        }
        if t.repetitions == 0 {
            return Err(config_error("timing.repetitions", "must be positive"));
        }
        if t.models.is_empty() {
            return Err(config_error("timing.models", "must be nonempty"));
        }
        Ok(())
    }
}
