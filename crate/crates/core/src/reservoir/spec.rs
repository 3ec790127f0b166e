use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::LyndonBasis;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Identity,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(T::zero()),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Identity => "id",
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" | "identity" => Ok(Activation::Identity),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::invalid(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "rcde", alias = "r-cde")]
    Rcde,
    #[serde(rename = "rfcde", alias = "rf-cde")]
    Rfcde,
    #[serde(rename = "rrde", alias = "r-rde")]
    Rrde,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Rcde => "rcde",
            Variant::Rfcde => "rfcde",
            Variant::Rrde => "rrde",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rcde" | "r-cde" => Ok(Variant::Rcde),
            "rfcde" | "rf-cde" => Ok(Variant::Rfcde),
            "rrde" | "r-rde" => Ok(Variant::Rrde),
            other => Err(Error::invalid(format!("unknown variant `{other}`"))),
        }
    }
}

/// How the R-RDE applies its random commutators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommutatorMode {
    /// Dense table for `N <= 512`, matrix-free above.
    #[default]
    Auto,
    /// Precompute every `B^(w)` as an `N × N` matrix (`O(N^3)` per word once).
    Dense,
    /// Apply `Π_B(L)` as a sum of products of the letter matrices.
    MatrixFree,
}

/// Hyperparameters of a random reservoir. Frozen once a state is drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub variant: Variant,
    /// Reservoir width `N`.
    pub width: usize,
    /// Channel count of the (preprocessed) input path.
    pub input_dim: usize,
    pub activation: Activation,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub sigma_0: f64,
    pub seed: u64,
    /// Number of random Fourier frequencies `F` (RF-CDE).
    #[serde(default = "default_num_fourier")]
    pub num_fourier: usize,
    /// Scale of the Fourier frequencies (RF-CDE).
    #[serde(default = "default_frequency_scale")]
    pub frequency_scale: f64,
    /// Log-signature level `m` (R-RDE).
    #[serde(default = "default_level")]
    pub level: usize,
    /// Path steps per log-signature window (R-RDE).
    #[serde(default = "default_chunk")]
    pub chunk_size: usize,
    #[serde(default)]
    pub commutators: CommutatorMode,
}

fn default_num_fourier() -> usize {
    64
}
fn default_frequency_scale() -> f64 {
    1.0
}
fn default_level() -> usize {
    2
}
fn default_chunk() -> usize {
    4
}

impl ReservoirSpec {
    /// Identity activation, `σ_A = σ_0 = 1`, `σ_b = 0`.
    pub fn new(variant: Variant, width: usize, input_dim: usize, seed: u64) -> Self {
        ReservoirSpec {
            variant,
            width,
            input_dim,
            activation: Activation::Identity,
            sigma_a: 1.0,
            sigma_b: 0.0,
            sigma_0: 1.0,
            seed,
            num_fourier: default_num_fourier(),
            frequency_scale: default_frequency_scale(),
            level: default_level(),
            chunk_size: default_chunk(),
            commutators: CommutatorMode::Auto,
        }
    }

    pub fn rcde(width: usize, input_dim: usize, seed: u64) -> Self {
        Self::new(Variant::Rcde, width, input_dim, seed)
    }

    pub fn rfcde(width: usize, input_dim: usize, num_fourier: usize, frequency_scale: f64, seed: u64) -> Self {
        ReservoirSpec {
            num_fourier,
            frequency_scale,
            ..Self::new(Variant::Rfcde, width, input_dim, seed)
        }
    }

    pub fn rrde(width: usize, input_dim: usize, level: usize, chunk_size: usize, seed: u64) -> Self {
        ReservoirSpec {
            level,
            chunk_size,
            ..Self::new(Variant::Rrde, width, input_dim, seed)
        }
    }

    pub fn with_scales(mut self, sigma_a: f64, sigma_b: f64, sigma_0: f64) -> Self {
        self.sigma_a = sigma_a;
        self.sigma_b = sigma_b;
        self.sigma_0 = sigma_0;
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::invalid("reservoir width N must be >= 1"));
        }
        if self.input_dim == 0 {
            return Err(Error::invalid("reservoir input dimension must be >= 1"));
        }
        if !(self.sigma_a > 0.0) || !self.sigma_a.is_finite() {
            return Err(Error::invalid(format!("sigma_A must be > 0, got {}", self.sigma_a)));
        }
        if !(self.sigma_b >= 0.0) || !self.sigma_b.is_finite() {
            return Err(Error::invalid(format!("sigma_b must be >= 0, got {}", self.sigma_b)));
        }
        if !(self.sigma_0 >= 0.0) || !self.sigma_0.is_finite() {
            return Err(Error::invalid(format!("sigma_0 must be >= 0, got {}", self.sigma_0)));
        }
        match self.variant {
            Variant::Rfcde => {
                if self.num_fourier == 0 {
                    return Err(Error::invalid("RF-CDE needs at least one Fourier feature"));
                }
                if !(self.frequency_scale > 0.0) {
                    return Err(Error::invalid("RF-CDE frequency scale must be > 0"));
                }
            }
            Variant::Rrde => {
                if self.level == 0 {
                    return Err(Error::invalid("R-RDE log-signature level must be >= 1"));
                }
                if self.chunk_size == 0 {
                    return Err(Error::invalid("R-RDE chunk size must be >= 1"));
                }
            }
            Variant::Rcde => {}
        }
        Ok(())
    }

    /// Dimension of the signal driving the state update: `d` (R-CDE), `2F`
    /// (RF-CDE) or the number of Lyndon words (R-RDE).
    pub fn driver_dim(&self) -> usize {
        match self.variant {
            Variant::Rcde => self.input_dim,
            Variant::Rfcde => 2 * self.num_fourier,
            Variant::Rrde => LyndonBasis::shared(self.input_dim, self.level).len(),
        }
    }

    /// Whether R-RDE uses a dense commutator table.
    pub fn dense_commutators(&self) -> bool {
        match self.commutators {
            CommutatorMode::Dense => true,
            CommutatorMode::MatrixFree => false,
            CommutatorMode::Auto => self.width <= 512,
        }
    }

    /// Short stable hash of the spec (first 16 hex digits of SHA-256 over
    /// its JSON form).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
