//! Wild-bootstrap configuration and the shared inference helpers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Law of the wild-bootstrap multipliers `η_t`. All have mean 0, variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Multiplier {
    #[default]
    Normal,
    /// ±1 with equal probability.
    Rademacher,
    /// Mammen's two-point law, which also matches a unit third moment.
    Mammen,
}

const SQRT5: f64 = 2.236_067_977_499_79;
const MAMMEN_LOW: f64 = -(SQRT5 - 1.0) / 2.0;
const MAMMEN_HIGH: f64 = (SQRT5 + 1.0) / 2.0;
const MAMMEN_P_LOW: f64 = (SQRT5 + 1.0) / (2.0 * SQRT5);

impl Multiplier {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Multiplier::Normal => rng.sample(StandardNormal),
            Multiplier::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Multiplier::Mammen => {
                if rng.random::<f64>() < MAMMEN_P_LOW {
                    MAMMEN_LOW
                } else {
                    MAMMEN_HIGH
                }
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(self, rng: &mut R, out: &mut [f64]) {
        for v in out {
            *v = self.draw(rng);
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Multiplier::Normal => "normal",
            Multiplier::Rademacher => "rademacher",
            Multiplier::Mammen => "mammen",
        }
    }
}

impl std::str::FromStr for Multiplier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Multiplier::Normal),
            "rademacher" => Ok(Multiplier::Rademacher),
            "mammen" => Ok(Multiplier::Mammen),
            other => Err(Error::InvalidParameter(format!("unknown multiplier law '{other}'"))),
        }
    }
}

/// Replication count, multiplier law, and master seed of a wild bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub n_boot: usize,
    pub multiplier: Multiplier,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_boot: 500,
            multiplier: Multiplier::Normal,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn new(n_boot: usize, multiplier: Multiplier, seed: u64) -> Result<Self> {
        let cfg = Self {
            n_boot,
            multiplier,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_boot == 0 {
            return Err(Error::InvalidParameter("n_boot must be at least 1".into()));
        }
        Ok(())
    }
}

/// Add-one bootstrap p-value `(1 + #{extreme}) / (B + 1)`.
pub fn add_one_p_value(exceedances: usize, n_boot: usize) -> f64 {
    (1 + exceedances) as f64 / (n_boot + 1) as f64
}

/// Empirical quantile with linear interpolation between order statistics
/// (`h = (n−1)·p`). `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
