//! Seeded synthetic return processes for oracles and size/power studies.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{substream, tag};
use crate::series::{Frequency, ReturnSeries};

const MIN_BURN_IN: usize = 100;

/// Process family and its parameters. Innovations are standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DgpKind {
    IidNormal,
    /// `Y_t = φ Y_{t−1} + ε_t`
    Ar1 {
        phi: f64,
    },
    /// `Y_t = σ_t ε_t`, `σ²_t = ω + α Y²_{t−1} + β σ²_{t−1}`
    Garch11 {
        omega: f64,
        alpha: f64,
        beta: f64,
    },
    /// `Y_t = b Y_{t−1} ε_{t−1} + ε_t`
    Bilinear {
        b: f64,
    },
}

impl DgpKind {
    pub fn name(&self) -> &'static str {
        match self {
            DgpKind::IidNormal => "iid",
            DgpKind::Ar1 { .. } => "ar1",
            DgpKind::Garch11 { .. } => "garch11",
            DgpKind::Bilinear { .. } => "bilinear",
        }
    }

    fn is_recursive(&self) -> bool {
        !matches!(self, DgpKind::IidNormal)
    }

    /// Builds a kind from its name and positional parameters
    /// (`ar1: φ`, `garch11: ω,α,β`, `bilinear: b`).
    pub fn from_parts(name: &str, params: &[f64]) -> Result<Self> {
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "iid" | "iid_normal" => {
                arity(0)?;
                DgpKind::IidNormal
            }
            "ar1" => {
                arity(1)?;
                DgpKind::Ar1 { phi: params[0] }
            }
            "garch11" | "garch" => {
                arity(3)?;
                DgpKind::Garch11 {
                    omega: params[0],
                    alpha: params[1],
                    beta: params[2],
                }
            }
            "bilinear" => {
                arity(1)?;
                DgpKind::Bilinear { b: params[0] }
            }
            other => return Err(Error::InvalidParameter(format!("unknown process '{other}'"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            DgpKind::IidNormal => Ok(()),
            DgpKind::Ar1 { phi } if phi.is_nan() || phi.abs() >= 1.0 => bad(format!("ar1 needs |φ| < 1, got {phi}")),
            DgpKind::Garch11 { omega, alpha, beta }
                if !(omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0) =>
            {
                bad(format!(
                    "garch11 needs ω > 0, α, β ≥ 0, α + β < 1; got ({omega}, {alpha}, {beta})"
                ))
            }
            DgpKind::Bilinear { b } if b.is_nan() || b.abs() >= 1.0 => bad(format!("bilinear needs |b| < 1, got {b}")),
            _ => Ok(()),
        }
    }
}

/// A validated process definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpSpec {
    kind: DgpKind,
    length: usize,
    burn_in: usize,
    seed: u64,
    frequency: Frequency,
}

impl DgpSpec {
    /// Daily frequency; burn-in of 500 for recursive processes, none for iid.
    pub fn new(kind: DgpKind, length: usize, seed: u64) -> Result<Self> {
        let burn_in = if kind.is_recursive() { 500 } else { 0 };
        Self::with_options(kind, length, burn_in, seed, Frequency::Daily)
    }

    pub fn with_options(kind: DgpKind, length: usize, burn_in: usize, seed: u64, frequency: Frequency) -> Result<Self> {
        kind.validate()?;
        if length == 0 {
            return Err(Error::InvalidParameter("length must be at least 1".into()));
        }
        if kind.is_recursive() && burn_in < MIN_BURN_IN {
            return Err(Error::InvalidParameter(format!(
                "{} needs a burn-in of at least {MIN_BURN_IN}, got {burn_in}",
                kind.name()
            )));
        }
        Ok(Self {
            kind,
            length,
            burn_in,
            seed,
            frequency,
        })
    }

    pub fn kind(&self) -> DgpKind {
        self.kind
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_length(self, length: usize) -> Result<Self> {
        Self::with_options(self.kind, length, self.burn_in, self.seed, self.frequency)
    }
}

/// Raw values of the process, burn-in discarded.
pub fn simulate_values(spec: &DgpSpec) -> Vec<f64> {
    let mut rng = substream(spec.seed, &[tag::DGP]);
    let total = spec.length + spec.burn_in;
    let mut eps = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut out = Vec::with_capacity(total);
    match spec.kind {
        DgpKind::IidNormal => out.extend((0..total).map(|_| eps())),
        DgpKind::Ar1 { phi } => {
            let mut y = 0.0;
            for _ in 0..total {
                y = phi * y + eps();
                out.push(y);
            }
        }
        DgpKind::Garch11 { omega, alpha, beta } => {
            let mut var = omega / (1.0 - alpha - beta);
            let mut y: f64 = 0.0;
            for _ in 0..total {
                var = omega + alpha * y * y + beta * var;
                y = var.sqrt() * eps();
                out.push(y);
            }
        }
        DgpKind::Bilinear { b } => {
            let (mut y, mut e_prev) = (0.0, 0.0);
            for _ in 0..total {
                let e = eps();
                y = b * y * e_prev + e;
                e_prev = e;
                out.push(y);
            }
        }
    }
    out.split_off(spec.burn_in)
}

pub fn generate(spec: &DgpSpec) -> Result<ReturnSeries> {
    ReturnSeries::with_synthetic_dates(simulate_values(spec), spec.frequency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::autocorrelation;

    fn moments(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn iid_moments() {
        let v = simulate_values(&DgpSpec::new(DgpKind::IidNormal, 10_000, 1).unwrap());
        let (m, var) = moments(&v);
        assert!(m.abs() < 0.03, "{m}");
        assert!((0.94..=1.06).contains(&var), "{var}");
    }

    #[test]
    fn ar1_lag_one_autocorrelation() {
        let v = simulate_values(&DgpSpec::new(DgpKind::Ar1 { phi: 0.5 }, 10_000, 2).unwrap());
        let r = autocorrelation(&v, 1).unwrap();
        assert!((r - 0.5).abs() < 0.03, "{r}");
    }

    #[test]
    fn garch_levels_uncorrelated_squares_correlated() {
        let spec = DgpSpec::new(
            DgpKind::Garch11 {
                omega: 0.05,
                alpha: 0.1,
                beta: 0.85,
            },
            10_000,
            3,
        )
        .unwrap();
        let v = simulate_values(&spec);
        let r = autocorrelation(&v, 1).unwrap();
        let sq: Vec<f64> = v.iter().map(|y| y * y).collect();
        let r2 = autocorrelation(&sq, 1).unwrap();
        assert!(r.abs() < 0.03, "{r}");
        assert!(r2 > 0.05, "{r2}");
    }

    #[test]
    fn bilinear_mean_and_nonlinear_cross_moment() {
        let v = simulate_values(&DgpSpec::new(DgpKind::Bilinear { b: 0.4 }, 20_000, 4).unwrap());
        // E[Y_t] = b · E[Y_{t−1} ε_{t−1}] = b
        let (m, _) = moments(&v);
        assert!((m - 0.4).abs() < 0.05, "{m}");
        // E[Y_t · Y²_{t−1}] ≠ 0 for the bilinear model
        let n = v.len();
        let cross: f64 = (1..n).map(|t| v[t] * v[t - 1] * v[t - 1]).sum::<f64>() / (n - 1) as f64;
        assert!(cross > 0.1, "{cross}");
    }

    #[test]
    fn same_spec_same_series() {
        let spec = DgpSpec::new(
            DgpKind::Garch11 {
                omega: 0.05,
                alpha: 0.1,
                beta: 0.85,
            },
            300,
            9,
        )
        .unwrap();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(simulate_values(&spec), simulate_values(&spec.with_seed(10)));
    }

    #[test]
    fn invalid_parameters() {
        assert!(DgpKind::from_parts("ar1", &[1.0]).is_err());
        assert!(DgpKind::from_parts("ar1", &[]).is_err());
        assert!(DgpKind::from_parts("garch11", &[0.05, 0.5, 0.5]).is_err());
        assert!(DgpKind::from_parts("garch11", &[0.0, 0.1, 0.8]).is_err());
        assert!(DgpKind::from_parts("bilinear", &[1.2]).is_err());
        assert!(DgpKind::from_parts("arma", &[]).is_err());
        assert!(DgpSpec::with_options(DgpKind::Ar1 { phi: 0.2 }, 100, 50, 1, Frequency::Daily).is_err());
        assert!(DgpSpec::with_options(DgpKind::IidNormal, 100, 0, 1, Frequency::Daily).is_ok());
        assert!(DgpSpec::new(DgpKind::IidNormal, 0, 1).is_err());
    }
}
