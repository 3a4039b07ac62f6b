//! Wild-bootstrap automatic variance ratio test.
//!
//! `VR(k) = 1 + 2 Σ_{i=1}^{T−1} m(i/k) ρ̂(i)` with the quadratic spectral
//! kernel `m`, standardized as `AVR(k) = √(T/k)·(VR(k) − 1)/√2`. The
//! bandwidth `k̂` comes from the AR(1) plug-in rule for the QS kernel and is
//! re-selected inside every bootstrap replication.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::bootstrap::{add_one_p_value, quantile_sorted, BootstrapConfig};
use crate::error::{Error, Result};
use crate::rng::{substream, tag};
use crate::series::{all_autocorrelations, autocorrelation, ReturnSeries};

const MIN_LEN: usize = 4;
const QS_PLUGIN_CONSTANT: f64 = 1.3221;

/// Quadratic spectral kernel, with its limit `m(0) = 1`.
pub fn qs_kernel(x: f64) -> f64 {
    // With z = 6πx/5 the kernel is 3/z² · (sin z / z − cos z).
    let z = 1.2 * PI * x;
    let z2 = z * z;
    if z.abs() < 0.1 {
        // Taylor series; the closed form loses digits to cancellation here
        return 1.0 - z2 / 10.0 * (1.0 - z2 / 28.0 * (1.0 - z2 / 54.0 * (1.0 - z2 / 88.0)));
    }
    3.0 / z2 * (z.sin() / z - z.cos())
}

/// Result of the point statistic: `statistic = √(T/bandwidth)·(vr − 1)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvrStatistic {
    pub statistic: f64,
    pub vr: f64,
    pub bandwidth: f64,
}

/// Outcome of [`avr_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct AvrOutcome {
    pub vr: f64,
    pub statistic: f64,
    pub bandwidth: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_boot: usize,
}

/// The standardization `√(T/k)·(VR − 1)/√2`.
#[inline]
pub fn standardize(len: usize, bandwidth: f64, vr: f64) -> f64 {
    (len as f64 / bandwidth).sqrt() * (vr - 1.0) / std::f64::consts::SQRT_2
}

/// AR(1) plug-in bandwidth `1.3221·(α̂(2)·T)^{1/5}` with
/// `α̂(2) = 4ρ̂²/(1−ρ̂)⁴`, floored at 1.
pub fn bandwidth_from_rho1(rho1: f64, len: usize) -> f64 {
    let alpha2 = 4.0 * rho1 * rho1 / (1.0 - rho1).powi(4);
    let k = QS_PLUGIN_CONSTANT * (alpha2 * len as f64).powf(0.2);
    if k.is_finite() && k >= 1.0 {
        k
    } else {
        1.0
    }
}

fn check_len(len: usize) -> Result<()> {
    if len < MIN_LEN {
        return Err(Error::TooShort {
            needed: MIN_LEN,
            available: len,
        });
    }
    Ok(())
}

fn check_bandwidth(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive and finite, got {k}"
        )));
    }
    Ok(())
}

pub fn auto_bandwidth(series: &ReturnSeries) -> Result<f64> {
    check_len(series.len())?;
    let rho1 = autocorrelation(series.values(), 1)?;
    Ok(bandwidth_from_rho1(rho1, series.len()))
}

pub fn variance_ratio(series: &ReturnSeries, k: f64) -> Result<f64> {
    check_len(series.len())?;
    check_bandwidth(k)?;
    let mut scratch = Scratch::default();
    all_autocorrelations(series.values(), &mut scratch.centered, &mut scratch.rho)?;
    Ok(vr_from_rho(&scratch.rho, k))
}

fn vr_from_rho(rho: &[f64], k: f64) -> f64 {
    let weighted: f64 = rho
        .iter()
        .enumerate()
        .map(|(i, r)| qs_kernel((i + 1) as f64 / k) * r)
        .sum();
    1.0 + 2.0 * weighted
}

pub fn avr_statistic(series: &ReturnSeries) -> Result<AvrStatistic> {
    check_len(series.len())?;
    statistic_with(series.values(), &mut Scratch::default())
}

#[derive(Default)]
struct Scratch {
    centered: Vec<f64>,
    rho: Vec<f64>,
    resampled: Vec<f64>,
}

fn statistic_with(values: &[f64], scratch: &mut Scratch) -> Result<AvrStatistic> {
    all_autocorrelations(values, &mut scratch.centered, &mut scratch.rho)?;
    let bandwidth = bandwidth_from_rho1(scratch.rho[0], values.len());
    let vr = vr_from_rho(&scratch.rho, bandwidth);
    Ok(AvrStatistic {
        statistic: standardize(values.len(), bandwidth, vr),
        vr,
        bandwidth,
    })
}

/// Bootstrap replicates `AVR*(k̂*)`, in replication order. Replication `j`
/// multiplies the series by multipliers drawn from substream
/// `(seed, [AVR_BOOT, j])` and recomputes the whole pipeline.
pub fn bootstrap_statistics(values: &[f64], boot: &BootstrapConfig) -> Result<Vec<f64>> {
    boot.validate()?;
    check_len(values.len())?;
    (0..boot.n_boot)
        .into_par_iter()
        .map_init(Scratch::default, |scratch, j| {
            let mut rng = substream(boot.seed, &[tag::AVR_BOOT, j as u64]);
            scratch.resampled.clear();
            scratch
                .resampled
                .extend(values.iter().map(|y| boot.multiplier.draw(&mut rng) * y));
            let resampled = std::mem::take(&mut scratch.resampled);
            let out = statistic_with(&resampled, scratch).map(|s| s.statistic);
            scratch.resampled = resampled;
            out
        })
        .collect()
}

pub fn avr_test(series: &ReturnSeries, boot: &BootstrapConfig) -> Result<AvrOutcome> {
    let point = avr_statistic(series)?;
    let mut stars = bootstrap_statistics(series.values(), boot)?;
    let extreme = stars.iter().filter(|s| s.abs() >= point.statistic.abs()).count();
    stars.sort_by(f64::total_cmp);
    Ok(AvrOutcome {
        vr: point.vr,
        statistic: point.statistic,
        bandwidth: point.bandwidth,
        p_value: add_one_p_value(extreme, boot.n_boot),
        ci_low: quantile_sorted(&stars, 0.025),
        ci_high: quantile_sorted(&stars, 0.975),
        n_boot: boot.n_boot,
    })
}
