//! Generalized spectral test of the martingale difference hypothesis.
//!
//! The statistic is the integrated Cramér–von Mises norm
//!
//! ```text
//! D² = Σ_{j=1}^{J} (T−j)/(jπ)² · Σ_{t,s=j+1}^{T} e_t e_s · exp(−½(Y_{t−j} − Y_{s−j})²)
//! ```
//!
//! with lag-specific residuals `e_t = Y_t − Ȳ_{T−j}`. The Gaussian kernel of
//! the conditioning values is the same for every lag, so it is evaluated once
//! as a [`GramMatrix`] and each lag reads its leading `(T−j)×(T−j)` block.
//!
//! The wild bootstrap multiplies the residuals by `η_t` and keeps the
//! conditioning values fixed. Each lag's kernel block is doubly centered in
//! the bootstrap (the empirical characteristic function is subtracted from
//! the exponential weight); for the sample statistic the residuals sum to
//! zero, so the centering drops out and both routes coincide.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::bootstrap::{add_one_p_value, BootstrapConfig};
use crate::error::{Error, Result};
use crate::rng::{substream, tag};
use crate::series::{dot, is_constant, ReturnSeries};

/// Above this length the per-lag quadratic forms use compensated summation.
const COMPENSATED_ABOVE: usize = 1_000;
/// Bootstrap replications evaluated together through one matrix product.
const REPLICATION_BLOCK: usize = 64;
/// Row-block height of the triangular quadratic-form kernel.
const ROW_BLOCK: usize = 64;

/// Number of lags entering `D²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaxLag {
    /// All lags `1..=T−1`.
    #[default]
    Full,
    Lags(usize),
}

impl MaxLag {
    pub fn resolve(self, len: usize) -> Result<usize> {
        let full = len.saturating_sub(1);
        match self {
            MaxLag::Full => Ok(full),
            MaxLag::Lags(0) => Err(Error::InvalidParameter("max_lag must be at least 1".into())),
            MaxLag::Lags(j) if j > full => Err(Error::InvalidParameter(format!("max_lag {j} exceeds T−1 = {full}"))),
            MaxLag::Lags(j) => Ok(j),
        }
    }
}

impl std::str::FromStr for MaxLag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(MaxLag::Full);
        }
        s.parse::<usize>()
            .map(MaxLag::Lags)
            .map_err(|_| Error::InvalidParameter(format!("max_lag must be 'full' or a positive integer, got '{s}'")))
    }
}

/// Outcome of [`gs_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct GsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub n_boot: usize,
    pub max_lag_used: usize,
}

/// Symmetric `T×T` matrix `W[a,b] = exp(−½(Y_a − Y_b)²)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    pub fn from_values(values: &[f64]) -> Self {
        let dim = values.len();
        let mut entries = vec![0.0; dim * dim];
        for a in 0..dim {
            entries[a * dim + a] = 1.0;
            for b in 0..a {
                let d = values[a] - values[b];
                let w = (-0.5 * d * d).exp();
                entries[a * dim + b] = w;
                entries[b * dim + a] = w;
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.dim + b]
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[f64] {
        &self.entries[a * self.dim..(a + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

pub fn gram_matrix(series: &ReturnSeries) -> Result<GramMatrix> {
    check_len(series.len())?;
    Ok(GramMatrix::from_values(series.values()))
}

fn check_len(len: usize) -> Result<()> {
    if len < 2 {
        return Err(Error::TooShort {
            needed: 2,
            available: len,
        });
    }
    Ok(())
}

/// `(T−j)/(jπ)²`.
#[inline]
pub fn lag_weight(len: usize, lag: usize) -> f64 {
    let jp = lag as f64 * PI;
    (len - lag) as f64 / (jp * jp)
}

/// Mean of `Y_{j+1..T}`, the centering for lag `j`.
fn lag_mean(values: &[f64], lag: usize) -> f64 {
    let tail = &values[lag..];
    tail.iter().sum::<f64>() / tail.len() as f64
}

/// `D²` for the configured number of lags. A constant series gives 0.
pub fn gs_statistic(series: &ReturnSeries, max_lag: MaxLag) -> Result<f64> {
    let values = series.values();
    check_len(values.len())?;
    let lags = max_lag.resolve(values.len())?;
    if is_constant(values) {
        return Ok(0.0);
    }
    let gram = GramMatrix::from_values(values);
    Ok(statistic_from_gram(values, &gram, lags))
}

pub(crate) fn statistic_from_gram(values: &[f64], gram: &GramMatrix, lags: usize) -> f64 {
    let len = values.len();
    let compensated = len > COMPENSATED_ABOVE;
    let terms: Vec<f64> = (1..=lags)
        .into_par_iter()
        .map(|j| {
            let m = lag_mean(values, j);
            let resid: Vec<f64> = values[j..].iter().map(|y| y - m).collect();
            lag_weight(len, j) * lag_quadratic_form(gram, &resid, compensated)
        })
        .collect();
    neumaier_sum(terms.iter().copied())
}

/// `eᵀ W_n e` over the leading `n = e.len()` block, using symmetry. Clamped
/// at zero: the block is positive semidefinite.
fn lag_quadratic_form(gram: &GramMatrix, resid: &[f64], compensated: bool) -> f64 {
    let q = if compensated {
        let diag = neumaier_sum(resid.iter().map(|e| e * e));
        let off =
            neumaier_sum((1..resid.len()).map(|u| resid[u] * neumaier_sum((0..u).map(|v| gram.get(u, v) * resid[v]))));
        diag + 2.0 * off
    } else {
        let diag = dot(resid, resid);
        let off: f64 = (1..resid.len())
            .map(|u| resid[u] * dot(&gram.row(u)[..u], &resid[..u]))
            .sum();
        diag + 2.0 * off
    };
    q.max(0.0)
}

fn neumaier_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Upper bound on the part of `D²` dropped by truncating at `max_lag`:
/// `Σ_{j>J} (T−j)/(jπ)² · (T−j)·‖e^{(j)}‖²`, since every entry of `W` is at
/// most one.
pub fn truncation_bound(series: &ReturnSeries, max_lag: MaxLag) -> Result<f64> {
    let values = series.values();
    check_len(values.len())?;
    let len = values.len();
    let lags = max_lag.resolve(len)?;
    Ok(((lags + 1)..len)
        .map(|j| {
            let m = lag_mean(values, j);
            let ss: f64 = values[j..].iter().map(|y| (y - m) * (y - m)).sum();
            lag_weight(len, j) * (len - j) as f64 * ss
        })
        .sum())
}

pub fn gs_test(series: &ReturnSeries, boot: &BootstrapConfig, max_lag: MaxLag) -> Result<GsOutcome> {
    boot.validate()?;
    let values = series.values();
    check_len(values.len())?;
    let lags = max_lag.resolve(values.len())?;
    if is_constant(values) {
        return Err(Error::Degenerate);
    }
    let gram = GramMatrix::from_values(values);
    let statistic = statistic_from_gram(values, &gram, lags);
    let stars = bootstrap_statistics_with(values, &gram, lags, boot);
    let exceed = stars.iter().filter(|&&s| s >= statistic).count();
    Ok(GsOutcome {
        statistic,
        p_value: add_one_p_value(exceed, boot.n_boot),
        n_boot: boot.n_boot,
        max_lag_used: lags,
    })
}

/// Bootstrap replicates `D*²` in replication order. Replication `r` draws
/// `η_1..η_T` from substream `(seed, [GS_BOOT, r])`.
pub fn bootstrap_statistics(series: &ReturnSeries, boot: &BootstrapConfig, max_lag: MaxLag) -> Result<Vec<f64>> {
    boot.validate()?;
    let values = series.values();
    check_len(values.len())?;
    let lags = max_lag.resolve(values.len())?;
    let gram = GramMatrix::from_values(values);
    Ok(bootstrap_statistics_with(values, &gram, lags, boot))
}

fn bootstrap_statistics_with(values: &[f64], gram: &GramMatrix, lags: usize, boot: &BootstrapConfig) -> Vec<f64> {
    let len = values.len();
    let blocks: Vec<(usize, usize)> = (0..boot.n_boot)
        .step_by(REPLICATION_BLOCK)
        .map(|start| (start, (start + REPLICATION_BLOCK).min(boot.n_boot)))
        .collect();
    let per_block: Vec<Vec<f64>> = blocks
        .into_par_iter()
        .map(|(start, end)| {
            let width = end - start;
            // multipliers[t * width + b] is η_t of replication start + b
            let mut multipliers = vec![0.0; len * width];
            for b in 0..width {
                let mut rng = substream(boot.seed, &[tag::GS_BOOT, (start + b) as u64]);
                for t in 0..len {
                    multipliers[t * width + b] = boot.multiplier.draw(&mut rng);
                }
            }
            replicate_block(values, gram, lags, &multipliers, width)
        })
        .collect();
    per_block.into_iter().flatten().collect()
}

/// `D*²` for `width` replications whose multipliers are the columns of the
/// row-major `T×width` matrix `multipliers`.
pub(crate) fn replicate_block(
    values: &[f64],
    gram: &GramMatrix,
    lags: usize,
    multipliers: &[f64],
    width: usize,
) -> Vec<f64> {
    let len = values.len();
    debug_assert_eq!(multipliers.len(), len * width);
    let mut acc = vec![0.0; width];
    let mut x = vec![0.0; len * width];
    let mut work = vec![0.0; ROW_BLOCK * width];
    let mut q = vec![0.0; width];
    let mut sum_x = vec![0.0; width];
    let mut rsum_x = vec![0.0; width];

    // Row sums of the leading n×n block, shrunk as n decreases with the lag.
    let mut row_sums: Vec<f64> = (0..len).map(|u| gram.row(u).iter().sum()).collect();
    let mut n_current = len;

    for j in 1..=lags {
        let n = len - j;
        while n_current > n {
            n_current -= 1;
            for (u, r) in row_sums.iter_mut().enumerate().take(n_current) {
                *r -= gram.get(u, n_current);
            }
        }
        let block_sum: f64 = row_sums[..n].iter().sum();
        let m = lag_mean(values, j);
        for u in 0..n {
            let e = values[u + j] - m;
            let eta = &multipliers[(u + j) * width..(u + j + 1) * width];
            for (xv, h) in x[u * width..(u + 1) * width].iter_mut().zip(eta) {
                *xv = h * e;
            }
        }
        let x = &x[..n * width];
        quadratic_forms(gram, n, x, width, &mut work, &mut q);

        sum_x.fill(0.0);
        rsum_x.fill(0.0);
        for u in 0..n {
            let r = row_sums[u];
            for (b, xv) in x[u * width..(u + 1) * width].iter().enumerate() {
                sum_x[b] += xv;
                rsum_x[b] += r * xv;
            }
        }
        let nf = n as f64;
        let weight = lag_weight(len, j);
        for b in 0..width {
            let centered = q[b] - 2.0 * rsum_x[b] * sum_x[b] / nf + sum_x[b] * sum_x[b] * block_sum / (nf * nf);
            acc[b] += weight * centered;
        }
    }
    acc
}

/// `q[b] = x_bᵀ W_n x_b` for each column `b` of the row-major `n×width`
/// matrix `x`. Only the lower triangle of `W_n` is touched: each row block
/// multiplies the rows above it through one GEMM, and the diagonal block is
/// summed directly.
fn quadratic_forms(gram: &GramMatrix, n: usize, x: &[f64], width: usize, work: &mut [f64], q: &mut [f64]) {
    let ld = gram.dim();
    let w = gram.as_slice();
    q.fill(0.0);
    let mut off = vec![0.0; width];
    let mut i0 = 0;
    while i0 < n {
        let i1 = (i0 + ROW_BLOCK).min(n);
        let rows = i1 - i0;
        if i0 > 0 {
            // work[rows×width] = W[i0..i1, 0..i0] · x[0..i0, :]
            // SAFETY: all pointers and strides describe in-bounds row-major
            // blocks: W is ld×ld with i1 ≤ n ≤ ld, x holds n×width, and work
            // holds at least ROW_BLOCK×width ≥ rows×width entries.
            unsafe {
                matrixmultiply::dgemm(
                    rows,
                    i0,
                    width,
                    1.0,
                    w.as_ptr().add(i0 * ld),
                    ld as isize,
                    1,
                    x.as_ptr(),
                    width as isize,
                    1,
                    0.0,
                    work.as_mut_ptr(),
                    width as isize,
                    1,
                );
            }
            for u in 0..rows {
                let xu = &x[(i0 + u) * width..(i0 + u + 1) * width];
                let wu = &work[u * width..(u + 1) * width];
                for b in 0..width {
                    off[b] += xu[b] * wu[b];
                }
            }
        }
        for u in i0..i1 {
            let xu = &x[u * width..(u + 1) * width];
            for b in 0..width {
                q[b] += xu[b] * xu[b];
            }
            let wrow = &w[u * ld..u * ld + u];
            for v in i0..u {
                let wuv = wrow[v];
                let xv = &x[v * width..(v + 1) * width];
                for b in 0..width {
                    off[b] += wuv * xu[b] * xv[b];
                }
            }
        }
        i0 = i1;
    }
    for b in 0..width {
        q[b] += 2.0 * off[b];
    }
}
