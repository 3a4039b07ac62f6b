//! Return-series container, moment statistics, and the sample autocorrelation
//! estimator shared by both tests.

use chrono::{Datelike, Duration, NaiveDate, Weekday};

use crate::error::{Error, Result};

/// Sampling frequency of a return series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frequency {
    Daily,
    Weekly,
}

impl Frequency {
    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Daily => "daily",
            Frequency::Weekly => "weekly",
        }
    }
}

impl std::str::FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "daily" | "d" => Ok(Frequency::Daily),
            "weekly" | "w" => Ok(Frequency::Weekly),
            other => Err(Error::InvalidParameter(format!("unknown frequency '{other}'"))),
        }
    }
}

/// An ordered, dated sequence of simple returns.
///
/// Construction enforces equal lengths, strictly increasing dates, at least
/// one observation, and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    dates: Vec<NaiveDate>,
    frequency: Frequency,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, dates: Vec<NaiveDate>, frequency: Frequency) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series is empty".into()));
        }
        if values.len() != dates.len() {
            return Err(Error::InvalidSeries(format!(
                "{} values but {} dates",
                values.len(),
                dates.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite value at index {i}")));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSeries(format!(
                "dates not strictly increasing at index {} ({} then {})",
                i + 1,
                dates[i],
                dates[i + 1]
            )));
        }
        Ok(Self {
            values,
            dates,
            frequency,
        })
    }

    /// Attaches evenly spaced synthetic dates starting at 2000-01-03: weekdays
    /// for daily data, every seventh day for weekly data.
    pub fn with_synthetic_dates(values: Vec<f64>, frequency: Frequency) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
        let dates = synthetic_dates(start, values.len(), frequency);
        Self::new(values, dates, frequency)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Contiguous sub-series over an index range. Panics on an empty or
    /// out-of-bounds range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> ReturnSeries {
        assert!(!range.is_empty(), "empty slice of a return series");
        ReturnSeries {
            values: self.values[range.clone()].to_vec(),
            dates: self.dates[range].to_vec(),
            frequency: self.frequency,
        }
    }

    /// Applies `f` to every value, keeping the dates. Fails if the result is
    /// not finite.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<ReturnSeries> {
        ReturnSeries::new(
            self.values.iter().map(|&v| f(v)).collect(),
            self.dates.clone(),
            self.frequency,
        )
    }
}

/// Weekdays (daily) or every seventh day (weekly) from `start`, which is
/// rolled forward to a weekday for daily data.
pub fn synthetic_dates(start: NaiveDate, n: usize, frequency: Frequency) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    match frequency {
        Frequency::Weekly => {
            for _ in 0..n {
                out.push(d);
                d += Duration::days(7);
            }
        }
        Frequency::Daily => {
            while out.len() < n {
                if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
                    out.push(d);
                }
                d += Duration::days(1);
            }
        }
    }
    out
}

/// Table-1 style descriptive statistics.
///
/// Moments are population-style (divide by `size`), `kurtosis` is raw (3 for
/// a Gaussian), and `jb_p` is the chi-square(2) upper tail of `jarque_bera`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub size: usize,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub jarque_bera: f64,
    pub jb_p: f64,
}

/// `size/6 · (S² + (K−3)²/4)`.
pub fn jarque_bera(size: usize, skewness: f64, kurtosis: f64) -> f64 {
    let excess = kurtosis - 3.0;
    size as f64 / 6.0 * (skewness * skewness + excess * excess / 4.0)
}

/// Upper tail of the chi-square distribution with two degrees of freedom.
pub fn chi2_2_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (-0.5 * x).exp()
    }
}

pub fn describe(series: &ReturnSeries) -> Result<MomentSummary> {
    describe_values(series.values())
}

pub fn describe_values(values: &[f64]) -> Result<MomentSummary> {
    let n = values.len();
    if n < 4 {
        return Err(Error::TooShort {
            needed: 4,
            available: n,
        });
    }
    let mean = mean(values);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if is_constant(values) {
        return Err(Error::Degenerate);
    }
    let nf = n as f64;
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return Err(Error::Degenerate);
    }
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    let jb = jarque_bera(n, skewness, kurtosis);
    Ok(MomentSummary {
        size: n,
        mean,
        std: m2.sqrt(),
        skewness,
        kurtosis,
        jarque_bera: jb,
        jb_p: chi2_2_sf(jb),
    })
}

/// Exact constancy. Rounding in the mean leaves residuals of order 1e-17
/// for a constant series, so zero variance cannot be detected from them.
pub(crate) fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `ρ̂(lag)`: lagged cross-product of deviations from the full-sample mean over
/// the total sum of squared deviations.
pub fn autocorr(series: &ReturnSeries, lag: usize) -> Result<f64> {
    autocorrelation(series.values(), lag)
}

pub fn autocorrelation(values: &[f64], lag: usize) -> Result<f64> {
    let n = values.len();
    if lag == 0 || lag >= n {
        return Err(Error::InvalidParameter(format!(
            "lag {lag} outside 1..={}",
            n.saturating_sub(1)
        )));
    }
    let centered = centered(values);
    let denom = dot(&centered, &centered);
    if denom <= 0.0 || is_constant(values) {
        return Err(Error::Degenerate);
    }
    Ok(dot(&centered[..n - lag], &centered[lag..]) / denom)
}

pub(crate) fn centered(values: &[f64]) -> Vec<f64> {
    let m = mean(values);
    values.iter().map(|v| v - m).collect()
}

/// Unnormalised sample autocorrelations `ρ̂(1), …, ρ̂(T−1)` of `values`,
/// written into `out` (resized to `T−1`). `scratch` receives the centered
/// series. Returns an error for a zero-variance input.
pub(crate) fn all_autocorrelations(values: &[f64], scratch: &mut Vec<f64>, out: &mut Vec<f64>) -> Result<()> {
    let n = values.len();
    let m = mean(values);
    scratch.clear();
    scratch.extend(values.iter().map(|v| v - m));
    let denom = dot(scratch, scratch);
    if denom <= 0.0 || is_constant(values) {
        return Err(Error::Degenerate);
    }
    out.clear();
    out.extend((1..n).map(|lag| dot(&scratch[..n - lag], &scratch[lag..]) / denom));
    Ok(())
}

/// Dot product with four independent accumulators so the loop vectorises.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
