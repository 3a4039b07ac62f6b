//! Calendar rolling-window re-estimation of either test.
//!
//! Windows are half-open calendar intervals `[Jan 1 of year₀ + i·step,
//! Jan 1 of year₀ + i·step + window)` anchored at the first observation's
//! year. They advance while the window ends no later than the year after the
//! last observation, so a series covering `S` calendar years yields
//! `⌊(S − window)/step⌋ + 1` windows.

use std::ops::Range;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;

use crate::avr::{avr_test, AvrOutcome};
use crate::bootstrap::BootstrapConfig;
use crate::error::{Error, Result};
use crate::gs::{gs_test, GsOutcome, MaxLag};
use crate::rng::{derive_seed, tag};
use crate::series::{Frequency, ReturnSeries};

/// Window length, step, and minimum sample size, in calendar years and
/// observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub window_years: u32,
    pub step_years: u32,
    pub min_observations: usize,
}

impl WindowSpec {
    pub const MIN_OBSERVATIONS_FLOOR: usize = 10;

    pub fn new(window_years: u32, step_years: u32, min_observations: usize) -> Result<Self> {
        let spec = Self {
            window_years,
            step_years,
            min_observations,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Two years for daily data (~500 observations), five for weekly (~260),
    /// stepping one year, skipping windows under 30 observations.
    pub fn for_frequency(frequency: Frequency) -> Self {
        let window_years = match frequency {
            Frequency::Daily => 2,
            Frequency::Weekly => 5,
        };
        Self {
            window_years,
            step_years: 1,
            min_observations: 30,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_years == 0 || self.step_years == 0 {
            return Err(Error::InvalidParameter(
                "window and step must be at least one year".into(),
            ));
        }
        if self.min_observations < Self::MIN_OBSERVATIONS_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "min_observations must be at least {}, got {}",
                Self::MIN_OBSERVATIONS_FLOOR,
                self.min_observations
            )));
        }
        Ok(())
    }
}

/// One calendar window: `[start, end)` and the observations inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub index: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub range: Range<usize>,
}

impl Window {
    /// Last calendar day covered by the window.
    pub fn last_day(&self) -> NaiveDate {
        self.end.pred_opt().expect("window end after 0001-01-01")
    }
}

fn jan1(year: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, 1, 1).expect("year within chrono range")
}

pub fn make_windows(series: &ReturnSeries, spec: &WindowSpec) -> Vec<Window> {
    let dates = series.dates();
    let (Some(first), Some(last)) = (dates.first(), dates.last()) else {
        return Vec::new();
    };
    let first_year = first.year();
    let limit_year = last.year() + 1;
    let mut out = Vec::new();
    let mut lo = 0;
    for index in 0.. {
        let start_year = first_year + (index * spec.step_years) as i32;
        let end_year = start_year + spec.window_years as i32;
        if end_year > limit_year {
            break;
        }
        let (start, end) = (jan1(start_year), jan1(end_year));
        // dates are sorted, so both bounds move forward monotonically
        while lo < dates.len() && dates[lo] < start {
            lo += 1;
        }
        let hi = lo + dates[lo..].partition_point(|d| *d < end);
        out.push(Window {
            index: index as usize,
            start,
            end,
            range: lo..hi,
        });
    }
    out
}

/// Which test to run in every window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RollingTest {
    Avr,
    Gs { max_lag: MaxLag },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowOutcome {
    Avr(AvrOutcome),
    Gs(GsOutcome),
    Skipped(String),
}

impl WindowOutcome {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            WindowOutcome::Avr(o) => Some(o.p_value),
            WindowOutcome::Gs(o) => Some(o.p_value),
            WindowOutcome::Skipped(_) => None,
        }
    }

    pub fn statistic(&self) -> Option<f64> {
        match self {
            WindowOutcome::Avr(o) => Some(o.statistic),
            WindowOutcome::Gs(o) => Some(o.statistic),
            WindowOutcome::Skipped(_) => None,
        }
    }

    /// `p < alpha`; `None` for skipped windows.
    pub fn significant(&self, alpha: f64) -> Option<bool> {
        self.p_value().map(|p| p < alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowResult {
    pub start: NaiveDate,
    /// Last calendar day of the window.
    pub end: NaiveDate,
    pub n_obs: usize,
    pub outcome: WindowOutcome,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RollingResult {
    pub windows: Vec<WindowResult>,
}

/// Runs `test` in every window. Window `i` bootstraps under the seed derived
/// from `(boot.seed, i)`; short or degenerate windows become skip markers.
pub fn run_rolling(
    series: &ReturnSeries,
    spec: &WindowSpec,
    test: RollingTest,
    boot: &BootstrapConfig,
) -> Result<RollingResult> {
    spec.validate()?;
    boot.validate()?;
    let windows = make_windows(series, spec);
    let results = windows
        .par_iter()
        .map(|w| {
            let n_obs = w.range.len();
            let outcome = if n_obs < spec.min_observations {
                WindowOutcome::Skipped(format!(
                    "insufficient observations: {n_obs} < {}",
                    spec.min_observations
                ))
            } else {
                let sub = series.slice(w.range.clone());
                let window_boot = boot.with_seed(derive_seed(boot.seed, &[tag::WINDOW, w.index as u64]));
                let res = match test {
                    RollingTest::Avr => avr_test(&sub, &window_boot).map(WindowOutcome::Avr),
                    RollingTest::Gs { max_lag } => gs_test(&sub, &window_boot, max_lag).map(WindowOutcome::Gs),
                };
                res.unwrap_or_else(|e| WindowOutcome::Skipped(e.to_string()))
            };
            WindowResult {
                start: w.start,
                end: w.last_day(),
                n_obs,
                outcome,
            }
        })
        .collect();
    Ok(RollingResult { windows: results })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annual(n: usize) -> ReturnSeries {
        let dates = (0..n)
            .map(|i| NaiveDate::from_ymd_opt(2000 + i as i32, 6, 30).unwrap())
            .collect();
        let values = (0..n).map(|i| (i as f64).sin()).collect();
        ReturnSeries::new(values, dates, Frequency::Weekly).unwrap()
    }

    #[test]
    fn ten_annual_points() {
        let spec = WindowSpec {
            window_years: 2,
            step_years: 1,
            min_observations: 10,
        };
        let w = make_windows(&annual(10), &spec);
        assert_eq!(w.len(), 9);
        assert!(w.iter().all(|w| w.range.len() == 2));
        assert_eq!(w[0].start, jan1(2000));
        assert_eq!(w[8].last_day(), NaiveDate::from_ymd_opt(2009, 12, 31).unwrap());
    }

    #[test]
    fn window_count_formula() {
        for (n, window, step) in [(10, 2, 1), (10, 3, 2), (25, 5, 1), (7, 7, 1), (12, 4, 3)] {
            let spec = WindowSpec {
                window_years: window,
                step_years: step,
                min_observations: 10,
            };
            let expected = (n as u32 - window) / step + 1;
            assert_eq!(
                make_windows(&annual(n), &spec).len() as u32,
                expected,
                "{n} {window} {step}"
            );
        }
        let spec = WindowSpec {
            window_years: 5,
            step_years: 1,
            min_observations: 10,
        };
        assert!(make_windows(&annual(3), &spec).is_empty());
    }

    #[test]
    fn short_windows_are_skipped_not_dropped() {
        let spec = WindowSpec {
            window_years: 2,
            step_years: 1,
            min_observations: 10,
        };
        let out = run_rolling(&annual(5), &spec, RollingTest::Avr, &BootstrapConfig::default()).unwrap();
        assert_eq!(out.windows.len(), 4);
        for w in &out.windows {
            assert!(matches!(&w.outcome, WindowOutcome::Skipped(r) if r.contains("insufficient")));
        }
    }

    #[test]
    fn degenerate_window_becomes_skip_marker() {
        let values: Vec<f64> = (0..120).map(|i| if i < 60 { 0.01 } else { (i as f64).cos() }).collect();
        let s = ReturnSeries::with_synthetic_dates(values, Frequency::Weekly).unwrap();
        let spec = WindowSpec {
            window_years: 1,
            step_years: 1,
            min_observations: 10,
        };
        let out = run_rolling(
            &s,
            &spec,
            RollingTest::Avr,
            &BootstrapConfig::new(20, Default::default(), 1).unwrap(),
        )
        .unwrap();
        assert!(matches!(&out.windows[0].outcome, WindowOutcome::Skipped(r) if r.contains("degenerate")));
        assert!(matches!(out.windows.last().unwrap().outcome, WindowOutcome::Avr(_)));
    }

    #[test]
    fn spec_validation() {
        assert!(WindowSpec::new(0, 1, 30).is_err());
        assert!(WindowSpec::new(2, 0, 30).is_err());
        assert!(WindowSpec::new(2, 1, 9).is_err());
        assert_eq!(WindowSpec::for_frequency(Frequency::Weekly).window_years, 5);
        assert_eq!(WindowSpec::for_frequency(Frequency::Daily).window_years, 2);
    }
}
