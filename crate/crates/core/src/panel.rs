//! Per-instrument return panels and equal-weighted portfolio construction.
//!
//! Two CSV layouts are accepted, both with ISO-8601 dates:
//!
//! * long: header `date,instrument,return`, one observation per row;
//! * wide: header `date,<id1>,<id2>,...`, one date per row.
//!
//! Empty cells (and `NA`, `null`) are missing observations. They stay
//! missing; they are never read as zero.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::series::{Frequency, ReturnSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelFormat {
    Long,
    Wide,
}

impl std::str::FromStr for PanelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "long" => Ok(PanelFormat::Long),
            "wide" => Ok(PanelFormat::Wide),
            other => Err(Error::InvalidParameter(format!("unknown panel format '{other}'"))),
        }
    }
}

/// Date × instrument matrix of returns; `None` marks an absent observation.
/// Dates are sorted ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    instruments: Vec<String>,
    dates: Vec<NaiveDate>,
    cells: Vec<Vec<Option<f64>>>,
}

impl Panel {
    pub fn instruments(&self) -> &[String] {
        &self.instruments
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// Row of returns for `dates()[i]`, one entry per instrument.
    pub fn row(&self, i: usize) -> &[Option<f64>] {
        &self.cells[i]
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn observation_count(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_none()).count()
    }

    pub fn get(&self, date: NaiveDate, instrument: &str) -> Option<f64> {
        let col = self.instruments.iter().position(|i| i == instrument)?;
        let row = self.dates.binary_search(&date).ok()?;
        self.cells[row][col]
    }
}

/// Detects the layout from a header: exactly `date,instrument,return` is long,
/// anything else starting with `date` is wide.
pub fn detect_format(header: &[&str]) -> PanelFormat {
    let norm: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if norm == ["date", "instrument", "return"] {
        PanelFormat::Long
    } else {
        PanelFormat::Wide
    }
}

pub fn load_panel(path: &Path, format: PanelFormat) -> Result<Panel> {
    let label = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: label.clone(),
        message: e.to_string(),
    })?;
    read_panel(file, format, &label)
}

/// Parses a panel from any reader; `label` names the source in diagnostics.
pub fn read_panel<R: std::io::Read>(reader: R, format: PanelFormat, label: &str) -> Result<Panel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: label.to_string(),
        line,
        message,
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.first().map(|h| h.to_ascii_lowercase()) != Some("date".into()) {
        return Err(parse_err(1, "first column must be 'date'".into()));
    }

    // (date, instrument column) -> (value, line)
    let mut instruments: Vec<String> = Vec::new();
    let mut seen: HashMap<(NaiveDate, usize), u64> = HashMap::new();
    let mut by_date: BTreeMap<NaiveDate, Vec<(usize, Option<f64>)>> = BTreeMap::new();

    match format {
        PanelFormat::Long => {
            let norm: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
            if norm != ["date", "instrument", "return"] {
                return Err(parse_err(
                    1,
                    format!(
                        "long format needs header date,instrument,return, got {}",
                        header.join(",")
                    ),
                ));
            }
            let mut index: HashMap<String, usize> = HashMap::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
                let line = rec.position().map_or(0, |p| p.line());
                let date = parse_date(&rec[0]).map_err(|m| parse_err(line, m))?;
                let name = rec[1].to_string();
                if name.is_empty() {
                    return Err(parse_err(line, "empty instrument id".into()));
                }
                let col = *index.entry(name.clone()).or_insert_with(|| {
                    instruments.push(name.clone());
                    instruments.len() - 1
                });
                let value = parse_return(&rec[2]).map_err(|m| parse_err(line, m))?;
                if let Some(&first) = seen.get(&(date, col)) {
                    return Err(Error::DuplicateObservation {
                        path: label.to_string(),
                        date: date.to_string(),
                        instrument: name,
                        first_line: first,
                        second_line: line,
                    });
                }
                seen.insert((date, col), line);
                by_date.entry(date).or_default().push((col, value));
            }
        }
        PanelFormat::Wide => {
            instruments = header[1..].to_vec();
            if instruments.is_empty() {
                return Err(parse_err(1, "wide format needs at least one instrument column".into()));
            }
            if let Some(dup) = instruments
                .iter()
                .enumerate()
                .find(|(i, n)| instruments[..*i].contains(n))
            {
                return Err(parse_err(
                    1,
                    format!("instrument '{}' appears twice in the header", dup.1),
                ));
            }
            let mut date_lines: HashMap<NaiveDate, u64> = HashMap::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
                let line = rec.position().map_or(0, |p| p.line());
                let date = parse_date(&rec[0]).map_err(|m| parse_err(line, m))?;
                if let Some(&first) = date_lines.get(&date) {
                    return Err(Error::DuplicateObservation {
                        path: label.to_string(),
                        date: date.to_string(),
                        instrument: instruments[0].clone(),
                        first_line: first,
                        second_line: line,
                    });
                }
                date_lines.insert(date, line);
                let mut row = Vec::with_capacity(instruments.len());
                for (col, cell) in rec.iter().skip(1).enumerate() {
                    let value = parse_return(cell)
                        .map_err(|m| parse_err(line, format!("column '{}': {m}", instruments[col])))?;
                    row.push((col, value));
                }
                by_date.insert(date, row);
            }
        }
    }

    let width = instruments.len();
    let mut dates = Vec::with_capacity(by_date.len());
    let mut cells = Vec::with_capacity(by_date.len());
    for (date, entries) in by_date {
        let mut row = vec![None; width];
        for (col, value) in entries {
            row[col] = value;
        }
        dates.push(date);
        cells.push(row);
    }
    Ok(Panel {
        instruments,
        dates,
        cells,
    })
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("bad date '{s}': {e}"))
}

fn parse_return(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("null") {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| format!("bad return '{s}'"))?;
    if !v.is_finite() {
        return Err(format!("non-finite return '{s}'"));
    }
    Ok(Some(v))
}

/// Cross-sectional mean of the instruments present on each date. Dates with
/// no instrument present are dropped.
pub fn equal_weight_series(panel: &Panel, frequency: Frequency) -> Result<ReturnSeries> {
    let mut values = Vec::with_capacity(panel.dates.len());
    let mut dates = Vec::with_capacity(panel.dates.len());
    for (date, row) in panel.dates.iter().zip(&panel.cells) {
        let (sum, count) = row.iter().flatten().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        if count > 0 {
            values.push(sum / count as f64);
            dates.push(*date);
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyPanel);
    }
    ReturnSeries::new(values, dates, frequency)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn long(text: &str) -> Result<Panel> {
        read_panel(text.as_bytes(), PanelFormat::Long, "mem.csv")
    }

    fn wide(text: &str) -> Result<Panel> {
        read_panel(text.as_bytes(), PanelFormat::Wide, "mem.csv")
    }

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    #[test]
    fn three_row_long_file() {
        let p = long("date,instrument,return\n2020-01-02,A,0.01\n2020-01-03,A,-0.02\n2020-01-06,A,0.005\n").unwrap();
        assert_eq!(p.dates().len(), 3);
        assert_eq!(p.observation_count(), 3);
        assert_eq!(p.get(d("2020-01-03"), "A"), Some(-0.02));
    }

    #[test]
    fn duplicate_long_rows_name_both_lines() {
        let err =
            long("date,instrument,return\n2020-01-02,A,0.01\n2020-01-03,A,0.02\n2020-01-02,A,0.03\n").unwrap_err();
        match err {
            Error::DuplicateObservation {
                first_line,
                second_line,
                ref instrument,
                ..
            } => {
                assert_eq!((first_line, second_line), (2, 4));
                assert_eq!(instrument, "A");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("lines 2 and 4"));
    }

    #[test]
    fn duplicate_wide_dates() {
        let err = wide("date,A\n2020-01-02,0.1\n2020-01-02,0.2\n").unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicateObservation {
                first_line: 2,
                second_line: 3,
                ..
            }
        ));
    }

    #[test]
    fn wide_missing_cell_is_absent() {
        let p = wide("date,A,B\n2020-01-02,0.01,0.03\n2020-01-03,0.01,\n").unwrap();
        assert_eq!(p.missing_count(), 1);
        assert_eq!(p.observation_count(), 3);
        assert_eq!(p.get(d("2020-01-03"), "B"), None);
        let s = equal_weight_series(&p, Frequency::Daily).unwrap();
        assert_eq!(s.values(), &[0.02, 0.01]);
    }

    #[test]
    fn rows_sorted_and_absent_dates_dropped() {
        let p = long("date,instrument,return\n2020-01-06,A,0.3\n2020-01-02,B,0.1\n2020-01-03,A,NA\n").unwrap();
        assert_eq!(p.dates(), &[d("2020-01-02"), d("2020-01-03"), d("2020-01-06")]);
        let s = equal_weight_series(&p, Frequency::Weekly).unwrap();
        assert_eq!(s.dates(), &[d("2020-01-02"), d("2020-01-06")]);
        assert_eq!(s.frequency(), Frequency::Weekly);
    }

    #[test]
    fn single_instrument_is_identity() {
        let p = wide("date,X\n2021-03-01,0.5\n2021-03-02,-0.25\n2021-03-03,0.125\n").unwrap();
        assert_eq!(
            equal_weight_series(&p, Frequency::Daily).unwrap().values(),
            &[0.5, -0.25, 0.125]
        );
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = long("date,instrument,return\n2020-01-02,A,0.01\n2020-13-02,A,0.01\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = wide("date,A\n2020-01-02,inf\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        let e = wide("date,A\n2020-01-02,abc\n").unwrap_err();
        assert!(e.to_string().contains("column 'A'"));
        assert!(long("day,instrument,return\n").is_err());
        assert!(long("date,a,b,c\n").is_err());
        assert!(wide("date\n2020-01-01\n").is_err());
    }

    #[test]
    fn empty_panel_errors() {
        let p = wide("date,A\n2020-01-02,\n").unwrap();
        assert_eq!(equal_weight_series(&p, Frequency::Daily), Err(Error::EmptyPanel));
    }

    #[test]
    fn format_detection() {
        assert_eq!(detect_format(&["date", "instrument", "return"]), PanelFormat::Long);
        assert_eq!(detect_format(&["Date", "Instrument", "Return"]), PanelFormat::Long);
        assert_eq!(detect_format(&["date", "return"]), PanelFormat::Wide);
    }
}
