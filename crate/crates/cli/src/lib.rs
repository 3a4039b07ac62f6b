//! `mdh` command-line front end.
//!
//! Subcommands: `describe`, `avr`, `gs`, `roll`, and `simulate`. Numbers are
//! printed with 17 significant digits so every emitted value round-trips.
//! Output files are written through a temporary file in the target
//! directory and renamed into place only on success.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use mdh_core::panel::{detect_format, read_panel};
use mdh_core::rolling::{RollingResult, WindowOutcome};
use mdh_core::{
    avr_test, describe, dgp, gs, gs_test, run_rolling, BootstrapConfig, DgpKind, DgpSpec, Frequency, MaxLag,
    Multiplier, PanelFormat, ReturnSeries, RollingTest, WindowSpec,
};

/// Header of the rolling-window CSV, in column order.
pub const ROLLING_HEADER: [&str; 9] = [
    "window_start",
    "window_end",
    "n_obs",
    "statistic",
    "p_value",
    "ci_low",
    "ci_high",
    "significant_5pct",
    "skip_reason",
];

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Core(#[from] mdh_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid argument: {0}")]
    Argument(String),
}

fn io_err(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.as_ref().display().to_string();
    move |source| CliError::Io { path, source }
}

#[derive(Debug, Parser)]
#[command(
    name = "mdh",
    version,
    about = "Martingale difference hypothesis tests for return series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Descriptive statistics with the Jarque–Bera normality test.
    Describe {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Wild-bootstrap automatic variance ratio test.
    Avr {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Generalized spectral test.
    Gs {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        boot: BootArgs,
        /// Number of lags, or `full` for T−1.
        #[arg(long, default_value = "full")]
        max_lag: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run a test over rolling calendar windows; writes CSV.
    Roll {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum)]
        test: TestKind,
        /// Window length in years [default: 2 for daily, 5 for weekly].
        #[arg(long)]
        window_years: Option<u32>,
        #[arg(long, default_value_t = 1)]
        step_years: u32,
        /// Windows with fewer observations are skipped.
        #[arg(long, default_value_t = 30)]
        min_obs: usize,
        #[command(flatten)]
        boot: BootArgs,
        /// GS only: number of lags, or `full`.
        #[arg(long, default_value = "full")]
        max_lag: String,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic return series as `date,return` CSV.
    Simulate {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Comma-separated parameters: ar1 `phi`, garch11 `omega,alpha,beta`, bilinear `b`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Discarded warm-up draws [default: 500 for recursive processes, 0 for iid].
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, value_enum, default_value_t = FrequencyArg::Daily)]
        frequency: FrequencyArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file: wide (`date,<id1>,<id2>,...`) or long (`date,instrument,return`).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    pub format: FormatArg,
    #[arg(long, value_enum, default_value_t = FrequencyArg::Daily)]
    pub frequency: FrequencyArg,
}

#[derive(Debug, Args)]
pub struct BootArgs {
    /// Bootstrap replications.
    #[arg(long = "B", visible_alias = "n-boot", default_value_t = 500)]
    pub n_boot: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplier law of the wild bootstrap.
    #[arg(long, value_enum, default_value_t = EtaArg::Normal)]
    pub eta: EtaArg,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Print JSON to stdout instead of text.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON object to this file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Auto,
    Long,
    Wide,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FrequencyArg {
    Daily,
    Weekly,
}

impl From<FrequencyArg> for Frequency {
    fn from(f: FrequencyArg) -> Self {
        match f {
            FrequencyArg::Daily => Frequency::Daily,
            FrequencyArg::Weekly => Frequency::Weekly,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EtaArg {
    Normal,
    Rademacher,
    Mammen,
}

impl From<EtaArg> for Multiplier {
    fn from(e: EtaArg) -> Self {
        match e {
            EtaArg::Normal => Multiplier::Normal,
            EtaArg::Rademacher => Multiplier::Rademacher,
            EtaArg::Mammen => Multiplier::Mammen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Avr,
    Gs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Iid,
    Ar1,
    Garch11,
    Bilinear,
}

impl BootArgs {
    fn config(&self) -> Result<BootstrapConfig, CliError> {
        Ok(BootstrapConfig::new(self.n_boot, self.eta.into(), self.seed)?)
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn sig17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = serde_json::value::RawValue::from_string(fmt17(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

#[derive(Debug, Serialize)]
struct DescribeReport {
    size: usize,
    #[serde(serialize_with = "sig17")]
    mean: f64,
    #[serde(serialize_with = "sig17")]
    std: f64,
    #[serde(serialize_with = "sig17")]
    skewness: f64,
    #[serde(serialize_with = "sig17")]
    kurtosis: f64,
    #[serde(serialize_with = "sig17")]
    jarque_bera: f64,
    #[serde(serialize_with = "sig17")]
    jb_p: f64,
}

#[derive(Debug, Serialize)]
struct AvrReport {
    test: &'static str,
    n_obs: usize,
    #[serde(serialize_with = "sig17")]
    vr: f64,
    #[serde(serialize_with = "sig17")]
    statistic: f64,
    #[serde(serialize_with = "sig17")]
    bandwidth: f64,
    #[serde(serialize_with = "sig17")]
    p_value: f64,
    #[serde(serialize_with = "sig17")]
    ci_low: f64,
    #[serde(serialize_with = "sig17")]
    ci_high: f64,
    n_boot: usize,
    multiplier: &'static str,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct GsReport {
    test: &'static str,
    n_obs: usize,
    #[serde(serialize_with = "sig17")]
    statistic: f64,
    #[serde(serialize_with = "sig17")]
    p_value: f64,
    n_boot: usize,
    max_lag_used: usize,
    multiplier: &'static str,
    seed: u64,
}

/// Significance stars at 1%, 5%, and 10%.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Reads a panel file and averages it into an equal-weighted series.
pub fn read_series(path: &Path, format: FormatArg, frequency: Frequency) -> Result<ReturnSeries, CliError> {
    let format = match format {
        FormatArg::Long => PanelFormat::Long,
        FormatArg::Wide => PanelFormat::Wide,
        FormatArg::Auto => {
            let file = std::fs::File::open(path).map_err(io_err(path))?;
            let mut first = String::new();
            std::io::BufReader::new(file)
                .read_line(&mut first)
                .map_err(io_err(path))?;
            let cols: Vec<&str> = first.trim_end().split(',').collect();
            detect_format(&cols)
        }
    };
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let panel = read_panel(file, format, &path.display().to_string())?;
    Ok(mdh_core::equal_weight_series(&panel, frequency)?)
}

/// Writes `bytes` to `path` atomically: nothing is left behind on failure.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e.error,
    })?;
    Ok(())
}

fn emit_json<T: Serialize>(report: &T, output: &OutputArgs, text: String, out: &mut dyn Write) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(report).map_err(|e| CliError::Argument(e.to_string()))?;
    json.push('\n');
    if let Some(path) = &output.output {
        write_atomic(path, json.as_bytes())?;
    }
    let body = if output.json { json } else { text };
    out.write_all(body.as_bytes()).map_err(io_err("<stdout>"))
}

fn parse_max_lag(s: &str) -> Result<MaxLag, CliError> {
    Ok(s.parse::<MaxLag>()?)
}

fn note_truncation(series: &ReturnSeries, max_lag: MaxLag, err: &mut dyn Write) -> Result<(), CliError> {
    if let MaxLag::Lags(j) = max_lag {
        if j + 1 < series.len() {
            let bound = gs::truncation_bound(series, max_lag)?;
            writeln!(
                err,
                "note: max_lag = {j} < T−1 = {}; dropped lags add at most {} to D²",
                series.len() - 1,
                fmt17(bound)
            )
            .map_err(io_err("<stderr>"))?;
        }
    }
    Ok(())
}

/// Renders a rolling result as CSV with [`ROLLING_HEADER`] columns.
pub fn rolling_csv(result: &RollingResult) -> String {
    let mut s = ROLLING_HEADER.join(",");
    s.push('\n');
    for w in &result.windows {
        let (stat, p, lo, hi, sig, reason) = match &w.outcome {
            WindowOutcome::Avr(o) => (
                fmt17(o.statistic),
                fmt17(o.p_value),
                fmt17(o.ci_low),
                fmt17(o.ci_high),
                (o.p_value < SIGNIFICANCE).to_string(),
                String::new(),
            ),
            WindowOutcome::Gs(o) => (
                fmt17(o.statistic),
                fmt17(o.p_value),
                String::new(),
                String::new(),
                (o.p_value < SIGNIFICANCE).to_string(),
                String::new(),
            ),
            WindowOutcome::Skipped(r) => (
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                csv_field(r),
            ),
        };
        s.push_str(&format!(
            "{},{},{},{stat},{p},{lo},{hi},{sig},{reason}\n",
            w.start, w.end, w.n_obs
        ));
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a series as `date,return` CSV.
pub fn series_csv(series: &ReturnSeries) -> String {
    let mut s = String::from("date,return\n");
    for (d, v) in series.dates().iter().zip(series.values()) {
        s.push_str(&format!("{d},{}\n", fmt17(*v)));
    }
    s
}

fn emit_csv(body: String, output: &Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => write_atomic(path, body.as_bytes()),
        None => out.write_all(body.as_bytes()).map_err(io_err("<stdout>")),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    execute(cli.command, out, err)
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Describe { input, output } => {
            let series = read_series(&input.input, input.format, input.frequency.into())?;
            let m = describe(&series)?;
            let text = format!(
                "{:>8} {:>24} {:>24} {:>24} {:>24} {:>24}\n{:>8} {:>24} {:>24} {:>24} {:>24} {:>24}{}\n",
                "size",
                "mean",
                "std",
                "skew",
                "kurt",
                "jarque_bera",
                m.size,
                fmt17(m.mean),
                fmt17(m.std),
                fmt17(m.skewness),
                fmt17(m.kurtosis),
                fmt17(m.jarque_bera),
                stars(m.jb_p),
            );
            let report = DescribeReport {
                size: m.size,
                mean: m.mean,
                std: m.std,
                skewness: m.skewness,
                kurtosis: m.kurtosis,
                jarque_bera: m.jarque_bera,
                jb_p: m.jb_p,
            };
            emit_json(&report, &output, text, out)
        }
        Command::Avr { input, boot, output } => {
            let series = read_series(&input.input, input.format, input.frequency.into())?;
            let cfg = boot.config()?;
            let o = avr_test(&series, &cfg)?;
            let text = format!(
                "AVR test (T = {}, B = {}, eta = {}, seed = {})\n  VR(k)      {}\n  bandwidth  {}\n  AVR(k)     {}\n  p-value    {}\n  95% band   [{}, {}]\n",
                series.len(),
                o.n_boot,
                cfg.multiplier.as_str(),
                cfg.seed,
                fmt17(o.vr),
                fmt17(o.bandwidth),
                fmt17(o.statistic),
                fmt17(o.p_value),
                fmt17(o.ci_low),
                fmt17(o.ci_high),
            );
            let report = AvrReport {
                test: "avr",
                n_obs: series.len(),
                vr: o.vr,
                statistic: o.statistic,
                bandwidth: o.bandwidth,
                p_value: o.p_value,
                ci_low: o.ci_low,
                ci_high: o.ci_high,
                n_boot: o.n_boot,
                multiplier: cfg.multiplier.as_str(),
                seed: cfg.seed,
            };
            emit_json(&report, &output, text, out)
        }
        Command::Gs {
            input,
            boot,
            max_lag,
            output,
        } => {
            let series = read_series(&input.input, input.format, input.frequency.into())?;
            let cfg = boot.config()?;
            let max_lag = parse_max_lag(&max_lag)?;
            note_truncation(&series, max_lag, err)?;
            let o = gs_test(&series, &cfg, max_lag)?;
            let text = format!(
                "GS test (T = {}, B = {}, eta = {}, seed = {}, lags = {})\n  D2         {}\n  p-value    {}\n",
                series.len(),
                o.n_boot,
                cfg.multiplier.as_str(),
                cfg.seed,
                o.max_lag_used,
                fmt17(o.statistic),
                fmt17(o.p_value),
            );
            let report = GsReport {
                test: "gs",
                n_obs: series.len(),
                statistic: o.statistic,
                p_value: o.p_value,
                n_boot: o.n_boot,
                max_lag_used: o.max_lag_used,
                multiplier: cfg.multiplier.as_str(),
                seed: cfg.seed,
            };
            emit_json(&report, &output, text, out)
        }
        Command::Roll {
            input,
            test,
            window_years,
            step_years,
            min_obs,
            boot,
            max_lag,
            output,
        } => {
            let frequency: Frequency = input.frequency.into();
            let series = read_series(&input.input, input.format, frequency)?;
            let window_years = window_years.unwrap_or(WindowSpec::for_frequency(frequency).window_years);
            let spec = WindowSpec::new(window_years, step_years, min_obs)?;
            let test = match test {
                TestKind::Avr => RollingTest::Avr,
                TestKind::Gs => RollingTest::Gs {
                    max_lag: parse_max_lag(&max_lag)?,
                },
            };
            let result = run_rolling(&series, &spec, test, &boot.config()?)?;
            emit_csv(rolling_csv(&result), &output, out)
        }
        Command::Simulate {
            kind,
            params,
            length,
            seed,
            burn_in,
            frequency,
            output,
        } => {
            let params: Vec<f64> = params
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|_| CliError::Argument(format!("bad parameter '{p}'")))
                })
                .collect::<Result<_, _>>()?;
            let name = match kind {
                KindArg::Iid => "iid",
                KindArg::Ar1 => "ar1",
                KindArg::Garch11 => "garch11",
                KindArg::Bilinear => "bilinear",
            };
            let kind = DgpKind::from_parts(name, &params)?;
            let default_burn_in = if matches!(kind, DgpKind::IidNormal) { 0 } else { 500 };
            let spec = DgpSpec::with_options(kind, length, burn_in.unwrap_or(default_burn_in), seed, frequency.into())?;
            let series = dgp::generate(&spec)?;
            emit_csv(series_csv(&series), &output, out)
        }
    }
}
