//! Command-line front end for the `biphoton` library.
//!
//! Every command writes one flat table with the columns
//! `gamma_s,gamma_i,ell_s,p_s,p_i,amplitude_re,amplitude_im,probability`,
//! as CSV or as a JSON array of objects with the same keys. Amplitude
//! fields are empty (CSV) or `null` (JSON) when no single amplitude
//! exists, e.g. for spectra of pumps with several OAM values.
//! `decompose` is the exception: it writes a pump file (CSV mode) or the
//! list of LG components (JSON mode).
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 on numeric or
//! convergence failures.

// `!(x > 0.0)` is used on purpose to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use biphoton::oracle::coincidence_quadrature_radial;
use biphoton::pumps::{format_pump_file, parse_pump_file};
use biphoton::spectra::coefficient_of_variation;
use biphoton::{
    coincidence_superposition, find_equal_probability_gammas, gamma_scan, spiral_spectrum,
    subspace_probabilities, BeamWidths, EqualizationMode, EqualizationOptions, ModeIndex,
    PumpSpec, SpiralSpectrum,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

/// Relative agreement demanded by `oracle-check`.
const ORACLE_RTOL: f64 = 1e-8;
/// Absolute floor for `oracle-check`, for amplitudes that vanish.
const ORACLE_ATOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "biphoton", version, about = "Laguerre-Gauss spectra of SPDC biphotons")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One coincidence amplitude.
    Amplitude {
        #[command(flatten)]
        pump: PumpArgs,
        /// Signal mode as `ell,p`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_mode)]
        signal: ModeIndex,
        /// Idler mode as `ell,p`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_mode)]
        idler: ModeIndex,
        #[command(flatten)]
        widths: WidthArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spiral-bandwidth spectrum at one pair of widths.
    Spectrum {
        #[command(flatten)]
        pump: PumpArgs,
        #[command(flatten)]
        widths: WidthArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Spectra (or state probabilities) over a grid of widths.
    Scan {
        #[command(flatten)]
        pump: PumpArgs,
        /// Signal width ratios: `lo:hi:step` or a comma list.
        #[arg(long, default_value = "0.5:3:0.5", value_parser = parse_grid)]
        gammas: Grid,
        /// Idler-to-signal width ratios `gamma_i / gamma_s`.
        #[arg(long, default_value = "1", value_parser = parse_grid)]
        ratios: Grid,
        /// Report these states instead of a spectrum (see `equalize`).
        #[arg(long, allow_hyphen_values = true, value_parser = parse_states)]
        states: Option<States>,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// LG decomposition of a pump.
    Decompose {
        #[command(flatten)]
        pump: PumpArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Width ratios at which the given states are equally probable.
    Equalize {
        #[command(flatten)]
        pump: PumpArgs,
        /// States as `ls,li;...` (p = 0) or `ls,ps,li,pi;...`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_states)]
        states: States,
        /// Search interval `lo:hi` for gamma_s = gamma_i.
        #[arg(long, default_value = "0.3:3", value_parser = parse_interval)]
        interval: (f64, f64),
        #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
        mode: ModeArg,
        /// Coefficient-of-variation tolerance; overrides the mode default.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Grid step of the coarse search.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        wp: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed form against numerical quadrature for one amplitude.
    OracleCheck {
        #[command(flatten)]
        pump: PumpArgs,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_mode)]
        signal: ModeIndex,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_mode)]
        idler: ModeIndex,
        #[command(flatten)]
        widths: WidthArgs,
        /// Relative tolerance for agreement.
        #[arg(long, default_value_t = ORACLE_RTOL)]
        tolerance: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PumpArgs {
    /// Single LG pump as `ell,p`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_mode)]
    pump: Option<ModeIndex>,
    /// Pump description file.
    #[arg(long, value_parser = existing_file)]
    pump_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WidthArgs {
    /// Common width ratio gamma_s = gamma_i.
    #[arg(long, conflicts_with_all = ["gamma_s", "gamma_i"])]
    gamma: Option<f64>,
    #[arg(long)]
    gamma_s: Option<f64>,
    #[arg(long)]
    gamma_i: Option<f64>,
    /// Pump waist.
    #[arg(long, default_value_t = 1.0)]
    wp: f64,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Reported signal OAM range `lo:hi`.
    #[arg(long, default_value = "-15:15", allow_hyphen_values = true, value_parser = parse_window)]
    ell_window: RangeInclusive<i32>,
    /// Radial indices `ps,pi;...` summed into each cell.
    #[arg(long, default_value = "0,0", value_parser = parse_family)]
    p_family: Family,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Paper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Family(pub Vec<(u32, u32)>);

#[derive(Debug, Clone, PartialEq)]
pub struct States(pub Vec<(ModeIndex, ModeIndex)>);

/// One output record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Row {
    pub gamma_s: f64,
    pub gamma_i: f64,
    pub ell_s: i32,
    pub p_s: u32,
    pub p_i: u32,
    pub amplitude_re: Option<f64>,
    pub amplitude_im: Option<f64>,
    pub probability: f64,
}

const HEADER: [&str; 8] = [
    "gamma_s",
    "gamma_i",
    "ell_s",
    "p_s",
    "p_i",
    "amplitude_re",
    "amplitude_im",
    "probability",
];

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<biphoton::Error> for Failure {
    fn from(e: biphoton::Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn split_pair<'a>(s: &'a str, sep: char, what: &str) -> Result<(&'a str, &'a str), String> {
    s.split_once(sep)
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| format!("expected {what}, got '{s}'"))
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("not a number: '{s}'"))
}

fn parse_mode(s: &str) -> Result<ModeIndex, String> {
    let (l, p) = split_pair(s, ',', "ell,p")?;
    Ok(ModeIndex::new(num(l)?, num(p)?))
}

fn parse_window(s: &str) -> Result<RangeInclusive<i32>, String> {
    let (lo, hi) = split_pair(s, ':', "lo:hi")?;
    let (lo, hi): (i32, i32) = (num(lo)?, num(hi)?);
    if lo > hi {
        return Err(format!("empty window {lo}:{hi}"));
    }
    Ok(lo..=hi)
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = split_pair(s, ':', "lo:hi")?;
    Ok((num(lo)?, num(hi)?))
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.split(';')
        .map(|item| {
            let (a, b) = split_pair(item, ',', "ps,pi")?;
            Ok((num(a)?, num(b)?))
        })
        .collect::<Result<_, _>>()
        .map(Family)
}

fn parse_states(s: &str) -> Result<States, String> {
    s.split(';')
        .map(|item| {
            let f: Vec<&str> = item.split(',').collect();
            match f.as_slice() {
                [ls, li] => Ok((ModeIndex::new(num(ls)?, 0), ModeIndex::new(num(li)?, 0))),
                [ls, ps, li, pi] => Ok((
                    ModeIndex::new(num(ls)?, num(ps)?),
                    ModeIndex::new(num(li)?, num(pi)?),
                )),
                _ => Err(format!("expected ls,li or ls,ps,li,pi, got '{item}'")),
            }
        })
        .collect::<Result<_, _>>()
        .map(States)
}

/// `lo:hi:step` (points `lo + k*step` up to `hi`) or a comma list.
fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step): (f64, f64, f64) = (num(lo)?, num(hi)?, num(step)?);
            if !(step > 0.0) || !(hi >= lo) {
                return Err(format!("bad grid '{s}'"));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            // rounding keeps 0.1-style steps on their decimal values
            (0..=n)
                .map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>, _>>()?,
        _ => return Err(format!("expected lo:hi:step or a comma list, got '{s}'")),
    };
    Ok(Grid(values))
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

impl PumpArgs {
    fn load(&self) -> CliResult<PumpSpec> {
        match (&self.pump, &self.pump_file) {
            (Some(m), _) => Ok(PumpSpec::Single(*m)),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                parse_pump_file(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
            }
            (None, None) => Err(Failure::Usage("a pump is required".into())),
        }
    }
}

impl WidthArgs {
    fn widths(&self) -> CliResult<BeamWidths> {
        let gs = self.gamma.or(self.gamma_s).unwrap_or(1.0);
        let gi = self.gamma.or(self.gamma_i).unwrap_or(gs);
        Ok(BeamWidths::new(self.wp, gs, gi)?)
    }
}

fn amplitude_row(widths: &BeamWidths, signal: ModeIndex, idler: ModeIndex, amp: Complex64, probability: f64) -> Row {
    Row {
        gamma_s: widths.gamma_s(),
        gamma_i: widths.gamma_i(),
        ell_s: signal.ell,
        p_s: signal.p,
        p_i: idler.p,
        amplitude_re: Some(amp.re),
        amplitude_im: Some(amp.im),
        probability,
    }
}

fn spectrum_rows(gs: f64, gi: f64, s: &SpiralSpectrum) -> impl Iterator<Item = Row> + '_ {
    s.rows().iter().map(move |r| Row {
        gamma_s: gs,
        gamma_i: gi,
        ell_s: r.ell_s,
        p_s: r.p_s,
        p_i: r.p_i,
        amplitude_re: r.amplitude.map(|a| a.re),
        amplitude_im: r.amplitude.map(|a| a.im),
        probability: r.probability,
    })
}

/// Normalized probabilities of `states`, with amplitudes rescaled to match.
fn state_rows(pump: &PumpSpec, widths: &BeamWidths, states: &[(ModeIndex, ModeIndex)]) -> CliResult<Vec<Row>> {
    let probs = subspace_probabilities(pump, widths, states)?;
    states
        .iter()
        .zip(probs)
        .map(|(&(s, i), p)| {
            let raw = coincidence_superposition(pump, s, i, widths)?.value;
            let amp = if raw.norm_sqr() > 0.0 {
                raw * (p / raw.norm_sqr()).sqrt()
            } else {
                raw
            };
            Ok(amplitude_row(widths, s, i, amp, p))
        })
        .collect()
}

fn spectrum_diagnostics(err: &mut dyn Write, gs: f64, gi: f64, s: &SpiralSpectrum) -> io::Result<()> {
    writeln!(
        err,
        "gamma_s = {gs}, gamma_i = {gi}: support {}..={}, outside window {:e}, tail {:e}",
        s.ell_support().start(),
        s.ell_support().end(),
        s.outside_window(),
        s.tail_mass()
    )
}

fn write_rows(w: &mut dyn Write, rows: &[Row], format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
            csv.write_record(HEADER)?;
            for r in rows {
                csv.serialize(r)?;
            }
            csv.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, rows)?;
            writeln!(w)
        }
    }
}

#[derive(Serialize)]
struct ComponentRecord {
    ell: i32,
    p: u32,
    re: f64,
    im: f64,
}

fn emit(output: &OutputArgs, stdout: &mut dyn Write, body: &[u8]) -> CliResult<()> {
    let io_err = |e: io::Error| Failure::Usage(format!("cannot write output: {e}"));
    match &output.out {
        Some(path) => write_file(path, body).map_err(io_err),
        None => stdout.write_all(body).map_err(io_err),
    }
}

fn write_file(path: &Path, body: &[u8]) -> io::Result<()> {
    fs::write(path, body)
}

fn table(output: &OutputArgs, stdout: &mut dyn Write, rows: &[Row]) -> CliResult<()> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows, output.format)
        .map_err(|e| Failure::Usage(format!("cannot format output: {e}")))?;
    emit(output, stdout, &buf)
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    // diagnostics are best effort; a closed stderr must not fail the run
    match cmd {
        Command::Amplitude { pump, signal, idler, widths, output } => {
            let pump = pump.load()?;
            let w = widths.widths()?;
            let c = coincidence_superposition(&pump, signal, idler, &w)?;
            let _ = writeln!(stderr, "path {:?}, condition {:e}", c.path, c.condition);
            let row = amplitude_row(&w, signal, idler, c.value, c.value.norm_sqr());
            table(&output, stdout, &[row])
        }
        Command::Spectrum { pump, widths, window, output } => {
            let pump = pump.load()?;
            let w = widths.widths()?;
            let s = spiral_spectrum(&pump, &w, &window.p_family.0, window.ell_window)?;
            let _ = spectrum_diagnostics(stderr, w.gamma_s(), w.gamma_i(), &s);
            let rows: Vec<Row> = spectrum_rows(w.gamma_s(), w.gamma_i(), &s).collect();
            table(&output, stdout, &rows)
        }
        Command::Scan { pump, gammas, ratios, states, window, output } => {
            let pump = pump.load()?;
            let mut grid: Vec<(f64, f64)> = gammas
                .0
                .iter()
                .flat_map(|&g| ratios.0.iter().map(move |&r| (g, g * r)))
                .collect();
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            grid.dedup();
            let rows = match states {
                Some(states) => {
                    let mut rows = Vec::new();
                    for &(gs, gi) in &grid {
                        let w = BeamWidths::new(1.0, gs, gi)?;
                        rows.extend(state_rows(&pump, &w, &states.0)?);
                    }
                    rows
                }
                None => {
                    let scan = gamma_scan(&pump, &grid, &window.p_family.0, window.ell_window)?;
                    let mut rows = Vec::new();
                    for (&(gs, gi), s) in scan.iter() {
                        let _ = spectrum_diagnostics(stderr, gs, gi, s);
                        rows.extend(spectrum_rows(gs, gi, s));
                    }
                    rows
                }
            };
            table(&output, stdout, &rows)
        }
        Command::Decompose { pump, output } => {
            let pump = pump.load()?;
            let components = pump.components(1.0)?;
            let body = match output.format {
                Format::Csv => {
                    let spec = biphoton::pumps::normalize_pump(
                        &components.iter().map(|c| (c.amplitude, c.mode)).collect::<Vec<_>>(),
                    )?;
                    format_pump_file(&spec).into_bytes()
                }
                Format::Json => {
                    let records: Vec<ComponentRecord> = components
                        .iter()
                        .map(|c| ComponentRecord {
                            ell: c.mode.ell,
                            p: c.mode.p,
                            re: c.amplitude.re,
                            im: c.amplitude.im,
                        })
                        .collect();
                    let mut s = serde_json::to_string_pretty(&records)
                        .map_err(|e| Failure::Usage(e.to_string()))?;
                    s.push('\n');
                    s.into_bytes()
                }
            };
            emit(&output, stdout, &body)
        }
        Command::Equalize { pump, states, interval, mode, tolerance, step, wp, output } => {
            let pump = pump.load()?;
            let opts = EqualizationOptions {
                mode: match mode {
                    ModeArg::Strict => EqualizationMode::Strict,
                    ModeArg::Paper => EqualizationMode::Paper,
                },
                tolerance,
                grid_step: step,
                w_p: wp,
                ..EqualizationOptions::default()
            };
            let r = find_equal_probability_gammas(&pump, &states.0, interval, &opts)?;
            let _ = writeln!(
                stderr,
                "{} root(s) in {}:{} at tolerance {:e}",
                r.roots.len(),
                r.bracket.0,
                r.bracket.1,
                r.tolerance
            );
            let mut rows = Vec::new();
            for (&g, &cv) in r.roots.iter().zip(&r.residuals) {
                let _ = writeln!(stderr, "gamma = {g}, cv = {cv:e}");
                let w = BeamWidths::new(wp, g, g)?;
                let found = state_rows(&pump, &w, &states.0)?;
                let probs: Vec<f64> = found.iter().map(|r| r.probability).collect();
                debug_assert!((coefficient_of_variation(&probs) - cv).abs() <= 1e-9 + 1e-6 * cv);
                rows.extend(found);
            }
            table(&output, stdout, &rows)
        }
        Command::OracleCheck { pump, signal, idler, widths, tolerance, output } => {
            let pump = pump.load()?;
            let w = widths.widths()?;
            let closed = coincidence_superposition(&pump, signal, idler, &w)?.value;
            let mut quad = Complex64::new(0.0, 0.0);
            for c in pump.components(w.w_p())? {
                if c.mode.ell == signal.ell + idler.ell {
                    quad += c.amplitude * coincidence_quadrature_radial(c.mode, signal, idler, &w)?.value;
                }
            }
            let diff = (closed - quad).norm();
            let _ = writeln!(stderr, "closed form {closed}, quadrature {quad}, |difference| {diff:e}");
            let rows = [
                amplitude_row(&w, signal, idler, closed, closed.norm_sqr()),
                amplitude_row(&w, signal, idler, quad, quad.norm_sqr()),
            ];
            table(&output, stdout, &rows)?;
            if diff > tolerance * closed.norm().max(quad.norm()) && diff > ORACLE_ATOL {
                return Err(Failure::Numeric(format!(
                    "closed form and quadrature disagree by {diff:e}"
                )));
            }
            Ok(())
        }
    }
}

/// Runs the command line `argv` (program name first) against the given
/// sinks and returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                1
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return code;
        }
    };
    match execute(config.command, stdout, stderr) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}
