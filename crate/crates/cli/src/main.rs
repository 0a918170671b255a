mod args;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use mirrornoise::analytic::{photocurrent_at, photocurrent_variance_open, Port};
use mirrornoise::config::{self, ConfigDocument, OpenPortWeights, OpticalConfig};
use mirrornoise::feedback::{gain_sweep, write_sweep_csv, FeedbackSpec};
use mirrornoise::mc::{scan_mc, sidecar, write_scan_csv, EnsembleSpec, PhaseCoupling};
use mirrornoise::scan::{linspace, scan_variance};
use mirrornoise::suite::{self, McValidation, SuiteReport};
use mirrornoise::{fmt_f64, Error};

use args::{Cli, Command, ConfigArgs, Format, OutputArgs};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 3;
const EXIT_TRUNCATION: u8 = 4;

/// Largest |alpha| the Fock check accepts.
const MAX_FOCK_ALPHA: f64 = 2.0;

enum Failure {
    Validation,
    Config(String),
    Truncation(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TruncationInsufficient { .. } | Error::DimensionCap { .. } | Error::DimensionTooSmall(_) => {
                Failure::Truncation(e.to_string())
            }
            Error::Io(msg) => Failure::Io(msg),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan(a) => scan(a),
        Command::ScanPhotocurrent(a) => scan_photocurrent(a),
        Command::McValidate(a) => mc_validate(a),
        Command::FockValidate(a) => fock_validate(a),
        Command::Feedback(a) => feedback(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Truncation(msg)) => {
            eprintln!("truncation error: {msg}");
            eprintln!("raise --dim or keep |alpha| <= {MAX_FOCK_ALPHA} so the Fock cutoff holds the coherent state");
            ExitCode::from(EXIT_TRUNCATION)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn load_config(args: &ConfigArgs) -> Result<OpticalConfig, Failure> {
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            ConfigDocument::from_json_slice(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => ConfigDocument::default(),
    };
    let doc = base.merged_with(&args.flags());
    config::validate(doc.apply(OpticalConfig::default())).map_err(|e| Failure::Config(e.to_string()))
}

fn verdict(pass: bool) -> String {
    let word = if pass { "PASS" } else { "FAIL" };
    let color = std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && io::stdout().is_terminal();
    if !color {
        word.to_string()
    } else if pass {
        format!("\x1b[32m{word}\x1b[0m")
    } else {
        format!("\x1b[31m{word}\x1b[0m")
    }
}

/// Writes the data artifact to `--out` or standard output. The closure gets
/// the format so each command can choose its CSV writer.
fn emit<F>(output: &OutputArgs, write: F) -> Result<bool, Failure>
where
    F: FnOnce(&mut dyn Write, Format) -> mirrornoise::Result<()>,
{
    match &output.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?);
            write(&mut w, output.format)?;
            w.flush()?;
            Ok(true)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w, output.format)?;
            w.flush()?;
            Ok(false)
        }
    }
}

fn write_json<T: Serialize + ?Sized>(w: &mut dyn Write, value: &T) -> mirrornoise::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn summary_sink(to_file: bool) -> Box<dyn Write> {
    if to_file {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    }
}

fn grid_bounds(cfg: &OpticalConfig, z_min: f64, z_max: Option<f64>) -> (f64, f64) {
    (z_min, z_max.unwrap_or(z_min + 2.0 * PI / cfg.k))
}

fn scan(a: args::ScanArgs) -> Outcome {
    let cfg = load_config(&a.config)?;
    let (lo, hi) = grid_bounds(&cfg, a.z_min, a.z_max);
    let grid = linspace(lo, hi, a.steps)?;
    let result = scan_variance(&cfg, a.port, &grid)?;
    let to_file = emit(&a.output, |w, f| match f {
        Format::Csv => result.write_csv(w),
        Format::Json => write_json(w, &result.to_json()),
    })?;

    let mut s = summary_sink(to_file);
    let (Some(min), Some(max)) = (result.min_total(), result.max_total()) else {
        return Ok(());
    };
    let sql = min.report.sql;
    let nodes: Vec<String> = result.nodes.iter().map(|z| format!("{z:.6}")).collect();
    writeln!(s, "port {}: {} points on [{lo}, {hi}]", a.port.as_str(), grid.len())?;
    writeln!(s, "node positions: [{}]", nodes.join(", "))?;
    writeln!(s, "min total {:.12} at z = {:.6}", min.report.total, min.z)?;
    writeln!(s, "max total {:.12} at z = {:.6}", max.report.total, max.z)?;
    writeln!(s, "sql {sql:.12}")?;
    writeln!(
        s,
        "sub-SQL: {}",
        if result.any_sub_sql() { "yes, below sql near nodes" } else { "no" }
    )?;
    Ok(())
}

#[derive(Serialize)]
struct PhotocurrentRow {
    z: f64,
    total: f64,
    carrier: f64,
    standing: f64,
    open_port: f64,
}

fn scan_photocurrent(a: args::PhotocurrentArgs) -> Outcome {
    let cfg = load_config(&a.config)?;
    let (lo, hi) = grid_bounds(&cfg, a.z_min, a.z_max);
    let open = photocurrent_variance_open(cfg.photon_number(), cfg.transmittance, &OpenPortWeights::default());
    let rows: Vec<PhotocurrentRow> = linspace(lo, hi, a.steps)?
        .into_iter()
        .map(|z| {
            let r = photocurrent_at(&cfg, z);
            PhotocurrentRow {
                z,
                total: r.total,
                carrier: r.carrier_term,
                standing: r.standing_term,
                open_port: open,
            }
        })
        .collect();
    let to_file = emit(&a.output, |w, f| match f {
        Format::Csv => {
            writeln!(w, "z,total,carrier,standing,open_port")?;
            for r in &rows {
                let cells = [r.z, r.total, r.carrier, r.standing, r.open_port].map(fmt_f64);
                writeln!(w, "{}", cells.join(","))?;
            }
            Ok(())
        }
        Format::Json => write_json(w, &rows),
    })?;
    let min = rows.iter().map(|r| r.total).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.total).fold(f64::NEG_INFINITY, f64::max);
    let mut s = summary_sink(to_file);
    writeln!(s, "photocurrent variance: min {min:.12}, max {max:.12}, open port {open:.12}")?;
    Ok(())
}

fn mc_validate(a: args::McArgs) -> Outcome {
    let cfg = load_config(&a.config)?;
    let coupling = if a.decorrelate_phases {
        PhaseCoupling::Independent
    } else {
        PhaseCoupling::Shared
    };
    let spec = EnsembleSpec::new(a.n as usize, a.seed)?
        .with_amplitude_model(a.amplitude_model.into())
        .with_phase_coupling(coupling);
    let v = suite::mc_suite(&cfg, &spec)?;

    if let Some(path) = &a.scan_out {
        let lambda = 2.0 * PI / cfg.k;
        let points = scan_mc(&cfg, &spec, &linspace(0.0, lambda / 2.0, a.scan_steps)?, Port::A1)?;
        let mut w = BufWriter::new(File::create(path)?);
        write_scan_csv(&points, &mut w)?;
        w.flush()?;
        let side = path.with_extension("json");
        let mut meta = sidecar(&spec, Port::A1);
        meta["config"] = serde_json::to_value(ConfigDocument::from_config(&cfg)).expect("serializable");
        std::fs::write(&side, serde_json::to_string_pretty(&meta).expect("serializable") + "\n")?;
    }

    let to_file = emit(&a.output, |w, f| match f {
        Format::Csv => write_mc_table(w, &v),
        Format::Json => write_json(w, &v),
    })?;
    let mut s = summary_sink(to_file);
    writeln!(
        s,
        "cells within {} SE: {}/{} (allowed failures {})",
        suite::MC_SIGMAS,
        v.cells.len() - v.failures,
        v.cells.len(),
        v.allowed_failures
    )?;
    let m = &v.modulation;
    writeln!(
        s,
        "sin^2 modulation B = {:.6} +/- {:.6} (expected {:.6})",
        m.fit.amplitude, m.fit.amplitude_err, m.expected_amplitude
    )?;
    if m.consistent_with_flat(3.0) {
        writeln!(s, "modulation flat: the standing-wave term is missing")?;
    }
    writeln!(s, "{}", verdict(v.passed))?;
    if v.passed {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn write_mc_table(w: &mut dyn Write, v: &McValidation) -> mirrornoise::Result<()> {
    writeln!(w, "T,kz,mc_variance,stderr,analytic,z_score,pass")?;
    for c in &v.cells {
        let nums = [c.transmittance, c.kz, c.stats.variance, c.stats.standard_error, c.analytic, c.z_score].map(fmt_f64);
        writeln!(w, "{},{}", nums.join(","), c.pass)?;
    }
    Ok(())
}

fn write_checks(w: &mut dyn Write, r: &SuiteReport) -> mirrornoise::Result<()> {
    writeln!(w, "check,measured,expected,error,tolerance,pass")?;
    for c in &r.checks {
        let nums = [c.measured, c.expected, c.error, c.tolerance].map(fmt_f64);
        writeln!(w, "\"{}\",{},{}", c.name, nums.join(","), c.pass)?;
    }
    Ok(())
}

fn fock_validate(a: args::FockArgs) -> Outcome {
    let cfg = load_config(&a.config)?;
    let alphas = match a.alpha {
        Some(x) if !(x.is_finite() && x >= 0.0) => {
            return Err(Failure::Config(format!("--alpha must be a nonnegative number, got {x}")))
        }
        Some(x) if x > MAX_FOCK_ALPHA => {
            return Err(Failure::Truncation(format!(
                "|alpha| = {x} exceeds the supported maximum {MAX_FOCK_ALPHA}"
            )))
        }
        Some(x) => vec![x],
        None => suite::FOCK_ALPHAS.to_vec(),
    };
    let r = suite::fock_suite(&cfg, a.dim, &alphas)?;
    let to_file = emit(&a.output, |w, f| match f {
        Format::Csv => write_checks(w, &r),
        Format::Json => write_json(w, &r),
    })?;
    let worst = r.checks.iter().map(|c| c.error / c.tolerance.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let mut s = summary_sink(to_file);
    writeln!(
        s,
        "dim {}: {} checks, {} failing, worst error/tolerance {worst:.3e}",
        a.dim,
        r.checks.len(),
        r.failures()
    )?;
    writeln!(s, "{}", verdict(r.passed))?;
    if r.passed {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn feedback(a: args::FeedbackArgs) -> Outcome {
    let cfg = load_config(&a.config)?;
    let spec = FeedbackSpec::new(0.0, a.probe_z1, a.out_z2).with_efficiency(a.eta);
    let rs = gain_sweep(&cfg, &spec, &a.gains.0)?;
    let to_file = emit(&a.output, |w, f| match f {
        Format::Csv => write_sweep_csv(&rs, w),
        Format::Json => write_json(w, &rs),
    })?;
    let mut s = summary_sink(to_file);
    if let (Some(first), Some(last)) = (rs.first(), rs.last()) {
        writeln!(
            s,
            "g {} -> {}: in-loop {:.6e} -> {:.6e}, out-of-loop a2 {:.6e} -> {:.6e}, sql {:.6e}",
            first.gain, last.gain, first.inloop_variance, last.inloop_variance, first.out_a2_variance, last.out_a2_variance, last.sql
        )?;
        writeln!(s, "out-of-loop below sql at highest gain: {}", last.sub_sql_out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Report {
    config: ConfigDocument,
    seed: u64,
    n_samples: u64,
    scan: SuiteReport,
    monte_carlo: McValidation,
    fock: SuiteReport,
    feedback: SuiteReport,
    passed: bool,
}

fn report(a: args::ReportArgs) -> Outcome {
    let cfg = load_config(&a.config)?;
    let spec = EnsembleSpec::new(a.n as usize, a.seed)?;
    let scan = suite::scan_suite(&cfg)?;
    let monte_carlo = suite::mc_suite(&cfg, &spec)?;
    let fock = suite::fock_suite(&cfg, 40, &suite::FOCK_ALPHAS)?;
    let feedback = suite::feedback_suite(&cfg)?;
    let passed = scan.passed && monte_carlo.passed && fock.passed && feedback.passed;
    let doc = Report {
        config: ConfigDocument::from_config(&cfg),
        seed: a.seed,
        n_samples: a.n,
        scan,
        monte_carlo,
        fock,
        feedback,
        passed,
    };
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match &a.out {
        Some(path) => write_file(path, &text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    let mut s = summary_sink(a.out.is_some());
    for (name, ok) in [
        ("scan", doc.scan.passed),
        ("monte-carlo", doc.monte_carlo.passed),
        ("fock", doc.fock.passed),
        ("feedback", doc.feedback.passed),
    ] {
        writeln!(s, "{name}: {}", verdict(ok))?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}
