//! `disbessel`: evaluation tables, wave grids, transform checks, asymptotic
//! comparisons and the verification suites.
//!
//! Data goes to standard output (or `--out`), diagnostics to standard error.
//! Exit status: 0 ok, 1 verification failure, 2 usage or domain error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use disbessel::bessel::{self, BesselSpec, Direction, Kind};
use disbessel::io::{self as dio, EvalRow, LaplaceRow, WaveRow};
use disbessel::laplace;
use disbessel::verify::{self, Suite, VerifyOptions};
use disbessel::wave::{self, Scheme, SequenceWindow, WaveConfig};
use disbessel::{Error, Scaled};

const SCHEMA: &str = "disbessel/1";

#[derive(Parser)]
#[command(name = "disbessel", version, about = "Discrete Bessel functions and the discrete wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    T,
    N,
}

#[derive(clap::Args)]
struct Family {
    /// J or I
    #[arg(long)]
    kind: Kind,
    /// forward or backward
    #[arg(long)]
    direction: Direction,
    /// Order
    #[arg(short = 'n', default_value_t = 0)]
    n: u32,
    /// Parameter, nonzero
    #[arg(short = 'c', allow_negative_numbers = true)]
    c: f64,
}

impl Family {
    fn spec(&self) -> Result<BesselSpec, Error> {
        BesselSpec::new(self.kind, self.direction, self.n, self.c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate one family over a range of t
    Eval {
        #[command(flatten)]
        family: Family,
        /// Integer or inclusive range a..b
        #[arg(long = "t", allow_hyphen_values = true)]
        t: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Simulate the discrete wave equation on [-radius, radius]
    Wave {
        #[arg(long)]
        scheme: Scheme,
        #[arg(short = 'c')]
        c: f64,
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        horizon: u64,
        /// `delta` or `file=<path>` with `n u0 v0` lines
        #[arg(long, default_value = "delta")]
        init: String,
        /// Truncation budget of the backward window
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Grid destination; the per-time summary then goes to standard output
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Compare transform series against closed forms
    Laplace {
        #[command(flatten)]
        family: Family,
        /// One real or a comma-separated list
        #[arg(long = "z", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = laplace::DEFAULT_MAX_TERMS)]
        terms: usize,
        #[arg(long, default_value_t = laplace::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Exact values against the large-t (or large-order) asymptotics
    Asymp {
        #[command(flatten)]
        family: Family,
        #[arg(long = "t-max")]
        t_max: u64,
        /// Largest order in `--mode n`
        #[arg(long = "n-max", default_value_t = 100)]
        n_max: u32,
        #[arg(long, value_enum, default_value_t = Mode::T)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the invariant suites and print a JSON report
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli.command, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            let _ = out.flush();
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Eval { family, t, format } => cmd_eval(&family, &t, format, out),
        Command::Wave { scheme, c, radius, horizon, init, tol, out: path, format } => {
            let (u0, v0) = read_init(&init)?;
            let cfg = WaveConfig::new(scheme, c, radius, horizon).with_tol(tol).with_init(u0, v0);
            cmd_wave(cfg, path, format, out)
        }
        Command::Laplace { family, z, terms, tol, format } => cmd_laplace(&family, &z, terms, tol, format, out),
        Command::Asymp { family, t_max, n_max, mode, format } => cmd_asymp(&family, t_max, n_max, mode, format, out),
        Command::Verify { suite, tol, seed } => cmd_verify(suite, tol, seed, out),
    }
}

fn write_json(out: &mut dyn Write, command: &str, body: Value) -> Result<(), Failure> {
    let mut doc = json!({ "schema": SCHEMA, "command": command });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    serde_json::to_writer(&mut *out, &doc).map_err(|e| Failure::Usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn cmd_eval(family: &Family, t: &str, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = family.spec()?;
    let (t0, t1) = dio::parse_range(t)?;
    let rows: Vec<EvalRow> = bessel::sequence(&spec, t0, t1)?
        .into_iter()
        .zip(t0..=t1)
        .map(|(e, t)| EvalRow {
            n: spec.n,
            t,
            c: spec.c,
            value: e.value,
            method: e.method.as_str().to_string(),
            est_error: e.est_error,
        })
        .collect();
    match format {
        Format::Csv => dio::write_eval_csv(out, &rows)?,
        Format::Json => write_json(
            out,
            "eval",
            json!({ "kind": spec.kind, "direction": spec.direction, "rows": rows }),
        )?,
    }
    Ok(())
}

fn read_init(init: &str) -> Result<(SequenceWindow, SequenceWindow), Failure> {
    if init == "delta" {
        return Ok((SequenceWindow::delta(), SequenceWindow::zero()));
    }
    let path = init
        .strip_prefix("file=")
        .ok_or_else(|| Failure::Usage(format!("--init expects `delta` or `file=<path>`, got {init:?}")))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
    Ok(dio::parse_init_file(&text)?)
}

fn cmd_wave(cfg: WaveConfig, path: Option<PathBuf>, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let grid = wave::simulate(cfg)?;
    let rows: Vec<WaveRow> = grid.cells().map(|(n, t, value)| WaveRow { n, t, value }).collect();
    let summary = grid.max_abs_per_time();
    let write_grid = |w: &mut dyn Write| -> Result<(), Failure> {
        match format {
            Format::Csv => dio::write_wave_csv(w, &rows)?,
            Format::Json => {
                let max_abs: Vec<Value> = summary.iter().map(|(t, m)| json!({ "t": t, "max_abs": m })).collect();
                write_json(w, "wave", json!({ "config": grid.config, "rows": rows, "summary": max_abs }))?
            }
        }
        Ok(())
    };
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(&p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?);
            write_grid(&mut file)?;
            file.flush()?;
            writeln!(out, "t,max_abs")?;
            for (t, m) in &summary {
                writeln!(out, "{t},{m:?}")?;
            }
        }
        None => {
            write_grid(out)?;
            for (t, m) in &summary {
                eprintln!("t = {t}: max |u| = {m}");
            }
        }
    }
    Ok(())
}

fn cmd_laplace(family: &Family, z: &str, terms: usize, tol: f64, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = family.spec()?;
    let zs = dio::parse_real_list(z)?;
    let with_discrepancy = laplace::discrepancy_offset(&spec, 0.0).is_some();
    let mut rows = Vec::with_capacity(zs.len());
    for z in zs {
        let closed = laplace::laplace_closed(&spec, z).ok();
        let row = if laplace::in_region(&spec, z) {
            let e = laplace::laplace_series(&spec, z, tol, terms)?;
            LaplaceRow {
                z,
                closed: Some(e.closed),
                series: Some(e.series),
                abs_diff: Some(e.abs_diff()),
                terms_used: Some(e.terms_used),
                in_region: true,
                discrepancy: e.discrepancy(),
            }
        } else {
            eprintln!("z = {z} is outside the region of convergence; series left empty");
            LaplaceRow { z, closed, series: None, abs_diff: None, terms_used: None, in_region: false, discrepancy: None }
        };
        rows.push(row);
    }
    match format {
        Format::Csv => dio::write_laplace_csv(out, &rows, with_discrepancy)?,
        Format::Json => write_json(out, "laplace", json!({ "spec": spec, "rows": rows }))?,
    }
    Ok(())
}

/// Shortest round-trip `f64` text when representable, otherwise `<mantissa>e<exponent>` in decimal.
fn scaled_text(s: &Scaled) -> String {
    let v = s.to_f64();
    if s.is_zero() || (v.is_finite() && v != 0.0) {
        return format!("{v:?}");
    }
    let log10 = s.ln_abs() / std::f64::consts::LN_10;
    let e = log10.floor();
    let m = 10f64.powf(log10 - e) * s.signum();
    format!("{m:.15}e{e}")
}

fn cmd_asymp(family: &Family, t_max: u64, n_max: u32, mode: Mode, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = family.spec()?;
    if t_max < 1 {
        return Err(Failure::Usage("--t-max must be at least 1; t = 0 is outside the asymptotic range".into()));
    }
    let mut header = vec!["t", "exact", "asymptotic", "ratio", "cos_mask"];
    let mut rows: Vec<Vec<String>> = Vec::new();
    match mode {
        Mode::T => {
            let exact = bessel::sequence(&spec, 1, t_max as i64)?;
            for (e, t) in exact.iter().zip(1..) {
                let a = bessel::asymp_value(&spec, t)?;
                let masked = a.cos_factor.is_some_and(|c| c.abs() < 0.1);
                let ratio = if a.scaled.is_zero() { f64::NAN } else { e.scaled.ratio(&a.scaled) };
                rows.push(vec![t.to_string(), scaled_text(&e.scaled), scaled_text(&a.scaled), format!("{ratio:?}"), masked.to_string()]);
            }
        }
        Mode::N => {
            header.insert(0, "n");
            for n in 1..=n_max {
                let s = spec.with_order(n);
                for t in 1..=t_max as i64 {
                    let e = bessel::eval_scaled(&s, t)?;
                    let a = bessel::asymp_large_n(&s, t)?;
                    let ratio = if a.scaled.is_zero() { f64::NAN } else { e.ratio(&a.scaled) };
                    rows.push(vec![n.to_string(), t.to_string(), scaled_text(&e), scaled_text(&a.scaled), format!("{ratio:?}"), "false".into()]);
                }
            }
        }
    }
    match format {
        Format::Csv => {
            writeln!(out, "{}", header.join(","))?;
            for r in &rows {
                writeln!(out, "{}", r.join(","))?;
            }
        }
        Format::Json => {
            let objs: Vec<Value> = rows
                .iter()
                .map(|r| Value::Object(header.iter().zip(r).map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect()))
                .collect();
            write_json(out, "asymp", json!({ "spec": spec, "rows": objs }))?;
        }
    }
    Ok(())
}

fn cmd_verify(suite: Suite, tol: Option<f64>, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let report = verify::run(suite, &VerifyOptions { tol, seed });
    write_json(
        out,
        "verify",
        json!({ "suite": report.suite, "checks_run": report.checks_run, "failures": report.failures }),
    )?;
    if report.passed() {
        return Ok(());
    }
    for f in &report.failures {
        eprintln!("FAILED {}: {}", f.check, f.detail);
    }
    Err(Failure::Verification)
}
