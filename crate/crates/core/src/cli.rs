//! `wcounts <subcommand> --config <path> [--out <dir>] [--budget <ops>] [--threads <n>]`

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};
use crate::enumerate::{enumerate_auto, estimate_work, CountQuery, CountSeries};
use crate::error::{Error, Result};
use crate::exponents::{exponent_report, is_log_anticanonical, ExponentReport};
use crate::fit::{fit_asymptotic, verdict, FitReport, Verdict};
use crate::root_system::TypeLetter;
use crate::zeta::{
    cell_sum_local_integral, geometric_local_factor, pole_probe, truncated_global_product,
    volume_correction_bound, EulerFactorSpec, VolumeModel, ZetaTemplate,
};

#[derive(Parser, Debug)]
#[command(name = "wcounts", version, about = "Exponent predictions and integral point counts on wonderful compactifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Write the predicted exponents (a, b).
    Predict(CommonArgs),
    /// Enumerate points over the threshold grid.
    Count(CommonArgs),
    /// Local factors, volume corrections and the global pole probe.
    Zeta(CommonArgs),
    /// Fit the saved counts against the prediction.
    Fit(CommonArgs),
    /// Predict, count and fit in one bundle with verdicts.
    Report(CommonArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Eq)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Predict(a)
            | Command::Count(a)
            | Command::Zeta(a)
            | Command::Fit(a)
            | Command::Report(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CsvRow {
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "N")]
    n: u64,
    flagged: u64,
    seconds: f64,
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn series_to_csv(series: &CountSeries) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // a single pass produces every threshold, so each row carries the
    // wall-clock time of the whole pass
    for (b, n, flagged) in series.rows() {
        w.serialize(CsvRow {
            b,
            n,
            flagged,
            seconds: series.seconds,
        })?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn series_from_csv(path: &Path) -> Result<CountSeries> {
    let mut r = csv::Reader::from_path(path)?;
    let mut s = CountSeries {
        thresholds: vec![],
        counts: vec![],
        flagged: vec![],
        seconds: 0.0,
        points: None,
    };
    for row in r.deserialize() {
        let row: CsvRow = row?;
        s.thresholds.push(row.b);
        s.counts.push(row.n);
        s.flagged.push(row.flagged);
        s.seconds = row.seconds;
    }
    Ok(s)
}

pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub summary: Value,
}

fn out_dir(args: &CommonArgs, exp: &Experiment) -> PathBuf {
    args.out
        .clone()
        .or_else(|| exp.config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn predict(exp: &Experiment) -> Result<(ExponentReport, Value)> {
    let report = exponent_report(&exp.da, &exp.sel, &exp.lam, &exp.places)?;
    let doc = json!({
        "exponents": report,
        "group": exp.rs.name(),
        "lambda": exp.lam,
        "boundary": exp.sel.indices().iter().map(|i| i + 1).collect::<Vec<_>>(),
        "places": exp.places,
        "orbits": exp.da.orbits().iter().map(|o| o.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "log_anticanonical": is_log_anticanonical(&exp.rs, &exp.sel, &exp.lam),
        "config": exp.config,
    });
    Ok((report, doc))
}

fn count_query(exp: &Experiment) -> Result<CountQuery> {
    if exp.rs.type_letter() != TypeLetter::A || !exp.da.is_split() {
        return Err(Error::Unsupported(format!(
            "counting is implemented on split PGL_n, got {}{}",
            exp.rs.name(),
            if exp.da.is_split() { "" } else { " with a nontrivial action" }
        )));
    }
    CountQuery::new(
        exp.rs.rank() + 1,
        exp.lam.clone(),
        exp.sel.clone(),
        &exp.places,
        exp.require_thresholds()?.to_vec(),
    )
}

fn count(exp: &Experiment, dir: &Path, written: &mut Vec<PathBuf>) -> Result<CountSeries> {
    let query = count_query(exp)?;
    let series = enumerate_auto(&query, &exp.enum_options())?;
    let csv_path = dir.join("counts.csv");
    write_atomic(&csv_path, &series_to_csv(&series)?)?;
    written.push(csv_path);
    if let Some(points) = &series.points {
        let mut buf = String::new();
        for p in points {
            buf.push_str(&serde_json::to_string(p)?);
            buf.push('\n');
        }
        let path = dir.join("points.jsonl");
        write_atomic(&path, buf.as_bytes())?;
        written.push(path);
    }
    Ok(series)
}

fn fit_doc(exp: &Experiment, report: &ExponentReport, series: &CountSeries) -> Result<(FitReport, Verdict, Value)> {
    let fit = fit_asymptotic(series, Some(report.b))?;
    let a = crate::zeta::ZetaTemplate::new(&exp.da, &exp.lam, &exp.sel)?.a;
    let v = verdict(a, report.b, &fit, &exp.tolerances());
    let doc = json!({
        "predicted": {"a": crate::picard::format_rational(&report.a), "b": report.b, "p": report.b - 1},
        "fit": fit,
        "verdict": v,
        "tolerances": exp.config.tolerances,
    });
    Ok((fit, v, doc))
}

fn zeta(exp: &Experiment, dir: &Path, written: &mut Vec<PathBuf>) -> Result<Value> {
    let z = exp.require_zeta()?;
    let template = ZetaTemplate::new(&exp.da, &exp.lam, &exp.sel)?;
    let probe = pole_probe(&template, z.prime_cutoff, &z.s, z.delta)?;

    let mut local = Vec::new();
    for &q in &z.q {
        let spec = EulerFactorSpec::from_action(&exp.da, &exp.lam, &exp.sel, q, z.depth)?;
        for &s in &z.s {
            let mut row = json!({
                "q": q,
                "s": s,
                "geometric": geometric_local_factor(&spec, s)?,
                "modular_cells": cell_sum_local_integral(&spec, s, VolumeModel::Modular)?,
            });
            if exp.rs.type_letter() == TypeLetter::A && exp.rs.rank() == 1 {
                row["exact_cells"] = json!(cell_sum_local_integral(&spec, s, VolumeModel::ExactPgl2)?);
                row["volume_correction"] = json!(volume_correction_bound(&spec, s)?);
            }
            local.push(row);
        }
    }

    let first = truncated_global_product(&template, z.prime_cutoff, z.s[0], z.delta)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["p", "local_factor", "running_product"])?;
    for r in &first.rows {
        w.write_record([r.p.to_string(), r.local.to_string(), r.running.to_string()])?;
    }
    let rows_path = dir.join("zeta_rows.csv");
    write_atomic(&rows_path, &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    written.push(rows_path);

    Ok(json!({
        "a": template.a_exact,
        "prime_cutoff": z.prime_cutoff,
        "delta": z.delta,
        "pole_probe": probe,
        "local": local,
        "rows_s": z.s[0],
    }))
}

pub fn run(command: &Command) -> Result<Outcome> {
    let args = command.args();
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(b) = args.budget {
        config.budget = b;
    }
    let exp = config.validate()?;
    let dir = out_dir(args, &exp);
    std::fs::create_dir_all(&dir)?;

    let body = || -> Result<(Vec<PathBuf>, Value)> {
        let mut written = Vec::new();
        let summary = match command {
            Command::Predict(_) => {
                let (_, doc) = predict(&exp)?;
                let path = dir.join("exponents.json");
                write_json(&path, &doc)?;
                written.push(path);
                doc["exponents"].clone()
            }
            Command::Count(_) => {
                let s = count(&exp, &dir, &mut written)?;
                json!({"counts": s.counts, "seconds": s.seconds})
            }
            Command::Zeta(_) => {
                let doc = zeta(&exp, &dir, &mut written)?;
                let path = dir.join("zeta.json");
                write_json(&path, &doc)?;
                written.push(path);
                doc["pole_probe"].clone()
            }
            Command::Fit(_) => {
                let (report, _) = predict(&exp)?;
                let series = series_from_csv(&dir.join("counts.csv"))?;
                let (_, v, doc) = fit_doc(&exp, &report, &series)?;
                let path = dir.join("fit.json");
                write_json(&path, &doc)?;
                written.push(path);
                json!(v)
            }
            Command::Report(_) => {
                let (report, pdoc) = predict(&exp)?;
                let query = count_query(&exp)?;
                let series = count(&exp, &dir, &mut written)?;
                let (_, v, fdoc) = fit_doc(&exp, &report, &series)?;
                let doc = json!({
                    "prediction": pdoc,
                    "counts": {
                        "thresholds": series.thresholds,
                        "counts": series.counts,
                        "flagged": series.flagged,
                        "seconds": series.seconds,
                        "estimated_work": estimate_work(&query),
                    },
                    "fit": fdoc,
                    "verdict": if v.pass { "PASS" } else { "FAIL" },
                });
                let path = dir.join("report.json");
                write_json(&path, &doc)?;
                written.push(path);
                json!(v)
            }
        };
        Ok((written, summary))
    };

    let (written, summary) = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(body)?,
        None => body()?,
    };
    Ok(Outcome { written, summary })
}

pub fn error_json(e: &Error) -> Value {
    json!({"error": {"module": e.module(), "message": e.to_string()}})
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(o) => {
            let written: Vec<String> = o.written.iter().map(|p| p.display().to_string()).collect();
            println!("{}", json!({"written": written, "summary": o.summary}));
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            1
        }
    }
}
