mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use divmarkov::enrichment::{
    search_counterexample, sweep, tsallis_counterexample, CheckKind, CheckResult, Instance, RandomSampling,
    SearchOptions, Shape, Witness, DEFAULT_TOL,
};
use divmarkov::info::{
    channel_entropy, channel_mutual_information, conditional_entropy, conditional_mutual_information, entropy,
    mutual_information,
};
use divmarkov::partition::{divergence_scan, entropy_scan, Binning, ContinuousModel, RefinementScan};
use divmarkov::{channel_divergence, conditional_divergence, divergence, Error, Family, MeasureReport, Rational};
use serde_json::{json, Value};

use io::{
    channel_json, csv_cell, distribution_json, encode_ext, read_channel, read_distribution, read_input, render_json,
    Backend, Input,
};

/// Exit status when a hunt finds no witness.
const EXIT_NO_WITNESS: u8 = 1;
/// Exit status for unreadable input or invalid arguments.
const EXIT_USAGE: u8 = 2;
/// Exit status for input that violates a probability invariant.
const EXIT_INVALID_INPUT: u8 = 3;
/// Exit status when a refinement scan decreases.
const EXIT_NOT_MONOTONE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "divmarkov",
    version,
    about = "Divergences, entropy and enrichment checks on finite stochastic matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Numeric backend.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Float)]
    mode: Mode,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Relative tolerance for float-mode inequality checks.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// kl, tv, renyi, tsallis, or a compact form such as renyi:2 or tsallis:2.
    #[arg(long, global = true, default_value = "kl")]
    family: String,

    /// Rényi order when --family renyi.
    #[arg(long, global = true)]
    alpha: Option<String>,

    /// Tsallis order when --family tsallis; the second model for `scan`.
    #[arg(long, global = true)]
    q: Option<String>,

    /// Worker threads for sweeps and scans.
    #[arg(long, global = true, env = "DIVMARKOV_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Float,
    Rational,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Divergence of two distributions, or channel divergence of two channels.
    Divergence {
        #[arg(value_name = "P")]
        first: PathBuf,
        #[arg(value_name = "Q")]
        second: PathBuf,
    },
    /// Entropy of a distribution or a channel.
    Entropy { input: PathBuf },
    /// Mutual information of a joint distribution or a channel into a product.
    Mi { input: PathBuf },
    /// Conditional divergence, entropy or mutual information given a source.
    Conditional {
        #[command(subcommand)]
        kind: ConditionalKind,
    },
    /// Sweep the enrichment inequalities over random instances.
    Check {
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluate the built-in exact two-symbol counterexample instead.
        #[arg(long)]
        paper_instance: bool,
    },
    /// Search for a violation of the enrichment inequalities.
    Hunt {
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Source and target sizes, e.g. 2x2.
        #[arg(long, default_value = "2x2")]
        shape: String,
        /// Witness file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep the largest violation rather than the first one.
        #[arg(long)]
        max_violation: bool,
        /// Probability of zeroing each generated entry.
        #[arg(long, default_value_t = 0.0)]
        sparsity: f64,
    },
    /// Divergence or entropy of discretized continuous models under refinement.
    Scan {
        #[arg(long, value_enum)]
        op: ScanOp,
        /// First model, e.g. normal:0,1 or uniform:0,1.
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = BinningArg::Dyadic)]
        binning: BinningArg,
        /// Interval to partition, as a,b.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
}

#[derive(Subcommand)]
enum ConditionalKind {
    Divergence {
        f: PathBuf,
        g: PathBuf,
        #[arg(long)]
        source: PathBuf,
    },
    Entropy {
        f: PathBuf,
        #[arg(long)]
        source: PathBuf,
    },
    Mi {
        h: PathBuf,
        #[arg(long)]
        source: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScanOp {
    Divergence,
    Entropy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BinningArg {
    Dyadic,
    Quantile,
}

/// A command result in both output formats.
struct Report {
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    status: u8,
}

impl Report {
    fn new(json: Value, header: Vec<&'static str>, rows: Vec<Vec<Value>>) -> Self {
        Report {
            json,
            header,
            rows,
            status: 0,
        }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => render_json(&self.json),
            Format::Csv => {
                let mut out = self.header.join(",");
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn parse_order(text: &str) -> Result<f64> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().with_context(|| format!("cannot parse order {text:?}")),
    }
}

impl Cli {
    fn family(&self) -> Result<Family> {
        let name = self.family.trim().to_ascii_lowercase();
        let family = match name.as_str() {
            "renyi" => {
                let alpha = self.alpha.as_deref().context("--family renyi needs --alpha")?;
                Family::renyi(parse_order(alpha)?)?
            }
            "tsallis" => {
                let q = self.q.as_deref().context("--family tsallis needs --q")?;
                Family::tsallis(parse_order(q)?)?
            }
            _ => name.parse()?,
        };
        Ok(family)
    }

    fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Float => "float",
            Mode::Rational => "rational",
        }
    }
}

fn measure_report<S: Backend>(cli: &Cli, command: &str, report: &MeasureReport<S>) -> Report {
    let value = encode_ext(&report.value);
    let closed = report.closed_form.as_ref().map_or(Value::Null, encode_ext);
    let residual = report.residual.map_or(Value::Null, |r| r.encode());
    let argmax = report.argmax.map_or(Value::Null, Value::from);
    let json = json!({
        "command": command,
        "family": report.family.to_string(),
        "mode": cli.mode_name(),
        "value": value,
        "closed_form": closed,
        "residual": residual,
        "argmax": argmax,
    });
    Report::new(
        json,
        vec!["family", "value", "closed_form", "residual", "argmax"],
        vec![vec![
            Value::from(report.family.to_string()),
            value,
            closed,
            residual,
            argmax,
        ]],
    )
}

fn value_report<S: Backend>(
    cli: &Cli,
    command: &str,
    family: &Family,
    value: &divmarkov::Ext<S>,
    argmax: Option<usize>,
) -> Report {
    let value = encode_ext(value);
    let argmax = argmax.map_or(Value::Null, Value::from);
    let json = json!({
        "command": command,
        "family": family.to_string(),
        "mode": cli.mode_name(),
        "value": value,
        "argmax": argmax,
    });
    Report::new(
        json,
        vec!["family", "value", "argmax"],
        vec![vec![Value::from(family.to_string()), value, argmax]],
    )
}

fn cmd_divergence<S: Backend>(cli: &Cli, p: &Path, q: &Path) -> Result<Report> {
    let family = cli.family()?;
    match (read_input::<S>(p)?, read_input::<S>(q)?) {
        (Input::Distribution(p), Input::Distribution(q)) => Ok(value_report(
            cli,
            "divergence",
            &family,
            &divergence(&family, &p, &q)?,
            None,
        )),
        (Input::Channel(f), Input::Channel(g)) => {
            let d = channel_divergence(&family, &f, &g)?;
            Ok(value_report(cli, "divergence", &family, &d.value, Some(d.argmax)))
        }
        _ => bail!("divergence needs two distributions or two channels"),
    }
}

fn cmd_entropy<S: Backend>(cli: &Cli, input: &Path) -> Result<Report> {
    let family = cli.family()?;
    let report = match read_input::<S>(input)? {
        Input::Distribution(p) => entropy(&family, &p)?,
        Input::Channel(f) => channel_entropy(&family, &f)?,
    };
    Ok(measure_report(cli, "entropy", &report))
}

fn cmd_mi<S: Backend>(cli: &Cli, input: &Path) -> Result<Report> {
    let family = cli.family()?;
    let report = match read_input::<S>(input)? {
        Input::Distribution(r) => mutual_information(&family, &r)?,
        Input::Channel(h) => channel_mutual_information(&family, &h)?,
    };
    Ok(measure_report(cli, "mi", &report))
}

fn cmd_conditional<S: Backend>(cli: &Cli, kind: &ConditionalKind) -> Result<Report> {
    let family = cli.family()?;
    match kind {
        ConditionalKind::Divergence { f, g, source } => {
            let (f, g) = (read_channel::<S>(f)?, read_channel::<S>(g)?);
            let value = conditional_divergence(&family, &f, &g, &read_distribution(source)?)?;
            Ok(value_report(cli, "conditional divergence", &family, &value, None))
        }
        ConditionalKind::Entropy { f, source } => {
            let report = conditional_entropy(&family, &read_channel::<S>(f)?, &read_distribution(source)?)?;
            Ok(measure_report(cli, "conditional entropy", &report))
        }
        ConditionalKind::Mi { h, source } => {
            let report = conditional_mutual_information(&family, &read_channel::<S>(h)?, &read_distribution(source)?)?;
            Ok(measure_report(cli, "conditional mi", &report))
        }
    }
}

fn check_json<S: Backend>(r: &CheckResult<S>) -> Value {
    let excess = r.slack.as_ref().map_or(Value::Null, |s| (-s.clone()).encode());
    json!({
        "check": r.check.name(),
        "passed": r.passed,
        "lhs": encode_ext(&r.lhs),
        "rhs": encode_ext(&r.rhs),
        "lhs_approx": r.lhs.to_f64().encode(),
        "rhs_approx": r.rhs.to_f64().encode(),
        "excess": excess,
    })
}

fn instance_json<S: Backend>(inst: &Instance<S>) -> Value {
    json!({
        "p": distribution_json(&inst.p),
        "p_prime": distribution_json(&inst.p2),
        "f": channel_json(&inst.f),
        "f_prime": channel_json(&inst.f2),
    })
}

fn check_rows<S: Backend>(results: &[&CheckResult<S>]) -> Vec<Vec<Value>> {
    results
        .iter()
        .map(|r| {
            vec![
                Value::from(r.check.name()),
                Value::from(r.passed),
                encode_ext(&r.lhs),
                encode_ext(&r.rhs),
            ]
        })
        .collect()
}

fn counterexample_report<S: Backend>(family: &Family, mode: &str, inst: &Instance<S>, tol: f64) -> Result<Report> {
    let (sequential, chain) = inst.evaluate(family, tol)?;
    let source = divergence(family, &inst.p, &inst.p2)?;
    let channel = channel_divergence(family, &inst.f, &inst.f2)?;
    let composed = divergence(family, &inst.p.push(&inst.f)?, &inst.p2.push(&inst.f2)?)?;
    let json = json!({
        "command": "check",
        "family": family.to_string(),
        "mode": mode,
        "instance": instance_json(inst),
        "source_divergence": encode_ext(&source),
        "channel_divergence": {"value": encode_ext(&channel.value), "argmax": channel.argmax},
        "composed_divergence": encode_ext(&composed),
        "sequential": check_json(&sequential),
        "chain_bound": check_json(&chain),
    });
    Ok(Report::new(
        json,
        vec!["check", "passed", "lhs", "rhs"],
        check_rows(&[&sequential, &chain]),
    ))
}

fn cmd_check<S: Backend>(cli: &Cli, budget: u64, seed: u64, counterexample: bool) -> Result<Report> {
    let family = cli.family()?;
    if counterexample {
        // exact whenever the family allows it
        let exact = tsallis_counterexample();
        return match counterexample_report::<Rational>(&family, "rational", &exact, cli.tol) {
            Err(e) if matches!(e.downcast_ref::<Error>(), Some(Error::Unsupported { .. })) => {
                let inst = Instance {
                    p: exact.p.convert()?,
                    p2: exact.p2.convert()?,
                    f: exact.f.convert()?,
                    f2: exact.f2.convert()?,
                };
                counterexample_report::<f64>(&family, "float", &inst, cli.tol)
            }
            other => other,
        };
    }
    let summary = sweep::<S>(&family, budget, seed, cli.tol)?;
    let mut failures = serde_json::Map::new();
    let mut first = serde_json::Map::new();
    for tally in &summary.checks {
        failures.insert(tally.check.name().into(), Value::from(tally.failures));
        first.insert(
            tally.check.name().into(),
            tally.first_failure.map_or(Value::Null, Value::from),
        );
    }
    let max_violation = summary.max_violation.map_or(Value::Null, |v| v.encode());
    let json = json!({
        "command": "check",
        "family": family.to_string(),
        "mode": cli.mode_name(),
        "seed": seed,
        "instances": summary.instances,
        "tolerance": cli.tol,
        "checks": CheckKind::ALL.iter().map(|c| c.name()).collect::<Vec<_>>(),
        "failures": failures,
        "total_failures": summary.total_failures(),
        "first_failure": first,
        "max_violation": max_violation,
    });
    let rows = summary
        .checks
        .iter()
        .map(|t| {
            vec![
                Value::from(t.check.name()),
                Value::from(t.failures),
                t.first_failure.map_or(Value::Null, Value::from),
            ]
        })
        .collect();
    Ok(Report::new(json, vec!["check", "failures", "first_failure"], rows))
}

fn parse_shape(text: &str) -> Result<Shape> {
    let (n, m) = text
        .split_once(['x', 'X'])
        .with_context(|| format!("shape must look like 2x2, got {text:?}"))?;
    Ok(Shape::new(n.trim().parse()?, m.trim().parse()?)?)
}

fn witness_json<S: Backend>(cli: &Cli, w: &Witness<S>) -> Value {
    json!({
        "command": "hunt",
        "family": w.family.to_string(),
        "mode": cli.mode_name(),
        "seed": w.seed,
        "index": w.index,
        "shape": [w.shape.source, w.shape.target],
        "instance": instance_json(&w.instance),
        "sequential": check_json(&w.sequential),
        "chain_bound": check_json(&w.chain_bound),
        "violation": w.violation().encode(),
        "both_fail": w.co_occurs(),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_hunt<S: Backend>(
    cli: &Cli,
    budget: u64,
    seed: u64,
    shape: &str,
    out: Option<&Path>,
    max_violation: bool,
    sparsity: f64,
) -> Result<Report> {
    let family = cli.family()?;
    let shape = parse_shape(shape)?;
    if !(0.0..1.0).contains(&sparsity) {
        bail!("--sparsity must lie in [0, 1)");
    }
    let options = SearchOptions {
        tol: cli.tol,
        max_violation,
    };
    let found = search_counterexample::<S>(&family, shape, budget, seed, &RandomSampling { sparsity }, options)?;
    let Some(witness) = found else {
        let json = json!({
            "command": "hunt",
            "family": family.to_string(),
            "mode": cli.mode_name(),
            "seed": seed,
            "budget": budget,
            "witness": Value::Null,
        });
        let mut report = Report::new(json, vec!["found"], vec![vec![Value::from(false)]]);
        report.status = EXIT_NO_WITNESS;
        return Ok(report);
    };
    let json = witness_json(cli, &witness);
    if let Some(path) = out {
        fs::write(path, render_json(&json)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let rows = check_rows(&[&witness.sequential, &witness.chain_bound]);
    Ok(Report::new(json, vec!["check", "passed", "lhs", "rhs"], rows))
}

fn parse_window(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .with_context(|| format!("window must look like -8,8, got {text:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn cmd_scan(cli: &Cli, op: ScanOp, p: &str, depth: usize, binning: BinningArg, window: Option<&str>) -> Result<Report> {
    if cli.mode == Mode::Rational {
        bail!("scan is only available in float mode");
    }
    // --q names the second model here, so the Tsallis order comes from the compact form
    if cli.family.trim().eq_ignore_ascii_case("tsallis") {
        bail!("scan takes the Tsallis order as --family tsallis:<q>");
    }
    let family = cli.family()?;
    let p_model: ContinuousModel = p.parse()?;
    let window = window.map(parse_window).transpose()?;
    let binning = match binning {
        BinningArg::Dyadic => Binning::Dyadic,
        BinningArg::Quantile => Binning::Quantile,
    };
    let (scan, q_name): (RefinementScan, Value) = match op {
        ScanOp::Divergence => {
            let q = cli.q.as_deref().context("scan --op divergence needs --q MODEL")?;
            let q_model: ContinuousModel = q.parse()?;
            (
                divergence_scan(&family, &p_model, &q_model, depth, window)?,
                Value::from(q),
            )
        }
        ScanOp::Entropy => (entropy_scan(&family, &p_model, depth, binning, window)?, Value::Null),
    };
    let monotone = scan.is_monotone(1e-12);
    let values: Vec<Value> = scan.values.iter().map(encode_ext).collect();
    let json = json!({
        "command": "scan",
        "op": match op { ScanOp::Divergence => "divergence", ScanOp::Entropy => "entropy" },
        "family": family.to_string(),
        "p": p,
        "q": q_name,
        "depths": scan.depths,
        "cells": scan.cells,
        "values": values,
        "monotone": monotone,
    });
    let rows = scan
        .depths
        .iter()
        .zip(&scan.cells)
        .zip(&values)
        .map(|((d, c), v)| vec![Value::from(*d), Value::from(*c), v.clone()])
        .collect();
    let mut report = Report::new(json, vec!["depth", "cells", "value"], rows);
    if !monotone {
        report.status = EXIT_NOT_MONOTONE;
    }
    Ok(report)
}

fn dispatch<S: Backend>(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Divergence { first, second } => cmd_divergence::<S>(cli, first, second),
        Command::Entropy { input } => cmd_entropy::<S>(cli, input),
        Command::Mi { input } => cmd_mi::<S>(cli, input),
        Command::Conditional { kind } => cmd_conditional::<S>(cli, kind),
        Command::Check {
            budget,
            seed,
            paper_instance,
        } => cmd_check::<S>(cli, *budget, *seed, *paper_instance),
        Command::Hunt {
            budget,
            seed,
            shape,
            out,
            max_violation,
            sparsity,
        } => cmd_hunt::<S>(cli, *budget, *seed, shape, out.as_deref(), *max_violation, *sparsity),
        Command::Scan {
            op,
            p,
            depth,
            binning,
            window,
        } => cmd_scan(cli, *op, p, *depth, *binning, window.as_deref()),
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let report = match cli.mode {
        Mode::Float => dispatch::<f64>(cli)?,
        Mode::Rational => dispatch::<Rational>(cli)?,
    };
    let text = report.render(cli.format);
    match &cli.output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    if report.status == EXIT_NO_WITNESS {
        eprintln!("no witness found");
    } else if report.status == EXIT_NOT_MONOTONE {
        eprintln!("refinement scan is not monotone");
    }
    Ok(report.status)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let invalid = err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<Error>(),
            Some(Error::NotStochastic { .. } | Error::InvalidEntry { .. })
        )
    });
    if invalid {
        EXIT_INVALID_INPUT
    } else {
        EXIT_USAGE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
