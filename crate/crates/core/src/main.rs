use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use critex::experiments::phase::Axis;
use critex::experiments::{
    emit_phase_diagram, evaluate_testfn_functional, output_root, run_decay_suite, run_diffusion_suite,
    run_evolve, run_lifespan_sweep, DecayConfig, EvolveConfig, ProfileSpec, RunDir, SweepConfig,
    TestFunctionSpec,
};
use critex::exponents::{
    alpha0, classify_regime, conjugate_exponent, contradiction_gate, gamma_tilde, hls_pair,
    lifespan_exponent, p_crit, p_fujita, sharp_lifespan_admissible, RegimeParams,
};
use critex::propagator::propagator;
use critex::{Error, Result};

#[derive(Parser)]
#[command(name = "critex", version, about = "Critical-exponent experiments for damped waves with negative-order data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat JSON file with default values; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root (defaults to $CRITEX_OUT, then ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Thresholds, exponents and the regime verdict.
    #[command(allow_negative_numbers = true)]
    Exponents(ExponentsArgs),
    /// Damped-wave decay rates on radial data.
    #[command(allow_negative_numbers = true)]
    LinearDecay(DecayArgs),
    /// Damped, heat and difference rates on radial data.
    #[command(allow_negative_numbers = true)]
    Diffusion(DecayArgs),
    /// One nonlinear evolution on a periodic grid.
    #[command(allow_negative_numbers = true)]
    Evolve(EvolveArgs),
    /// Lifespan sweep over a geometric data-size schedule.
    #[command(allow_negative_numbers = true)]
    Lifespan(LifespanArgs),
    /// Regime map over the (gamma, p) plane.
    #[command(allow_negative_numbers = true)]
    PhaseDiagram(PhaseArgs),
    /// Test-function functional on a stored evolution.
    #[command(allow_negative_numbers = true)]
    Testfn(TestfnArgs),
    /// One propagator evaluation.
    #[command(allow_negative_numbers = true)]
    Probe(ProbeArgs),
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ExponentsArgs {
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ExponentsConfig {
    n: f64,
    gamma: f64,
    p: Option<f64>,
    s: Option<f64>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct DecayArgs {
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// powerlaw:a=<x> or gaussian:w=<x>
    #[arg(long)]
    profile: Option<ProfileSpec>,
    /// zero, same or opposite
    #[arg(long)]
    velocity: Option<String>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    window_lo: Option<f64>,
    #[arg(long)]
    window_hi: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct EvolveArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    points: Option<usize>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    length: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    growth_factor: Option<f64>,
    #[arg(long)]
    dt_min_ratio: Option<f64>,
    #[arg(long)]
    dealias: Option<bool>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    nonlinear: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct LifespanArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eps_start: Option<f64>,
    #[arg(long)]
    eps_factor: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    points: Option<usize>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    length: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    theta_check: Option<f64>,
    #[arg(long)]
    growth_factor: Option<f64>,
    #[arg(long)]
    dealias: Option<bool>,
    /// Worker threads for the sweep.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct PhaseArgs {
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_steps: Option<usize>,
    #[arg(long)]
    p_min: Option<f64>,
    #[arg(long)]
    p_max: Option<f64>,
    #[arg(long)]
    p_steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct PhaseConfig {
    n: f64,
    s: f64,
    gamma_min: f64,
    gamma_max: f64,
    gamma_steps: usize,
    p_min: f64,
    p_max: f64,
    p_steps: usize,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct TestfnArgs {
    /// Directory written by `evolve`.
    #[arg(long)]
    run: Option<PathBuf>,
    /// Comma-separated radii.
    #[arg(long = "R", value_delimiter = ',')]
    #[serde(rename = "R", skip_serializing_if = "Vec::is_empty")]
    radii: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestfnConfig {
    run: PathBuf,
    #[serde(rename = "R")]
    radii: Vec<f64>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ProbeArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeConfig {
    t: f64,
    r: f64,
}

/// File values overlaid with every flag that was given.
fn resolve<A: Serialize, C: DeserializeOwned>(file: Option<&Path>, args: &A) -> Result<C> {
    let mut merged = match file {
        Some(path) => serde_json::from_str::<Value>(&fs::read_to_string(path)?)?,
        None => json!({}),
    };
    let Value::Object(target) = &mut merged else {
        return Err(Error::Domain("config file must hold a flat JSON object".into()));
    };
    if let Value::Object(flags) = serde_json::to_value(args)? {
        for (k, v) in flags {
            if !v.is_null() {
                target.insert(k, v);
            }
        }
    }
    serde_json::from_value(merged).map_err(|e| Error::Domain(format!("invalid configuration: {e}")))
}

fn root(common: &Common) -> PathBuf {
    common.out.clone().unwrap_or_else(output_root)
}

/// Print to stdout; a closed pipe is not an error.
fn print(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn emit(value: &impl Serialize) -> Result<()> {
    print(&serde_json::to_string_pretty(value)?)
}

fn announce(dir: &RunDir) {
    eprintln!("run directory: {}", dir.path().display());
}

fn exponents(args: &ExponentsArgs) -> Result<()> {
    let c: ExponentsConfig = resolve(args.common.config.as_deref(), args)?;
    let mut out = json!({
        "n": c.n,
        "gamma": c.gamma,
        "p_crit": p_crit(c.n, c.gamma)?,
        "p_fujita_shifted": p_fujita(c.n / 2.0 + c.gamma)?,
        "gamma_tilde": gamma_tilde(c.n)?,
        "m": hls_pair(c.gamma, c.n)?,
    });
    if let Some(p) = c.p {
        let params = RegimeParams::new(c.n, c.gamma, c.s.unwrap_or(1.0), p);
        out["p"] = json!(p);
        out["s"] = json!(params.s);
        out["conjugate"] = json!(conjugate_exponent(p)?);
        out["verdict"] = serde_json::to_value(classify_regime(&params)?)?;
        out["contradiction_gate"] = json!(contradiction_gate(c.n, c.gamma, p)?);
        out["lifespan_exponent"] = json!(lifespan_exponent(p, c.n, c.gamma).ok());
        out["alpha0"] = json!(alpha0(p, c.n, c.gamma).ok());
        out["sharp_lifespan"] = serde_json::to_value(sharp_lifespan_admissible(&params))?;
    }
    emit(&out)
}

fn decay(args: &DecayArgs, diffusion: bool) -> Result<()> {
    let c: DecayConfig = resolve(args.common.config.as_deref(), args)?;
    let started = Instant::now();
    let report = if diffusion {
        run_diffusion_suite(&c)?
    } else {
        run_decay_suite(&c)?
    };
    let dir = RunDir::create(&root(&args.common), if diffusion { "diffusion" } else { "linear-decay" })?;
    dir.write_json("config.json", &c)?;
    dir.write_text("curves.csv", &report.curves_csv())?;
    dir.write_json("report.json", &report)?;
    dir.write_timing(started.elapsed().as_secs_f64())?;
    announce(&dir);
    emit(&report)
}

fn evolve(args: &EvolveArgs) -> Result<()> {
    let c: EvolveConfig = resolve(args.common.config.as_deref(), args)?;
    c.grid()?;
    let dir = RunDir::create(&root(&args.common), "evolve")?;
    let report = run_evolve(&c, Some(&dir))?;
    announce(&dir);
    emit(&report)
}

fn lifespan(args: &LifespanArgs) -> Result<()> {
    let c: SweepConfig = resolve(args.common.config.as_deref(), args)?;
    let started = Instant::now();
    let result = run_lifespan_sweep(&c)?;
    let dir = RunDir::create(&root(&args.common), "lifespan")?;
    dir.write_json("config.json", &c)?;
    dir.write_text("sweep.csv", &result.to_csv())?;
    dir.write_json("report.json", &result)?;
    dir.write_timing(started.elapsed().as_secs_f64())?;
    announce(&dir);
    emit(&result)
}

fn phase(args: &PhaseArgs) -> Result<()> {
    let started = Instant::now();
    let c: PhaseConfig = resolve(args.common.config.as_deref(), args)?;
    let diagram = emit_phase_diagram(
        c.n,
        c.s,
        Axis::new(c.gamma_min, c.gamma_max, c.gamma_steps),
        Axis::new(c.p_min, c.p_max, c.p_steps),
    )?;
    let dir = RunDir::create(&root(&args.common), "phase-diagram")?;
    dir.write_json("config.json", &c)?;
    dir.write_text("regions.csv", &diagram.to_csv())?;
    let mut counts = serde_json::Map::new();
    for regime in ["GlobalExistence", "BlowUp", "CriticalOpen", "OutsideTheory"] {
        let k = diagram.cells.iter().filter(|x| x.regime.as_str() == regime).count();
        counts.insert(regime.to_string(), json!(k));
    }
    let report = json!({ "n": c.n, "s": c.s, "cells": diagram.cells.len(), "counts": counts });
    dir.write_json("report.json", &report)?;
    dir.write_timing(started.elapsed().as_secs_f64())?;
    announce(&dir);
    emit(&report)
}

fn testfn(args: &TestfnArgs) -> Result<()> {
    let started = Instant::now();
    let c: TestfnConfig = resolve(args.common.config.as_deref(), args)?;
    let specs = c
        .radii
        .iter()
        .map(|&r| TestFunctionSpec::new(r))
        .collect::<Result<Vec<_>>>()?;
    let report = evaluate_testfn_functional(&c.run, &specs)?;
    let dir = RunDir::create(&root(&args.common), "testfn")?;
    dir.write_json("config.json", &c)?;
    dir.write_json("report.json", &report)?;
    dir.write_timing(started.elapsed().as_secs_f64())?;
    announce(&dir);
    emit(&report)
}

fn probe(args: &ProbeArgs) -> Result<()> {
    let c: ProbeConfig = resolve(args.common.config.as_deref(), args)?;
    let m = propagator(c.t, c.r)?;
    print(&format!(
        "t,r,k00,k01,k10,k11,underflow\n{:e},{:e},{:e},{:e},{:e},{:e},{}",
        c.t, c.r, m.k00, m.k01, m.k10, m.k11, m.underflow
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Exponents(a) => exponents(a),
        Command::LinearDecay(a) => decay(a, false),
        Command::Diffusion(a) => decay(a, true),
        Command::Evolve(a) => evolve(a),
        Command::Lifespan(a) => lifespan(a),
        Command::PhaseDiagram(a) => phase(a),
        Command::Testfn(a) => testfn(a),
        Command::Probe(a) => probe(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Domain(_) | Error::Contract(_) => 2,
                _ => 1,
            })
        }
    }
}
