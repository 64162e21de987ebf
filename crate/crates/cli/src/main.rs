use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use d2dcov::montecarlo::{sample_realization, trial_rng};
use d2dcov::sweep::{
    parse_bound, parse_config, parse_mode, preset_figure, run_sweep, write_csv, write_csv_to,
    McSettings, RowStatus, PRESET_NAMES,
};
use d2dcov::{ScenarioParams, SweepSpec};

/// Coverage of a cellular user under a thinned, Zipf-marked D2D interference field.
///
/// Evaluates the digamma/polygamma coverage bounds (and optionally the Monte
/// Carlo oracle and the D2D rate) over a parameter sweep and writes CSV.
#[derive(Debug, Parser)]
#[command(name = "d2dcov", version)]
struct Args {
    /// Scenario file of `key = value` lines.
    #[arg(long, conflicts_with = "figure")]
    config: Option<PathBuf>,

    /// Built-in figure preset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    figure: Option<String>,

    /// Sweep `var=start:stop:steps[:log]` or `var=v1,v2,...`.
    #[arg(long)]
    sweep: Option<String>,

    /// Bound to evaluate: ub, lb or general. Repeatable.
    #[arg(long = "bound", value_parser = ["ub", "lb", "general"])]
    bounds: Vec<String>,

    /// Monte Carlo trials per point (at least 100).
    #[arg(long)]
    mc_trials: Option<u64>,

    /// Thinning rule for the Monte Carlo runs.
    #[arg(long, value_parser = ["independent", "nearest"])]
    mc_mode: Option<String>,

    /// Master seed for the Monte Carlo runs.
    #[arg(long)]
    seed: Option<u64>,

    /// Output CSV; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Relative tolerance of the inner quadrature.
    #[arg(long)]
    quad_rtol: Option<f64>,

    /// Also write one realization of the base scenario as CSV.
    #[arg(long, value_name = "PATH")]
    dump_realization: Option<PathBuf>,
}

fn load(args: &Args) -> Result<(ScenarioParams, SweepSpec)> {
    let (params, mut spec) = if let Some(path) = &args.config {
        let cfg = parse_config(path)?;
        (cfg.params, cfg.spec)
    } else if let Some(name) = &args.figure {
        preset_figure(name)?
    } else {
        (ScenarioParams::baseline(), SweepSpec::default())
    };

    if let Some(text) = &args.sweep {
        let (var, values) = SweepSpec::parse_assignment(text).context("--sweep")?;
        spec.variable = Some(var);
        spec.values = values;
    }
    if !args.bounds.is_empty() {
        spec.bounds = args
            .bounds
            .iter()
            .map(|b| parse_bound(b))
            .collect::<d2dcov::Result<_>>()?;
    }
    if let Some(rtol) = args.quad_rtol {
        spec.quad = spec.quad.with_rel_tol(rtol);
        spec.quad.check().context("--quad-rtol")?;
    }
    let mc_flags = args.mc_mode.is_some() || args.seed.is_some();
    match (args.mc_trials, spec.mc.as_mut()) {
        (Some(trials), Some(mc)) => mc.trials = trials,
        (Some(trials), None) => {
            spec.mc = Some(McSettings {
                trials,
                seed: 0,
                mode: Default::default(),
            })
        }
        (None, None) if mc_flags && args.dump_realization.is_none() => {
            bail!("--seed/--mc-mode need --mc-trials or an mc_trials config key")
        }
        _ => {}
    }
    if let Some(mc) = spec.mc.as_mut() {
        if let Some(seed) = args.seed {
            mc.seed = seed;
        }
        if let Some(mode) = &args.mc_mode {
            mc.mode = parse_mode(mode)?;
        }
    }
    Ok((params, spec))
}

fn dump_realization(
    args: &Args,
    params: &ScenarioParams,
    spec: &SweepSpec,
    path: &PathBuf,
) -> Result<()> {
    let seed = args.seed.or(spec.mc.map(|m| m.seed)).unwrap_or(0);
    let mode = match &args.mc_mode {
        Some(m) => parse_mode(m)?,
        None => spec.mc.map(|m| m.mode).unwrap_or_default(),
    };
    let real = sample_realization(params, mode, &mut trial_rng(seed, 0));
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    real.write_csv(BufWriter::new(file))
        .with_context(|| format!("writing {}", path.display()))
}

fn run(args: &Args) -> Result<bool> {
    let (params, spec) = load(args)?;
    if let Some(path) = &args.dump_realization {
        dump_realization(args, &params, &spec, path)?;
    }
    let result = run_sweep(&params, &spec)?;
    match &args.out {
        Some(path) => write_csv(&result, path)?,
        None => write_csv_to(&result, io::stdout().lock()).context("writing CSV to stdout")?,
    }
    for row in &result.rows {
        if let RowStatus::Failed(msg) = &row.status {
            let value = row.value.map(|v| v.to_string()).unwrap_or_default();
            eprintln!("row {} = {value} failed: {msg}", row.sweep_var);
        }
    }
    Ok(result.failed_rows() == 0)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
