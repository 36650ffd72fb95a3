//! `gsee`: plan, simulate, estimate and verify Gaussian-window phase estimation.
//!
//! Exit codes: 0 ok, 1 I/O or schema error, 2 infeasible or rejected plan,
//! 3 bound violation (bounds mode).

mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use gsee_core::bounds::{default_grid, run_grid};
use gsee_core::exec::with_threads;
use gsee_core::gsee::{GseeRunner, QpeRunner};
use gsee_core::planner::{plan_gsee, PlanInputs};
use gsee_core::report::{write_estimates, write_json, write_plans, EstimateRow, FailureSummary};
use gsee_core::seed::{derive_seed, STREAM_GSEE, STREAM_QPE};
use gsee_core::sim::{Circuit, SpectrumSpec};
use gsee_core::{Error, Exec, Result};
use serde::Serialize;

use config::{load, ExperimentConfig, Mode, Resolved};

#[derive(Debug, Parser)]
#[command(name = "gsee", about = "Gaussian-window ground-state energy estimation harness")]
struct Cli {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Independent runs
    #[arg(long)]
    runs: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated alpha values
    #[arg(long, value_delimiter = ',')]
    alpha_list: Option<Vec<f64>>,
    /// Worker threads, 0 = all cores
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PlanInput(_) | Error::PlanInfeasible { .. } | Error::Mismatch(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gsee: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn resolve(cli: &Cli) -> Result<Resolved> {
    let (cfg, base) = match &cli.config {
        Some(p) => load(p)?,
        None => (ExperimentConfig::default(), PathBuf::new()),
    };
    let mode = cli
        .mode
        .or(cfg.mode)
        .ok_or_else(|| Error::Invalid("no mode given".into()))?;
    let spectrum = cfg.spectrum(&base)?;
    let runs = cli.runs.or(cfg.runs).unwrap_or(1);
    if runs == 0 {
        return Err(Error::Invalid("run count must be >= 1".into()));
    }
    let alpha_list = cli
        .alpha_list
        .clone()
        .or(cfg.alpha_list.clone())
        .unwrap_or_else(|| cfg.inputs.as_ref().map(|i| vec![i.alpha]).unwrap_or_default());
    if mode == Mode::Sweep && alpha_list.is_empty() {
        return Err(Error::Invalid("sweep mode needs a non-empty alpha list".into()));
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|o| base.join(o)))
        .ok_or_else(|| Error::Invalid("no output directory given".into()))?;
    Ok(Resolved {
        mode,
        spectrum,
        inputs: cfg.inputs.clone(),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        runs,
        alpha_list,
        out,
        threads: cli.threads.or(cfg.threads).unwrap_or(0),
        bounds: cfg.bounds.clone(),
    })
}

fn run(cli: Cli) -> Result<u8> {
    let r = resolve(&cli)?;
    std::fs::create_dir_all(&r.out)?;
    write_json(&r.out.join("config-echo.json"), &r)?;
    with_threads(r.threads, || dispatch(&r))
}

fn dispatch(r: &Resolved) -> Result<u8> {
    let exec = Exec::default();
    match r.mode {
        Mode::Plan => cmd_plan(r),
        Mode::Spectrum => cmd_spectrum(r, exec),
        Mode::Gsee => cmd_gsee(r, exec),
        Mode::Qpe => cmd_qpe(r, exec),
        Mode::Bounds => cmd_bounds(r, exec),
        Mode::Sweep => cmd_sweep(r, exec),
    }
}

fn need_inputs(r: &Resolved) -> Result<PlanInputs> {
    r.inputs
        .clone()
        .ok_or_else(|| Error::Invalid("config has no `inputs` block".into()))
}

fn need_spectrum(r: &Resolved) -> Result<&SpectrumSpec> {
    r.spectrum
        .as_ref()
        .ok_or_else(|| Error::Invalid("config has no spectrum source".into()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_plan(r: &Resolved) -> Result<u8> {
    let base = need_inputs(r)?;
    let mut plans = Vec::new();
    let alphas = if r.alpha_list.is_empty() {
        vec![base.alpha]
    } else {
        r.alpha_list.clone()
    };
    for &alpha in &alphas {
        let inputs = PlanInputs { alpha, ..base.clone() };
        plans.push((alpha, plan_gsee(&inputs)?));
    }
    write_plans(create(&r.out, "plans.csv")?, &plans)?;
    let first = &plans[0].1;
    std::fs::write(r.out.join("plan.kv"), first.to_kv())?;
    write_json(&r.out.join("plan.json"), first)?;
    Ok(0)
}

fn cmd_spectrum(r: &Resolved, exec: Exec) -> Result<u8> {
    let inputs = need_inputs(r)?;
    let spec = need_spectrum(r)?;
    let plan = plan_gsee(&inputs)?;
    spec.check_against(plan.gap_work)?;
    let dist = Circuit::for_plan(&plan)?.mixed(spec, exec)?;
    dist.write_csv(create(&r.out, "distribution.csv")?)?;
    write_plans(create(&r.out, "plans.csv")?, &[(inputs.alpha, plan.clone())])?;
    std::fs::write(r.out.join("plan.kv"), plan.to_kv())?;
    Ok(0)
}

#[derive(Serialize)]
struct AlphaSummary {
    alpha: f64,
    q: u32,
    big_m: u64,
    m0: u64,
    epsilon: f64,
    ground_energy: f64,
    mean_abs_err: f64,
    dark_rounds: u64,
    #[serde(flatten)]
    failures: FailureSummary,
}

fn gsee_runs(
    r: &Resolved,
    inputs: &PlanInputs,
    exec: Exec,
) -> Result<(Vec<EstimateRow>, AlphaSummary, gsee_core::planner::PlanParams)> {
    let spec = need_spectrum(r)?;
    let runner = GseeRunner::new(spec, inputs, exec)?;
    let truth = spec.ground_energy();
    let results = exec.map(r.runs as usize, |i| {
        runner.run(derive_seed(r.seed, &[STREAM_GSEE, i as u64]))
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut dark = 0;
    for (i, est) in results.into_iter().enumerate() {
        let est = est?;
        dark += est.diagnostics.dark_rounds;
        rows.push(EstimateRow::new(i as u64, inputs.alpha, &est, truth));
    }
    let fails = rows.iter().filter(|e| e.err.abs() > inputs.epsilon).count() as u64;
    let summary = AlphaSummary {
        alpha: inputs.alpha,
        q: runner.plan.q,
        big_m: runner.plan.big_m,
        m0: runner.plan.m0,
        epsilon: inputs.epsilon,
        ground_energy: truth,
        mean_abs_err: rows.iter().map(|e| e.err.abs()).sum::<f64>() / rows.len() as f64,
        dark_rounds: dark,
        failures: FailureSummary::new(fails, r.runs, inputs.delta_fail),
    };
    Ok((rows, summary, runner.plan))
}

fn cmd_gsee(r: &Resolved, exec: Exec) -> Result<u8> {
    let inputs = need_inputs(r)?;
    let (rows, summary, plan) = gsee_runs(r, &inputs, exec)?;
    write_estimates(create(&r.out, "estimates.csv")?, &rows)?;
    write_plans(create(&r.out, "plans.csv")?, &[(inputs.alpha, plan)])?;
    write_json(&r.out.join("summary.json"), &summary)?;
    Ok(0)
}

fn cmd_sweep(r: &Resolved, exec: Exec) -> Result<u8> {
    let base = need_inputs(r)?;
    let mut rows = Vec::new();
    let mut plans = Vec::new();
    let mut summaries = Vec::new();
    for &alpha in &r.alpha_list {
        let inputs = PlanInputs { alpha, ..base.clone() };
        let (mut rr, s, plan) = gsee_runs(r, &inputs, exec)?;
        rows.append(&mut rr);
        plans.push((alpha, plan));
        summaries.push(s);
    }
    write_estimates(create(&r.out, "estimates.csv")?, &rows)?;
    write_plans(create(&r.out, "plans.csv")?, &plans)?;
    write_json(&r.out.join("summary.json"), &summaries)?;
    Ok(0)
}

#[derive(Serialize)]
struct QpeSummary {
    q: u32,
    n_samples: u64,
    epsilon: f64,
    ground_energy: f64,
    single_shot_success: f64,
    #[serde(flatten)]
    failures: FailureSummary,
}

fn cmd_qpe(r: &Resolved, exec: Exec) -> Result<u8> {
    let inputs = need_inputs(r)?;
    let spec = need_spectrum(r)?;
    let runner = QpeRunner::new(spec, inputs.epsilon, inputs.delta_fail)?;
    let truth = spec.ground_energy();
    let ests = exec.map(r.runs as usize, |i| {
        runner.run(derive_seed(r.seed, &[STREAM_QPE, i as u64]))
    });
    let rows: Vec<EstimateRow> = ests
        .iter()
        .enumerate()
        .map(|(i, e)| EstimateRow::new(i as u64, inputs.alpha, e, truth))
        .collect();
    let fails = rows.iter().filter(|e| e.err.abs() > inputs.epsilon).count() as u64;
    write_estimates(create(&r.out, "estimates.csv")?, &rows)?;
    write_json(
        &r.out.join("summary.json"),
        &QpeSummary {
            q: runner.baseline.q_qpe,
            n_samples: runner.baseline.n_samples,
            epsilon: inputs.epsilon,
            ground_energy: truth,
            single_shot_success: runner.success_mass(),
            failures: FailureSummary::new(fails, r.runs, inputs.delta_fail),
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct BoundsSummary {
    grid: String,
    cases: usize,
    applicable: usize,
    failures: usize,
    skipped: Vec<String>,
}

fn cmd_bounds(r: &Resolved, exec: Exec) -> Result<u8> {
    let grid = r.bounds.clone().unwrap_or_else(default_grid);
    let report = run_grid(&grid, exec);
    report.write_csv(create(&r.out, "bounds.csv")?)?;
    std::fs::write(r.out.join("bounds-summary.txt"), report.summary())?;
    let failures = report.failures().len();
    write_json(
        &r.out.join("summary.json"),
        &BoundsSummary {
            grid: report.grid.clone(),
            cases: report.cases.len(),
            applicable: report.applicable(),
            failures,
            skipped: report.skipped.clone(),
        },
    )?;
    print!("{}", report.summary());
    Ok(if failures > 0 { 3 } else { 0 })
}
