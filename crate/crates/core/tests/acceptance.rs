//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::time::Instant;

use gsee_core::bounds::{default_grid, run_grid, Kind};
use gsee_core::gaussian::{continuous_moment, round_half_even};
use gsee_core::gsee::{count_failures, moment_from_basket, GseeRunner, QpeRunner, RoundContext};
use gsee_core::planner::{
    corollary_m, corollary_m0, corollary_query_bound, gsee_rounds, m0_from_ln, plan_gsee, plan_qpe_baseline,
    plan_sampling_round, qpe_coefficient, PlanInputs,
};
use gsee_core::report::{binomial_band, write_estimates, write_plans, EstimateRow};
use gsee_core::seed::{rng, STREAM_GSEE, STREAM_QPE, STREAM_ROUND};
use gsee_core::sim::{mixed_distribution, Ancilla, Circuit, SpectrumSpec};
use gsee_core::Exec;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn acceptance_spectrum() -> SpectrumSpec {
    SpectrumSpec::new(vec![-0.2, -0.05, 0.15], vec![0.5, 0.3, 0.2]).unwrap()
}

fn acceptance_inputs(alpha: f64) -> PlanInputs {
    PlanInputs::new(0.1, 0.5, 0.1, 0.01, alpha)
}

fn c1_constants() -> Outcome {
    let mut bad = Vec::new();
    let qpe = qpe_coefficient();
    if (qpe - 11.656_854_249_492_38).abs() > 1e-12 || format!("{qpe:.3}") != "11.657" {
        bad.push(format!("qpe coefficient {qpe}"));
    }
    // 16/(3 eta) ln(3/delta) at eta = 1: 16/3 ln 30 = 18.14, 16/3 ln 300 = 30.42
    let m0s = (m0_from_ln(1.0, 10f64.ln()), m0_from_ln(1.0, 100f64.ln()));
    if m0s != (19, 31) {
        bad.push(format!("full-depth M0 {m0s:?}"));
    }
    // hand-derived: 8 D^2 / (9 eps^2 (1-c)^2) = 100 at the acceptance point, 100 ln 40 = 368.89
    let m = gsee_rounds(0.1, 0.01, acceptance_inputs(0.0).c, 0.1);
    if m != 369 {
        bad.push(format!("M {m}"));
    }
    for (alpha, want_m, want_m0) in [(0.0, 369, 115), (1.0, 4, 66)] {
        let inp = acceptance_inputs(alpha);
        let (cm, cm0) = (corollary_m(&inp), corollary_m0(&inp));
        if (cm, cm0) != (want_m, want_m0) {
            bad.push(format!("alpha {alpha}: (M, M0) = ({cm}, {cm0})"));
        }
        let plan = plan_gsee(&inp).map_err(|e| e.to_string())?;
        if plan.big_m != want_m || plan.m0_nominal != want_m0 {
            bad.push(format!(
                "alpha {alpha}: planned (M, M0_nominal) = ({}, {})",
                plan.big_m, plan.m0_nominal
            ));
        }
    }
    ensure(
        bad.is_empty(),
        if bad.is_empty() {
            format!("qpe {qpe:.12}, 16/3 M0 (19, 31), M = 369, (M, M0) = (369, 115) / (4, 66)")
        } else {
            bad.join("; ")
        },
    )
}

fn c2_distribution() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for q in [8u32, 12, 16] {
        let n = 1usize << q;
        let nf = n as f64;
        for sigma in [1.5, 4.0] {
            let c = Circuit::new(q, Ancilla::Gaussian { sigma_bins: sigma }).map_err(|e| e.to_string())?;
            for theta in [0.0, 17.0 / nf, 0.123_456_789, -0.31 + 0.5 / nf, 0.45 + 0.3 / nf] {
                let p = c.distribution(theta).map_err(|e| e.to_string())?;
                worst.0 = worst.0.max((p.iter().sum::<f64>() - 1.0).abs());
                let shifted = c.distribution(theta + 3.0 / nf).map_err(|e| e.to_string())?;
                let refl = c.distribution(-theta).map_err(|e| e.to_string())?;
                for z in 0..n {
                    worst.1 = worst.1.max((shifted[(z + 3) % n] - p[z]).abs());
                    worst.2 = worst.2.max((refl[(n - z) % n] - p[z]).abs());
                }
            }
        }
    }
    ensure(
        worst.0 <= 1e-10 && worst.1 <= 1e-12 && worst.2 <= 1e-12,
        format!(
            "max |sum-1| {:.2e}, shift {:.2e}, reflection {:.2e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn c3_bounds() -> Outcome {
    let report = run_grid(&default_grid(), Exec::default());
    let tally = report.tally();
    let missing: Vec<&str> = Kind::ALL
        .iter()
        .map(|k| k.name())
        .filter(|k| !tally.contains_key(k))
        .collect();
    let fails = report.failures().len();
    ensure(
        report.cases.len() >= 300 && missing.is_empty() && fails == 0,
        format!(
            "{} cases ({} applicable), {} kinds, {fails} violations, missing kinds {missing:?}",
            report.cases.len(),
            report.applicable(),
            tally.len()
        ),
    )
}

fn c4_hit_rate() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for eta in [0.25, 0.5, 1.0] {
        let inputs = PlanInputs::new(0.1, eta, 0.1, 0.01, 0.0);
        let plan = plan_gsee(&inputs).map_err(|e| e.to_string())?;
        let nf = plan.grid();
        let c = Circuit::for_plan(&plan).map_err(|e| e.to_string())?;
        for theta0 in [-0.2, -0.2 + 0.37 / nf, -0.2 + 0.5 / nf, 0.1 + 0.25 / nf] {
            // worst case: all excited weight at the edge of the gap
            let spec = SpectrumSpec::two_state(theta0, eta, plan.gap_work).map_err(|e| e.to_string())?;
            let dist = c.mixed(&spec, Exec::Sequential).map_err(|e| e.to_string())?;
            let z0 = round_half_even(nf * theta0) as i64;
            let hit = dist.mass_signed(z0 - plan.k, z0 + plan.k);
            worst = worst.min(hit / (0.375 * eta) - 1.0);
            checked += 1;
        }
    }
    ensure(
        worst >= 0.0,
        format!("{checked} spectra, min relative margin over (3/8) eta: {worst:.4}"),
    )
}

fn c5_end_to_end() -> Outcome {
    let spec = acceptance_spectrum();
    let inputs = acceptance_inputs(0.0);
    let runner = GseeRunner::new(&spec, &inputs, Exec::Sequential).map_err(|e| e.to_string())?;
    let runs = 200;
    let fails = count_failures(runs, 20_240_601, STREAM_GSEE, Exec::default(), |seed| {
        Ok((runner.run(seed)?.mu_hat + 0.2).abs() > inputs.epsilon)
    })
    .map_err(|e| e.to_string())?;
    let rate = fails as f64 / runs as f64;
    let limit = 0.1 + binomial_band(0.1, runs as u64);
    ensure(
        rate <= limit,
        format!(
            "{fails}/{runs} failures, rate {rate:.3} <= {limit:.3} (M = {}, M0 = {}, q = {})",
            runner.plan.big_m, runner.plan.m0, runner.plan.q
        ),
    )
}

fn c6_alpha_sweep() -> Outcome {
    let mut rows = Vec::new();
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let inp = acceptance_inputs(alpha);
        let plan = plan_gsee(&inp).map_err(|e| e.to_string())?;
        let bound = corollary_query_bound(inp.eta, plan.gap_work, inp.epsilon, plan.m0, plan.ln_inv_delta_work)
            .map_err(|e| e.to_string())?;
        rows.push((alpha, plan.grid(), plan.big_m * plan.m0, bound));
    }
    let mut bad = Vec::new();
    for w in rows.windows(2) {
        if w[1].1 < w[0].1 {
            bad.push(format!("2^q drops from alpha {} to {}", w[0].0, w[1].0));
        }
        if w[1].2 > w[0].2 {
            bad.push(format!("M M0 grows from alpha {} to {}", w[0].0, w[1].0));
        }
    }
    for r in &rows {
        if r.1 > r.3 {
            bad.push(format!("alpha {}: 2^q = {} > bound {:.1}", r.0, r.1, r.3));
        }
    }
    let table: Vec<String> = rows.iter().map(|r| format!("{}:{}/{}", r.0, r.1, r.2)).collect();
    ensure(
        bad.is_empty(),
        if bad.is_empty() {
            format!("alpha:2^q/M*M0 {}", table.join(" "))
        } else {
            bad.join("; ")
        },
    )
}

fn c7_qpe() -> Outcome {
    let (eps, delta) = (0.01, 0.01);
    let base = plan_qpe_baseline(eps, delta).map_err(|e| e.to_string())?;
    let nf = (base.q_qpe as f64).exp2();
    let theta = (-25.0 + 0.5) / nf;
    let runner = QpeRunner::new(&SpectrumSpec::eigenstate(theta).map_err(|e| e.to_string())?, eps, delta)
        .map_err(|e| e.to_string())?;
    let single = runner.success_mass();
    let floor = 1.0 - 1.0 / (2.0 * 2f64.sqrt());
    let trials = 2000;
    let fails = count_failures(trials, 7, STREAM_QPE, Exec::default(), |seed| {
        let d = (runner.run(seed).mu_hat - theta).rem_euclid(1.0);
        Ok(d.min(1.0 - d) > eps)
    })
    .map_err(|e| e.to_string())?;
    let rate = fails as f64 / trials as f64;
    let limit = delta + binomial_band(delta, trials as u64);
    ensure(
        single >= floor && base.n_samples == 54 && rate <= limit,
        format!(
            "single-shot {single:.4} >= {floor:.4}, n = {}, vote failures {fails}/{trials} ({rate:.4} <= {limit:.4})",
            base.n_samples
        ),
    )
}

fn c8_second_moment() -> Outcome {
    let inputs = PlanInputs::new(0.01, 1.0, 0.1, 0.01, 0.0).with_m(2);
    let eps2 = inputs.c * inputs.epsilon.powi(2);
    let plan = plan_sampling_round(&inputs, eps2).map_err(|e| e.to_string())?;
    let theta = 0.123_456_789;
    let spec = SpectrumSpec::eigenstate(theta).map_err(|e| e.to_string())?;
    let dist = mixed_distribution(&spec, &plan, Exec::Sequential).map_err(|e| e.to_string())?;
    let ctx = RoundContext::new(&dist, &plan, Some(theta));
    let rounds = 100_000;
    let vals: Vec<Result<f64, String>> = Exec::default().map(rounds, |r| {
        let mut g = rng(99, &[STREAM_ROUND, r as u64]);
        let b = ctx.run(&mut g).map_err(|e| e.to_string())?;
        moment_from_basket(&b, plan.q, 2)
            .map(|s| s.value)
            .map_err(|e| e.to_string())
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_, _>>()?;
    let mean = vals.iter().sum::<f64>() / rounds as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (rounds as f64 - 1.0);
    let se = (var / rounds as f64).sqrt();
    let n = plan.grid();
    let target = continuous_moment(2, n * theta, plan.sigma_bins).map_err(|e| e.to_string())?;
    let tol = eps2 * n * n + 3.0 * se;
    let dev = (mean - target).abs();
    ensure(
        dev <= tol,
        format!(
            "q = {}, M0 = {}: |mean - (mu^2 + sigma^2)| = {dev:.3e} <= {tol:.3e} (3 SE = {:.3e})",
            plan.q,
            plan.m0,
            3.0 * se
        ),
    )
}

fn c9_determinism() -> Outcome {
    fn artefacts(exec: Exec) -> Result<Vec<u8>, String> {
        let spec = acceptance_spectrum();
        let mut bytes = Vec::new();
        let inputs = acceptance_inputs(0.0);
        let runner = GseeRunner::new(&spec, &inputs, exec).map_err(|e| e.to_string())?;
        let rows: Vec<EstimateRow> = (0..3)
            .map(|i| runner.run(1000 + i).map(|e| EstimateRow::new(i, 0.0, &e, -0.2)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        write_estimates(&mut bytes, &rows).map_err(|e| e.to_string())?;
        write_plans(&mut bytes, &[(0.0, runner.plan.clone())]).map_err(|e| e.to_string())?;
        mixed_distribution(&spec, &runner.plan, exec)
            .and_then(|d| d.write_csv(&mut bytes))
            .map_err(|e| e.to_string())?;
        let mut grid = default_grid();
        grid.etas = vec![0.5];
        grid.gaps = vec![0.1];
        run_grid(&grid, exec).write_csv(&mut bytes).map_err(|e| e.to_string())?;
        let q = QpeRunner::new(&SpectrumSpec::eigenstate(0.3).unwrap(), 0.01, 0.01).map_err(|e| e.to_string())?;
        bytes.extend(format!("{:.16e}", q.run(5).mu_hat).into_bytes());
        Ok(bytes)
    }
    let a = artefacts(Exec::default())?;
    let b = artefacts(Exec::default())?;
    let s = artefacts(Exec::Sequential)?;
    ensure(
        a == b && a == s,
        format!(
            "{} bytes, rerun identical {}, sequential identical {}",
            a.len(),
            a == b,
            a == s
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("formula constants", c1_constants),
        ("distribution correctness", c2_distribution),
        ("bound suite", c3_bounds),
        ("hit rate", c4_hit_rate),
        ("end-to-end GSEE", c5_end_to_end),
        ("depth interpolation", c6_alpha_sweep),
        ("QPE baseline", c7_qpe),
        ("second moment", c8_second_moment),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = f();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("criterion {} {name}: PASS ({secs:.1}s) {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
