use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::checks::*;
use super::{BoundCase, BoundReport, Point};
use crate::exec::Exec;
use crate::planner::{plan_sampling_round, DepthRatioPolicy, PlanInputs, PlanParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub etas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub gaps: Vec<f64>,
    pub ms: Vec<u32>,
    pub policies: Vec<DepthRatioPolicy>,
    /// Include the small-sigma / small-K stress set.
    pub stress: bool,
    pub seed: u64,
}

pub fn default_grid() -> GridSpec {
    GridSpec {
        etas: vec![0.25, 0.5, 1.0],
        deltas: vec![0.01, 0.001],
        gaps: vec![0.05, 0.1, 0.2],
        ms: vec![1, 2],
        policies: vec![DepthRatioPolicy::Enforce, DepthRatioPolicy::Report],
        stress: true,
        seed: 20_240_601,
    }
}

impl GridSpec {
    pub fn describe(&self) -> String {
        format!(
            "eta {:?} x delta {:?} x Delta {:?} x m {:?} x policy {:?}; eps = Delta/10, target c eps^m; stress {}",
            self.etas, self.deltas, self.gaps, self.ms, self.policies, self.stress
        )
    }
}

#[derive(Clone, Debug)]
enum Job {
    Plan {
        eta: f64,
        delta: f64,
        gap: f64,
        m: u32,
        policy: DepthRatioPolicy,
    },
    Stress {
        sigma: f64,
        k: i64,
        eta: f64,
        d_mult: f64,
    },
    Disc {
        sigma: f64,
        m: u32,
    },
}

fn plan_point(plan: &PlanParams, label: String) -> Point {
    Point {
        label,
        eta: plan.eta,
        ln_inv_delta: plan.ln_inv_delta_work,
        gap: plan.gap_work,
        m: plan.m,
        q: plan.q,
        sigma: plan.sigma_bins,
        k: plan.k,
        m0: plan.m0,
        mu_tilde: 0.0,
        x0: 0.0,
        d_bins: plan.gap_bins(),
    }
}

fn plan_cases(plan: &PlanParams, label: String, seed: u64) -> Vec<BoundCase> {
    let p = plan_point(plan, label);
    let m = plan.m;
    let n = p.n();
    let mut out = Vec::new();
    out.extend(check_normalization_bounds(&p));
    out.extend(check_tail(&p));
    out.extend(check_contamination(&p));
    let th = [-0.2, -0.2 + 0.37 / n, -0.2 + 0.5 / n];
    out.extend(check_hit_rate(&p, &th, &[1.0, 1.25]));
    out.extend(check_aliasing(&p, m));
    out.extend(check_disc_error(&p, m, 1.0 / (PI * n)));
    out.extend(check_window_moment_bound(&p, m, seed, 2, 1e-3));
    let ok = plan.all_flags();
    for &x0 in &[0.0, (p.k / 2) as f64] {
        for &mu in &[0.0, 0.37, -0.5] {
            let q = Point {
                x0,
                mu_tilde: mu,
                ..p.clone()
            };
            out.extend(check_trunc_polut(&q, m));
            out.extend(check_eps_norm(&q, m));
            let target = (x0 == 0.0).then_some(plan.eps_target);
            out.extend(check_total_eps(&q, m, target, ok));
        }
    }
    out.extend(check_q_requirement(plan, &p));
    for &t in &th[..2] {
        out.extend(check_fail_rate(plan, &p, t));
    }
    out
}

fn stress_cases(sigma: f64, k: i64, eta: f64, d_mult: f64, seed: u64) -> Vec<BoundCase> {
    let q = 8;
    let d = (d_mult * k as f64).max(k as f64 + 1.0);
    let base = Point {
        label: format!("stress sigma={sigma} K={k} D={d}"),
        eta,
        ln_inv_delta: f64::NAN,
        gap: d / 256.0,
        m: 1,
        q,
        sigma,
        k,
        m0: 0,
        mu_tilde: 0.0,
        x0: 0.0,
        d_bins: d,
    };
    let mut out = Vec::new();
    for &mu in &[-0.5, -0.25, 0.0, 0.25] {
        let p = base.with_mu(mu);
        out.extend(
            check_normalization_bounds(&p)
                .into_iter()
                .filter(|c| c.variant == "at_mu"),
        );
        out.extend(check_tail(&p).into_iter().filter(|c| c.variant == "at_mu"));
    }
    out.extend(
        check_normalization_bounds(&base)
            .into_iter()
            .filter(|c| c.variant == "sup_mu"),
    );
    out.extend(check_tail(&base).into_iter().filter(|c| c.variant == "sup_mu"));
    out.extend(check_contamination(&base));
    out.extend(check_hit_rate(&base, &[-0.2, -0.2 + 0.37 / 256.0], &[1.0]));
    out.extend(check_window_moment_bound(
        &base,
        (k % 3) as u32,
        seed ^ k as u64,
        1,
        0.05,
    ));
    for m in 1..=2u32 {
        for &x0 in &[0.0, (k / 2) as f64] {
            let p = Point {
                x0,
                mu_tilde: 0.3,
                ..base.clone()
            };
            out.extend(check_trunc_polut(&p, m));
            out.extend(check_eps_norm(&p, m));
            out.extend(check_total_eps(&p, m, None, false));
        }
    }
    out
}

fn disc_cases(sigma: f64, m: u32) -> Vec<BoundCase> {
    let mut out = Vec::new();
    for &mu in &[0.0, 0.3, 7.6, -40.2] {
        let p = Point {
            label: format!("disc sigma={sigma} mu={mu}"),
            eta: 1.0,
            ln_inv_delta: f64::NAN,
            gap: f64::NAN,
            m,
            q: 8,
            sigma,
            k: 0,
            m0: 0,
            mu_tilde: mu,
            x0: 0.0,
            d_bins: 0.0,
        };
        out.extend(check_aliasing(&p, m));
        for &d1 in &[1.0 / (PI * 256.0), 0.01, 0.05, 0.1, 0.2, 0.4] {
            out.extend(check_disc_error(&p, m, d1));
        }
    }
    out
}

/// Evaluates every case of the grid; jobs run through `exec` and are
/// assembled in job order.
pub fn run_grid(spec: &GridSpec, exec: Exec) -> BoundReport {
    let mut jobs = Vec::new();
    for &eta in &spec.etas {
        for &delta in &spec.deltas {
            for &gap in &spec.gaps {
                for &m in &spec.ms {
                    for &policy in &spec.policies {
                        jobs.push(Job::Plan {
                            eta,
                            delta,
                            gap,
                            m,
                            policy,
                        });
                    }
                }
            }
        }
    }
    if spec.stress {
        for &sigma in &[0.3, 0.5, 1.0, 2.0, 3.0, 5.0] {
            for &k in &[1i64, 2, 4, 8, 16, 32] {
                for &eta in &[0.25, 1.0] {
                    for &d_mult in &[1.0, 2.0, 3.0] {
                        jobs.push(Job::Stress { sigma, k, eta, d_mult });
                    }
                }
            }
        }
        for &sigma in &[0.3, 0.4, 0.6, 1.0, 2.0, 4.0] {
            for m in 0..=4 {
                jobs.push(Job::Disc { sigma, m });
            }
        }
    }
    let seed = spec.seed;
    let results: Vec<(Vec<BoundCase>, Option<String>)> = exec.map(jobs.len(), |i| match jobs[i] {
        Job::Plan {
            eta,
            delta,
            gap,
            m,
            policy,
        } => {
            let eps = gap / 10.0;
            let inputs = PlanInputs::new(delta, eta, gap, eps, 0.0).with_m(m).with_policy(policy);
            let label = format!("plan eta={eta} delta={delta} Delta={gap} m={m} {policy:?}");
            match plan_sampling_round(&inputs, inputs.c * eps.powi(m as i32)) {
                Ok(plan) => (plan_cases(&plan, label, seed ^ i as u64), None),
                Err(e) => (vec![], Some(format!("{label}: {e}"))),
            }
        }
        Job::Stress { sigma, k, eta, d_mult } => (stress_cases(sigma, k, eta, d_mult, seed), None),
        Job::Disc { sigma, m } => (disc_cases(sigma, m), None),
    });
    let mut report = BoundReport {
        grid: spec.describe(),
        ..Default::default()
    };
    for (cases, skipped) in results {
        report.cases.extend(cases);
        report.skipped.extend(skipped);
    }
    report
}
