//! CSV/JSON emission and the binomial band used by the Monte-Carlo checks.
//!
//! Reals are written with `{:.16e}` (17 significant digits), which
//! round-trips every f64.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gsee::EnergyEstimate;
use crate::planner::PlanParams;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// z for a two-sided 95% normal band.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Half-width z sqrt(p(1-p)/n) of the normal band around a nominal rate p.
pub fn binomial_band(p: f64, n: u64) -> f64 {
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Wilson 95% interval for k successes out of n.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    let n_f = n as f64;
    let ph = k as f64 / n_f;
    let z2 = Z95 * Z95;
    let centre = (ph + z2 / (2.0 * n_f)) / (1.0 + z2 / n_f);
    let half = Z95 * (ph * (1.0 - ph) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / (1.0 + z2 / n_f);
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureSummary {
    pub runs: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub delta: f64,
    /// z sqrt(delta (1 - delta)/runs)
    pub band: f64,
    pub wilson_95: (f64, f64),
    /// failure_rate <= delta + band
    pub within_budget: bool,
}

impl FailureSummary {
    pub fn new(failures: u64, runs: u64, delta: f64) -> Self {
        let failure_rate = failures as f64 / runs as f64;
        let band = binomial_band(delta, runs);
        Self {
            runs,
            failures,
            failure_rate,
            delta,
            band,
            wilson_95: wilson_interval(failures, runs),
            within_budget: failure_rate <= delta + band,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub run_id: u64,
    pub alpha: f64,
    pub q: u32,
    pub big_m: u64,
    pub m0: u64,
    pub mu_hat: f64,
    pub err: f64,
    pub n_dark: u64,
    pub n_left: u64,
}

impl EstimateRow {
    pub fn new(run_id: u64, alpha: f64, est: &EnergyEstimate, truth: f64) -> Self {
        Self {
            run_id,
            alpha,
            q: est.q,
            big_m: est.m_used,
            m0: est.m0,
            mu_hat: est.mu_hat,
            err: est.mu_hat - truth,
            n_dark: est.diagnostics.n_dark,
            n_left: est.diagnostics.n_left,
        }
    }
}

pub const ESTIMATE_HEADER: [&str; 9] = ["run_id", "alpha", "q", "M", "M0", "mu_hat", "err", "n_dark", "n_left"];

pub fn write_estimates<W: Write>(w: W, rows: &[EstimateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ESTIMATE_HEADER)?;
    for r in rows {
        out.write_record([
            r.run_id.to_string(),
            fmt_f64(r.alpha),
            r.q.to_string(),
            r.big_m.to_string(),
            r.m0.to_string(),
            fmt_f64(r.mu_hat),
            fmt_f64(r.err),
            r.n_dark.to_string(),
            r.n_left.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub const PLAN_HEADER: [&str; 18] = [
    "alpha",
    "policy",
    "Delta_initial",
    "Delta_work",
    "ln_inv_delta_nominal",
    "ln_inv_delta_work",
    "M0_nominal",
    "M0",
    "L",
    "u",
    "sigma_tilde",
    "sigma_bins",
    "q",
    "K",
    "M",
    "delta1_tilde",
    "eps_target",
    "all_predicates",
];

pub fn write_plans<W: Write>(w: W, plans: &[(f64, PlanParams)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PLAN_HEADER)?;
    for (alpha, p) in plans {
        out.write_record([
            fmt_f64(*alpha),
            format!("{:?}", p.policy).to_lowercase(),
            fmt_f64(p.gap_initial),
            fmt_f64(p.gap_work),
            fmt_f64(p.ln_inv_delta_nominal),
            fmt_f64(p.ln_inv_delta_work),
            p.m0_nominal.to_string(),
            p.m0.to_string(),
            fmt_f64(p.l_log),
            fmt_f64(p.u),
            fmt_f64(p.sigma_tilde),
            fmt_f64(p.sigma_bins),
            p.q.to_string(),
            p.k.to_string(),
            p.big_m.to_string(),
            fmt_f64(p.delta1_tilde),
            fmt_f64(p.eps_target),
            p.all_flags().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_and_wilson() {
        assert!((binomial_band(0.1, 200) - Z95 * (0.09f64 / 200.0).sqrt()).abs() < 1e-15);
        let (lo, hi) = wilson_interval(0, 200);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.02);
        let (lo, hi) = wilson_interval(20, 200);
        assert!(lo < 0.1 && hi > 0.1);
    }

    #[test]
    fn summary_flag() {
        assert!(FailureSummary::new(24, 200, 0.1).within_budget);
        assert!(!FailureSummary::new(40, 200, 0.1).within_budget);
    }

    #[test]
    fn float_format_roundtrips() {
        for &x in &[0.1, -1.0 / 3.0, 1e-300, 6.02e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
