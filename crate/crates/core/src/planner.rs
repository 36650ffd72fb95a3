//! Run-parameter derivation for the sample-and-trim round and the Gaussian
//! GSEE estimator, plus the majority-vote QPE baseline counts.
//!
//! All logarithms are natural. Widths are relative (turns) unless the name
//! says `bins`. The failure budget is carried as `ln(1/delta)` because the
//! depth-ratio predicate can push delta far below the f64 range.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{alias_signed, factorial, moment_sum, sup_over_mu_tilde, tail_sum};

pub const PRED_ALIAS: &str = "alias_le_1/8";
pub const PRED_TAIL: &str = "tail_le_1/8";
pub const PRED_CONTAM: &str = "contamination_over_sqrt_eta_le_1/8";
pub const PRED_LAMBERT: &str = "lambert_argument_gt_e";
pub const PRED_RATIO: &str = "depth_ratio_ge_2";
pub const PRED_GRID: &str = "inv_grid_le_gap_over_6";
pub const PRED_WINDOW: &str = "window_k_ge_1";

/// c = 1 - 2 sqrt(2)/3, for which (1 - c)^2 = 8/9.
pub fn default_c() -> f64 {
    1.0 - 2.0 * 2f64.sqrt() / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DepthRatioPolicy {
    /// Shrink delta until sqrt(L)/sqrt(1+3u) >= 2 holds.
    #[default]
    Enforce,
    /// Keep the nominal delta and record the predicate value.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanInputs {
    pub delta_fail: f64,
    pub eta: f64,
    pub delta_true: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub m: u32,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub policy: DepthRatioPolicy,
}

fn one() -> u32 {
    1
}

impl PlanInputs {
    pub fn new(delta_fail: f64, eta: f64, delta_true: f64, epsilon: f64, alpha: f64) -> Self {
        Self {
            delta_fail,
            eta,
            delta_true,
            epsilon,
            alpha,
            m: 1,
            c: default_c(),
            policy: DepthRatioPolicy::Enforce,
        }
    }

    pub fn with_policy(mut self, policy: DepthRatioPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_m(mut self, m: u32) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::PlanInput(msg));
        if !(self.delta_fail > 0.0 && self.delta_fail < 1.0) {
            return bad(format!("delta_fail must be in (0, 1), got {}", self.delta_fail));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta must be in (0, 1], got {}", self.eta));
        }
        if !(self.delta_true > 0.0 && self.delta_true < 1.0) {
            return bad(format!("Delta_true must be in (0, 1), got {}", self.delta_true));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.epsilon >= self.delta_true {
            return bad(format!(
                "epsilon ({}) must be smaller than Delta_true ({})",
                self.epsilon, self.delta_true
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if !(1..=4).contains(&self.m) {
            return bad(format!("moment order must be in 1..=4, got {}", self.m));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("c must be in (0, 1), got {}", self.c));
        }
        Ok(())
    }

    /// Delta = Delta_true^(1-alpha) eps^alpha.
    pub fn gap_initial(&self) -> f64 {
        self.delta_true.powf(1.0 - self.alpha) * self.epsilon.powf(self.alpha)
    }
}

/// One pass of the shrink loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanIteration {
    pub gap: f64,
    pub ln_inv_delta: f64,
    pub m0: u64,
    pub sigma_tilde: f64,
    pub q: u32,
    pub k: i64,
    pub alias: f64,
    pub tail: f64,
    pub contamination_over_sqrt_eta: f64,
    pub lambert_log_margin: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub m: u32,
    pub eta: f64,
    pub policy: DepthRatioPolicy,
    pub gap_initial: f64,
    pub gap_work: f64,
    pub ln_inv_delta_nominal: f64,
    pub ln_inv_delta_work: f64,
    /// exp(-ln_inv_delta_work); may underflow to 0.
    pub delta_work: f64,
    pub m0_nominal: u64,
    pub m0: u64,
    /// L = ln((4 M0/delta)(1 + sqrt(5/3) sqrt((1-eta)/eta))^2)
    pub l_log: f64,
    pub u: f64,
    pub sigma_tilde: f64,
    pub sigma_bins: f64,
    pub q: u32,
    pub k: i64,
    pub two_k_plus_1: i64,
    /// floor((2/3) 2^q Delta_work)
    pub window_floor: i64,
    pub big_m: u64,
    pub delta1_tilde: f64,
    pub c_eta: f64,
    pub eps_target: f64,
    pub constraint_flags: BTreeMap<String, bool>,
    pub predicate_values: BTreeMap<String, f64>,
    pub iterations: Vec<PlanIteration>,
}

impl PlanParams {
    pub fn grid(&self) -> f64 {
        (self.q as f64).exp2()
    }

    pub fn n(&self) -> usize {
        1usize << self.q
    }

    /// Gap in bins, 2^q Delta_work.
    pub fn gap_bins(&self) -> f64 {
        self.grid() * self.gap_work
    }

    /// floor(Delta_work 2^q / 3), the dark segment above the window.
    pub fn dark_len(&self) -> i64 {
        (self.gap_bins() / 3.0).floor() as i64
    }

    pub fn all_flags(&self) -> bool {
        self.constraint_flags.values().all(|&b| b)
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("m", self.m.to_string());
        kv("eta", fmt(self.eta));
        kv("policy", format!("{:?}", self.policy).to_lowercase());
        kv("Delta_initial", fmt(self.gap_initial));
        kv("Delta_work", fmt(self.gap_work));
        kv("ln_inv_delta_nominal", fmt(self.ln_inv_delta_nominal));
        kv("ln_inv_delta_work", fmt(self.ln_inv_delta_work));
        kv("M0_nominal", self.m0_nominal.to_string());
        kv("M0", self.m0.to_string());
        kv("L", fmt(self.l_log));
        kv("u", fmt(self.u));
        kv("sigma_tilde", fmt(self.sigma_tilde));
        kv("sigma_bins", fmt(self.sigma_bins));
        kv("q", self.q.to_string());
        kv("K", self.k.to_string());
        kv("two_K_plus_1", self.two_k_plus_1.to_string());
        kv("M", self.big_m.to_string());
        kv("delta1_tilde", fmt(self.delta1_tilde));
        kv("C_eta", fmt(self.c_eta));
        kv("eps_target", fmt(self.eps_target));
        for (name, ok) in &self.constraint_flags {
            kv(&format!("flag.{name}"), ok.to_string());
        }
        for (name, v) in &self.predicate_values {
            kv(&format!("value.{name}"), fmt(*v));
        }
        out
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// C(eta) as printed, 0 < eta <= 1.
pub fn compute_c_eta(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::PlanInput(format!("eta must be in (0, 1], got {eta}")));
    }
    let e12 = 12f64.exp();
    let r = (1.0 / eta).sqrt();
    Ok((128.0 / 45.0) * e12 * (12.0 + 3.0 + 2.25 * r)
        + 10.0 * e12
        + (55.0 / 8.0) * E * E * (1.0 + (5.0f64 / 3.0).sqrt() * r))
}

/// (1 + sqrt(5/3) sqrt((1-eta)/eta))^2
pub fn contamination_factor(eta: f64) -> f64 {
    let f = 1.0 + (5.0f64 / 3.0).sqrt() * ((1.0 - eta) / eta).sqrt();
    f * f
}

/// M0 = ceil(16/(3 eta) ln(3/delta)), delta given as ln(1/delta).
pub fn m0_from_ln(eta: f64, ln_inv_delta: f64) -> u64 {
    (16.0 / (3.0 * eta) * (3f64.ln() + ln_inv_delta)).ceil() as u64
}

/// L = ln((4 M0/delta) (1 + sqrt(5/3) sqrt((1-eta)/eta))^2)
pub fn l_log(eta: f64, m0: u64, ln_inv_delta: f64) -> f64 {
    (4.0 * m0 as f64).ln() + ln_inv_delta + contamination_factor(eta).ln()
}

/// sigma~ = (1/sqrt m) (Delta/6) / sqrt(2 L)
pub fn sigma_tilde(m: u32, gap: f64, l: f64) -> f64 {
    (gap / 6.0) / (2.0 * l).sqrt() / (m as f64).sqrt()
}

/// ln X with X = ((m!)^2 C / eps)^(2/m)
fn ln_x(m: u32, c_eta: f64, eps: f64) -> f64 {
    (2.0 / m as f64) * (2.0 * factorial(m).ln() + c_eta.ln() - eps.ln())
}

/// u = ln(m/(4 e pi^2 sigma~^2) X)
pub fn lambert_u(m: u32, sigma_t: f64, c_eta: f64, eps: f64) -> f64 {
    (m as f64 / (4.0 * E * PI * PI * sigma_t * sigma_t)).ln() + ln_x(m, c_eta, eps)
}

/// ln of the theorem's side condition (m/(2 e pi^2 sigma~^2)) X, compared against 1 (i.e. X-term > e).
pub fn lambert_side_log(m: u32, sigma_t: f64, c_eta: f64, eps: f64) -> f64 {
    (m as f64 / (2.0 * E * PI * PI * sigma_t * sigma_t)).ln() + ln_x(m, c_eta, eps)
}

/// q = ceil(log2((3m/(pi Delta)) sqrt(1+3u) sqrt(2L)))
pub fn q_formula(m: u32, gap: f64, u: f64, l: f64) -> u32 {
    let x = 3.0 * m as f64 / (PI * gap) * (1.0 + 3.0 * u).sqrt() * (2.0 * l).sqrt();
    x.log2().ceil().max(1.0) as u32
}

/// (K, 2K+1, W) with W = floor((2/3) 2^q Delta) and 2K+1 the largest odd width <= W.
pub fn window(q: u32, gap: f64) -> (i64, i64, i64) {
    let w = ((2.0 / 3.0) * (q as f64).exp2() * gap).floor() as i64;
    let k = (w - 1).div_euclid(2);
    (k, 2 * k + 1, w)
}

/// sup over mu~ of |G_0(0) - G~_0|
pub fn alias_sup(sigma_bins: f64) -> f64 {
    sup_over_mu_tilde(|mu| alias_signed(0, mu, sigma_bins).map(f64::abs).unwrap_or(f64::INFINITY)).1
}

/// sup over mu~ of |G~_0 - F~_0|
pub fn tail_sup(k: i64, sigma_bins: f64) -> f64 {
    sup_over_mu_tilde(|mu| tail_sum(k, mu, sigma_bins)).1
}

/// sup over mu~ of ||eps^(R)||^2 = sum_{|n| <= K} g0(n, mu~ + D)
pub fn contamination_sq_sup(k: i64, sigma_bins: f64, d_bins: f64) -> f64 {
    sup_over_mu_tilde(|mu| moment_sum(0, 0.0, mu + d_bins, sigma_bins, Some(-k), Some(k))).1
}

struct Candidate {
    m0: u64,
    l: f64,
    sigma_t: f64,
    u: f64,
    q: u32,
    k: i64,
    two_k_plus_1: i64,
    w: i64,
    ratio: f64,
    side_log: f64,
}

fn derive(m: u32, eta: f64, gap: f64, ln_inv_delta: f64, c_eta: f64, eps: f64) -> Candidate {
    let m0 = m0_from_ln(eta, ln_inv_delta);
    let l = l_log(eta, m0, ln_inv_delta);
    let sigma_t = sigma_tilde(m, gap, l);
    let u = lambert_u(m, sigma_t, c_eta, eps);
    let q = q_formula(m, gap, u, l);
    let (k, two_k_plus_1, w) = window(q, gap);
    Candidate {
        m0,
        l,
        sigma_t,
        u,
        q,
        k,
        two_k_plus_1,
        w,
        ratio: l.sqrt() / (1.0 + 3.0 * u).sqrt(),
        side_log: lambert_side_log(m, sigma_t, c_eta, eps),
    }
}

/// Smallest ln(1/delta) >= ln 100 for which the depth-ratio predicate holds.
fn ratio_threshold(m: u32, eta: f64, gap: f64, c_eta: f64, eps: f64) -> Result<f64> {
    let ok = |t: f64| derive(m, eta, gap, t, c_eta, eps).ratio >= 2.0;
    let mut lo = 100f64.ln();
    if ok(lo) {
        return Ok(lo);
    }
    let mut hi = lo;
    let mut steps = 0;
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(Error::PlanInfeasible {
                predicate: PRED_RATIO.into(),
                iterations: steps,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Algorithm-1 preamble with the Delta-shrink loop (x0.9, at most 200 passes)
/// and, under `Enforce`, the log-space delta shrink.
pub fn plan_round(
    m: u32,
    eta: f64,
    gap0: f64,
    ln_inv_delta: f64,
    eps_target: f64,
    policy: DepthRatioPolicy,
) -> Result<PlanParams> {
    if !(eps_target > 0.0) {
        return Err(Error::PlanInput(format!(
            "target error must be positive, got {eps_target}"
        )));
    }
    if ln_inv_delta < 100f64.ln() - 1e-12 {
        return Err(Error::PlanInput(format!(
            "sampling-round failure budget must be <= 0.01, got {}",
            (-ln_inv_delta).exp()
        )));
    }
    let c_eta = compute_c_eta(eta)?;
    let m0_nominal = m0_from_ln(eta, ln_inv_delta);
    let mut gap = gap0;
    let mut iterations = Vec::new();
    let mut last_fail = String::new();
    for _ in 0..200 {
        let t = match policy {
            DepthRatioPolicy::Enforce => ln_inv_delta.max(ratio_threshold(m, eta, gap, c_eta, eps_target)?),
            DepthRatioPolicy::Report => ln_inv_delta,
        };
        let cand = derive(m, eta, gap, t, c_eta, eps_target);
        let n = (cand.q as f64).exp2();
        let sigma_bins = cand.sigma_t * n;
        let grid_ok = 1.0 / n <= gap / 6.0;
        let window_ok = cand.k >= 1;
        let (alias, tail, contam) = if window_ok {
            (
                alias_sup(sigma_bins),
                tail_sup(cand.k, sigma_bins),
                (contamination_sq_sup(cand.k, sigma_bins, n * gap).sqrt()) / eta.sqrt(),
            )
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        iterations.push(PlanIteration {
            gap,
            ln_inv_delta: t,
            m0: cand.m0,
            sigma_tilde: cand.sigma_t,
            q: cand.q,
            k: cand.k,
            alias,
            tail,
            contamination_over_sqrt_eta: contam,
            lambert_log_margin: cand.side_log - 1.0,
            ratio: cand.ratio,
        });
        if !window_ok {
            return Err(Error::PlanInfeasible {
                predicate: PRED_WINDOW.into(),
                iterations: iterations.len(),
            });
        }
        if !grid_ok {
            return Err(Error::PlanInfeasible {
                predicate: PRED_GRID.into(),
                iterations: iterations.len(),
            });
        }
        let mut flags = BTreeMap::new();
        flags.insert(PRED_ALIAS.to_string(), alias <= 0.125);
        flags.insert(PRED_TAIL.to_string(), tail <= 0.125);
        flags.insert(PRED_CONTAM.to_string(), contam <= 0.125);
        flags.insert(PRED_LAMBERT.to_string(), cand.side_log > 1.0 && cand.u > 0.0);
        flags.insert(PRED_RATIO.to_string(), cand.ratio >= 2.0);
        flags.insert(PRED_GRID.to_string(), grid_ok);
        flags.insert(PRED_WINDOW.to_string(), window_ok);
        let shrinkable = [PRED_ALIAS, PRED_TAIL, PRED_CONTAM, PRED_LAMBERT];
        if let Some(bad) = shrinkable.iter().find(|p| !flags[**p]) {
            last_fail = bad.to_string();
            gap *= 0.9;
            continue;
        }
        if policy == DepthRatioPolicy::Enforce && !flags[PRED_RATIO] {
            return Err(Error::PlanInfeasible {
                predicate: PRED_RATIO.into(),
                iterations: iterations.len(),
            });
        }
        let mut values = BTreeMap::new();
        values.insert(PRED_ALIAS.to_string(), alias);
        values.insert(PRED_TAIL.to_string(), tail);
        values.insert(PRED_CONTAM.to_string(), contam);
        values.insert(PRED_LAMBERT.to_string(), cand.side_log);
        values.insert(PRED_RATIO.to_string(), cand.ratio);
        return Ok(PlanParams {
            m,
            eta,
            policy,
            gap_initial: gap0,
            gap_work: gap,
            ln_inv_delta_nominal: ln_inv_delta,
            ln_inv_delta_work: t,
            delta_work: (-t).exp(),
            m0_nominal,
            m0: cand.m0,
            l_log: cand.l,
            u: cand.u,
            sigma_tilde: cand.sigma_t,
            sigma_bins,
            q: cand.q,
            k: cand.k,
            two_k_plus_1: cand.two_k_plus_1,
            window_floor: cand.w,
            big_m: 1,
            delta1_tilde: (-ln_inv_delta).exp(),
            c_eta,
            eps_target,
            constraint_flags: flags,
            predicate_values: values,
            iterations,
        });
    }
    Err(Error::PlanInfeasible {
        predicate: last_fail,
        iterations: iterations.len(),
    })
}

/// Plan a single sampling round with failure budget `inputs.delta_fail`
/// (must be <= 0.01) and relative target `eps_target` (turns^m).
pub fn plan_sampling_round(inputs: &PlanInputs, eps_target: f64) -> Result<PlanParams> {
    inputs.validate()?;
    if inputs.delta_fail > 0.01 {
        return Err(Error::PlanInput(format!(
            "sampling-round delta must be <= 0.01, got {}",
            inputs.delta_fail
        )));
    }
    plan_round(
        inputs.m,
        inputs.eta,
        inputs.gap_initial(),
        -inputs.delta_fail.ln(),
        eps_target,
        inputs.policy,
    )
}

/// M = ceil(8 Delta^2/(9 eps^2 (1-c)^2) ln(4/delta))
pub fn gsee_rounds(gap: f64, epsilon: f64, c: f64, delta: f64) -> u64 {
    (8.0 * gap * gap / (9.0 * epsilon * epsilon * (1.0 - c) * (1.0 - c)) * (4.0 / delta).ln()).ceil() as u64
}

/// Gaussian GSEE plan (m = 1): M outer rounds, each a sampling round with
/// budget delta/(4M) and target c eps.
pub fn plan_gsee(inputs: &PlanInputs) -> Result<PlanParams> {
    inputs.validate()?;
    let gap = inputs.gap_initial();
    let big_m = gsee_rounds(gap, inputs.epsilon, inputs.c, inputs.delta_fail);
    let ln_inv_d1 = (4.0 * big_m as f64).ln() - inputs.delta_fail.ln();
    let mut plan = plan_round(1, inputs.eta, gap, ln_inv_d1, inputs.c * inputs.epsilon, inputs.policy)?;
    plan.big_m = big_m;
    plan.delta1_tilde = inputs.delta_fail / (4.0 * big_m as f64);
    Ok(plan)
}

/// Depth-interpolated M = ceil(eps^(2 alpha - 2) Delta^(2 - 2 alpha) ln(4/delta)).
pub fn corollary_m(inputs: &PlanInputs) -> u64 {
    let a = inputs.alpha;
    (inputs.epsilon.powf(-2.0 + 2.0 * a) * inputs.delta_true.powf(2.0 - 2.0 * a) * (4.0 / inputs.delta_fail).ln())
        .ceil() as u64
}

/// Depth-interpolated M0 = ceil(16/(3 eta) ln(12 M / delta)).
pub fn corollary_m0(inputs: &PlanInputs) -> u64 {
    (16.0 / (3.0 * inputs.eta) * (12.0 * corollary_m(inputs) as f64 / inputs.delta_fail).ln()).ceil() as u64
}

/// Depth-interpolated query bound on 2^q with Delta = `gap`, using the given
/// (M0, ln(1/delta)) inside L.
pub fn corollary_query_bound(eta: f64, gap: f64, epsilon: f64, m0: u64, ln_inv_delta: f64) -> Result<f64> {
    let c_eta = compute_c_eta(eta)?;
    let l = l_log(eta, m0, ln_inv_delta);
    let inner = (18.0 / (E * PI * PI * gap * gap)).ln()
        + 2.0 * (3.0 * c_eta / ((3.0 - 2.0 * 2f64.sqrt()) * epsilon)).ln()
        + l.ln();
    Ok(6.0 * 2f64.sqrt() / (PI * gap) * (1.0 + 3.0 * inner).sqrt() * l.sqrt())
}

/// Minimal 2^q from the Lambert route: sqrt(m/(4 pi^2 sigma~^2) (-W_{-1}(-e^{-u-1}))).
pub fn lambert_min_grid(m: u32, sigma_t: f64, u: f64) -> f64 {
    (m as f64 / (4.0 * PI * PI * sigma_t * sigma_t) * crate::gaussian::neg_wm1_of_neg_exp(u)).sqrt()
}

/// Sandwich route: (sqrt m /(2 pi sigma~)) sqrt(1 + 3u).
pub fn sandwich_grid(m: u32, sigma_t: f64, u: f64) -> f64 {
    (m as f64).sqrt() / (2.0 * PI * sigma_t) * (1.0 + 3.0 * u).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpeBaseline {
    pub q_qpe: u32,
    pub n_samples: u64,
}

/// 2/(sqrt 2 - 1)^2
pub fn qpe_coefficient() -> f64 {
    2.0 / ((2f64.sqrt() - 1.0) * (2f64.sqrt() - 1.0))
}

pub fn plan_qpe_baseline(epsilon: f64, delta_fail: f64) -> Result<QpeBaseline> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::PlanInput(format!("epsilon must be in (0, 1/2), got {epsilon}")));
    }
    if !(delta_fail > 0.0 && delta_fail < 1.0) {
        return Err(Error::PlanInput(format!("delta must be in (0, 1), got {delta_fail}")));
    }
    let q_qpe = (1.0 / epsilon).log2().ceil() as u32;
    let n_samples = (qpe_coefficient() * (1.0 / delta_fail).ln()).ceil() as u64;
    Ok(QpeBaseline { q_qpe, n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_eta_frozen() {
        // mpmath, 50 digits
        assert!((compute_c_eta(1.0).unwrap() / 9_613_499.395_118_880_249 - 1.0).abs() < 1e-13);
        assert!((compute_c_eta(0.25).unwrap() / 10_655_195.642_409_540_52 - 1.0).abs() < 1e-13);
        assert!((compute_c_eta(0.5).unwrap() / 10_044_984.108_619_829_2 - 1.0).abs() < 1e-13);
        assert!(compute_c_eta(0.0).is_err());
        assert!(compute_c_eta(1.5).is_err());
    }

    #[test]
    fn c_eta_asymptote() {
        let lim = (128.0 / 45.0) * 12f64.exp() * 2.25 + (55.0 / 8.0) * E * E * (5.0f64 / 3.0).sqrt();
        let eta = 1e-12;
        let v = compute_c_eta(eta).unwrap() * eta.sqrt();
        assert!((v / lim - 1.0).abs() < 1e-5);
    }

    #[test]
    fn c_eta_second_route() {
        // independent re-derivation at eta = 1/4: sqrt(1/eta) = 2
        let e12 = 12f64.exp();
        let want =
            (128.0 / 45.0) * e12 * 19.5 + 10.0 * e12 + (55.0 / 8.0) * E * E * (1.0 + 2.0 * (5.0f64 / 3.0).sqrt());
        assert!((compute_c_eta(0.25).unwrap() - want).abs() < 1e-6);
    }

    #[test]
    fn m0_examples() {
        assert_eq!(m0_from_ln(0.5, 100f64.ln()), 61);
        assert_eq!(m0_from_ln(1.0, 100f64.ln()), 31);
    }

    #[test]
    fn gsee_m_example() {
        assert_eq!(gsee_rounds(0.1, 0.01, default_c(), 0.1), 369);
        let one_minus_c = 1.0 - default_c();
        assert!((one_minus_c * one_minus_c - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn qpe_examples() {
        let b = plan_qpe_baseline(0.1, (-1.0f64).exp()).unwrap();
        assert_eq!(b.n_samples, 12);
        assert_eq!(plan_qpe_baseline(1.0 / 16.0, 0.01).unwrap().q_qpe, 4);
        assert_eq!(plan_qpe_baseline(0.1, 0.01).unwrap().n_samples, 54);
        assert!(plan_qpe_baseline(0.6, 0.01).is_err());
        assert!(plan_qpe_baseline(0.1, 1.0).is_err());
    }

    #[test]
    fn window_rule() {
        // W odd
        let (k, w1, w) = window(10, 0.1);
        assert_eq!(w, 68);
        assert_eq!((k, w1), (33, 67));
        let (k, w1, w) = window(10, 0.1 * 69.5 / 68.2667);
        assert_eq!(w, 69);
        assert_eq!((k, w1), (34, 69));
    }

    #[test]
    fn report_policy_reproduces_nominal_plan() {
        let inputs = PlanInputs::new(0.1, 0.5, 0.1, 0.01, 0.0).with_policy(DepthRatioPolicy::Report);
        let p = plan_gsee(&inputs).unwrap();
        assert_eq!(p.big_m, 369);
        assert_eq!(p.m0, p.m0_nominal);
        assert_eq!(p.m0, 115);
        assert_eq!(p.q, 10);
        assert!(!p.constraint_flags[PRED_RATIO]);
        assert!(p.constraint_flags[PRED_ALIAS] && p.constraint_flags[PRED_TAIL] && p.constraint_flags[PRED_CONTAM]);
    }

    #[test]
    fn enforce_policy_meets_every_predicate() {
        let inputs = PlanInputs::new(0.1, 0.5, 0.1, 0.01, 0.0);
        let p = plan_gsee(&inputs).unwrap();
        assert!(p.all_flags(), "{:?}", p.constraint_flags);
        assert!(p.predicate_values[PRED_RATIO] >= 2.0);
        assert!(p.m0 > p.m0_nominal);
        assert!(1.0 / p.grid() <= p.gap_work / 6.0);
        assert!(p.two_k_plus_1 <= p.window_floor && p.window_floor - p.two_k_plus_1 <= 1);
    }

    #[test]
    fn sampling_round_example() {
        let inputs = PlanInputs::new(0.01, 0.5, 0.1, 0.01, 0.0);
        let p = plan_sampling_round(&inputs, inputs.c * inputs.epsilon).unwrap();
        assert!(p.grid() >= 6.0 / p.gap_work);
        assert!(p.grid() >= lambert_min_grid(1, p.sigma_tilde, p.u));
        let cap = 2f64.powf(-0.25) * (1.0 / p.grid()).sqrt() * (p.gap_work / (12.0 * PI)).sqrt();
        assert!(p.sigma_tilde <= cap);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut i = PlanInputs::new(0.1, 0.5, 0.1, 0.2, 0.0);
        assert!(matches!(plan_gsee(&i), Err(Error::PlanInput(_))));
        i.epsilon = 0.01;
        i.eta = 0.0;
        assert!(plan_gsee(&i).is_err());
        let i = PlanInputs::new(0.1, 0.5, 0.1, 0.01, 0.0);
        assert!(plan_sampling_round(&i, 0.001).is_err());
    }
}
