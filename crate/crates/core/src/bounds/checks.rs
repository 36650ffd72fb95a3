use std::f64::consts::{E, PI};

use rand::Rng;

use super::{lower, with_tol, BoundCase, CaseBuilder, Kind, Point, TOL_SIM};
use crate::gaussian::{
    alias_abs_series, alias_signed, continuous_moment, disc_error_precondition, factorial, inf_over_mu_tilde,
    ln_alias_abs_series, ln_disc_error_bound, ln_disc_error_bound_intermediate, ln_sum_g0, ln_tail_sum, moment_sum,
    normalization_at, round_half_even, sup_over_mu_tilde, tail_sum,
};
use crate::planner::{compute_c_eta, contamination_factor, lambert_min_grid, sandwich_grid, PlanParams};
use crate::seed::{rng, STREAM_PERTURB};
use crate::sim::{ln_ideal_mass, Ancilla, Circuit, SpectrumSpec};

const EIGHTH: f64 = 0.125;

/// A, T and ||eps^(R)|| at the point's mu~ and contaminant offset.
#[derive(Clone, Copy, Debug)]
pub struct Local {
    pub alias0: f64,
    pub a: f64,
    pub t: f64,
    pub r_sq: f64,
    pub r: f64,
}

impl Local {
    pub fn at(p: &Point) -> Self {
        let alias0 = alias_signed(0, p.mu_tilde, p.sigma).unwrap_or(f64::NAN);
        let t = tail_sum(p.k, p.mu_tilde, p.sigma);
        let r_sq = moment_sum(0, 0.0, p.mu_tilde + p.d_bins, p.sigma, Some(-p.k), Some(p.k));
        Self {
            alias0,
            a: alias0.abs(),
            t,
            r_sq,
            r: r_sq.sqrt(),
        }
    }

    /// A, T, ||eps^(R)||/sqrt(eta) all <= 1/8.
    pub fn eighths(&self, eta: f64) -> bool {
        self.a <= EIGHTH && self.t <= EIGHTH && self.r / eta.sqrt() <= EIGHTH
    }
}

fn w_of(eta: f64) -> f64 {
    (1.0 - eta) / eta
}

/// Mean offset of the moment variable x = x0 + j.
fn mu_of(p: &Point) -> f64 {
    p.x0 + p.mu_tilde
}

/// e^{2 pi d |mu|} e^{2 pi^2 (d^2 + 2d) sigma^2} m!/(pi d)^m
fn p1(m: u32, mu: f64, sigma: f64, d: f64) -> f64 {
    (2.0 * PI * d * mu.abs() + 2.0 * PI * PI * (d * d + 2.0 * d) * sigma * sigma).exp() * factorial(m)
        / (PI * d).powi(m as i32)
}

fn ln_p1(m: u32, mu: f64, sigma: f64, d: f64) -> f64 {
    2.0 * PI * d * mu.abs() + 2.0 * PI * PI * (d * d + 2.0 * d) * sigma * sigma + factorial(m).ln()
        - m as f64 * (PI * d).ln()
}

/// e^{2 pi d |mu|} e^{2 pi^2 d^2 sigma^2} m!/(pi d)^m
fn p3(m: u32, mu: f64, sigma: f64, d: f64) -> f64 {
    (2.0 * PI * d * mu.abs() + 2.0 * PI * PI * d * d * sigma * sigma).exp() * factorial(m) / (PI * d).powi(m as i32)
}

/// m!(2K+1)^m e^{2 pi d2}/(pi d2)^m
fn window_prefactor(m: u32, k: i64, d2: f64) -> f64 {
    factorial(m) * ((2 * k + 1) as f64).powi(m as i32) * (2.0 * PI * d2).exp() / (PI * d2).powi(m as i32)
}

/// Normalization bounds: sup/inf of N over mu~ against 1 +- (T + A) and
/// |1 - 1/N| against (T + A)/(1 - T - A); also at the point's own mu~.
pub fn check_normalization_bounds(p: &Point) -> Vec<BoundCase> {
    let n_at = |mu: f64| normalization_at(p.sigma, mu, p.q);
    let a_sup = sup_over_mu_tilde(|mu| alias_signed(0, mu, p.sigma).map(f64::abs).unwrap_or(f64::NAN)).1;
    let t_sup = sup_over_mu_tilde(|mu| tail_sum(p.k, mu, p.sigma)).1;
    let fits = p.k < (1i64 << (p.q - 1));
    let mut out = Vec::new();
    let mut emit = |variant: &str, n_hi: f64, n_lo: f64, inv: f64, t: f64, a: f64| {
        let pre = 1.0 - t - a > 0.0 && fits;
        let tol = |c: BoundCase| with_tol(c, super::TOL_LATTICE, 4.0 * f64::EPSILON);
        let up = CaseBuilder {
            kind: Kind::NormUp,
            point: p,
        };
        out.push(tol(up.case(variant, "1+T+A", n_hi, 1.0 + t + a, pre)));
        let lo = CaseBuilder {
            kind: Kind::NormLow,
            point: p,
        };
        out.push(tol(lower(lo.case(variant, "1-T-A", n_lo, 1.0 - t - a, pre))));
        let iv = CaseBuilder {
            kind: Kind::InvNorm,
            point: p,
        };
        out.push(tol(iv.case(
            variant,
            "(T+A)/(1-T-A)",
            inv,
            (t + a) / (1.0 - t - a),
            pre,
        )));
    };
    let n_hi = sup_over_mu_tilde(n_at).1;
    let n_lo = inf_over_mu_tilde(n_at).1;
    let inv = sup_over_mu_tilde(|mu| (1.0 - 1.0 / n_at(mu)).abs()).1;
    emit("sup_mu", n_hi, n_lo, inv, t_sup, a_sup);
    let l = Local::at(p);
    let n0 = n_at(p.mu_tilde);
    emit("at_mu", n0, n0, (1.0 - 1.0 / n0).abs(), l.t, l.a);
    out
}

/// Tail beyond K against exp(-(K - 1/2)^2/(2 sigma^2)), in log space.
pub fn check_tail(p: &Point) -> Vec<BoundCase> {
    let b = CaseBuilder {
        kind: Kind::TailG0F0,
        point: p,
    };
    let kf = p.k as f64 - 0.5;
    let bound = -kf * kf / (2.0 * p.sigma * p.sigma);
    let pre = p.k >= 1 && p.sigma <= kf;
    let sup = sup_over_mu_tilde(|mu| ln_tail_sum(p.k, mu, p.sigma)).1;
    vec![
        b.ln("sup_mu", "exp(-(K-1/2)^2/(2 sigma^2))", sup, bound, pre),
        b.ln(
            "at_mu",
            "exp(-(K-1/2)^2/(2 sigma^2))",
            ln_tail_sum(p.k, p.mu_tilde, p.sigma),
            bound,
            pre,
        ),
    ]
}

/// Contaminant mass inside the window, maximized over mu~, in log space.
pub fn check_contamination(p: &Point) -> Vec<BoundCase> {
    let d = p.d_bins;
    let kf = p.k as f64;
    let ln_r = sup_over_mu_tilde(|mu| ln_sum_g0(mu + d, p.sigma, Some(-p.k), Some(p.k))).1;
    let ln_l = sup_over_mu_tilde(|mu| ln_sum_g0(mu - d, p.sigma, Some(-p.k), Some(p.k))).1;
    let s2 = 2.0 * p.sigma * p.sigma;
    let printed = -(d - kf - 0.5).powi(2) / s2;
    let looser = -(kf - 0.5).powi(2) / s2;
    let pre = d > kf + 0.5 && p.sigma >= 1.0 / (2.0 * PI).sqrt();
    let pre_loose = pre && d >= 2.0 * kf && kf >= 0.5;
    let c = "exp(-(2^q Delta-K-1/2)^2/(2 sigma^2))";
    let cl = "exp(-(K-1/2)^2/(2 sigma^2))";
    let rb = CaseBuilder {
        kind: Kind::ContaminationR,
        point: p,
    };
    let lb = CaseBuilder {
        kind: Kind::ContaminationL,
        point: p,
    };
    let mut sym = lb.ln(
        "symmetry_sup_R_eq_sup_L",
        "0",
        (ln_r - ln_l).abs(),
        0.0,
        ln_r.is_finite(),
    );
    sym.tol_abs = 1e-9;
    vec![
        rb.ln("printed", c, ln_r, printed, pre),
        rb.ln("looser", cl, ln_r, looser, pre_loose),
        lb.ln("printed", c, ln_l, printed, pre),
        lb.ln("looser", cl, ln_l, looser, pre_loose),
        sym,
    ]
}

/// Window mass of the simulated mixture on a worst-case two-state spectrum
/// (ground overlap eta, contaminant `d_mult` gaps above) against the hit-rate
/// lemma and its 3/8 corollary.
pub fn check_hit_rate(p: &Point, theta0s: &[f64], d_mults: &[f64]) -> Vec<BoundCase> {
    let mut out = Vec::new();
    if p.q > 20 {
        return out;
    }
    let Ok(circuit) = Circuit::new(p.q, Ancilla::Gaussian { sigma_bins: p.sigma }) else {
        return out;
    };
    let n = p.n();
    for &theta0 in theta0s {
        for &dm in d_mults {
            let d = p.d_bins * dm;
            let Ok(spec) = SpectrumSpec::two_state(theta0, p.eta, d / n) else {
                continue;
            };
            let Ok(dist) = circuit.mixed(&spec, crate::Exec::Sequential) else {
                continue;
            };
            let z0 = round_half_even(n * theta0);
            let mu_t = n * theta0 - z0;
            let pt = Point {
                mu_tilde: mu_t,
                d_bins: d,
                label: format!("{}@theta0={theta0},D*{dm}", p.label),
                ..p.clone()
            };
            let l = Local::at(&pt);
            let z0 = z0 as i64;
            let hit = dist.mass_signed(z0 - p.k, z0 + p.k);
            let lemma = p.eta / (1.0 + l.a + l.t) * (1.0 - l.a - l.t - 2.25 * l.r / p.eta.sqrt());
            let pre = l.eighths(p.eta) && p.k >= 1;
            let pre_cor = l.r / p.eta.sqrt() <= EIGHTH && l.t.sqrt() <= EIGHTH && l.a <= EIGHTH && p.k >= 1;
            let hb = CaseBuilder {
                kind: Kind::HitRate,
                point: &pt,
            };
            out.push(with_tol(lower(hb.case("lemma", "9/4", hit, lemma, pre)), TOL_SIM, 0.0));
            let cb = CaseBuilder {
                kind: Kind::HitRateCorollary,
                point: &pt,
            };
            out.push(with_tol(
                lower(cb.case("corollary", "3/8", hit, 0.375 * p.eta, pre_cor)),
                TOL_SIM,
                0.0,
            ));
        }
    }
    out
}

/// |G_m(0) - G~_m| against the absolute Poisson series.
pub fn check_aliasing(p: &Point, m: u32) -> Vec<BoundCase> {
    let mu = mu_of(p);
    let b = CaseBuilder {
        kind: Kind::AliasingM,
        point: p,
    };
    let (Ok(exact), Ok(abs)) = (alias_signed(m, mu, p.sigma), alias_abs_series(m, mu, p.sigma, None)) else {
        return vec![];
    };
    let mut pt = p.clone();
    pt.m = m;
    let b = CaseBuilder { point: &pt, ..b };
    vec![b.case("poisson_abs_series", "sum_{k!=0}|G_m(-k)|", exact.abs(), abs, true)]
}

/// Absolute aliasing series against the discretization bound (final and
/// intermediate forms), in log space, for radius `delta1`.
pub fn check_disc_error(p: &Point, m: u32, delta1: f64) -> Vec<BoundCase> {
    let mu = mu_of(p);
    let Ok(exact) = ln_alias_abs_series(m, mu, p.sigma) else {
        return vec![];
    };
    let mut pt = p.clone();
    pt.m = m;
    pt.label = format!("{}@delta1={delta1:.6e}", p.label);
    let b = CaseBuilder {
        kind: Kind::DiscErrorM,
        point: &pt,
    };
    let pre = delta1 > 0.0 && delta1 < 0.5 && disc_error_precondition(p.sigma, delta1);
    vec![
        b.ln("final", "4", exact, ln_disc_error_bound(m, mu, p.sigma, delta1), pre),
        b.ln(
            "intermediate",
            "2 m! 2^m/((2 pi)^m d1^m)/(1-r)",
            exact,
            ln_disc_error_bound_intermediate(m, mu, p.sigma, delta1),
            pre,
        ),
    ]
}

/// Window moment difference for seeded perturbations f = h - eps of
/// h = sqrt(g0) on x in {x0-K..x0+K}, at d2 = 1/pi.
pub fn check_window_moment_bound(p: &Point, m: u32, seed: u64, draws: usize, rel_size: f64) -> Vec<BoundCase> {
    let mut pt = p.clone();
    pt.m = m;
    let xs: Vec<f64> = (-p.k..=p.k).map(|j| p.x0 + j as f64).collect();
    let h: Vec<f64> = (-p.k..=p.k)
        .map(|j| crate::gaussian::g0(j as f64, p.mu_tilde, p.sigma).sqrt())
        .collect();
    let pre = xs.iter().all(|x| x.abs() <= 2.0 * p.k as f64);
    let pref = window_prefactor(m, p.k, 1.0 / PI);
    let h_norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut out = Vec::new();
    let mut g = rng(seed, &[STREAM_PERTURB, m as u64]);
    for draw in 0..=draws {
        // draw 0 is the unperturbed case
        let eps: Vec<f64> = h
            .iter()
            .map(|&hx| {
                if draw == 0 {
                    0.0
                } else {
                    rel_size * hx * (2.0 * g.random::<f64>() - 1.0)
                }
            })
            .collect();
        // |h|^2 - |f|^2 = eps (2h - eps)
        let diff: Vec<f64> = h.iter().zip(&eps).map(|(hx, e)| e * (2.0 * hx - e)).collect();
        let exact = xs
            .iter()
            .zip(&diff)
            .map(|(x, d)| x.powi(m as i32) * d)
            .sum::<f64>()
            .abs();
        let l1: f64 = diff.iter().map(|d| d.abs()).sum();
        let e_norm = eps.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut q = pt.clone();
        q.label = format!("{}@draw={draw},size={rel_size:e}", p.label);
        let b = CaseBuilder {
            kind: Kind::HmFmWindow,
            point: &q,
        };
        let c = "m!(2K+1)^m e^{2 pi d2}/(pi d2)^m";
        out.push(b.case("l1", c, exact, pref * l1, pre));
        out.push(b.case(
            "eps_norm",
            c,
            exact,
            pref * (e_norm * e_norm + 2.0 * h_norm * e_norm),
            pre,
        ));
        if m == 0 {
            out.push(b.case("m0_direct", "1", exact, l1, pre));
        }
    }
    out
}

/// Pieces of the exact moment error on the worst-case two-state spectrum.
#[derive(Clone, Copy, Debug)]
pub struct MomentError {
    pub g_m0: f64,
    pub alias_m: f64,
    pub tail_m: f64,
    pub pollution_m: f64,
    /// b = alias0 - T + w ||eps^(R)||^2, so the window mass is 1 + b.
    pub b: f64,
    pub w: f64,
}

impl MomentError {
    pub fn at(p: &Point, m: u32) -> Option<Self> {
        let mu = mu_of(p);
        let l = Local::at(p);
        let w = w_of(p.eta);
        let tail_m = moment_sum(m, p.x0, p.mu_tilde, p.sigma, None, Some(-p.k - 1))
            + moment_sum(m, p.x0, p.mu_tilde, p.sigma, Some(p.k + 1), None);
        let pollution_m = moment_sum(m, p.x0, p.mu_tilde + p.d_bins, p.sigma, Some(-p.k), Some(p.k));
        Some(Self {
            g_m0: continuous_moment(m, mu, p.sigma).ok()?,
            alias_m: alias_signed(m, mu, p.sigma).ok()?,
            tail_m,
            pollution_m,
            b: l.alias0 - l.t + w * l.r_sq,
            w,
        })
    }

    /// |G_m(0) - E[x^m | window]|, bins^m.
    pub fn total(&self) -> f64 {
        (self.g_m0 * self.b - self.alias_m + self.tail_m - self.w * self.pollution_m).abs() / (1.0 + self.b)
    }

    pub fn norm_part(&self) -> f64 {
        self.b.abs() / (1.0 + self.b) * self.g_m0.abs()
    }

    pub fn trunc_raw(&self) -> f64 {
        (self.tail_m - self.w * self.pollution_m).abs()
    }
}

/// Truncation plus pollution against the 11/4, 25/8 and 55/8 forms at d2 = 1/pi.
pub fn check_trunc_polut(p: &Point, m: u32) -> Vec<BoundCase> {
    let Some(e) = MomentError::at(p, m) else { return vec![] };
    let l = Local::at(p);
    let mut pt = p.clone();
    pt.m = m;
    let b = CaseBuilder {
        kind: Kind::TruncPolutM,
        point: &pt,
    };
    let pre = l.eighths(p.eta) && p.x0.abs() <= p.k as f64;
    let base = window_prefactor(m, p.k, 1.0 / PI) * (l.t.sqrt() + (5.0f64 / 3.0).sqrt() * l.r / p.eta.sqrt());
    vec![
        b.case("statement", "11/4", e.trunc_raw(), 2.75 * base, pre),
        b.case("derivation", "25/8", e.trunc_raw(), 3.125 * base, pre),
        b.case(
            "theorem_normalized",
            "55/8",
            e.trunc_raw() / (1.0 + e.b),
            6.875 * base,
            pre,
        ),
    ]
}

/// Normalization part of the moment error, lemma form (3A) and theorem form
/// (A replaced by its discretization bound), at d1 = d3 = 1/(pi 2^q).
pub fn check_eps_norm(p: &Point, m: u32) -> Vec<BoundCase> {
    let Some(e) = MomentError::at(p, m) else { return vec![] };
    let l = Local::at(p);
    let mu = mu_of(p);
    let d = 1.0 / (PI * p.n());
    let mut pt = p.clone();
    pt.m = m;
    let b = CaseBuilder {
        kind: Kind::EpsNormM,
        point: &pt,
    };
    let pre = l.eighths(p.eta) && mu.abs() <= p.k as f64;
    let rest = 3.0 * l.t + 2.25 * l.r / p.eta.sqrt();
    let pf = 128.0 / 45.0 * p3(m, mu, p.sigma, d);
    let a_thm = 12.0 * p1(m, mu, p.sigma, d) * (-2.0 * PI * PI * p.sigma * p.sigma).exp();
    vec![
        b.case("lemma", "128/45", e.norm_part(), pf * (3.0 * l.a + rest), pre),
        b.case(
            "theorem",
            "128/45, 12",
            e.norm_part(),
            pf * (a_thm + rest),
            pre && disc_error_precondition(p.sigma, d),
        ),
    ]
}

/// Component bound sum used for the total error at d1 = d3 = 1/(pi 2^q), d2 = 1/pi.
pub fn total_component_bounds(p: &Point, m: u32) -> (f64, f64, f64) {
    let l = Local::at(p);
    let mu = mu_of(p);
    let d = 1.0 / (PI * p.n());
    let e_disc = (-2.0 * PI * PI * p.sigma * p.sigma).exp();
    let p1v = p1(m, mu, p.sigma, d);
    let norm = 128.0 / 45.0 * p3(m, mu, p.sigma, d) * (12.0 * p1v * e_disc + 3.0 * l.t + 2.25 * l.r / p.eta.sqrt());
    let discret = 10.0 * p1v * e_disc;
    let trunc = 6.875 * window_prefactor(m, p.k, 1.0 / PI) * (l.t.sqrt() + (5.0f64 / 3.0).sqrt() * l.r / p.eta.sqrt());
    (norm, discret, trunc)
}

/// Total moment error against the component sum, the simplified form, the
/// grouped relative form and, when given, the planned target (turns^m).
pub fn check_total_eps(p: &Point, m: u32, eps_target: Option<f64>, plan_ok: bool) -> Vec<BoundCase> {
    let Some(e) = MomentError::at(p, m) else { return vec![] };
    let l = Local::at(p);
    let mu = mu_of(p);
    let n = p.n();
    let d = 1.0 / (PI * n);
    let mut pt = p.clone();
    pt.m = m;
    let b = CaseBuilder {
        kind: Kind::TotalEpsM,
        point: &pt,
    };
    let exact = e.total();
    let base_pre = l.eighths(p.eta) && mu.abs() <= p.k as f64 && disc_error_precondition(p.sigma, d);
    let (norm, discret, trunc) = total_component_bounds(p, m);
    let mf = factorial(m);
    let s2 = p.sigma * p.sigma;
    let e_disc = (-2.0 * PI * PI * s2).exp();
    let simplified = n.powi(2 * m as i32)
        * mf
        * mf
        * ((128.0 / 45.0) * 12f64.exp() * (12.0 * e_disc + 3.0 * l.t + 2.25 * l.r / p.eta.sqrt())
            + 10.0 * 12f64.exp() * e_disc
            + 6.875 * E * E * (l.t.sqrt() + (5.0f64 / 3.0).sqrt() * l.r / p.eta.sqrt()));
    let simple_pre = base_pre && mu.abs() <= n && p.sigma <= (n / PI).sqrt();
    let st = p.sigma_tilde();
    let grouped_pre = simple_pre
        && 1.0 / n <= p.gap / 3.0
        && st <= 2f64.powf(-0.25) * (1.0 / n).sqrt() * (p.gap / (12.0 * PI)).sqrt()
        && p.sigma <= p.k as f64 - 0.5;
    let c_eta = compute_c_eta(p.eta).unwrap_or(f64::NAN);
    let ln_grouped = m as f64 * n.ln() + 2.0 * mf.ln() - 2.0 * PI * PI * s2 + c_eta.ln();
    let ln_rel = exact.ln() - m as f64 * n.ln();
    let ln_disc_exact = ln_alias_abs_series(m, mu, p.sigma).unwrap_or(f64::NAN) - (1.0 + e.b).ln();
    let ln_disc_bound = 10f64.ln() + ln_p1(m, mu, p.sigma, d) - 2.0 * PI * PI * s2;
    let mut out = vec![
        b.case(
            "components",
            "128/45 + 10 + 55/8",
            exact,
            norm + discret + trunc,
            base_pre,
        ),
        b.case(
            "simplified",
            "e^12, e^2, (m!)^2 (2^q)^2m",
            exact,
            simplified,
            simple_pre,
        ),
        b.ln("grouped_relative", "C(eta)", ln_rel, ln_grouped, grouped_pre),
        b.ln("discret_normalized", "10", ln_disc_exact, ln_disc_bound, base_pre),
    ];
    if let Some(target) = eps_target {
        out.push(b.case("planned_target", "eps~_m", exact / n.powi(m as i32), target, plan_ok));
    }
    out
}

/// Planned grid against the Lambert and sandwich routes, and the grouped
/// bound at the planned q against the target (log space).
pub fn check_q_requirement(plan: &PlanParams, p: &Point) -> Vec<BoundCase> {
    let b = CaseBuilder {
        kind: Kind::QRequirement,
        point: p,
    };
    let m = plan.m;
    let st = plan.sigma_tilde;
    let u = plan.u;
    let pre = u > 0.0
        && plan
            .predicate_values
            .get(crate::planner::PRED_LAMBERT)
            .copied()
            .unwrap_or(0.0)
            > 1.0;
    let lam = lambert_min_grid(m, st, u);
    let sand = sandwich_grid(m, st, u);
    let n = plan.grid();
    let lo_sand = (m as f64).sqrt() / (2.0 * PI * st) * (1.0 + (2.0 * u).sqrt() + 2.0 * u / 3.0).sqrt();
    let mf = factorial(m);
    let ln_grouped = m as f64 * n.ln() + 2.0 * mf.ln() - 2.0 * PI * PI * st * st * n * n + plan.c_eta.ln();
    vec![
        b.ln("lambert_le_sandwich", "1+3u", lam.ln(), sand.ln(), pre),
        lower(b.ln(
            "lambert_ge_inner_sandwich",
            "1+sqrt(2u)+2u/3",
            lam.ln(),
            lo_sand.ln(),
            pre,
        )),
        b.ln("sandwich_le_planned", "ceil(log2)", sand.ln(), n.ln(), pre),
        b.ln(
            "grouped_at_planned_le_target",
            "C(eta)",
            ln_grouped,
            plan.eps_target.ln(),
            pre,
        ),
    ]
}

/// Failure-rate components on the worst-case two-state spectrum from the
/// closed-form distribution in log space, against the printed bounds and
/// the plan's budget.
pub fn check_fail_rate(plan: &PlanParams, p: &Point, theta0: f64) -> Vec<BoundCase> {
    let n = plan.grid();
    let k = plan.k;
    let eta = plan.eta;
    let Ok(spec) = SpectrumSpec::two_state(theta0, eta, plan.gap_work) else {
        return vec![];
    };
    let x0 = round_half_even(n * theta0) as i64;
    let mut pt = p.clone();
    pt.mu_tilde = n * theta0 - x0 as f64;
    pt.label = format!("{}@theta0={theta0}", p.label);
    let l = Local::at(&pt);
    let b = CaseBuilder {
        kind: Kind::FailRateComponents,
        point: &pt,
    };
    let s = plan.sigma_bins;
    let lnm = |lo: i64, hi: i64| ln_ideal_mass(&spec, plan.q, s, lo, hi);
    let half = 1i64 << (plan.q - 1);
    let ln_gap = lnm(x0 + k + 1, x0 + 2 * k);
    let ln_left = lnm(-half, x0 - k - 1);
    let p_xl = lnm(x0 - k, x0).exp();
    let p_hit = lnm(x0 - k, x0 + k).exp();
    let ln_pb =
        (4.0f64 / 3.0).ln() - (n * plan.gap_work / 3.0 - 1.5).powi(2) / (2.0 * s * s) + contamination_factor(eta).ln();
    let m0 = plan.m0 as f64;
    let ln_zero = m0 * (-p_xl).ln_1p();
    let ln_assembled = crate::gaussian::ln_add(ln_zero, m0.ln() + crate::gaussian::ln_add(ln_left, ln_gap));
    let pre = l.a <= EIGHTH
        && l.t <= EIGHTH
        && 1.0 / n <= plan.gap_work / 6.0
        && plan.sigma_tilde <= (plan.gap_work / 6.0) / (2.0 * plan.l_log).sqrt() * (1.0 + 1e-12);
    let pre_hit = pre && l.eighths(eta);
    vec![
        b.ln("p_gap", "4/3", ln_gap, ln_pb, pre),
        b.ln("p_left", "4/3", ln_left, ln_pb, pre),
        with_tol(
            lower(b.case("p_x_left_half_hit", "1/2", p_xl, p_hit / 2.0, pre)),
            TOL_SIM,
            0.0,
        ),
        with_tol(
            lower(b.case("p_x_left_corollary", "3/16", p_xl, 3.0 * eta / 16.0, pre_hit)),
            TOL_SIM,
            0.0,
        ),
        b.ln("p_zero_exp", "3/16", ln_zero, -3.0 * eta * m0 / 16.0, pre_hit),
        b.ln(
            "p_zero_budget",
            "delta/3",
            -3.0 * eta * m0 / 16.0,
            (1.0f64 / 3.0).ln() - plan.ln_inv_delta_work,
            true,
        ),
        b.ln("assembled", "delta", ln_assembled, -plan.ln_inv_delta_work, pre_hit),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Status;

    fn pt(sigma: f64, k: i64, d: f64, eta: f64) -> Point {
        Point {
            label: "t".into(),
            eta,
            ln_inv_delta: f64::NAN,
            gap: d / 256.0,
            m: 1,
            q: 8,
            sigma,
            k,
            m0: 0,
            mu_tilde: 0.0,
            x0: 0.0,
            d_bins: d,
        }
    }

    #[test]
    fn normalization_example() {
        let cases = check_normalization_bounds(&pt(1.0, 8, 24.0, 0.5));
        assert_eq!(cases.len(), 6);
        assert!(cases.iter().all(|c| c.status() == Status::Pass), "{cases:#?}");
        // heavy aliasing: lemma applies only if N_low > 0
        let cases = check_normalization_bounds(&pt(0.3, 1, 3.0, 0.5));
        for c in &cases {
            assert_ne!(c.status(), Status::Fail);
        }
    }

    #[test]
    fn window_moment_zero_perturbation() {
        let cases = check_window_moment_bound(&pt(2.0, 32, 70.0, 0.5), 1, 3, 0, 0.1);
        assert!(cases.iter().all(|c| c.exact == 0.0 && c.status() == Status::Pass));
        let cases = check_window_moment_bound(&pt(2.0, 32, 70.0, 0.5), 1, 3, 100, 0.1);
        assert_eq!(cases.len(), 202);
        assert!(cases.iter().all(|c| c.status() == Status::Pass));
    }

    #[test]
    fn component_sum_is_the_total_bound() {
        let p = pt(2.0, 12, 30.0, 0.5);
        let (a, b, c) = total_component_bounds(&p, 1);
        let total = check_total_eps(&p, 1, None, false);
        assert_eq!(total[0].bound, a + b + c);
    }

    #[test]
    fn moment_error_vanishes_without_truncation_or_pollution() {
        let p = pt(2.0, 100, 250.0, 1.0);
        let e = MomentError::at(&p, 2).unwrap();
        assert!(e.total() < 1e-12);
    }
}
