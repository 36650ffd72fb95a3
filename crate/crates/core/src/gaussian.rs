//! Discretized periodic Gaussians: lattice sums, tails, continuous moments,
//! aliasing series and the special functions the bounds need.
//!
//! Units: `sigma`, `mu` and lattice indices are in bins of the 2^q outcome
//! grid. Relative quantities (turns) are obtained by dividing by 2^q.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Round to nearest, ties to even.
#[inline]
pub fn round_half_even(x: f64) -> f64 {
    x.round_ties_even()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub sigma: f64,
    pub mu: f64,
    pub q: u32,
}

impl GaussianParams {
    pub fn new(sigma: f64, mu: f64, q: u32) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if q == 0 || q > 40 {
            return Err(Error::Domain(format!("q must be in 1..=40, got {q}")));
        }
        if !mu.is_finite() {
            return Err(Error::Domain("mu must be finite".into()));
        }
        Ok(Self { sigma, mu, q })
    }

    /// mu - round_half_even(mu), in [-1/2, 1/2].
    pub fn mu_wrapped(&self) -> f64 {
        self.mu - round_half_even(self.mu)
    }

    pub fn grid(&self) -> f64 {
        (self.q as f64).exp2()
    }
}

#[inline]
pub fn g0(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * SQRT_2PI)
}

#[inline]
pub fn ln_g0(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - (sigma * SQRT_2PI).ln()
}

/// Signed residue (k - mu) mod 2^q with ties rounded to even.
pub fn wrap_mod(k: i64, mu: f64, q: u32) -> f64 {
    let n = (q as f64).exp2();
    let d = k as f64 - mu;
    d - n * round_half_even(d / n)
}

/// Compensated summation.
#[derive(Default, Clone, Copy, Debug)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Integer range [lo, hi] clipped to where Gaussian terms centred at `mu`
/// are within e^-800 of the range maximum. `None` ends are unbounded.
fn effective_range(lo: Option<i64>, hi: Option<i64>, mu: f64, sigma: f64) -> Option<(i64, i64)> {
    let lo_v = lo.unwrap_or(i64::MIN / 4);
    let hi_v = hi.unwrap_or(i64::MAX / 4);
    if lo_v > hi_v {
        return None;
    }
    let centre = (mu.round() as i64).clamp(lo_v, hi_v);
    let w = (40.0 * sigma + 12.0).ceil() as i64;
    Some((lo_v.max(centre - w), hi_v.min(centre + w)))
}

/// sum_{j=lo}^{hi} (x0 + j)^m g0(j, mu, sigma)
pub fn moment_sum(m: u32, x0: f64, mu: f64, sigma: f64, lo: Option<i64>, hi: Option<i64>) -> f64 {
    let Some((a, b)) = effective_range(lo, hi, mu, sigma) else {
        return 0.0;
    };
    let mut acc = Neumaier::default();
    for j in a..=b {
        let x = j as f64;
        acc.add((x0 + x).powi(m as i32) * g0(x, mu, sigma));
    }
    acc.total()
}

/// ln sum_{j=lo}^{hi} g0(j, mu, sigma); -inf for an empty range.
pub fn ln_sum_g0(mu: f64, sigma: f64, lo: Option<i64>, hi: Option<i64>) -> f64 {
    let Some((a, b)) = effective_range(lo, hi, mu, sigma) else {
        return f64::NEG_INFINITY;
    };
    let peak = (mu.round() as i64).clamp(a, b);
    let e_max = ln_g0(peak as f64, mu, sigma);
    let mut acc = Neumaier::default();
    for j in a..=b {
        acc.add((ln_g0(j as f64, mu, sigma) - e_max).exp());
    }
    e_max + acc.total().ln()
}

/// ln(e^a + e^b)
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Normalization over the grid k in [-2^q/2, 2^q/2 - 1] for centre mu_t.
pub fn normalization_at(sigma: f64, mu_t: f64, q: u32) -> f64 {
    let half = 1i64 << (q - 1);
    moment_sum(0, 0.0, mu_t, sigma, Some(-half), Some(half - 1))
}

pub fn normalization_n(p: &GaussianParams) -> f64 {
    normalization_at(p.sigma, p.mu_wrapped(), p.q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailMassResult {
    pub exact_sum: f64,
    pub analytic_bound: f64,
    /// sigma <= K - 1/2, where the erfc-to-exp chain is valid.
    pub preconditions_met: bool,
}

/// Two-sided lattice mass beyond K bins: sum_{|n| > K} g0(n, mu_t).
pub fn tail_sum(k: i64, mu_t: f64, sigma: f64) -> f64 {
    moment_sum(0, 0.0, mu_t, sigma, Some(k + 1), None) + moment_sum(0, 0.0, mu_t, sigma, None, Some(-k - 1))
}

pub fn ln_tail_sum(k: i64, mu_t: f64, sigma: f64) -> f64 {
    ln_add(
        ln_sum_g0(mu_t, sigma, Some(k + 1), None),
        ln_sum_g0(mu_t, sigma, None, Some(-k - 1)),
    )
}

pub fn tail_mass(k: i64, p: &GaussianParams) -> Result<TailMassResult> {
    if k <= 0 {
        return Err(Error::Domain(format!("tail_mass needs K >= 1, got {k}")));
    }
    let kf = k as f64 - 0.5;
    Ok(TailMassResult {
        exact_sum: tail_sum(k, p.mu_wrapped(), p.sigma),
        analytic_bound: (-kf * kf / (2.0 * p.sigma * p.sigma)).exp(),
        preconditions_met: p.sigma <= kf,
    })
}

/// G_m(k) = (i/2pi)^m d^m/dk^m G_0(k), G_0(k) = exp(-2 pi^2 sigma^2 k^2 - 2 pi i mu k).
/// G_m(0) is the m-th raw moment of the continuous Gaussian.
pub fn continuous_moment_gm(k: f64, m: u32, mu: f64, sigma: f64) -> Result<Complex64> {
    if m > 4 {
        return Err(Error::Domain(format!("moment order {m} > 4 is not supported")));
    }
    let a = 2.0 * PI * PI * sigma * sigma;
    let b = 2.0 * PI * mu;
    let d1 = Complex64::new(-2.0 * a * k, -b);
    let d2 = Complex64::new(-2.0 * a, 0.0);
    let g = Complex64::new(-a * k * k, -b * k).exp();
    let poly = match m {
        0 => Complex64::new(1.0, 0.0),
        1 => d1,
        2 => d1 * d1 + d2,
        3 => d1 * d1 * d1 + 3.0 * d1 * d2,
        _ => d1.powu(4) + 6.0 * d1 * d1 * d2 + 3.0 * d2 * d2,
    };
    let pre = Complex64::new(0.0, 1.0 / (2.0 * PI)).powu(m);
    Ok(pre * poly * g)
}

/// Real continuous moment G_m(0).
pub fn continuous_moment(m: u32, mu: f64, sigma: f64) -> Result<f64> {
    Ok(continuous_moment_gm(0.0, m, mu, sigma)?.re)
}

fn alias_k_max(m: u32, mu: f64, sigma: f64) -> u64 {
    let a = 2.0 * PI * PI * sigma * sigma;
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        let env = -a * kf * kf + (m as f64) * (2.0 * a * kf + 2.0 * PI * mu.abs() + 2.0).ln();
        if env < -700.0 || k > 10_000_000 {
            return k;
        }
        k += 1;
    }
}

/// Poisson route: G~_m - G_m(0) = sum_{k != 0} G_m(-k) (real).
pub fn alias_signed(m: u32, mu: f64, sigma: f64) -> Result<f64> {
    let kmax = alias_k_max(m, mu, sigma);
    let mut acc = Neumaier::default();
    for k in 1..=kmax {
        acc.add(2.0 * continuous_moment_gm(k as f64, m, mu, sigma)?.re);
    }
    Ok(acc.total())
}

/// sum_{k != 0} |G_m(-k)|
pub fn alias_abs_series(m: u32, mu: f64, sigma: f64, k_max: Option<u64>) -> Result<f64> {
    let kmax = k_max.unwrap_or_else(|| alias_k_max(m, mu, sigma));
    let mut acc = Neumaier::default();
    for k in 1..=kmax {
        acc.add(2.0 * continuous_moment_gm(k as f64, m, mu, sigma)?.norm());
    }
    Ok(acc.total())
}

/// ln sum_{k != 0} |G_m(-k)|, stable when the terms underflow.
pub fn ln_alias_abs_series(m: u32, mu: f64, sigma: f64) -> Result<f64> {
    if m > 4 {
        return Err(Error::Domain(format!("moment order {m} > 4 is not supported")));
    }
    let a = 2.0 * PI * PI * sigma * sigma;
    let b = 2.0 * PI * mu;
    let d2 = Complex64::new(-2.0 * a, 0.0);
    let kmax = alias_k_max(m, mu, sigma).max(4);
    let mut acc = f64::NEG_INFINITY;
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        let d1 = Complex64::new(-2.0 * a * kf, -b);
        let poly = match m {
            0 => Complex64::new(1.0, 0.0),
            1 => d1,
            2 => d1 * d1 + d2,
            3 => d1 * d1 * d1 + 3.0 * d1 * d2,
            _ => d1.powu(4) + 6.0 * d1 * d1 * d2 + 3.0 * d2 * d2,
        };
        let term = poly.norm().ln() - a * kf * kf - m as f64 * (2.0 * PI).ln();
        acc = ln_add(acc, term);
        if (k >= kmax && term < acc - 40.0) || k > 10_000_000 {
            break;
        }
        k += 1;
    }
    Ok(2f64.ln() + acc)
}

/// ln of [`disc_error_bound`].
pub fn ln_disc_error_bound(m: u32, mu: f64, sigma: f64, delta1: f64) -> f64 {
    let s2 = sigma * sigma;
    4f64.ln() + 2.0 * PI * delta1 * mu.abs() + 2.0 * PI * PI * (delta1 * delta1 + 2.0 * delta1) * s2
        - 2.0 * PI * PI * s2
        + factorial(m).ln()
        - m as f64 * (PI * delta1).ln()
}

/// ln of [`disc_error_bound_intermediate`].
pub fn ln_disc_error_bound_intermediate(m: u32, mu: f64, sigma: f64, delta1: f64) -> f64 {
    let s2 = sigma * sigma;
    let r = (-2.0 * PI * PI * s2 * (1.0 - 2.0 * delta1)).exp();
    2f64.ln() + 2.0 * PI * delta1 * mu.abs() + 2.0 * PI * PI * (delta1 * delta1 + 2.0 * delta1) * s2
        - 2.0 * PI * PI * s2
        + factorial(m).ln()
        + m as f64 * 2f64.ln()
        - m as f64 * (2.0 * PI * delta1).ln()
        - (-r).ln_1p()
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Final form: 4 e^{2 pi d1 |mu|} e^{2 pi^2 (d1^2 + 2 d1) sigma^2} e^{-2 pi^2 sigma^2} m! / (pi d1)^m
pub fn disc_error_bound(m: u32, mu: f64, sigma: f64, delta1: f64) -> f64 {
    let s2 = sigma * sigma;
    4.0 * (2.0 * PI * delta1 * mu.abs() + 2.0 * PI * PI * (delta1 * delta1 + 2.0 * delta1) * s2 - 2.0 * PI * PI * s2)
        .exp()
        * factorial(m)
        / (PI * delta1).powi(m as i32)
}

/// Pre-simplification form with the geometric factor 1/(1 - e^{-2 pi^2 sigma^2 (1 - 2 d1)}).
pub fn disc_error_bound_intermediate(m: u32, mu: f64, sigma: f64, delta1: f64) -> f64 {
    let s2 = sigma * sigma;
    let r = (-2.0 * PI * PI * s2 * (1.0 - 2.0 * delta1)).exp();
    2.0 * (2.0 * PI * delta1 * mu.abs() + 2.0 * PI * PI * (delta1 * delta1 + 2.0 * delta1) * s2 - 2.0 * PI * PI * s2)
        .exp()
        * factorial(m)
        * 2f64.powi(m as i32)
        / (2.0 * PI * delta1).powi(m as i32)
        / (1.0 - r)
}

/// exp(-2 pi^2 sigma^2 (1 - 2 d1)) <= 1/2
pub fn disc_error_precondition(sigma: f64, delta1: f64) -> bool {
    (-2.0 * PI * PI * sigma * sigma * (1.0 - 2.0 * delta1)).exp() <= 0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AliasingResult {
    /// |G_m(0) - G~_m| via the Poisson series.
    pub exact: f64,
    /// sum_{k != 0} |G_m(-k)|
    pub abs_series: f64,
    pub bound: f64,
    pub intermediate_bound: f64,
    pub preconditions_met: bool,
}

pub fn aliasing_error(m: u32, p: &GaussianParams, k_max: Option<u64>, delta1: f64) -> Result<AliasingResult> {
    let exact = alias_signed(m, p.mu, p.sigma)?.abs();
    Ok(AliasingResult {
        exact,
        abs_series: alias_abs_series(m, p.mu, p.sigma, k_max)?,
        bound: disc_error_bound(m, p.mu, p.sigma, delta1),
        intermediate_bound: disc_error_bound_intermediate(m, p.mu, p.sigma, delta1),
        preconditions_met: delta1 > 0.0 && disc_error_precondition(p.sigma, delta1),
    })
}

/// d - ln(1 + d), accurate near 0.
fn d_minus_ln1p(d: f64) -> f64 {
    if d.abs() < 1e-3 {
        let mut term = d * d;
        let mut acc = 0.0;
        for n in 2..12 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * term / n as f64;
            term *= d;
        }
        acc
    } else {
        d - d.ln_1p()
    }
}

/// -W_{-1}(-e^{-u-1}) for u >= 0, i.e. the root w >= 1 of w - ln w = u + 1.
pub fn neg_wm1_of_neg_exp(u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    let s = (2.0 * u).sqrt();
    // sandwich midpoint, in terms of d = w - 1
    let mut d = s + (2.0 * u / 3.0 + u) / 2.0;
    for _ in 0..200 {
        let w = 1.0 + d;
        let f = d_minus_ln1p(d) - u;
        let f1 = d / w;
        let f2 = 1.0 / (w * w);
        let step = 2.0 * f * f1 / (2.0 * f1 * f1 - f * f2);
        let next = (d - step).max(d * 0.5);
        if (next - d).abs() <= 4.0 * f64::EPSILON * next.abs() {
            d = next;
            break;
        }
        d = next;
    }
    1.0 + d
}

/// Lower real branch W_{-1}(y) for -1/e <= y < 0.
pub fn lambert_wm1(y: f64) -> Result<f64> {
    let branch = -(-1.0f64).exp();
    if (y - branch).abs() <= 4.0 * f64::EPSILON {
        return Ok(-1.0);
    }
    if !(y > branch && y < 0.0) {
        return Err(Error::Domain(format!("lambert_wm1 domain is [-1/e, 0), got {y}")));
    }
    let u = -(-y).ln() - 1.0;
    Ok(-neg_wm1_of_neg_exp(u.max(0.0)))
}

/// Cauchy estimate M n! 2^n / r^n.
pub fn derivative_bound(n: u32, r: f64, m_max: f64) -> f64 {
    m_max * factorial(n) * 2f64.powi(n as i32) / r.powi(n as i32)
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

/// Lambert sandwich, returned as (1 + sqrt(2u) + 2u/3, 1 + sqrt(2u) + u, 1 + 3u).
pub fn lambert_sandwich(u: f64) -> (f64, f64, f64) {
    let s = (2.0 * u).sqrt();
    (1.0 + s + 2.0 * u / 3.0, 1.0 + s + u, 1.0 + 3.0 * u)
}

/// e, exposed for the predicates that compare against it.
pub const EULER: f64 = E;

/// Supremum of `f` over mu_t in the closed interval [-1/2, 1/2]: a 33-point
/// grid followed by golden-section refinement around the best grid point.
/// Returns (argmax, max).
pub fn sup_over_mu_tilde<F: Fn(f64) -> f64>(f: F) -> (f64, f64) {
    const N: usize = 33;
    let xs: Vec<f64> = (0..N).map(|i| -0.5 + i as f64 / (N - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let (ib, _) = vals.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
    );
    let (mut best_x, mut best_v) = (xs[ib], vals[ib]);
    let mut a = xs[ib.saturating_sub(1)];
    let mut b = xs[(ib + 1).min(N - 1)];
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best_v {
            best_x = x;
            best_v = v;
        }
    }
    (best_x, best_v)
}

/// Infimum counterpart of [`sup_over_mu_tilde`].
pub fn inf_over_mu_tilde<F: Fn(f64) -> f64>(f: F) -> (f64, f64) {
    let (x, v) = sup_over_mu_tilde(|m| -f(m));
    (x, -v)
}
