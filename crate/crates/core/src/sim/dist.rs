use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::spectrum::SpectrumSpec;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gaussian::{g0, ln_add, ln_g0, wrap_mod};
use crate::planner::PlanParams;

/// Ancilla register preparation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ancilla {
    /// Gaussian whose outcome distribution has std `sigma_bins` (frequency side).
    Gaussian { sigma_bins: f64 },
    /// Rectangular window, i.e. textbook QPE.
    Uniform,
}

/// Signed two's-complement index of `t` on a 2^q grid.
pub fn signed_index(t: usize, q: u32) -> i64 {
    let n = 1i64 << q;
    let t = t as i64;
    if t >= n / 2 {
        t - n
    } else {
        t
    }
}

/// Bin `z` mapped to the signed range [-2^q/2, 2^q/2).
pub fn signed_outcome(z: usize, q: u32) -> i64 {
    signed_index(z, q)
}

/// a_t ~ exp(-r^2/(4 sigma_t^2)), sigma_t = 2^q/(4 pi sigma_bins), r the signed index.
pub fn gaussian_amplitudes(q: u32, sigma_bins: f64) -> Result<Vec<f64>> {
    if !(sigma_bins > 0.0 && sigma_bins.is_finite()) {
        return Err(Error::Invalid(format!("sigma must be positive, got {sigma_bins}")));
    }
    let n = 1usize << q;
    let sigma_t = n as f64 / (4.0 * PI * sigma_bins);
    let mut a: Vec<f64> = (0..n)
        .map(|t| {
            let r = signed_index(t, q) as f64;
            (-r * r / (4.0 * sigma_t * sigma_t)).exp()
        })
        .collect();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut a {
        *x /= norm;
    }
    Ok(a)
}

pub fn uniform_amplitudes(q: u32) -> Vec<f64> {
    let n = 1usize << q;
    vec![1.0 / (n as f64).sqrt(); n]
}

/// Ancilla amplitudes for a plan's sigma~ and q.
pub fn gaussian_ancilla_amplitudes(plan: &PlanParams) -> Result<Vec<f64>> {
    gaussian_amplitudes(plan.q, plan.sigma_bins)
}

/// Fixed ancilla state and FFT plan on a 2^q grid.
#[derive(Clone)]
pub struct Circuit {
    q: u32,
    ancilla: Ancilla,
    amps: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Circuit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Circuit")
            .field("q", &self.q)
            .field("ancilla", &self.ancilla)
            .finish()
    }
}

impl Circuit {
    pub fn new(q: u32, ancilla: Ancilla) -> Result<Self> {
        if !(1..=26).contains(&q) {
            return Err(Error::Invalid(format!("q must be in 1..=26, got {q}")));
        }
        let amps = match ancilla {
            Ancilla::Gaussian { sigma_bins } => gaussian_amplitudes(q, sigma_bins)?,
            Ancilla::Uniform => uniform_amplitudes(q),
        };
        let fft = FftPlanner::new().plan_fft_forward(1usize << q);
        Ok(Self { q, ancilla, amps, fft })
    }

    pub fn for_plan(plan: &PlanParams) -> Result<Self> {
        Self::new(
            plan.q,
            Ancilla::Gaussian {
                sigma_bins: plan.sigma_bins,
            },
        )
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> usize {
        1usize << self.q
    }

    pub fn ancilla(&self) -> Ancilla {
        self.ancilla
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    /// P(z) = |sum_t a_t exp(2 pi i r (theta - z/2^q))|^2 / 2^q, peaked at z = 2^q theta.
    pub fn distribution(&self, theta: f64) -> Result<Vec<f64>> {
        if !(theta.abs() <= 0.5) {
            return Err(Error::Invalid(format!("eigenphase {theta} outside [-1/2, 1/2]")));
        }
        let n = self.n();
        let mut buf: Vec<Complex64> = self
            .amps
            .iter()
            .enumerate()
            .map(|(t, &a)| {
                let x = (signed_index(t, self.q) as f64 * theta).rem_euclid(1.0);
                Complex64::from_polar(a, 2.0 * PI * x)
            })
            .collect();
        self.fft.process(&mut buf);
        let inv = 1.0 / n as f64;
        Ok(buf.iter().map(|c| c.norm_sqr() * inv).collect())
    }

    /// Per-eigenstate distributions (parallel over eigenstates) and their mixture.
    pub fn mixed(&self, spec: &SpectrumSpec, exec: Exec) -> Result<OutcomeDistribution> {
        let per: Vec<Result<Vec<f64>>> = exec.map(spec.len(), |j| self.distribution(spec.eigenphases[j]));
        let per_eigenstate = per.into_iter().collect::<Result<Vec<_>>>()?;
        let n = self.n();
        let mut mixed = vec![0.0; n];
        for (p, &w) in per_eigenstate.iter().zip(&spec.overlaps_sq) {
            for (m, &x) in mixed.iter_mut().zip(p) {
                *m += w * x;
            }
        }
        Ok(OutcomeDistribution {
            q: self.q,
            weights: spec.overlaps_sq.clone(),
            per_eigenstate,
            mixed,
        })
    }
}

pub fn eigenstate_distribution(theta: f64, plan: &PlanParams) -> Result<Vec<f64>> {
    Circuit::for_plan(plan)?.distribution(theta)
}

/// Validates the spectrum against the plan's gap and norm promises first.
pub fn mixed_distribution(spec: &SpectrumSpec, plan: &PlanParams, exec: Exec) -> Result<OutcomeDistribution> {
    spec.check_against(plan.gap_work)?;
    Circuit::for_plan(plan)?.mixed(spec, exec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub q: u32,
    pub weights: Vec<f64>,
    pub per_eigenstate: Vec<Vec<f64>>,
    pub mixed: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn n(&self) -> usize {
        1usize << self.q
    }

    /// Mixed mass on signed outcomes lo..=hi (taken mod 2^q).
    pub fn mass_signed(&self, lo: i64, hi: i64) -> f64 {
        mass_signed(&self.mixed, self.q, lo, hi)
    }

    /// Columns z, P_mixed, P_0..P_{J-1}.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["z".to_string(), "P_mixed".to_string()];
        header.extend((0..self.per_eigenstate.len()).map(|j| format!("P_{j}")));
        out.write_record(&header)?;
        for z in 0..self.n() {
            let mut row = vec![z.to_string(), format!("{:.16e}", self.mixed[z])];
            row.extend(self.per_eigenstate.iter().map(|p| format!("{:.16e}", p[z])));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn mass_signed(p: &[f64], q: u32, lo: i64, hi: i64) -> f64 {
    let n = 1i64 << q;
    (lo..=hi).map(|s| p[s.rem_euclid(n) as usize]).sum()
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Closed form (1/N) g0(wrap(z - 2^q theta), sigma), the wrapped discretized Gaussian.
pub fn ideal_distribution(theta: f64, q: u32, sigma_bins: f64) -> Vec<f64> {
    let n = 1usize << q;
    let mu = theta * n as f64;
    let raw: Vec<f64> = (0..n).map(|z| g0(wrap_mod(z as i64, mu, q), 0.0, sigma_bins)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn ln_wrapped(theta: f64, q: u32, sigma_bins: f64, lo: i64, hi: i64) -> f64 {
    let mu = theta * (1i64 << q) as f64;
    (lo..=hi).fold(f64::NEG_INFINITY, |acc, s| {
        ln_add(acc, ln_g0(wrap_mod(s, mu, q), 0.0, sigma_bins))
    })
}

/// ln of the closed-form mixture's mass on signed outcomes lo..=hi.
/// Resolves masses far below the FFT noise floor.
pub fn ln_ideal_mass(spec: &SpectrumSpec, q: u32, sigma_bins: f64, lo: i64, hi: i64) -> f64 {
    let n = 1i64 << q;
    let (lo, hi) = (lo.max(-n / 2), hi.min(n / 2 - 1));
    if lo > hi {
        return f64::NEG_INFINITY;
    }
    spec.eigenphases
        .iter()
        .zip(&spec.overlaps_sq)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&t, &w)| w.ln() + ln_wrapped(t, q, sigma_bins, lo, hi) - ln_wrapped(t, q, sigma_bins, -n / 2, n / 2 - 1))
        .fold(f64::NEG_INFINITY, ln_add)
}
