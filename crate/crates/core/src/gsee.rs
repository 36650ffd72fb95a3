//! Sample-and-trim rounds, the Gaussian GSEE estimator and the QPE baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gaussian::round_half_even;
use crate::planner::{plan_gsee, plan_qpe_baseline, PlanInputs, PlanParams, QpeBaseline};
use crate::seed::{derive_seed, rng, STREAM_QPE, STREAM_ROUND};
use crate::sim::{signed_outcome, Ancilla, Circuit, OutcomeDistribution, Sampler, SpectrumSpec};

/// Outcome of one sample-and-trim round. Residues are signed bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basket {
    pub anchor: i64,
    pub members: Vec<i64>,
    pub round_samples: Vec<i64>,
    /// Samples in (anchor + 2K, anchor + 2K + floor(Delta 2^q / 3)].
    pub n_dark: u64,
    /// Samples left of the ground window, when the ground phase is known.
    pub n_left: u64,
}

/// Everything a round needs, built once per (spectrum, plan).
#[derive(Clone, Debug)]
pub struct RoundContext {
    pub q: u32,
    pub m0: u64,
    pub k: i64,
    pub dark_len: i64,
    /// Signed outcomes below this count as left-tail samples.
    pub left_edge: Option<i64>,
    sampler: Sampler,
}

impl RoundContext {
    pub fn new(dist: &OutcomeDistribution, plan: &PlanParams, ground_phase: Option<f64>) -> Self {
        let n = (plan.q as f64).exp2();
        Self {
            q: plan.q,
            m0: plan.m0,
            k: plan.k,
            dark_len: plan.dark_len(),
            left_edge: ground_phase.map(|t| round_half_even(n * t) as i64 - plan.k),
            sampler: Sampler::new(&dist.mixed),
        }
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Basket> {
        if self.m0 == 0 {
            return Err(Error::EmptyRound);
        }
        let round_samples: Vec<i64> = (0..self.m0)
            .map(|_| signed_outcome(self.sampler.sample(rng), self.q))
            .collect();
        Ok(trim(round_samples, self.k, self.dark_len, self.left_edge))
    }
}

/// Lowest signed outcome is the anchor; members lie within 2K above it.
pub fn trim(round_samples: Vec<i64>, k: i64, dark_len: i64, left_edge: Option<i64>) -> Basket {
    let anchor = *round_samples.iter().min().expect("non-empty round");
    let top = anchor + 2 * k;
    let members: Vec<i64> = round_samples.iter().copied().filter(|&s| s <= top).collect();
    let n_dark = round_samples
        .iter()
        .filter(|&&s| s > top && s <= top + dark_len)
        .count() as u64;
    let n_left = left_edge.map_or(0, |e| round_samples.iter().filter(|&&s| s < e).count() as u64);
    Basket {
        anchor,
        members,
        round_samples,
        n_dark,
        n_left,
    }
}

/// Draws M0 samples from `dist` and trims them.
pub fn run_sampling_round<R: Rng + ?Sized>(
    dist: &OutcomeDistribution,
    plan: &PlanParams,
    rng: &mut R,
) -> Result<Basket> {
    RoundContext::new(dist, plan, None).run(rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub m: u32,
    /// Bins^m.
    pub value: f64,
    /// value / (2^q)^m
    pub relative: f64,
}

pub fn moment_from_basket(basket: &Basket, q: u32, m: u32) -> Result<MomentSample> {
    if basket.members.is_empty() {
        return Err(Error::EmptyBasket);
    }
    let value = basket.members.iter().map(|&s| (s as f64).powi(m as i32)).sum::<f64>() / basket.members.len() as f64;
    Ok(MomentSample {
        m,
        value,
        relative: value / (q as f64 * m as f64).exp2(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub empty_baskets: u64,
    pub dark_rounds: u64,
    pub n_dark: u64,
    pub n_left: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    /// Turns.
    pub mu_hat: f64,
    pub per_round_means: Vec<f64>,
    pub m_used: u64,
    pub q: u32,
    pub m0: u64,
    pub diagnostics: Diagnostics,
}

/// Plan, distribution and sampler for repeated GSEE runs on one spectrum.
#[derive(Clone, Debug)]
pub struct GseeRunner {
    pub plan: PlanParams,
    pub spectrum: SpectrumSpec,
    ctx: RoundContext,
    exec: Exec,
}

impl GseeRunner {
    pub fn new(spec: &SpectrumSpec, inputs: &PlanInputs, exec: Exec) -> Result<Self> {
        let plan = plan_gsee(inputs)?;
        Self::with_plan(spec, plan, exec)
    }

    pub fn with_plan(spec: &SpectrumSpec, plan: PlanParams, exec: Exec) -> Result<Self> {
        spec.check_against(plan.gap_work)?;
        let dist = Circuit::for_plan(&plan)?.mixed(spec, exec)?;
        let ctx = RoundContext::new(&dist, &plan, Some(spec.ground_energy()));
        Ok(Self {
            plan,
            spectrum: spec.clone(),
            ctx,
            exec,
        })
    }

    /// M rounds, round r drawing from stream [ROUND, r] of `seed`.
    pub fn run(&self, seed: u64) -> Result<EnergyEstimate> {
        let big_m = self.plan.big_m as usize;
        let q = self.plan.q;
        let rounds: Vec<Result<(Basket, f64)>> = self.exec.map(big_m, |r| {
            let mut g = rng(seed, &[STREAM_ROUND, r as u64]);
            let basket = self.ctx.run(&mut g)?;
            let mean = moment_from_basket(&basket, q, 1)?.relative;
            Ok((basket, mean))
        });
        let mut diagnostics = Diagnostics::default();
        let mut per_round_means = Vec::with_capacity(big_m);
        for item in rounds {
            let (basket, mean) = item?;
            if basket.members.is_empty() {
                diagnostics.empty_baskets += 1;
            }
            if basket.n_dark > 0 {
                diagnostics.dark_rounds += 1;
            }
            diagnostics.n_dark += basket.n_dark;
            diagnostics.n_left += basket.n_left;
            per_round_means.push(mean);
        }
        let mu_hat = per_round_means.iter().sum::<f64>() / big_m as f64;
        Ok(EnergyEstimate {
            mu_hat,
            per_round_means,
            m_used: big_m as u64,
            q,
            m0: self.plan.m0,
            diagnostics,
        })
    }
}

pub fn run_gsee(spec: &SpectrumSpec, inputs: &PlanInputs, seed: u64, exec: Exec) -> Result<EnergyEstimate> {
    GseeRunner::new(spec, inputs, exec)?.run(seed)
}

/// Rectangular-window QPE on an eigenstate with majority vote.
#[derive(Clone, Debug)]
pub struct QpeRunner {
    pub baseline: QpeBaseline,
    pub theta0: f64,
    pub epsilon: f64,
    pub dist: Vec<f64>,
    sampler: Sampler,
}

impl QpeRunner {
    pub fn new(spec: &SpectrumSpec, epsilon: f64, delta: f64) -> Result<Self> {
        if spec.eta() != 1.0 {
            return Err(Error::Invalid(format!(
                "QPE baseline needs an eigenstate input, ground overlap is {}",
                spec.eta()
            )));
        }
        let baseline = plan_qpe_baseline(epsilon, delta)?;
        let theta0 = spec.ground_energy();
        let dist = Circuit::new(baseline.q_qpe, Ancilla::Uniform)?.distribution(theta0)?;
        let sampler = Sampler::new(&dist);
        Ok(Self {
            baseline,
            theta0,
            epsilon,
            dist,
            sampler,
        })
    }

    /// Exact single-shot mass on bins within epsilon of theta0 (cyclic distance).
    pub fn success_mass(&self) -> f64 {
        let n = (self.baseline.q_qpe as f64).exp2();
        (0..self.dist.len())
            .filter(|&z| {
                let d = (z as f64 / n - self.theta0).rem_euclid(1.0);
                d.min(1.0 - d) <= self.epsilon
            })
            .map(|z| self.dist[z])
            .sum()
    }

    pub fn run(&self, seed: u64) -> EnergyEstimate {
        let q = self.baseline.q_qpe;
        let n = 1usize << q;
        let mut g = rng(seed, &[STREAM_QPE]);
        let mut counts = vec![0u64; n];
        for _ in 0..self.baseline.n_samples {
            counts[self.sampler.sample(&mut g)] += 1;
        }
        // mode over signed bins, ties toward the lower bin
        let mode = (0..n)
            .map(|z| (signed_outcome(z, q), counts[z]))
            .fold((i64::MAX, 0u64), |best, (s, c)| {
                if c > best.1 || (c == best.1 && s < best.0) {
                    (s, c)
                } else {
                    best
                }
            });
        let mu_hat = mode.0 as f64 / n as f64;
        EnergyEstimate {
            mu_hat,
            per_round_means: vec![mu_hat],
            m_used: 1,
            q,
            m0: self.baseline.n_samples,
            diagnostics: Diagnostics::default(),
        }
    }
}

pub fn run_qpe_baseline(spec: &SpectrumSpec, epsilon: f64, delta: f64, seed: u64) -> Result<EnergyEstimate> {
    Ok(QpeRunner::new(spec, epsilon, delta)?.run(seed))
}

/// M >= b^2/(2 (eps - c eps)^2) ln(2/delta)
pub fn hoeffding_sample_count(b: f64, epsilon: f64, c: f64, delta: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::Invalid(format!("c must be in [0, 1), got {c}")));
    }
    if !(epsilon > 0.0 && b > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid("need epsilon > 0, b > 0, 0 < delta < 1".into()));
    }
    let d = epsilon - c * epsilon;
    Ok((b * b / (2.0 * d * d) * (2.0 / delta).ln()).ceil() as u64)
}

/// Count of runs with `failed(run_seed)` true, run i seeded by derive_seed(master, [stream, i]).
pub fn count_failures<F>(runs: usize, master: u64, stream: u64, exec: Exec, failed: F) -> Result<u64>
where
    F: Fn(u64) -> Result<bool> + Sync + Send,
{
    let out = exec.map(runs, |i| failed(derive_seed(master, &[stream, i as u64])));
    let mut n = 0;
    for r in out {
        n += r? as u64;
    }
    Ok(n)
}
