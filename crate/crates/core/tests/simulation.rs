#![allow(clippy::needless_range_loop)]

use gsee_core::bounds::{check_window_moment_bound, Point, Status};
use gsee_core::gaussian::round_half_even;
use gsee_core::gsee::RoundContext;
use gsee_core::planner::{m0_from_ln, plan_qpe_baseline, plan_sampling_round, DepthRatioPolicy, PlanInputs};
use gsee_core::report::binomial_band;
use gsee_core::seed::{rng, STREAM_FAIL, STREAM_PERTURB};
use gsee_core::sim::{
    draw_samples, eigendecompose, mixed_distribution, Ancilla, Circuit, DenseHamiltonian, SpectrumSpec,
};
use gsee_core::Exec;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn random_hermitian_eigensystem() {
    for trial in 0..20u64 {
        let mut g = rng(11, &[STREAM_PERTURB, trial]);
        let n = 8;
        let mut e = vec![vec![[0.0; 2]; n]; n];
        for i in 0..n {
            e[i][i] = [g.random_range(-0.05..0.05), 0.0];
            for j in i + 1..n {
                let (re, im) = (g.random_range(-0.05..0.05), g.random_range(-0.05..0.05));
                e[i][j] = [re, im];
                e[j][i] = [re, -im];
            }
        }
        let mut psi: Vec<[f64; 2]> = (0..n)
            .map(|_| [g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)])
            .collect();
        let norm = psi.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>().sqrt();
        for p in &mut psi {
            p[0] /= norm;
            p[1] /= norm;
        }
        let h = DenseHamiltonian {
            entries: e.clone(),
            initial_state: psi.clone(),
        };
        let sys = eigendecompose(&h).unwrap();
        let lam = &sys.spectrum.eigenphases;
        assert!(sys.residual < 1e-12);
        assert!(lam.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = (0..n).map(|i| e[i][i][0]).sum();
        assert!((lam.iter().sum::<f64>() - trace).abs() < 1e-13);
        let frob: f64 = e.iter().flatten().map(|z| z[0] * z[0] + z[1] * z[1]).sum();
        assert!((lam.iter().map(|x| x * x).sum::<f64>() - frob).abs() < 1e-13);
        // <psi|H|psi> = sum_j lambda_j |gamma_j|^2
        let mut expect = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (a, b, c) = (psi[i], e[i][j], psi[j]);
                // conj(a) * b * c, real part
                let bc = [b[0] * c[0] - b[1] * c[1], b[0] * c[1] + b[1] * c[0]];
                expect += a[0] * bc[0] + a[1] * bc[1];
            }
        }
        let got: f64 = lam.iter().zip(&sys.spectrum.overlaps_sq).map(|(l, w)| l * w).sum();
        assert!((got - expect).abs() < 1e-13);
        assert_eq!(sys.spectrum.ground(), 0);
    }
}

#[test]
fn non_hermitian_rejected() {
    let h = DenseHamiltonian::from_real(&[vec![0.0, 0.1], vec![0.2, 0.0]], &[1.0, 0.0]);
    assert!(eigendecompose(&h).is_err());
}

#[test]
fn draws_follow_the_distribution() {
    let spec = SpectrumSpec::new(vec![-0.2, -0.17, 0.3], vec![0.5, 0.3, 0.2]).unwrap();
    let dist = Circuit::new(8, Ancilla::Gaussian { sigma_bins: 3.0 })
        .unwrap()
        .mixed(&spec, Exec::Sequential)
        .unwrap();
    let n = 1_000_000;
    let draws = draw_samples(&dist, n, 4242);
    let mut counts = vec![0u64; dist.n()];
    for z in draws {
        counts[z] += 1;
    }
    let mut chi2 = 0.0;
    let mut df = 0usize;
    let mut rest = (0u64, 0.0);
    for (z, &c) in counts.iter().enumerate() {
        let e = dist.mixed[z] * n as f64;
        if e >= 5.0 {
            chi2 += (c as f64 - e).powi(2) / e;
            df += 1;
        } else {
            rest.0 += c;
            rest.1 += e;
        }
    }
    chi2 += (rest.0 as f64 - rest.1).powi(2) / rest.1.max(1e-300);
    let crit = ChiSquared::new(df as f64).unwrap().inverse_cdf(0.9999);
    assert!(chi2 < crit, "chi2 {chi2} >= {crit} with {df} dof");
}

#[test]
fn sampling_round_failure_rate() {
    let eps = 0.01;
    let inputs = PlanInputs::new(0.01, 0.5, 0.1, eps, 0.0).with_policy(DepthRatioPolicy::Report);
    let plan = plan_sampling_round(&inputs, inputs.c * eps).unwrap();
    let theta0 = -0.2 + 0.31 / plan.grid();
    let spec = SpectrumSpec::two_state(theta0, 0.5, plan.gap_work).unwrap();
    let dist = mixed_distribution(&spec, &plan, Exec::Sequential).unwrap();
    let ctx = RoundContext::new(&dist, &plan, Some(theta0));
    let z0 = round_half_even(plan.grid() * theta0) as i64;
    let rounds = 20_000u64;
    let fails = (0..rounds)
        .filter(|&r| {
            let b = ctx.run(&mut rng(3, &[STREAM_FAIL, r])).unwrap();
            b.n_left > 0 || b.anchor > z0 + plan.k
        })
        .count() as f64;
    let rate = fails / rounds as f64;
    assert!(rate <= 0.01 + binomial_band(0.01, rounds), "rate {rate}");
}

#[test]
fn window_moment_bound_random_perturbations() {
    let p = Point {
        label: "K=32".into(),
        eta: 1.0,
        ln_inv_delta: f64::NAN,
        gap: f64::NAN,
        m: 1,
        q: 10,
        sigma: 6.0,
        k: 32,
        m0: 0,
        mu_tilde: 0.3,
        x0: 0.0,
        d_bins: 0.0,
    };
    for m in 0..=3 {
        for x0 in [0.0, 16.0] {
            let cases = check_window_moment_bound(&Point { x0, ..p.clone() }, m, 77, 100, 0.05);
            assert!(cases.len() >= 200);
            assert!(cases.iter().all(|c| c.status() == Status::Pass), "m={m} x0={x0}");
        }
    }
}

#[test]
fn per_round_count_within_four_qpe_multiples() {
    // eta = 1, alpha = 1: the Gaussian per-round count 16/3 ln(3/delta) against 4x the QPE count
    for delta in [0.1, 0.01] {
        let qpe = plan_qpe_baseline(0.01, delta).unwrap().n_samples;
        let gauss = m0_from_ln(1.0, -f64::ln(delta));
        assert!(gauss <= 4 * qpe, "delta={delta}: {gauss} vs 4 x {qpe}");
        assert!(gauss > qpe / 4);
    }
}
