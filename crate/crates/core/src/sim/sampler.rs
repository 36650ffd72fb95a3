use rand::Rng;

use super::dist::OutcomeDistribution;
use crate::seed::{rng, STREAM_DRAW};

/// Inverse-CDF sampler with a guide table (O(1) expected per draw).
#[derive(Clone, Debug)]
pub struct Sampler {
    cdf: Vec<f64>,
    guide: Vec<u32>,
    total: f64,
}

impl Sampler {
    pub fn new(p: &[f64]) -> Self {
        assert!(!p.is_empty() && p.len() <= u32::MAX as usize);
        let mut cdf = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        for &x in p {
            acc += x.max(0.0);
            cdf.push(acc);
        }
        let total = acc;
        assert!(total > 0.0, "distribution has no mass");
        let g = p.len();
        let mut guide = Vec::with_capacity(g);
        let mut j = 0usize;
        for i in 0..g {
            let level = total * i as f64 / g as f64;
            while j + 1 < cdf.len() && cdf[j] <= level {
                j += 1;
            }
            guide.push(j as u32);
        }
        Self { cdf, guide, total }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Maps u in [0, 1) to an outcome.
    pub fn invert(&self, u: f64) -> usize {
        let x = u * self.total;
        let slot = ((u * self.guide.len() as f64) as usize).min(self.guide.len() - 1);
        let mut j = self.guide[slot] as usize;
        while j + 1 < self.cdf.len() && self.cdf[j] <= x {
            j += 1;
        }
        j
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.invert(rng.random::<f64>())
    }
}

/// n i.i.d. draws from the mixed distribution on the stream [DRAW] of `seed`.
pub fn draw_samples(dist: &OutcomeDistribution, n: usize, seed: u64) -> Vec<usize> {
    let s = Sampler::new(&dist.mixed);
    let mut r = rng(seed, &[STREAM_DRAW]);
    (0..n).map(|_| s.sample(&mut r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_hits_boundaries() {
        let s = Sampler::new(&[0.25, 0.0, 0.5, 0.25]);
        assert_eq!(s.invert(0.0), 0);
        assert_eq!(s.invert(0.2499), 0);
        assert_eq!(s.invert(0.25), 2);
        assert_eq!(s.invert(0.7499), 2);
        assert_eq!(s.invert(0.75), 3);
        assert_eq!(s.invert(0.999_999), 3);
    }

    #[test]
    fn point_mass() {
        let mut p = vec![0.0; 16];
        p[11] = 1.0;
        let d = OutcomeDistribution {
            q: 4,
            weights: vec![1.0],
            per_eigenstate: vec![p.clone()],
            mixed: p,
        };
        assert!(draw_samples(&d, 1000, 7).iter().all(|&z| z == 11));
    }

    #[test]
    fn deterministic() {
        let p = vec![0.1, 0.2, 0.3, 0.4];
        let d = OutcomeDistribution {
            q: 2,
            weights: vec![1.0],
            per_eigenstate: vec![p.clone()],
            mixed: p,
        };
        assert_eq!(draw_samples(&d, 500, 99), draw_samples(&d, 500, 99));
        assert_ne!(draw_samples(&d, 500, 99), draw_samples(&d, 500, 100));
    }
}
