//! Seeded, scheduling-independent random sampling.
//!
//! Every random quantity is drawn from a ChaCha stream selected by a
//! `(seed, stream)` pair, and work is cut into fixed-size batches with one
//! stream each. Results are folded in batch order, so they never depend on
//! how rayon schedules the batches.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

/// Antithetic pairs per batch.
pub const BATCH_PAIRS: usize = 2048;

/// A generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent sub-seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// A uniformly distributed unit vector (normalized Gaussian).
pub fn unit_sphere<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = gaussian_vector(rng, dim);
        let norm = v.norm();
        if norm > 1e-300 {
            return v / norm;
        }
    }
}

/// A uniform point of the open unit ball: a uniform direction scaled by
/// `U^(1/dim)`.
pub fn unit_ball<R: Rng>(rng: &mut R, dim: usize) -> DVector<f64> {
    let dir = unit_sphere(rng, dim);
    let u: f64 = rng.gen();
    dir * u.powf(1.0 / dim as f64)
}

/// Where Monte-Carlo points are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Uniform on the ball.
    Ball,
    /// Uniform on its boundary sphere.
    Sphere,
}

/// A Monte-Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            std_error: 0.0,
            samples: 0,
        }
    }

    /// Whether `expected` lies within `k` standard errors, with an absolute
    /// floor for estimates whose error bar collapsed to zero.
    pub fn within(&self, expected: f64, k: f64) -> bool {
        let slack = k * self.std_error + 1e-12 * expected.abs().max(1.0);
        (self.value - expected).abs() <= slack
    }
}

/// Running mean and sum of squared deviations (Welford), mergeable in a
/// fixed order (Chan et al.).
#[derive(Clone, Copy)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Moments {
    fn new() -> Self {
        Moments {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, y: f64) {
        self.count += 1;
        let delta = y - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (y - self.mean);
        self.min = self.min.min(y);
        self.max = self.max.max(y);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * nb / n,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        }
    }
}

/// Mean of `f` over `measure` on `B_radius(center)` using antithetic pairs
/// `(c + r u, c - r u)`; the standard error is computed from pair means.
///
/// `samples` is rounded up to an even count. Deterministic in `seed`.
pub fn antithetic_mean<F>(
    center: &DVector<f64>,
    radius: f64,
    measure: Measure,
    samples: usize,
    seed: u64,
    f: F,
) -> Estimate
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
{
    let dim = center.len();
    let pairs = samples.div_ceil(2).max(1);
    let batches = pairs.div_ceil(BATCH_PAIRS);
    let partial: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let count = BATCH_PAIRS.min(pairs - b * BATCH_PAIRS);
            let mut m = Moments::new();
            let mut plus = center.clone();
            let mut minus = center.clone();
            for _ in 0..count {
                let u = match measure {
                    Measure::Ball => unit_ball(&mut rng, dim),
                    Measure::Sphere => unit_sphere(&mut rng, dim),
                };
                for i in 0..dim {
                    plus[i] = center[i] + radius * u[i];
                    minus[i] = center[i] - radius * u[i];
                }
                m.push(0.5 * (f(&plus) + f(&minus)));
            }
            m
        })
        .collect();
    let total = partial.into_iter().fold(Moments::new(), Moments::merge);
    let n = total.count as f64;
    let constant = total.min == total.max;
    let var = if total.count > 1 && !constant {
        total.m2.max(0.0) / (n - 1.0)
    } else {
        0.0
    };
    Estimate {
        value: if constant { total.min } else { total.mean },
        std_error: (var / n).sqrt(),
        samples: 2 * total.count,
    }
}

/// Draws `count` points of `measure` on `B_radius(center)`, in antithetic
/// pairs. Deterministic in `seed`.
pub fn sample_points(
    center: &DVector<f64>,
    radius: f64,
    measure: Measure,
    count: usize,
    seed: u64,
) -> Vec<DVector<f64>> {
    let dim = center.len();
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let u = match measure {
            Measure::Ball => unit_ball(&mut rng, dim),
            Measure::Sphere => unit_sphere(&mut rng, dim),
        };
        out.push(center + &u * radius);
        if out.len() < count {
            out.push(center - &u * radius);
        }
    }
    out
}

/// Volume of the unit ball in `R^n`, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // Gamma(n/2 + 1) by the half-integer recursion
    let pi = std::f64::consts::PI;
    let mut gamma = if n.is_multiple_of(2) {
        1.0
    } else {
        pi.sqrt() / 2.0
    };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 1.5 };
    while x < n as f64 / 2.0 + 1.0 - 1e-9 {
        gamma *= x;
        x += 1.0;
    }
    pi.powf(n as f64 / 2.0) / gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        let pi = std::f64::consts::PI;
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(5) - 8.0 * pi * pi / 15.0).abs() < 1e-14);
    }

    #[test]
    fn constant_integrand_has_zero_error() {
        let c = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let est = antithetic_mean(&c, 2.0, Measure::Ball, 5000, 3, |_| 1.0);
        assert_eq!(est.value, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.samples, 5000);
    }

    #[test]
    fn second_moment_of_the_disk() {
        // mean of |x|^2 over the unit disk is 1/2; on the circle it is 1
        let c = DVector::zeros(2);
        let ball = antithetic_mean(&c, 1.0, Measure::Ball, 200_000, 11, |x| x.norm_squared());
        assert!(ball.within(0.5, 4.0), "{ball:?}");
        let sphere = antithetic_mean(&c, 1.0, Measure::Sphere, 1000, 11, |x| x.norm_squared());
        assert!((sphere.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn seeds_are_reproducible() {
        let c = DVector::zeros(3);
        let a = antithetic_mean(&c, 1.0, Measure::Ball, 10_000, 5, |x| x[0].exp());
        let b = antithetic_mean(&c, 1.0, Measure::Ball, 10_000, 5, |x| x[0].exp());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_ne!(derive_seed(5, 1), derive_seed(5, 2));
        let p = sample_points(&c, 1.0, Measure::Sphere, 7, 9);
        assert_eq!(p.len(), 7);
        assert!((p[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(p[0], -&p[1]);
    }
}
