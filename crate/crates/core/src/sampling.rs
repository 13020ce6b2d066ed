//! Seeded, reproducible samplers: uniform points of `S^{n-1}` and `T^n`,
//! uniform unit tangent vectors, geodesic steps, and coefficient spheres.
//!
//! Reproducibility contract: a [`SeededStream`] `(seed, stream_id)` always
//! produces the same byte-identical draw sequence. Parallel Monte Carlo
//! splits work into fixed-size blocks, one derived stream per block, and
//! reduces in block order — so results do not depend on how many worker
//! threads executed the blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::inverse_sqrt_spd;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("point is not a unit vector (‖x‖ = {0})")]
    NotUnit(f64),
    #[error("tangent vector is not orthogonal to the base point (⟨x,v⟩ = {0:e})")]
    NotTangent(f64),
    #[error("step size must lie in (0, π), got {0}")]
    BadStepSize(f64),
    #[error("metric is not symmetric positive definite")]
    NotPositiveDefinite,
}

/// A named position in the global ChaCha stream space.
///
/// `seed` selects the key, `stream_id` the independent stream. Identical
/// pairs yield identical draws on every platform and run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SeededStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derived stream for block `index`. Callers hand out disjoint
    /// `stream_id` ranges per experiment phase.
    pub fn block(&self, index: u64) -> SeededStream {
        SeededStream {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_add(index),
        }
    }
}

/// Number of samples drawn from one derived stream. Fixing this constant
/// (rather than dividing by the worker count) is what makes results
/// identical across shard counts.
pub const BLOCK_SAMPLES: u64 = 1 << 16;

/// Runs `total` samples as fixed-size blocks in parallel, returning the
/// per-block results in block order. `f(rng, count, block_index)` must draw
/// exactly from its own rng.
pub fn run_blocks<T, F>(stream: SeededStream, total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64, u64) -> T + Sync,
{
    let blocks = total.div_ceil(BLOCK_SAMPLES).max(1);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = (total - b * BLOCK_SAMPLES).min(BLOCK_SAMPLES);
            let mut rng = stream.block(b).rng();
            f(&mut rng, count, b)
        })
        .collect()
}

fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform point of `S^{n-1}`: a Gaussian vector normalized to unit length,
/// resampling the (measure-zero) degenerate case.
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    assert!(n >= 2, "sphere dimension must be at least 2");
    loop {
        let mut x = gaussian_vector(n, rng);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            x.iter_mut().for_each(|v| *v /= norm);
            return x;
        }
    }
}

/// Uniform unit tangent vector at `x ∈ S^{n-1}`: Gaussian draw, project out
/// the radial component, normalize.
pub fn sample_tangent<R: Rng + ?Sized>(x: &[f64], rng: &mut R) -> Vec<f64> {
    loop {
        let mut v = gaussian_vector(x.len(), rng);
        let radial: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
        for (vi, xi) in v.iter_mut().zip(x) {
            *vi -= radial * xi;
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|a| *a /= norm);
            return v;
        }
    }
}

/// `exp_x(ε v) = cos(ε) x + sin(ε) v`, the unit-speed great circle.
///
/// Preconditions (checked to 1e-9): `‖x‖ = ‖v‖ = 1`, `⟨x, v⟩ = 0`, and
/// `0 < ε < π` (the injectivity bound at the antipode).
pub fn geodesic_step_sphere(x: &[f64], v: &[f64], eps: f64) -> Result<Vec<f64>, SamplingError> {
    if !(eps > 0.0 && eps < std::f64::consts::PI) {
        return Err(SamplingError::BadStepSize(eps));
    }
    let norm_x = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm_x - 1.0).abs() > 1e-9 {
        return Err(SamplingError::NotUnit(norm_x));
    }
    let norm_v = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm_v - 1.0).abs() > 1e-9 {
        return Err(SamplingError::NotUnit(norm_v));
    }
    let dot: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
    if dot.abs() > 1e-9 {
        return Err(SamplingError::NotTangent(dot));
    }
    let (s, c) = eps.sin_cos();
    Ok(x.iter().zip(v).map(|(xi, vi)| c * xi + s * vi).collect())
}

/// Uniform point of the torus `[0,1)^n`.
pub fn sample_torus<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Draws tangent directions `u` with `⟨Bu, u⟩ = 1`, uniformly with respect
/// to the metric `B`.
///
/// A standard Gaussian `g` is pushed through `B^{-1/2}` (computed once per
/// metric via symmetric eigendecomposition) and normalized in the `B`-norm;
/// in a `B`-orthonormal frame this is exactly Gaussian-normalize on the
/// unit sphere.
#[derive(Clone, Debug)]
pub struct TorusTangentSampler {
    n: usize,
    inv_sqrt_b: Vec<f64>,
    b: Vec<f64>,
}

impl TorusTangentSampler {
    /// `b` is the row-major metric. Fails if it is not SPD.
    pub fn new(b: &[f64], n: usize) -> Result<Self, SamplingError> {
        assert_eq!(b.len(), n * n);
        let inv_sqrt_b = inverse_sqrt_spd(b, n).ok_or(SamplingError::NotPositiveDefinite)?;
        Ok(TorusTangentSampler {
            n,
            inv_sqrt_b,
            b: b.to_vec(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let g = gaussian_vector(self.n, rng);
            let w = crate::linalg::mat_vec(&self.inv_sqrt_b, self.n, &g);
            let bw = crate::linalg::mat_vec(&self.b, self.n, &w);
            let b_norm_sq: f64 = bw.iter().zip(&w).map(|(a, b)| a * b).sum();
            if b_norm_sq > 1e-24 {
                let scale = b_norm_sq.sqrt();
                return w.iter().map(|wi| wi / scale).collect();
            }
        }
    }

    /// `⟨Bu, u⟩` for diagnostics.
    pub fn b_norm_squared(&self, u: &[f64]) -> f64 {
        let bu = crate::linalg::mat_vec(&self.b, self.n, u);
        bu.iter().zip(u).map(|(a, b)| a * b).sum()
    }
}

/// Straight-line geodesic on the flat torus: `(x + ε u) mod 1`.
pub fn geodesic_step_torus(x: &[f64], u: &[f64], eps: f64) -> Vec<f64> {
    x.iter()
        .zip(u)
        .map(|(xi, ui)| (xi + eps * ui).rem_euclid(1.0))
        .collect()
}

/// Uniform point of the radius-`r` sphere in `R^m`.
pub fn sample_coefficient_sphere<R: Rng + ?Sized>(m: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    assert!(m >= 1 && radius > 0.0);
    if m == 1 {
        // ±radius with equal probability.
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return vec![sign * radius];
    }
    loop {
        let mut a = gaussian_vector(m, rng);
        let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            a.iter_mut().for_each(|v| *v *= radius / norm);
            return a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::MeanAccumulator;

    #[test]
    fn identical_streams_reproduce_identical_draws() {
        let stream = SeededStream::new(42, 7);
        let a: Vec<f64> = sample_sphere(6, &mut stream.rng());
        let b: Vec<f64> = sample_sphere(6, &mut stream.rng());
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        // A different stream id diverges.
        let c: Vec<f64> = sample_sphere(6, &mut SeededStream::new(42, 8).rng());
        assert_ne!(a, c);
    }

    #[test]
    fn block_results_do_not_depend_on_thread_count() {
        let stream = SeededStream::new(9, 0);
        let run = |threads: usize| -> Vec<u64> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                run_blocks(stream, 200_000, |rng, count, _| {
                    let mut acc = 0u64;
                    for _ in 0..count {
                        acc = acc.wrapping_add(rng.random::<u64>());
                    }
                    acc
                })
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn sphere_samples_are_unit_vectors() {
        let mut rng = SeededStream::new(1, 0).rng();
        for _ in 0..100 {
            let x = sample_sphere(8, &mut rng);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_first_coordinate_moments() {
        // E[x_1] = 0 and E[x_1²] = 1/n, both within 4 standard errors at
        // N = 10⁶.
        let n = 5;
        let mut mean = MeanAccumulator::new();
        let mut second = MeanAccumulator::new();
        let mut rng = SeededStream::new(2, 0).rng();
        for _ in 0..1_000_000 {
            let x = sample_sphere(n, &mut rng);
            mean.push(x[0]);
            second.push(x[0] * x[0]);
        }
        assert!(mean.mean().abs() <= 4.0 * mean.std_err());
        assert!((second.mean() - 1.0 / n as f64).abs() <= 4.0 * second.std_err());
    }

    #[test]
    fn tangent_samples_are_orthonormal() {
        let mut rng = SeededStream::new(3, 0).rng();
        let x = sample_sphere(7, &mut rng);
        for _ in 0..100 {
            let v = sample_tangent(&x, &mut rng);
            let dot: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(dot.abs() <= 1e-12);
            assert!((norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn tangent_direction_moment_matches_lower_sphere() {
        // For fixed x and fixed unit u ⊥ x, E⟨v,u⟩² = 1/(n-1).
        let n = 6;
        let mut rng = SeededStream::new(4, 0).rng();
        let x = sample_sphere(n, &mut rng);
        let u = sample_tangent(&x, &mut rng);
        let mut acc = MeanAccumulator::new();
        for _ in 0..400_000 {
            let v = sample_tangent(&x, &mut rng);
            let dot: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
            acc.push(dot * dot);
        }
        let want = 1.0 / (n as f64 - 1.0);
        assert!((acc.mean() - want).abs() <= 4.0 * acc.std_err());
    }

    #[test]
    fn geodesic_step_properties() {
        let mut rng = SeededStream::new(5, 0).rng();
        let x = sample_sphere(9, &mut rng);
        let v = sample_tangent(&x, &mut rng);
        let eps = 0.3;
        let y = geodesic_step_sphere(&x, &v, eps).unwrap();
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
        let dot: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((dot - eps.cos()).abs() <= 1e-12);
        // Step forward, then back along the reversed tangent at y.
        let w: Vec<f64> = x
            .iter()
            .zip(&v)
            .map(|(xi, vi)| -(-eps.sin() * xi + eps.cos() * vi))
            .collect();
        let back = geodesic_step_sphere(&y, &w, eps).unwrap();
        for (xi, bi) in x.iter().zip(&back) {
            assert!((xi - bi).abs() <= 1e-10);
        }
    }

    #[test]
    fn geodesic_step_rejects_bad_inputs() {
        let x = vec![1.0, 0.0];
        let v = vec![0.0, 1.0];
        assert!(matches!(
            geodesic_step_sphere(&x, &v, 0.0),
            Err(SamplingError::BadStepSize(_))
        ));
        assert!(matches!(
            geodesic_step_sphere(&x, &v, 3.5),
            Err(SamplingError::BadStepSize(_))
        ));
        assert!(matches!(
            geodesic_step_sphere(&[2.0, 0.0], &v, 0.1),
            Err(SamplingError::NotUnit(_))
        ));
        assert!(matches!(
            geodesic_step_sphere(&x, &[1.0, 0.0], 0.1),
            Err(SamplingError::NotTangent(_))
        ));
    }

    #[test]
    fn torus_tangent_has_unit_b_norm() {
        let b = [2.0, 0.3, 0.3, 1.0];
        let sampler = TorusTangentSampler::new(&b, 2).unwrap();
        let mut rng = SeededStream::new(6, 0).rng();
        for _ in 0..200 {
            let u = sampler.sample(&mut rng);
            assert!((sampler.b_norm_squared(&u) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn torus_tangent_identity_metric_is_uniform_sphere() {
        // With B = I the draw reduces to Gaussian-normalize: check the
        // coordinate second moment 1/n.
        let n = 4;
        let b: Vec<f64> = (0..n * n)
            .map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 })
            .collect();
        let sampler = TorusTangentSampler::new(&b, n).unwrap();
        let mut rng = SeededStream::new(7, 0).rng();
        let mut acc = MeanAccumulator::new();
        for _ in 0..400_000 {
            let u = sampler.sample(&mut rng);
            acc.push(u[0] * u[0]);
        }
        assert!((acc.mean() - 0.25).abs() <= 4.0 * acc.std_err());
    }

    #[test]
    fn torus_tangent_rejects_indefinite_metric() {
        let b = [1.0, 2.0, 2.0, 1.0];
        assert!(TorusTangentSampler::new(&b, 2).is_err());
    }

    #[test]
    fn torus_step_returns_mod_one() {
        let x = vec![0.9, 0.1, 0.5];
        let u = vec![0.6, -0.8, 0.0];
        let eps = 0.5;
        let y = geodesic_step_torus(&x, &u, eps);
        assert!(y.iter().all(|&c| (0.0..1.0).contains(&c)));
        // Stepping back with -u returns to x mod 1.
        let z = geodesic_step_torus(&y, &u.iter().map(|a| -a).collect::<Vec<_>>(), eps);
        for (xi, zi) in x.iter().zip(&z) {
            let diff = (xi - zi).abs();
            assert!(diff.min((1.0 - diff).abs()) <= 1e-12);
        }
    }

    #[test]
    fn coefficient_sphere_norm_and_moments() {
        let mut rng = SeededStream::new(8, 0).rng();
        for _ in 0..50 {
            let a = sample_coefficient_sphere(10, 2.0_f64.sqrt(), &mut rng);
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 2.0_f64.sqrt()).abs() <= 1e-12);
        }
        // m = 1 gives ±radius with equal frequency.
        let mut pos = 0u32;
        for _ in 0..10_000 {
            let a = sample_coefficient_sphere(1, 3.0, &mut rng);
            assert!((a[0].abs() - 3.0).abs() <= 1e-15);
            if a[0] > 0.0 {
                pos += 1;
            }
        }
        assert!((f64::from(pos) / 10_000.0 - 0.5).abs() < 0.02);
        // E[a_1²] = radius²/m within 4 standard errors.
        let mut acc = MeanAccumulator::new();
        for _ in 0..1_000_000 {
            let a = sample_coefficient_sphere(8, 2.0, &mut rng);
            acc.push(a[0] * a[0]);
        }
        assert!((acc.mean() - 0.5).abs() <= 4.0 * acc.std_err());
    }
}
