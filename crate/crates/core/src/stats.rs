//! Statistical checks for the random-phase (layer-1) codebook.
//!
//! The distance estimator rests on two facts about Q = |Σ_n e^{jζ_n}|² with
//! i.i.d. uniform phases: the algebraic identity
//! Q = N + 2·Σ_{i<j} cos(ζ_i − ζ_j), and the resulting moments
//! E[Q] = N, Var[Q] = N(N−1). Averaging C codewords then gives an
//! asymptotically normal mean power with variance shrinking as 1/C. The
//! helpers here verify all three claims on simulated data.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{PolarPoint, SystemConfig};
use crate::training::{measure_power, MeasurementModel};
use crate::codebook::layer1_codebook;
use num_complex::Complex64;

/// |Σ_n e^{jζ_n}|² via the complex sum.
pub fn coherent_sum_power(phases: &[f64]) -> f64 {
    let s: Complex64 = phases
        .iter()
        .map(|&z| Complex64::from_polar(1.0, z))
        .sum();
    s.norm_sqr()
}

/// N + 2·Σ_{i<j} cos(ζ_i − ζ_j), the pairwise-cosine expansion of
/// [`coherent_sum_power`].
pub fn pairwise_cosine_identity(phases: &[f64]) -> f64 {
    let n = phases.len();
    let mut acc = n as f64;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += 2.0 * (phases[i] - phases[j]).cos();
        }
    }
    acc
}

/// Standard normal CDF via the Abramowitz–Stegun 7.1.26 erf approximation
/// (absolute error < 1.5e-7, far below what the checks here resolve).
pub fn normal_cdf(x: f64, mean: f64, std_dev: f64) -> f64 {
    let z = (x - mean) / (std_dev * std::f64::consts::SQRT_2);
    0.5 * (1.0 + erf(z))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

/// Kolmogorov–Smirnov statistic of `samples` against the CDF `cdf`.
/// Sorts a copy of the samples.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Usage("ks_statistic needs samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    Ok(d)
}

/// Chi-square statistic of `samples` against a uniform distribution on
/// [lo, hi) with `bins` equiprobable bins.
pub fn chi_square_uniform(samples: &[f64], lo: f64, hi: f64, bins: usize) -> f64 {
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let b = (((x - lo) / (hi - lo)) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let expect = samples.len() as f64 / bins as f64;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expect;
            d * d / expect
        })
        .sum()
}

/// Outcome of the layer-1 statistics suite.
#[derive(Debug, Clone)]
pub struct Lemma1Report {
    pub n_elements: usize,
    pub codewords: usize,
    pub c_average: usize,
    /// Sample mean of the per-codeword received power (watts).
    pub sample_mean: f64,
    /// Theoretical mean N·P_A f²·b².
    pub expected_mean: f64,
    /// Sample variance of the per-codeword power.
    pub sample_variance: f64,
    /// Theoretical variance N(N−1)·(P_A f² b²)².
    pub expected_variance: f64,
    /// K-S distance of C-averaged powers from the predicted normal law.
    pub ks_stat: f64,
    /// 1%-level K-S critical value for the number of averaged samples used.
    pub ks_critical: f64,
    pub mean_ok: bool,
    pub variance_ok: bool,
    pub normality_ok: bool,
}

impl Lemma1Report {
    pub fn pass(&self) -> bool {
        self.mean_ok && self.variance_ok && self.normality_ok
    }
}

/// Run the layer-1 statistics suite: draw `codewords` independent
/// random-phase codewords at a fixed user location, compare the sample
/// mean/variance of the noiseless received power against the theoretical
/// values (1% / 10% tolerances), then build `averaged_samples` independent
/// C-averaged powers and K-S test them against the predicted normal law at
/// the 1% level.
pub fn lemma1_check(
    cfg: &SystemConfig,
    p: &PolarPoint,
    codewords: usize,
    c_average: usize,
    averaged_samples: usize,
    seed: u64,
) -> Result<Lemma1Report> {
    if codewords < 2 || c_average < 2 || averaged_samples < 10 {
        return Err(Error::Usage(
            "lemma1_check needs >=2 codewords, >=2 averaged, >=10 samples".into(),
        ));
    }
    let b = cfg.amplitude_at(p.distance);
    let unit = cfg.tx_path_power * b * b; // P_A f² b²
    let n = cfg.n_elements as f64;
    let expected_mean = n * unit;
    let expected_variance = n * (n - 1.0) * unit * unit;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mm = MeasurementModel::noiseless(seed ^ 0x6d65_6173);

    // Per-codeword powers through the real measurement path (no noise).
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..codewords {
        let cb = layer1_codebook(cfg, 1, &mut rng);
        let pw = measure_power(cfg, p, &cb.codewords[0], &mut mm);
        sum += pw;
        sumsq += pw * pw;
    }
    let m = codewords as f64;
    let sample_mean = sum / m;
    let sample_variance = (sumsq - m * sample_mean * sample_mean) / (m - 1.0);

    // C-averaged powers for the normality check.
    let sigma = (expected_variance / c_average as f64).sqrt();
    let mut averages = Vec::with_capacity(averaged_samples);
    for _ in 0..averaged_samples {
        let mut acc = 0.0;
        for _ in 0..c_average {
            let cb = layer1_codebook(cfg, 1, &mut rng);
            acc += measure_power(cfg, p, &cb.codewords[0], &mut mm);
        }
        averages.push(acc / c_average as f64);
    }
    let ks_stat = ks_statistic(&averages, |x| normal_cdf(x, expected_mean, sigma))?;
    // Asymptotic K-S critical value at the 1% level: 1.628/sqrt(M).
    let ks_critical = 1.628 / (averaged_samples as f64).sqrt();

    let mean_ok = (sample_mean - expected_mean).abs() <= 0.01 * expected_mean;
    let variance_ok = (sample_variance - expected_variance).abs() <= 0.10 * expected_variance;
    let normality_ok = ks_stat < ks_critical;
    Ok(Lemma1Report {
        n_elements: cfg.n_elements,
        codewords,
        c_average,
        sample_mean,
        expected_mean,
        sample_variance,
        expected_variance,
        ks_stat,
        ks_critical,
        mean_ok,
        variance_ok,
        normality_ok,
    })
}

/// Draw a uniform phase vector of length `n` (test helper for the identity
/// checks).
pub fn random_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..TAU)).collect()
}
