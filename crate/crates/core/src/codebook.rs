//! Phase-configuration codebooks and beam-pattern evaluation.
//!
//! Four codebook families are built here:
//!
//! * near-field codewords focusing the reflected field at one (angle,
//!   distance) point — the phase conjugate of the propagation phases;
//! * far-field (DFT-style) codewords steering a plane-wave beam toward one
//!   angle, with candidate angles θ_m = arcsin((2m−N−1)/N);
//! * the layer-1 codebook: C independent random-phase codewords whose
//!   time-averaged beam is omnidirectional, used for distance estimation;
//! * the layer-2 codebook: N near-field codewords focused on the DFT
//!   candidate angles at an estimated distance, swept for angle estimation;
//! * a polar-domain benchmark codebook: near-field codewords on a grid of
//!   angles × inverse-distance rings (plus a far-field ring).
//!
//! Beam patterns are received powers measured on a circle of given radius
//! (inside the Rayleigh distance) and normalized by the coherent maximum,
//! so a perfectly focused codeword evaluates to exactly 1 at its focus.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{wrap_phase, PolarPoint, SystemConfig};

/// One surface phase configuration: N phase shifts reduced to [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    /// Wraps every entry to [0, 2π).
    pub fn new(phases: Vec<f64>) -> Self {
        PhaseVector(phases.into_iter().map(wrap_phase).collect())
    }

    pub fn phases(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Which construction produced a codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookKind {
    Layer1Random,
    Layer2Grid,
    Dft,
    PolarDomain,
}

/// Candidate location attached to a codeword. `distance` is
/// `f64::INFINITY` for far-field (DFT and polar far-ring) codewords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamLabel {
    pub angle: f64,
    pub distance: f64,
}

/// An ordered list of codewords with optional location labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub codewords: Vec<PhaseVector>,
    pub kind: CodebookKind,
    /// One label per codeword for grid codebooks; `None` for the layer-1
    /// random codebook.
    pub labels: Option<Vec<BeamLabel>>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// CSV dump: `index,label_theta_deg,label_distance_m,phase_1..phase_N`.
    /// Label columns are empty for unlabeled codebooks and `inf` for
    /// far-field rings.
    pub fn to_csv_string(&self) -> String {
        let n = self.codewords.first().map(|c| c.len()).unwrap_or(0);
        let mut out = String::from("index,label_theta_deg,label_distance_m");
        for i in 1..=n {
            out.push_str(&format!(",phase_{i}"));
        }
        out.push('\n');
        for (i, cw) in self.codewords.iter().enumerate() {
            match self.labels.as_ref().map(|l| &l[i]) {
                Some(label) => {
                    let d = if label.distance.is_infinite() {
                        "inf".to_string()
                    } else {
                        format!("{}", label.distance)
                    };
                    out.push_str(&format!("{},{},{}", i, label.angle.to_degrees(), d));
                }
                None => out.push_str(&format!("{i},,")),
            }
            for &ph in cw.phases() {
                out.push_str(&format!(",{ph}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Normalized signal power sampled on a circle of radius `radius` around
/// the array center.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern {
    pub radius: f64,
    /// (angle in radians, normalized power) pairs, in grid order.
    pub samples: Vec<(f64, f64)>,
}

impl BeamPattern {
    /// Sample with the largest normalized power (ties: first).
    pub fn peak(&self) -> (f64, f64) {
        let mut best = self.samples[0];
        for &s in &self.samples {
            if s.1 > best.1 {
                best = s;
            }
        }
        best
    }

    /// Total angular measure (degrees) of the grid where the pattern is at
    /// least half its own peak. Assumes a uniform grid.
    pub fn half_peak_support_deg(&self) -> f64 {
        if self.samples.len() < 2 {
            return 0.0;
        }
        let step = (self.samples[1].0 - self.samples[0].0).to_degrees().abs();
        let half = self.peak().1 / 2.0;
        let count = self.samples.iter().filter(|s| s.1 >= half).count();
        count as f64 * step
    }

    /// CSV dump: `theta_deg,normalized_power`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("theta_deg,normalized_power\n");
        for &(theta, p) in &self.samples {
            out.push_str(&format!("{},{p}\n", theta.to_degrees()));
        }
        out
    }
}

/// Uniform angle grid in radians: `min_deg`, `min_deg+step`, ... up to but
/// excluding `max_deg`.
pub fn uniform_angle_grid(min_deg: f64, max_deg: f64, step_deg: f64) -> Vec<f64> {
    let count = ((max_deg - min_deg) / step_deg).round() as usize;
    (0..count)
        .map(|i| (min_deg + i as f64 * step_deg).to_radians())
        .collect()
}

/// Default pattern grid: 0.05° steps over [−90°, 90°).
pub fn default_angle_grid() -> Vec<f64> {
    uniform_angle_grid(-90.0, 90.0, 0.05)
}

/// Codeword focusing the reflected field at `p`:
/// φ_n = −ω_n − 2π·d_n(p)/λ, reduced to [0, 2π).
pub fn nearfield_codeword(cfg: &SystemConfig, p: &PolarPoint) -> PhaseVector {
    let k = TAU / cfg.wavelength;
    PhaseVector::new(
        (1..=cfg.n_elements)
            .map(|n| -cfg.bs_irs_phases[n - 1] - k * cfg.element_ue_distance(n, p))
            .collect(),
    )
}

/// Codeword steering a plane-wave beam toward `angle` (radians):
/// φ_n = −ω_n + π·(n−1)·sin(angle), reduced to [0, 2π).
///
/// The sign of the steering term is tied to the propagation convention of
/// [`SystemConfig::received_field`] (phases accumulate as +2π·d_n/λ): with
/// it, this codeword is the d → ∞ limit of [`nearfield_codeword`] up to a
/// constant offset, and its far-field beam peaks at `angle`.
pub fn farfield_codeword(cfg: &SystemConfig, angle: f64) -> PhaseVector {
    let s = angle.sin();
    PhaseVector::new(
        (1..=cfg.n_elements)
            .map(|n| -cfg.bs_irs_phases[n - 1] + std::f64::consts::PI * (n - 1) as f64 * s)
            .collect(),
    )
}

/// The N candidate angles θ_m = arcsin((2m−N−1)/N), m = 1..N, strictly
/// increasing and symmetric about broadside.
pub fn dft_candidate_angles(cfg: &SystemConfig) -> Vec<f64> {
    let n = cfg.n_elements as f64;
    (1..=cfg.n_elements)
        .map(|m| ((2.0 * m as f64 - n - 1.0) / n).asin())
        .collect()
}

/// DFT sweep codebook: far-field codewords at the candidate angles, labeled
/// with an infinite distance.
pub fn dft_codebook(cfg: &SystemConfig) -> Codebook {
    let angles = dft_candidate_angles(cfg);
    Codebook {
        codewords: angles.iter().map(|&a| farfield_codeword(cfg, a)).collect(),
        kind: CodebookKind::Dft,
        labels: Some(
            angles
                .iter()
                .map(|&a| BeamLabel {
                    angle: a,
                    distance: f64::INFINITY,
                })
                .collect(),
        ),
    }
}

/// Layer-1 codebook: `c_count` codewords with entries drawn i.i.d. uniform
/// on [0, 2π) from `rng`. Carries no location labels.
pub fn layer1_codebook<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    c_count: usize,
    rng: &mut R,
) -> Codebook {
    assert!(c_count >= 1, "layer-1 codebook needs at least one codeword");
    let codewords = (0..c_count)
        .map(|_| {
            PhaseVector::new(
                (0..cfg.n_elements)
                    .map(|_| rng.random_range(0.0..TAU))
                    .collect(),
            )
        })
        .collect();
    Codebook {
        codewords,
        kind: CodebookKind::Layer1Random,
        labels: None,
    }
}

/// Layer-2 codebook: one near-field codeword per DFT candidate angle, all
/// focused at distance `d_hat`.
pub fn layer2_codebook(cfg: &SystemConfig, d_hat: f64) -> Codebook {
    assert!(
        d_hat > 0.0 && d_hat.is_finite(),
        "layer-2 focus distance must be positive, got {d_hat}"
    );
    let angles = dft_candidate_angles(cfg);
    let mut codewords = Vec::with_capacity(cfg.n_elements);
    let mut labels = Vec::with_capacity(cfg.n_elements);
    for &theta in &angles {
        let p = PolarPoint {
            angle: theta,
            distance: d_hat,
        };
        codewords.push(nearfield_codeword(cfg, &p));
        labels.push(BeamLabel {
            angle: theta,
            distance: d_hat,
        });
    }
    Codebook {
        codewords,
        kind: CodebookKind::Layer2Grid,
        labels: Some(labels),
    }
}

/// Distance rings for the polar-domain benchmark, sampling 1/d uniformly:
/// d_s = (S−1)·d_min/(s−1) for s = S..2 (ascending distances starting at
/// `d_min`), plus a final infinite (far-field) ring.
pub fn polar_ring_distances(s_count: usize, d_min: f64) -> Vec<f64> {
    let mut rings: Vec<f64> = (2..=s_count)
        .rev()
        .map(|s| (s_count - 1) as f64 * d_min / (s - 1) as f64)
        .collect();
    rings.push(f64::INFINITY);
    rings
}

/// Polar-domain benchmark codebook: for every DFT candidate angle, one
/// near-field codeword per finite distance ring and one far-field codeword
/// for the infinite ring — N·S codewords, angle-major, rings from nearest
/// to infinite.
pub fn polar_domain_codebook(cfg: &SystemConfig, s_count: usize, d_min: f64) -> Result<Codebook> {
    if s_count < 2 {
        return Err(Error::Config(format!(
            "polar codebook needs s_count >= 2, got {s_count}"
        )));
    }
    if !(d_min > 0.0) || d_min >= cfg.rayleigh_distance() {
        return Err(Error::Config(format!(
            "polar codebook d_min {d_min} must lie in (0, Rayleigh distance = {})",
            cfg.rayleigh_distance()
        )));
    }
    let angles = dft_candidate_angles(cfg);
    let rings = polar_ring_distances(s_count, d_min);
    let mut codewords = Vec::with_capacity(cfg.n_elements * s_count);
    let mut labels = Vec::with_capacity(cfg.n_elements * s_count);
    for &theta in &angles {
        for &d in &rings {
            if d.is_infinite() {
                codewords.push(farfield_codeword(cfg, theta));
            } else {
                let p = PolarPoint { angle: theta, distance: d };
                codewords.push(nearfield_codeword(cfg, &p));
            }
            labels.push(BeamLabel { angle: theta, distance: d });
        }
    }
    Ok(Codebook {
        codewords,
        kind: CodebookKind::PolarDomain,
        labels: Some(labels),
    })
}

fn check_pattern_domain(cfg: &SystemConfig, radius: f64, grid: &[f64]) -> Result<()> {
    let rayleigh = cfg.rayleigh_distance();
    if !(radius > 0.0) || radius >= rayleigh {
        return Err(Error::Domain(format!(
            "pattern radius {radius} m must lie in (0, Rayleigh distance = {rayleigh} m)"
        )));
    }
    for &theta in grid {
        if !(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::Usage(format!(
                "pattern grid angle {theta} rad outside [-pi/2, pi/2)"
            )));
        }
    }
    Ok(())
}

/// Per-element complex factors (1/d'_n)·e^{j(ω_n + 2π d'_n/λ)} for a
/// measuring point, plus the coherent normalizer (Σ 1/d'_n)².
fn pattern_basis(cfg: &SystemConfig, radius: f64, theta: f64) -> (Vec<Complex64>, f64) {
    let k = TAU / cfg.wavelength;
    let p = PolarPoint {
        angle: theta,
        distance: radius,
    };
    let mut denom = 0.0;
    let basis = (1..=cfg.n_elements)
        .map(|n| {
            let dn = cfg.element_ue_distance(n, &p);
            denom += 1.0 / dn;
            Complex64::from_polar(1.0 / dn, cfg.bs_irs_phases[n - 1] + k * dn)
        })
        .collect();
    (basis, denom * denom)
}

/// Normalized near-field beam pattern of one codeword over `grid`:
/// P(θ_p) = |Σ_n (1/d'_n)·e^{j(φ_n+ω_n+2π d'_n/λ)}|² / (Σ_n 1/d'_n)².
pub fn beam_pattern(
    cfg: &SystemConfig,
    phases: &PhaseVector,
    radius: f64,
    grid: &[f64],
) -> Result<BeamPattern> {
    check_pattern_domain(cfg, radius, grid)?;
    assert_eq!(phases.len(), cfg.n_elements);
    let samples = grid
        .iter()
        .map(|&theta| {
            let (basis, denom) = pattern_basis(cfg, radius, theta);
            let sum: Complex64 = basis
                .iter()
                .zip(phases.phases())
                .map(|(b, &phi)| b * Complex64::from_polar(1.0, phi))
                .sum();
            (theta, sum.norm_sqr() / denom)
        })
        .collect();
    Ok(BeamPattern { radius, samples })
}

/// Beam pattern of a layer-1 codebook: the per-angle power averaged over
/// all C random codewords, with the same coherent normalizer as
/// [`beam_pattern`].
pub fn random_phase_pattern(
    cfg: &SystemConfig,
    codebook: &Codebook,
    radius: f64,
    grid: &[f64],
) -> Result<BeamPattern> {
    if codebook.kind != CodebookKind::Layer1Random {
        return Err(Error::Usage(
            "random_phase_pattern requires a layer-1 random codebook".into(),
        ));
    }
    if codebook.is_empty() {
        return Err(Error::Usage("empty codebook".into()));
    }
    check_pattern_domain(cfg, radius, grid)?;
    // Precompute unit phasors once per codeword entry; the per-angle loop is
    // then pure complex multiply-adds.
    let phasors: Vec<Vec<Complex64>> = codebook
        .codewords
        .iter()
        .map(|cw| {
            cw.phases()
                .iter()
                .map(|&phi| Complex64::from_polar(1.0, phi))
                .collect()
        })
        .collect();
    let c = codebook.len() as f64;
    let samples = grid
        .iter()
        .map(|&theta| {
            let (basis, denom) = pattern_basis(cfg, radius, theta);
            let total: f64 = phasors
                .iter()
                .map(|cw| {
                    let sum: Complex64 =
                        basis.iter().zip(cw.iter()).map(|(b, e)| b * e).sum();
                    sum.norm_sqr()
                })
                .sum();
            (theta, total / (c * denom))
        })
        .collect();
    Ok(BeamPattern { radius, samples })
}
