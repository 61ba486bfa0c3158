//! Noisy power measurements and the beam-training schemes.
//!
//! Every training measurement observes |g + z|² where g is the complex
//! received field of one codeword and z is a fresh circularly-symmetric
//! Gaussian noise sample of variance `noise_power` (no draw is consumed
//! when `noise_power` is zero, so noiseless oracle runs stay cheap).
//!
//! RNG draw order, per scheme, from the measurement model's stream:
//!
//! * two-layer: C·N uniform layer-1 phases, then C measurement noise pairs,
//!   then N layer-2 measurement noise pairs;
//! * DFT: N noise pairs;
//! * exhaustive polar: N·S noise pairs;
//! * two-phase: N noise pairs (DFT phase), then K·S noise pairs;
//! * perfect CSI: none.
//!
//! Rates attached to a [`TrainingOutcome`] are always evaluated noiselessly
//! at the true user location with the selected codeword, against the
//! system config's noise power.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::codebook::{
    dft_codebook, farfield_codeword, layer1_codebook, layer2_codebook, nearfield_codeword,
    polar_domain_codebook, polar_ring_distances, BeamLabel, Codebook, CodebookKind, PhaseVector,
};
use crate::error::{Error, Result};
use crate::geometry::{achievable_rate, PolarPoint, SystemConfig};

/// Measurement noise level plus the deterministic random stream feeding
/// the AWGN draws (and, for the two-layer scheme, the layer-1 phases).
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    /// Noise power σ² in watts; 0 gives exact noiseless measurements.
    pub noise_power: f64,
    rng: ChaCha8Rng,
}

impl MeasurementModel {
    pub fn new(noise_power: f64, seed: u64) -> Self {
        assert!(
            noise_power >= 0.0 && noise_power.is_finite(),
            "noise_power must be >= 0, got {noise_power}"
        );
        MeasurementModel {
            noise_power,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn noiseless(seed: u64) -> Self {
        Self::new(0.0, seed)
    }

    /// The underlying stream, e.g. for drawing layer-1 codebook phases.
    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn draw_noise(&mut self) -> Complex64 {
        if self.noise_power == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = (self.noise_power / 2.0).sqrt();
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    }
}

/// Per-location precomputation for repeated measurements: inverse element
/// distances and propagation phases, matching the floating-point evaluation
/// order of [`SystemConfig::received_field`] exactly so that noiseless
/// measurements equal `received_power` bit for bit.
struct FieldAt<'a> {
    cfg: &'a SystemConfig,
    inv_dist: Vec<f64>,
    propagation: Vec<f64>,
    amp: f64,
}

impl<'a> FieldAt<'a> {
    fn new(cfg: &'a SystemConfig, p: &PolarPoint) -> Self {
        let mut inv_dist = Vec::with_capacity(cfg.n_elements);
        let mut propagation = Vec::with_capacity(cfg.n_elements);
        for n in 1..=cfg.n_elements {
            let dn = cfg.element_ue_distance(n, p);
            inv_dist.push(1.0 / dn);
            propagation.push(cfg.propagation_phase(dn));
        }
        FieldAt {
            cfg,
            inv_dist,
            propagation,
            amp: cfg.tx_path_power.sqrt() * cfg.amplitude_scale(),
        }
    }

    fn field(&self, phases: &PhaseVector) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for ((&phi, &omega), (&inv, &prop)) in phases
            .phases()
            .iter()
            .zip(self.cfg.bs_irs_phases.iter())
            .zip(self.inv_dist.iter().zip(self.propagation.iter()))
        {
            sum += Complex64::from_polar(inv, phi + omega + prop);
        }
        sum * self.amp
    }

    fn measure(&self, phases: &PhaseVector, mm: &mut MeasurementModel) -> f64 {
        (self.field(phases) + mm.draw_noise()).norm_sqr()
    }
}

/// One noisy power measurement of one codeword at `p`.
pub fn measure_power(
    cfg: &SystemConfig,
    p: &PolarPoint,
    phases: &PhaseVector,
    mm: &mut MeasurementModel,
) -> f64 {
    FieldAt::new(cfg, p).measure(phases, mm)
}

/// Admissible distance-estimate range [λ, 10·Rayleigh distance]; estimates
/// outside indicate noise-dominated measurements.
pub fn d_hat_bounds(cfg: &SystemConfig) -> (f64, f64) {
    (cfg.wavelength, 10.0 * cfg.rayleigh_distance())
}

/// Invert the average-power law for distance:
/// d̂ = sqrt(G^U A^U G^I·N·P_A f² / (4π·p_bar)). Unclamped.
pub fn distance_from_mean_power(cfg: &SystemConfig, p_bar: f64) -> f64 {
    assert!(p_bar > 0.0, "mean power must be positive, got {p_bar}");
    cfg.amplitude_scale() * (cfg.n_elements as f64 * cfg.tx_path_power / p_bar).sqrt()
}

/// Result of the layer-1 distance estimation.
#[derive(Debug, Clone, Copy)]
pub struct DistanceEstimate {
    /// Estimated distance in meters, clamped to [`d_hat_bounds`].
    pub d_hat: f64,
    /// Set when the noise-corrected average power fell at or below the
    /// floor mapping to the upper distance clamp.
    pub low_snr: bool,
    /// Raw average measured power (before noise subtraction), watts.
    pub mean_power: f64,
}

/// Layer-1 distance estimation: average the measured power over all C
/// random-phase codewords (one slot of training overhead), subtract the
/// known noise power, and invert the average-power law.
pub fn layer1_estimate_distance(
    cfg: &SystemConfig,
    p: &PolarPoint,
    codebook: &Codebook,
    mm: &mut MeasurementModel,
) -> Result<DistanceEstimate> {
    if codebook.kind != CodebookKind::Layer1Random {
        return Err(Error::Usage(
            "layer-1 distance estimation requires a layer-1 random codebook".into(),
        ));
    }
    if codebook.is_empty() {
        return Err(Error::Usage("empty codebook".into()));
    }
    let geom = FieldAt::new(cfg, p);
    let mut acc = 0.0;
    for cw in &codebook.codewords {
        acc += geom.measure(cw, mm);
    }
    let mean_power = acc / codebook.len() as f64;
    let corrected = mean_power - mm.noise_power;

    let (d_lo, d_hi) = d_hat_bounds(cfg);
    // Power floor: the corrected average that would map exactly onto the
    // upper distance clamp.
    let b_hi = cfg.amplitude_at(d_hi);
    let floor = cfg.n_elements as f64 * cfg.tx_path_power * b_hi * b_hi;
    if corrected <= floor {
        return Ok(DistanceEstimate {
            d_hat: d_hi,
            low_snr: true,
            mean_power,
        });
    }
    let d_hat = distance_from_mean_power(cfg, corrected).clamp(d_lo, d_hi);
    Ok(DistanceEstimate {
        d_hat,
        low_snr: false,
        mean_power,
    })
}

/// Winner of a sweep over a labeled codebook.
#[derive(Debug, Clone, Copy)]
pub struct SweepSelection {
    pub index: usize,
    pub label: BeamLabel,
    pub measured_power: f64,
}

/// Measure every codeword once (independent noise per slot) and return the
/// index with the largest measured power; ties go to the lowest index.
pub fn sweep_select(
    cfg: &SystemConfig,
    p: &PolarPoint,
    codebook: &Codebook,
    mm: &mut MeasurementModel,
) -> Result<SweepSelection> {
    if codebook.is_empty() {
        return Err(Error::Usage("cannot sweep an empty codebook".into()));
    }
    let labels = codebook
        .labels
        .as_ref()
        .ok_or_else(|| Error::Usage("sweep_select needs a labeled codebook".into()))?;
    let geom = FieldAt::new(cfg, p);
    let mut best_idx = 0usize;
    let mut best_power = f64::NEG_INFINITY;
    for (i, cw) in codebook.codewords.iter().enumerate() {
        let pw = geom.measure(cw, mm);
        if pw > best_power {
            best_power = pw;
            best_idx = i;
        }
    }
    Ok(SweepSelection {
        index: best_idx,
        label: labels[best_idx],
        measured_power: best_power,
    })
}

/// A beam-training scheme with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TwoLayer { c_count: usize },
    Dft,
    ExhaustivePolar { s_count: usize, d_min: f64 },
    TwoPhase { k_count: usize, s_count: usize, d_min: f64 },
    PerfectCsi,
}

impl Scheme {
    /// Short label used in CSV output and seeding.
    pub fn label(&self) -> String {
        match self {
            Scheme::TwoLayer { c_count } => format!("two_layer_c{c_count}"),
            Scheme::Dft => "dft".into(),
            Scheme::ExhaustivePolar { s_count, .. } => format!("exhaustive_s{s_count}"),
            Scheme::TwoPhase { k_count, s_count, .. } => {
                format!("two_phase_k{k_count}_s{s_count}")
            }
            Scheme::PerfectCsi => "perfect_csi".into(),
        }
    }

    /// Training overhead in codeword slots for an N-element surface.
    pub fn overhead(&self, n_elements: usize) -> usize {
        match self {
            Scheme::TwoLayer { .. } => 1 + n_elements,
            Scheme::Dft => n_elements,
            Scheme::ExhaustivePolar { s_count, .. } => n_elements * s_count,
            Scheme::TwoPhase { k_count, s_count, .. } => n_elements + k_count * s_count,
            Scheme::PerfectCsi => 0,
        }
    }

    /// Stable words identifying the scheme and its parameters, mixed into
    /// per-scheme RNG sub-seeds.
    pub fn seed_words(&self) -> [u64; 4] {
        match self {
            Scheme::TwoLayer { c_count } => [1, *c_count as u64, 0, 0],
            Scheme::Dft => [2, 0, 0, 0],
            Scheme::ExhaustivePolar { s_count, d_min } => {
                [3, *s_count as u64, d_min.to_bits(), 0]
            }
            Scheme::TwoPhase { k_count, s_count, d_min } => {
                [4, *k_count as u64, *s_count as u64, d_min.to_bits()]
            }
            Scheme::PerfectCsi => [5, 0, 0, 0],
        }
    }

    /// Parse the compact flat-file form, e.g. `two_layer:c=2000`,
    /// `exhaustive:s=10:dmin=1`, `two_phase:k=3:s=10:dmin=1`.
    pub fn parse_compact(text: &str) -> Result<Scheme> {
        let mut parts = text.trim().split(':');
        let head = parts.next().unwrap_or("");
        let mut params = std::collections::BTreeMap::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("scheme parameter `{part}` is not key=value")))?;
            let val: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("scheme parameter `{part}` has a non-numeric value")))?;
            params.insert(k.trim().to_string(), val);
        }
        let get_usize = |params: &std::collections::BTreeMap<String, f64>, k: &str, default: usize| {
            params.get(k).map(|&v| v as usize).unwrap_or(default)
        };
        let scheme = match head {
            "two_layer" => Scheme::TwoLayer {
                c_count: get_usize(&params, "c", 2000),
            },
            "dft" => Scheme::Dft,
            "exhaustive" => Scheme::ExhaustivePolar {
                s_count: get_usize(&params, "s", 10),
                d_min: params.get("dmin").copied().unwrap_or(1.0),
            },
            "two_phase" => Scheme::TwoPhase {
                k_count: get_usize(&params, "k", 3),
                s_count: get_usize(&params, "s", 10),
                d_min: params.get("dmin").copied().unwrap_or(1.0),
            },
            "perfect_csi" => Scheme::PerfectCsi,
            other => {
                return Err(Error::Usage(format!(
                    "unknown scheme `{other}` (expected two_layer, dft, exhaustive, two_phase, perfect_csi)"
                )))
            }
        };
        Ok(scheme)
    }
}

/// Result of one training run.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub scheme: Scheme,
    /// Estimated distance (meters). `None` for schemes without a distance
    /// estimate; may be `f64::INFINITY` for polar far-ring winners.
    pub d_hat: Option<f64>,
    /// Estimated angle in radians.
    pub theta_hat: f64,
    pub selected_codeword: PhaseVector,
    /// Training overhead in codeword slots.
    pub overhead: usize,
    /// Rate at the true location with the selected codeword, bps/Hz.
    pub rate: f64,
    /// Layer-1 low-SNR flag (always false for other schemes).
    pub low_snr: bool,
}

pub const TRAINING_CSV_HEADER: &str =
    "scheme,d_true,theta_true_deg,d_hat,theta_hat_deg,overhead,rate_bps_hz,seed";

impl TrainingOutcome {
    pub fn to_csv_row(&self, d_true: f64, theta_true: f64, seed: u64) -> String {
        let d_hat = match self.d_hat {
            None => "none".to_string(),
            Some(d) if d.is_infinite() => "inf".to_string(),
            Some(d) => format!("{d}"),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.scheme.label(),
            d_true,
            theta_true.to_degrees(),
            d_hat,
            self.theta_hat.to_degrees(),
            self.overhead,
            self.rate,
            seed
        )
    }
}

fn rate_of(cfg: &SystemConfig, p: &PolarPoint, codeword: &PhaseVector) -> Result<f64> {
    achievable_rate(cfg.received_power(p, codeword), cfg.noise_power)
}

/// Proposed two-layer training: layer-1 distance estimation (1 slot), then
/// a layer-2 sweep over N near-field beams at the estimated distance.
/// Overhead 1 + N.
pub fn run_two_layer(
    cfg: &SystemConfig,
    p: &PolarPoint,
    c_count: usize,
    mm: &mut MeasurementModel,
) -> Result<TrainingOutcome> {
    if c_count == 0 {
        return Err(Error::Config("two-layer needs c_count >= 1".into()));
    }
    let cb1 = layer1_codebook(cfg, c_count, mm.rng_mut());
    let est = layer1_estimate_distance(cfg, p, &cb1, mm)?;
    let cb2 = layer2_codebook(cfg, est.d_hat);
    let sel = sweep_select(cfg, p, &cb2, mm)?;
    let selected = cb2.codewords[sel.index].clone();
    let rate = rate_of(cfg, p, &selected)?;
    Ok(TrainingOutcome {
        scheme: Scheme::TwoLayer { c_count },
        d_hat: Some(est.d_hat),
        theta_hat: sel.label.angle,
        selected_codeword: selected,
        overhead: 1 + cb2.len(),
        rate,
        low_snr: est.low_snr,
    })
}

/// DFT benchmark: sweep the N far-field codewords; no distance estimate.
/// Overhead N.
pub fn run_dft(
    cfg: &SystemConfig,
    p: &PolarPoint,
    mm: &mut MeasurementModel,
) -> Result<TrainingOutcome> {
    let cb = dft_codebook(cfg);
    let sel = sweep_select(cfg, p, &cb, mm)?;
    let selected = cb.codewords[sel.index].clone();
    let rate = rate_of(cfg, p, &selected)?;
    Ok(TrainingOutcome {
        scheme: Scheme::Dft,
        d_hat: None,
        theta_hat: sel.label.angle,
        selected_codeword: selected,
        overhead: cb.len(),
        rate,
        low_snr: false,
    })
}

/// Exhaustive polar-domain benchmark: sweep all N·S angle × distance-ring
/// codewords. The winning distance may be the infinite far-field ring.
pub fn run_exhaustive_polar(
    cfg: &SystemConfig,
    p: &PolarPoint,
    s_count: usize,
    d_min: f64,
    mm: &mut MeasurementModel,
) -> Result<TrainingOutcome> {
    let cb = polar_domain_codebook(cfg, s_count, d_min)?;
    let sel = sweep_select(cfg, p, &cb, mm)?;
    let selected = cb.codewords[sel.index].clone();
    let rate = rate_of(cfg, p, &selected)?;
    Ok(TrainingOutcome {
        scheme: Scheme::ExhaustivePolar { s_count, d_min },
        d_hat: Some(sel.label.distance),
        theta_hat: sel.label.angle,
        selected_codeword: selected,
        overhead: cb.len(),
        rate,
        low_snr: false,
    })
}

/// Two-phase benchmark: DFT sweep, shortlist the K strongest angles, then
/// sweep K·S polar-ring codewords restricted to those angles.
/// Overhead N + K·S.
pub fn run_two_phase(
    cfg: &SystemConfig,
    p: &PolarPoint,
    k_count: usize,
    s_count: usize,
    d_min: f64,
    mm: &mut MeasurementModel,
) -> Result<TrainingOutcome> {
    if k_count < 1 || k_count > cfg.n_elements {
        return Err(Error::Config(format!(
            "two-phase needs 1 <= k_count <= N, got {k_count}"
        )));
    }
    if s_count < 2 {
        return Err(Error::Config(format!(
            "two-phase needs s_count >= 2, got {s_count}"
        )));
    }
    // Phase 1: DFT sweep, keeping every measured power.
    let dft = dft_codebook(cfg);
    let geom = FieldAt::new(cfg, p);
    let powers: Vec<f64> = dft
        .codewords
        .iter()
        .map(|cw| geom.measure(cw, mm))
        .collect();
    // Top-K angles by measured power, ties to the lower index.
    let mut order: Vec<usize> = (0..powers.len()).collect();
    order.sort_by(|&a, &b| {
        powers[b]
            .partial_cmp(&powers[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut shortlist: Vec<usize> = order.into_iter().take(k_count).collect();
    shortlist.sort_unstable();

    // Phase 2: polar rings restricted to the shortlisted angles.
    let dft_labels = dft.labels.as_ref().expect("dft codebook is labeled");
    let rings = polar_ring_distances(s_count, d_min);
    let mut codewords = Vec::with_capacity(k_count * s_count);
    let mut labels = Vec::with_capacity(k_count * s_count);
    for &m in &shortlist {
        let theta = dft_labels[m].angle;
        for &d in &rings {
            if d.is_infinite() {
                codewords.push(farfield_codeword(cfg, theta));
            } else {
                codewords.push(nearfield_codeword(cfg, &PolarPoint { angle: theta, distance: d }));
            }
            labels.push(BeamLabel { angle: theta, distance: d });
        }
    }
    let cb2 = Codebook {
        codewords,
        kind: CodebookKind::PolarDomain,
        labels: Some(labels),
    };
    let sel = sweep_select(cfg, p, &cb2, mm)?;
    let selected = cb2.codewords[sel.index].clone();
    let rate = rate_of(cfg, p, &selected)?;
    Ok(TrainingOutcome {
        scheme: Scheme::TwoPhase { k_count, s_count, d_min },
        d_hat: Some(sel.label.distance),
        theta_hat: sel.label.angle,
        selected_codeword: selected,
        overhead: dft.len() + cb2.len(),
        rate,
        low_snr: false,
    })
}

/// Genie upper bound: the exact near-field codeword for the true location,
/// zero training overhead.
pub fn perfect_csi(cfg: &SystemConfig, p: &PolarPoint) -> Result<TrainingOutcome> {
    let selected = nearfield_codeword(cfg, p);
    let rate = achievable_rate(cfg.max_received_power(p), cfg.noise_power)?;
    Ok(TrainingOutcome {
        scheme: Scheme::PerfectCsi,
        d_hat: Some(p.distance),
        theta_hat: p.angle,
        selected_codeword: selected,
        overhead: 0,
        rate,
        low_snr: false,
    })
}

/// Dispatch a scheme by its enum value.
pub fn run_scheme(
    cfg: &SystemConfig,
    p: &PolarPoint,
    scheme: &Scheme,
    mm: &mut MeasurementModel,
) -> Result<TrainingOutcome> {
    match *scheme {
        Scheme::TwoLayer { c_count } => run_two_layer(cfg, p, c_count, mm),
        Scheme::Dft => run_dft(cfg, p, mm),
        Scheme::ExhaustivePolar { s_count, d_min } => {
            run_exhaustive_polar(cfg, p, s_count, d_min, mm)
        }
        Scheme::TwoPhase { k_count, s_count, d_min } => {
            run_two_phase(cfg, p, k_count, s_count, d_min, mm)
        }
        Scheme::PerfectCsi => perfect_csi(cfg, p),
    }
}
