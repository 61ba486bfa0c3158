//! Array geometry, spherical-wave channel synthesis, and link-budget math.
//!
//! The reflecting surface is an N-element uniform linear array on the x-axis
//! with half-wavelength spacing, centered at the origin. Element n (1-based)
//! sits at x_n = (n - (N+1)/2)·λ/2. A user terminal at polar location
//! (θ, d) has Cartesian coordinates (d·sinθ, d·cosθ), so the element-to-user
//! distance is an exact Euclidean norm rather than a far-field plane-wave
//! approximation — wavefront curvature across the aperture is what this
//! whole crate is about.
//!
//! Phase convention: the per-element phase accumulated through the
//! BS → surface → user path is ω_n + 2π·d_n/λ, and a phase shift φ_n applied
//! at element n adds on top, so the received field is proportional to
//! Σ_n (1/d_n)·e^{j(φ_n + ω_n + 2π d_n/λ)}. [`ChannelVector`] stores the
//! conjugated entries (phase −2π d_n/λ); the received-signal sum conjugates
//! them back. All codeword constructions in [`crate::codebook`] follow this
//! convention.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::codebook::PhaseVector;
use crate::error::{Error, Result};

/// Reduce an angle to [0, 2π).
#[inline]
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can return exactly TAU when x is a tiny negative number.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Static system parameters: array geometry, wavelength, link gains, noise.
///
/// `tx_path_power` holds the product P_A·f² (transmit power times squared
/// BS-surface path gain) in watts; the two factors never appear separately
/// in any observable quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of array elements N (even, ≥ 2).
    pub n_elements: usize,
    /// Carrier wavelength λ in meters.
    pub wavelength: f64,
    /// Receiver noise power σ² in watts, used for rate evaluation.
    pub noise_power: f64,
    /// Per-element reflection gain G^I (dimensionless).
    pub irs_element_gain: f64,
    /// User antenna gain G^U (dimensionless).
    pub ue_antenna_gain: f64,
    /// User antenna effective aperture A^U in m².
    pub ue_aperture: f64,
    /// P_A·f² in watts.
    pub tx_path_power: f64,
    /// BS-to-element channel phases ω_n, N entries in [0, 2π).
    pub bs_irs_phases: Vec<f64>,
}

impl SystemConfig {
    /// Build a config with unit gains, A^U = λ²/4π, and all-zero BS phases.
    pub fn new(
        n_elements: usize,
        wavelength: f64,
        noise_power: f64,
        tx_path_power: f64,
    ) -> Result<Self> {
        let cfg = SystemConfig {
            n_elements,
            wavelength,
            noise_power,
            irs_element_gain: 1.0,
            ue_antenna_gain: 1.0,
            ue_aperture: wavelength * wavelength / (4.0 * PI),
            tx_path_power,
            bs_irs_phases: vec![0.0; n_elements],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replace the link gains and user aperture.
    pub fn with_gains(
        mut self,
        irs_element_gain: f64,
        ue_antenna_gain: f64,
        ue_aperture: f64,
    ) -> Result<Self> {
        self.irs_element_gain = irs_element_gain;
        self.ue_antenna_gain = ue_antenna_gain;
        self.ue_aperture = ue_aperture;
        self.validate()?;
        Ok(self)
    }

    /// Replace the BS-to-element phases (must have exactly N entries;
    /// values are reduced to [0, 2π)).
    pub fn with_bs_irs_phases(mut self, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != self.n_elements {
            return Err(Error::Config(format!(
                "bs_irs_phases has {} entries, expected {}",
                phases.len(),
                self.n_elements
            )));
        }
        self.bs_irs_phases = phases.into_iter().map(wrap_phase).collect();
        Ok(self)
    }

    /// Draw fresh BS-to-element phases i.i.d. uniform on [0, 2π).
    pub fn randomize_bs_irs_phases<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for w in self.bs_irs_phases.iter_mut() {
            *w = rng.random_range(0.0..TAU);
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_elements < 2 || self.n_elements % 2 != 0 {
            return Err(Error::Config(format!(
                "n_elements must be even and >= 2, got {}",
                self.n_elements
            )));
        }
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("noise_power", self.noise_power),
            ("tx_path_power", self.tx_path_power),
            ("irs_element_gain", self.irs_element_gain),
            ("ue_antenna_gain", self.ue_antenna_gain),
            ("ue_aperture", self.ue_aperture),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.bs_irs_phases.len() != self.n_elements {
            return Err(Error::Config(format!(
                "bs_irs_phases has {} entries, expected {}",
                self.bs_irs_phases.len(),
                self.n_elements
            )));
        }
        Ok(())
    }

    /// Aperture length D = N·λ/2.
    pub fn aperture_length(&self) -> f64 {
        self.n_elements as f64 * self.wavelength / 2.0
    }

    /// Near/far-field boundary 2D²/λ.
    pub fn rayleigh_distance(&self) -> f64 {
        let d = self.aperture_length();
        2.0 * d * d / self.wavelength
    }

    /// x-coordinate of element n (1-based).
    pub fn element_position(&self, n: usize) -> f64 {
        assert!(
            n >= 1 && n <= self.n_elements,
            "element index {n} out of range 1..={}",
            self.n_elements
        );
        (n as f64 - (self.n_elements as f64 + 1.0) / 2.0) * self.wavelength / 2.0
    }

    /// Euclidean distance from element n to the user at `p`.
    pub fn element_ue_distance(&self, n: usize, p: &PolarPoint) -> f64 {
        let x = self.element_position(n);
        let ux = p.distance * p.angle.sin();
        let uy = p.distance * p.angle.cos();
        ((ux - x) * (ux - x) + uy * uy).sqrt()
    }

    /// Amplitude common factor sqrt(G^U·A^U·G^I / 4π).
    pub fn amplitude_scale(&self) -> f64 {
        (self.ue_antenna_gain * self.ue_aperture * self.irs_element_gain / (4.0 * PI)).sqrt()
    }

    /// Equal-distance channel amplitude b(d) = sqrt(G^U·A^U·G^I / 4π·d²),
    /// the approximation behind the average-power distance estimator.
    pub fn amplitude_at(&self, d: f64) -> f64 {
        self.amplitude_scale() / d
    }

    /// Propagation phase 2π·d_n/λ reduced exactly to [0, 2π). The reduction
    /// changes nothing mathematically (rem_euclid is an exact operation on
    /// the rounded product) but keeps later phase additions far from the
    /// large-argument rounding floor, so the closed-form power and the
    /// channel-vector route agree to ~1e-15 instead of ~1e-12.
    pub(crate) fn propagation_phase(&self, dn: f64) -> f64 {
        (TAU / self.wavelength * dn).rem_euclid(TAU)
    }

    /// Spherical-wave channel from the surface to the user at `p`.
    ///
    /// Entry n has magnitude sqrt(G^U·A^U·G^I/(4π·d_n²)) and phase
    /// −2π·d_n/λ (the conjugated-row convention; see the module docs).
    pub fn irs_ue_channel(&self, p: &PolarPoint) -> ChannelVector {
        let scale = self.amplitude_scale();
        let entries = (1..=self.n_elements)
            .map(|n| {
                let dn = self.element_ue_distance(n, p);
                Complex64::from_polar(scale / dn, -self.propagation_phase(dn))
            })
            .collect();
        ChannelVector { entries }
    }

    /// Complex received field at `p` under phase configuration `phases`,
    /// scaled so its squared magnitude is the received power in watts:
    /// sqrt(P_A f²·G^U A^U G^I/4π) · Σ_n (1/d_n)·e^{j(φ_n+ω_n+2π d_n/λ)}.
    pub fn received_field(&self, p: &PolarPoint, phases: &PhaseVector) -> Complex64 {
        assert_eq!(
            phases.len(),
            self.n_elements,
            "phase vector length {} != n_elements {}",
            phases.len(),
            self.n_elements
        );
        let mut sum = Complex64::new(0.0, 0.0);
        for (n, (&phi, &omega)) in phases
            .phases()
            .iter()
            .zip(self.bs_irs_phases.iter())
            .enumerate()
        {
            let dn = self.element_ue_distance(n + 1, p);
            let prop = self.propagation_phase(dn);
            sum += Complex64::from_polar(1.0 / dn, phi + omega + prop);
        }
        sum * (self.tx_path_power.sqrt() * self.amplitude_scale())
    }

    /// Received signal power in watts at `p` under `phases`.
    pub fn received_power(&self, p: &PolarPoint, phases: &PhaseVector) -> f64 {
        self.received_field(p, phases).norm_sqr()
    }

    /// Coherent-combination upper bound on received power at `p`:
    /// P_A f²·G^U A^U G^I/4π · (Σ_n 1/d_n)².
    pub fn max_received_power(&self, p: &PolarPoint) -> f64 {
        let s: f64 = (1..=self.n_elements)
            .map(|n| 1.0 / self.element_ue_distance(n, p))
            .sum();
        let a = self.amplitude_scale();
        self.tx_path_power * a * a * s * s
    }

    /// Reference SNR in dB at distance d:
    /// 10·log10(P_A N f² G^I G^U A^U / (4π d² σ²)).
    pub fn reference_snr_db(&self, d: f64) -> f64 {
        let lin = self.tx_path_power * self.n_elements as f64 * self.irs_element_gain
            * self.ue_antenna_gain
            * self.ue_aperture
            / (4.0 * PI * d * d * self.noise_power);
        10.0 * lin.log10()
    }

    /// Solve the reference-SNR definition for P_A·f² given a target SNR in
    /// dB at distance d. Inverse of [`Self::reference_snr_db`].
    pub fn tx_path_power_for_snr_db(&self, snr_db: f64, d: f64) -> f64 {
        let lin = 10f64.powf(snr_db / 10.0);
        lin * 4.0 * PI * d * d * self.noise_power
            / (self.n_elements as f64
                * self.irs_element_gain
                * self.ue_antenna_gain
                * self.ue_aperture)
    }
}

/// A (angle, distance) location relative to the array center.
///
/// Angle is in radians, strictly inside [−π/2, π/2); distance is in meters,
/// strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub angle: f64,
    pub distance: f64,
}

impl PolarPoint {
    pub fn new(angle: f64, distance: f64) -> Result<Self> {
        if !(-PI / 2.0..PI / 2.0).contains(&angle) {
            return Err(Error::Config(format!(
                "angle {angle} rad outside [-pi/2, pi/2)"
            )));
        }
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::Config(format!("distance {distance} must be positive")));
        }
        Ok(PolarPoint { angle, distance })
    }

    pub fn from_degrees(angle_deg: f64, distance: f64) -> Result<Self> {
        PolarPoint::new(angle_deg.to_radians(), distance)
    }
}

/// Complex spherical-wave channel entries, one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
}

impl ChannelVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Shannon rate log2(1 + P_r/σ²) in bps/Hz.
///
/// `received_power` may be zero (zero rate); `noise_power` must be
/// strictly positive.
pub fn achievable_rate(received_power: f64, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) || !noise_power.is_finite() {
        return Err(Error::Domain(format!(
            "noise_power must be positive, got {noise_power}"
        )));
    }
    if received_power < 0.0 || !received_power.is_finite() {
        return Err(Error::Domain(format!(
            "received_power must be non-negative, got {received_power}"
        )));
    }
    Ok((1.0 + received_power / noise_power).log2())
}
