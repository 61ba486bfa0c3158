//! Monte-Carlo experiment harness: sweep reference SNR or user distance,
//! run every configured scheme over many random channel realizations, and
//! aggregate RMSE and mean rate per (scheme, sweep point).
//!
//! Reproducibility contract: a spec with a fixed `base_seed` produces a
//! bit-identical report regardless of thread count or execution order.
//! Each (point, trial) work unit derives a channel stream from
//! (base_seed, point index, trial index, CHANNEL_TAG) that draws the user
//! angle first and then the N BS-to-element phases; every scheme inside
//! the trial then gets its own measurement stream derived from
//! (base_seed, point index, trial index, scheme words). All schemes in a
//! trial therefore share one channel realization (paired comparison) while
//! drawing independent measurement noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PolarPoint, SystemConfig};
use crate::training::{d_hat_bounds, run_scheme, MeasurementModel, Scheme};

/// Tag separating the channel stream from scheme streams.
pub const CHANNEL_TAG: u64 = 0x6368_616e_6e65_6c00;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut x = z;
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministically mix words into one sub-seed.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// Seed of the channel stream for one (point, trial) cell.
pub fn channel_seed(base_seed: u64, point_idx: usize, trial: usize) -> u64 {
    mix_seed(&[base_seed, point_idx as u64, trial as u64, CHANNEL_TAG])
}

/// Seed of the measurement stream for one scheme inside one cell.
pub fn scheme_seed(base_seed: u64, point_idx: usize, trial: usize, scheme: &Scheme) -> u64 {
    let w = scheme.seed_words();
    mix_seed(&[
        base_seed,
        point_idx as u64,
        trial as u64,
        w[0],
        w[1],
        w[2],
        w[3],
    ])
}

/// Which quantity the sweep points enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    ReferenceSnrDb,
    UeDistanceM,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::ReferenceSnrDb => "reference_snr_db",
            SweepAxis::UeDistanceM => "ue_distance_m",
        }
    }
}

fn default_trials() -> usize {
    200
}
fn default_theta_min() -> f64 {
    -60.0
}
fn default_theta_max() -> f64 {
    60.0
}
fn default_fixed_distance() -> f64 {
    3.0
}
fn default_tx_path_power() -> f64 {
    0.05e-3
}
fn default_noise_power() -> f64 {
    10f64.powf(-94.0 / 10.0) * 1e-3
}
fn default_n_elements() -> usize {
    200
}
fn default_wavelength() -> f64 {
    0.01
}
fn default_gain() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    1
}
fn default_clamp() -> bool {
    true
}

/// Full description of one sweep experiment. JSON specs deserialize into
/// this struct directly; the flat key=value format maps onto it via
/// [`ExperimentSpec::from_flat_str`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub sweep_axis: SweepAxis,
    pub points: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_theta_min")]
    pub theta_min_deg: f64,
    #[serde(default = "default_theta_max")]
    pub theta_max_deg: f64,
    /// User distance held fixed on the reference-SNR axis.
    #[serde(default = "default_fixed_distance")]
    pub fixed_distance_m: f64,
    /// P_A·f² held fixed on the distance axis, watts.
    #[serde(default = "default_tx_path_power")]
    pub tx_path_power_w: f64,
    #[serde(default = "default_noise_power")]
    pub noise_power_w: f64,
    #[serde(default = "default_n_elements")]
    pub n_elements: usize,
    #[serde(default = "default_wavelength")]
    pub wavelength_m: f64,
    #[serde(default = "default_gain")]
    pub irs_element_gain: f64,
    #[serde(default = "default_gain")]
    pub ue_antenna_gain: f64,
    /// Defaults to λ²/4π when absent.
    #[serde(default)]
    pub ue_aperture_m2: Option<f64>,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    /// Replace infinite distance estimates by 10× the Rayleigh distance in
    /// the distance RMSE (when false they are excluded instead).
    #[serde(default = "default_clamp")]
    pub clamp_infinite_estimates: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Config("points: must not be empty".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials: must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("schemes: must not be empty".into()));
        }
        if !(self.theta_min_deg >= -90.0
            && self.theta_max_deg <= 90.0
            && self.theta_min_deg < self.theta_max_deg)
        {
            return Err(Error::Config(format!(
                "theta range [{}, {}) deg must be inside [-90, 90)",
                self.theta_min_deg, self.theta_max_deg
            )));
        }
        match self.sweep_axis {
            SweepAxis::UeDistanceM => {
                for &p in &self.points {
                    if !(p > 0.0) || !p.is_finite() {
                        return Err(Error::Config(format!(
                            "points: distance {p} m must be positive"
                        )));
                    }
                }
            }
            SweepAxis::ReferenceSnrDb => {
                if !(self.fixed_distance_m > 0.0) {
                    return Err(Error::Config(format!(
                        "fixed_distance_m: {} must be positive",
                        self.fixed_distance_m
                    )));
                }
            }
        }
        self.base_config().map(|_| ())
    }

    /// System config shared by every trial (tx power is replaced per sweep
    /// point on the SNR axis).
    pub fn base_config(&self) -> Result<SystemConfig> {
        let cfg = SystemConfig::new(
            self.n_elements,
            self.wavelength_m,
            self.noise_power_w,
            self.tx_path_power_w,
        )?;
        let aperture = self
            .ue_aperture_m2
            .unwrap_or(self.wavelength_m * self.wavelength_m / (4.0 * std::f64::consts::PI));
        cfg.with_gains(self.irs_element_gain, self.ue_antenna_gain, aperture)
    }

    /// Parse the flat `key = value` format (`#` starts a comment).
    pub fn from_flat_str(text: &str) -> Result<Self> {
        let mut axis: Option<SweepAxis> = None;
        let mut points: Option<Vec<f64>> = None;
        let mut schemes: Option<Vec<Scheme>> = None;
        let mut spec = ExperimentSpec {
            sweep_axis: SweepAxis::ReferenceSnrDb,
            points: vec![],
            trials: default_trials(),
            schemes: vec![],
            theta_min_deg: default_theta_min(),
            theta_max_deg: default_theta_max(),
            fixed_distance_m: default_fixed_distance(),
            tx_path_power_w: default_tx_path_power(),
            noise_power_w: default_noise_power(),
            n_elements: default_n_elements(),
            wavelength_m: default_wavelength(),
            irs_element_gain: default_gain(),
            ue_antenna_gain: default_gain(),
            ue_aperture_m2: None,
            base_seed: default_seed(),
            clamp_infinite_estimates: default_clamp(),
        };

        fn num(key: &str, v: &str) -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))
        }

        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line `{line}` is not key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "axis" => {
                    axis = Some(match value {
                        "reference_snr_db" => SweepAxis::ReferenceSnrDb,
                        "ue_distance_m" => SweepAxis::UeDistanceM,
                        other => {
                            return Err(Error::Config(format!(
                                "axis: `{other}` is not reference_snr_db or ue_distance_m"
                            )))
                        }
                    })
                }
                "points" => {
                    let vals: Result<Vec<f64>> =
                        value.split(',').map(|v| num("points", v)).collect();
                    points = Some(vals?);
                }
                "trials" => spec.trials = num(key, value)? as usize,
                "schemes" => {
                    let vals: Result<Vec<Scheme>> = value
                        .split(',')
                        .map(|s| {
                            Scheme::parse_compact(s)
                                .map_err(|e| Error::Config(format!("schemes: {e}")))
                        })
                        .collect();
                    schemes = Some(vals?);
                }
                "theta_min_deg" => spec.theta_min_deg = num(key, value)?,
                "theta_max_deg" => spec.theta_max_deg = num(key, value)?,
                "fixed_distance_m" => spec.fixed_distance_m = num(key, value)?,
                "tx_path_power_mw" => spec.tx_path_power_w = num(key, value)? * 1e-3,
                "noise_dbm" => {
                    spec.noise_power_w = 10f64.powf(num(key, value)? / 10.0) * 1e-3
                }
                "n_elements" => spec.n_elements = num(key, value)? as usize,
                "wavelength_m" => spec.wavelength_m = num(key, value)?,
                "irs_element_gain" => spec.irs_element_gain = num(key, value)?,
                "ue_antenna_gain" => spec.ue_antenna_gain = num(key, value)?,
                "ue_aperture_m2" => spec.ue_aperture_m2 = Some(num(key, value)?),
                "seed" => spec.base_seed = num(key, value)? as u64,
                "clamp_infinite_estimates" => {
                    spec.clamp_infinite_estimates = match value {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        other => {
                            return Err(Error::Config(format!(
                                "clamp_infinite_estimates: `{other}` is not true/false"
                            )))
                        }
                    }
                }
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        spec.sweep_axis = axis.ok_or_else(|| Error::Config("axis: missing".into()))?;
        spec.points = points.ok_or_else(|| Error::Config("points: missing".into()))?;
        spec.schemes = schemes.ok_or_else(|| Error::Config("schemes: missing".into()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("json spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Aggregated results for one (scheme, sweep point) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: String,
    pub point: f64,
    /// None when the scheme produces no distance estimate (DFT) or every
    /// estimate was excluded.
    pub rmse_distance_m: Option<f64>,
    pub rmse_angle_deg: f64,
    pub mean_rate_bps_hz: f64,
    pub trials: usize,
    pub overhead: usize,
}

/// Experiment output: the spec (for provenance) plus one row per
/// scheme × sweep point, scheme-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(
            "scheme,axis,point,rmse_distance_m,rmse_angle_deg,mean_rate_bps_hz,trials,overhead\n",
        );
        for r in &self.rows {
            let rmse_d = r
                .rmse_distance_m
                .map(|v| format!("{v}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.scheme,
                self.spec.sweep_axis.as_str(),
                r.point,
                rmse_d,
                r.rmse_angle_deg,
                r.mean_rate_bps_hz,
                r.trials,
                r.overhead
            ));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn row(&self, scheme_label: &str, point: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme_label && r.point == point)
    }
}

/// sqrt(mean((estimate − truth)²)) over (estimate, truth) pairs.
pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Usage("rmse of an empty list".into()));
    }
    let ms: f64 = pairs
        .iter()
        .map(|&(est, truth)| (est - truth) * (est - truth))
        .sum::<f64>()
        / pairs.len() as f64;
    Ok(ms.sqrt())
}

struct TrialRecord {
    scheme_idx: usize,
    d_true: f64,
    theta_true: f64,
    d_hat: Option<f64>,
    theta_hat: f64,
    rate: f64,
    overhead: usize,
}

/// Draw the shared channel realization of one (point, trial) cell:
/// the user angle (radians) followed by the N BS-to-element phases.
pub fn draw_trial_channel(spec: &ExperimentSpec, point_idx: usize, trial: usize) -> (f64, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(channel_seed(spec.base_seed, point_idx, trial));
    let theta = rng
        .random_range(spec.theta_min_deg.to_radians()..spec.theta_max_deg.to_radians());
    let omegas = (0..spec.n_elements)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    (theta, omegas)
}

fn run_trial(
    spec: &ExperimentSpec,
    base: &SystemConfig,
    point_idx: usize,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let point = spec.points[point_idx];
    let (d_true, txp) = match spec.sweep_axis {
        SweepAxis::ReferenceSnrDb => (
            spec.fixed_distance_m,
            base.tx_path_power_for_snr_db(point, spec.fixed_distance_m),
        ),
        SweepAxis::UeDistanceM => (point, spec.tx_path_power_w),
    };
    let (theta, omegas) = draw_trial_channel(spec, point_idx, trial);
    let mut cfg = base.clone();
    cfg.tx_path_power = txp;
    cfg = cfg.with_bs_irs_phases(omegas)?;
    let p = PolarPoint::new(theta, d_true)?;

    spec.schemes
        .iter()
        .enumerate()
        .map(|(scheme_idx, scheme)| {
            let mut mm = MeasurementModel::new(
                cfg.noise_power,
                scheme_seed(spec.base_seed, point_idx, trial, scheme),
            );
            let out = run_scheme(&cfg, &p, scheme, &mut mm)?;
            Ok(TrialRecord {
                scheme_idx,
                d_true,
                theta_true: theta,
                d_hat: out.d_hat,
                theta_hat: out.theta_hat,
                rate: out.rate,
                overhead: out.overhead,
            })
        })
        .collect()
}

/// Run the experiment. Trials execute in parallel; aggregation is an
/// order-fixed reduction, so the report only depends on the spec.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let base = spec.base_config()?;
    let d_clamp = d_hat_bounds(&base).1;

    let cells: Vec<(usize, usize)> = (0..spec.points.len())
        .flat_map(|pi| (0..spec.trials).map(move |t| (pi, t)))
        .collect();
    let per_cell: Vec<Result<Vec<TrialRecord>>> = cells
        .par_iter()
        .map(|&(pi, t)| run_trial(spec, &base, pi, t))
        .collect();

    // point index -> scheme index -> records
    let mut grouped: Vec<Vec<Vec<TrialRecord>>> = (0..spec.points.len())
        .map(|_| (0..spec.schemes.len()).map(|_| Vec::new()).collect())
        .collect();
    for (&(pi, _), cell) in cells.iter().zip(per_cell) {
        for rec in cell? {
            grouped[pi][rec.scheme_idx].push(rec);
        }
    }

    let mut rows = Vec::with_capacity(spec.schemes.len() * spec.points.len());
    for (si, scheme) in spec.schemes.iter().enumerate() {
        for (pi, &point) in spec.points.iter().enumerate() {
            let records = &grouped[pi][si];
            let angle_pairs: Vec<(f64, f64)> = records
                .iter()
                .map(|r| (r.theta_hat.to_degrees(), r.theta_true.to_degrees()))
                .collect();
            let mut dist_pairs = Vec::new();
            for r in records {
                if let Some(d_hat) = r.d_hat {
                    if d_hat.is_infinite() {
                        if spec.clamp_infinite_estimates {
                            dist_pairs.push((d_clamp, r.d_true));
                        }
                    } else {
                        dist_pairs.push((d_hat, r.d_true));
                    }
                }
            }
            let mean_rate =
                records.iter().map(|r| r.rate).sum::<f64>() / records.len() as f64;
            let overhead = records[0].overhead;
            debug_assert!(records.iter().all(|r| r.overhead == overhead));
            rows.push(ReportRow {
                scheme: scheme.label(),
                point,
                rmse_distance_m: if dist_pairs.is_empty() {
                    None
                } else {
                    Some(rmse(&dist_pairs)?)
                },
                rmse_angle_deg: rmse(&angle_pairs)?,
                mean_rate_bps_hz: mean_rate,
                trials: records.len(),
                overhead,
            });
        }
    }
    Ok(ExperimentReport {
        spec: spec.clone(),
        rows,
    })
}
