//! Browser bindings: three interactive operations for the static demo page
//! in `www/` — array facts, beam-pattern curves, and single training runs.
//!
//! Build with `wasm-pack build --target web` and open `www/index.html`
//! through any static file server. The `*_impl` functions hold all the
//! logic and run natively (that is what the unit tests cover); the exported
//! wrappers only translate errors to JS values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use irsbeam::codebook::{
    beam_pattern, farfield_codeword, layer1_codebook, nearfield_codeword, random_phase_pattern,
    uniform_angle_grid,
};
use irsbeam::experiment::{mix_seed, CHANNEL_TAG};
use irsbeam::geometry::{PolarPoint, SystemConfig};
use irsbeam::training::{perfect_csi, run_scheme, MeasurementModel, Scheme};

/// Desk-scale defaults matching the CLI: −94 dBm noise, P_A·f² = 0.05 mW.
fn demo_config(n: usize, lambda_m: f64) -> Result<SystemConfig, String> {
    let noise_w = 10f64.powf(-94.0 / 10.0) * 1e-3;
    SystemConfig::new(n, lambda_m, noise_w, 0.05e-3).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ArrayInfo {
    n_elements: usize,
    wavelength_m: f64,
    aperture_m: f64,
    rayleigh_m: f64,
    /// Angular width of one DFT bin at broadside, degrees.
    dft_bin_deg: f64,
    reference_snr_db_at_3m: f64,
}

fn array_info_impl(n: usize, lambda_m: f64) -> Result<String, String> {
    let cfg = demo_config(n, lambda_m)?;
    let info = ArrayInfo {
        n_elements: n,
        wavelength_m: lambda_m,
        aperture_m: cfg.aperture_length(),
        rayleigh_m: cfg.rayleigh_distance(),
        dft_bin_deg: (2.0 / n as f64).asin().to_degrees(),
        reference_snr_db_at_3m: cfg.reference_snr_db(3.0),
    };
    serde_json::to_string(&info).map_err(|e| e.to_string())
}

fn pattern_points_impl(
    kind: &str,
    theta_deg: f64,
    d_m: f64,
    radius_m: f64,
    n: usize,
    lambda_m: f64,
    c_count: usize,
    seed: u64,
    grid_step_deg: f64,
) -> Result<Vec<f64>, String> {
    let cfg = demo_config(n, lambda_m)?;
    let p = PolarPoint::from_degrees(theta_deg, d_m).map_err(|e| e.to_string())?;
    let grid = uniform_angle_grid(-90.0, 90.0, grid_step_deg);
    let pat = match kind {
        "near" => beam_pattern(&cfg, &nearfield_codeword(&cfg, &p), radius_m, &grid),
        "far" => beam_pattern(&cfg, &farfield_codeword(&cfg, p.angle), radius_m, &grid),
        "random" => {
            let cb = layer1_codebook(&cfg, c_count.max(1), &mut ChaCha8Rng::seed_from_u64(seed));
            random_phase_pattern(&cfg, &cb, radius_m, &grid)
        }
        other => return Err(format!("unknown pattern kind `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * pat.samples.len());
    for (theta, power) in pat.samples {
        out.push(theta.to_degrees());
        out.push(power);
    }
    Ok(out)
}

#[derive(Serialize)]
struct TrainResult {
    scheme: String,
    d_true_m: f64,
    theta_true_deg: f64,
    d_hat_m: Option<f64>,
    theta_hat_deg: f64,
    overhead: usize,
    rate_bps_hz: f64,
    perfect_rate_bps_hz: f64,
    low_snr: bool,
}

#[allow(clippy::too_many_arguments)]
fn train_once_impl(
    scheme_name: &str,
    theta_deg: f64,
    d_m: f64,
    snr_db: f64,
    c_count: usize,
    k_count: usize,
    s_count: usize,
    seed: u64,
) -> Result<String, String> {
    let scheme = match scheme_name {
        "two_layer" => Scheme::TwoLayer { c_count: c_count.max(1) },
        "dft" => Scheme::Dft,
        "exhaustive" => Scheme::ExhaustivePolar { s_count: s_count.max(2), d_min: 1.2 },
        "two_phase" => Scheme::TwoPhase {
            k_count: k_count.max(1),
            s_count: s_count.max(2),
            d_min: 1.2,
        },
        "perfect_csi" => Scheme::PerfectCsi,
        other => return Err(format!("unknown scheme `{other}`")),
    };
    let mut cfg = demo_config(200, 0.01)?;
    let p = PolarPoint::from_degrees(theta_deg, d_m).map_err(|e| e.to_string())?;
    cfg.tx_path_power = cfg.tx_path_power_for_snr_db(snr_db, d_m);
    let mut crng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, CHANNEL_TAG]));
    cfg.randomize_bs_irs_phases(&mut crng);
    let w = scheme.seed_words();
    let mut mm = MeasurementModel::new(
        cfg.noise_power,
        mix_seed(&[seed, w[0], w[1], w[2], w[3]]),
    );
    let out = run_scheme(&cfg, &p, &scheme, &mut mm).map_err(|e| e.to_string())?;
    let genie = perfect_csi(&cfg, &p).map_err(|e| e.to_string())?;
    let result = TrainResult {
        scheme: out.scheme.label(),
        d_true_m: d_m,
        theta_true_deg: theta_deg,
        d_hat_m: out.d_hat.map(|d| if d.is_infinite() { -1.0 } else { d }),
        theta_hat_deg: out.theta_hat.to_degrees(),
        overhead: out.overhead,
        rate_bps_hz: out.rate,
        perfect_rate_bps_hz: genie.rate,
        low_snr: out.low_snr,
    };
    serde_json::to_string(&result).map_err(|e| e.to_string())
}

/// Array geometry and link facts as a JSON string.
#[wasm_bindgen]
pub fn array_info(n: usize, lambda_m: f64) -> Result<String, JsValue> {
    array_info_impl(n, lambda_m).map_err(|e| JsValue::from_str(&e))
}

/// Beam-pattern curve as interleaved (theta_deg, normalized_power) pairs.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn pattern_points(
    kind: &str,
    theta_deg: f64,
    d_m: f64,
    radius_m: f64,
    n: usize,
    lambda_m: f64,
    c_count: usize,
    seed: u64,
    grid_step_deg: f64,
) -> Result<Vec<f64>, JsValue> {
    pattern_points_impl(
        kind,
        theta_deg,
        d_m,
        radius_m,
        n,
        lambda_m,
        c_count,
        seed,
        grid_step_deg,
    )
    .map_err(|e| JsValue::from_str(&e))
}

/// One seeded training run (N=200, λ=1 cm, −94 dBm) as a JSON string.
/// An infinite distance estimate is encoded as d_hat_m = -1.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn train_once(
    scheme_name: &str,
    theta_deg: f64,
    d_m: f64,
    snr_db: f64,
    c_count: usize,
    k_count: usize,
    s_count: usize,
    seed: u64,
) -> Result<String, JsValue> {
    train_once_impl(scheme_name, theta_deg, d_m, snr_db, c_count, k_count, s_count, seed)
        .map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_info_reports_rayleigh() {
        let json = array_info_impl(256, 0.01).unwrap();
        assert!(json.contains("\"rayleigh_m\":327.68"), "{json}");
    }

    #[test]
    fn pattern_near_curve_peaks_at_focus() {
        let pts = pattern_points_impl("near", 10.0, 6.0, 6.0, 128, 0.01, 0, 1, 0.25).unwrap();
        assert_eq!(pts.len() % 2, 0);
        let (mut best_theta, mut best_p) = (0.0, 0.0);
        for pair in pts.chunks(2) {
            if pair[1] > best_p {
                best_theta = pair[0];
                best_p = pair[1];
            }
        }
        assert!((best_theta - 10.0).abs() <= 0.25);
        assert!(best_p > 0.99);
    }

    #[test]
    fn pattern_rejects_bad_inputs() {
        assert!(pattern_points_impl("nope", 0.0, 6.0, 6.0, 64, 0.01, 0, 1, 1.0).is_err());
        // radius beyond the Rayleigh distance of a 64-element array
        assert!(pattern_points_impl("near", 0.0, 6.0, 100.0, 64, 0.01, 0, 1, 1.0).is_err());
    }

    #[test]
    fn train_once_round_trips_json() {
        let json = train_once_impl("two_layer", 10.0, 3.0, 30.0, 500, 3, 10, 1).unwrap();
        assert!(json.contains("\"overhead\":201"), "{json}");
        assert!(json.contains("\"scheme\":\"two_layer_c500\""));
        let json = train_once_impl("perfect_csi", -20.0, 2.0, 25.0, 0, 0, 0, 1).unwrap();
        assert!(json.contains("\"overhead\":0"));
        assert!(train_once_impl("nope", 0.0, 3.0, 30.0, 1, 1, 2, 1).is_err());
    }
}
