//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured values (run with `--nocapture` to see them).
//!
//! Criterion 7's rate clause is a known red: the layer-2 angular grid has
//! half-bin offsets up to 1/N in the sine domain, costing a mean array-gain
//! loss of ≈1.1 dB (worst case (2/π)² ≈ −3.9 dB at a bin edge). That puts
//! the trained mean rate ≈2.5% (≈0.43 bps/Hz) below the genie bound at
//! these SNRs, and the loss is N-invariant, so the 0.5% gate cannot be met
//! by any parameter choice. The distance and angle clauses pass.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use irsbeam::codebook::{
    beam_pattern, default_angle_grid, farfield_codeword, layer1_codebook, nearfield_codeword,
    random_phase_pattern, uniform_angle_grid,
};
use irsbeam::experiment::{mix_seed, run_experiment, ExperimentSpec, SweepAxis};
use irsbeam::geometry::{PolarPoint, SystemConfig};
use irsbeam::stats::{coherent_sum_power, lemma1_check, pairwise_cosine_identity, random_phases};
use irsbeam::training::{perfect_csi, run_scheme, run_two_layer, MeasurementModel, Scheme};

fn table_config() -> SystemConfig {
    let sigma2 = 10f64.powf(-94.0 / 10.0) * 1e-3;
    SystemConfig::new(200, 0.01, sigma2, 0.05e-3).unwrap()
}

#[test]
fn criterion_1_coherent_power_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=64);
        let phases = random_phases(n, &mut rng);
        let gap = (coherent_sum_power(&phases) - pairwise_cosine_identity(&phases)).abs();
        worst = worst.max(gap);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst < 1e-9, "identity gap {worst}");
    assert!(elapsed < 1.0, "took {elapsed} s");
    println!("criterion 1: PASS — max identity gap {worst:.2e} over 1000 vectors in {elapsed:.3} s");
}

#[test]
fn criterion_2_random_phase_power_statistics() {
    let start = Instant::now();
    let mut cfg = SystemConfig::new(64, 0.01, 1e-12, 1e-3).unwrap();
    cfg.randomize_bs_irs_phases(&mut ChaCha8Rng::seed_from_u64(1002));
    let p = PolarPoint::from_degrees(17.0, 3.0).unwrap();
    let rep = lemma1_check(&cfg, &p, 20_000, 500, 400, 2002).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        rep.mean_ok,
        "sample mean {} vs expected {}",
        rep.sample_mean, rep.expected_mean
    );
    assert!(
        rep.variance_ok,
        "sample variance {} vs expected {}",
        rep.sample_variance, rep.expected_variance
    );
    assert!(
        rep.normality_ok,
        "K-S statistic {} vs critical {}",
        rep.ks_stat, rep.ks_critical
    );
    assert!(elapsed < 30.0, "took {elapsed} s");
    println!(
        "criterion 2: PASS — mean off by {:.3}%, variance off by {:.2}%, K-S {:.4} < {:.4}, in {elapsed:.1} s",
        100.0 * (rep.sample_mean / rep.expected_mean - 1.0).abs(),
        100.0 * (rep.sample_variance / rep.expected_variance - 1.0).abs(),
        rep.ks_stat,
        rep.ks_critical
    );
}

#[test]
fn criterion_3_focus_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut cfg = table_config();
    let rayleigh = cfg.rayleigh_distance();
    let mut worst = 0f64;
    for _ in 0..100 {
        cfg.randomize_bs_irs_phases(&mut rng);
        let theta = rng.random_range(-60f64..60.0).to_radians();
        let d = rng.random_range(0.5..0.95 * rayleigh);
        let p = PolarPoint::new(theta, d).unwrap();
        let cw = nearfield_codeword(&cfg, &p);
        let pat = beam_pattern(&cfg, &cw, d, &[theta]).unwrap();
        worst = worst.max((pat.samples[0].1 - 1.0).abs());
    }
    assert!(worst <= 1e-9, "worst focus deviation {worst}");
    println!("criterion 3: PASS — worst |pattern(focus) - 1| = {worst:.2e} over 100 foci");
}

#[test]
fn criterion_4_beam_broadening() {
    let cfg = SystemConfig::new(256, 0.01, 1e-12, 1e-3).unwrap();
    let grid = default_angle_grid();
    let focus = PolarPoint::new(0.0, 6.0).unwrap();
    let near = beam_pattern(&cfg, &nearfield_codeword(&cfg, &focus), 6.0, &grid).unwrap();
    let far = beam_pattern(&cfg, &farfield_codeword(&cfg, 0.0), 6.0, &grid).unwrap();

    let near_peak = near.peak().1;
    let far_peak = far.peak().1;
    assert!((near_peak - 1.0).abs() < 1e-12);
    assert!(far_peak < 1.0, "far-field peak {far_peak} not < 1");
    let near_support = near.half_peak_support_deg();
    let far_support = far.half_peak_support_deg();
    assert!(
        far_support >= 3.0 * near_support,
        "support {far_support}° vs 3×{near_support}°"
    );
    // Regression pin from the first verified run of this configuration.
    let pinned = 0.053643916155233;
    assert!(
        (far_peak - pinned).abs() <= 1e-6 * pinned,
        "far-field peak {far_peak} drifted from pinned {pinned}"
    );
    println!(
        "criterion 4: PASS — far peak {far_peak:.6} (pinned), -3 dB support {far_support:.2}° vs near {near_support:.2}° ({:.1}×)",
        far_support / near_support
    );
}

#[test]
fn criterion_5_random_phase_omnidirectionality() {
    let cfg = SystemConfig::new(256, 0.01, 1e-12, 1e-3).unwrap();
    let grid = uniform_angle_grid(-90.0, 90.0, 0.25);
    let flat = 1.0 / 256.0;
    let deviation = |c_count: usize, seed: u64| {
        let cb = layer1_codebook(&cfg, c_count, &mut ChaCha8Rng::seed_from_u64(seed));
        let pat = random_phase_pattern(&cfg, &cb, 6.0, &grid).unwrap();
        let ms = pat
            .samples
            .iter()
            .map(|s| (s.1 - flat) * (s.1 - flat))
            .sum::<f64>()
            / pat.samples.len() as f64;
        ms.sqrt()
    };
    let dev100 = deviation(100, 1051);
    let dev2000 = deviation(2000, 1052);
    assert!(
        dev2000 <= dev100 / 3.0,
        "dev(C=2000) {dev2000} vs dev(C=100)/3 {}",
        dev100 / 3.0
    );
    println!(
        "criterion 5: PASS — deviation from 1/N: C=100 {dev100:.3e}, C=2000 {dev2000:.3e} ({:.2}× smaller)",
        dev100 / dev2000
    );
}

#[test]
fn criterion_6_overhead_exactness() {
    let mut cfg = table_config();
    cfg.randomize_bs_irs_phases(&mut ChaCha8Rng::seed_from_u64(1006));
    let p = PolarPoint::from_degrees(20.0, 3.0).unwrap();
    let mut mm = MeasurementModel::new(cfg.noise_power, 3006);
    let cases = [
        (Scheme::TwoLayer { c_count: 500 }, 201usize),
        (Scheme::Dft, 200),
        (Scheme::ExhaustivePolar { s_count: 10, d_min: 1.2 }, 2000),
        (Scheme::TwoPhase { k_count: 3, s_count: 10, d_min: 1.2 }, 230),
        (Scheme::PerfectCsi, 0),
    ];
    for (scheme, want) in cases {
        let out = run_scheme(&cfg, &p, &scheme, &mut mm).unwrap();
        assert_eq!(out.overhead, want, "{}", scheme.label());
        assert_eq!(out.overhead, scheme.overhead(cfg.n_elements));
    }
    println!("criterion 6: PASS — overheads 201 / 200 / 2000 / 230 / 0 codeword slots");
}

#[test]
fn criterion_7_noiseless_consistency() {
    let start = Instant::now();
    let base = table_config();
    let n = base.n_elements as f64;
    let results: Vec<(f64, f64, f64, f64)> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let mut crng = ChaCha8Rng::seed_from_u64(mix_seed(&[77, i, 0]));
            let theta = crng.random_range(-60f64..60.0).to_radians();
            let d = crng.random_range(1.0..10.0);
            let mut cfg = base.clone();
            cfg.randomize_bs_irs_phases(&mut crng);
            let p = PolarPoint::new(theta, d).unwrap();
            let mut mm = MeasurementModel::noiseless(mix_seed(&[77, i, 1]));
            let out = run_two_layer(&cfg, &p, 4096, &mut mm).unwrap();
            let genie = perfect_csi(&cfg, &p).unwrap();
            (
                (out.d_hat.unwrap() - d) / d,
                (out.theta_hat.sin() - theta.sin()).abs(),
                out.rate,
                genie.rate,
            )
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();

    let rms_d = (results.iter().map(|r| r.0 * r.0).sum::<f64>() / 500.0).sqrt();
    let max_sin = results.iter().map(|r| r.1).fold(0.0f64, f64::max);
    let mean_rate = results.iter().map(|r| r.2).sum::<f64>() / 500.0;
    let mean_genie = results.iter().map(|r| r.3).sum::<f64>() / 500.0;
    let ratio = mean_rate / mean_genie;

    println!(
        "criterion 7: distance RMS rel err {:.3}% (gate 2%), max |sin err| {:.5} (gate {:.5}), \
         mean rate {mean_rate:.3} vs genie {mean_genie:.3} (ratio {ratio:.4}, gate 0.995), in {elapsed:.0} s",
        100.0 * rms_d,
        max_sin,
        2.0 / n
    );
    assert!(elapsed < 120.0, "took {elapsed} s");
    assert!(rms_d <= 0.02, "distance RMS relative error {rms_d}");
    assert!(max_sin <= 2.0 / n, "max sine-domain angle error {max_sin}");
    assert!(
        ratio >= 0.995,
        "mean trained rate is {:.2}% of the genie bound; the half-bin angular-grid \
         array-gain loss (mean ≈ -1.1 dB, ≈ 0.43 bps/Hz here) caps this ratio near 97.5% \
         for every N, so the 0.5% gate is unreachable",
        100.0 * ratio
    );
}

fn trend_spec(axis: SweepAxis, points: Vec<f64>) -> ExperimentSpec {
    ExperimentSpec {
        sweep_axis: axis,
        points,
        trials: 200,
        schemes: vec![
            Scheme::TwoLayer { c_count: 2000 },
            Scheme::TwoLayer { c_count: 100 },
            Scheme::ExhaustivePolar { s_count: 10, d_min: 1.2 },
            Scheme::TwoPhase { k_count: 3, s_count: 10, d_min: 1.2 },
            Scheme::Dft,
            Scheme::PerfectCsi,
        ],
        theta_min_deg: -60.0,
        theta_max_deg: 60.0,
        fixed_distance_m: 3.0,
        tx_path_power_w: 0.05e-3,
        noise_power_w: 10f64.powf(-9.4) * 1e-3,
        n_elements: 200,
        wavelength_m: 0.01,
        irs_element_gain: 1.0,
        ue_antenna_gain: 1.0,
        ue_aperture_m2: None,
        base_seed: 20260810,
        clamp_infinite_estimates: true,
    }
}

#[test]
fn criterion_8_trend_reproduction() {
    let start = Instant::now();
    let snr_points = vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
    let snr = run_experiment(&trend_spec(SweepAxis::ReferenceSnrDb, snr_points.clone())).unwrap();

    // (a) larger layer-1 codebooks estimate distance better at every point.
    for &pt in &snr_points {
        let big = snr.row("two_layer_c2000", pt).unwrap().rmse_distance_m.unwrap();
        let small = snr.row("two_layer_c100", pt).unwrap().rmse_distance_m.unwrap();
        assert!(big < small, "(a) at {pt} dB: C=2000 {big} vs C=100 {small}");
    }

    // (b) at 20 dB and above the proposed scheme's angle RMSE is no worse
    // than either polar-domain benchmark.
    for &pt in snr_points.iter().filter(|&&p| p >= 20.0) {
        let ours = snr.row("two_layer_c2000", pt).unwrap().rmse_angle_deg;
        let ex = snr.row("exhaustive_s10", pt).unwrap().rmse_angle_deg;
        let tp = snr.row("two_phase_k3_s10", pt).unwrap().rmse_angle_deg;
        assert!(ours <= ex, "(b) at {pt} dB: {ours}° vs exhaustive {ex}°");
        assert!(ours <= tp, "(b) at {pt} dB: {ours}° vs two-phase {tp}°");
    }

    // (c) proposed rate dominates DFT everywhere and tracks the genie bound
    // within 1 bps/Hz from 20 dB up.
    for &pt in &snr_points {
        let ours = snr.row("two_layer_c2000", pt).unwrap().mean_rate_bps_hz;
        let dft = snr.row("dft", pt).unwrap().mean_rate_bps_hz;
        assert!(ours >= dft, "(c) at {pt} dB: {ours} vs dft {dft}");
        if pt >= 20.0 {
            let genie = snr.row("perfect_csi", pt).unwrap().mean_rate_bps_hz;
            assert!(genie - ours <= 1.0, "(c) at {pt} dB: gap {}", genie - ours);
        }
    }

    // (d-f) distance sweep: every scheme's mean rate decreases with
    // distance, and the four training schemes converge at 60 m (the genie
    // bound keeps its half-bin-loss gap and never converges to them).
    let dist_points = vec![5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0];
    let spec = trend_spec(SweepAxis::UeDistanceM, dist_points.clone());
    let dist = run_experiment(&spec).unwrap();
    let labels: Vec<String> = spec.schemes.iter().map(|s| s.label()).collect();
    for label in &labels {
        let rates: Vec<f64> = dist_points
            .iter()
            .map(|&p| dist.row(label, p).unwrap().mean_rate_bps_hz)
            .collect();
        for w in rates.windows(2) {
            assert!(w[1] < w[0], "(d-f) {label} rate not decreasing: {rates:?}");
        }
    }
    let at60: Vec<f64> = labels
        .iter()
        .filter(|l| l.as_str() != "perfect_csi")
        .map(|l| dist.row(l, 60.0).unwrap().mean_rate_bps_hz)
        .collect();
    let max60 = at60.iter().cloned().fold(f64::MIN, f64::max);
    let min60 = at60.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max60 - min60) / max60;
    assert!(spread <= 0.05, "(d-f) spread at 60 m {spread}");

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "took {elapsed} s");
    println!(
        "criterion 8: PASS — (a) C=2000 < C=100 at all {} points, (b) proposed ≤ both polar \
         benchmarks ≥ 20 dB, (c) ≥ DFT everywhere and ≤ 1 bps/Hz from genie ≥ 20 dB, \
         (d-f) all rates monotone, training schemes within {:.2}% at 60 m, in {elapsed:.0} s",
        snr_points.len(),
        100.0 * spread
    );
}

#[test]
fn criterion_9_determinism() {
    let mut spec = trend_spec(SweepAxis::ReferenceSnrDb, vec![20.0, 30.0]);
    spec.trials = 2;
    spec.n_elements = 64;
    spec.schemes = vec![
        Scheme::TwoLayer { c_count: 200 },
        Scheme::Dft,
        Scheme::PerfectCsi,
    ];
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    assert_eq!(a.to_json_string(), b.to_json_string());
    println!("criterion 9: PASS — repeated runs are byte-identical (CSV and JSON)");
}
