//! `irsbeam` — near-field beam-training simulator CLI.
//!
//! Subcommands:
//! * `pattern`      — normalized beam-pattern curve of one codeword family
//!                    (near-field, far-field, or averaged random-phase) as CSV;
//! * `train`        — one beam-training run at a given true user location;
//! * `sweep`        — a full Monte-Carlo sweep from a spec file (CSV + JSON);
//! * `lemma1-check` — the random-phase power-statistics suite.
//!
//! Angles at this boundary are degrees, noise in dBm, transmit path power in
//! mW; everything internal is radians/watts. Output files land in
//! `--out-dir`, the `IRSBEAM_OUT_DIR` environment variable, or the current
//! directory, in that order of preference.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 numerical-domain
//! error (e.g. pattern radius at or beyond the Rayleigh distance).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use irsbeam::codebook::{
    beam_pattern, farfield_codeword, layer1_codebook, nearfield_codeword, random_phase_pattern,
    uniform_angle_grid,
};
use irsbeam::experiment::{mix_seed, run_experiment, ExperimentSpec, CHANNEL_TAG};
use irsbeam::geometry::{PolarPoint, SystemConfig};
use irsbeam::stats::lemma1_check;
use irsbeam::training::{run_scheme, MeasurementModel, Scheme, TRAINING_CSV_HEADER};
use irsbeam::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "irsbeam",
    about = "Near-field beam training for reflecting surfaces: patterns, training runs, Monte-Carlo sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Array and link parameters shared by the subcommands. Defaults are the
/// desk-scale reference setup: N=200, λ=1 cm, −94 dBm noise, unit gains,
/// A^U=λ²/4π, P_A·f²=0.05 mW.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Number of array elements (even).
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Carrier wavelength in meters.
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    /// Noise power in dBm (rate evaluation and default measurement noise).
    #[arg(long, default_value_t = -94.0)]
    noise_dbm: f64,
    /// Transmit power × squared BS-surface path gain, in mW.
    #[arg(long, default_value_t = 0.05)]
    txp_mw: f64,
}

impl ConfigArgs {
    fn build(&self) -> Result<SystemConfig, Error> {
        let noise_w = 10f64.powf(self.noise_dbm / 10.0) * 1e-3;
        SystemConfig::new(self.n, self.lambda, noise_w, self.txp_mw * 1e-3)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a normalized beam-pattern curve (theta_deg, normalized_power) as CSV.
    Pattern {
        /// Beamforming kind: near, far, or random.
        #[arg(long)]
        kind: String,
        /// Focus / steering angle in degrees.
        #[arg(long)]
        theta: f64,
        /// Focus distance in meters (also the default measuring radius).
        #[arg(long)]
        d: f64,
        /// Measuring-circle radius in meters (defaults to --d).
        #[arg(long)]
        radius: Option<f64>,
        /// Random-phase codebook size for --kind random.
        #[arg(long, default_value_t = 500)]
        c: usize,
        /// Pattern grid step in degrees over [-90, 90).
        #[arg(long, default_value_t = 0.05)]
        grid_step_deg: f64,
        /// RNG seed for the random-phase codebook.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path (default: <out-dir>/pattern.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output directory (overrides IRSBEAM_OUT_DIR).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run one beam-training round and print the estimates.
    Train {
        /// Scheme: two_layer, dft, exhaustive, two_phase, perfect_csi.
        #[arg(long)]
        scheme: String,
        /// True user angle in degrees.
        #[arg(long)]
        theta: f64,
        /// True user distance in meters.
        #[arg(long)]
        d: f64,
        /// Layer-1 codebook size (two_layer).
        #[arg(long, default_value_t = 2000)]
        c: usize,
        /// Shortlist size (two_phase).
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Distance rings (exhaustive / two_phase).
        #[arg(long, default_value_t = 10)]
        s: usize,
        /// Nearest distance ring in meters (exhaustive / two_phase).
        #[arg(long, default_value_t = 1.2)]
        d_min: f64,
        /// Measurement noise power in watts (0 = noiseless training);
        /// defaults to the configured noise power.
        #[arg(long)]
        sigma2: Option<f64>,
        /// Seed for the channel phases and measurement noise.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Set P_A·f² so the reference SNR at the true distance equals this
        /// value in dB (overrides --txp-mw).
        #[arg(long)]
        snr_db: Option<f64>,
        /// Append the outcome as a CSV row to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run a Monte-Carlo sweep described by a spec file (flat key=value, or
    /// JSON when the extension is .json) and write <stem>.csv / <stem>.json.
    Sweep {
        /// Path to the sweep spec.
        spec: PathBuf,
        /// Output directory (overrides IRSBEAM_OUT_DIR).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the random-phase power-statistics suite and print pass/fail.
    Lemma1Check {
        /// Independent codewords for the mean/variance estimates.
        #[arg(long, default_value_t = 20_000)]
        codewords: usize,
        /// Codewords averaged per sample in the normality check.
        #[arg(long, default_value_t = 500)]
        c: usize,
        /// Number of averaged samples in the normality check.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// User distance in meters.
        #[arg(long, default_value_t = 3.0)]
        d: f64,
        /// User angle in degrees.
        #[arg(long, default_value_t = 17.0)]
        theta: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("IRSBEAM_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_pattern(
    kind: &str,
    theta_deg: f64,
    d: f64,
    radius: Option<f64>,
    c: usize,
    grid_step_deg: f64,
    seed: u64,
    out: Option<PathBuf>,
    out_dir_flag: Option<PathBuf>,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let cfg = config.build()?;
    let p = PolarPoint::from_degrees(theta_deg, d)?;
    let radius = radius.unwrap_or(d);
    let grid = uniform_angle_grid(-90.0, 90.0, grid_step_deg);
    let pattern = match kind {
        "near" => beam_pattern(&cfg, &nearfield_codeword(&cfg, &p), radius, &grid)?,
        "far" => beam_pattern(&cfg, &farfield_codeword(&cfg, p.angle), radius, &grid)?,
        "random" => {
            let cb = layer1_codebook(&cfg, c, &mut ChaCha8Rng::seed_from_u64(seed));
            random_phase_pattern(&cfg, &cb, radius, &grid)?
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown pattern kind `{other}` (expected near, far, random)"
            )))
        }
    };
    let path = out.unwrap_or_else(|| out_dir(out_dir_flag).join("pattern.csv"));
    write_file(&path, &pattern.to_csv_string()).map_err(Error::Usage)?;
    println!(
        "wrote {} ({} rows, radius {radius} m)",
        path.display(),
        pattern.samples.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    scheme_name: &str,
    theta_deg: f64,
    d: f64,
    c: usize,
    k: usize,
    s: usize,
    d_min: f64,
    sigma2: Option<f64>,
    seed: u64,
    snr_db: Option<f64>,
    csv: Option<PathBuf>,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let scheme = match scheme_name {
        "two_layer" => Scheme::TwoLayer { c_count: c },
        "dft" => Scheme::Dft,
        "exhaustive" => Scheme::ExhaustivePolar { s_count: s, d_min },
        "two_phase" => Scheme::TwoPhase { k_count: k, s_count: s, d_min },
        "perfect_csi" => Scheme::PerfectCsi,
        other => {
            return Err(Error::Usage(format!(
                "unknown scheme `{other}` (expected two_layer, dft, exhaustive, two_phase, perfect_csi)"
            )))
        }
    };
    let mut cfg = config.build()?;
    let p = PolarPoint::from_degrees(theta_deg, d)?;
    if let Some(snr) = snr_db {
        cfg.tx_path_power = cfg.tx_path_power_for_snr_db(snr, d);
    }
    // Channel phases come from the seed's channel stream; the scheme gets
    // its own measurement stream, mirroring one sweep trial.
    let mut crng = ChaCha8Rng::seed_from_u64(mix_seed(&[seed, CHANNEL_TAG]));
    cfg.randomize_bs_irs_phases(&mut crng);
    let w = scheme.seed_words();
    let mm_seed = mix_seed(&[seed, w[0], w[1], w[2], w[3]]);
    let mut mm = MeasurementModel::new(sigma2.unwrap_or(cfg.noise_power), mm_seed);
    let out = run_scheme(&cfg, &p, &scheme, &mut mm)?;

    let d_hat = match out.d_hat {
        None => "none".to_string(),
        Some(v) if v.is_infinite() => "inf".to_string(),
        Some(v) => format!("{v:.6}"),
    };
    println!(
        "scheme={} d_true={} theta_true_deg={} d_hat={} theta_hat_deg={:.6} overhead={} rate_bps_hz={:.6} low_snr={}",
        out.scheme.label(),
        d,
        theta_deg,
        d_hat,
        out.theta_hat.to_degrees(),
        out.overhead,
        out.rate,
        out.low_snr
    );
    if let Some(path) = csv {
        let mut contents = if path.exists() {
            std::fs::read_to_string(&path)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?
        } else {
            format!("{TRAINING_CSV_HEADER}\n")
        };
        contents.push_str(&out.to_csv_row(d, p.angle, seed));
        contents.push('\n');
        write_file(&path, &contents).map_err(Error::Usage)?;
        println!("appended to {}", path.display());
    }
    Ok(())
}

fn cmd_sweep(spec_path: &Path, out_dir_flag: Option<PathBuf>) -> Result<(), Error> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", spec_path.display())))?;
    let spec = if spec_path.extension().is_some_and(|e| e == "json") {
        ExperimentSpec::from_json_str(&text)?
    } else {
        ExperimentSpec::from_flat_str(&text)?
    };
    let report = run_experiment(&spec)?;
    let stem = spec_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    let dir = out_dir(out_dir_flag);
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_file(&csv_path, &report.to_csv_string()).map_err(Error::Usage)?;
    write_file(&json_path, &report.to_json_string()).map_err(Error::Usage)?;
    println!(
        "wrote {} and {} ({} rows, {} trials/point)",
        csv_path.display(),
        json_path.display(),
        report.rows.len(),
        spec.trials
    );
    Ok(())
}

fn cmd_lemma1(
    codewords: usize,
    c: usize,
    samples: usize,
    d: f64,
    theta_deg: f64,
    seed: u64,
    config: &ConfigArgs,
) -> Result<(), Error> {
    let mut cfg = config.build()?;
    cfg.randomize_bs_irs_phases(&mut ChaCha8Rng::seed_from_u64(mix_seed(&[seed, CHANNEL_TAG])));
    let p = PolarPoint::from_degrees(theta_deg, d)?;
    let rep = lemma1_check(&cfg, &p, codewords, c, samples, seed)?;
    println!(
        "mean:      sample {:.6e} vs expected {:.6e} ({:+.3}%) -> {}",
        rep.sample_mean,
        rep.expected_mean,
        100.0 * (rep.sample_mean / rep.expected_mean - 1.0),
        if rep.mean_ok { "ok (within 1%)" } else { "FAIL" }
    );
    println!(
        "variance:  sample {:.6e} vs expected {:.6e} ({:+.2}%) -> {}",
        rep.sample_variance,
        rep.expected_variance,
        100.0 * (rep.sample_variance / rep.expected_variance - 1.0),
        if rep.variance_ok { "ok (within 10%)" } else { "FAIL" }
    );
    println!(
        "normality: K-S {:.4} vs 1%-level critical {:.4} ({} samples of C={}) -> {}",
        rep.ks_stat,
        rep.ks_critical,
        samples,
        c,
        if rep.normality_ok { "ok" } else { "FAIL" }
    );
    println!("lemma1-check: {}", if rep.pass() { "PASS" } else { "FAIL" });
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Pattern {
            kind,
            theta,
            d,
            radius,
            c,
            grid_step_deg,
            seed,
            out,
            out_dir,
            config,
        } => cmd_pattern(
            &kind,
            theta,
            d,
            radius,
            c,
            grid_step_deg,
            seed,
            out,
            out_dir,
            &config,
        ),
        Command::Train {
            scheme,
            theta,
            d,
            c,
            k,
            s,
            d_min,
            sigma2,
            seed,
            snr_db,
            csv,
            config,
        } => cmd_train(
            &scheme, theta, d, c, k, s, d_min, sigma2, seed, snr_db, csv, &config,
        ),
        Command::Sweep { spec, out_dir } => cmd_sweep(&spec, out_dir),
        Command::Lemma1Check {
            codewords,
            c,
            samples,
            d,
            theta,
            seed,
            config,
        } => cmd_lemma1(codewords, c, samples, d, theta, seed, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                Error::Domain(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
