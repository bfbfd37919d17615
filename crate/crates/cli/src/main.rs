//! Command-line front end: compute disparity maps, tune parameters with
//! the genetic optimizer, score maps against ground truth, and generate
//! synthetic fixtures.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error, 3
//! non-convergence warning escalated by --strict.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use stereopt::ga::{
    run_ga, run_pipeline, Chromosome, FitnessMetric, GaConfig, GaOutcome, ParameterSet,
};
use stereopt::img::{load_pfm, load_pgm, save_pfm, save_pgm, DisparityMap, GrayImage};
use stereopt::metrics;
use stereopt::synth::{generate, Pattern, SynthSpec};

#[derive(Parser)]
#[command(name = "stereopt", version, about = "Stereo disparity pipeline and GA parameter tuner")]
struct Cli {
    /// Worker threads for parallel stages (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Escalate non-convergence warnings to exit code 3.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a refined disparity map for a rectified stereo pair.
    Disparity {
        /// Left image (PGM).
        #[arg(long)]
        left: PathBuf,
        /// Right image (PGM).
        #[arg(long)]
        right: PathBuf,
        /// Parameter file (TOML); defaults are used when omitted.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output disparity map (PFM).
        #[arg(long)]
        out: PathBuf,
    },
    /// Tune the pipeline parameters against a ground-truth disparity map.
    Optimize {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Ground-truth disparity map (PFM).
        #[arg(long)]
        gt: PathBuf,
        /// Fitness metric: mse, psnr, or ssim.
        #[arg(long, value_parser = parse_metric)]
        metric: FitnessMetric,
        /// Number of generations.
        #[arg(long, default_value_t = 100)]
        gens: usize,
        /// Population size.
        #[arg(long, default_value_t = 30)]
        pop: usize,
        /// RNG seed; identical seeds reproduce runs byte for byte.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Convergence log (CSV: generation,best,mean,std).
        #[arg(long)]
        log: PathBuf,
        /// Output parameter file for the best individual.
        #[arg(long)]
        out: PathBuf,
        /// Disparity hypotheses per pixel.
        #[arg(long, default_value_t = 64)]
        num_disparities: usize,
        /// Baseline parameter file for the final comparison (default:
        /// the all-genes-midpoint chromosome).
        #[arg(long)]
        baseline_params: Option<PathBuf>,
    },
    /// Score a disparity map against ground truth (prints mse,psnr,ssim).
    Eval {
        /// Predicted disparity map (PFM).
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth disparity map (PFM).
        #[arg(long)]
        gt: PathBuf,
        /// Maximum possible disparity value for PSNR/SSIM constants.
        #[arg(long)]
        d_max: u32,
    },
    /// Generate a synthetic stereo pair with exact ground truth.
    Synth {
        #[arg(long, default_value_t = 128)]
        width: usize,
        #[arg(long, default_value_t = 96)]
        height: usize,
        /// Constant scene disparity in pixels (must be < width/2).
        #[arg(long, default_value_t = 8)]
        disparity: usize,
        /// Texture: uniform-noise, bands, or checker.
        #[arg(long, default_value = "uniform-noise", value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        #[arg(long)]
        out_left: PathBuf,
        #[arg(long)]
        out_right: PathBuf,
        #[arg(long)]
        out_gt: PathBuf,
    },
}

fn parse_metric(s: &str) -> Result<FitnessMetric, String> {
    s.parse()
}

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    s.parse()
}

/// Command failure with its exit class.
enum CmdError {
    Usage(String),
    Data(String),
    Strict(String),
}

impl CmdError {
    fn exit_code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => 1,
            CmdError::Data(_) => 2,
            CmdError::Strict(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CmdError::Usage(m) | CmdError::Data(m) | CmdError::Strict(m) => m,
        }
    }
}

impl From<stereopt::Error> for CmdError {
    fn from(e: stereopt::Error) -> Self {
        CmdError::Data(e.to_string())
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 1;
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: failed to build worker pool: {e}");
            return 1;
        }
    };

    let strict = cli.strict;
    let outcome = pool.install(|| match cli.command {
        Command::Disparity {
            left,
            right,
            params,
            out,
        } => cmd_disparity(&left, &right, params.as_deref(), &out, strict),
        Command::Optimize {
            left,
            right,
            gt,
            metric,
            gens,
            pop,
            seed,
            log,
            out,
            num_disparities,
            baseline_params,
        } => cmd_optimize(
            &left,
            &right,
            &gt,
            metric,
            gens,
            pop,
            seed,
            &log,
            &out,
            num_disparities,
            baseline_params.as_deref(),
            strict,
        ),
        Command::Eval { pred, gt, d_max } => cmd_eval(&pred, &gt, d_max),
        Command::Synth {
            width,
            height,
            disparity,
            pattern,
            noise_seed,
            out_left,
            out_right,
            out_gt,
        } => cmd_synth(
            width, height, disparity, pattern, noise_seed, &out_left, &out_right, &out_gt,
        ),
    });

    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Fixed 6-decimal formatting, with bare "inf" for infinities so perfect
/// PSNR stays greppable.
fn fmt6(value: f64) -> String {
    if value.is_infinite() {
        if value > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{value:.6}")
    }
}

fn load_params_or_default(path: Option<&Path>) -> Result<ParameterSet, CmdError> {
    match path {
        None => Ok(ParameterSet::default()),
        Some(path) => {
            let (params, repaired) = ParameterSet::load(path)?;
            if repaired {
                eprintln!(
                    "warning: alpha >= beta in {}, repaired to beta = {}",
                    path.display(),
                    params.match_params.beta
                );
            }
            Ok(params)
        }
    }
}

fn cmd_disparity(
    left: &Path,
    right: &Path,
    params: Option<&Path>,
    out: &Path,
    strict: bool,
) -> Result<(), CmdError> {
    let params = load_params_or_default(params)?;
    let left = load_pgm(left)?;
    let right = load_pgm(right)?;

    let start = Instant::now();
    let refined = run_pipeline(&left, &right, &params)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    save_pfm(&refined.map, out)?;

    let total = (refined.map.width() * refined.map.height()) as f64;
    let valid_pct = refined.map.valid_count() as f64 / total * 100.0;
    println!("dimensions: {}x{}", refined.map.width(), refined.map.height());
    println!("valid_pixels: {}%", fmt6(valid_pct));
    println!("wall_time_ms: {}", fmt6(elapsed_ms));

    if !refined.converged {
        let message = format!(
            "wls did not converge within {} iterations",
            refined.iterations
        );
        if strict {
            return Err(CmdError::Strict(message));
        }
        eprintln!("warning: {message}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    left: &Path,
    right: &Path,
    gt: &Path,
    metric: FitnessMetric,
    gens: usize,
    pop: usize,
    seed: u64,
    log: &Path,
    out: &Path,
    num_disparities: usize,
    baseline_params: Option<&Path>,
    strict: bool,
) -> Result<(), CmdError> {
    let left_img = load_pgm(left)?;
    let right_img = load_pgm(right)?;
    let gt_map = load_pfm(gt)?;

    let cfg = GaConfig {
        population_size: pop,
        generations: gens,
        rng_seed: seed,
        fitness_metric: metric,
        ..GaConfig::default()
    };
    cfg.validate().map_err(|e| CmdError::Usage(e.to_string()))?;

    let outcome = run_ga(&cfg, &left_img, &right_img, &gt_map, num_disparities)?;
    write_convergence_log(log, &outcome)?;
    outcome.best_params.save(out)?;

    let mut baseline = match baseline_params {
        Some(path) => load_params_or_default(Some(path))?,
        None => Chromosome::new([5; stereopt::ga::GENE_COUNT])
            .expect("midpoint genes are in range")
            .decode(),
    };
    baseline.match_params.num_disparities = num_disparities;

    let d_max = (num_disparities - 1) as f64;
    let metric_value = |params: &ParameterSet| -> Result<(f64, bool), CmdError> {
        let refined = run_pipeline(&left_img, &right_img, params)?;
        let value = match metric {
            FitnessMetric::Mse => metrics::mse(&gt_map, &refined.map)?,
            FitnessMetric::Psnr => metrics::psnr(&gt_map, &refined.map, d_max)?,
            FitnessMetric::Ssim => metrics::ssim(&gt_map, &refined.map, d_max)?,
        };
        Ok((value, refined.converged))
    };

    let (baseline_value, _) = metric_value(&baseline)?;
    let (best_value, best_converged) = metric_value(&outcome.best_params)?;

    // Improvements are reported in the direction that makes the headline
    // positive: error reduction for MSE, gain for PSNR/SSIM.
    let change_pct = match metric {
        FitnessMetric::Mse => (baseline_value - best_value) / baseline_value * 100.0,
        FitnessMetric::Psnr | FitnessMetric::Ssim => {
            (best_value - baseline_value) / baseline_value * 100.0
        }
    };

    println!("metric: {metric}");
    println!("baseline: {}", fmt6(baseline_value));
    println!("best: {}", fmt6(best_value));
    println!("change: {}%", fmt6(change_pct));

    if !best_converged {
        let message = "wls did not converge for the best parameter set".to_string();
        if strict {
            return Err(CmdError::Strict(message));
        }
        eprintln!("warning: {message}");
    }
    Ok(())
}

fn write_convergence_log(path: &Path, outcome: &GaOutcome) -> Result<(), CmdError> {
    let mut text = String::from("generation,best,mean,std\n");
    for record in &outcome.history {
        text.push_str(&format!(
            "{},{},{},{}\n",
            record.generation,
            fmt6(record.best),
            fmt6(record.mean),
            fmt6(record.std)
        ));
    }
    std::fs::write(path, text)
        .map_err(|e| CmdError::Data(format!("{}: {e}", path.display())))
}

fn cmd_eval(pred: &Path, gt: &Path, d_max: u32) -> Result<(), CmdError> {
    if d_max == 0 {
        return Err(CmdError::Usage("--d-max must be positive".to_string()));
    }
    let pred = load_pfm(pred)?;
    let gt = load_pfm(gt)?;
    let d_max = d_max as f64;
    let mse = metrics::mse(&gt, &pred)?;
    let psnr = metrics::psnr(&gt, &pred, d_max)?;
    let ssim = metrics::ssim(&gt, &pred, d_max)?;
    println!("{},{},{}", fmt6(mse), fmt6(psnr), fmt6(ssim));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    width: usize,
    height: usize,
    disparity: usize,
    pattern: Pattern,
    noise_seed: u64,
    out_left: &Path,
    out_right: &Path,
    out_gt: &Path,
) -> Result<(), CmdError> {
    if width == 0 || height == 0 || disparity >= width / 2 {
        return Err(CmdError::Usage(format!(
            "disparity {disparity} must be less than width/2 = {}",
            width / 2
        )));
    }
    let (left, right, gt): (GrayImage, GrayImage, DisparityMap) = generate(&SynthSpec {
        width,
        height,
        true_disparity: disparity,
        pattern,
        noise_seed,
    })?;
    save_pgm(&left, out_left)?;
    save_pgm(&right, out_right)?;
    save_pfm(&gt, out_gt)?;
    println!(
        "wrote {} {} {}",
        out_left.display(),
        out_right.display(),
        out_gt.display()
    );
    Ok(())
}
