//! Integer-chromosome genetic optimization of the pipeline parameters.
//!
//! Nine parameters are packed into 28 genes, each an integer in [1, 10].
//! Multi-gene parameters use positional decimal encoding: with genes
//! g1..gn, the value is `(g1-1)*10^(n-1) + ... + (g_{n-1}-1)*10 + gn`,
//! spanning [1, 10^n]. Gene layout (1-based):
//!
//! | genes  | parameter        |
//! |--------|------------------|
//! | 1-5    | alpha            |
//! | 6-10   | beta (repaired to at least alpha + 1) |
//! | 11-12  | delta_lr         |
//! | 13-14  | eta              |
//! | 15-16  | gamma            |
//! | 17-19  | speckle_window   |
//! | 20-22  | speckle_range    |
//! | 23-27  | lambda           |
//! | 28     | sigma = (g28 - 1) / 10 |
//!
//! All randomness comes from a ChaCha8 stream seeded with the run seed and
//! consumed only on the coordinator, in a fixed order: population
//! initialization draws `population_size * 28` genes; then per offspring
//! pair [`TOURNAMENT_SIZE`] index draws per parent, one crossover-decision
//! draw, two cut-point draws when crossover fires, and per child one
//! mutation-decision draw per gene plus a replacement draw per mutated
//! gene. Both children of a pair are always produced and mutated even
//! when only one fits into the generation. Fitness evaluation is pure and
//! consumes no randomness, so results do not depend on the worker count.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::img::{DisparityMap, GrayImage};
use crate::metrics;
use crate::sgbm::{run_sgbm, MatchParams, DEFAULT_NUM_DISPARITIES};
use crate::wls::{wls_refine, WlsParams, WlsRefinement};

pub const GENE_COUNT: usize = 28;
pub const GENE_MIN: u8 = 1;
pub const GENE_MAX: u8 = 10;

/// Parent-selection tournament size. Size 2 leaves the search barely
/// distinguishable from random sampling under the heavy per-gene mutation
/// rate; size 3 reliably outperforms an equal-budget random search.
pub const TOURNAMENT_SIZE: usize = 3;

/// 28 integer genes, each in [1, 10].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    genes: [u8; GENE_COUNT],
}

impl Chromosome {
    pub fn new(genes: [u8; GENE_COUNT]) -> Result<Self> {
        for (i, &g) in genes.iter().enumerate() {
            if !(GENE_MIN..=GENE_MAX).contains(&g) {
                return Err(Error::Parameter(format!(
                    "gene {} = {g} outside [{GENE_MIN}, {GENE_MAX}]",
                    i + 1
                )));
            }
        }
        Ok(Self { genes })
    }

    pub fn genes(&self) -> &[u8; GENE_COUNT] {
        &self.genes
    }

    /// Decode into a full parameter set. Never fails: the only cross-gene
    /// constraint (alpha < beta) is repaired by lifting beta.
    pub fn decode(&self) -> ParameterSet {
        let g = &self.genes;
        let alpha = positional(&g[0..5]);
        let beta_raw = positional(&g[5..10]);
        ParameterSet {
            match_params: MatchParams {
                alpha,
                beta: beta_raw.max(alpha + 1),
                delta_lr: positional(&g[10..12]),
                eta: positional(&g[12..14]),
                gamma: positional(&g[14..16]),
                speckle_window: positional(&g[16..19]),
                speckle_range: positional(&g[19..22]),
                num_disparities: DEFAULT_NUM_DISPARITIES,
            },
            wls_params: WlsParams {
                lambda: positional(&g[22..27]),
                sigma: (g[27] - 1) as f64 / 10.0,
                ..WlsParams::default()
            },
        }
    }
}

fn positional(genes: &[u8]) -> u32 {
    let mut value = 0u32;
    for &g in &genes[..genes.len() - 1] {
        value = value * 10 + (g as u32 - 1);
    }
    value * 10 + genes[genes.len() - 1] as u32
}

/// The nine tuned parameters in their native types. Solver knobs and
/// `num_disparities` ride along as fixed configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterSet {
    pub match_params: MatchParams,
    pub wls_params: WlsParams,
}

impl ParameterSet {
    pub fn validate(&self) -> Result<()> {
        self.match_params.validate()?;
        self.wls_params.validate()
    }

    /// Flat key-value document (TOML). Field order and float formatting
    /// are fixed so identical parameter sets serialize identically.
    pub fn to_doc(&self) -> String {
        let m = &self.match_params;
        let w = &self.wls_params;
        let mut sigma = format!("{}", w.sigma);
        if !sigma.contains('.') {
            sigma.push_str(".0");
        }
        format!(
            "alpha = {}\nbeta = {}\ndelta_lr = {}\neta = {}\ngamma = {}\n\
             speckle_window = {}\nspeckle_range = {}\nlambda = {}\nsigma = {}\n\
             num_disparities = {}\n",
            m.alpha,
            m.beta,
            m.delta_lr,
            m.eta,
            m.gamma,
            m.speckle_window,
            m.speckle_range,
            w.lambda,
            sigma,
            m.num_disparities
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_doc()).map_err(|e| Error::io(path, e))
    }

    /// Parse a parameter document. Returns the set plus a flag saying
    /// whether the alpha < beta constraint had to be repaired.
    pub fn from_doc(doc: &str) -> Result<(Self, bool)> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            alpha: u32,
            beta: u32,
            delta_lr: u32,
            eta: u32,
            gamma: u32,
            speckle_window: u32,
            speckle_range: u32,
            lambda: u32,
            sigma: f64,
            num_disparities: usize,
        }

        let doc: Doc =
            toml::from_str(doc).map_err(|e| Error::Parameter(format!("parameter file: {e}")))?;
        let repaired = doc.alpha >= doc.beta;
        let params = ParameterSet {
            match_params: MatchParams {
                alpha: doc.alpha,
                beta: if repaired { doc.alpha + 1 } else { doc.beta },
                delta_lr: doc.delta_lr,
                eta: doc.eta,
                gamma: doc.gamma,
                speckle_window: doc.speckle_window,
                speckle_range: doc.speckle_range,
                num_disparities: doc.num_disparities,
            },
            wls_params: WlsParams {
                lambda: doc.lambda,
                sigma: doc.sigma,
                ..WlsParams::default()
            },
        };
        params.validate()?;
        Ok((params, repaired))
    }

    pub fn load(path: &Path) -> Result<(Self, bool)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_doc(&text).map_err(|e| match e {
            Error::Parameter(reason) => Error::format(path, reason),
            other => other,
        })
    }
}

/// The full pipeline one fitness evaluation runs: matching followed by
/// WLS refinement of the filtered map.
pub fn run_pipeline(
    left: &GrayImage,
    right: &GrayImage,
    params: &ParameterSet,
) -> Result<WlsRefinement> {
    let map = run_sgbm(left, right, &params.match_params)?;
    wls_refine(&map, left, &params.wls_params)
}

/// Which metric scores a candidate. Scores are normalized so that higher
/// is always better (MSE is negated).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMetric {
    Mse,
    Psnr,
    Ssim,
}

impl std::str::FromStr for FitnessMetric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mse" => Ok(FitnessMetric::Mse),
            "psnr" => Ok(FitnessMetric::Psnr),
            "ssim" => Ok(FitnessMetric::Ssim),
            other => Err(format!(
                "unknown metric \"{other}\" (expected mse, psnr, or ssim)"
            )),
        }
    }
}

impl fmt::Display for FitnessMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitnessMetric::Mse => "mse",
            FitnessMetric::Psnr => "psnr",
            FitnessMetric::Ssim => "ssim",
        })
    }
}

/// Optimizer settings. Defaults follow the standard configuration:
/// population 30, 100 generations, crossover 0.6, per-gene mutation 0.3,
/// five elites.
#[derive(Debug, Clone)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub elite_count: usize,
    pub rng_seed: u64,
    pub fitness_metric: FitnessMetric,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 30,
            generations: 100,
            crossover_probability: 0.6,
            mutation_probability: 0.3,
            elite_count: 5,
            rng_seed: 0,
            fitness_metric: FitnessMetric::Ssim,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::Parameter("population_size must be positive".into()));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::Parameter(format!(
                "elite_count ({}) must be less than population_size ({})",
                self.elite_count, self.population_size
            )));
        }
        for (name, p) in [
            ("crossover_probability", self.crossover_probability),
            ("mutation_probability", self.mutation_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Per-generation log row.
#[derive(Debug, Clone)]
pub struct FitnessRecord {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub std: f64,
    pub best_chromosome: Chromosome,
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best_params: ParameterSet,
    pub best_chromosome: Chromosome,
    pub best_fitness: f64,
    pub history: Vec<FitnessRecord>,
}

pub fn random_chromosome(rng: &mut impl Rng) -> Chromosome {
    let mut genes = [0u8; GENE_COUNT];
    for g in genes.iter_mut() {
        *g = rng.random_range(GENE_MIN..=GENE_MAX);
    }
    Chromosome { genes }
}

/// Swap the gene segment [i, j) between two parents.
pub(crate) fn crossover_at(
    a: &Chromosome,
    b: &Chromosome,
    i: usize,
    j: usize,
) -> (Chromosome, Chromosome) {
    debug_assert!(i <= j && j <= GENE_COUNT);
    let mut left = a.genes;
    let mut right = b.genes;
    left[i..j].copy_from_slice(&b.genes[i..j]);
    right[i..j].copy_from_slice(&a.genes[i..j]);
    (Chromosome { genes: left }, Chromosome { genes: right })
}

/// Two-point crossover: both cut indices are drawn uniformly from
/// [0, 28] and sorted, then the enclosed segment is exchanged.
pub fn two_point_crossover(
    a: &Chromosome,
    b: &Chromosome,
    rng: &mut impl Rng,
) -> (Chromosome, Chromosome) {
    let first = rng.random_range(0..=GENE_COUNT);
    let second = rng.random_range(0..=GENE_COUNT);
    crossover_at(a, b, first.min(second), first.max(second))
}

/// Uniform integer mutation: each gene is independently replaced with a
/// fresh [1, 10] draw with probability `p` (the replacement may equal the
/// old value).
pub fn mutate(c: &Chromosome, p: f64, rng: &mut impl Rng) -> Chromosome {
    let mut genes = c.genes;
    for g in genes.iter_mut() {
        if rng.random::<f64>() < p {
            *g = rng.random_range(GENE_MIN..=GENE_MAX);
        }
    }
    Chromosome { genes }
}

/// Score one chromosome: decode, run the pipeline, compare against the
/// ground truth with the configured metric. Pipeline failures score
/// negative infinity rather than aborting the run.
pub fn evaluate_fitness(
    chromosome: &Chromosome,
    left: &GrayImage,
    right: &GrayImage,
    gt: &DisparityMap,
    metric: FitnessMetric,
    d_range: usize,
) -> f64 {
    let mut params = chromosome.decode();
    params.match_params.num_disparities = d_range;
    let refined = match run_pipeline(left, right, &params) {
        Ok(r) => r.map,
        Err(_) => return f64::NEG_INFINITY,
    };
    score_map(gt, &refined, metric, d_range)
}

/// Metric value of a finished map, oriented so higher is better.
pub fn score_map(
    gt: &DisparityMap,
    pred: &DisparityMap,
    metric: FitnessMetric,
    d_range: usize,
) -> f64 {
    let d_max = (d_range - 1) as f64;
    let value = match metric {
        FitnessMetric::Mse => metrics::mse(gt, pred).map(|v| -v),
        FitnessMetric::Psnr => metrics::psnr(gt, pred, d_max),
        FitnessMetric::Ssim => metrics::ssim(gt, pred, d_max),
    };
    value.unwrap_or(f64::NEG_INFINITY)
}

/// Generational loop: evaluate, log, carry the elites, refill with
/// tournament-selected, crossed-over, mutated offspring. Deterministic
/// for a fixed seed regardless of how fitness evaluation is parallelized.
pub fn run_ga(
    cfg: &GaConfig,
    left: &GrayImage,
    right: &GrayImage,
    gt: &DisparityMap,
    d_range: usize,
) -> Result<GaOutcome> {
    cfg.validate()?;
    if left.width() != gt.width() || left.height() != gt.height() {
        return Err(Error::Dimension(format!(
            "ground truth {}x{} vs images {}x{}",
            gt.width(),
            gt.height(),
            left.width(),
            left.height()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut population: Vec<Chromosome> = (0..cfg.population_size)
        .map(|_| random_chromosome(&mut rng))
        .collect();

    let evaluate = |pop: &[Chromosome]| -> Vec<f64> {
        pop.par_iter()
            .map(|c| evaluate_fitness(c, left, right, gt, cfg.fitness_metric, d_range))
            .collect()
    };

    let mut history = Vec::with_capacity(cfg.generations + 1);
    let mut fitness = evaluate(&population);
    history.push(record(0, &population, &fitness));

    for generation in 1..=cfg.generations {
        population = next_generation(&population, &fitness, cfg, &mut rng);
        fitness = evaluate(&population);
        history.push(record(generation, &population, &fitness));
    }

    let best_index = best_of(&fitness);
    let best_chromosome = population[best_index].clone();
    let mut best_params = best_chromosome.decode();
    best_params.match_params.num_disparities = d_range;
    Ok(GaOutcome {
        best_params,
        best_chromosome,
        best_fitness: fitness[best_index],
        history,
    })
}

fn best_of(fitness: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..fitness.len() {
        if fitness[i] > fitness[best] {
            best = i;
        }
    }
    best
}

fn record(generation: usize, population: &[Chromosome], fitness: &[f64]) -> FitnessRecord {
    let n = fitness.len() as f64;
    let mean = fitness.iter().sum::<f64>() / n;
    let variance = fitness.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / n;
    let best = best_of(fitness);
    FitnessRecord {
        generation,
        best: fitness[best],
        mean,
        std: variance.sqrt(),
        best_chromosome: population[best].clone(),
    }
}

fn next_generation(
    population: &[Chromosome],
    fitness: &[f64],
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<Chromosome> {
    // Rank by fitness, ties toward the earlier individual.
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));

    let mut next: Vec<Chromosome> = order[..cfg.elite_count]
        .iter()
        .map(|&i| population[i].clone())
        .collect();

    let tournament = |rng: &mut ChaCha8Rng| -> usize {
        let mut winner = rng.random_range(0..population.len());
        for _ in 1..TOURNAMENT_SIZE {
            let challenger = rng.random_range(0..population.len());
            if fitness[challenger] > fitness[winner] {
                winner = challenger;
            }
        }
        winner
    };

    while next.len() < cfg.population_size {
        let p1 = tournament(rng);
        let p2 = tournament(rng);
        let (c1, c2) = if rng.random::<f64>() < cfg.crossover_probability {
            two_point_crossover(&population[p1], &population[p2], rng)
        } else {
            (population[p1].clone(), population[p2].clone())
        };
        let c1 = mutate(&c1, cfg.mutation_probability, rng);
        let c2 = mutate(&c2, cfg.mutation_probability, rng);
        next.push(c1);
        if next.len() < cfg.population_size {
            next.push(c2);
        }
    }
    next
}
