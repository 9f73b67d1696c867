//! Generational genetic algorithm over mixed integer/continuous genes.
//!
//! A gene is the channel assignment vector plus the total source flux. Each
//! generation keeps the elite unchanged, fills a fixed fraction of the rest
//! with uniform-crossover children and the remainder with mutants. Parents
//! come from stochastic universal sampling on rank-scaled fitness.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::fitness::{FitnessModel, FitnessReport};
use super::network::{Allocation, NetworkSpec};
use super::OptimizeError;

/// Spread of the log-normal flux mutation.
const FLUX_MUTATION_SIGMA: f64 = 0.2;
/// Initial fluxes are log-uniform over this many decades below the bound.
const INIT_FLUX_DECADES: f64 = 3.0;
/// Lower clamp on total flux relative to the bound; keeps the multiplicative
/// mutation from collapsing to zero.
const FLUX_FLOOR: f64 = 1e-9;
/// Best-fitness changes at or below this count as a stall.
pub const STALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_fraction: f64,
    pub stall_generations: usize,
    pub elite_count: usize,
    /// Per-position resampling probability; `None` means `1/K`.
    pub mutation_rate: Option<f64>,
    /// Upper bound on total source flux in pairs/s; `None` derives it from
    /// the per-link optima.
    pub flux_upper: Option<f64>,
    pub rng_seed: u64,
    pub max_generations: usize,
    pub independent_runs: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 200,
            crossover_fraction: 0.8,
            stall_generations: 100,
            elite_count: 5,
            mutation_rate: None,
            flux_upper: None,
            rng_seed: 0,
            max_generations: 10_000,
            independent_runs: 5,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |m: &str| Err(OptimizeError::InvalidConfig(m.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if !(self.crossover_fraction > 0.0 && self.crossover_fraction < 1.0) {
            return bad("crossover_fraction must lie strictly between 0 and 1");
        }
        if self.elite_count >= self.population_size {
            return bad("elite_count must be smaller than population_size");
        }
        if self.stall_generations == 0 || self.max_generations == 0 {
            return bad("stall_generations and max_generations must be positive");
        }
        if self.independent_runs == 0 {
            return bad("independent_runs must be positive");
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return bad("mutation_rate must lie in [0, 1]");
            }
        }
        if let Some(u) = self.flux_upper {
            if !(u > 0.0 && u.is_finite()) {
                return bad("flux_upper must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best fitness seen so far.
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct GaResult {
    pub allocation: Allocation,
    pub report: FitnessReport,
    pub trace: Vec<GenerationStats>,
    pub seed: u64,
    pub stream: u64,
}

impl GaResult {
    pub fn fitness(&self) -> f64 {
        self.report.fitness
    }

    pub fn generations(&self) -> usize {
        self.trace.last().map_or(0, |s| s.generation)
    }
}

#[derive(Debug, Clone)]
struct Gene {
    alpha: Vec<u16>,
    mu_tot: f64,
}

struct Engine<'a> {
    model: &'a FitnessModel,
    config: &'a GaConfig,
    links: u16,
    mutation_rate: f64,
    init_lo: f64,
    flux_lo: f64,
    flux_hi: f64,
}

impl Engine<'_> {
    fn random_gene(&self, rng: &mut ChaCha8Rng) -> Gene {
        let k = self.model.network().channels();
        let alpha = (0..k).map(|_| rng.random_range(0..=self.links)).collect();
        let span = (self.flux_hi / self.init_lo).ln();
        let mu_tot = self.init_lo * (rng.random::<f64>() * span).exp();
        Gene { alpha, mu_tot }
    }

    fn evaluate(&self, population: &[Gene]) -> Vec<f64> {
        let links = self.links as usize;
        population
            .par_iter()
            .map_init(
                || vec![0.0; links],
                |scratch, g| self.model.score(&g.alpha, g.mu_tot, scratch),
            )
            .collect()
    }

    fn crossover(&self, a: &Gene, b: &Gene, rng: &mut ChaCha8Rng) -> Gene {
        let alpha = a
            .alpha
            .iter()
            .zip(&b.alpha)
            .map(|(&x, &y)| if rng.random::<bool>() { x } else { y })
            .collect();
        let w: f64 = rng.random();
        Gene {
            alpha,
            mu_tot: self.clamp_flux(w * a.mu_tot + (1.0 - w) * b.mu_tot),
        }
    }

    fn mutate(&self, parent: &Gene, rng: &mut ChaCha8Rng) -> Gene {
        let alpha = parent
            .alpha
            .iter()
            .map(|&a| {
                if rng.random::<f64>() < self.mutation_rate {
                    rng.random_range(0..=self.links)
                } else {
                    a
                }
            })
            .collect();
        let z: f64 = StandardNormal.sample(rng);
        Gene {
            alpha,
            mu_tot: self.clamp_flux(parent.mu_tot * (FLUX_MUTATION_SIGMA * z).exp()),
        }
    }

    fn clamp_flux(&self, mu: f64) -> f64 {
        mu.clamp(self.flux_lo, self.flux_hi)
    }

    fn run(&self, seed: u64, stream: u64) -> GaResult {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let cfg = self.config;
        let pop_size = cfg.population_size;

        let mut population: Vec<Gene> = (0..pop_size).map(|_| self.random_gene(&mut rng)).collect();
        let mut scores = self.evaluate(&population);

        let mut best_idx = argmax(&scores);
        let mut best = population[best_idx].clone();
        let mut best_score = scores[best_idx];
        let mut trace = vec![GenerationStats {
            generation: 0,
            best: best_score,
            mean: mean(&scores),
        }];

        let offspring = pop_size - cfg.elite_count;
        let n_cross = (cfg.crossover_fraction * offspring as f64).round() as usize;
        let n_mut = offspring - n_cross;

        let mut stalled = 0;
        let mut reference = best_score;
        let mut generation = 0;
        while stalled < cfg.stall_generations && generation < cfg.max_generations {
            generation += 1;
            let order = ranking(&scores);

            let mut next = Vec::with_capacity(pop_size);
            next.extend(
                order[..cfg.elite_count]
                    .iter()
                    .map(|&i| population[i].clone()),
            );

            let mut parents = stochastic_universal_sampling(&order, 2 * n_cross + n_mut, &mut rng);
            parents.shuffle(&mut rng);
            let (pairs, singles) = parents.split_at(2 * n_cross);
            for pair in pairs.chunks_exact(2) {
                next.push(self.crossover(&population[pair[0]], &population[pair[1]], &mut rng));
            }
            for &p in singles {
                next.push(self.mutate(&population[p], &mut rng));
            }

            population = next;
            scores = self.evaluate(&population);
            best_idx = argmax(&scores);
            if scores[best_idx] > best_score {
                best_score = scores[best_idx];
                best = population[best_idx].clone();
            }
            if best_score - reference > STALL_TOL {
                reference = best_score;
                stalled = 0;
            } else {
                stalled += 1;
            }
            trace.push(GenerationStats {
                generation,
                best: best_score,
                mean: mean(&scores),
            });
        }

        let allocation = Allocation::new(best.alpha, best.mu_tot);
        let report = self
            .model
            .evaluate(&allocation)
            .expect("genes stay within bounds");
        GaResult {
            allocation,
            report,
            trace,
            seed,
            stream,
        }
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn mean(scores: &[f64]) -> f64 {
    scores.iter().sum::<f64>() / scores.len() as f64
}

/// Indices sorted by descending fitness; ties keep population order.
fn ranking(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Draws `count` parents with expectation proportional to `1/sqrt(rank)`
/// using a single random offset and evenly spaced pointers.
fn stochastic_universal_sampling(
    order: &[usize],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let weights: Vec<f64> = (1..=order.len()).map(|r| 1.0 / (r as f64).sqrt()).collect();
    let total: f64 = weights.iter().sum();
    let step = total / count as f64;
    let mut pointer = rng.random::<f64>() * step;
    let mut picks = Vec::with_capacity(count);
    let mut cumulative = 0.0;
    let mut i = 0;
    while picks.len() < count {
        cumulative += weights[i];
        while pointer < cumulative && picks.len() < count {
            picks.push(order[i]);
            pointer += step;
        }
        i += 1;
        if i == order.len() {
            // Rounding can leave the final pointer just past the total.
            while picks.len() < count {
                picks.push(order[order.len() - 1]);
            }
        }
    }
    picks
}

fn engine<'a>(model: &'a FitnessModel, config: &'a GaConfig) -> Engine<'a> {
    let net = model.network();
    let flux_hi = config
        .flux_upper
        .unwrap_or_else(|| model.default_flux_bound() / net.tau());
    Engine {
        model,
        config,
        links: net.link_count() as u16,
        mutation_rate: config.mutation_rate.unwrap_or(1.0 / net.channels() as f64),
        init_lo: flux_hi * 10f64.powf(-INIT_FLUX_DECADES),
        flux_lo: flux_hi * FLUX_FLOOR,
        flux_hi,
    }
}

/// One GA run on random stream 0 of `config.rng_seed`.
pub fn ga_optimize(net: &NetworkSpec, config: &GaConfig) -> Result<GaResult, OptimizeError> {
    config.validate()?;
    let model = FitnessModel::new(net);
    Ok(engine(&model, config).run(config.rng_seed, 0))
}

#[derive(Debug, Clone)]
pub struct BestOfRuns {
    pub runs: Vec<GaResult>,
    pub champion: usize,
}

impl BestOfRuns {
    pub fn champion(&self) -> &GaResult {
        &self.runs[self.champion]
    }
}

/// `config.independent_runs` runs on streams `0..runs` of the same seed; the
/// highest fitness wins, earliest run on ties.
pub fn best_of_runs(net: &NetworkSpec, config: &GaConfig) -> Result<BestOfRuns, OptimizeError> {
    config.validate()?;
    let model = FitnessModel::new(net);
    let eng = engine(&model, config);
    let runs: Vec<GaResult> = (0..config.independent_runs as u64)
        .into_par_iter()
        .map(|stream| eng.run(config.rng_seed, stream))
        .collect();
    let mut champion = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.fitness() > runs[champion].fitness() {
            champion = i;
        }
    }
    Ok(BestOfRuns { runs, champion })
}
