//! Mutation-only evolutionary strategy over [`ControllerGenome`].
//!
//! Each generation the fittest half of the population is duplicated twice and
//! mutated; parents and offspring are then re-evaluated on fresh environment
//! draws and the fittest `pop_size` survive. Every evaluation derives its
//! environment from `(master_seed, generation, candidate index)`, so results
//! do not depend on how rayon schedules the work.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::summarize;
use crate::env::{run_episode, sample_episode_params, EnvConfig, LANDED_HEIGHT};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::snn::{BackendKind, ControllerGenome, DELTA_MAX, THETA_MAX, THETA_MIN, WEIGHT_MAX, WEIGHT_MIN};

/// Inclusive integer perturbation bounds and the real trace bound.
pub const WEIGHT_STEP: i32 = 84;
pub const THETA_STEP: i32 = 341;
pub const DELTA_STEP: i32 = 1365;
pub const TRACE_STEP: f64 = 1.0 / 3.0;

const INIT_TAG: u64 = 0x1;
const MUTATE_TAG: u64 = 0x2;
const EVAL_TAG: u64 = 0x3;
const HELD_OUT_TAG: u64 = 0x4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub pop_size: usize,
    pub parents: usize,
    pub p_mut: f64,
    pub generations: usize,
    pub start_heights: Vec<f64>,
    pub master_seed: u64,
    /// Seed of the fixed bank used to rank best-so-far genomes.
    pub held_out_seed: u64,
    pub held_out_episodes: usize,
    /// How many of each generation's fittest are scored on the held-out bank.
    pub archive_candidates: usize,
    /// Backend used inside the evolution loop.
    pub backend: BackendKind,
    pub env: EnvConfig,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            pop_size: 100,
            parents: 50,
            p_mut: 0.3,
            generations: 200,
            start_heights: vec![2.0, 3.0, 4.0, 5.0],
            master_seed: 0,
            held_out_seed: 0x00C0_FFEE,
            held_out_episodes: 20,
            archive_candidates: 5,
            backend: BackendKind::Reference,
            env: EnvConfig::default(),
        }
    }
}

impl EvolutionConfig {
    /// Resize the population, keeping `pop_size = 2 × parents`.
    pub fn with_population(mut self, pop_size: usize) -> Self {
        self.pop_size = pop_size;
        self.parents = pop_size / 2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.parents == 0 || self.pop_size != 2 * self.parents {
            return Err(Error::Config(format!(
                "population {} must be twice a positive parent count {}",
                self.pop_size, self.parents
            )));
        }
        if !(0.0..=1.0).contains(&self.p_mut) {
            return Err(Error::Config(format!("p_mut {} outside [0, 1]", self.p_mut)));
        }
        if self.start_heights.is_empty()
            || self.start_heights.iter().any(|&h| !(h.is_finite() && h > LANDED_HEIGHT))
        {
            return Err(Error::Config(format!(
                "start heights must be non-empty and above {LANDED_HEIGHT} m"
            )));
        }
        if self.held_out_episodes == 0 || self.archive_candidates == 0 {
            return Err(Error::Config(
                "held-out bank and archive candidates must be non-empty".into(),
            ));
        }
        self.env.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: ControllerGenome,
    /// Mean accumulated divergence error over the start heights; lower is better.
    pub fitness: f64,
    pub eval_generation: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub best: f64,
    pub median: f64,
    pub mean: f64,
    pub held_out_best: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    /// Best genome found so far, ranked on the held-out bank.
    pub best: ControllerGenome,
    pub best_held_out: f64,
    pub log: Vec<GenerationLog>,
    pub final_population: Vec<Individual>,
}

/// Random population; fitness stays `+∞` until evaluated.
pub fn init_population<R: Rng + ?Sized>(config: &EvolutionConfig, rng: &mut R) -> Vec<Individual> {
    (0..config.pop_size)
        .map(|_| Individual {
            genome: ControllerGenome::random(rng),
            fitness: f64::INFINITY,
            eval_generation: 0,
        })
        .collect()
}

/// Perturb each parameter independently with probability `p_mut`, then clamp.
///
/// Weight perturbations are truncated toward zero to an even step so weights
/// stay even. `delta_u` is pinned and never mutated.
pub fn mutate<R: Rng + ?Sized>(genome: &ControllerGenome, p_mut: f64, rng: &mut R) -> ControllerGenome {
    let mut g = genome.clone();
    let weights = g.w_in_hidden.as_flattened_mut().iter_mut();
    for w in weights.chain(g.w_hidden_out.as_flattened_mut()) {
        if rng.random_bool(p_mut) {
            let step = rng.random_range(-WEIGHT_STEP..=WEIGHT_STEP);
            *w = (*w + step - step % 2).clamp(WEIGHT_MIN, WEIGHT_MAX);
        }
    }
    for th in g.theta_hidden.iter_mut().chain(g.theta_out.iter_mut()) {
        if rng.random_bool(p_mut) {
            *th = (*th + rng.random_range(-THETA_STEP..=THETA_STEP)).clamp(THETA_MIN, THETA_MAX);
        }
    }
    for d in g.delta_v_hidden.iter_mut().chain(g.delta_v_out.iter_mut()) {
        if rng.random_bool(p_mut) {
            *d = (*d + rng.random_range(-DELTA_STEP..=DELTA_STEP)).clamp(0, DELTA_MAX);
        }
    }
    for x in g.alpha_x.iter_mut().chain(g.tau_x.iter_mut()) {
        if rng.random_bool(p_mut) {
            let step = TRACE_STEP * (2.0 * rng.random::<f64>() - 1.0);
            *x = (*x + step).clamp(0.0, 1.0);
        }
    }
    g
}

/// Seed of the environment faced by candidate `index` in `generation`.
pub fn generation_env_seed(master_seed: u64, generation: usize, index: usize) -> u64 {
    derive_seed(master_seed, &[EVAL_TAG, generation as u64, index as u64])
}

/// Mean accumulated divergence error over the configured start heights.
///
/// One environment draw per `env_seed` is shared by all heights; measurement
/// noise is keyed by the height itself, so the order of heights is irrelevant.
pub fn evaluate(genome: &ControllerGenome, config: &EvolutionConfig, env_seed: u64) -> Result<f64> {
    let params = sample_episode_params(&config.env, &mut stream(env_seed, &[]));
    let mut total = 0.0;
    for &h0 in &config.start_heights {
        let noise_seed = derive_seed(env_seed, &[h0.to_bits()]);
        total += run_episode(genome, config.backend, &config.env, &params, h0, noise_seed)?.fitness();
    }
    Ok(total / config.start_heights.len() as f64)
}

/// Mean episode error over the fixed held-out bank (heights cycle through the start heights).
pub fn held_out_fitness(genome: &ControllerGenome, config: &EvolutionConfig) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..config.held_out_episodes {
        let seed = derive_seed(config.held_out_seed, &[HELD_OUT_TAG, i as u64]);
        let params = sample_episode_params(&config.env, &mut stream(seed, &[]));
        let h0 = config.start_heights[i % config.start_heights.len()];
        total += run_episode(genome, config.backend, &config.env, &params, h0, seed)?.fitness();
    }
    Ok(total / config.held_out_episodes as f64)
}

fn evaluate_all(
    candidates: &mut [Individual],
    config: &EvolutionConfig,
    generation: usize,
) -> Result<()> {
    let fitness: Vec<f64> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, c)| evaluate(&c.genome, config, generation_env_seed(config.master_seed, generation, i)))
        .collect::<Result<_>>()?;
    for (c, f) in candidates.iter_mut().zip(fitness) {
        c.fitness = f;
        c.eval_generation = generation;
    }
    Ok(())
}

/// The `n` lowest-fitness candidates, ties kept in candidate order.
pub fn select_survivors(mut candidates: Vec<Individual>, n: usize) -> Vec<Individual> {
    candidates.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
    candidates.truncate(n);
    candidates
}

/// One generation: duplicate and mutate the fittest parents, re-evaluate
/// parents and offspring together, keep the best `pop_size`.
///
/// `population` must be sorted best-first, as returned by the previous call.
pub fn step_generation(
    population: Vec<Individual>,
    config: &EvolutionConfig,
    generation: usize,
) -> Result<Vec<Individual>> {
    if population.len() != config.pop_size {
        return Err(Error::contract(format!(
            "population has {} members, expected {}",
            population.len(),
            config.pop_size
        )));
    }
    let mut rng = stream(config.master_seed, &[MUTATE_TAG, generation as u64]);
    let parents = &population[..config.parents];
    let offspring: Vec<Individual> = parents
        .iter()
        .chain(parents)
        .map(|p| Individual {
            genome: mutate(&p.genome, config.p_mut, &mut rng),
            fitness: f64::INFINITY,
            eval_generation: generation,
        })
        .collect();
    let mut candidates = population;
    candidates.extend(offspring);
    evaluate_all(&mut candidates, config, generation)?;
    Ok(select_survivors(candidates, config.pop_size))
}

struct Archive {
    genome: Option<ControllerGenome>,
    held_out: f64,
}

impl Archive {
    fn offer(&mut self, population: &[Individual], config: &EvolutionConfig) -> Result<()> {
        let k = config.archive_candidates.min(population.len());
        let scores: Vec<f64> = population[..k]
            .par_iter()
            .map(|ind| held_out_fitness(&ind.genome, config))
            .collect::<Result<_>>()?;
        for (ind, score) in population[..k].iter().zip(scores) {
            if score < self.held_out {
                self.held_out = score;
                self.genome = Some(ind.genome.clone());
            }
        }
        Ok(())
    }
}

fn log_row(generation: usize, population: &[Individual], held_out_best: f64) -> Result<GenerationLog> {
    let fitness: Vec<f64> = population.iter().map(|i| i.fitness).collect();
    let s = summarize(&fitness)?;
    Ok(GenerationLog {
        generation,
        best: s.min,
        median: s.median,
        mean: s.mean,
        held_out_best,
    })
}

pub fn run_evolution(config: &EvolutionConfig) -> Result<EvolutionResult> {
    run_evolution_with_progress(config, |_| {})
}

/// Full run; `progress` sees each log row as soon as it is produced.
pub fn run_evolution_with_progress(
    config: &EvolutionConfig,
    mut progress: impl FnMut(&GenerationLog),
) -> Result<EvolutionResult> {
    config.validate()?;
    let mut population = init_population(config, &mut stream(config.master_seed, &[INIT_TAG]));
    evaluate_all(&mut population, config, 0)?;
    population = select_survivors(population, config.pop_size);

    let mut archive = Archive {
        genome: None,
        held_out: f64::INFINITY,
    };
    let mut log = Vec::with_capacity(config.generations + 1);
    for generation in 0..=config.generations {
        if generation > 0 {
            population = step_generation(population, config, generation)?;
        }
        archive.offer(&population, config)?;
        let row = log_row(generation, &population, archive.held_out)?;
        progress(&row);
        log.push(row);
    }
    Ok(EvolutionResult {
        best: archive.genome.expect("archive is filled at generation 0"),
        best_held_out: archive.held_out,
        log,
        final_population: population,
    })
}

pub const EVOLUTION_LOG_HEADER: [&str; 5] = ["generation", "best", "median", "mean", "held_out_best"];

pub fn write_log_csv<W: Write>(log: &[GenerationLog], writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(EVOLUTION_LOG_HEADER)?;
    for row in log {
        csv.write_record([
            row.generation.to_string(),
            row.best.to_string(),
            row.median.to_string(),
            row.mean.to_string(),
            row.held_out_best.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
