//! Genetic search over the joint decision bits, as a combinatorial baseline.
//!
//! Genome: `2n` bits — offload bits followed by cloud bits. Fitness is the
//! same per-slot objective the online controller minimizes, with the
//! bandwidth allocation taken from the closed form. A repair operator keeps
//! genomes feasible: unusable links forced local, cloud bits masked by
//! offload bits, capacity enforced by random drops.

use alloc::vec;
use alloc::vec::Vec;

use super::{energy_objective, queue_objective, assemble, ServerContext, ServerDecision};
use crate::rng::Stream;

/// Conventional small-population defaults; recorded in run metadata for
/// auditability.
#[derive(Debug, Clone, Copy)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 50,
            generations: 100,
            tournament: 3,
            crossover_rate: 0.8,
            mutation_rate: 0.05,
        }
    }
}

#[derive(Clone)]
struct Genome {
    offload: Vec<bool>,
    to_cloud: Vec<bool>,
    fitness: f64,
}

fn repair(ctx: &ServerContext<'_>, offload: &mut [bool], to_cloud: &mut [bool], rng: &mut Stream) {
    let n = offload.len();
    for u in 0..n {
        if !ctx.inputs[u].offload_eligible() {
            offload[u] = false;
        }
        if !ctx.cloud_enabled || !offload[u] {
            to_cloud[u] = false;
        }
    }
    let mut count = offload.iter().filter(|&&b| b).count();
    while count > ctx.capacity as usize {
        let victim = rng.index(count);
        let id = offload
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .nth(victim)
            .unwrap();
        offload[id] = false;
        to_cloud[id] = false;
        count -= 1;
    }
}

fn evaluate(ctx: &ServerContext<'_>, offload: &[bool], to_cloud: &[bool]) -> f64 {
    ctx.v * energy_objective(ctx, offload) + queue_objective(ctx, offload, to_cloud)
}

fn random_genome(ctx: &ServerContext<'_>, rng: &mut Stream) -> Genome {
    let n = ctx.inputs.len();
    let mut offload: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.5)).collect();
    let mut to_cloud: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.5)).collect();
    repair(ctx, &mut offload, &mut to_cloud, rng);
    let fitness = evaluate(ctx, &offload, &to_cloud);
    Genome {
        offload,
        to_cloud,
        fitness,
    }
}

fn tournament_pick<'a>(pop: &'a [Genome], size: usize, rng: &mut Stream) -> &'a Genome {
    let mut best = &pop[rng.index(pop.len())];
    for _ in 1..size {
        let contender = &pop[rng.index(pop.len())];
        if contender.fitness < best.fitness {
            best = contender;
        }
    }
    best
}

/// Runs the genetic search and returns the fittest feasible decision.
pub fn genetic_offloading(
    ctx: &ServerContext<'_>,
    params: &GaParams,
    rng: &mut Stream,
) -> ServerDecision {
    let n = ctx.inputs.len();
    if n == 0 {
        return assemble(ctx, vec![], vec![]);
    }
    let mut population: Vec<Genome> = (0..params.population)
        .map(|_| random_genome(ctx, rng))
        .collect();
    // The all-local genome seeds the population: always feasible and a
    // natural upper bound.
    population[0] = {
        let offload = vec![false; n];
        let to_cloud = vec![false; n];
        let fitness = evaluate(ctx, &offload, &to_cloud);
        Genome {
            offload,
            to_cloud,
            fitness,
        }
    };

    for _ in 0..params.generations {
        let elite = population
            .iter()
            .min_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap())
            .unwrap()
            .clone();
        let mut next = Vec::with_capacity(params.population);
        next.push(elite);
        while next.len() < params.population {
            let a = tournament_pick(&population, params.tournament, rng);
            let b = tournament_pick(&population, params.tournament, rng);
            let (mut off, mut cloud) = if rng.bernoulli(params.crossover_rate) {
                let mut off = Vec::with_capacity(n);
                let mut cloud = Vec::with_capacity(n);
                for u in 0..n {
                    let from_a = rng.bernoulli(0.5);
                    off.push(if from_a { a.offload[u] } else { b.offload[u] });
                    cloud.push(if from_a { a.to_cloud[u] } else { b.to_cloud[u] });
                }
                (off, cloud)
            } else {
                (a.offload.clone(), a.to_cloud.clone())
            };
            for u in 0..n {
                if rng.bernoulli(params.mutation_rate) {
                    off[u] = !off[u];
                }
                if rng.bernoulli(params.mutation_rate) {
                    cloud[u] = !cloud[u];
                }
            }
            repair(ctx, &mut off, &mut cloud, rng);
            let fitness = evaluate(ctx, &off, &cloud);
            next.push(Genome {
                offload: off,
                to_cloud: cloud,
                fitness,
            });
        }
        population = next;
    }
    let best = population
        .into_iter()
        .min_by(|a, b| a.fitness.partial_cmp(&b.fitness).unwrap())
        .unwrap();
    assemble(ctx, best.offload, best.to_cloud)
}
