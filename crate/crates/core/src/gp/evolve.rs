use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::genome::{fitness, FitnessConfig, GeneBounds, Genome, N_GENES};
use crate::cpg::OscillatorParams;
use crate::snake::PhysicsParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    /// BLX-alpha extension beyond the parents' interval.
    pub blend_alpha: f64,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation standard deviation as a fraction of each gene's range.
    pub mutation_sigma: f64,
    pub elites: usize,
    pub seed: u64,
    /// Put the base parameters in the first generation.
    pub include_base: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            population: 32,
            generations: 30,
            tournament: 3,
            blend_alpha: 0.3,
            crossover_rate: 0.9,
            mutation_rate: 0.3,
            mutation_sigma: 0.05,
            elites: 1,
            seed: 0,
            include_base: true,
        }
    }
}

impl EvolveConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.population < 2 {
            return bad(format!("population must be >= 2, got {}", self.population));
        }
        if self.tournament == 0 || self.tournament > self.population {
            return bad(format!("tournament size {} outside 1..={}", self.tournament, self.population));
        }
        if self.elites >= self.population {
            return bad(format!("elites ({}) must be below the population", self.elites));
        }
        for (name, v) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if !(self.blend_alpha >= 0.0 && self.mutation_sigma >= 0.0) {
            return bad("blend_alpha and mutation_sigma must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    /// Mean and spread over the finite scores only.
    pub mean: f64,
    pub std: f64,
    pub feasible: usize,
}

impl GenerationStats {
    pub const CSV_HEADER: &'static str = "generation,best,mean,std,feasible";

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.generation.to_string(),
            self.best.to_string(),
            self.mean.to_string(),
            self.std.to_string(),
            self.feasible.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveResult {
    pub best: Genome,
    pub best_fitness: f64,
    pub params: OscillatorParams,
    pub history: Vec<GenerationStats>,
}

fn stats(generation: usize, scores: &[f64]) -> GenerationStats {
    let finite: Vec<f64> = scores.iter().copied().filter(|s| s.is_finite()).collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mean, std) = if finite.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let m = crate::stats::mean(&finite);
        let var = finite.iter().map(|s| (s - m).powi(2)).sum::<f64>() / finite.len() as f64;
        (m, var.sqrt())
    };
    GenerationStats {
        generation,
        best,
        mean,
        std,
        feasible: finite.len(),
    }
}

fn tournament(scores: &[f64], k: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut best = rng.random_range(0..scores.len());
    for _ in 1..k {
        let c = rng.random_range(0..scores.len());
        if scores[c] > scores[best] {
            best = c;
        }
    }
    best
}

fn blend(a: &Genome, b: &Genome, alpha: f64, rng: &mut ChaCha8Rng) -> Genome {
    let mut genes = [0.0; N_GENES];
    for i in 0..N_GENES {
        let (lo, hi) = (a.genes[i].min(b.genes[i]), a.genes[i].max(b.genes[i]));
        let ext = alpha * (hi - lo);
        genes[i] = rng.random_range(lo - ext..=hi + ext);
    }
    Genome { genes }
}

/// Evolve oscillator parameters within `bounds`. Scores are computed in
/// parallel but the result depends only on `cfg.seed`.
pub fn evolve(
    base: &OscillatorParams,
    bounds: &GeneBounds,
    fit: &FitnessConfig,
    phys: &PhysicsParams,
    cfg: &EvolveConfig,
) -> Result<EvolveResult> {
    cfg.check()?;
    bounds.check()?;
    fit.check()?;
    phys.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop: Vec<Genome> = (0..cfg.population)
        .map(|_| Genome {
            genes: std::array::from_fn(|i| rng.random_range(bounds.lo[i]..=bounds.hi[i])),
        })
        .collect();
    if cfg.include_base {
        let mut g = Genome::from_params(base);
        bounds.clamp(&mut g);
        pop[0] = g;
    }
    let score = |pop: &[Genome]| -> Vec<f64> { pop.par_iter().map(|g| fitness(g, base, fit, phys)).collect() };
    let mut scores = score(&pop);
    let mut history = vec![stats(0, &scores)];
    for gen in 1..=cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let mut next: Vec<Genome> = order[..cfg.elites].iter().map(|&i| pop[i]).collect();
        while next.len() < cfg.population {
            let pa = pop[tournament(&scores, cfg.tournament, &mut rng)];
            let pb = pop[tournament(&scores, cfg.tournament, &mut rng)];
            let mut child = if rng.random::<f64>() < cfg.crossover_rate {
                blend(&pa, &pb, cfg.blend_alpha, &mut rng)
            } else {
                pa
            };
            for i in 0..N_GENES {
                if rng.random::<f64>() < cfg.mutation_rate {
                    let sd = cfg.mutation_sigma * bounds.width(i);
                    if sd > 0.0 {
                        child.genes[i] += Normal::new(0.0, sd).expect("finite sd").sample(&mut rng);
                    }
                }
            }
            bounds.clamp(&mut child);
            next.push(child);
        }
        // elites keep their scores; only the offspring are evaluated
        let mut new_scores: Vec<f64> = order[..cfg.elites].iter().map(|&i| scores[i]).collect();
        new_scores.extend(score(&next[cfg.elites..]));
        pop = next;
        scores = new_scores;
        history.push(stats(gen, &scores));
    }
    let bi = (0..pop.len()).max_by(|&a, &b| scores[a].total_cmp(&scores[b])).expect("non-empty population");
    Ok(EvolveResult {
        best: pop[bi],
        best_fitness: scores[bi],
        params: pop[bi].decode(base),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> EvolveConfig {
        EvolveConfig {
            population: 6,
            generations: 2,
            seed,
            ..Default::default()
        }
    }

    fn quick() -> FitnessConfig {
        FitnessConfig {
            horizon: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn elitism_keeps_best_non_decreasing() {
        let base = OscillatorParams::TABLE_I;
        let r = evolve(&base, &GeneBounds::default(), &quick(), &PhysicsParams::default(), &small(3)).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].best >= w[0].best, "{:?}", r.history);
        }
        assert_eq!(r.history.len(), 3);
        assert_eq!(r.best_fitness, r.history.last().unwrap().best);
    }

    #[test]
    fn same_seed_same_result() {
        let base = OscillatorParams::TABLE_I;
        let run = || evolve(&base, &GeneBounds::default(), &quick(), &PhysicsParams::default(), &small(9)).unwrap();
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(EvolveConfig { elites: 32, ..Default::default() }.check().is_err());
        assert!(EvolveConfig { tournament: 0, ..Default::default() }.check().is_err());
        assert!(EvolveConfig { mutation_rate: 1.5, ..Default::default() }.check().is_err());
    }
}
