//! Adaptive particle swarm search over feature masks.
//!
//! Particles live in `[0,1]^d`; a threshold decodes each position into a
//! feature mask, repaired into the `[k_min, k_max]` cardinality band by
//! taking the top positions. Fitness blends classifier accuracy with a
//! sparsity reward and is minimized. Inertia and the two acceleration
//! coefficients follow linear schedules between configured endpoints.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{fit, ModelSpec};
use crate::data::{DataTable, FeatureMask};
use crate::error::{Error, Result};
use crate::preprocess::{stratified_split, SplitSpec};
use crate::rng::{stream, Stage};

/// Where particle accuracy is measured during the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessEvalMode {
    /// Score candidate masks on the held-out test set. This leaks the test
    /// set into the search; it is what the original protocol does.
    PaperFaithfulTestSet,
    /// Re-split the training set 80:20 with the run seed and score masks on
    /// the internal validation part.
    ValidationSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub population: usize,
    pub iterations: usize,
    /// Position-to-mask decision threshold.
    pub threshold: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// Accuracy weight in the fitness blend.
    pub alpha: f64,
    /// Sparsity weight in the fitness blend.
    pub beta: f64,
    pub w_max: f64,
    pub w_min: f64,
    pub c1_init: f64,
    pub c1_final: f64,
    pub c2_init: f64,
    pub c2_final: f64,
    pub seed: u64,
    pub fitness_eval_mode: FitnessEvalMode,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        Self {
            population: 20,
            iterations: 25,
            threshold: 0.3,
            k_min: 3,
            k_max: 12,
            alpha: 0.8,
            beta: 0.2,
            w_max: 0.9,
            w_min: 0.4,
            c1_init: 2.5,
            c1_final: 1.5,
            c2_init: 1.5,
            c2_final: 2.5,
            seed: 0,
            fitness_eval_mode: FitnessEvalMode::PaperFaithfulTestSet,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidConfig("population must be >= 2".into()));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidConfig("iterations must be >= 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold must be in (0,1), got {}",
                self.threshold
            )));
        }
        if (self.alpha + self.beta - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "alpha + beta must equal 1, got {} + {}",
                self.alpha, self.beta
            )));
        }
        if self.k_min < 1 || self.k_min > self.k_max {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= k_min <= k_max, got [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if self.k_max > d {
            return Err(Error::InvalidConfig(format!(
                "k_max {} exceeds feature count {d}",
                self.k_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_position: Vec<f64>,
    pub pbest_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoResult {
    pub gbest_position: Vec<f64>,
    pub gbest_mask: FeatureMask,
    pub gbest_fitness: f64,
    /// Accuracy of the evaluation that produced `gbest_fitness`.
    pub best_accuracy: f64,
    /// Global best fitness after each iteration; non-increasing.
    pub fitness_history: Vec<f64>,
    /// Total fitness evaluations performed.
    pub evaluations: usize,
}

/// Thresholds a position into a mask, then repairs the cardinality: fewer
/// than `k_min` selected -> take the top `k_min` positions, more than
/// `k_max` -> keep the top `k_max`. Value ties prefer the lower index.
pub fn decode_mask(position: &[f64], threshold: f64, k_min: usize, k_max: usize) -> Result<FeatureMask> {
    let d = position.len();
    if d < k_min {
        return Err(Error::InvalidConfig(format!(
            "cannot select {k_min} features out of {d}"
        )));
    }
    let mut mask: Vec<bool> = position.iter().map(|&p| p > threshold).collect();
    let selected = mask.iter().filter(|&&b| b).count();
    let repair_to = if selected < k_min {
        Some(k_min)
    } else if selected > k_max {
        Some(k_max)
    } else {
        None
    };
    if let Some(k) = repair_to {
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| position[b].total_cmp(&position[a]).then(a.cmp(&b)));
        mask = vec![false; d];
        for &i in &order[..k] {
            mask[i] = true;
        }
    }
    Ok(FeatureMask(mask))
}

/// `1 - (alpha * accuracy + beta * (1 - selected/d))`; lower is better.
pub fn fitness(accuracy: f64, selected: usize, d: usize, alpha: f64, beta: f64) -> Result<f64> {
    if selected == 0 {
        return Err(Error::EmptyMask);
    }
    let interpretability = 1.0 - selected as f64 / d as f64;
    Ok(1.0 - (alpha * accuracy + beta * interpretability))
}

/// Linear schedules for `(w, c1, c2)` at iteration `t` of `T`.
pub fn schedule(t: usize, total: usize, cfg: &SwarmConfig) -> Result<(f64, f64, f64)> {
    if total == 0 {
        return Err(Error::InvalidConfig("schedule over zero iterations".into()));
    }
    let frac = t as f64 / total as f64;
    Ok((
        cfg.w_max + (cfg.w_min - cfg.w_max) * frac,
        cfg.c1_init + (cfg.c1_final - cfg.c1_init) * frac,
        cfg.c2_init + (cfg.c2_final - cfg.c2_init) * frac,
    ))
}

/// The velocity/position update with explicit random vectors:
/// `v' = w v + c1 r1 (pbest - x) + c2 r2 (gbest - x)`, `x' = clip(x + v')`.
pub fn update_particle_with(
    p: &mut Particle,
    gbest: &[f64],
    w: f64,
    c1: f64,
    c2: f64,
    r1: &[f64],
    r2: &[f64],
) -> Result<()> {
    let d = p.position.len();
    if gbest.len() != d || r1.len() != d || r2.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: gbest.len(),
        });
    }
    for j in 0..d {
        let v = w * p.velocity[j]
            + c1 * r1[j] * (p.pbest_position[j] - p.position[j])
            + c2 * r2[j] * (gbest[j] - p.position[j]);
        p.velocity[j] = v;
        p.position[j] = (p.position[j] + v).clamp(0.0, 1.0);
    }
    Ok(())
}

/// Draws `r1` then `r2` (exactly `2d` uniforms, in that order) from the
/// particle's stream and applies the update.
pub fn update_particle(
    p: &mut Particle,
    gbest: &[f64],
    w: f64,
    c1: f64,
    c2: f64,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let d = p.position.len();
    let r1: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let r2: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    update_particle_with(p, gbest, w, c1, c2, &r1, &r2)
}

struct Evaluation {
    fitness: f64,
    accuracy: f64,
    mask: FeatureMask,
}

/// Runs the swarm search for one model spec. Deterministic given
/// `cfg.seed`; particle evaluations may run in parallel without affecting
/// any reported number.
pub fn optimize(
    train: &DataTable,
    test: &DataTable,
    spec: &ModelSpec,
    cfg: &SwarmConfig,
) -> Result<PsoResult> {
    let d = train.n_features();
    cfg.validate(d)?;
    if test.n_features() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: test.n_features(),
        });
    }

    let (fit_table, eval_table) = match cfg.fitness_eval_mode {
        FitnessEvalMode::PaperFaithfulTestSet => (train.clone(), test.clone()),
        FitnessEvalMode::ValidationSplit => {
            let inner_seed: u64 = stream(cfg.seed, Stage::ValidationSplit, 0).random();
            stratified_split(
                train,
                &SplitSpec {
                    test_fraction: 0.2,
                    seed: inner_seed,
                },
            )?
        }
    };

    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.population)
        .map(|i| stream(cfg.seed, Stage::Particle, i as u64))
        .collect();
    let mut particles: Vec<Particle> = rngs
        .iter_mut()
        .map(|rng| {
            let position: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let velocity: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            Particle {
                pbest_position: position.clone(),
                pbest_fitness: f64::INFINITY,
                position,
                velocity,
            }
        })
        .collect();

    let evaluate = |position: &[f64]| -> Result<Evaluation> {
        let mask = decode_mask(position, cfg.threshold, cfg.k_min, cfg.k_max)?;
        let train_masked = fit_table.select_columns(&mask);
        let model = fit(spec, &train_masked.x, &train_masked.y)?;
        let eval_masked = eval_table.select_columns(&mask);
        let accuracy = model.accuracy(&eval_masked.x, &eval_masked.y)?;
        let fitness = fitness(accuracy, mask.count(), d, cfg.alpha, cfg.beta)?;
        Ok(Evaluation {
            fitness,
            accuracy,
            mask,
        })
    };

    let mut gbest_position: Vec<f64> = Vec::new();
    let mut gbest_mask = FeatureMask(Vec::new());
    let mut gbest_fitness = f64::INFINITY;
    let mut best_accuracy = 0.0;
    let mut fitness_history = Vec::with_capacity(cfg.iterations);

    for t in 1..=cfg.iterations {
        let (w, c1, c2) = schedule(t, cfg.iterations, cfg)?;

        let evals: Vec<Evaluation> = particles
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                evaluate(&p.position).map_err(|e| Error::ParticleFit {
                    particle: i,
                    iteration: t,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        // pbest/gbest updates in particle-index order, strict improvement.
        for (i, eval) in evals.iter().enumerate() {
            if eval.fitness < particles[i].pbest_fitness {
                particles[i].pbest_fitness = eval.fitness;
                particles[i].pbest_position = particles[i].position.clone();
            }
            if eval.fitness < gbest_fitness {
                gbest_fitness = eval.fitness;
                gbest_position = particles[i].position.clone();
                gbest_mask = eval.mask.clone();
                best_accuracy = eval.accuracy;
            }
        }
        fitness_history.push(gbest_fitness);

        for (p, rng) in particles.iter_mut().zip(rngs.iter_mut()) {
            update_particle(p, &gbest_position, w, c1, c2, rng)?;
        }
    }

    Ok(PsoResult {
        gbest_position,
        gbest_mask,
        gbest_fitness,
        best_accuracy,
        fitness_history,
        evaluations: cfg.population * cfg.iterations,
    })
}

/// Average mutual information (bits) between the masked features and the
/// label, each feature discretized into `bins` equal-width bins over its
/// observed range.
pub fn mutual_information(mask: &FeatureMask, table: &DataTable, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!("bins must be >= 2, got {bins}")));
    }
    let indices = mask.indices();
    if indices.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = table.n_samples() as f64;
    let p_class = [
        table.class_count(0) as f64 / n,
        table.class_count(1) as f64 / n,
    ];
    let mut total = 0.0;
    for &j in &indices {
        let col: Vec<f64> = table.x.iter().map(|r| r[j]).collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut joint = vec![[0usize; 2]; bins];
        for (v, &label) in col.iter().zip(&table.y) {
            let bin = if hi > lo {
                (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
            } else {
                0
            };
            joint[bin][label as usize] += 1;
        }
        let mut mi = 0.0;
        for row in &joint {
            let p_bin = (row[0] + row[1]) as f64 / n;
            if p_bin == 0.0 {
                continue;
            }
            for c in 0..2 {
                let p_joint = row[c] as f64 / n;
                if p_joint > 0.0 && p_class[c] > 0.0 {
                    mi += p_joint * (p_joint / (p_bin * p_class[c])).log2();
                }
            }
        }
        total += mi;
    }
    Ok(total / indices.len() as f64)
}
