use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_terrain_params, ParamSpace, TerrainError, TerrainParams};
use crate::geom::Vec2;
use crate::seed::{self, derive, tags, SimRng};

/// Success-rate window of the minimal criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McThresholds {
    pub t_l: f64,
    pub t_h: f64,
}

impl Default for McThresholds {
    fn default() -> Self {
        McThresholds { t_l: 0.5, t_h: 0.9 }
    }
}

impl McThresholds {
    pub fn validate(&self) -> Result<(), TerrainError> {
        if 0.0 <= self.t_l && self.t_l < self.t_h && self.t_h <= 1.0 {
            Ok(())
        } else {
            Err(TerrainError::BadThresholds(self.t_l, self.t_h))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub elite_frac: f64,
    /// Mutation standard deviation as a fraction of each parameter's range.
    pub mutation_scale: f64,
    pub tournament: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig { elite_frac: 0.2, mutation_scale: 0.1, tournament: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumRecord {
    pub generation: usize,
    pub params: TerrainParams,
    pub scores: Vec<f64>,
    pub fitness: f64,
}

/// 1.0 when the mean planar velocity error over the trajectory is strictly
/// below 20 % of the commanded speed.
pub fn traversal_score(velocities: &[Vec2], command: Vec2) -> Result<f64, TerrainError> {
    if velocities.is_empty() {
        return Err(TerrainError::EmptyTrajectory);
    }
    let err = velocities.iter().map(|v| (*v - command).norm()).sum::<f64>() / velocities.len() as f64;
    Ok(if err < 0.2 * command.norm() { 1.0 } else { 0.0 })
}

/// Minimal-criterion fitness: the mean score if it lies strictly inside
/// `(t_l, t_h)`, otherwise zero.
pub fn curriculum_fitness(scores: &[f64], thresholds: McThresholds) -> Result<f64, TerrainError> {
    thresholds.validate()?;
    if scores.is_empty() {
        return Err(TerrainError::EmptyScores);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(if thresholds.t_l < mean && mean < thresholds.t_h { mean } else { 0.0 })
}

/// One GA generation: elites survive unchanged, the rest are mutated copies of
/// tournament winners drawn from the positive-fitness records only.
pub fn evolve_params(
    population: &[CurriculumRecord],
    space: &ParamSpace,
    cfg: &GaConfig,
    rng: &mut SimRng,
) -> Result<Vec<TerrainParams>, TerrainError> {
    if population.is_empty() {
        return Err(TerrainError::EmptyPopulation);
    }
    space.validate()?;
    let mut ranked: Vec<usize> = (0..population.len()).filter(|&i| population[i].fitness > 0.0).collect();
    if ranked.is_empty() {
        return Err(TerrainError::AllZeroFitness);
    }
    ranked.sort_by(|&a, &b| population[b].fitness.total_cmp(&population[a].fitness).then(a.cmp(&b)));

    let n = population.len();
    let n_elite = ((cfg.elite_frac * n as f64).round() as usize).min(ranked.len()).min(n);
    let mut next: Vec<TerrainParams> = ranked[..n_elite].iter().map(|&i| population[i].params).collect();

    let bounds = space.bounds();
    while next.len() < n {
        let mut best = ranked[rng.random_range(0..ranked.len())];
        for _ in 1..cfg.tournament.max(1) {
            let c = ranked[rng.random_range(0..ranked.len())];
            let (fc, fb) = (population[c].fitness, population[best].fitness);
            if fc > fb || (fc == fb && c < best) {
                best = c;
            }
        }
        let mut v = population[best].params.to_array();
        for (x, [lo, hi]) in v.iter_mut().zip(bounds) {
            let z: f64 = rng.sample(StandardNormal);
            *x = (*x + z * cfg.mutation_scale * (hi - lo)).clamp(lo, hi);
        }
        next.push(TerrainParams::from_array(v));
    }
    Ok(next)
}

/// Generational driver for the minimal-criterion filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Curriculum {
    pub space: ParamSpace,
    pub thresholds: McThresholds,
    pub ga: GaConfig,
    pub population: usize,
    /// Number of re-seeds from uniform sampling allowed when a generation has no
    /// positive-fitness record.
    pub reseed_budget: usize,
}

impl Default for Curriculum {
    fn default() -> Self {
        Curriculum {
            space: ParamSpace::default(),
            thresholds: McThresholds::default(),
            ga: GaConfig::default(),
            population: 32,
            reseed_budget: 3,
        }
    }
}

impl Curriculum {
    /// Run `generations` generations. `evaluate(params, seed)` returns the
    /// per-trial scores ν for one parameter set; it is called concurrently and
    /// results are merged by record index. `log` sees every evaluated generation.
    pub fn run<F, L>(&self, generations: usize, seed: u64, evaluate: F, mut log: L) -> Result<Vec<CurriculumRecord>, TerrainError>
    where
        F: Fn(&TerrainParams, u64) -> Vec<f64> + Sync,
        L: FnMut(&[CurriculumRecord]),
    {
        self.thresholds.validate()?;
        self.space.validate()?;
        if self.population == 0 {
            return Err(TerrainError::EmptyPopulation);
        }
        let mut rng = seed::rng(derive(seed, tags::CURRICULUM, 0));
        let mut params: Vec<TerrainParams> =
            (0..self.population).map(|_| sample_terrain_params(&self.space, &mut rng)).collect::<Result<_, _>>()?;
        let mut reseeds = 0;
        let mut records = Vec::new();
        for g in 0..generations {
            let gen_seed = derive(seed, tags::CURRICULUM, g as u64 + 1);
            records = params
                .par_iter()
                .enumerate()
                .map(|(i, p)| {
                    let scores = evaluate(p, derive(gen_seed, tags::ROLLOUT, i as u64));
                    let fitness = curriculum_fitness(&scores, self.thresholds)?;
                    Ok(CurriculumRecord { generation: g, params: *p, scores, fitness })
                })
                .collect::<Result<Vec<_>, TerrainError>>()?;
            log(&records);
            if g + 1 == generations {
                break;
            }
            params = match evolve_params(&records, &self.space, &self.ga, &mut rng) {
                Ok(next) => next,
                Err(TerrainError::AllZeroFitness) if reseeds < self.reseed_budget => {
                    reseeds += 1;
                    (0..self.population)
                        .map(|_| sample_terrain_params(&self.space, &mut rng))
                        .collect::<Result<_, _>>()?
                }
                Err(e) => return Err(e),
            };
        }
        Ok(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(h: f64, fitness: f64) -> CurriculumRecord {
        let mut params = TerrainParams::default();
        params.stair.step_height = h;
        CurriculumRecord { generation: 0, params, scores: vec![fitness], fitness }
    }

    #[test]
    fn traversal_boundary_is_strict() {
        let cmd = Vec2::new(1.0, 0.0);
        assert_eq!(traversal_score(&[cmd; 4], cmd).unwrap(), 1.0);
        assert_eq!(traversal_score(&[Vec2::ZERO; 4], cmd).unwrap(), 0.0);
        assert_eq!(traversal_score(&[Vec2::new(0.75, 0.0)], Vec2::new(1.0, 0.0)).unwrap(), 0.0);
        assert!(matches!(traversal_score(&[], cmd), Err(TerrainError::EmptyTrajectory)));
    }

    #[test]
    fn fitness_cases() {
        let th = McThresholds { t_l: 0.2, t_h: 0.8 };
        assert_eq!(curriculum_fitness(&[0.0, 1.0], th).unwrap(), 0.5);
        assert_eq!(curriculum_fitness(&[1.0; 9].iter().chain(&[0.0]).copied().collect::<Vec<_>>(), th).unwrap(), 0.0);
        let th = McThresholds { t_l: 0.5, t_h: 0.9 };
        assert_eq!(curriculum_fitness(&[0.0, 1.0], th).unwrap(), 0.0);
        assert!(matches!(
            curriculum_fitness(&[0.5], McThresholds { t_l: 0.6, t_h: 0.6 }),
            Err(TerrainError::BadThresholds(..))
        ));
        assert!(matches!(curriculum_fitness(&[], th), Err(TerrainError::EmptyScores)));
    }

    #[test]
    fn single_positive_record_parents_everything() {
        let pop = vec![record(0.05, 0.0), record(0.15, 0.6), record(0.25, 0.0), record(0.1, 0.0)];
        let cfg = GaConfig { mutation_scale: 0.0, ..GaConfig::default() };
        let mut rng = seed::rng(1);
        let next = evolve_params(&pop, &ParamSpace::default(), &cfg, &mut rng).unwrap();
        assert_eq!(next.len(), 4);
        assert!(next.iter().all(|p| *p == pop[1].params));
    }

    #[test]
    fn all_zero_signals_reseed() {
        let pop = vec![record(0.05, 0.0), record(0.15, 0.0)];
        let mut rng = seed::rng(1);
        assert!(matches!(
            evolve_params(&pop, &ParamSpace::default(), &GaConfig::default(), &mut rng),
            Err(TerrainError::AllZeroFitness)
        ));
    }

    #[test]
    fn mutation_stays_in_bounds() {
        let space = ParamSpace::default();
        let pop: Vec<_> = (0..10).map(|i| record(0.02 + 0.028 * i as f64, 0.6)).collect();
        let cfg = GaConfig { mutation_scale: 2.0, ..GaConfig::default() };
        let mut rng = seed::rng(3);
        for p in evolve_params(&pop, &space, &cfg, &mut rng).unwrap() {
            assert!(space.contains(&p));
        }
    }

    #[test]
    fn run_reports_each_generation_and_reseeds() {
        let cur = Curriculum { population: 6, reseed_budget: 1, ..Curriculum::default() };
        let mut gens = 0;
        let res = cur.run(1, 4, |_, _| vec![1.0], |_| gens += 1).unwrap();
        assert_eq!((gens, res.len()), (1, 6));
        let err = cur.run(5, 4, |_, _| vec![1.0], |_| {}).unwrap_err();
        assert!(matches!(err, TerrainError::AllZeroFitness));
    }
}
