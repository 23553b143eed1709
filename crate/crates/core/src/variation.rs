//! Initialization, repair, crossover and mutation on serving matrices.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::day_supply;
use crate::genome::DietGenome;
use crate::instance::ProblemInstance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationConfig {
    /// Probabilities of drawing 0, 1 and 2 servings at initialization. Any
    /// mass missing from a total of 1 goes to 0 servings.
    pub init_weights: [f64; 3],
    pub crossover_points: usize,
    /// Probability that a non-empty cell is zeroed.
    pub mut_one_to_zero: f64,
    /// Probability that an empty cell becomes one serving.
    pub mut_zero_to_one: f64,
    pub cell_cap: u8,
    /// Total servings repair may add to one genome; `None` means 10 × items.
    pub repair_max_iters: Option<usize>,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self {
            init_weights: [0.94, 0.04, 0.01],
            crossover_points: 20,
            mut_one_to_zero: 0.05,
            mut_zero_to_one: 0.0016,
            cell_cap: 5,
            repair_max_iters: None,
        }
    }
}

impl VariationConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = self
            .init_weights
            .iter()
            .chain([&self.mut_one_to_zero, &self.mut_zero_to_one]);
        for &p in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("probability {p} outside [0, 1]")));
            }
        }
        if self.init_weights.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::param("initialization weights sum above 1"));
        }
        if self.crossover_points == 0 {
            return Err(Error::param("crossover needs at least one cut point"));
        }
        if self.cell_cap < 2 {
            return Err(Error::param("cell cap must allow at least 2 servings"));
        }
        Ok(())
    }

    /// Effective probabilities of 0, 1 and 2 servings.
    pub fn effective_init_weights(&self) -> [f64; 3] {
        let [_, one, two] = self.init_weights;
        [1.0 - one - two, one, two]
    }

    pub fn repair_budget(&self, items: usize) -> usize {
        self.repair_max_iters.unwrap_or(10 * items)
    }
}

/// Random stream for individual `stream` of a population seeded by `seed`.
pub fn individual_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `k` genomes cell by cell from the initialization weights.
/// Individual `i` uses stream `i` of `seed`, so each genome is independent of
/// the population size.
pub fn init_population(
    instance: &ProblemInstance,
    k: usize,
    config: &VariationConfig,
    seed: u64,
) -> Result<Vec<DietGenome>> {
    if k < 2 {
        return Err(Error::param(format!(
            "population size must be at least 2, got {k}"
        )));
    }
    config.validate()?;
    let [_, p1, p2] = config.effective_init_weights();
    Ok((0..k)
        .map(|i| {
            let mut rng = individual_rng(seed, i as u64);
            let mut genome = DietGenome::for_instance(instance);
            for cell in genome.cells_mut() {
                let u: f64 = rng.gen();
                *cell = if u < p1 {
                    1
                } else if u < p1 + p2 {
                    2
                } else {
                    0
                };
            }
            genome
        })
        .collect())
}

/// Adds servings until every day meets every nutrient requirement.
///
/// Per day, while some nutrient is short, one serving is added of the
/// uncapped item with the highest requirement-normalized deficit coverage
/// per cent of cost, `Σ_j min(a_ij, deficit_j) / R_j / cost_i`; ties go to
/// the lower item index. Never removes servings, and returns feasible inputs
/// unchanged.
pub fn repair(
    genome: &DietGenome,
    instance: &ProblemInstance,
    config: &VariationConfig,
) -> Result<DietGenome> {
    genome.check_dimensions(instance)?;
    let mut out = genome.clone();
    let m = instance.num_nutrients();
    let cap = config.cell_cap;
    let mut budget = config.repair_budget(instance.num_foods());

    for day in 0..out.horizon() {
        loop {
            let supply = day_supply(&out, instance, day);
            let deficits: Vec<f64> = (0..m)
                .map(|j| (instance.requirement(j) - supply[j]).max(0.0))
                .collect();
            if deficits.iter().all(|&d| d == 0.0) {
                break;
            }
            if budget == 0 {
                return Err(Error::RepairFailure {
                    day: day + 1,
                    reason: "iteration budget exhausted".into(),
                });
            }

            let mut best: Option<(usize, f64)> = None;
            for i in 0..out.items() {
                if out.get(i, day) >= cap {
                    continue;
                }
                let gain: f64 = instance
                    .nutrient_row(i)
                    .iter()
                    .zip(&deficits)
                    .enumerate()
                    .map(|(j, (&a, &d))| a.min(d) / instance.requirement(j))
                    .sum();
                if gain <= 0.0 {
                    continue;
                }
                let score = gain / f64::from(instance.cost_cents(i).max(1));
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((i, score));
                }
            }

            let Some((item, _)) = best else {
                let short: Vec<&str> = instance
                    .requirements()
                    .ids()
                    .zip(&deficits)
                    .filter(|(_, &d)| d > 0.0)
                    .map(|(id, _)| id)
                    .collect();
                return Err(Error::RepairFailure {
                    day: day + 1,
                    reason: format!("no uncapped item supplies {}", short.join(", ")),
                });
            };
            out.set(item, day, out.get(item, day) + 1);
            budget -= 1;
        }
    }
    Ok(out)
}

/// Multi-point crossover on the row-major flattening. Cut positions are
/// distinct, drawn uniformly from `1..len`; segments alternate between the
/// parents. The number of cuts is clamped to `len - 1`.
pub fn crossover<R: Rng + ?Sized>(
    parent_a: &DietGenome,
    parent_b: &DietGenome,
    config: &VariationConfig,
    rng: &mut R,
) -> Result<(DietGenome, DietGenome)> {
    if parent_a.items() != parent_b.items() || parent_a.horizon() != parent_b.horizon() {
        return Err(Error::Dimension {
            expected: parent_a.cells().len(),
            actual: parent_b.cells().len(),
        });
    }
    let len = parent_a.cells().len();
    let mut child_a = parent_a.clone();
    let mut child_b = parent_b.clone();
    if len < 2 {
        return Ok((child_a, child_b));
    }
    let points = config.crossover_points.min(len - 1);
    let mut cuts: Vec<usize> = index::sample(rng, len - 1, points)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(len);

    let (a, b) = (parent_a.cells(), parent_b.cells());
    let mut start = 0;
    for (segment, &end) in cuts.iter().enumerate() {
        if segment % 2 == 1 {
            child_a.cells_mut()[start..end].copy_from_slice(&b[start..end]);
            child_b.cells_mut()[start..end].copy_from_slice(&a[start..end]);
        }
        start = end;
    }
    Ok((child_a, child_b))
}

/// Asymmetric flip: a non-empty cell is zeroed with `mut_one_to_zero`, an
/// empty cell becomes one serving with `mut_zero_to_one`. One uniform draw is
/// consumed per cell regardless of outcome.
pub fn mutate<R: Rng + ?Sized>(
    genome: &DietGenome,
    config: &VariationConfig,
    rng: &mut R,
) -> DietGenome {
    let mut out = genome.clone();
    for cell in out.cells_mut() {
        let u: f64 = rng.gen();
        if *cell > 0 {
            if u < config.mut_one_to_zero {
                *cell = 0;
            }
        } else if u < config.mut_zero_to_one {
            *cell = 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::eval_penalty;
    use crate::instance::PenaltyGroup;
    use crate::synthetic::{synthetic_instance, toy_instance, ToyFood};

    fn toy() -> ProblemInstance {
        toy_instance(
            &[
                ToyFood::new(PenaltyGroup::Meats, 300, &[25.0, 2.0]),
                ToyFood::new(PenaltyGroup::Fruits, 100, &[1.0, 4.0]),
                ToyFood::new(PenaltyGroup::Dairy, 200, &[10.0, 3.0]),
            ],
            &[40.0, 6.0],
            3,
        )
    }

    #[test]
    fn init_is_seeded() {
        let inst = toy();
        let cfg = VariationConfig::default();
        assert_eq!(
            init_population(&inst, 6, &cfg, 9).unwrap(),
            init_population(&inst, 6, &cfg, 9).unwrap()
        );
        assert_ne!(
            init_population(&inst, 6, &cfg, 9).unwrap(),
            init_population(&inst, 6, &cfg, 10).unwrap()
        );
    }

    #[test]
    fn init_degenerate_weights() {
        let inst = toy();
        let cfg = VariationConfig {
            init_weights: [1.0, 0.0, 0.0],
            ..VariationConfig::default()
        };
        let pop = init_population(&inst, 4, &cfg, 1).unwrap();
        assert!(pop.iter().all(DietGenome::is_empty_diet));
    }

    #[test]
    fn init_rejects_tiny_population() {
        assert!(matches!(
            init_population(&toy(), 1, &VariationConfig::default(), 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn init_frequencies_full_scale() {
        let inst = synthetic_instance(3, 4);
        let cfg = VariationConfig::default();
        let pop = init_population(&inst, 30, &cfg, 11).unwrap();
        let total = (pop.len() * inst.num_foods() * inst.horizon()) as f64;
        let count = |v: u8| {
            pop.iter()
                .flat_map(|g| g.cells())
                .filter(|&&c| c == v)
                .count() as f64
                / total
        };
        // Leftover mass goes to zero servings: 0.95 / 0.04 / 0.01.
        assert!(
            (count(0) - 0.95).abs() <= 0.01,
            "zero fraction {}",
            count(0)
        );
        assert!((count(1) - 0.04).abs() <= 0.005);
        assert!((count(2) - 0.01).abs() <= 0.003);
        assert!(pop.iter().all(|g| g.max_cell() <= 2));
    }

    #[test]
    fn repair_leaves_feasible_genomes_alone() {
        let inst = toy();
        let mut g = DietGenome::for_instance(&inst);
        for d in 0..3 {
            g.set(0, d, 3);
        }
        assert_eq!(eval_penalty(&g, &inst), 0.0);
        assert_eq!(repair(&g, &inst, &VariationConfig::default()).unwrap(), g);
    }

    #[test]
    fn repair_single_sufficient_food() {
        // Food 2 alone covers both requirements in one serving and is cheapest.
        let inst = toy_instance(
            &[
                ToyFood::new(PenaltyGroup::Meats, 900, &[5.0, 1.0]),
                ToyFood::new(PenaltyGroup::Dairy, 100, &[50.0, 10.0]),
            ],
            &[40.0, 6.0],
            2,
        );
        let mut g = DietGenome::for_instance(&inst);
        g.set(1, 0, 1);
        let fixed = repair(&g, &inst, &VariationConfig::default()).unwrap();
        assert_eq!(eval_penalty(&fixed, &inst), 0.0);
        // Day 0 was already satisfied; only day 1 of food 2 changes.
        assert_eq!(fixed.get(1, 0), 1);
        assert_eq!(fixed.get(1, 1), 1);
        assert_eq!(fixed.get(0, 0), 0);
        assert_eq!(fixed.get(0, 1), 0);
    }

    #[test]
    fn repair_fails_when_caps_bind() {
        let inst = toy_instance(
            &[ToyFood::new(PenaltyGroup::Other, 100, &[1.0])],
            &[50.0],
            2,
        );
        let g = DietGenome::for_instance(&inst);
        let err = repair(&g, &inst, &VariationConfig::default()).unwrap_err();
        assert!(err.is_repair_failure());
    }

    #[test]
    fn repair_fails_on_budget() {
        let inst = toy();
        let cfg = VariationConfig {
            repair_max_iters: Some(1),
            ..VariationConfig::default()
        };
        let err = repair(&DietGenome::for_instance(&inst), &inst, &cfg).unwrap_err();
        assert!(err.is_repair_failure());
    }

    #[test]
    fn repair_is_additive_and_idempotent() {
        let inst = toy();
        let cfg = VariationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for g in init_population(&inst, 20, &cfg, 3).unwrap() {
            let g = mutate(&g, &cfg, &mut rng);
            let r = repair(&g, &inst, &cfg).unwrap();
            assert_eq!(eval_penalty(&r, &inst), 0.0);
            assert!(g.cells().iter().zip(r.cells()).all(|(a, b)| b >= a));
            assert!(r.max_cell() <= cfg.cell_cap);
            assert_eq!(repair(&r, &inst, &cfg).unwrap(), r);
        }
    }

    #[test]
    fn crossover_identical_parents() {
        let inst = toy();
        let g = init_population(&inst, 2, &VariationConfig::default(), 1)
            .unwrap()
            .remove(0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, b) = crossover(&g, &g, &VariationConfig::default(), &mut rng).unwrap();
        assert_eq!(a, g);
        assert_eq!(b, g);
    }

    #[test]
    fn crossover_alternates_segments() {
        // 2 items x 3 days = 6 cells; one cut.
        let a = DietGenome::from_cells(2, 3, vec![1; 6]).unwrap();
        let b = DietGenome::from_cells(2, 3, vec![2; 6]).unwrap();
        let cfg = VariationConfig {
            crossover_points: 1,
            ..VariationConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (ca, cb) = crossover(&a, &b, &cfg, &mut rng).unwrap();
        let cut = ca
            .cells()
            .iter()
            .position(|&c| c == 2)
            .expect("one cut swaps the tail");
        assert!(cut >= 1);
        assert!(ca.cells()[..cut].iter().all(|&c| c == 1));
        assert!(ca.cells()[cut..].iter().all(|&c| c == 2));
        assert!(cb.cells()[..cut].iter().all(|&c| c == 2));
        assert!(cb.cells()[cut..].iter().all(|&c| c == 1));
    }

    #[test]
    fn crossover_cut_count_is_clamped() {
        let a = DietGenome::from_cells(1, 3, vec![0, 0, 0]).unwrap();
        let b = DietGenome::from_cells(1, 3, vec![1, 1, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // 20 requested cuts on 3 cells: cuts at 1 and 2.
        let (ca, cb) = crossover(&a, &b, &VariationConfig::default(), &mut rng).unwrap();
        assert_eq!(ca.cells(), &[0, 1, 0]);
        assert_eq!(cb.cells(), &[1, 0, 1]);
    }

    #[test]
    fn crossover_rejects_mismatched_parents() {
        let a = DietGenome::zeros(2, 3);
        let b = DietGenome::zeros(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(crossover(&a, &b, &VariationConfig::default(), &mut rng).is_err());
    }

    #[test]
    fn mutation_identities() {
        let g = DietGenome::from_cells(3, 2, vec![0, 1, 2, 0, 5, 0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let off = VariationConfig {
            mut_one_to_zero: 0.0,
            mut_zero_to_one: 0.0,
            ..VariationConfig::default()
        };
        assert_eq!(mutate(&g, &off, &mut rng), g);

        let fill = VariationConfig {
            mut_one_to_zero: 0.0,
            mut_zero_to_one: 1.0,
            ..VariationConfig::default()
        };
        let zeros = DietGenome::zeros(4, 7);
        assert!(mutate(&zeros, &fill, &mut rng)
            .cells()
            .iter()
            .all(|&c| c == 1));

        let clear = VariationConfig {
            mut_one_to_zero: 1.0,
            mut_zero_to_one: 0.0,
            ..VariationConfig::default()
        };
        assert!(mutate(&g, &clear, &mut rng).is_empty_diet());
    }

    #[test]
    fn mutation_rate_on_large_genome() {
        let g = DietGenome::from_cells(2000, 10, vec![1; 20_000]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let m = mutate(&g, &VariationConfig::default(), &mut rng);
        let flipped = m.cells().iter().filter(|&&c| c == 0).count() as f64 / 20_000.0;
        assert!((flipped - 0.05).abs() <= 0.01, "flip fraction {flipped}");
    }

    #[test]
    fn config_validation() {
        assert!(VariationConfig::default().validate().is_ok());
        let bad = VariationConfig {
            mut_one_to_zero: 1.5,
            ..VariationConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = VariationConfig {
            init_weights: [0.9, 0.1, 0.1],
            ..VariationConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = VariationConfig {
            crossover_points: 0,
            ..VariationConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
