//! Objectives, constraint violation and feasibility of a weekly diet.

use serde::{Deserialize, Serialize};

use crate::genome::DietGenome;
use crate::instance::{PenaltyGroup, ProblemInstance, NUM_GROUPS};

/// Objective vector in minimization form: cost, repetitiveness, negated protein.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub cost: f64,
    pub repetitiveness: f64,
    pub neg_protein: f64,
}

impl ObjectiveVector {
    pub fn new(cost: f64, repetitiveness: f64, neg_protein: f64) -> Self {
        Self {
            cost,
            repetitiveness,
            neg_protein,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.cost, self.repetitiveness, self.neg_protein]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn protein(&self) -> f64 {
        -self.neg_protein
    }
}

/// How per-nutrient deficits are combined into the constraint penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyMode {
    /// Raw deficits in each nutrient's own unit, summed.
    #[default]
    Raw,
    /// Each deficit divided by its requirement before summing.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSolution {
    pub genome: DietGenome,
    pub objectives: ObjectiveVector,
    pub penalty: f64,
    pub feasible: bool,
    pub nds_rank: Option<usize>,
    pub crowding: Option<f64>,
    pub raw_fitness: Option<u32>,
}

impl EvaluatedSolution {
    pub fn clear_ranks(&mut self) {
        self.nds_rank = None;
        self.crowding = None;
        self.raw_fitness = None;
    }
}

/// Which penalty groups are eaten on which day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayCategoryProfile {
    present: Vec<[bool; NUM_GROUPS]>,
}

impl DayCategoryProfile {
    pub fn from_genome(genome: &DietGenome, instance: &ProblemInstance) -> Self {
        let mut present = vec![[false; NUM_GROUPS]; genome.horizon()];
        for i in 0..genome.items() {
            let g = instance.group(i).index();
            for (d, &s) in genome.week(i).iter().enumerate() {
                if s > 0 {
                    present[d][g] = true;
                }
            }
        }
        Self { present }
    }

    pub fn horizon(&self) -> usize {
        self.present.len()
    }

    /// Group `group` has servings on day `day` (0-based).
    pub fn present(&self, day: usize, group: PenaltyGroup) -> bool {
        self.present[day][group.index()]
    }

    /// Group `group` is eaten on `day` and again `days_before` days earlier.
    pub fn repeated(&self, day: usize, days_before: usize, group: PenaltyGroup) -> bool {
        days_before >= 1
            && days_before <= day
            && self.present(day, group)
            && self.present(day - days_before, group)
    }
}

/// Total cost in cents.
pub fn eval_cost(genome: &DietGenome, instance: &ProblemInstance) -> u64 {
    (0..genome.items())
        .map(|i| {
            let servings: u64 = genome.week(i).iter().map(|&s| u64::from(s)).sum();
            servings * u64::from(instance.cost_cents(i))
        })
        .sum()
}

/// Per-day penalty `v_d` for each day of the horizon.
pub fn day_repetitiveness(profile: &DayCategoryProfile, instance: &ProblemInstance) -> Vec<f64> {
    let penalties = instance.penalties();
    (0..profile.horizon())
        .map(|day| {
            let mut v = 0.0;
            for k in 1..=day {
                let mut any = false;
                for group in PenaltyGroup::ALL {
                    if profile.repeated(day, k, group) {
                        v += penalties.group_penalty(group);
                        any = true;
                    }
                }
                if any {
                    v += penalties.offset_penalty(k);
                }
            }
            v
        })
        .collect()
}

pub fn eval_repetitiveness(genome: &DietGenome, instance: &ProblemInstance) -> f64 {
    let profile = DayCategoryProfile::from_genome(genome, instance);
    day_repetitiveness(&profile, instance).iter().sum()
}

/// Total protein in grams.
pub fn eval_protein(genome: &DietGenome, instance: &ProblemInstance) -> f64 {
    (0..genome.items())
        .map(|i| {
            let servings: u32 = genome.week(i).iter().map(|&s| u32::from(s)).sum();
            f64::from(servings) * instance.protein(i)
        })
        .sum()
}

/// Supply of each nutrient on one day. Items are accumulated in index order,
/// so repeated calls on the same genome agree bit for bit.
pub fn day_supply(genome: &DietGenome, instance: &ProblemInstance, day: usize) -> Vec<f64> {
    let mut supply = vec![0.0; instance.num_nutrients()];
    for i in 0..genome.items() {
        let s = genome.get(i, day);
        if s == 0 {
            continue;
        }
        let s = f64::from(s);
        for (acc, &a) in supply.iter_mut().zip(instance.nutrient_row(i)) {
            *acc += a * s;
        }
    }
    supply
}

/// Daily supply of each nutrient: `supply[d][j]`.
pub fn daily_supply(genome: &DietGenome, instance: &ProblemInstance) -> Vec<Vec<f64>> {
    (0..genome.horizon())
        .map(|d| day_supply(genome, instance, d))
        .collect()
}

pub fn eval_penalty(genome: &DietGenome, instance: &ProblemInstance) -> f64 {
    eval_penalty_with(genome, instance, PenaltyMode::Raw)
}

pub fn eval_penalty_with(
    genome: &DietGenome,
    instance: &ProblemInstance,
    mode: PenaltyMode,
) -> f64 {
    let supply = daily_supply(genome, instance);
    let mut total = 0.0;
    for day in &supply {
        for (j, &have) in day.iter().enumerate() {
            let need = instance.requirement(j);
            let deficit = (need - have).max(0.0);
            total += match mode {
                PenaltyMode::Raw => deficit,
                PenaltyMode::Normalized => deficit / need,
            };
        }
    }
    total
}

pub fn evaluate(genome: DietGenome, instance: &ProblemInstance) -> EvaluatedSolution {
    evaluate_with(genome, instance, PenaltyMode::Raw)
}

pub fn evaluate_with(
    genome: DietGenome,
    instance: &ProblemInstance,
    mode: PenaltyMode,
) -> EvaluatedSolution {
    let objectives = ObjectiveVector::new(
        eval_cost(&genome, instance) as f64 / 100.0,
        eval_repetitiveness(&genome, instance),
        -eval_protein(&genome, instance),
    );
    let penalty = eval_penalty_with(&genome, instance, mode);
    EvaluatedSolution {
        genome,
        objectives,
        penalty,
        feasible: penalty == 0.0,
        nds_rank: None,
        crowding: None,
        raw_fitness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{toy_instance, ToyFood};

    fn meats_and_fruit() -> ProblemInstance {
        toy_instance(
            &[
                ToyFood::new(PenaltyGroup::Meats, 250, &[20.0, 10.0]),
                ToyFood::new(PenaltyGroup::Fruits, 100, &[1.0, 5.0]),
                ToyFood::new(PenaltyGroup::Meats, 400, &[30.0, 0.0]),
            ],
            &[50.0, 10.0],
            7,
        )
    }

    #[test]
    fn empty_diet() {
        let inst = meats_and_fruit();
        let g = DietGenome::for_instance(&inst);
        assert_eq!(eval_cost(&g, &inst), 0);
        assert_eq!(eval_repetitiveness(&g, &inst), 0.0);
        assert_eq!(eval_protein(&g, &inst), 0.0);
        let e = evaluate(g, &inst);
        assert_eq!(e.objectives.as_array(), [0.0, 0.0, -0.0]);
        assert_eq!(e.penalty, 7.0 * 60.0);
        assert!(!e.feasible);
        assert!(e.nds_rank.is_none() && e.raw_fitness.is_none());
    }

    #[test]
    fn cost_of_two_servings() {
        let inst = meats_and_fruit();
        let mut g = DietGenome::for_instance(&inst);
        g.set(0, 0, 2);
        assert_eq!(eval_cost(&g, &inst), 500);
        assert_eq!(evaluate(g, &inst).objectives.cost, 5.0);
    }

    #[test]
    fn meats_next_day() {
        let inst = meats_and_fruit();
        let mut g = DietGenome::for_instance(&inst);
        g.set(0, 0, 1);
        g.set(2, 1, 1);
        assert_eq!(eval_repetitiveness(&g, &inst), 6.0);
    }

    #[test]
    fn meats_two_days_apart() {
        let inst = meats_and_fruit();
        let mut g = DietGenome::for_instance(&inst);
        g.set(0, 0, 1);
        g.set(0, 2, 1);
        let profile = DayCategoryProfile::from_genome(&g, &inst);
        let v = day_repetitiveness(&profile, &inst);
        assert_eq!(v[2], 5.5);
        assert_eq!(v[0], 0.0);
        assert_eq!(v.iter().sum::<f64>(), 5.5);
    }

    #[test]
    fn disjoint_groups_have_no_repetition() {
        let inst = meats_and_fruit();
        let mut g = DietGenome::for_instance(&inst);
        g.set(0, 0, 1);
        g.set(1, 1, 3);
        assert_eq!(eval_repetitiveness(&g, &inst), 0.0);
    }

    #[test]
    fn two_groups_same_offset_pay_offset_once() {
        let inst = meats_and_fruit();
        let mut g = DietGenome::for_instance(&inst);
        for d in 0..2 {
            g.set(0, d, 1);
            g.set(1, d, 1);
        }
        // p_Meats + p_Fruits + p_offset1
        assert_eq!(eval_repetitiveness(&g, &inst), 3.0 + 0.1 + 3.0);
    }

    #[test]
    fn offsets_past_six_days_contribute_group_penalty_only() {
        let inst = toy_instance(&[ToyFood::new(PenaltyGroup::Meats, 100, &[1.0])], &[1.0], 9);
        let mut g = DietGenome::for_instance(&inst);
        g.set(0, 0, 1);
        g.set(0, 8, 1);
        assert_eq!(eval_repetitiveness(&g, &inst), 3.0);
    }

    #[test]
    fn protein_over_a_week() {
        let inst = toy_instance(
            &[ToyFood::new(PenaltyGroup::Dairy, 100, &[12.5])],
            &[1.0],
            7,
        );
        let mut g = DietGenome::for_instance(&inst);
        for d in 0..7 {
            g.set(0, d, 1);
        }
        assert_eq!(eval_protein(&g, &inst), 87.5);
        assert_eq!(evaluate(g, &inst).objectives.neg_protein, -87.5);
    }

    #[test]
    fn deficit_hand_case() {
        // One nutrient, R = 50; one serving supplies 30 on day 1 only.
        let inst = toy_instance(
            &[ToyFood::new(PenaltyGroup::Other, 100, &[30.0])],
            &[50.0],
            7,
        );
        let mut g = DietGenome::for_instance(&inst);
        g.set(0, 0, 1);
        assert_eq!(eval_penalty(&g, &inst), 320.0);
        let norm = eval_penalty_with(&g, &inst, PenaltyMode::Normalized);
        assert!((norm - (20.0 / 50.0 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn satisfied_requirements_are_feasible() {
        let inst = meats_and_fruit();
        let mut g = DietGenome::for_instance(&inst);
        for d in 0..7 {
            g.set(0, d, 3);
        }
        let e = evaluate(g, &inst);
        assert_eq!(e.penalty, 0.0);
        assert!(e.feasible);
        assert!(e.objectives.neg_protein < 0.0);
    }
}
