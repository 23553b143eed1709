//! Synthetic food data: a full-size stand-in for the food-composition table
//! and small hand-built instances for tests.
//!
//! Nutrient values are invented per category and carry no nutritional
//! authority. They exist so that the solvers can be exercised end to end at
//! the scale of the real table without redistributing it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{
    build_instance, Cents, FoodItem, NutrientRequirements, PenaltyGroup, PenaltySchedule,
    ProblemInstance, DATASET_CATEGORIES, DEFAULT_PROTEIN_COLUMN,
};

/// Nutrient ids of the bundled sample data, in column order.
pub const SAMPLE_NUTRIENTS: [&str; 6] = [
    "energy_kcal",
    "protein_g",
    "calcium_mg",
    "iron_mg",
    "vitamin_c_mg",
    "zinc_mg",
];

/// Placeholder daily minima for [`SAMPLE_NUTRIENTS`].
pub const SAMPLE_REQUIREMENTS: [f64; 6] = [2000.0, 50.0, 1000.0, 14.0, 100.0, 11.0];

const SAMPLE_UNITS: [&str; 6] = ["kcal", "g", "mg", "mg", "mg", "mg"];

// Mean amount per serving for each dataset category, same order as
// `DATASET_CATEGORIES` and `SAMPLE_NUTRIENTS`.
const CATEGORY_PROFILES: [[f64; 6]; 15] = [
    [250.0, 6.0, 20.0, 1.5, 0.0, 1.2],
    [40.0, 2.0, 40.0, 0.8, 25.0, 0.4],
    [70.0, 0.8, 15.0, 0.4, 40.0, 0.2],
    [200.0, 0.2, 2.0, 0.1, 0.0, 0.05],
    [150.0, 22.0, 60.0, 1.0, 1.0, 1.0],
    [230.0, 25.0, 12.0, 2.2, 0.0, 4.5],
    [130.0, 8.0, 250.0, 0.2, 1.0, 1.0],
    [80.0, 0.5, 10.0, 0.2, 10.0, 0.1],
    [150.0, 12.0, 50.0, 1.6, 0.0, 1.2],
    [250.0, 2.0, 30.0, 0.8, 1.0, 0.4],
    [100.0, 3.0, 40.0, 2.0, 5.0, 0.5],
    [280.0, 10.0, 80.0, 1.5, 2.0, 1.5],
    [300.0, 12.0, 60.0, 2.0, 8.0, 2.0],
    [180.0, 10.0, 50.0, 3.0, 2.0, 1.5],
    [300.0, 9.0, 80.0, 2.5, 1.0, 2.5],
];

/// Generates a dataset with the category histogram of the full
/// 597-item table. Costs are left unset; penalty groups are unset.
pub fn synthetic_dataset(seed: u64) -> Vec<FoodItem> {
    synthetic_dataset_scaled(seed, 1)
}

/// Like [`synthetic_dataset`] with every category count divided by
/// `divisor` (at least one item per category).
pub fn synthetic_dataset_scaled(seed: u64, divisor: usize) -> Vec<FoodItem> {
    let divisor = divisor.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();
    for ((category, count, _), profile) in DATASET_CATEGORIES.iter().zip(CATEGORY_PROFILES.iter()) {
        let count = (count / divisor).max(1);
        for k in 0..count {
            let mut nutrients = BTreeMap::new();
            for (id, mean) in SAMPLE_NUTRIENTS.iter().zip(profile) {
                // Roughly a quarter of items lack each micronutrient entirely.
                let amount = if *mean < 5.0 && rng.gen_bool(0.25) {
                    0.0
                } else {
                    round2(mean * rng.gen_range(0.3..1.7))
                };
                nutrients.insert(id.to_string(), amount);
            }
            let protein = nutrients[DEFAULT_PROTEIN_COLUMN];
            items.push(FoodItem {
                id: items.len() + 1,
                name: format!("{} #{}", category, k + 1),
                category: category.to_string(),
                penalty_group: None,
                nutrients,
                protein,
                cost: None,
            });
        }
    }
    items
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn sample_requirements() -> NutrientRequirements {
    let text = sample_requirements_text();
    NutrientRequirements::parse(&text).expect("bundled requirements are valid")
}

/// The sample requirements in the key-value file format.
pub fn sample_requirements_text() -> String {
    let mut out =
        String::from("# Placeholder daily minima; replace with official reference values.\n");
    for (id, unit) in SAMPLE_NUTRIENTS.iter().zip(SAMPLE_UNITS) {
        out.push_str(&format!("# unit: {id} = {unit}\n"));
    }
    for (id, value) in SAMPLE_NUTRIENTS.iter().zip(SAMPLE_REQUIREMENTS) {
        out.push_str(&format!("{id} = {value}\n"));
    }
    out
}

/// Full pipeline on synthetic data: generate, assign costs in [$1, $10],
/// map categories with the default mapping, build a 7-day instance.
pub fn synthetic_instance(data_seed: u64, cost_seed: u64) -> ProblemInstance {
    synthetic_instance_scaled(data_seed, cost_seed, 1)
}

pub fn synthetic_instance_scaled(
    data_seed: u64,
    cost_seed: u64,
    divisor: usize,
) -> ProblemInstance {
    let items = synthetic_dataset_scaled(data_seed, divisor);
    let items = crate::instance::assign_costs(items, Cents(100), Cents(1000), cost_seed, true)
        .expect("non-empty items and valid range");
    let items =
        crate::instance::map_categories(items, &crate::instance::CategoryMapping::default())
            .expect("default mapping covers every dataset category");
    build_instance(
        items,
        sample_requirements(),
        PenaltySchedule::default(),
        None,
    )
    .expect("synthetic instance is consistent")
    .with_cost_seed(cost_seed)
}

/// A hand-specified food for [`toy_instance`].
#[derive(Debug, Clone)]
pub struct ToyFood {
    pub group: PenaltyGroup,
    pub cost_cents: u32,
    /// Amounts aligned with the requirement list; index 0 is protein.
    pub nutrients: Vec<f64>,
}

impl ToyFood {
    pub fn new(group: PenaltyGroup, cost_cents: u32, nutrients: &[f64]) -> Self {
        Self {
            group,
            cost_cents,
            nutrients: nutrients.to_vec(),
        }
    }
}

/// Nutrient id of column `j` in toy instances; column 0 is protein.
pub fn toy_nutrient_id(j: usize) -> String {
    if j == 0 {
        DEFAULT_PROTEIN_COLUMN.to_string()
    } else {
        format!("n{j}")
    }
}

/// Builds an instance from explicit foods and requirements with the default
/// penalty schedule.
///
/// # Panics
/// If the inputs do not form a consistent instance.
pub fn toy_instance(foods: &[ToyFood], requirements: &[f64], horizon: usize) -> ProblemInstance {
    let items = foods
        .iter()
        .enumerate()
        .map(|(i, f)| {
            assert_eq!(
                f.nutrients.len(),
                requirements.len(),
                "toy food {i} has the wrong nutrient count"
            );
            let nutrients: BTreeMap<String, f64> = f
                .nutrients
                .iter()
                .enumerate()
                .map(|(j, &a)| (toy_nutrient_id(j), a))
                .collect();
            FoodItem {
                id: i + 1,
                name: format!("toy{}", i + 1),
                category: f.group.name().to_string(),
                penalty_group: Some(f.group),
                protein: f.nutrients[0],
                nutrients,
                cost: Some(Cents(f.cost_cents)),
            }
        })
        .collect();
    let req = NutrientRequirements::new(
        requirements
            .iter()
            .enumerate()
            .map(|(j, &r)| (toy_nutrient_id(j), r))
            .collect(),
    )
    .expect("toy requirements are positive");
    build_instance(items, req, PenaltySchedule::default(), Some(horizon))
        .expect("toy instance is consistent")
}

/// Random instance for property tests: `foods` items with `nutrients`
/// nutrients each, amounts in `[0, 10)`, costs in 1..=1000 cents and
/// requirements in `[1, 20)`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    foods: usize,
    nutrients: usize,
    horizon: usize,
) -> ProblemInstance {
    let toy: Vec<ToyFood> = (0..foods)
        .map(|_| ToyFood {
            group: PenaltyGroup::ALL[rng.gen_range(0..PenaltyGroup::ALL.len())],
            cost_cents: rng.gen_range(1..=1000),
            nutrients: (0..nutrients)
                .map(|_| round2(rng.gen_range(0.0..10.0)))
                .collect(),
        })
        .collect();
    let req: Vec<f64> = (0..nutrients)
        .map(|_| round2(rng.gen_range(1.0..20.0)))
        .collect();
    // Every requirement needs at least one supplier.
    let mut toy = toy;
    for j in 0..nutrients {
        if toy.iter().all(|f| f.nutrients[j] == 0.0) {
            toy[0].nutrients[j] = 1.0;
        }
    }
    toy_instance(&toy, &req, horizon)
}
