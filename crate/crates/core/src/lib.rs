//! Multi-objective weekly diet planning with diversity-aware selection.
//!
//! A diet is an integer servings matrix (foods by days). Three objectives
//! are minimized: total cost, day-to-day repetition of food groups, and
//! negated protein. Daily nutrient requirements are handled as a penalty.
//! Two solvers are provided: MOEA-HD, whose selection maximizes weighted
//! Hamming distance between selected diets, and a constrained NSGA-II
//! baseline. [`analytics`] holds the comparison metrics.

pub mod analytics;
pub mod diversity;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod genome;
pub mod instance;
pub mod ranking;
pub mod report;
pub mod synthetic;
pub mod variation;

pub use analytics::{
    compute_bounds, d_hmed, d_hmin, hypervolume, permutation_test, MetricsReport,
    NormalizationBounds, PermTestResult,
};
pub use diversity::{binarize, dwh_select, hamming, BinarizeMode, SelectionPool};
pub use engine::{
    run, run_batch, run_moea_hd, run_nsga2, Algorithm, AlgorithmConfig, RunResult, TournamentMode,
};
pub use error::{Error, Result};
pub use evaluation::{evaluate, EvaluatedSolution, ObjectiveVector, PenaltyMode};
pub use genome::DietGenome;
pub use instance::{
    assign_costs, build_instance, load_foods, CategoryMapping, Cents, DatasetFormat, FoodItem,
    NutrientRequirements, PenaltyGroup, PenaltySchedule, ProblemInstance,
};
pub use ranking::{crowding_distance, dominates, nondominated_sort, spea2_raw_fitness};
pub use variation::{crossover, init_population, mutate, repair, VariationConfig};
