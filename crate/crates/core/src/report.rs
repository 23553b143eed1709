//! Serialized run results, metrics rows and permutation-test reports.
//!
//! Run records leave out wall-clock time so that two runs with the same
//! inputs serialize to identical bytes; timing goes into the metrics table.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::{MetricsReport, PermTestResult};
use crate::engine::{AlgorithmConfig, GenerationTrace, RunResult};
use crate::error::{Error, Result};
use crate::evaluation::{EvaluatedSolution, ObjectiveVector};
use crate::genome::DietGenome;
use crate::instance::ProblemInstance;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub foods: usize,
    pub nutrients: Vec<String>,
    pub horizon: usize,
    pub cost_seed: Option<u64>,
}

impl InstanceSummary {
    pub fn of(instance: &ProblemInstance) -> Self {
        Self {
            foods: instance.num_foods(),
            nutrients: instance.requirements().ids().map(str::to_string).collect(),
            horizon: instance.horizon(),
            cost_seed: instance.cost_seed(),
        }
    }
}

/// One serving entry: 1-based item id, 1-based day, servings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Serving {
    pub item: usize,
    pub day: usize,
    pub servings: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub cost: f64,
    pub repetitiveness: f64,
    pub protein: f64,
    pub penalty: f64,
    pub diet: Vec<Serving>,
}

impl SolutionRecord {
    pub fn of(solution: &EvaluatedSolution) -> Self {
        let o = &solution.objectives;
        Self {
            cost: o.cost,
            repetitiveness: o.repetitiveness,
            protein: o.protein(),
            penalty: solution.penalty,
            diet: solution
                .genome
                .triples()
                .into_iter()
                .map(|(i, d, s)| Serving {
                    item: i + 1,
                    day: d + 1,
                    servings: s,
                })
                .collect(),
        }
    }

    pub fn objectives(&self) -> ObjectiveVector {
        ObjectiveVector::new(self.cost, self.repetitiveness, -self.protein)
    }

    pub fn genome(&self, items: usize, horizon: usize) -> Result<DietGenome> {
        let triples: Vec<(usize, usize, u8)> = self
            .diet
            .iter()
            .map(|s| {
                if s.item == 0 || s.day == 0 {
                    return Err(Error::param("serving entries are 1-based"));
                }
                Ok((s.item - 1, s.day - 1, s.servings))
            })
            .collect::<Result<_>>()?;
        DietGenome::from_triples(items, horizon, &triples)
    }
}

/// Everything needed to reproduce and inspect one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub seed: u64,
    pub generations_run: usize,
    pub config: AlgorithmConfig,
    /// Free-form provenance supplied by the caller (input paths and the like).
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    pub instance: InstanceSummary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<GenerationTrace>,
    pub nondominated: Vec<SolutionRecord>,
}

impl RunRecord {
    pub fn new(
        result: &RunResult,
        instance: &ProblemInstance,
        inputs: BTreeMap<String, String>,
    ) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            seed: result.seed,
            generations_run: result.generations_run,
            config: result.config.clone(),
            inputs,
            instance: InstanceSummary::of(instance),
            traces: result.traces.clone(),
            nondominated: result.nondominated.iter().map(SolutionRecord::of).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.nondominated
            .iter()
            .map(SolutionRecord::objectives)
            .collect()
    }
}

/// One line of the metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub algorithm: String,
    pub generations: usize,
    pub seed: u64,
    pub hv: f64,
    pub d_hmin: Option<u32>,
    pub d_hmed: f64,
    pub d_hmed_distinct: f64,
    pub front_size: usize,
    pub wall_time_s: Option<f64>,
}

impl MetricsRow {
    pub fn new(
        algorithm: &str,
        generations: usize,
        seed: u64,
        metrics: &MetricsReport,
        wall_time_s: Option<f64>,
    ) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            generations,
            seed,
            hv: metrics.hypervolume,
            d_hmin: metrics.d_hmin,
            d_hmed: metrics.d_hmed,
            d_hmed_distinct: metrics.d_hmed_distinct,
            front_size: metrics.set_size,
            wall_time_s,
        }
    }
}

pub fn write_metrics<W: Write>(writer: W, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<metrics>", e))
}

pub fn read_metrics<R: Read>(reader: R) -> Result<Vec<MetricsRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                row: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse {
        row: e.position().map_or(0, |p| p.record() as usize),
        message: e.to_string(),
    }
}

/// A permutation test between two labelled samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermTestReport {
    pub metric: String,
    pub generations: usize,
    pub label_a: String,
    pub label_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub permutations: usize,
    pub seed: u64,
    pub result: PermTestResult,
}

impl PermTestReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
