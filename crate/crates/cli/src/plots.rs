//! Plot-ready CSV export. Nothing is rendered here.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hamdiet::genome::DietGenome;
use hamdiet::instance::{PenaltyGroup, ProblemInstance};
use hamdiet::report::{PermTestReport, RunRecord};

use crate::config::InstanceSpec;
use crate::data::load_instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMode {
    Pareto,
    WeeklyConsumption,
    DailyDiet,
    PermHistogram,
}

/// How foods are grouped in consumption exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Grouping {
    #[default]
    PenaltyGroup,
    Category,
}

/// Label of every item plus the label order used for output rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub per_item: Vec<String>,
    pub order: Vec<String>,
}

impl Labels {
    pub fn of(instance: &ProblemInstance, grouping: Grouping) -> Self {
        match grouping {
            Grouping::PenaltyGroup => Self {
                per_item: (0..instance.num_foods())
                    .map(|i| instance.group(i).to_string())
                    .collect(),
                order: PenaltyGroup::ALL.iter().map(|g| g.to_string()).collect(),
            },
            Grouping::Category => {
                let per_item: Vec<String> = instance
                    .foods()
                    .iter()
                    .map(|f| f.category.clone())
                    .collect();
                let mut order: Vec<String> = Vec::new();
                for c in &per_item {
                    if !order.contains(c) {
                        order.push(c.clone());
                    }
                }
                Self { per_item, order }
            }
        }
    }
}

/// Servings over the whole week per label, in label order.
pub fn weekly_consumption(genome: &DietGenome, labels: &Labels) -> Vec<(String, u32)> {
    labels
        .order
        .iter()
        .map(|label| {
            let total = (0..genome.items())
                .filter(|&i| &labels.per_item[i] == label)
                .flat_map(|i| genome.week(i).iter())
                .map(|&s| u32::from(s))
                .sum();
            (label.clone(), total)
        })
        .collect()
}

/// Servings per (1-based day, label).
pub fn daily_diet(genome: &DietGenome, labels: &Labels) -> Vec<(usize, String, u32)> {
    let mut rows = Vec::new();
    for day in 0..genome.horizon() {
        for label in &labels.order {
            let total = (0..genome.items())
                .filter(|&i| &labels.per_item[i] == label)
                .map(|i| u32::from(genome.get(i, day)))
                .sum();
            rows.push((day + 1, label.clone(), total));
        }
    }
    rows
}

fn load_record(path: &Path) -> Result<RunRecord> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    RunRecord::from_json(&text).with_context(|| format!("corrupt run file {}", path.display()))
}

/// Collects rows into CSV text.
struct Table(csv::Writer<Vec<u8>>);

impl Table {
    fn new(header: &[&str]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Self(w))
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        Ok(self.0.write_record(fields)?)
    }

    fn finish(self) -> Result<String> {
        Ok(String::from_utf8(self.0.into_inner()?)?)
    }
}

fn pareto_csv(files: &[PathBuf]) -> Result<String> {
    let mut table = Table::new(&[
        "seed",
        "solution",
        "f1_cost",
        "f2_repetitiveness",
        "f3_neg_protein",
    ])?;
    for path in files {
        let record = load_record(path)?;
        for (k, s) in record.nondominated.iter().enumerate() {
            let o = s.objectives();
            table.row(&[
                record.seed.to_string(),
                k.to_string(),
                o.cost.to_string(),
                o.repetitiveness.to_string(),
                o.neg_protein.to_string(),
            ])?;
        }
    }
    table.finish()
}

fn solution_genome(path: &Path, solution: usize) -> Result<(DietGenome, ProblemInstance)> {
    let record = load_record(path)?;
    let spec = InstanceSpec::from_pairs(&record.inputs)
        .with_context(|| format!("bad embedded inputs in {}", path.display()))?;
    let instance = load_instance(&spec)
        .with_context(|| format!("rebuilding the instance of {}", path.display()))?;
    let Some(s) = record.nondominated.get(solution) else {
        bail!(
            "{} has {} solutions; index {solution} is out of range",
            path.display(),
            record.nondominated.len()
        );
    };
    let genome = s
        .genome(instance.num_foods(), instance.horizon())
        .with_context(|| format!("solution {solution} of {}", path.display()))?;
    Ok((genome, instance))
}

fn perm_histogram_csv(path: &Path) -> Result<String> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let report = PermTestReport::from_json(&text)
        .with_context(|| format!("corrupt report {}", path.display()))?;
    let mut table = Table::new(&["kind", "diff"])?;
    table.row(&["observed".into(), report.result.observed_diff.to_string()])?;
    for d in &report.result.permutation_diffs {
        table.row(&["permutation".into(), d.to_string()])?;
    }
    table.finish()
}

pub fn export(
    mode: PlotMode,
    files: &[PathBuf],
    solution: usize,
    grouping: Grouping,
) -> Result<String> {
    if files.is_empty() {
        bail!("no input files");
    }
    let single = || -> Result<&PathBuf> {
        match files {
            [one] => Ok(one),
            _ => bail!("this mode takes exactly one input file"),
        }
    };
    match mode {
        PlotMode::Pareto => pareto_csv(files),
        PlotMode::WeeklyConsumption => {
            let (genome, instance) = solution_genome(single()?, solution)?;
            let header = match grouping {
                Grouping::PenaltyGroup => "group",
                Grouping::Category => "category",
            };
            let mut table = Table::new(&[header, "servings"])?;
            for (label, total) in weekly_consumption(&genome, &Labels::of(&instance, grouping)) {
                table.row(&[label, total.to_string()])?;
            }
            table.finish()
        }
        PlotMode::DailyDiet => {
            let (genome, instance) = solution_genome(single()?, solution)?;
            let mut table = Table::new(&["day", "category", "servings"])?;
            for (day, label, total) in daily_diet(&genome, &Labels::of(&instance, grouping)) {
                table.row(&[day.to_string(), label, total.to_string()])?;
            }
            table.finish()
        }
        PlotMode::PermHistogram => perm_histogram_csv(single()?),
    }
}
