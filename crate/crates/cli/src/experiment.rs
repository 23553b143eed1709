//! Experiment grid execution, run replay and permutation comparisons.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hamdiet::analytics::{compute_bounds, permutation_test, MetricsReport};
use hamdiet::engine::{run, run_batch, Algorithm, RunResult};
use hamdiet::evaluation::ObjectiveVector;
use hamdiet::report::{read_metrics, write_metrics, MetricsRow, PermTestReport, RunRecord};

use crate::config::{ExperimentConfig, InstanceSpec};
use crate::data::load_instance;

pub const METRICS_FILE: &str = "metrics.csv";
pub const CONFIG_ECHO_FILE: &str = "experiment.conf";

pub fn run_file_path(out: &Path, algorithm: Algorithm, generations: usize, seed: u64) -> PathBuf {
    out.join(algorithm.name())
        .join(generations.to_string())
        .join(format!("run_{seed}.json"))
}

/// Runs every (algorithm, generations) cell, writes one JSON per run and a
/// metrics table. Hypervolume bounds are shared by all runs of the same
/// generation setting.
pub fn run_experiment(
    config: &ExperimentConfig,
    mut progress: impl FnMut(&str),
) -> Result<Vec<MetricsRow>> {
    config.validate()?;
    let mut spec = config.instance.clone();
    spec.absolutize()?;
    let instance = load_instance(&spec)?;
    let inputs = spec.to_pairs();

    std::fs::create_dir_all(&config.out)
        .with_context(|| format!("cannot create {}", config.out.display()))?;
    let echo = ExperimentConfig {
        instance: spec,
        ..config.clone()
    };
    let echo_path = config.out.join(CONFIG_ECHO_FILE);
    std::fs::write(&echo_path, echo.to_text())
        .with_context(|| format!("cannot write {}", echo_path.display()))?;

    let mut rows = Vec::new();
    for &generations in &config.generations {
        let mut cells: Vec<(Algorithm, Vec<RunResult>)> = Vec::new();
        for &algorithm in &config.algorithms {
            progress(&format!(
                "{algorithm}, {generations} generations, {} runs",
                config.reps
            ));
            let results = run_batch(
                &instance,
                &config.algorithm_config(algorithm, generations),
                config.reps,
                config.seed_base,
                config.jobs,
            )
            .with_context(|| format!("{algorithm} with {generations} generations"))?;
            for r in &results {
                let path = run_file_path(&config.out, algorithm, generations, r.seed);
                RunRecord::new(r, &instance, inputs.clone())
                    .save(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            cells.push((algorithm, results));
        }

        let fronts: Vec<Vec<ObjectiveVector>> = cells
            .iter()
            .flat_map(|(_, results)| results.iter())
            .map(|r| r.nondominated.iter().map(|s| s.objectives).collect())
            .collect();
        let bounds = compute_bounds(&fronts)?;
        for (algorithm, results) in &cells {
            for r in results {
                let metrics = MetricsReport::compute(&r.nondominated, &bounds, config.binarize)?;
                rows.push(MetricsRow::new(
                    algorithm.name(),
                    generations,
                    r.seed,
                    &metrics,
                    Some(r.wall_time.as_secs_f64()),
                ));
            }
        }
    }

    let metrics_path = config.out.join(METRICS_FILE);
    let file = std::fs::File::create(&metrics_path)
        .with_context(|| format!("cannot write {}", metrics_path.display()))?;
    write_metrics(file, &rows)?;
    Ok(rows)
}

/// Rebuilds the instance and configuration embedded in a run file and runs
/// it again. Returns the new JSON text and whether it equals the original.
pub fn replay(run_file: &Path) -> Result<(String, bool)> {
    let original = std::fs::read_to_string(run_file)
        .with_context(|| format!("cannot read {}", run_file.display()))?;
    let record = RunRecord::from_json(&original)
        .with_context(|| format!("corrupt run file {}", run_file.display()))?;
    let spec = InstanceSpec::from_pairs(&record.inputs)
        .with_context(|| format!("bad embedded inputs in {}", run_file.display()))?;
    let instance = load_instance(&spec)?;
    let result = run(&instance, &record.config)?;
    let text = RunRecord::new(&result, &instance, record.inputs.clone()).to_json()?;
    let identical = text == original;
    Ok((text, identical))
}

pub const METRIC_COLUMNS: [&str; 6] = [
    "hv",
    "d_hmin",
    "d_hmed",
    "d_hmed_distinct",
    "front_size",
    "wall_time_s",
];

fn metric_value(row: &MetricsRow, metric: &str) -> Option<f64> {
    match metric {
        "hv" => Some(row.hv),
        "d_hmin" => row.d_hmin.map(f64::from),
        "d_hmed" => Some(row.d_hmed),
        "d_hmed_distinct" => Some(row.d_hmed_distinct),
        "front_size" => Some(row.front_size as f64),
        "wall_time_s" => row.wall_time_s,
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct CompareRequest {
    pub metrics: PathBuf,
    pub metric: String,
    pub group_a: String,
    pub group_b: String,
    pub generations: Option<usize>,
    pub permutations: usize,
    pub seed: u64,
}

/// Permutation test of one metric column between two algorithm groups.
/// Rows without a value (d_Hmin of single-solution fronts) are skipped.
pub fn compare(request: &CompareRequest) -> Result<PermTestReport> {
    if !METRIC_COLUMNS.contains(&request.metric.as_str()) {
        bail!(
            "unknown metric {:?}; expected one of {}",
            request.metric,
            METRIC_COLUMNS.join(", ")
        );
    }
    let file = std::fs::File::open(&request.metrics)
        .with_context(|| format!("cannot read {}", request.metrics.display()))?;
    let rows = read_metrics(file).with_context(|| format!("in {}", request.metrics.display()))?;
    let sample = |group: &str| -> Result<Vec<f64>> {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| {
                r.algorithm == group && request.generations.is_none_or(|g| g == r.generations)
            })
            .filter_map(|r| metric_value(r, &request.metric))
            .collect();
        if values.is_empty() {
            bail!(
                "no {} values for group {group:?} in {}",
                request.metric,
                request.metrics.display()
            );
        }
        Ok(values)
    };
    let a = sample(&request.group_a)?;
    let b = sample(&request.group_b)?;
    let result = permutation_test(&a, &b, request.permutations, request.seed)?;
    Ok(PermTestReport {
        metric: request.metric.clone(),
        generations: request.generations.unwrap_or(0),
        label_a: request.group_a.clone(),
        label_b: request.group_b.clone(),
        n_a: a.len(),
        n_b: b.len(),
        permutations: request.permutations,
        seed: request.seed,
        result,
    })
}

pub fn default_compare_output(request: &CompareRequest) -> PathBuf {
    let dir = request.metrics.parent().unwrap_or(Path::new("."));
    let suffix = request
        .generations
        .map(|g| format!("_{g}"))
        .unwrap_or_default();
    dir.join(format!(
        "perm_{}_{}_vs_{}{suffix}.json",
        request.metric, request.group_a, request.group_b
    ))
}

/// Cell means per (algorithm, generations), in file order.
pub fn summarize(rows: &[MetricsRow]) -> Vec<(String, usize, BTreeMap<&'static str, f64>)> {
    let mut cells: Vec<(String, usize, Vec<&MetricsRow>)> = Vec::new();
    for row in rows {
        match cells
            .iter_mut()
            .find(|(a, g, _)| *a == row.algorithm && *g == row.generations)
        {
            Some(cell) => cell.2.push(row),
            None => cells.push((row.algorithm.clone(), row.generations, vec![row])),
        }
    }
    cells
        .into_iter()
        .map(|(algorithm, generations, members)| {
            let mut means = BTreeMap::new();
            for metric in METRIC_COLUMNS {
                let values: Vec<f64> = members
                    .iter()
                    .filter_map(|r| metric_value(r, metric))
                    .collect();
                if !values.is_empty() {
                    means.insert(metric, values.iter().sum::<f64>() / values.len() as f64);
                }
            }
            (algorithm, generations, means)
        })
        .collect()
}
