//! Instance assembly from files, data validation and sample-data output.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hamdiet::instance::{
    assign_costs, build_instance, load_foods, map_categories, write_foods, CategoryMapping,
    DatasetFormat, NutrientRequirements, PenaltyGroup, PenaltySchedule, ProblemInstance,
};
use hamdiet::synthetic::{sample_requirements_text, synthetic_dataset_scaled};

use crate::config::InstanceSpec;

pub fn load_instance(spec: &InstanceSpec) -> Result<ProblemInstance> {
    let dataset = spec
        .dataset
        .as_ref()
        .context("no dataset given (use --dataset or `dataset =`)")?;
    let requirements_path = spec
        .requirements
        .as_ref()
        .context("no requirements file given (use --requirements or `requirements =`)")?;
    let format = DatasetFormat {
        known_categories_only: !spec.any_category,
        drop_incomplete: spec.drop_incomplete,
        ..DatasetFormat::default()
    };
    let foods = load_foods(dataset, &format)
        .with_context(|| format!("loading dataset {}", dataset.display()))?;
    let foods = assign_costs(foods, spec.cost_low, spec.cost_high, spec.cost_seed, false)?;
    let mapping = match &spec.mapping {
        Some(p) => {
            CategoryMapping::load(p).with_context(|| format!("loading mapping {}", p.display()))?
        }
        None => CategoryMapping::default(),
    };
    let foods = map_categories(foods, &mapping)?;
    let requirements = NutrientRequirements::load(requirements_path)
        .with_context(|| format!("loading requirements {}", requirements_path.display()))?;
    let penalties = match &spec.penalties {
        Some(p) => PenaltySchedule::load(p)
            .with_context(|| format!("loading penalties {}", p.display()))?,
        None => PenaltySchedule::default(),
    };
    Ok(
        build_instance(foods, requirements, penalties, Some(spec.horizon))?
            .with_cost_seed(spec.cost_seed),
    )
}

/// Human-readable instance summary. Fails when some requirement cannot be
/// met even with every food at the serving cap on the same day.
pub fn validate_report(instance: &ProblemInstance, cap: u8) -> Result<String> {
    instance.validate()?;
    let mut out = String::new();
    writeln!(out, "foods: {}", instance.num_foods())?;
    writeln!(out, "days: {}", instance.horizon())?;
    writeln!(out, "penalty groups:")?;
    for group in PenaltyGroup::ALL {
        let count = (0..instance.num_foods())
            .filter(|&i| instance.group(i) == group)
            .count();
        writeln!(out, "  {group}: {count}")?;
    }
    let costs: Vec<u32> = (0..instance.num_foods())
        .map(|i| instance.cost_cents(i))
        .collect();
    writeln!(
        out,
        "cost per serving: {:.2} to {:.2}",
        f64::from(*costs.iter().min().unwrap_or(&0)) / 100.0,
        f64::from(*costs.iter().max().unwrap_or(&0)) / 100.0
    )?;
    writeln!(out, "requirements:")?;
    let mut unreachable = Vec::new();
    for (j, (id, need)) in instance.requirements().entries().iter().enumerate() {
        let ceiling: f64 = (0..instance.num_foods())
            .map(|i| instance.nutrient(i, j))
            .sum::<f64>()
            * f64::from(cap);
        let suppliers = (0..instance.num_foods())
            .filter(|&i| instance.nutrient(i, j) > 0.0)
            .count();
        let unit = instance.requirements().unit(id).unwrap_or("");
        writeln!(
            out,
            "  {id}: {need} {unit} per day, {suppliers} supplying foods"
        )?;
        if ceiling < *need {
            unreachable.push(id.clone());
        }
    }
    if !unreachable.is_empty() {
        bail!(
            "{out}requirements cannot be met within the serving cap: {}",
            unreachable.join(", ")
        );
    }
    Ok(out)
}

/// Writes a synthetic dataset plus requirement, mapping, penalty and
/// experiment files into `dir`.
pub fn write_sample_data(dir: &Path, seed: u64, divisor: usize) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    };
    let foods_path = dir.join("foods.csv");
    let file = std::fs::File::create(&foods_path)
        .with_context(|| format!("cannot write {}", foods_path.display()))?;
    write_foods(file, &synthetic_dataset_scaled(seed, divisor))?;
    write("requirements.txt", sample_requirements_text())?;
    write(
        "mapping.txt",
        format!(
            "# dataset category = penalty group\n{}",
            CategoryMapping::default().to_text()
        ),
    )?;
    write(
        "penalties.txt",
        format!(
            "# group penalties p1-p8, day-offset penalties p9-p14\n{}",
            PenaltySchedule::default().to_text()
        ),
    )?;
    write(
        "experiment.conf",
        "# Paths are relative to this file. Unset keys take the defaults.\n\
         dataset = foods.csv\n\
         requirements = requirements.txt\n\
         mapping = mapping.txt\n\
         penalties = penalties.txt\n\
         cost_seed = 1\n\
         algorithms = moea-hd,nsga2\n\
         generations = 30\n\
         reps = 5\n\
         seed_base = 1000\n\
         out = results\n"
            .to_string(),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn sample_data_loads_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        write_sample_data(dir.path(), 3, 10).unwrap();
        let config = ExperimentConfig::load(&dir.path().join("experiment.conf")).unwrap();
        let instance = load_instance(&config.instance).unwrap();
        assert_eq!(instance.num_foods(), 57);
        assert_eq!(instance.cost_seed(), Some(1));
        let report = validate_report(&instance, 5).unwrap();
        assert!(report.contains("foods: 57"));
    }

    #[test]
    fn missing_dataset_is_named() {
        let spec = InstanceSpec {
            dataset: Some("/nowhere/foods.csv".into()),
            requirements: Some("/nowhere/req.txt".into()),
            ..InstanceSpec::default()
        };
        let err = format!("{:#}", load_instance(&spec).unwrap_err());
        assert!(err.contains("/nowhere/foods.csv"), "{err}");
    }
}
