//! Command-line harness: experiment grids, permutation comparisons,
//! plot-data export and dataset checks.

pub mod config;
pub mod data;
pub mod experiment;
pub mod plots;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hamdiet::analytics::DEFAULT_PERMUTATIONS;

use config::ExperimentConfig;
use experiment::CompareRequest;
use plots::{Grouping, PlotMode};

#[derive(Debug, Parser)]
#[command(
    name = "hamdiet",
    version,
    about = "Weekly diet optimization with MOEA-HD and NSGA-II"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every (algorithm, generations) cell and write results plus metrics.csv.
    Run(RunArgs),
    /// Re-run a result file from its embedded configuration.
    Replay {
        run_file: PathBuf,
        /// Where to write the new result (default: print whether it matches).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Permutation test on one metric between two algorithms.
    Compare {
        metrics: PathBuf,
        #[arg(long, default_value = "hv")]
        metric: String,
        #[arg(long, default_value = "moea-hd")]
        a: String,
        #[arg(long, default_value = "nsga2")]
        b: String,
        /// Only rows with this generation setting.
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
        permutations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path (default: next to the metrics file).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot-ready CSV from result or report files.
    ExportPlots {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Solution index for the consumption modes.
        #[arg(long, default_value_t = 0)]
        solution: usize,
        #[arg(long, value_enum, default_value = "group")]
        by: ByArg,
        /// Output CSV (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load the inputs, build the instance and print a summary.
    ValidateData(InstanceArgs),
    /// Write a synthetic dataset and matching input files.
    SampleData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Divide every category count by this (1 gives 597 foods).
        #[arg(long, default_value_t = 1)]
        divisor: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Pareto,
    WeeklyConsumption,
    DailyDiet,
    PermHistogram,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ByArg {
    Group,
    Category,
}

#[derive(Debug, Clone, Default, Args)]
pub struct InstanceArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub requirements: Option<PathBuf>,
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long)]
    pub penalties: Option<PathBuf>,
    #[arg(long)]
    pub cost_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Comma-separated: moea-hd, nsga2.
    #[arg(long)]
    pub algorithms: Option<String>,
    /// Comma-separated generation settings.
    #[arg(long)]
    pub generations: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed_base: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub population_size: Option<usize>,
    /// weekly or per-day.
    #[arg(long)]
    pub binarize: Option<String>,
    /// per-tournament or wholesale.
    #[arg(long)]
    pub tournament: Option<String>,
    #[arg(long)]
    pub normalized_penalty: bool,
    #[arg(long)]
    pub trace: bool,
}

impl InstanceArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let here = Path::new("");
        let paths = [
            ("dataset", &self.dataset),
            ("requirements", &self.requirements),
            ("mapping", &self.mapping),
            ("penalties", &self.penalties),
        ];
        for (key, value) in paths {
            if let Some(p) = value {
                config.set(key, &p.to_string_lossy(), here)?;
            }
        }
        if let Some(seed) = self.cost_seed {
            config.instance.cost_seed = seed;
        }
        Ok(config)
    }
}

impl RunArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = self.instance.resolve()?;
        let here = Path::new("");
        let text = [
            ("algorithms", &self.algorithms),
            ("generations", &self.generations),
            ("binarize", &self.binarize),
            ("tournament", &self.tournament),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                config
                    .set(key, v, here)
                    .with_context(|| format!("--{key}"))?;
            }
        }
        if let Some(v) = self.reps {
            config.reps = v;
        }
        if let Some(v) = self.seed_base {
            config.seed_base = v;
        }
        if let Some(v) = self.jobs {
            config.jobs = Some(v);
        }
        if let Some(v) = &self.out {
            config.out = v.clone();
        }
        if let Some(v) = self.population_size {
            config.population_size = v;
        }
        if self.normalized_penalty {
            config.set("normalized_penalty", "true", here)?;
        }
        if self.trace {
            config.trace = true;
        }
        Ok(config)
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("cannot create {}", dir.display()))?;
            }
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Executes one command. Returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let rows = experiment::run_experiment(&config, |msg| eprintln!("running {msg}"))?;
            println!("wrote {} runs to {}", rows.len(), config.out.display());
            for (algorithm, generations, means) in experiment::summarize(&rows) {
                let fmt = |k: &str| means.get(k).map_or("-".to_string(), |v| format!("{v:.3}"));
                println!(
                    "{algorithm:>8} {generations:>5} gens: hv {} d_hmin {} d_hmed {} front {}",
                    fmt("hv"),
                    fmt("d_hmin"),
                    fmt("d_hmed"),
                    fmt("front_size")
                );
            }
            Ok(0)
        }
        Command::Replay { run_file, out } => {
            let (text, identical) = experiment::replay(&run_file)?;
            if let Some(path) = &out {
                write_or_print(Some(path), &text)?;
            }
            println!(
                "{}: replay {}",
                run_file.display(),
                if identical { "identical" } else { "DIFFERS" }
            );
            Ok(if identical { 0 } else { 1 })
        }
        Command::Compare {
            metrics,
            metric,
            a,
            b,
            generations,
            permutations,
            seed,
            out,
        } => {
            let request = CompareRequest {
                metrics,
                metric,
                group_a: a,
                group_b: b,
                generations,
                permutations,
                seed,
            };
            let report = experiment::compare(&request)?;
            let path = out.unwrap_or_else(|| experiment::default_compare_output(&request));
            write_or_print(Some(&path), &report.to_json()?)?;
            let r = &report.result;
            println!(
                "{}: {} mean {:.4} (n = {}), {} mean {:.4} (n = {}), diff {:.4}, p = {:.4}{}",
                report.metric,
                report.label_a,
                r.mean_a,
                report.n_a,
                report.label_b,
                r.mean_b,
                report.n_b,
                r.observed_diff,
                r.p_value,
                if r.significant_at_01 {
                    " (significant at 0.01)"
                } else {
                    ""
                }
            );
            println!("report: {}", path.display());
            Ok(0)
        }
        Command::ExportPlots {
            mode,
            files,
            solution,
            by,
            out,
        } => {
            let mode = match mode {
                ModeArg::Pareto => PlotMode::Pareto,
                ModeArg::WeeklyConsumption => PlotMode::WeeklyConsumption,
                ModeArg::DailyDiet => PlotMode::DailyDiet,
                ModeArg::PermHistogram => PlotMode::PermHistogram,
            };
            let grouping = match by {
                ByArg::Group => Grouping::PenaltyGroup,
                ByArg::Category => Grouping::Category,
            };
            let csv = plots::export(mode, &files, solution, grouping)?;
            write_or_print(out.as_deref(), &csv)?;
            Ok(0)
        }
        Command::ValidateData(args) => {
            let config = args.resolve()?;
            let instance = data::load_instance(&config.instance)?;
            let cap = hamdiet::variation::VariationConfig::default().cell_cap;
            print!("{}", data::validate_report(&instance, cap)?);
            Ok(0)
        }
        Command::SampleData { out, seed, divisor } => {
            data::write_sample_data(&out, seed, divisor)?;
            println!("wrote sample data to {}", out.display());
            Ok(0)
        }
    }
}
