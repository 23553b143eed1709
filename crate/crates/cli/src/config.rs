//! Experiment configuration: flat `key = value` files overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use hamdiet::engine::{Algorithm, AlgorithmConfig, TournamentMode};
use hamdiet::evaluation::PenaltyMode;
use hamdiet::instance::Cents;
use hamdiet::variation::VariationConfig;
use hamdiet::BinarizeMode;

/// Where the instance comes from and how it is assembled. Serialized into
/// every run record so a run can be rebuilt from its JSON alone.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub dataset: Option<PathBuf>,
    pub requirements: Option<PathBuf>,
    pub mapping: Option<PathBuf>,
    pub penalties: Option<PathBuf>,
    pub cost_seed: u64,
    pub cost_low: Cents,
    pub cost_high: Cents,
    pub horizon: usize,
    pub any_category: bool,
    pub drop_incomplete: bool,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            dataset: None,
            requirements: None,
            mapping: None,
            penalties: None,
            cost_seed: 0,
            cost_low: Cents(100),
            cost_high: Cents(1000),
            horizon: 7,
            any_category: false,
            drop_incomplete: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub algorithms: Vec<Algorithm>,
    pub generations: Vec<usize>,
    pub reps: usize,
    pub seed_base: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub population_size: usize,
    pub binarize: BinarizeMode,
    pub penalty_mode: PenaltyMode,
    pub tournament: TournamentMode,
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instance: InstanceSpec::default(),
            algorithms: vec![Algorithm::MoeaHd, Algorithm::Nsga2],
            generations: vec![30, 100, 300],
            reps: 30,
            seed_base: 0,
            jobs: None,
            out: PathBuf::from("results"),
            population_size: 30,
            binarize: BinarizeMode::Weekly,
            penalty_mode: PenaltyMode::Raw,
            tournament: TournamentMode::PerTournament,
            trace: false,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut config = Self::default();
        for (key, value) in
            parse_pairs(&text).with_context(|| format!("in config {}", path.display()))?
        {
            config
                .set(&key, &value, base)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        Ok(config)
    }

    /// Applies one setting. Path values are joined onto `base` when relative.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || base.join(value);
        match key {
            "algorithms" => self.algorithms = parse_list(value)?,
            "generations" => self.generations = parse_list(value)?,
            "reps" => self.reps = parse(key, value)?,
            "seed_base" => self.seed_base = parse(key, value)?,
            "jobs" => self.jobs = Some(parse(key, value)?),
            "out" => self.out = path(),
            "population_size" => self.population_size = parse(key, value)?,
            "binarize" => self.binarize = parse(key, value)?,
            "normalized_penalty" => {
                self.penalty_mode = if parse_bool(value)? {
                    PenaltyMode::Normalized
                } else {
                    PenaltyMode::Raw
                }
            }
            "tournament" => self.tournament = parse_tournament(value)?,
            "trace" => self.trace = parse_bool(value)?,
            _ => return self.instance.set(key, value, base),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            bail!("reps must be at least 1");
        }
        if self.generations.is_empty() || self.generations.contains(&0) {
            bail!("generations must list at least one positive setting");
        }
        if self.algorithms.is_empty() {
            bail!("no algorithms selected");
        }
        if self.jobs == Some(0) {
            bail!("jobs must be at least 1");
        }
        self.algorithm_config(self.algorithms[0], self.generations[0])
            .validate()?;
        Ok(())
    }

    pub fn algorithm_config(&self, algorithm: Algorithm, generations: usize) -> AlgorithmConfig {
        AlgorithmConfig {
            algorithm,
            population_size: self.population_size,
            max_generations: generations,
            variation: VariationConfig::default(),
            master_seed: self.seed_base,
            binarize: self.binarize,
            penalty_mode: self.penalty_mode,
            tournament: self.tournament,
            trace: self.trace,
        }
    }

    /// The resolved configuration in the file format [`ExperimentConfig::load`] reads.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self
            .instance
            .to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        let list = |items: Vec<String>| items.join(",");
        lines.push(format!(
            "algorithms = {}",
            list(self.algorithms.iter().map(|a| a.to_string()).collect())
        ));
        lines.push(format!(
            "generations = {}",
            list(self.generations.iter().map(|g| g.to_string()).collect())
        ));
        lines.push(format!("reps = {}", self.reps));
        lines.push(format!("seed_base = {}", self.seed_base));
        if let Some(jobs) = self.jobs {
            lines.push(format!("jobs = {jobs}"));
        }
        lines.push(format!("out = {}", self.out.display()));
        lines.push(format!("population_size = {}", self.population_size));
        lines.push(format!("binarize = {}", binarize_name(self.binarize)));
        lines.push(format!(
            "normalized_penalty = {}",
            self.penalty_mode == PenaltyMode::Normalized
        ));
        lines.push(format!("tournament = {}", tournament_name(self.tournament)));
        lines.push(format!("trace = {}", self.trace));
        lines.join("\n") + "\n"
    }
}

impl InstanceSpec {
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || Some(base.join(value));
        match key {
            "dataset" => self.dataset = path(),
            "requirements" => self.requirements = path(),
            "mapping" => self.mapping = path(),
            "penalties" => self.penalties = path(),
            "cost_seed" => self.cost_seed = parse(key, value)?,
            "cost_low" => self.cost_low = parse(key, value)?,
            "cost_high" => self.cost_high = parse(key, value)?,
            "horizon" => self.horizon = parse(key, value)?,
            "any_category" => self.any_category = parse_bool(value)?,
            "drop_incomplete" => self.drop_incomplete = parse_bool(value)?,
            other => bail!("unknown setting {other:?}"),
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let paths = [
            ("dataset", &self.dataset),
            ("requirements", &self.requirements),
            ("mapping", &self.mapping),
            ("penalties", &self.penalties),
        ];
        for (key, value) in paths {
            if let Some(p) = value {
                map.insert(key.to_string(), p.display().to_string());
            }
        }
        map.insert("cost_seed".into(), self.cost_seed.to_string());
        map.insert("cost_low".into(), self.cost_low.to_string());
        map.insert("cost_high".into(), self.cost_high.to_string());
        map.insert("horizon".into(), self.horizon.to_string());
        map.insert("any_category".into(), self.any_category.to_string());
        map.insert("drop_incomplete".into(), self.drop_incomplete.to_string());
        map
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let mut spec = Self::default();
        for (k, v) in pairs {
            spec.set(k, v, Path::new(""))?;
        }
        Ok(spec)
    }

    /// Makes every path absolute so the spec survives a change of directory.
    pub fn absolutize(&mut self) -> Result<()> {
        for p in [
            &mut self.dataset,
            &mut self.requirements,
            &mut self.mapping,
            &mut self.penalties,
        ]
        .into_iter()
        .flatten()
        {
            *p = std::path::absolute(&*p)
                .with_context(|| format!("cannot resolve {}", p.display()))?;
        }
        Ok(())
    }
}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got {raw:?}", n + 1))?;
        pairs.push((key.trim().replace('-', "_"), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse<T>(key: &str, value: &str) -> Result<T>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("invalid value {value:?} for {key}: {e}"))
}

pub fn parse_list<T>(value: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| anyhow!("invalid list entry {s:?}: {e}"))
        })
        .collect()
}

fn parse_bool(value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => bail!("expected true or false, got {other:?}"),
    }
}

pub fn parse_tournament(value: &str) -> Result<TournamentMode> {
    match value.to_ascii_lowercase().replace('_', "-").as_str() {
        "per-tournament" => Ok(TournamentMode::PerTournament),
        "wholesale" => Ok(TournamentMode::Wholesale),
        other => bail!("unknown tournament mode {other:?} (expected per-tournament or wholesale)"),
    }
}

fn binarize_name(mode: BinarizeMode) -> &'static str {
    match mode {
        BinarizeMode::Weekly => "weekly",
        BinarizeMode::PerDay => "per-day",
    }
}

fn tournament_name(mode: TournamentMode) -> &'static str {
    match mode {
        TournamentMode::PerTournament => "per-tournament",
        TournamentMode::Wholesale => "wholesale",
    }
}
