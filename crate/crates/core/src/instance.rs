//! Food-composition ingestion and the immutable problem instance.
//!
//! Text formats handled here:
//!
//! * food CSV: header `name,category,<nutrient>...[,cost]`, one food per row;
//! * requirements: `nutrient_id = minimum daily amount`, with optional
//!   `# unit: nutrient_id = unit` annotations;
//! * category mapping: `dataset category = penalty group`;
//! * penalty schedule: `p1 = ...` through `p14 = ...`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of category penalty groups.
pub const NUM_GROUPS: usize = 8;
/// Number of days-before offsets that carry a penalty.
pub const NUM_OFFSETS: usize = 6;
pub const DEFAULT_HORIZON: usize = 7;
pub const DEFAULT_PROTEIN_COLUMN: &str = "protein_g";

/// Money stored as integer cents.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct Cents(pub u32);

impl Cents {
    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for Cents {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('$');
        let value: f64 = s
            .parse()
            .map_err(|_| format!("invalid money value {s:?}"))?;
        if !value.is_finite() || value < 0.0 {
            return Err(format!(
                "money value must be finite and non-negative, got {s:?}"
            ));
        }
        let cents = (value * 100.0).round();
        if cents > f64::from(u32::MAX) {
            return Err(format!("money value {s:?} out of range"));
        }
        Ok(Cents(cents as u32))
    }
}

/// The eight repetition-penalty groups, in schedule order (`p1`..`p8`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PenaltyGroup {
    Other,
    Meats,
    Cereals,
    Fruits,
    Dairy,
    Legumes,
    Seafood,
    Vegetables,
}

impl PenaltyGroup {
    pub const ALL: [PenaltyGroup; NUM_GROUPS] = [
        PenaltyGroup::Other,
        PenaltyGroup::Meats,
        PenaltyGroup::Cereals,
        PenaltyGroup::Fruits,
        PenaltyGroup::Dairy,
        PenaltyGroup::Legumes,
        PenaltyGroup::Seafood,
        PenaltyGroup::Vegetables,
    ];

    /// Zero-based position in the schedule (`p1` is index 0).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            PenaltyGroup::Other => "Other",
            PenaltyGroup::Meats => "Meats",
            PenaltyGroup::Cereals => "Cereals",
            PenaltyGroup::Fruits => "Fruits",
            PenaltyGroup::Dairy => "Dairy",
            PenaltyGroup::Legumes => "Legumes",
            PenaltyGroup::Seafood => "Seafood",
            PenaltyGroup::Vegetables => "Vegetables",
        }
    }
}

impl fmt::Display for PenaltyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PenaltyGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

/// The fifteen food-composition categories, their item counts in the full
/// table, and the default penalty group each maps to.
pub const DATASET_CATEGORIES: [(&str, usize, PenaltyGroup); 15] = [
    ("Cereals and derivatives", 63, PenaltyGroup::Cereals),
    (
        "Vegetables, greens, and derivatives",
        99,
        PenaltyGroup::Vegetables,
    ),
    ("Fruits and derivatives", 96, PenaltyGroup::Fruits),
    ("Fats and oils", 14, PenaltyGroup::Other),
    ("Fish and seafood", 50, PenaltyGroup::Seafood),
    ("Meats and meat products", 123, PenaltyGroup::Meats),
    ("Milk and dairy products", 24, PenaltyGroup::Dairy),
    (
        "Alcoholic and non-alcoholic beverages",
        14,
        PenaltyGroup::Other,
    ),
    ("Eggs and derivatives", 7, PenaltyGroup::Other),
    ("Sugary products", 20, PenaltyGroup::Other),
    ("Miscellaneous", 9, PenaltyGroup::Other),
    ("Other processed foods", 5, PenaltyGroup::Other),
    ("Prepared food", 32, PenaltyGroup::Other),
    ("Legumes and derivatives", 30, PenaltyGroup::Legumes),
    ("Nuts and seeds", 11, PenaltyGroup::Other),
];

/// Canonical spelling of a dataset category, matched case-insensitively.
pub fn canonical_category(text: &str) -> Option<&'static str> {
    let text = text.trim();
    DATASET_CATEGORIES
        .iter()
        .map(|(name, _, _)| *name)
        .find(|name| name.eq_ignore_ascii_case(text))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoodItem {
    /// 1-based position in the dataset.
    pub id: usize,
    pub name: String,
    pub category: String,
    pub penalty_group: Option<PenaltyGroup>,
    /// Amount per serving, keyed by nutrient id.
    pub nutrients: BTreeMap<String, f64>,
    /// Protein per serving in grams (mirrors the protein nutrient entry).
    pub protein: f64,
    /// Cost per serving; `None` until read from file or assigned.
    pub cost: Option<Cents>,
}

impl FoodItem {
    pub fn cost_or_zero(&self) -> Cents {
        self.cost.unwrap_or_default()
    }

    pub fn nutrient(&self, id: &str) -> f64 {
        self.nutrients.get(id).copied().unwrap_or(0.0)
    }
}

/// How a food CSV is interpreted.
#[derive(Debug, Clone)]
pub struct DatasetFormat {
    /// Nutrient column holding protein grams per serving.
    pub protein_column: String,
    /// When true, category text must be one of [`DATASET_CATEGORIES`].
    pub known_categories_only: bool,
    /// Drop rows with an empty nutrient cell instead of zero-filling them.
    pub drop_incomplete: bool,
}

impl Default for DatasetFormat {
    fn default() -> Self {
        Self {
            protein_column: DEFAULT_PROTEIN_COLUMN.to_string(),
            known_categories_only: true,
            drop_incomplete: false,
        }
    }
}

impl DatasetFormat {
    /// Accept any category text; useful for custom datasets.
    pub fn any_category() -> Self {
        Self {
            known_categories_only: false,
            ..Self::default()
        }
    }
}

pub fn load_foods(path: impl AsRef<Path>, format: &DatasetFormat) -> Result<Vec<FoodItem>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_foods(file, format)
}

/// Parses a food CSV. Row numbers in errors count data rows from 1.
pub fn read_foods<R: Read>(reader: R, format: &DatasetFormat) -> Result<Vec<FoodItem>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyDataset);
    }
    if headers.len() < 3 {
        return Err(Error::Parse {
            row: 0,
            message: "header needs name, category and at least one nutrient column".into(),
        });
    }
    if !headers[0].eq_ignore_ascii_case("name") || !headers[1].eq_ignore_ascii_case("category") {
        return Err(Error::Parse {
            row: 0,
            message: "header must start with `name,category`".into(),
        });
    }
    let has_cost = headers[headers.len() - 1].eq_ignore_ascii_case("cost");
    let nutrient_end = if has_cost {
        headers.len() - 1
    } else {
        headers.len()
    };
    let nutrient_ids: Vec<String> = headers
        .iter()
        .take(nutrient_end)
        .skip(2)
        .map(str::to_string)
        .collect();
    if nutrient_ids.is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: "no nutrient columns".into(),
        });
    }
    let mut seen = BTreeSet::new();
    for id in &nutrient_ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Parse {
                row: 0,
                message: format!("duplicate nutrient column {id:?}"),
            });
        }
    }

    let mut items = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} columns, found {}", headers.len(), record.len()),
            });
        }
        let name = record[0].to_string();
        let category = if format.known_categories_only {
            canonical_category(&record[1])
                .ok_or_else(|| Error::UnknownCategory(record[1].to_string()))?
                .to_string()
        } else {
            record[1].to_string()
        };

        let mut nutrients = BTreeMap::new();
        let mut incomplete = false;
        for (col, id) in nutrient_ids.iter().enumerate() {
            let cell = &record[col + 2];
            let amount = if cell.is_empty() {
                incomplete = true;
                0.0
            } else {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    message: format!("non-numeric value {cell:?} in column {id:?}"),
                })?
            };
            if !amount.is_finite() || amount < 0.0 {
                return Err(Error::Parse {
                    row,
                    message: format!(
                        "nutrient {id:?} must be finite and non-negative, got {cell:?}"
                    ),
                });
            }
            nutrients.insert(id.clone(), amount);
        }
        if incomplete && format.drop_incomplete {
            continue;
        }

        let cost = if has_cost {
            let cell = &record[headers.len() - 1];
            if cell.is_empty() {
                None
            } else {
                Some(
                    cell.parse::<Cents>()
                        .map_err(|message| Error::Parse { row, message })?,
                )
            }
        } else {
            None
        };

        let protein = nutrients
            .get(&format.protein_column)
            .copied()
            .unwrap_or(0.0);
        items.push(FoodItem {
            id: items.len() + 1,
            name,
            category,
            penalty_group: None,
            nutrients,
            protein,
            cost,
        });
    }

    if items.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(items)
}

/// Writes foods in the CSV layout accepted by [`read_foods`]. The cost column
/// is emitted when any item carries a cost.
pub fn write_foods<W: Write>(writer: W, items: &[FoodItem]) -> Result<()> {
    let nutrient_ids: BTreeSet<&str> = items
        .iter()
        .flat_map(|item| item.nutrients.keys().map(String::as_str))
        .collect();
    let has_cost = items.iter().any(|item| item.cost.is_some());

    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = vec!["name", "category"];
    header.extend(nutrient_ids.iter().copied());
    if has_cost {
        header.push("cost");
    }
    csv.write_record(&header).map_err(csv_write_error)?;

    for item in items {
        let mut record: Vec<String> = vec![item.name.clone(), item.category.clone()];
        record.extend(
            nutrient_ids
                .iter()
                .map(|id| format!("{}", item.nutrient(id))),
        );
        if has_cost {
            record.push(item.cost.map(|c| c.to_string()).unwrap_or_default());
        }
        csv.write_record(&record).map_err(csv_write_error)?;
    }
    csv.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

fn csv_write_error(e: csv::Error) -> Error {
    Error::io("<writer>", std::io::Error::other(e.to_string()))
}

/// Draws each cost uniformly from the whole-cent grid on `[low, high]`.
/// Costs already present are kept unless `overwrite` is set.
pub fn assign_costs(
    items: Vec<FoodItem>,
    low: Cents,
    high: Cents,
    seed: u64,
    overwrite: bool,
) -> Result<Vec<FoodItem>> {
    if low >= high {
        return Err(Error::param(format!(
            "cost range requires low < high, got [{low}, {high}]"
        )));
    }
    if items.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(items
        .into_iter()
        .map(|mut item| {
            // Always draw so that an item's cost does not depend on whether
            // earlier items had file costs.
            let drawn = Cents(rng.gen_range(low.0..=high.0));
            if item.cost.is_none() || overwrite {
                item.cost = Some(drawn);
            }
            item
        })
        .collect())
}

/// Dataset category to penalty group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryMapping {
    entries: BTreeMap<String, PenaltyGroup>,
}

impl Default for CategoryMapping {
    fn default() -> Self {
        Self {
            entries: DATASET_CATEGORIES
                .iter()
                .map(|(name, _, group)| (name.to_lowercase(), *group))
                .collect(),
        }
    }
}

impl CategoryMapping {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, category: &str, group: PenaltyGroup) {
        self.entries.insert(category.trim().to_lowercase(), group);
    }

    pub fn get(&self, category: &str) -> Option<PenaltyGroup> {
        self.entries.get(&category.trim().to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut mapping = Self::new();
        for (row, key, value) in key_value_lines(text)? {
            let group = value.parse::<PenaltyGroup>().map_err(|_| Error::Parse {
                row,
                message: format!("unknown penalty group {value:?}"),
            })?;
            mapping.insert(key, group);
        }
        Ok(mapping)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    pub fn to_text(&self) -> String {
        // Keys are stored lowercased; emit the canonical spelling when known.
        self.entries
            .iter()
            .map(|(key, group)| {
                let name = canonical_category(key)
                    .map(str::to_string)
                    .unwrap_or_else(|| key.clone());
                format!("{name} = {group}\n")
            })
            .collect()
    }
}

pub fn map_categories(items: Vec<FoodItem>, mapping: &CategoryMapping) -> Result<Vec<FoodItem>> {
    let missing: BTreeSet<&str> = items
        .iter()
        .filter(|item| mapping.get(&item.category).is_none())
        .map(|item| item.category.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::UnmappedCategories(
            missing.into_iter().map(str::to_string).collect(),
        ));
    }
    Ok(items
        .into_iter()
        .map(|mut item| {
            item.penalty_group = mapping.get(&item.category);
            item
        })
        .collect())
}

/// Repetition penalties: one per group and one per days-before offset (1..=6).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySchedule {
    pub group: [f64; NUM_GROUPS],
    pub offset: [f64; NUM_OFFSETS],
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        Self {
            group: [0.1, 3.0, 0.3, 0.1, 0.3, 0.3, 0.5, 0.1],
            offset: [3.0, 2.5, 1.8, 1.0, 0.2, 0.1],
        }
    }
}

impl PenaltySchedule {
    pub fn group_penalty(&self, group: PenaltyGroup) -> f64 {
        self.group[group.index()]
    }

    /// Penalty for a repetition `days_before` days earlier; zero past the table.
    pub fn offset_penalty(&self, days_before: usize) -> f64 {
        match days_before {
            1..=NUM_OFFSETS => self.offset[days_before - 1],
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .group
            .iter()
            .chain(self.offset.iter())
            .any(|p| !p.is_finite() || *p < 0.0)
        {
            return Err(Error::param("penalties must be finite and non-negative"));
        }
        Ok(())
    }

    /// Parses `pN = value` lines over the defaults; unspecified keys keep
    /// their default value.
    pub fn parse(text: &str) -> Result<Self> {
        let mut schedule = Self::default();
        for (row, key, value) in key_value_lines(text)? {
            let index = key
                .strip_prefix('p')
                .or_else(|| key.strip_prefix('P'))
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|n| (1..=NUM_GROUPS + NUM_OFFSETS).contains(n))
                .ok_or_else(|| Error::Parse {
                    row,
                    message: format!("unknown penalty key {key:?}"),
                })?;
            let value: f64 = value.parse().map_err(|_| Error::Parse {
                row,
                message: format!("non-numeric penalty {value:?}"),
            })?;
            if index <= NUM_GROUPS {
                schedule.group[index - 1] = value;
            } else {
                schedule.offset[index - NUM_GROUPS - 1] = value;
            }
        }
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    /// All fourteen values in the format [`PenaltySchedule::parse`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (g, value) in PenaltyGroup::ALL.iter().zip(self.group) {
            out.push_str(&format!("p{} = {value}  # {g}\n", g.index() + 1));
        }
        for (k, value) in self.offset.iter().enumerate() {
            let days = if k == 0 { "day" } else { "days" };
            out.push_str(&format!(
                "p{} = {value}  # repeated {} {days} before\n",
                NUM_GROUPS + k + 1,
                k + 1
            ));
        }
        out
    }
}

/// Minimum daily amount per nutrient, in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NutrientRequirements {
    entries: Vec<(String, f64)>,
    units: BTreeMap<String, String>,
}

impl NutrientRequirements {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (id, value) in &entries {
            if !seen.insert(id.as_str()) {
                return Err(Error::Inconsistent(format!("duplicate requirement {id:?}")));
            }
            if !value.is_finite() || *value <= 0.0 {
                return Err(Error::Inconsistent(format!(
                    "requirement {id:?} must be positive, got {value}"
                )));
            }
        }
        if entries.is_empty() {
            return Err(Error::Inconsistent("no nutrient requirements".into()));
        }
        Ok(Self {
            entries,
            units: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.entries.iter().find(|(k, _)| k == id).map(|(_, v)| *v)
    }

    pub fn unit(&self, id: &str) -> Option<&str> {
        self.units.get(id).map(String::as_str)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut units = BTreeMap::new();
        for line in text.lines() {
            if let Some(rest) = line.trim().strip_prefix('#') {
                if let Some(unit) = rest.trim().strip_prefix("unit:") {
                    if let Some((id, u)) = unit.split_once('=') {
                        units.insert(id.trim().to_string(), u.trim().to_string());
                    }
                }
            }
        }
        let mut entries = Vec::new();
        for (row, key, value) in key_value_lines(text)? {
            let amount: f64 = value.parse().map_err(|_| Error::Parse {
                row,
                message: format!("non-numeric requirement {value:?}"),
            })?;
            entries.push((key.to_string(), amount));
        }
        let mut req = Self::new(entries)?;
        req.units = units;
        Ok(req)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }
}

/// Immutable problem data with dense per-item lookup tables.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    foods: Vec<FoodItem>,
    requirements: NutrientRequirements,
    penalties: PenaltySchedule,
    horizon: usize,
    cost_seed: Option<u64>,
    cost_cents: Vec<u32>,
    protein: Vec<f64>,
    groups: Vec<PenaltyGroup>,
    /// Row-major n × m nutrient amounts aligned with `requirements`.
    nutrient_table: Vec<f64>,
}

pub fn build_instance(
    foods: Vec<FoodItem>,
    requirements: NutrientRequirements,
    penalties: PenaltySchedule,
    horizon: Option<usize>,
) -> Result<ProblemInstance> {
    let horizon = horizon.unwrap_or(DEFAULT_HORIZON);
    if horizon == 0 {
        return Err(Error::param("horizon must be at least 1 day"));
    }
    if foods.is_empty() {
        return Err(Error::EmptyDataset);
    }
    penalties.validate()?;
    for (i, food) in foods.iter().enumerate() {
        if food.id != i + 1 {
            return Err(Error::Inconsistent(format!(
                "food ids must be 1..n without gaps; position {} has id {}",
                i + 1,
                food.id
            )));
        }
        if food.penalty_group.is_none() {
            return Err(Error::Inconsistent(format!(
                "food {} ({:?}) has no penalty group",
                food.id, food.name
            )));
        }
        if food
            .nutrients
            .values()
            .chain(std::iter::once(&food.protein))
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::Inconsistent(format!(
                "food {} has a negative or non-finite amount",
                food.id
            )));
        }
    }
    for id in requirements.ids() {
        if !foods.iter().any(|f| f.nutrients.contains_key(id)) {
            return Err(Error::Inconsistent(format!(
                "requirement {id:?} is not supplied by any food"
            )));
        }
    }

    let m = requirements.len();
    let mut nutrient_table = Vec::with_capacity(foods.len() * m);
    for food in &foods {
        nutrient_table.extend(requirements.ids().map(|id| food.nutrient(id)));
    }
    Ok(ProblemInstance {
        cost_cents: foods.iter().map(|f| f.cost_or_zero().0).collect(),
        protein: foods.iter().map(|f| f.protein).collect(),
        groups: foods
            .iter()
            .map(|f| f.penalty_group.expect("checked above"))
            .collect(),
        nutrient_table,
        foods,
        requirements,
        penalties,
        horizon,
        cost_seed: None,
    })
}

impl ProblemInstance {
    pub fn with_cost_seed(mut self, seed: u64) -> Self {
        self.cost_seed = Some(seed);
        self
    }

    pub fn num_foods(&self) -> usize {
        self.foods.len()
    }

    pub fn num_nutrients(&self) -> usize {
        self.requirements.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn cost_seed(&self) -> Option<u64> {
        self.cost_seed
    }

    pub fn foods(&self) -> &[FoodItem] {
        &self.foods
    }

    pub fn requirements(&self) -> &NutrientRequirements {
        &self.requirements
    }

    pub fn penalties(&self) -> &PenaltySchedule {
        &self.penalties
    }

    /// Cost of one serving of item `i` (0-based), in cents.
    #[inline]
    pub fn cost_cents(&self, i: usize) -> u32 {
        self.cost_cents[i]
    }

    #[inline]
    pub fn protein(&self, i: usize) -> f64 {
        self.protein[i]
    }

    #[inline]
    pub fn group(&self, i: usize) -> PenaltyGroup {
        self.groups[i]
    }

    /// Amount of nutrient `j` in one serving of item `i` (both 0-based).
    #[inline]
    pub fn nutrient(&self, i: usize, j: usize) -> f64 {
        self.nutrient_table[i * self.requirements.len() + j]
    }

    /// Nutrient amounts of item `i` aligned with the requirement order.
    #[inline]
    pub fn nutrient_row(&self, i: usize) -> &[f64] {
        let m = self.requirements.len();
        &self.nutrient_table[i * m..(i + 1) * m]
    }

    pub fn requirement(&self, j: usize) -> f64 {
        self.requirements.entries[j].1
    }

    /// Re-checks every invariant of the instance and its parts.
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.foods.is_empty() {
            return Err(Error::Inconsistent("empty instance".into()));
        }
        self.penalties.validate()?;
        for (i, food) in self.foods.iter().enumerate() {
            if food.id != i + 1 {
                return Err(Error::Inconsistent(format!("bad id at position {}", i + 1)));
            }
            if food.penalty_group != Some(self.groups[i])
                || food.cost_or_zero().0 != self.cost_cents[i]
            {
                return Err(Error::Inconsistent(format!(
                    "cached data out of sync for food {}",
                    food.id
                )));
            }
            if let Some(&p) = food.nutrients.get(DEFAULT_PROTEIN_COLUMN) {
                if p != food.protein {
                    return Err(Error::Inconsistent(format!(
                        "protein mismatch for food {}",
                        food.id
                    )));
                }
            }
        }
        if self
            .nutrient_table
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::Inconsistent("negative nutrient amount".into()));
        }
        if self.requirements.entries.iter().any(|(_, r)| *r <= 0.0) {
            return Err(Error::Inconsistent("non-positive requirement".into()));
        }
        Ok(())
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `key = value` lines, skipping blanks and `#` comments. Yields 1-based line
/// numbers.
pub(crate) fn key_value_lines(text: &str) -> Result<Vec<(usize, &str, &str)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        // `#` starts a comment anywhere on the line.
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            row: i + 1,
            message: format!("expected `key = value`, got {line:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse {
                row: i + 1,
                message: "empty key".into(),
            });
        }
        out.push((i + 1, key, value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_schedule_text_round_trip() {
        let mut p = PenaltySchedule::default();
        p.offset[5] = 0.25;
        assert_eq!(PenaltySchedule::parse(&p.to_text()).unwrap(), p);
    }

    const SAMPLE: &str = "name,category,protein_g,calcium_mg,cost\n\
        Rice,Cereals and derivatives,2.5,4,1.20\n\
        Beef,Meats and meat products,26,12,7.80\n";

    fn parse(text: &str) -> Result<Vec<FoodItem>> {
        read_foods(text.as_bytes(), &DatasetFormat::default())
    }

    #[test]
    fn two_row_sample() {
        let items = parse(SAMPLE).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].id, 1);
        assert_eq!(items[1].id, 2);
        assert_eq!(items[1].nutrient("calcium_mg"), 12.0);
        assert_eq!(items[1].protein, 26.0);
        assert_eq!(items[0].cost, Some(Cents(120)));
    }

    #[test]
    fn non_numeric_cell_reports_row() {
        let text = "name,category,protein_g\n\
            A,Fruits and derivatives,1\n\
            B,Fruits and derivatives,2\n\
            C,Fruits and derivatives,abc\n";
        match parse(text) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_column_count() {
        let text = "name,category,protein_g\nA,Fruits and derivatives,1,9\n";
        assert!(matches!(parse(text), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn unknown_category_and_empty_file() {
        let text = "name,category,protein_g\nA,Snacks,1\n";
        match parse(text) {
            Err(Error::UnknownCategory(c)) => assert_eq!(c, "Snacks"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(""), Err(Error::EmptyDataset)));
        assert!(matches!(
            parse("name,category,protein_g\n"),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn missing_cost_column_leaves_cost_unset() {
        let text = "name,category,protein_g\nA,Fruits and derivatives,1\n";
        let items = parse(text).unwrap();
        assert_eq!(items[0].cost, None);
        assert_eq!(items[0].cost_or_zero(), Cents(0));
    }

    #[test]
    fn empty_nutrient_cells() {
        let text = "name,category,protein_g,iron_mg\nA,Fruits and derivatives,1,\nB,Fruits and derivatives,2,3\n";
        let kept = parse(text).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].nutrient("iron_mg"), 0.0);
        let format = DatasetFormat {
            drop_incomplete: true,
            ..DatasetFormat::default()
        };
        let dropped = read_foods(text.as_bytes(), &format).unwrap();
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].id, 1);
        assert_eq!(dropped[0].name, "B");
    }

    #[test]
    fn category_matching_is_case_insensitive() {
        let text = "name,category,protein_g\nShrimp,fish and Seafood,20\n";
        assert_eq!(parse(text).unwrap()[0].category, "Fish and seafood");
    }

    #[test]
    fn seeded_costs_are_reproducible() {
        let items = parse(SAMPLE).unwrap();
        let a = assign_costs(items.clone(), Cents(100), Cents(1000), 42, true).unwrap();
        let b = assign_costs(items.clone(), Cents(100), Cents(1000), 42, true).unwrap();
        assert_eq!(a, b);
        for item in &a {
            let c = item.cost.unwrap();
            assert!(c >= Cents(100) && c <= Cents(1000));
        }
    }

    #[test]
    fn narrow_cost_range() {
        let items: Vec<FoodItem> = (0..50)
            .map(|i| FoodItem {
                id: i + 1,
                name: format!("f{i}"),
                category: "Fruits and derivatives".into(),
                penalty_group: None,
                nutrients: BTreeMap::new(),
                protein: 0.0,
                cost: None,
            })
            .collect();
        let out = assign_costs(items, Cents(500), Cents(501), 7, false).unwrap();
        assert!(out
            .iter()
            .all(|f| matches!(f.cost, Some(Cents(500)) | Some(Cents(501)))));
    }

    #[test]
    fn file_costs_survive_without_overwrite() {
        let items = parse(SAMPLE).unwrap();
        let kept = assign_costs(items.clone(), Cents(100), Cents(1000), 1, false).unwrap();
        assert_eq!(kept[0].cost, Some(Cents(120)));
        assert_eq!(kept[1].cost, Some(Cents(780)));
        let replaced = assign_costs(items, Cents(100), Cents(1000), 1, true).unwrap();
        assert_ne!(
            (replaced[0].cost, replaced[1].cost),
            (Some(Cents(120)), Some(Cents(780)))
        );
    }

    #[test]
    fn bad_cost_range() {
        let items = parse(SAMPLE).unwrap();
        assert!(matches!(
            assign_costs(items.clone(), Cents(500), Cents(500), 1, true),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            assign_costs(items, Cents(900), Cents(100), 1, true),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn default_mapping_lookup() {
        let items = parse(SAMPLE).unwrap();
        let mapped = map_categories(items, &CategoryMapping::default()).unwrap();
        assert_eq!(mapped[1].penalty_group, Some(PenaltyGroup::Meats));
        assert_eq!(mapped[0].penalty_group, Some(PenaltyGroup::Cereals));
    }

    #[test]
    fn unmapped_category_is_named() {
        let text = "name,category,protein_g\nChips,Snacks,3\nApple,Fruits and derivatives,0.3\n";
        let items = read_foods(text.as_bytes(), &DatasetFormat::any_category()).unwrap();
        match map_categories(items, &CategoryMapping::default()) {
            Err(Error::UnmappedCategories(c)) => assert_eq!(c, vec!["Snacks".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mapping_file_round_trip() {
        let text = CategoryMapping::default().to_text();
        assert_eq!(
            CategoryMapping::parse(&text).unwrap(),
            CategoryMapping::default()
        );
        assert!(CategoryMapping::parse("Cereals and derivatives = Grains").is_err());
    }

    #[test]
    fn penalty_file_defaults_and_overrides() {
        let defaults = PenaltySchedule::default();
        assert_eq!(defaults.group_penalty(PenaltyGroup::Meats), 3.0);
        assert_eq!(defaults.offset_penalty(1), 3.0);
        assert_eq!(defaults.offset_penalty(2), 2.5);
        assert_eq!(defaults.offset_penalty(6), 0.1);
        assert_eq!(defaults.offset_penalty(7), 0.0);
        assert_eq!(defaults.offset_penalty(0), 0.0);

        let parsed = PenaltySchedule::parse("# override\np2 = 4\np14 = 0.05\n").unwrap();
        assert_eq!(parsed.group[1], 4.0);
        assert_eq!(parsed.offset[5], 0.05);
        assert_eq!(parsed.group[0], 0.1);
        assert!(PenaltySchedule::parse("p15 = 1").is_err());
        assert!(PenaltySchedule::parse("p1 = -1").is_err());
    }

    #[test]
    fn requirements_file() {
        let req = NutrientRequirements::parse(
            "# unit: protein_g = g\n# unit: calcium_mg = mg\nprotein_g = 50\ncalcium_mg = 1000\n",
        )
        .unwrap();
        assert_eq!(req.len(), 2);
        assert_eq!(req.get("calcium_mg"), Some(1000.0));
        assert_eq!(req.unit("protein_g"), Some("g"));
        assert!(NutrientRequirements::parse("protein_g = 0").is_err());
        assert!(NutrientRequirements::parse("protein_g = x").is_err());
    }

    fn mapped_sample() -> Vec<FoodItem> {
        map_categories(parse(SAMPLE).unwrap(), &CategoryMapping::default()).unwrap()
    }

    #[test]
    fn build_defaults_to_seven_days() {
        let req = NutrientRequirements::parse("protein_g = 50\ncalcium_mg = 1000").unwrap();
        let inst = build_instance(mapped_sample(), req, PenaltySchedule::default(), None).unwrap();
        assert_eq!(inst.horizon(), 7);
        assert_eq!(inst.num_foods(), 2);
        assert_eq!(inst.num_nutrients(), 2);
        assert_eq!(inst.nutrient(1, 0), 26.0);
        assert_eq!(inst.cost_cents(1), 780);
        inst.validate().unwrap();
    }

    #[test]
    fn requirement_without_supplier() {
        let req = NutrientRequirements::parse("protein_g = 50\nvitamin_x = 3").unwrap();
        assert!(matches!(
            build_instance(mapped_sample(), req, PenaltySchedule::default(), None),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn build_rejects_bad_ids_and_unmapped_items() {
        let req = NutrientRequirements::parse("protein_g = 50").unwrap();
        let mut foods = mapped_sample();
        foods[1].id = 5;
        assert!(build_instance(foods, req.clone(), PenaltySchedule::default(), None).is_err());
        let unmapped = parse(SAMPLE).unwrap();
        assert!(build_instance(unmapped, req.clone(), PenaltySchedule::default(), None).is_err());
        assert!(build_instance(mapped_sample(), req, PenaltySchedule::default(), Some(0)).is_err());
    }

    #[test]
    fn money_formatting() {
        assert_eq!(Cents(250).to_string(), "2.50");
        assert_eq!("2.5".parse::<Cents>().unwrap(), Cents(250));
        assert_eq!("$10.00".parse::<Cents>().unwrap(), Cents(1000));
        assert!("-1".parse::<Cents>().is_err());
    }

    #[test]
    fn category_table_totals() {
        let total: usize = DATASET_CATEGORIES.iter().map(|(_, n, _)| n).sum();
        assert_eq!(total, 597);
        let groups: BTreeSet<PenaltyGroup> =
            DATASET_CATEGORIES.iter().map(|(_, _, g)| *g).collect();
        assert_eq!(groups.len(), NUM_GROUPS);
    }
}
