use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

/// Servings of each item on each day, stored row-major: item `i`'s week is
/// the contiguous slice `[i * horizon, (i + 1) * horizon)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DietGenome {
    items: usize,
    horizon: usize,
    cells: Vec<u8>,
}

impl DietGenome {
    pub fn zeros(items: usize, horizon: usize) -> Self {
        Self {
            items,
            horizon,
            cells: vec![0; items * horizon],
        }
    }

    pub fn for_instance(instance: &ProblemInstance) -> Self {
        Self::zeros(instance.num_foods(), instance.horizon())
    }

    pub fn from_cells(items: usize, horizon: usize, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != items * horizon {
            return Err(Error::Dimension {
                expected: items * horizon,
                actual: cells.len(),
            });
        }
        Ok(Self {
            items,
            horizon,
            cells,
        })
    }

    /// Builds a genome from sparse `(item, day, servings)` triples (0-based).
    pub fn from_triples(
        items: usize,
        horizon: usize,
        triples: &[(usize, usize, u8)],
    ) -> Result<Self> {
        let mut genome = Self::zeros(items, horizon);
        for &(i, d, s) in triples {
            if i >= items {
                return Err(Error::Dimension {
                    expected: items,
                    actual: i + 1,
                });
            }
            if d >= horizon {
                return Err(Error::Dimension {
                    expected: horizon,
                    actual: d + 1,
                });
            }
            genome.set(i, d, s);
        }
        Ok(genome)
    }

    /// Non-zero cells as `(item, day, servings)`, 0-based, row-major order.
    pub fn triples(&self) -> Vec<(usize, usize, u8)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(idx, &s)| (idx / self.horizon, idx % self.horizon, s))
            .collect()
    }

    #[inline]
    pub fn items(&self) -> usize {
        self.items
    }

    #[inline]
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    pub fn get(&self, item: usize, day: usize) -> u8 {
        self.cells[item * self.horizon + day]
    }

    #[inline]
    pub fn set(&mut self, item: usize, day: usize, servings: u8) {
        self.cells[item * self.horizon + day] = servings;
    }

    /// One item's servings across the horizon.
    #[inline]
    pub fn week(&self, item: usize) -> &[u8] {
        &self.cells[item * self.horizon..(item + 1) * self.horizon]
    }

    #[inline]
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn max_cell(&self) -> u8 {
        self.cells.iter().copied().max().unwrap_or(0)
    }

    pub fn is_empty_diet(&self) -> bool {
        self.cells.iter().all(|&s| s == 0)
    }

    pub fn check_dimensions(&self, instance: &ProblemInstance) -> Result<()> {
        if self.items != instance.num_foods() {
            return Err(Error::Dimension {
                expected: instance.num_foods(),
                actual: self.items,
            });
        }
        if self.horizon != instance.horizon() {
            return Err(Error::Dimension {
                expected: instance.horizon(),
                actual: self.horizon,
            });
        }
        Ok(())
    }

    /// Dimensions match the instance and no cell exceeds `cap`.
    pub fn validate(&self, instance: &ProblemInstance, cap: u8) -> Result<()> {
        self.check_dimensions(instance)?;
        if let Some(bad) = self.cells.iter().position(|&s| s > cap) {
            return Err(Error::param(format!(
                "cell ({}, {}) holds {} servings, above the cap of {cap}",
                bad / self.horizon,
                bad % self.horizon,
                self.cells[bad]
            )));
        }
        Ok(())
    }
}
