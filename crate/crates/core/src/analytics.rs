//! Front quality metrics and the permutation test used to compare algorithms.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diversity::{binarize_with, hamming, BinarizeMode, PresenceVector};
use crate::error::{Error, Result};
use crate::evaluation::{EvaluatedSolution, ObjectiveVector};
use crate::ranking::dominates_slice;

pub const SIGNIFICANCE_LEVEL: f64 = 0.01;
pub const DEFAULT_PERMUTATIONS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsSource {
    PerComparisonUnion,
    Explicit,
}

/// Per-objective minima and maxima used to map objectives onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub ideal: [f64; 3],
    pub nadir: [f64; 3],
    pub source: BoundsSource,
}

impl NormalizationBounds {
    pub fn explicit(ideal: [f64; 3], nadir: [f64; 3]) -> Result<Self> {
        if ideal
            .iter()
            .zip(&nadir)
            .any(|(lo, hi)| lo.partial_cmp(hi).is_none_or(std::cmp::Ordering::is_gt))
        {
            return Err(Error::param("ideal must not exceed nadir in any objective"));
        }
        Ok(Self {
            ideal,
            nadir,
            source: BoundsSource::Explicit,
        })
    }

    /// Components where ideal and nadir coincide.
    pub fn degenerate(&self) -> [bool; 3] {
        [0, 1, 2].map(|m| self.ideal[m] == self.nadir[m])
    }

    /// Maps a vector into normalized space. Degenerate components map to 0.
    pub fn normalize(&self, v: &ObjectiveVector) -> [f64; 3] {
        let raw = v.as_array();
        [0, 1, 2].map(|m| {
            let range = self.nadir[m] - self.ideal[m];
            if range > 0.0 {
                (raw[m] - self.ideal[m]) / range
            } else {
                0.0
            }
        })
    }
}

/// Ideal and nadir over the union of all given fronts.
pub fn compute_bounds<F: AsRef<[ObjectiveVector]>>(fronts: &[F]) -> Result<NormalizationBounds> {
    let mut ideal = [f64::INFINITY; 3];
    let mut nadir = [f64::NEG_INFINITY; 3];
    let mut any = false;
    for v in fronts.iter().flat_map(|f| f.as_ref().iter()) {
        any = true;
        for (m, x) in v.as_array().into_iter().enumerate() {
            ideal[m] = ideal[m].min(x);
            nadir[m] = nadir[m].max(x);
        }
    }
    if !any {
        return Err(Error::param("cannot compute bounds of empty fronts"));
    }
    Ok(NormalizationBounds {
        ideal,
        nadir,
        source: BoundsSource::PerComparisonUnion,
    })
}

/// Normalized hypervolume of `front` against the reference point `(1, 1, 1)`.
pub fn hypervolume(front: &[ObjectiveVector], bounds: &NormalizationBounds) -> f64 {
    hypervolume_with_reference(front, bounds, 1.0)
}

/// As [`hypervolume`] with every reference coordinate set to `reference`
/// (for example 1.1 to credit boundary points).
pub fn hypervolume_with_reference(
    front: &[ObjectiveVector],
    bounds: &NormalizationBounds,
    reference: f64,
) -> f64 {
    let points: Vec<[f64; 3]> = front
        .iter()
        .map(|v| bounds.normalize(v).map(|x| x.min(reference)))
        .collect();
    hypervolume_3d(&points, [reference; 3])
}

/// Exact volume dominated by `points` and bounded by `reference`, all
/// objectives minimized.
///
/// Sweeps the third coordinate upward; between consecutive levels the
/// dominated slab is the 2-D staircase area of every point at or below the
/// level.
pub fn hypervolume_3d(points: &[[f64; 3]], reference: [f64; 3]) -> f64 {
    let mut pts: Vec<[f64; 3]> = points
        .iter()
        .copied()
        .filter(|p| p.iter().zip(&reference).all(|(x, r)| x < r))
        .collect();
    pts.sort_by(|a, b| {
        a[2].total_cmp(&b[2])
            .then(a[0].total_cmp(&b[0]))
            .then(a[1].total_cmp(&b[1]))
    });
    pts.dedup();
    let pts: Vec<[f64; 3]> = pts
        .iter()
        .filter(|p| !pts.iter().any(|q| dominates_slice(q, &p[..])))
        .copied()
        .collect();
    if pts.is_empty() {
        return 0.0;
    }

    let mut volume = 0.0;
    let mut active: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let z = pts[i][2];
        while i < pts.len() && pts[i][2] == z {
            active.push([pts[i][0], pts[i][1]]);
            i += 1;
        }
        let next_z = pts.get(i).map_or(reference[2], |p| p[2]);
        volume += area_2d(&mut active, [reference[0], reference[1]]) * (next_z - z);
    }
    volume
}

fn area_2d(points: &mut [[f64; 2]], reference: [f64; 2]) -> f64 {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut lowest_y = reference[1];
    for (k, p) in points.iter().enumerate() {
        lowest_y = lowest_y.min(p[1]);
        let next_x = points.get(k + 1).map_or(reference[0], |q| q[0]);
        area += (next_x - p[0]) * (reference[1] - lowest_y);
    }
    area
}

fn presence_all(solutions: &[EvaluatedSolution], mode: BinarizeMode) -> Vec<PresenceVector> {
    solutions
        .iter()
        .map(|s| binarize_with(&s.genome, mode))
        .collect()
}

fn pairwise<T>(vectors: &[PresenceVector], mut f: impl FnMut(u32) -> T) -> Result<()> {
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            f(hamming(&vectors[i], &vectors[j])?);
        }
    }
    Ok(())
}

/// Smallest Hamming distance over distinct pairs.
pub fn d_hmin(solutions: &[EvaluatedSolution], mode: BinarizeMode) -> Result<u32> {
    if solutions.len() < 2 {
        return Err(Error::param(
            "minimum pairwise distance needs at least 2 solutions",
        ));
    }
    let vectors = presence_all(solutions, mode);
    let mut min = u32::MAX;
    pairwise(&vectors, |d| min = min.min(d))?;
    Ok(min)
}

/// Mean pairwise Hamming distance in two conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanDistance {
    /// Sum over all ordered pairs, self-pairs included, divided by `|D|²`.
    pub all_pairs: f64,
    /// Mean over distinct unordered pairs; 0 for a single solution.
    pub distinct_pairs: f64,
}

pub fn d_hmed(solutions: &[EvaluatedSolution], mode: BinarizeMode) -> Result<MeanDistance> {
    if solutions.is_empty() {
        return Err(Error::param(
            "mean pairwise distance needs at least 1 solution",
        ));
    }
    let vectors = presence_all(solutions, mode);
    let mut sum = 0u64;
    pairwise(&vectors, |d| sum += u64::from(d))?;
    let n = solutions.len() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    Ok(MeanDistance {
        all_pairs: 2.0 * sum as f64 / (n * n),
        distinct_pairs: if pairs > 0.0 { sum as f64 / pairs } else { 0.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hypervolume: f64,
    /// Undefined for fewer than two solutions.
    pub d_hmin: Option<u32>,
    pub d_hmed: f64,
    pub d_hmed_distinct: f64,
    pub set_size: usize,
}

impl MetricsReport {
    pub fn compute(
        front: &[EvaluatedSolution],
        bounds: &NormalizationBounds,
        mode: BinarizeMode,
    ) -> Result<Self> {
        let objectives: Vec<ObjectiveVector> = front.iter().map(|s| s.objectives).collect();
        let (d_hmed, d_hmed_distinct) = if front.is_empty() {
            (0.0, 0.0)
        } else {
            let m = d_hmed(front, mode)?;
            (m.all_pairs, m.distinct_pairs)
        };
        Ok(Self {
            hypervolume: hypervolume(&objectives, bounds),
            d_hmin: if front.len() >= 2 {
                Some(d_hmin(front, mode)?)
            } else {
                None
            },
            d_hmed,
            d_hmed_distinct,
            set_size: front.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermTestResult {
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean(a) - mean(b)`.
    pub observed_diff: f64,
    pub permutation_diffs: Vec<f64>,
    pub p_value: f64,
    pub significant_at_01: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-sided permutation test on the difference in means.
///
/// The pooled values are put in sorted order, shuffled `n_permutations`
/// times and re-split at the original sizes; the smaller sample is always
/// drawn from the front of the shuffle so that swapping the inputs leaves the
/// p-value unchanged. The p-value is `(1 + #{|perm| >= |observed|}) / (1 + n)`.
pub fn permutation_test(
    sample_a: &[f64],
    sample_b: &[f64],
    n_permutations: usize,
    seed: u64,
) -> Result<PermTestResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::param("permutation test needs two non-empty samples"));
    }
    if n_permutations == 0 {
        return Err(Error::param(
            "permutation test needs at least one permutation",
        ));
    }
    if sample_a.iter().chain(sample_b).any(|x| !x.is_finite()) {
        return Err(Error::param("permutation test samples must be finite"));
    }
    let (mean_a, mean_b) = (mean(sample_a), mean(sample_b));
    let observed = mean_a - mean_b;

    let mut pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    // Orientation: +1 when the front block plays the role of sample a.
    let (front_len, sign) = if sample_a.len() <= sample_b.len() {
        (sample_a.len(), 1.0)
    } else {
        (sample_b.len(), -1.0)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = observed.abs() * (1.0 - 1e-12);
    let mut extreme = 0usize;
    let mut diffs = Vec::with_capacity(n_permutations);
    for _ in 0..n_permutations {
        pooled.shuffle(&mut rng);
        let (head, tail) = pooled.split_at(front_len);
        let d = sign * (mean(head) - mean(tail));
        if d.abs() >= threshold {
            extreme += 1;
        }
        diffs.push(d);
    }
    let p_value = (1 + extreme) as f64 / (1 + n_permutations) as f64;
    Ok(PermTestResult {
        mean_a,
        mean_b,
        observed_diff: observed,
        permutation_diffs: diffs,
        p_value,
        significant_at_01: p_value < SIGNIFICANCE_LEVEL,
    })
}
