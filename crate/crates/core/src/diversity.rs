//! Decision-space diversity: presence vectors, Hamming distance, the
//! dominance-weighted Hamming measure and the greedy max-min selector built
//! on it.
//!
//! The weighted measure between two solutions is
//! `d_H(x, y) / (|r(x) - r(y)| + 1)` where `r` is SPEA-2 raw fitness, so pairs
//! that differ in composition but sit at similar dominance depth score high.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{EvaluatedSolution, ObjectiveVector};
use crate::genome::DietGenome;
use crate::ranking::sort_fronts;

/// Which bits a genome is reduced to before measuring Hamming distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinarizeMode {
    /// One bit per item: eaten at least once during the horizon.
    #[default]
    Weekly,
    /// One bit per (item, day) cell.
    PerDay,
}

impl std::str::FromStr for BinarizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "weekly" => Ok(BinarizeMode::Weekly),
            "per-day" | "per_day" | "perday" => Ok(BinarizeMode::PerDay),
            other => Err(Error::param(format!("unknown binarization mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PresenceVector {
    len: usize,
    words: Vec<u64>,
}

impl PresenceVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut out = Self::zeros(self.len);
        for i in (0..self.len).filter(|&i| !self.get(i)) {
            out.set(i);
        }
        out
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

pub fn binarize(genome: &DietGenome) -> PresenceVector {
    binarize_with(genome, BinarizeMode::Weekly)
}

pub fn binarize_with(genome: &DietGenome, mode: BinarizeMode) -> PresenceVector {
    match mode {
        BinarizeMode::Weekly => {
            let mut v = PresenceVector::zeros(genome.items());
            for i in 0..genome.items() {
                if genome.week(i).iter().any(|&s| s > 0) {
                    v.set(i);
                }
            }
            v
        }
        BinarizeMode::PerDay => {
            let mut v = PresenceVector::zeros(genome.cells().len());
            for (i, _) in genome.cells().iter().enumerate().filter(|(_, &s)| s > 0) {
                v.set(i);
            }
            v
        }
    }
}

pub fn hamming(a: &PresenceVector, b: &PresenceVector) -> Result<u32> {
    if a.len != b.len {
        return Err(Error::Dimension {
            expected: a.len,
            actual: b.len,
        });
    }
    Ok(hamming_unchecked(a, b))
}

#[inline]
fn hamming_unchecked(a: &PresenceVector, b: &PresenceVector) -> u32 {
    a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones())
        .sum()
}

/// Weighted Hamming value from its ingredients.
#[inline]
pub fn weighted_hamming(distance: u32, raw_a: u32, raw_b: u32) -> f64 {
    f64::from(distance) / (f64::from(raw_a.abs_diff(raw_b)) + 1.0)
}

/// Weighted Hamming measure between two evaluated solutions under weekly
/// binarization. Both must carry raw fitness.
pub fn w_dh(x: &EvaluatedSolution, y: &EvaluatedSolution) -> Result<f64> {
    let rx = x.raw_fitness.ok_or(Error::MissingRawFitness(0))?;
    let ry = y.raw_fitness.ok_or(Error::MissingRawFitness(1))?;
    let d = hamming(&binarize(&x.genome), &binarize(&y.genome))?;
    Ok(weighted_hamming(d, rx, ry))
}

/// Solutions with raw fitness and cached presence vectors.
#[derive(Debug, Clone)]
pub struct SelectionPool {
    members: Vec<EvaluatedSolution>,
    presence: Vec<PresenceVector>,
    mode: BinarizeMode,
}

impl SelectionPool {
    pub fn new(members: Vec<EvaluatedSolution>, mode: BinarizeMode) -> Result<Self> {
        if let Some(i) = members.iter().position(|s| s.raw_fitness.is_none()) {
            return Err(Error::MissingRawFitness(i));
        }
        let presence: Vec<PresenceVector> = members
            .iter()
            .map(|s| binarize_with(&s.genome, mode))
            .collect();
        if let Some(first) = presence.first() {
            if let Some(bad) = presence.iter().find(|p| p.len() != first.len()) {
                return Err(Error::Dimension {
                    expected: first.len(),
                    actual: bad.len(),
                });
            }
        }
        Ok(Self {
            members,
            presence,
            mode,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[EvaluatedSolution] {
        &self.members
    }

    pub fn into_members(self) -> Vec<EvaluatedSolution> {
        self.members
    }

    pub fn presence(&self, i: usize) -> &PresenceVector {
        &self.presence[i]
    }

    pub fn mode(&self) -> BinarizeMode {
        self.mode
    }

    pub fn hamming(&self, i: usize, j: usize) -> u32 {
        hamming_unchecked(&self.presence[i], &self.presence[j])
    }

    fn raw(&self, i: usize) -> u32 {
        self.members[i]
            .raw_fitness
            .expect("checked at construction")
    }

    /// Weighted Hamming measure between members `i` and `j`.
    pub fn w(&self, i: usize, j: usize) -> f64 {
        weighted_hamming(self.hamming(i, j), self.raw(i), self.raw(j))
    }

    /// Full matrix of pairwise weighted values.
    #[allow(clippy::needless_range_loop)]
    pub fn w_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.w(i, j);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }

    /// Indices of members not dominated by any other member.
    pub fn nondominated(&self) -> Vec<usize> {
        let objectives: Vec<ObjectiveVector> = self.members.iter().map(|s| s.objectives).collect();
        sort_fronts(&objectives).first().to_vec()
    }
}

/// Outcome of [`dwh_select`].
#[derive(Debug, Clone, PartialEq)]
pub struct DwhSelection {
    /// Pool indices in the order they were selected.
    pub order: Vec<usize>,
    /// Weighted value of the seed pair, or `None` when the seed was a single
    /// non-dominated member.
    pub seed_value: Option<f64>,
    /// Max-min value achieved by each greedy addition after the seed.
    pub step_values: Vec<f64>,
}

/// Greedy max-min selection of `k` pool members.
///
/// Seeds with the non-dominated pair of largest weighted Hamming value
/// (lexicographically smallest index pair on ties; a lone non-dominated
/// member seeds alone), then repeatedly adds the member whose smallest value
/// to the selected set is largest. Ties in the greedy step are broken
/// uniformly at random with `rng`.
pub fn dwh_select<R: Rng + ?Sized>(
    pool: &SelectionPool,
    k: usize,
    rng: &mut R,
) -> Result<DwhSelection> {
    let n = pool.len();
    if n == 0 {
        return Err(Error::param("selection pool is empty"));
    }
    if k == 0 || k > n {
        return Err(Error::param(format!(
            "cannot select {k} of {n} pool members"
        )));
    }
    let w = pool.w_matrix();

    let front = pool.nondominated();
    let (mut order, seed_value) = if front.len() >= 2 {
        let mut best = (front[0], front[1], w[front[0]][front[1]]);
        for (a_pos, &a) in front.iter().enumerate() {
            for &b in &front[a_pos + 1..] {
                if w[a][b] > best.2 {
                    best = (a, b, w[a][b]);
                }
            }
        }
        (vec![best.0, best.1], Some(best.2))
    } else {
        (vec![front[0]], None)
    };
    order.truncate(k);

    let mut selected = vec![false; n];
    for &i in &order {
        selected[i] = true;
    }
    let mut min_to_selected: Vec<f64> = (0..n)
        .map(|x| order.iter().map(|&r| w[x][r]).fold(f64::INFINITY, f64::min))
        .collect();

    let mut step_values = Vec::with_capacity(k.saturating_sub(order.len()));
    let mut ties = Vec::new();
    while order.len() < k {
        let best = (0..n)
            .filter(|&x| !selected[x])
            .map(|x| min_to_selected[x])
            .fold(f64::NEG_INFINITY, f64::max);
        ties.clear();
        ties.extend((0..n).filter(|&x| !selected[x] && min_to_selected[x] == best));
        let pick = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.gen_range(0..ties.len())]
        };
        selected[pick] = true;
        order.push(pick);
        step_values.push(best);
        for x in 0..n {
            min_to_selected[x] = min_to_selected[x].min(w[x][pick]);
        }
    }

    Ok(DwhSelection {
        order,
        seed_value,
        step_values,
    })
}

/// Binary tournament between pool members `a` and `b`.
///
/// A feasible solution beats an infeasible one; two infeasible solutions
/// compare by penalty; two feasible ones compare by their smallest weighted
/// Hamming value to `already_selected` (larger wins). Remaining ties, and the
/// feasible case with nothing selected yet, fall back to the lower
/// non-dominated rank and then a coin flip.
pub fn diversity_tournament<R: Rng + ?Sized>(
    pool: &SelectionPool,
    a: usize,
    b: usize,
    already_selected: &[usize],
    rng: &mut R,
) -> usize {
    let (sa, sb) = (&pool.members[a], &pool.members[b]);
    match (sa.feasible, sb.feasible) {
        (true, false) => return a,
        (false, true) => return b,
        (false, false) => {
            if sa.penalty < sb.penalty {
                return a;
            }
            if sb.penalty < sa.penalty {
                return b;
            }
        }
        (true, true) => {
            if !already_selected.is_empty() {
                let score = |s: usize| {
                    already_selected
                        .iter()
                        .map(|&r| pool.w(s, r))
                        .fold(f64::INFINITY, f64::min)
                };
                let (wa, wb) = (score(a), score(b));
                if wa > wb {
                    return a;
                }
                if wb > wa {
                    return b;
                }
            }
        }
    }
    rank_then_coin(sa, sb, a, b, rng)
}

pub(crate) fn rank_then_coin<R: Rng + ?Sized>(
    sa: &EvaluatedSolution,
    sb: &EvaluatedSolution,
    a: usize,
    b: usize,
    rng: &mut R,
) -> usize {
    let ra = sa.nds_rank.unwrap_or(usize::MAX);
    let rb = sb.nds_rank.unwrap_or(usize::MAX);
    match ra.cmp(&rb) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}
