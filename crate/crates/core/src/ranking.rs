//! Pareto dominance, non-dominated sorting, crowding distance and SPEA-2
//! raw fitness. Everything here looks at objective vectors only.

use crate::evaluation::{EvaluatedSolution, ObjectiveVector};

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    dominates_slice(&a.as_array(), &b.as_array())
}

pub fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Population indices grouped into successive non-dominated fronts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
}

impl FrontPartition {
    pub fn first(&self) -> &[usize] {
        self.fronts.first().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Front index per population member.
    pub fn ranks(&self, len: usize) -> Vec<usize> {
        let mut ranks = vec![usize::MAX; len];
        for (f, front) in self.fronts.iter().enumerate() {
            for &i in front {
                ranks[i] = f;
            }
        }
        ranks
    }
}

/// Fast non-dominated sort. Members of each front are listed in ascending
/// index order.
pub fn sort_fronts(objectives: &[ObjectiveVector]) -> FrontPartition {
    let n = objectives.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&objectives[i], &objectives[j]) {
                dominated_by_me[i].push(j);
                domination_count[j] += 1;
            } else if dominates(&objectives[j], &objectives[i]) {
                dominated_by_me[j].push(i);
                domination_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by_me[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    FrontPartition { fronts }
}

/// Sorts the population into fronts and records each member's front index.
pub fn nondominated_sort(population: &mut [EvaluatedSolution]) -> FrontPartition {
    let objectives: Vec<ObjectiveVector> = population.iter().map(|s| s.objectives).collect();
    let partition = sort_fronts(&objectives);
    for (f, front) in partition.fronts.iter().enumerate() {
        for &i in front {
            population[i].nds_rank = Some(f);
        }
    }
    partition
}

/// NSGA-II crowding distance within one front. Extremes of each objective get
/// infinity; interior points sum neighbour gaps normalized by the front's
/// range, and objectives with zero range add nothing.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for m in 0..3 {
        let value = |i: usize| front[i].as_array()[m];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let (lo, hi) = (value(order[0]), value(order[n - 1]));
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            distance[w[1]] += (value(w[2]) - value(w[0])) / range;
        }
    }
    distance
}

/// Sets `crowding` on every member, computed front by front.
pub fn assign_crowding(population: &mut [EvaluatedSolution], partition: &FrontPartition) {
    for front in &partition.fronts {
        let objectives: Vec<ObjectiveVector> =
            front.iter().map(|&i| population[i].objectives).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objectives)) {
            population[i].crowding = Some(d);
        }
    }
}

/// SPEA-2 raw fitness: the summed strength of everything that dominates a
/// point, where strength is the number of points a solution dominates.
pub fn spea2_raw_fitness(objectives: &[ObjectiveVector]) -> Vec<u32> {
    let n = objectives.len();
    let mut strength = vec![0u32; n];
    let mut dominators: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(&objectives[i], &objectives[j]) {
                strength[i] += 1;
                dominators[j].push(i);
            }
        }
    }
    dominators
        .iter()
        .map(|ds| ds.iter().map(|&i| strength[i]).sum())
        .collect()
}

pub fn assign_raw_fitness(population: &mut [EvaluatedSolution]) {
    let objectives: Vec<ObjectiveVector> = population.iter().map(|s| s.objectives).collect();
    for (s, r) in population.iter_mut().zip(spea2_raw_fitness(&objectives)) {
        s.raw_fitness = Some(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(a: f64, b: f64, c: f64) -> ObjectiveVector {
        ObjectiveVector::new(a, b, c)
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&ov(1.0, 1.0, -5.0), &ov(2.0, 1.0, -5.0)));
        assert!(!dominates(&ov(1.0, 1.0, -5.0), &ov(1.0, 1.0, -5.0)));
        assert!(!dominates(&ov(1.0, 2.0, -5.0), &ov(2.0, 1.0, -5.0)));
        assert!(!dominates(&ov(2.0, 1.0, -5.0), &ov(1.0, 2.0, -5.0)));
    }

    #[test]
    fn identical_vectors_share_one_front() {
        let p = vec![ov(1.0, 2.0, 3.0); 5];
        assert_eq!(sort_fronts(&p).fronts, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn chain_gives_singleton_fronts() {
        let p = [ov(3.0, 3.0, 3.0), ov(1.0, 1.0, 1.0), ov(2.0, 2.0, 2.0)];
        assert_eq!(sort_fronts(&p).fronts, vec![vec![1], vec![2], vec![0]]);
        assert_eq!(spea2_raw_fitness(&p), vec![3, 0, 2]);
    }

    #[test]
    fn raw_fitness_chain_strengths() {
        // a < b < c: S = (2, 1, 0), r = (0, 2, 3).
        let p = [ov(1.0, 1.0, 1.0), ov(2.0, 2.0, 2.0), ov(3.0, 3.0, 3.0)];
        assert_eq!(spea2_raw_fitness(&p), vec![0, 2, 3]);
    }

    #[test]
    fn incomparable_population_has_zero_raw_fitness() {
        let p = [ov(1.0, 3.0, 0.0), ov(2.0, 2.0, 0.0), ov(3.0, 1.0, 0.0)];
        assert_eq!(spea2_raw_fitness(&p), vec![0, 0, 0]);
        assert_eq!(sort_fronts(&p).fronts.len(), 1);
    }

    #[test]
    fn crowding_small_fronts_are_boundary() {
        assert_eq!(crowding_distance(&[ov(0.0, 0.0, 0.0)]), vec![f64::INFINITY]);
        assert!(crowding_distance(&[ov(0.0, 1.0, 0.0), ov(1.0, 0.0, 0.0)])
            .iter()
            .all(|d| d.is_infinite()));
    }

    #[test]
    fn crowding_collinear_middle_point() {
        let front = [ov(0.0, 2.0, 7.0), ov(1.0, 1.0, 7.0), ov(2.0, 0.0, 7.0)];
        let d = crowding_distance(&front);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert_eq!(d[1], 2.0);
    }

    #[test]
    fn crowding_duplicates_are_zero() {
        let front = [
            ov(0.0, 4.0, 0.0),
            ov(2.0, 2.0, 0.0),
            ov(2.0, 2.0, 0.0),
            ov(2.0, 2.0, 0.0),
            ov(4.0, 0.0, 0.0),
        ];
        let d = crowding_distance(&front);
        assert!(d[0].is_infinite() && d[4].is_infinite());
        assert_eq!(&d[1..4], &[1.0, 0.0, 1.0]);
        let all_same = [ov(1.0, 1.0, 1.0); 4];
        let d = crowding_distance(&all_same);
        assert_eq!(d.iter().filter(|x| x.is_infinite()).count(), 2);
        assert_eq!(d.iter().filter(|&&x| x == 0.0).count(), 2);
    }
}
