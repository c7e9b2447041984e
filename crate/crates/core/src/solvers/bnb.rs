//! Exact minimum multicut on trees as a hitting-set branch and bound.
//!
//! Each terminal pair contributes the set of non-terminal vertices on its
//! path; a cutset is feasible iff it hits every set. The search branches on
//! the vertices of a shortest uncovered set in ascending order (vertex `v_i`
//! taken, `v_1..v_{i-1}` excluded) and bounds with a greedy packing of
//! pairwise disjoint uncovered sets.

use super::SolverError;
use crate::instance::TreeInstance;
use crate::qubo::Cutset;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnbOutcome {
    pub cutset: Cutset,
    pub nodes: u64,
    /// False when the node budget ran out before the search finished; the
    /// cutset is then the best one found, not necessarily minimum.
    pub proven_optimal: bool,
}

#[derive(Clone)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
}

struct Search<'a> {
    sets: &'a [Vec<usize>],
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    n: usize,
}

impl Search<'_> {
    fn available<'s>(&'s self, set: usize, excluded: &'s BitSet) -> impl Iterator<Item = usize> + 's {
        self.sets[set].iter().copied().filter(move |&v| !excluded.contains(v))
    }

    /// Greedy packing of uncovered sets with pairwise disjoint available
    /// vertices, smallest first. Returns `None` when some set is dead.
    fn packing_bound(&self, uncovered: &[usize], excluded: &BitSet) -> Option<usize> {
        let mut sized: Vec<(usize, usize)> = Vec::with_capacity(uncovered.len());
        for &s in uncovered {
            let k = self.available(s, excluded).count();
            if k == 0 {
                return None;
            }
            sized.push((k, s));
        }
        sized.sort_unstable();
        let mut used = BitSet::new(self.n);
        let mut count = 0;
        for &(_, s) in &sized {
            if self.available(s, excluded).all(|v| !used.contains(v)) {
                for v in self.available(s, excluded).collect::<Vec<_>>() {
                    used.insert(v);
                }
                count += 1;
            }
        }
        Some(count)
    }

    fn run(&mut self, chosen: &mut Vec<usize>, excluded: &mut BitSet, uncovered: &[usize]) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if uncovered.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let Some(bound) = self.packing_bound(uncovered, excluded) else {
            return;
        };
        if chosen.len() + bound >= self.best.len() {
            return;
        }
        let pivot = *uncovered
            .iter()
            .min_by_key(|&&s| (self.available(s, excluded).count(), s))
            .expect("non-empty");
        let branch: Vec<usize> = self.available(pivot, excluded).collect();
        let mut newly_excluded = Vec::new();
        for v in branch {
            chosen.push(v);
            let rest: Vec<usize> = uncovered
                .iter()
                .copied()
                .filter(|&s| self.sets[s].binary_search(&v).is_err())
                .collect();
            self.run(chosen, excluded, &rest);
            chosen.pop();
            excluded.insert(v);
            newly_excluded.push(v);
            if self.exhausted {
                break;
            }
        }
        for v in newly_excluded {
            excluded.remove(v);
        }
    }
}

/// Removable vertices per constraint path, after dropping paths whose set
/// contains another path's set (hitting the smaller one hits both).
fn hitting_sets(instance: &TreeInstance) -> Result<Vec<Vec<usize>>, SolverError> {
    let terminal = instance.terminal_mask();
    let mut sets = Vec::new();
    for (path_index, path) in instance.constraint_paths().iter().enumerate() {
        let mut set: Vec<usize> = path
            .internal()
            .iter()
            .copied()
            .filter(|&v| !terminal[v])
            .collect();
        if set.is_empty() {
            return Err(SolverError::Infeasible { path_index });
        }
        set.sort_unstable();
        sets.push(set);
    }
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let is_subset = |a: &[usize], b: &[usize]| a.iter().all(|v| b.binary_search(v).is_ok());
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| is_subset(k, &s)) {
            kept.push(s);
        }
    }
    Ok(kept)
}

fn greedy_cover(sets: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut uncovered: Vec<usize> = (0..sets.len()).collect();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let mut hits = vec![0usize; n];
        for &s in &uncovered {
            for &v in &sets[s] {
                hits[v] += 1;
            }
        }
        let v = (0..n)
            .max_by_key(|&v| (hits[v], std::cmp::Reverse(v)))
            .expect("n > 0");
        chosen.push(v);
        uncovered.retain(|&s| sets[s].binary_search(&v).is_err());
    }
    chosen
}

/// Minimum-cardinality feasible cutset, with no node limit.
pub fn exact_multicut_bnb(instance: &TreeInstance) -> Result<Cutset, SolverError> {
    exact_multicut_bnb_budgeted(instance, u64::MAX).map(|o| o.cutset)
}

pub fn exact_multicut_bnb_budgeted(
    instance: &TreeInstance,
    node_budget: u64,
) -> Result<BnbOutcome, SolverError> {
    let n = instance.num_vertices();
    let sets = hitting_sets(instance)?;
    let mut search = Search {
        sets: &sets,
        best: greedy_cover(&sets, n),
        nodes: 0,
        budget: node_budget,
        exhausted: false,
        n,
    };
    let all: Vec<usize> = (0..sets.len()).collect();
    search.run(&mut Vec::new(), &mut BitSet::new(n), &all);
    Ok(BnbOutcome {
        cutset: Cutset::new(search.best),
        nodes: search.nodes,
        proven_optimal: !search.exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_tree_instance;
    use crate::qubo::check_feasibility;

    // exhaustive minimum over all subsets of non-terminal vertices
    fn brute_min(inst: &TreeInstance) -> usize {
        let n = inst.num_vertices();
        let free: Vec<usize> = (0..n).filter(|&v| !inst.terminal_mask()[v]).collect();
        let mut best = usize::MAX;
        for mask in 0u32..(1 << free.len()) {
            let c = Cutset::new(
                free.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &v)| v),
            );
            if c.len() < best && check_feasibility(inst, &c).is_feasible() {
                best = c.len();
            }
        }
        best
    }

    #[test]
    fn three_path() {
        let inst = TreeInstance::new(3, vec![(0, 1), (1, 2)], vec![(0, 2)], 0).unwrap();
        assert_eq!(exact_multicut_bnb(&inst).unwrap(), Cutset::new([1]));
    }

    #[test]
    fn star_center_hits_both_pairs() {
        let inst = TreeInstance::new(
            5,
            vec![(0, 1), (0, 2), (0, 3), (0, 4)],
            vec![(1, 2), (3, 4)],
            0,
        )
        .unwrap();
        assert_eq!(exact_multicut_bnb(&inst).unwrap(), Cutset::new([0]));
    }

    #[test]
    fn infeasible_when_path_has_only_terminals() {
        // 0-1-2-3 with pairs (0,2) and (1,3): path 0-1-2 has internal 1, a terminal
        let inst = TreeInstance::new(4, vec![(0, 1), (1, 2), (2, 3)], vec![(0, 2), (1, 3)], 0)
            .unwrap();
        assert!(matches!(
            exact_multicut_bnb(&inst),
            Err(SolverError::Infeasible { .. })
        ));
    }

    #[test]
    fn matches_subset_enumeration() {
        for seed in 0..60 {
            let n = 8 + (seed as usize % 9);
            let k = 2 + (seed as usize % 4);
            let Ok(inst) = generate_tree_instance(n, k, seed) else {
                continue;
            };
            let c = exact_multicut_bnb(&inst).unwrap();
            assert!(check_feasibility(&inst, &c).is_feasible());
            assert_eq!(c.len(), brute_min(&inst), "seed {seed}");
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let inst = generate_tree_instance(200, 40, 3).unwrap();
        let out = exact_multicut_bnb_budgeted(&inst, 1).unwrap();
        assert!(check_feasibility(&inst, &out.cutset).is_feasible());
        let full = exact_multicut_bnb_budgeted(&inst, u64::MAX).unwrap();
        assert!(full.proven_optimal);
        assert!(full.cutset.len() <= out.cutset.len());
    }
}
