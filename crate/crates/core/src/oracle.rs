//! Brute-force enumeration of every tiebreaker universe.
//!
//! This is the slow baseline and the independent correctness oracle for the
//! fused-universe diagram. It does no pruning: each universe is replayed from
//! scratch.

use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::time::Instant;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::{Edge, MarginGraph};
use crate::profile::AltId;
use crate::river::{run_ranked_pairs, run_river, Tiebreaker};

pub const DEFAULT_UNIVERSE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PutRule {
    River,
    RankedPairs,
}

/// Maximal equal-margin groups of positive edges, strongest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseEnumeration {
    pub tie_blocks: Vec<(i64, Vec<Edge>)>,
    pub universe_count: BigUint,
}

impl UniverseEnumeration {
    pub fn new(g: &MarginGraph) -> Self {
        let edges = g.positive_edges();
        let tie_blocks: Vec<(i64, Vec<Edge>)> = edges
            .chunk_by(|a, b| a.margin == b.margin)
            .map(|block| (block[0].margin, block.to_vec()))
            .collect();
        let universe_count = tie_blocks
            .iter()
            .map(|(_, b)| (1..=b.len() as u64).map(BigUint::from).product::<BigUint>())
            .product();
        Self {
            tie_blocks,
            universe_count,
        }
    }

    /// Calls `visit` with every universe's edge order. Blocks are permuted
    /// lexicographically; the last block varies fastest.
    pub fn for_each<B>(&self, mut visit: impl FnMut(&[Edge]) -> ControlFlow<B>) -> Option<B> {
        let mut perms: Vec<Vec<usize>> = self.tie_blocks.iter().map(|(_, b)| (0..b.len()).collect()).collect();
        let total: usize = self.tie_blocks.iter().map(|(_, b)| b.len()).sum();
        let mut order: Vec<Edge> = Vec::with_capacity(total);
        loop {
            order.clear();
            for ((_, block), perm) in self.tie_blocks.iter().zip(&perms) {
                order.extend(perm.iter().map(|&i| block[i]));
            }
            if let ControlFlow::Break(b) = visit(&order) {
                return Some(b);
            }
            // odometer over the per-block permutations
            let mut advanced = false;
            for perm in perms.iter_mut().rev() {
                if next_permutation(perm) {
                    advanced = true;
                    break;
                }
                perm.sort_unstable();
            }
            if !advanced {
                return None;
            }
        }
    }
}

/// Advances to the next lexicographic permutation; false (and unchanged) at the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Product over equal-margin blocks of the block size factorial.
pub fn count_universes(g: &MarginGraph) -> BigUint {
    UniverseEnumeration::new(g).universe_count
}

/// Every tiebreaker of `g`, materialized. Intended for small instances.
pub fn enumerate_universes(g: &MarginGraph) -> Vec<Tiebreaker> {
    let mut all = Vec::new();
    UniverseEnumeration::new(g).for_each::<()>(|order| {
        all.push(Tiebreaker::from_edges(order.to_vec()));
        ControlFlow::Continue(())
    });
    all
}

/// Union of the rule's winners over all universes.
pub fn brute_force_put(g: &MarginGraph, rule: PutRule, limit: u64) -> Result<BTreeSet<AltId>> {
    brute_force_put_until(g, rule, limit, None)
}

/// As [`brute_force_put`], giving up with [`Error::TimedOut`] after `deadline`.
pub fn brute_force_put_until(
    g: &MarginGraph,
    rule: PutRule,
    limit: u64,
    deadline: Option<Instant>,
) -> Result<BTreeSet<AltId>> {
    g.require_strict()?;
    let universes = UniverseEnumeration::new(g);
    if universes.universe_count > BigUint::from(limit) {
        return Err(Error::UniverseLimitExceeded {
            count: universes.universe_count,
            limit,
        });
    }
    let m = g.m();
    let mut winners = BTreeSet::new();
    let mut visited: u64 = 0;
    let outcome = universes.for_each(|order| {
        visited += 1;
        if visited.is_multiple_of(1024) && deadline.is_some_and(|d| Instant::now() >= d) {
            return ControlFlow::Break(Error::TimedOut);
        }
        let winner = match rule {
            PutRule::River => {
                let parent = run_river(m, order);
                (0..m).find(|&v| parent[v].is_none())
            }
            PutRule::RankedPairs => {
                let locked = run_ranked_pairs(m, order);
                let mut incoming = vec![false; m];
                for e in &locked {
                    incoming[e.to] = true;
                }
                (0..m).find(|&v| !incoming[v])
            }
        };
        match winner {
            Some(w) => {
                winners.insert(w);
                ControlFlow::Continue(())
            }
            None => ControlFlow::Break(Error::InternalInvariantViolation("universe without a winner".into())),
        }
    });
    match outcome {
        Some(err) => Err(err),
        None => Ok(winners),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn equal_cycle() -> MarginGraph {
        MarginGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap()
    }

    #[test]
    fn counts() {
        let distinct = MarginGraph::from_edges(3, &[(0, 1, 3), (1, 2, 2), (2, 0, 1)]).unwrap();
        assert_eq!(count_universes(&distinct), BigUint::from(1u32));
        assert_eq!(count_universes(&equal_cycle()), BigUint::from(6u32));
        let blocks =
            MarginGraph::from_edges(4, &[(0, 1, 3), (1, 2, 3), (2, 0, 3), (3, 0, 1), (3, 1, 1), (2, 3, 5)]).unwrap();
        assert_eq!(count_universes(&blocks), BigUint::from(12u32));
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        let g =
            MarginGraph::from_edges(4, &[(0, 1, 3), (1, 2, 3), (2, 0, 3), (3, 0, 1), (3, 1, 1), (2, 3, 1)]).unwrap();
        let all = enumerate_universes(&g);
        assert_eq!(all.len(), 36);
        let distinct: HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 36);
        for t in &all {
            crate::river::validate_tiebreaker(&g, t).unwrap();
        }
    }

    #[test]
    fn small_put_sets() {
        let g = equal_cycle();
        assert_eq!(
            brute_force_put(&g, PutRule::River, 100).unwrap(),
            BTreeSet::from([0, 1, 2])
        );
        assert_eq!(
            brute_force_put(&g, PutRule::RankedPairs, 100).unwrap(),
            BTreeSet::from([0, 1, 2])
        );
        let strict = MarginGraph::from_edges(3, &[(0, 1, 3), (1, 2, 2), (2, 0, 1)]).unwrap();
        assert_eq!(
            brute_force_put(&strict, PutRule::River, 1).unwrap(),
            BTreeSet::from([0])
        );
    }

    #[test]
    fn each_vertex_of_equal_cycle_wins_twice() {
        let g = equal_cycle();
        let mut wins = [0; 3];
        for t in enumerate_universes(&g) {
            wins[crate::river::river(&g, &t).unwrap().winner()] += 1;
        }
        assert_eq!(wins, [2, 2, 2]);
    }

    #[test]
    fn limit_and_deadline() {
        let g = equal_cycle();
        match brute_force_put(&g, PutRule::River, 5) {
            Err(Error::UniverseLimitExceeded { count, limit: 5 }) => assert_eq!(count, BigUint::from(6u32)),
            other => panic!("unexpected {other:?}"),
        }
        let non_strict = MarginGraph::from_edges(3, &[(0, 1, 1)]).unwrap();
        assert!(matches!(
            brute_force_put(&non_strict, PutRule::River, 5),
            Err(Error::NonStrictMarginGraph)
        ));

        // 7 vertices, one margin-3 edge and twenty margin-1 edges: 20! universes
        // fit under the limit, so only the deadline can stop it
        let mut edges = Vec::new();
        for x in 0..7 {
            for y in x + 1..7 {
                let w = if (x, y) == (0, 1) { 3 } else { 1 };
                edges.push(if (x + y) % 2 == 0 { (x, y, w) } else { (y, x, w) });
            }
        }
        let g = MarginGraph::from_edges(7, &edges).unwrap();
        let past = Instant::now();
        let r = brute_force_put_until(&g, PutRule::River, u64::MAX, Some(past));
        assert!(matches!(r, Err(Error::TimedOut)), "{r:?}");
    }

    #[test]
    fn fixed_runs_are_contained_in_put() {
        let g =
            MarginGraph::from_edges(4, &[(0, 1, 2), (1, 2, 2), (2, 0, 2), (3, 0, 2), (1, 3, 2), (2, 3, 4)]).unwrap();
        let rv = brute_force_put(&g, PutRule::River, 1000).unwrap();
        let rp = brute_force_put(&g, PutRule::RankedPairs, 1000).unwrap();
        for t in enumerate_universes(&g).iter().step_by(7) {
            assert!(rv.contains(&crate::river::river(&g, t).unwrap().winner()));
            assert!(rp.contains(&crate::river::ranked_pairs(&g, t).unwrap().winner));
        }
    }
}
