#![allow(dead_code)]

use num_bigint::BigUint;
use rand::Rng;
use river_put::{count_universes, MarginGraph};

/// Every margin graph on `m` vertices whose edges take margins in `weights`,
/// over all orientations of every pair.
pub fn all_graphs(m: usize, weights: &[i64]) -> Vec<MarginGraph> {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|x| (x + 1..m).map(move |y| (x, y))).collect();
    let choices = 2 * weights.len();
    let total = choices.pow(pairs.len() as u32);
    (0..total)
        .map(|mut code| {
            let edges: Vec<(usize, usize, i64)> = pairs
                .iter()
                .map(|&(x, y)| {
                    let c = code % choices;
                    code /= choices;
                    let w = weights[c / 2];
                    if c.is_multiple_of(2) {
                        (x, y, w)
                    } else {
                        (y, x, w)
                    }
                })
                .collect();
            MarginGraph::from_edges(m, &edges).unwrap()
        })
        .collect()
}

/// A random strict graph whose margins come from `1..=distinct`, so equal
/// margins are common.
pub fn random_tied_graph<R: Rng>(rng: &mut R, m: usize, distinct: i64) -> MarginGraph {
    let mut edges = Vec::new();
    for x in 0..m {
        for y in x + 1..m {
            let w = rng.gen_range(1..=distinct);
            edges.push(if rng.gen_bool(0.5) { (x, y, w) } else { (y, x, w) });
        }
    }
    MarginGraph::from_edges(m, &edges).unwrap()
}

/// Rejection-samples a tied graph on at most `max_m` vertices with at most
/// `max_universes` tiebreakers.
pub fn random_bounded_graph<R: Rng>(rng: &mut R, max_m: usize, max_universes: u64) -> MarginGraph {
    let limit = BigUint::from(max_universes);
    loop {
        let m = rng.gen_range(2..=max_m);
        let distinct = rng.gen_range(1..=8);
        let g = random_tied_graph(rng, m, distinct);
        if count_universes(&g) <= limit {
            return g;
        }
    }
}

/// A strict tournament on `m` vertices with every margin equal to 1.
pub fn all_ties(m: usize) -> MarginGraph {
    let mut edges = Vec::new();
    for x in 0..m {
        for y in x + 1..m {
            edges.push(if (x + y) % 2 == 0 { (x, y, 1) } else { (y, x, 1) });
        }
    }
    MarginGraph::from_edges(m, &edges).unwrap()
}
