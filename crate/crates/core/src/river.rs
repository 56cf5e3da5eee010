//! Fixed-tiebreaker runners: River and Ranked Pairs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs, Edge, MarginGraph};
use crate::profile::AltId;

/// A descending linear ordering of the positive-margin edges: one universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tiebreaker {
    order: Vec<Edge>,
}

impl Tiebreaker {
    /// Wraps an edge sequence without checking it; see [`validate_tiebreaker`].
    pub fn from_edges(order: Vec<Edge>) -> Self {
        Self { order }
    }

    /// Looks up each pair's margin in `g`.
    pub fn from_pairs(g: &MarginGraph, pairs: &[(AltId, AltId)]) -> Result<Self> {
        let order = pairs
            .iter()
            .map(|&(x, y)| {
                if g.is_positive_edge(x, y) {
                    Ok(Edge::new(x, y, g.margin(x, y)))
                } else {
                    Err(Error::EdgeNotInGraph(x, y))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { order })
    }

    /// The canonical order of [`MarginGraph::positive_edges`].
    pub fn canonical(g: &MarginGraph) -> Self {
        Self {
            order: g.positive_edges(),
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.order
    }

    pub fn pairs(&self) -> Vec<(AltId, AltId)> {
        self.order.iter().map(Edge::pair).collect()
    }

    /// Parses the `x>y` per-line text form and validates it against `g`.
    pub fn parse(g: &MarginGraph, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (x, y) = line.split_once('>').ok_or_else(|| Error::MalformedLine {
                line: i + 1,
                reason: "expected `x>y`".into(),
            })?;
            let lookup = |name: &str| {
                g.id_of(name.trim()).ok_or_else(|| Error::UnknownAlternative {
                    line: i + 1,
                    name: name.trim().to_string(),
                })
            };
            pairs.push((lookup(x)?, lookup(y)?));
        }
        let t = Self::from_pairs(g, &pairs)?;
        validate_tiebreaker(g, &t)?;
        Ok(t)
    }

    pub fn to_text(&self, g: &MarginGraph) -> String {
        self.order
            .iter()
            .map(|e| format!("{}>{}\n", g.name(e.from), g.name(e.to)))
            .collect()
    }
}

/// Checks that `t` lists every positive-margin edge of `g` exactly once, in
/// non-increasing margin order.
pub fn validate_tiebreaker(g: &MarginGraph, t: &Tiebreaker) -> Result<()> {
    let mut seen = HashSet::new();
    for (i, e) in t.order.iter().enumerate() {
        if !g.is_positive_edge(e.from, e.to) || g.margin(e.from, e.to) != e.margin {
            return Err(Error::EdgeNotInGraph(e.from, e.to));
        }
        if !seen.insert(e.pair()) {
            return Err(Error::DuplicateEdge(e.from, e.to));
        }
        if i > 0 && t.order[i - 1].margin < e.margin {
            return Err(Error::NotDescending { index: i });
        }
    }
    if let Some(missing) = g.positive_edges().into_iter().find(|e| !seen.contains(&e.pair())) {
        return Err(Error::MissingEdge(missing.from, missing.to));
    }
    Ok(())
}

/// Outcome of one River run: a spanning in-tree rooted at the winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiverDiagram {
    parent: Vec<Option<(AltId, i64)>>,
    root: AltId,
}

impl RiverDiagram {
    pub fn root(&self) -> AltId {
        self.root
    }

    pub fn winner(&self) -> AltId {
        self.root
    }

    pub fn parent(&self, v: AltId) -> Option<(AltId, i64)> {
        self.parent[v]
    }

    pub fn contains(&self, x: AltId, y: AltId) -> bool {
        matches!(self.parent[y], Some((p, _)) if p == x)
    }

    /// Accepted edges, sorted by `(from, to)`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut edges: Vec<Edge> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|(parent, margin)| Edge::new(parent, child, margin)))
            .collect();
        edges.sort();
        edges
    }

    pub fn to_json(&self, g: &MarginGraph) -> DiagramJson {
        DiagramJson {
            root: g.name(self.root).to_string(),
            edges: self
                .edges()
                .iter()
                .map(|e| (g.name(e.from).to_string(), g.name(e.to).to_string(), e.margin))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub root: String,
    pub edges: Vec<(String, String, i64)>,
}

/// River acceptance loop over an already validated order. Every vertex keeps
/// at most one parent, so `(x, y)` closes a cycle iff `y` is an ancestor of `x`.
pub(crate) fn run_river(m: usize, order: &[Edge]) -> Vec<Option<(AltId, i64)>> {
    let mut parent: Vec<Option<(AltId, i64)>> = vec![None; m];
    let mut accepted = 0;
    for e in order {
        if accepted + 1 == m {
            break;
        }
        if parent[e.to].is_some() {
            continue;
        }
        let mut v = e.from;
        let closes_cycle = loop {
            if v == e.to {
                break true;
            }
            match parent[v] {
                Some((p, _)) => v = p,
                None => break false,
            }
        };
        if !closes_cycle {
            parent[e.to] = Some((e.from, e.margin));
            accepted += 1;
        }
    }
    parent
}

pub(crate) fn unique_source(m: usize, has_incoming: impl Fn(AltId) -> bool) -> Result<AltId> {
    let mut sources = (0..m).filter(|&v| !has_incoming(v));
    match (sources.next(), sources.next()) {
        (Some(root), None) => Ok(root),
        (None, _) => Err(Error::InternalInvariantViolation(
            "no vertex without incoming edges".into(),
        )),
        (Some(_), Some(_)) => Err(Error::InternalInvariantViolation(
            "several vertices without incoming edges".into(),
        )),
    }
}

/// Runs the River method under tiebreaker `t`.
pub fn river(g: &MarginGraph, t: &Tiebreaker) -> Result<RiverDiagram> {
    g.require_strict()?;
    validate_tiebreaker(g, t)?;
    let parent = run_river(g.m(), &t.order);
    let root = unique_source(g.m(), |v| parent[v].is_some())?;
    Ok(RiverDiagram { parent, root })
}

/// Locked edges and winner of one Ranked Pairs run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedPairsOutcome {
    pub locked: Vec<Edge>,
    pub winner: AltId,
}

pub(crate) fn run_ranked_pairs(m: usize, order: &[Edge]) -> Vec<Edge> {
    let mut out: Vec<Vec<AltId>> = vec![Vec::new(); m];
    let mut locked = Vec::new();
    for e in order {
        let reach = bfs(m, e.to, |v| out[v].clone());
        if !reach[e.from] {
            out[e.from].push(e.to);
            locked.push(*e);
        }
    }
    locked
}

/// Runs Ranked Pairs under tiebreaker `t`.
pub fn ranked_pairs(g: &MarginGraph, t: &Tiebreaker) -> Result<RankedPairsOutcome> {
    g.require_strict()?;
    validate_tiebreaker(g, t)?;
    let locked = run_ranked_pairs(g.m(), &t.order);
    let mut incoming = vec![false; g.m()];
    for e in &locked {
        incoming[e.to] = true;
    }
    let winner = unique_source(g.m(), |v| incoming[v])?;
    Ok(RankedPairsOutcome { locked, winner })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle321() -> MarginGraph {
        MarginGraph::from_edges(3, &[(0, 1, 3), (1, 2, 2), (2, 0, 1)]).unwrap()
    }

    fn pairs(edges: &[Edge]) -> Vec<(usize, usize)> {
        let mut p: Vec<_> = edges.iter().map(Edge::pair).collect();
        p.sort();
        p
    }

    #[test]
    fn validation() {
        let g = cycle321();
        let ok = Tiebreaker::from_pairs(&g, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        validate_tiebreaker(&g, &ok).unwrap();
        let swapped = Tiebreaker::from_pairs(&g, &[(1, 2), (0, 1), (2, 0)]).unwrap();
        assert!(matches!(
            validate_tiebreaker(&g, &swapped),
            Err(Error::NotDescending { index: 1 })
        ));
        let short = Tiebreaker::from_pairs(&g, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(validate_tiebreaker(&g, &short), Err(Error::MissingEdge(2, 0))));
        let dup = Tiebreaker::from_pairs(&g, &[(0, 1), (0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(validate_tiebreaker(&g, &dup), Err(Error::DuplicateEdge(0, 1))));
        assert!(matches!(
            Tiebreaker::from_pairs(&g, &[(1, 0)]),
            Err(Error::EdgeNotInGraph(1, 0))
        ));
    }

    #[test]
    fn river_on_three_cycle() {
        let g = cycle321();
        let d = river(&g, &Tiebreaker::canonical(&g)).unwrap();
        assert_eq!(d.winner(), 0);
        assert_eq!(pairs(&d.edges()), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn river_branching_rejection() {
        let g = MarginGraph::from_edges(3, &[(0, 1, 3), (2, 1, 2), (0, 2, 1)]).unwrap();
        let d = river(&g, &Tiebreaker::canonical(&g)).unwrap();
        assert_eq!(d.winner(), 0);
        assert_eq!(pairs(&d.edges()), vec![(0, 1), (0, 2)]);

        let rp = ranked_pairs(&g, &Tiebreaker::canonical(&g)).unwrap();
        assert_eq!(rp.winner, 0);
        assert_eq!(pairs(&rp.locked), vec![(0, 1), (0, 2), (2, 1)]);
    }

    #[test]
    fn ranked_pairs_on_three_cycle() {
        let g = cycle321();
        let rp = ranked_pairs(&g, &Tiebreaker::canonical(&g)).unwrap();
        assert_eq!(rp.winner, 0);
        assert_eq!(pairs(&rp.locked), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn condorcet_star_wins_everywhere() {
        // 0 beats everyone; the rest form a cycle of equal margins
        let g =
            MarginGraph::from_edges(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (2, 3, 1), (3, 1, 1)]).unwrap();
        for perm in crate::oracle::enumerate_universes(&g) {
            assert_eq!(river(&g, &perm).unwrap().winner(), 0);
            assert_eq!(ranked_pairs(&g, &perm).unwrap().winner, 0);
        }
    }

    #[test]
    fn non_strict_rejected() {
        let g = MarginGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        let t = Tiebreaker::canonical(&g);
        assert!(matches!(river(&g, &t), Err(Error::NonStrictMarginGraph)));
        assert!(matches!(ranked_pairs(&g, &t), Err(Error::NonStrictMarginGraph)));
    }

    #[test]
    fn tiebreaker_text_format() {
        let g = cycle321();
        let t = Tiebreaker::parse(&g, "a>b\n# comment\nb>c\nc>a\n").unwrap();
        assert_eq!(t, Tiebreaker::canonical(&g));
        assert_eq!(t.to_text(&g), "a>b\nb>c\nc>a\n");
        assert!(matches!(
            Tiebreaker::parse(&g, "a>b\nb>c\n"),
            Err(Error::MissingEdge(2, 0))
        ));
        assert!(matches!(
            Tiebreaker::parse(&g, "a-b\n"),
            Err(Error::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            Tiebreaker::parse(&g, "a>q\n"),
            Err(Error::UnknownAlternative { line: 1, .. })
        ));
    }

    #[test]
    fn replay_is_deterministic_and_spanning() {
        let g = MarginGraph::from_edges(
            5,
            &[
                (0, 1, 2),
                (1, 2, 2),
                (2, 0, 2),
                (3, 0, 4),
                (1, 3, 4),
                (4, 0, 2),
                (1, 4, 2),
                (2, 3, 2),
                (4, 2, 4),
                (3, 4, 2),
            ],
        )
        .unwrap();
        for t in crate::oracle::enumerate_universes(&g) {
            let a = river(&g, &t).unwrap();
            let b = river(&g, &t).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.edges().len(), g.m() - 1);
        }
    }

    #[test]
    fn diagram_json() {
        let g = cycle321();
        let d = river(&g, &Tiebreaker::canonical(&g)).unwrap();
        let json = serde_json::to_string(&d.to_json(&g)).unwrap();
        assert_eq!(json, r#"{"root":"a","edges":[["a","b",3],["b","c",2]]}"#);
    }
}
