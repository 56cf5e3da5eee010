//! The margin graph kernel.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{default_names, AltId};

/// A directed weighted edge `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: AltId,
    pub to: AltId,
    pub margin: i64,
}

impl Edge {
    pub fn new(from: AltId, to: AltId, margin: i64) -> Self {
        Self { from, to, margin }
    }

    pub fn pair(&self) -> (AltId, AltId) {
        (self.from, self.to)
    }
}

/// Sort key for the canonical edge order: descending margin, then `(from, to)`.
pub(crate) fn canonical_key(e: &Edge) -> (std::cmp::Reverse<i64>, AltId, AltId) {
    (std::cmp::Reverse(e.margin), e.from, e.to)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Vertices reachable from the start.
    Forward,
    /// Vertices that reach the start.
    Reverse,
}

/// Anything with weighted directed adjacency; lets threshold searches run on
/// the margin graph and on its subgraphs alike.
pub trait WeightedDigraph {
    fn vertex_count(&self) -> usize;
    fn out_edges(&self, v: AltId) -> Box<dyn Iterator<Item = Edge> + '_>;
    fn in_edges(&self, v: AltId) -> Box<dyn Iterator<Item = Edge> + '_>;
}

/// Breadth-first search over an implicit graph given by `next`.
pub(crate) fn bfs<F, I>(m: usize, start: AltId, mut next: F) -> Vec<bool>
where
    F: FnMut(AltId) -> I,
    I: IntoIterator<Item = AltId>,
{
    let mut seen = vec![false; m];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        for w in next(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Vertices reachable from (or reaching, for [`Direction::Reverse`]) `start`
/// using only edges with margin strictly above `threshold`, skipping
/// `excluded` pairs. `start` is always part of the result.
pub fn reachable_above<G: WeightedDigraph + ?Sized>(
    g: &G,
    start: AltId,
    threshold: i64,
    direction: Direction,
    excluded: Option<&HashSet<(AltId, AltId)>>,
) -> BTreeSet<AltId> {
    let keep = |e: &Edge| e.margin > threshold && excluded.is_none_or(|x| !x.contains(&e.pair()));
    let seen = bfs(g.vertex_count(), start, |v| {
        let next: Vec<AltId> = match direction {
            Direction::Forward => g.out_edges(v).filter(keep).map(|e| e.to).collect(),
            Direction::Reverse => g.in_edges(v).filter(keep).map(|e| e.from).collect(),
        };
        next
    });
    seen.iter().enumerate().filter(|(_, &s)| s).map(|(v, _)| v).collect()
}

/// Complete antisymmetric weighted digraph of pairwise margins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginGraph {
    names: Vec<String>,
    margin: Vec<i64>,
    strict: bool,
}

impl MarginGraph {
    /// Builds a graph from a row-major `m × m` margin matrix.
    pub fn from_matrix(names: Vec<String>, margin: Vec<i64>) -> Result<Self> {
        let m = names.len();
        if margin.len() != m * m {
            return Err(Error::InvalidGraph(format!(
                "expected {} matrix entries, got {}",
                m * m,
                margin.len()
            )));
        }
        let mut strict = true;
        for x in 0..m {
            if margin[x * m + x] != 0 {
                return Err(Error::InvalidGraph(format!("non-zero diagonal entry for {x}")));
            }
            for y in 0..m {
                if margin[x * m + y] != -margin[y * m + x] {
                    return Err(Error::InvalidGraph(format!(
                        "margins of {x} and {y} are not antisymmetric"
                    )));
                }
                if x != y && margin[x * m + y] == 0 {
                    strict = false;
                }
            }
        }
        Ok(Self { names, margin, strict })
    }

    /// Builds a graph on `m` alternatives (named `a`, `b`, ...) from positive
    /// edges `(x, y, w)`. Pairs left out are ties.
    pub fn from_edges(m: usize, edges: &[(AltId, AltId, i64)]) -> Result<Self> {
        Self::from_named_edges(default_names(m), edges)
    }

    pub fn from_named_edges(names: Vec<String>, edges: &[(AltId, AltId, i64)]) -> Result<Self> {
        let m = names.len();
        let mut margin = vec![0i64; m * m];
        for &(x, y, w) in edges {
            if x >= m {
                return Err(Error::AlternativeOutOfRange(x));
            }
            if y >= m {
                return Err(Error::AlternativeOutOfRange(y));
            }
            if x == y {
                return Err(Error::SelfLoop(x));
            }
            if w <= 0 {
                return Err(Error::NonPositiveWeight {
                    from: x,
                    to: y,
                    weight: w,
                });
            }
            if margin[x * m + y] != 0 {
                return Err(Error::ConflictingEdge(x, y));
            }
            margin[x * m + y] = w;
            margin[y * m + x] = -w;
        }
        Self::from_matrix(names, margin)
    }

    pub fn m(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, x: AltId) -> &str {
        &self.names[x]
    }

    pub fn id_of(&self, name: &str) -> Option<AltId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn margin(&self, x: AltId, y: AltId) -> i64 {
        self.margin[x * self.m() + y]
    }

    /// True when no pair of distinct alternatives is tied.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn require_strict(&self) -> Result<()> {
        if self.strict {
            Ok(())
        } else {
            Err(Error::NonStrictMarginGraph)
        }
    }

    /// All positive-margin edges, descending by margin, ties by `(x, y)`.
    pub fn positive_edges(&self) -> Vec<Edge> {
        let m = self.m();
        let mut edges: Vec<Edge> = (0..m)
            .flat_map(|x| (0..m).map(move |y| (x, y)))
            .filter(|&(x, y)| self.margin(x, y) > 0)
            .map(|(x, y)| Edge::new(x, y, self.margin(x, y)))
            .collect();
        edges.sort_by_key(canonical_key);
        edges
    }

    pub fn is_positive_edge(&self, x: AltId, y: AltId) -> bool {
        x < self.m() && y < self.m() && self.margin(x, y) > 0
    }

    /// Maximin strongest-path strengths. Entry `[x][y]` is the largest
    /// strength of a majority path `x → y`, or 0 when there is none.
    pub fn strongest_paths(&self) -> Vec<Vec<i64>> {
        let m = self.m();
        let mut s = vec![vec![0i64; m]; m];
        for (x, row) in s.iter_mut().enumerate() {
            for (y, cell) in row.iter_mut().enumerate() {
                *cell = self.margin(x, y).max(0);
            }
        }
        for z in 0..m {
            for x in 0..m {
                if x == z || s[x][z] == 0 {
                    continue;
                }
                for y in 0..m {
                    if y == x || y == z {
                        continue;
                    }
                    let via = s[x][z].min(s[z][y]);
                    if via > s[x][y] {
                        s[x][y] = via;
                    }
                }
            }
        }
        s
    }

    pub fn condorcet_winner(&self) -> Option<AltId> {
        let m = self.m();
        (0..m).find(|&x| (0..m).all(|y| y == x || self.margin(x, y) > 0))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            m: self.m(),
            names: Some(self.names.clone()),
            edges: self.positive_edges().iter().map(|e| (e.from, e.to, e.margin)).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let names = match &json.names {
            Some(names) if names.len() != json.m => {
                return Err(Error::InvalidGraph(format!(
                    "{} names given for m = {}",
                    names.len(),
                    json.m
                )))
            }
            Some(names) => names.clone(),
            None => default_names(json.m),
        };
        let mut distinct = HashSet::new();
        if !names.iter().all(|n| distinct.insert(n.as_str())) {
            return Err(Error::InvalidGraph("duplicate alternative names".into()));
        }
        Self::from_named_edges(names, &json.edges)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

impl WeightedDigraph for MarginGraph {
    fn vertex_count(&self) -> usize {
        self.m()
    }

    fn out_edges(&self, v: AltId) -> Box<dyn Iterator<Item = Edge> + '_> {
        Box::new(
            (0..self.m())
                .filter(move |&y| self.margin(v, y) > 0)
                .map(move |y| Edge::new(v, y, self.margin(v, y))),
        )
    }

    fn in_edges(&self, v: AltId) -> Box<dyn Iterator<Item = Edge> + '_> {
        Box::new(
            (0..self.m())
                .filter(move |&x| self.margin(x, v) > 0)
                .map(move |x| Edge::new(x, v, self.margin(x, v))),
        )
    }
}

/// Wire form of a margin graph: only positive-margin edges are listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    pub edges: Vec<(AltId, AltId, i64)>,
}

/// A majority path: distinct vertices joined by positive margins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPath {
    vertices: Vec<AltId>,
    strength: i64,
}

impl MPath {
    /// Returns `None` unless `vertices` has at least two distinct entries and
    /// every consecutive margin is positive.
    pub fn new(g: &MarginGraph, vertices: Vec<AltId>) -> Option<Self> {
        if vertices.len() < 2 || vertices.iter().any(|&v| v >= g.m()) {
            return None;
        }
        let mut distinct = HashSet::new();
        if !vertices.iter().all(|v| distinct.insert(*v)) {
            return None;
        }
        let strength = vertices.windows(2).map(|w| g.margin(w[0], w[1])).min()?;
        (strength > 0).then_some(Self { vertices, strength })
    }

    pub fn vertices(&self) -> &[AltId] {
        &self.vertices
    }

    pub fn strength(&self) -> i64 {
        self.strength
    }
}
