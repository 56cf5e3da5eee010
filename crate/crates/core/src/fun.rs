//! The fused-universe diagram.
//!
//! One pass over the positive margin edges in descending order simulates River
//! for every tiebreaker at once. Each accepted edge carries an [`EdgeState`]
//! describing in which universes it can appear; vertex states derived from the
//! incoming edge states decide who wins in at least one universe.
//!
//! Per edge `(x, y)` with margin `k` the loop runs:
//!
//! 1. the branching reject check: `y` is fixedly dominated by an edge of
//!    margin `> k`;
//! 2. the cycle reject check: every vertex that reaches `x` strongly enough is
//!    also reached from `y` along paths whose cycle-choice edges cannot be
//!    bypassed without going through `y`;
//! 3. the tentative state from the current state of `y`;
//! 4. the cycle update check, which turns every margin-`k` edge on a cycle
//!    closed by `(x, y)` into a cycle choice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs, Edge, MarginGraph, WeightedDigraph};
use crate::profile::AltId;
use crate::river::{validate_tiebreaker, Tiebreaker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeState {
    /// Present in every universe.
    Fix,
    /// Branching choice: a partner edge of the same margin into the same target.
    #[serde(rename = "BC")]
    BranchingChoice,
    /// Cycle choice: a path back from the target may be added instead.
    #[serde(rename = "CC")]
    CycleChoice,
    /// Branching choice that depends on a stronger cycle-choice edge.
    #[serde(rename = "CBC")]
    CycleBranchingChoice,
}

impl EdgeState {
    pub fn short(self) -> &'static str {
        match self {
            EdgeState::Fix => "Fix",
            EdgeState::BranchingChoice => "BC",
            EdgeState::CycleChoice => "CC",
            EdgeState::CycleBranchingChoice => "CBC",
        }
    }
}

impl fmt::Display for EdgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexState {
    NotDominated,
    FixedlyDominated,
    CycleDominated,
}

impl VertexState {
    pub fn is_winner(self) -> bool {
        !matches!(self, VertexState::FixedlyDominated)
    }
}

impl fmt::Display for VertexState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexState::NotDominated => "NotDominated",
            VertexState::FixedlyDominated => "FixedlyDominated",
            VertexState::CycleDominated => "CycleDominated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunEdge {
    pub edge: Edge,
    pub state: EdgeState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    Branching,
    Cycle,
}

/// Subgraph of the margin graph holding every edge that survives in at least
/// one universe (possibly more), with per-edge states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunDiagram {
    m: usize,
    edges: Vec<FunEdge>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    rejected: Vec<(Edge, Rejection)>,
}

impl FunDiagram {
    fn empty(m: usize) -> Self {
        Self {
            m,
            edges: Vec::new(),
            incoming: vec![Vec::new(); m],
            outgoing: vec![Vec::new(); m],
            rejected: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Diagram edges in insertion order.
    pub fn edges(&self) -> &[FunEdge] {
        &self.edges
    }

    /// Edges rejected from every universe, with the check that rejected them.
    pub fn rejected(&self) -> &[(Edge, Rejection)] {
        &self.rejected
    }

    pub fn state(&self, x: AltId, y: AltId) -> Option<EdgeState> {
        self.incoming[y]
            .iter()
            .map(|&i| &self.edges[i])
            .find(|e| e.edge.from == x)
            .map(|e| e.state)
    }

    pub fn contains(&self, x: AltId, y: AltId) -> bool {
        self.state(x, y).is_some()
    }

    pub fn incoming(&self, v: AltId) -> impl Iterator<Item = &FunEdge> + '_ {
        self.incoming[v].iter().map(move |&i| &self.edges[i])
    }

    pub fn outgoing(&self, v: AltId) -> impl Iterator<Item = &FunEdge> + '_ {
        self.outgoing[v].iter().map(move |&i| &self.edges[i])
    }

    /// Classification of `v` from its incoming edges alone.
    pub fn vertex_state(&self, v: AltId) -> VertexState {
        let mut any = false;
        for e in self.incoming(v) {
            any = true;
            if e.state != EdgeState::CycleChoice {
                return VertexState::FixedlyDominated;
            }
        }
        if any {
            VertexState::CycleDominated
        } else {
            VertexState::NotDominated
        }
    }

    pub fn vertex_states(&self) -> Vec<VertexState> {
        (0..self.m).map(|v| self.vertex_state(v)).collect()
    }

    /// Alternatives that are not dominated or cycle dominated.
    pub fn winners(&self) -> BTreeSet<AltId> {
        (0..self.m).filter(|&v| self.vertex_state(v).is_winner()).collect()
    }

    #[cfg(test)]
    pub(crate) fn from_states(m: usize, edges: &[(Edge, EdgeState)]) -> Self {
        let mut d = Self::empty(m);
        for &(e, s) in edges {
            d.add(e, s);
        }
        d
    }

    fn add(&mut self, edge: Edge, state: EdgeState) -> usize {
        let idx = self.edges.len();
        self.edges.push(FunEdge { edge, state });
        self.incoming[edge.to].push(idx);
        self.outgoing[edge.from].push(idx);
        idx
    }

    fn reach_forward(&self, start: AltId, keep: impl Fn(&FunEdge) -> bool) -> Vec<bool> {
        bfs(self.m, start, |v| {
            let next: Vec<AltId> = self.outgoing(v).filter(|e| keep(e)).map(|e| e.edge.to).collect();
            next
        })
    }

    fn reach_reverse(&self, start: AltId, keep: impl Fn(&FunEdge) -> bool) -> Vec<bool> {
        bfs(self.m, start, |v| {
            let next: Vec<AltId> = self.incoming(v).filter(|e| keep(e)).map(|e| e.edge.from).collect();
            next
        })
    }

    /// Whether the cycle-choice edge `(c, d)` has a `d → c` path of strength
    /// at least its own margin that avoids `y` entirely.
    fn bypasses(&self, cc: &FunEdge, y: AltId) -> bool {
        let (c, d) = cc.edge.pair();
        if c == y || d == y {
            return false;
        }
        let seen = self.reach_forward(d, |e| {
            e.edge.margin >= cc.edge.margin && e.edge.from != y && e.edge.to != y
        });
        seen[c]
    }

    fn cycle_reject(&self, x: AltId, y: AltId, k: i64) -> bool {
        let strong = |e: &FunEdge| e.edge.margin > k;
        if !self.reach_forward(y, strong)[x] {
            return false;
        }
        let reaches_x = self.reach_reverse(x, strong);

        // Membership in E' is only needed for the cycle-choice edges this
        // search actually tries to cross; the memo lives for one candidate.
        let mut bypass: HashMap<usize, bool> = HashMap::new();
        let mut reached = vec![false; self.m];
        let mut stack = vec![y];
        reached[y] = true;
        while let Some(v) = stack.pop() {
            for &i in &self.outgoing[v] {
                let e = &self.edges[i];
                if e.edge.margin <= k || reached[e.edge.to] {
                    continue;
                }
                if e.state == EdgeState::CycleChoice && *bypass.entry(i).or_insert_with(|| self.bypasses(e, y)) {
                    continue;
                }
                reached[e.edge.to] = true;
                stack.push(e.edge.to);
            }
        }
        (0..self.m).all(|u| !reaches_x[u] || reached[u])
    }

    fn process(&mut self, edge: Edge) {
        let Edge {
            from: x,
            to: y,
            margin: k,
        } = edge;
        let y_state = self.vertex_state(y);
        let stronger_into_y = self.incoming(y).any(|e| e.edge.margin > k);

        // Only stronger edges have settled states; a margin-k edge may still
        // turn CC later in this block.
        if self
            .incoming(y)
            .any(|e| e.edge.margin > k && e.state != EdgeState::CycleChoice)
        {
            self.rejected.push((edge, Rejection::Branching));
            return;
        }
        if self.cycle_reject(x, y, k) {
            self.rejected.push((edge, Rejection::Cycle));
            return;
        }

        let state = match y_state {
            VertexState::NotDominated => EdgeState::Fix,
            _ if stronger_into_y => EdgeState::CycleBranchingChoice,
            VertexState::CycleDominated => EdgeState::BranchingChoice,
            VertexState::FixedlyDominated => {
                for &i in &self.incoming[y] {
                    if self.edges[i].state == EdgeState::Fix {
                        self.edges[i].state = EdgeState::BranchingChoice;
                    }
                }
                EdgeState::BranchingChoice
            }
        };
        let idx = self.add(edge, state);

        let from_y = self.reach_forward(y, |_| true);
        if !from_y[x] {
            return;
        }
        let to_x = self.reach_reverse(x, |_| true);
        self.edges[idx].state = EdgeState::CycleChoice;
        for e in &mut self.edges {
            if from_y[e.edge.from] && to_x[e.edge.to] && e.edge.margin == k {
                e.state = EdgeState::CycleChoice;
            }
        }
    }

    pub fn to_json(&self, g: &MarginGraph) -> FunDiagramJson {
        let mut edges: Vec<&FunEdge> = self.edges.iter().collect();
        edges.sort_by_key(|e| crate::graph::canonical_key(&e.edge));
        FunDiagramJson {
            edges: edges
                .iter()
                .map(|e| {
                    (
                        g.name(e.edge.from).to_string(),
                        g.name(e.edge.to).to_string(),
                        e.edge.margin,
                        e.state,
                    )
                })
                .collect(),
            vertex_states: (0..self.m)
                .map(|v| (g.name(v).to_string(), self.vertex_state(v)))
                .collect(),
            winners: self.winners().iter().map(|&v| g.name(v).to_string()).collect(),
        }
    }

    /// Graphviz rendering: edge style by edge state, node shape by vertex state.
    pub fn to_dot(&self, g: &MarginGraph) -> String {
        let mut out = String::from("digraph fun {\n  rankdir=TB;\n");
        for v in 0..self.m {
            let (shape, style) = match self.vertex_state(v) {
                VertexState::NotDominated => ("doublecircle", "bold"),
                VertexState::FixedlyDominated => ("circle", "solid"),
                VertexState::CycleDominated => ("doubleoctagon", "bold"),
            };
            let _ = writeln!(
                out,
                "  \"{}\" [shape={shape}, style={style}, tooltip=\"{}\"];",
                escape(g.name(v)),
                self.vertex_state(v)
            );
        }
        let mut edges: Vec<&FunEdge> = self.edges.iter().collect();
        edges.sort_by_key(|e| crate::graph::canonical_key(&e.edge));
        for e in edges {
            let (color, style) = match e.state {
                EdgeState::Fix => ("black", "solid"),
                EdgeState::BranchingChoice => ("blue", "dashed"),
                EdgeState::CycleChoice => ("red", "dotted"),
                EdgeState::CycleBranchingChoice => ("purple", "dashed"),
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{} {}\", color={color}, style={style}];",
                escape(g.name(e.edge.from)),
                escape(g.name(e.edge.to)),
                e.edge.margin,
                e.state
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape(name: &str) -> String {
    name.replace('\\', "\\\\").replace('"', "\\\"")
}

impl WeightedDigraph for FunDiagram {
    fn vertex_count(&self) -> usize {
        self.m
    }

    fn out_edges(&self, v: AltId) -> Box<dyn Iterator<Item = Edge> + '_> {
        Box::new(self.outgoing(v).map(|e| e.edge))
    }

    fn in_edges(&self, v: AltId) -> Box<dyn Iterator<Item = Edge> + '_> {
        Box::new(self.incoming(v).map(|e| e.edge))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunDiagramJson {
    pub edges: Vec<(String, String, i64, EdgeState)>,
    pub vertex_states: BTreeMap<String, VertexState>,
    pub winners: Vec<String>,
}

/// Builds the fused-universe diagram, processing equal-margin edges in the
/// canonical `(from, to)` order.
pub fn fun_diagram(g: &MarginGraph) -> Result<FunDiagram> {
    g.require_strict()?;
    Ok(build(g.m(), &g.positive_edges()))
}

/// Builds the diagram processing edges in the given descending order.
pub fn fun_diagram_with_order(g: &MarginGraph, order: &Tiebreaker) -> Result<FunDiagram> {
    g.require_strict()?;
    validate_tiebreaker(g, order).map_err(|e| Error::BadEdgeOrder(e.to_string()))?;
    Ok(build(g.m(), order.edges()))
}

fn build(m: usize, order: &[Edge]) -> FunDiagram {
    let mut d = FunDiagram::empty(m);
    for &e in order {
        d.process(e);
    }
    d
}

/// The parallel-universe River winners.
pub fn rv_put_winners(g: &MarginGraph) -> Result<BTreeSet<AltId>> {
    Ok(fun_diagram(g)?.winners())
}

/// A descending edge order whose equal-margin blocks are shuffled with `seed`.
pub fn shuffled_tie_order(g: &MarginGraph, seed: u64) -> Tiebreaker {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = g.positive_edges();
    for block in edges.chunk_by_mut(|a, b| a.margin == b.margin) {
        block.shuffle(&mut rng);
    }
    Tiebreaker::from_edges(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal_cycle() -> MarginGraph {
        MarginGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap()
    }

    fn cycle321() -> MarginGraph {
        MarginGraph::from_edges(3, &[(0, 1, 3), (1, 2, 2), (2, 0, 1)]).unwrap()
    }

    #[test]
    fn equal_cycle_all_cycle_choice() {
        let d = fun_diagram(&equal_cycle()).unwrap();
        assert_eq!(d.edges().len(), 3);
        assert!(d.edges().iter().all(|e| e.state == EdgeState::CycleChoice));
        assert!(d.vertex_states().iter().all(|&s| s == VertexState::CycleDominated));
        assert_eq!(d.winners(), BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn unique_maximum_is_fix() {
        let d = fun_diagram(&cycle321()).unwrap();
        assert_eq!(d.state(0, 1), Some(EdgeState::Fix));
        assert_eq!(d.state(1, 2), Some(EdgeState::Fix));
        assert_eq!(d.state(2, 0), None);
        assert_eq!(d.rejected(), &[(Edge::new(2, 0, 1), Rejection::Cycle)]);
        assert_eq!(d.vertex_state(0), VertexState::NotDominated);
        assert_eq!(d.vertex_state(1), VertexState::FixedlyDominated);
        assert_eq!(d.vertex_state(2), VertexState::FixedlyDominated);
        assert_eq!(rv_put_winners(&cycle321()).unwrap(), BTreeSet::from([0]));
    }

    #[test]
    fn weaker_edge_into_branching_target_rejected() {
        // x=0, z=1, y=2, w=3; two margin-10 edges into y, then a margin-5 one.
        let g =
            MarginGraph::from_edges(4, &[(0, 2, 10), (1, 2, 10), (3, 2, 5), (0, 1, 3), (0, 3, 3), (1, 3, 1)]).unwrap();
        let d = fun_diagram(&g).unwrap();
        assert_eq!(d.state(0, 2), Some(EdgeState::BranchingChoice));
        assert_eq!(d.state(1, 2), Some(EdgeState::BranchingChoice));
        assert!(d.rejected().contains(&(Edge::new(3, 2, 5), Rejection::Branching)));
    }

    #[test]
    fn condorcet_winner_alone() {
        let g =
            MarginGraph::from_edges(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 2, 1), (2, 3, 1), (3, 1, 1)]).unwrap();
        let d = fun_diagram(&g).unwrap();
        assert_eq!(d.winners(), BTreeSet::from([0]));
        assert_eq!(d.vertex_state(0), VertexState::NotDominated);
    }

    #[test]
    fn fix_edge_into_vertex_is_fixedly_dominated() {
        let d = fun_diagram(&MarginGraph::from_edges(2, &[(0, 1, 1)]).unwrap()).unwrap();
        assert_eq!(d.state(0, 1), Some(EdgeState::Fix));
        assert_eq!(d.vertex_state(1), VertexState::FixedlyDominated);
    }

    #[test]
    fn rejects_non_strict_and_bad_orders() {
        let g = MarginGraph::from_edges(3, &[(0, 1, 1)]).unwrap();
        assert!(matches!(fun_diagram(&g), Err(Error::NonStrictMarginGraph)));
        let g = cycle321();
        let bad = Tiebreaker::from_pairs(&g, &[(1, 2), (0, 1), (2, 0)]).unwrap();
        assert!(matches!(fun_diagram_with_order(&g, &bad), Err(Error::BadEdgeOrder(_))));
    }

    #[test]
    fn shuffles_stay_descending() {
        let g =
            MarginGraph::from_edges(4, &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 0, 3), (3, 1, 3), (2, 3, 1)]).unwrap();
        for seed in 0..10 {
            let t = shuffled_tie_order(&g, seed);
            validate_tiebreaker(&g, &t).unwrap();
            assert_eq!(
                fun_diagram_with_order(&g, &t).unwrap().winners(),
                fun_diagram(&g).unwrap().winners()
            );
        }
    }

    #[test]
    fn tentative_choice_edges_do_not_block() {
        // (b,f) is still CBC when (e,f) arrives; (f,d) later closes b→f→d→b and
        // settles it as CC, so e can win by taking f first
        let g = MarginGraph::from_edges(
            6,
            &[
                (0, 2, 5),
                (1, 0, 5),
                (2, 5, 5),
                (3, 2, 5),
                (5, 0, 5),
                (1, 5, 4),
                (2, 4, 4),
                (3, 1, 4),
                (4, 5, 4),
                (5, 3, 4),
                (2, 1, 3),
                (4, 0, 3),
                (0, 3, 2),
                (4, 3, 2),
                (4, 1, 1),
            ],
        )
        .unwrap();
        let d = fun_diagram(&g).unwrap();
        assert_eq!(d.state(1, 5), Some(EdgeState::CycleChoice));
        assert_eq!(d.winners(), BTreeSet::from([1, 3, 4, 5]));
    }

    #[test]
    fn json_and_dot() {
        let g = equal_cycle();
        let d = fun_diagram(&g).unwrap();
        let json = serde_json::to_string(&d.to_json(&g)).unwrap();
        assert_eq!(
            json,
            r#"{"edges":[["a","b",1,"CC"],["b","c",1,"CC"],["c","a",1,"CC"]],"vertex_states":{"a":"CycleDominated","b":"CycleDominated","c":"CycleDominated"},"winners":["a","b","c"]}"#
        );
        let dot = d.to_dot(&g);
        assert!(dot.starts_with("digraph fun {"));
        assert!(dot.trim_end().ends_with('}'));
        assert_eq!(dot.matches("->").count(), 3);
    }
}
