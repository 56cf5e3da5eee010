//! Winning certificates extracted from the fused-universe diagram.
//!
//! For an alternative `a`, a maximum-margin Prim search grown from `a` inside
//! the diagram gives a tree. Ordering each equal-margin block so that tree
//! edges come first yields a tiebreaker; when `a` is a winner, River under
//! that tiebreaker rebuilds exactly the tree.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fun::{fun_diagram, FunDiagram};
use crate::graph::{Edge, MarginGraph};
use crate::profile::AltId;
use crate::river::{river, Tiebreaker};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateTree {
    root: AltId,
    parent: Vec<Option<(AltId, i64)>>,
}

impl CertificateTree {
    pub fn root(&self) -> AltId {
        self.root
    }

    pub fn parent(&self, v: AltId) -> Option<(AltId, i64)> {
        self.parent[v]
    }

    /// Tree edges, sorted by `(from, to)`.
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

    pub fn contains(&self, x: AltId, y: AltId) -> bool {
        matches!(self.parent[y], Some((p, _)) if p == x)
    }

    pub fn spans(&self) -> bool {
        (0..self.parent.len()).all(|v| v == self.root || self.parent[v].is_some())
    }

    /// The tree path from the root to `v`, if `v` is in the tree.
    pub fn path_to(&self, v: AltId) -> Option<Vec<AltId>> {
        let mut path = vec![v];
        let mut cur = v;
        while cur != self.root {
            cur = self.parent[cur]?.0;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

/// Grows a tree from `a` by repeatedly taking a maximum-margin diagram edge
/// leaving the tree; ties go to the smallest `(from, to)`.
pub fn directed_max_prim(d: &FunDiagram, a: AltId) -> CertificateTree {
    let m = d.m();
    let mut in_tree = vec![false; m];
    let mut parent = vec![None; m];
    let mut heap = BinaryHeap::new();
    let push_from = |v: AltId, heap: &mut BinaryHeap<_>| {
        for e in d.outgoing(v) {
            heap.push((e.edge.margin, Reverse((e.edge.from, e.edge.to))));
        }
    };
    in_tree[a] = true;
    push_from(a, &mut heap);
    while let Some((margin, Reverse((u, v)))) = heap.pop() {
        if in_tree[v] {
            continue;
        }
        in_tree[v] = true;
        parent[v] = Some((u, margin));
        push_from(v, &mut heap);
    }
    CertificateTree { root: a, parent }
}

/// All positive edges of `g` by descending margin; within a margin, tree
/// edges first, then `(from, to)`.
pub fn certificate_tiebreaker(g: &MarginGraph, t: &CertificateTree) -> Result<Tiebreaker> {
    let tree: HashSet<(AltId, AltId)> = t.edges().iter().map(Edge::pair).collect();
    for &(x, y) in &tree {
        if !g.is_positive_edge(x, y) {
            return Err(Error::EdgeNotInGraph(x, y));
        }
    }
    let mut order = g.positive_edges();
    order.sort_by_key(|e| (Reverse(e.margin), !tree.contains(&e.pair()), e.from, e.to));
    Ok(Tiebreaker::from_edges(order))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub winner: AltId,
    pub tree: CertificateTree,
    pub tiebreaker: Tiebreaker,
    pub verified: bool,
}

impl Certificate {
    pub fn to_json(&self, g: &MarginGraph) -> CertificateJson {
        CertificateJson {
            winner: g.name(self.winner).to_string(),
            tree: self
                .tree
                .edges()
                .iter()
                .map(|e| (g.name(e.from).to_string(), g.name(e.to).to_string(), e.margin))
                .collect(),
            tiebreaker: self
                .tiebreaker
                .edges()
                .iter()
                .map(|e| (g.name(e.from).to_string(), g.name(e.to).to_string()))
                .collect(),
            verified: self.verified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub winner: String,
    pub tree: Vec<(String, String, i64)>,
    pub tiebreaker: Vec<(String, String)>,
    pub verified: bool,
}

/// Builds the certificate for `a` against an existing diagram of `g`.
pub fn certificate_from_diagram(g: &MarginGraph, d: &FunDiagram, a: AltId) -> Result<Certificate> {
    g.require_strict()?;
    if a >= g.m() {
        return Err(Error::AlternativeOutOfRange(a));
    }
    let tree = directed_max_prim(d, a);
    let tiebreaker = certificate_tiebreaker(g, &tree)?;
    let replay = river(g, &tiebreaker)?;
    let verified = replay.winner() == a && replay.edges() == tree.edges();
    Ok(Certificate {
        winner: a,
        tree,
        tiebreaker,
        verified,
    })
}

/// Computes the diagram, the certificate tree and tiebreaker for `a`, and
/// replays River under it. `verified` holds iff the replay rebuilds the tree
/// edge for edge with `a` as the winner.
pub fn verify_certificate(g: &MarginGraph, a: AltId) -> Result<Certificate> {
    let d = fun_diagram(g)?;
    certificate_from_diagram(g, &d, a)
}
