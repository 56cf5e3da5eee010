//! Split Cycle and Beat Path, both read off the strongest-path matrix.

use std::collections::BTreeSet;

use crate::graph::MarginGraph;
use crate::profile::AltId;

/// Alternatives whose every majority defeat `y → x` is answered by an
/// `x → y` path at least as strong.
pub fn immune_alternatives(g: &MarginGraph) -> BTreeSet<AltId> {
    let s = g.strongest_paths();
    let m = g.m();
    (0..m)
        .filter(|&x| (0..m).all(|y| g.margin(y, x) <= 0 || s[x][y] >= g.margin(y, x)))
        .collect()
}

/// Split Cycle selects exactly the immune alternatives.
pub fn split_cycle_winners(g: &MarginGraph) -> BTreeSet<AltId> {
    immune_alternatives(g)
}

/// Schulze winners with margin strengths.
pub fn beat_path_winners(g: &MarginGraph) -> BTreeSet<AltId> {
    let s = g.strongest_paths();
    let m = g.m();
    (0..m)
        .filter(|&x| (0..m).all(|y| y == x || s[x][y] >= s[y][x]))
        .collect()
}
