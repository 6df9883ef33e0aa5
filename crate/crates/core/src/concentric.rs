//! Concentric symmetry.
//!
//! Around a center node, breadth-first levels `0..=h` define the concentric
//! pattern. The pattern is transformed in one of two ways before a walker is
//! released from the center:
//!
//! * **backbone**: edges joining two nodes of the same level are deleted;
//! * **merged**: every connected component of a level's intra-level subgraph
//!   is collapsed into one super-node, and the weight between two super-nodes
//!   on consecutive levels counts the original edges between them.
//!
//! The walker only ever moves outward, one level per step, splitting its
//! probability over outgoing edges in proportion to their weights. A
//! (super-)node below level `h` with no outward edge is a dead end and keeps
//! its mass. With `p_k` the terminal masses,
//!
//! ```text
//! S_h = exp(-Σ p_k ln p_k) / (|super-nodes at level h| + Σ_{r<h} dead_ends(r))
//! ```
//!
//! so `S_h = 1` exactly when every outcome is equally likely.
//!
//! Two independent code paths compute this. The explicit pipeline
//! ([`extract_pattern`], [`backbone_transform`] / [`merged_transform`],
//! [`propagate`]) materializes every intermediate structure and backs
//! [`symmetry`]. [`SymmetryEngine`] fuses the same sweep into reusable scratch
//! buffers and backs [`symmetry_all`], which is what whole-network runs use.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wan::{NodeId, WordNetwork};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryKind {
    Backbone,
    Merged,
}

impl SymmetryKind {
    pub const ALL: [SymmetryKind; 2] = [SymmetryKind::Backbone, SymmetryKind::Merged];

    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryKind::Backbone => "backbone",
            SymmetryKind::Merged => "merged",
        }
    }
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SymmetryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "backbone" | "b" => Ok(SymmetryKind::Backbone),
            "merged" | "m" => Ok(SymmetryKind::Merged),
            other => Err(Error::InvalidInput(format!(
                "unknown symmetry kind `{other}` (expected backbone or merged)"
            ))),
        }
    }
}

/// Node-centered subgraph of everything within `h` hops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcentricPattern {
    pub center: NodeId,
    pub h: usize,
    /// `levels[r]` holds the nodes at distance exactly `r`, sorted by id.
    /// Always `h + 1` entries; trailing levels may be empty.
    pub levels: Vec<Vec<NodeId>>,
    /// `intra_edges[r]`: edges inside level `r`, as `(low, high)` ids.
    pub intra_edges: Vec<Vec<(NodeId, NodeId)>>,
    /// `inter_edges[r]`: edges from level `r` to level `r + 1`.
    pub inter_edges: Vec<Vec<(NodeId, NodeId)>>,
}

/// Index of a super-node within its level of a [`TransformedPattern`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub level: usize,
    pub super_node: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformedPattern {
    pub kind: SymmetryKind,
    pub h: usize,
    /// `super_nodes[r][s]` lists the original members of super-node `s` at level `r`.
    pub super_nodes: Vec<Vec<Vec<NodeId>>>,
    /// `weighted_inter_edges[r]`: `(super-node at r, super-node at r + 1, weight)`.
    pub weighted_inter_edges: Vec<Vec<(usize, usize, u32)>>,
    /// Dead ends per level `0..h`.
    pub dead_end_count: Vec<usize>,
}

impl TransformedPattern {
    pub fn members(&self, outcome: Outcome) -> &[NodeId] {
        &self.super_nodes[outcome.level][outcome.super_node]
    }

    /// Denominator of the symmetry ratio.
    pub fn outcome_count(&self) -> usize {
        self.super_nodes[self.h].len() + self.dead_end_count.iter().sum::<usize>()
    }

    pub fn inter_weight(&self, r: usize) -> u64 {
        self.weighted_inter_edges[r]
            .iter()
            .map(|&(_, _, w)| w as u64)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionDistribution {
    /// Terminal outcomes in level order, dead ends included.
    pub terminal_mass: Vec<(Outcome, f64)>,
}

impl TransitionDistribution {
    pub fn total_mass(&self) -> f64 {
        self.terminal_mass.iter().map(|(_, p)| p).sum()
    }

    /// `-Σ p ln p` with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        entropy(self.terminal_mass.iter().map(|&(_, p)| p))
    }
}

fn entropy(masses: impl IntoIterator<Item = f64>) -> f64 {
    masses
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryValue {
    pub node: NodeId,
    pub kind: SymmetryKind,
    pub h: usize,
    /// `None` for an isolated center, which has no walk at all.
    pub value: Option<f64>,
}

fn check_args(net: &WordNetwork, center: NodeId, h: usize) -> Result<()> {
    if h == 0 {
        return Err(Error::InvalidLevel(h));
    }
    if !net.contains(center) {
        return Err(Error::UnknownNode(center.0));
    }
    Ok(())
}

pub fn extract_pattern(net: &WordNetwork, center: NodeId, h: usize) -> Result<ConcentricPattern> {
    check_args(net, center, h)?;
    let mut dist: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut levels: Vec<Vec<NodeId>> = vec![Vec::new(); h + 1];
    dist.insert(center, 0);
    levels[0].push(center);
    for r in 0..h {
        let mut next = Vec::new();
        for &u in &levels[r] {
            for &v in net.neighbors(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(r + 1);
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        levels[r + 1] = next;
    }

    let mut intra_edges = vec![Vec::new(); h + 1];
    let mut inter_edges = vec![Vec::new(); h];
    for (r, level) in levels.iter().enumerate() {
        for &u in level {
            for &v in net.neighbors(u) {
                let Some(&dv) = dist.get(&v) else {
                    continue;
                };
                if dv == r && u < v {
                    intra_edges[r].push((u, v));
                } else if dv == r + 1 {
                    inter_edges[r].push((u, v));
                } else {
                    debug_assert!(dv + 1 >= r && dv <= r + 1, "edge skips a level");
                }
            }
        }
    }
    Ok(ConcentricPattern {
        center,
        h,
        levels,
        intra_edges,
        inter_edges,
    })
}

fn count_dead_ends(
    super_counts: &[usize],
    edges: &[Vec<(usize, usize, u32)>],
    h: usize,
) -> Vec<usize> {
    (0..h)
        .map(|r| {
            let mut has_out = vec![false; super_counts[r]];
            for &(a, _, _) in &edges[r] {
                has_out[a] = true;
            }
            has_out.iter().filter(|&&x| !x).count()
        })
        .collect()
}

fn position_map(levels: &[Vec<NodeId>]) -> BTreeMap<NodeId, usize> {
    levels
        .iter()
        .flat_map(|level| level.iter().enumerate().map(|(i, &u)| (u, i)))
        .collect()
}

pub fn backbone_transform(p: &ConcentricPattern) -> TransformedPattern {
    let pos = position_map(&p.levels);
    let super_nodes: Vec<Vec<Vec<NodeId>>> = p
        .levels
        .iter()
        .map(|level| level.iter().map(|&u| vec![u]).collect())
        .collect();
    let weighted_inter_edges: Vec<Vec<(usize, usize, u32)>> = p
        .inter_edges
        .iter()
        .map(|edges| edges.iter().map(|(u, v)| (pos[u], pos[v], 1)).collect())
        .collect();
    let counts: Vec<usize> = super_nodes.iter().map(Vec::len).collect();
    let dead_end_count = count_dead_ends(&counts, &weighted_inter_edges, p.h);
    TransformedPattern {
        kind: SymmetryKind::Backbone,
        h: p.h,
        super_nodes,
        weighted_inter_edges,
        dead_end_count,
    }
}

/// Union-find over `0..n` with path halving.
struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, which keeps roots independent of edge order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

pub fn merged_transform(p: &ConcentricPattern) -> TransformedPattern {
    let pos = position_map(&p.levels);
    // For each level: component label of each position, then super-node lists
    // ordered by their smallest member.
    let mut group_of: Vec<Vec<usize>> = Vec::with_capacity(p.levels.len());
    let mut super_nodes: Vec<Vec<Vec<NodeId>>> = Vec::with_capacity(p.levels.len());
    for (r, level) in p.levels.iter().enumerate() {
        let mut sets = DisjointSets::new(level.len());
        for (u, v) in &p.intra_edges[r] {
            sets.union(pos[u], pos[v]);
        }
        let mut root_to_group: BTreeMap<usize, usize> = BTreeMap::new();
        let mut groups: Vec<Vec<NodeId>> = Vec::new();
        let mut labels = Vec::with_capacity(level.len());
        for (i, &u) in level.iter().enumerate() {
            let root = sets.find(i);
            let g = *root_to_group.entry(root).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[g].push(u);
            labels.push(g);
        }
        group_of.push(labels);
        super_nodes.push(groups);
    }

    let weighted_inter_edges: Vec<Vec<(usize, usize, u32)>> = p
        .inter_edges
        .iter()
        .enumerate()
        .map(|(r, edges)| {
            let mut w: BTreeMap<(usize, usize), u32> = BTreeMap::new();
            for (u, v) in edges {
                *w.entry((group_of[r][pos[u]], group_of[r + 1][pos[v]]))
                    .or_default() += 1;
            }
            w.into_iter().map(|((a, b), w)| (a, b, w)).collect()
        })
        .collect();
    let counts: Vec<usize> = super_nodes.iter().map(Vec::len).collect();
    let dead_end_count = count_dead_ends(&counts, &weighted_inter_edges, p.h);
    TransformedPattern {
        kind: SymmetryKind::Merged,
        h: p.h,
        super_nodes,
        weighted_inter_edges,
        dead_end_count,
    }
}

pub fn transform(p: &ConcentricPattern, kind: SymmetryKind) -> TransformedPattern {
    match kind {
        SymmetryKind::Backbone => backbone_transform(p),
        SymmetryKind::Merged => merged_transform(p),
    }
}

/// Level-by-level outward sweep of the walker's probability mass.
pub fn propagate(tp: &TransformedPattern) -> TransitionDistribution {
    let h = tp.h;
    let mut mass: Vec<f64> = vec![0.0; tp.super_nodes[0].len()];
    if let Some(m) = mass.first_mut() {
        *m = 1.0;
    }
    let mut terminal_mass = Vec::new();
    for r in 0..h {
        let mut out_weight = vec![0u64; tp.super_nodes[r].len()];
        for &(a, _, w) in &tp.weighted_inter_edges[r] {
            out_weight[a] += w as u64;
        }
        for (s, &w) in out_weight.iter().enumerate() {
            if w == 0 {
                terminal_mass.push((
                    Outcome {
                        level: r,
                        super_node: s,
                    },
                    mass[s],
                ));
            }
        }
        let mut next = vec![0.0; tp.super_nodes[r + 1].len()];
        for &(a, b, w) in &tp.weighted_inter_edges[r] {
            next[b] += mass[a] * w as f64 / out_weight[a] as f64;
        }
        mass = next;
    }
    terminal_mass.extend(mass.into_iter().enumerate().map(|(s, m)| {
        (
            Outcome {
                level: h,
                super_node: s,
            },
            m,
        )
    }));
    // Shares of a unit mass can round to just above 1.
    for (_, m) in &mut terminal_mass {
        *m = m.min(1.0);
    }
    TransitionDistribution { terminal_mass }
}

/// Symmetry ratio from an already propagated pattern; `None` when the center
/// has no neighbors.
pub fn evaluate(tp: &TransformedPattern, dist: &TransitionDistribution) -> Option<f64> {
    if tp.super_nodes.get(1).is_none_or(|l| l.is_empty()) {
        return None;
    }
    debug_assert_eq!(tp.dead_end_count[0], 0);
    // exp(H) never exceeds the outcome count; clamp the rounding.
    Some((dist.entropy().exp() / tp.outcome_count() as f64).min(1.0))
}

/// Symmetry of one node via the explicit pattern pipeline.
pub fn symmetry(
    net: &WordNetwork,
    node: NodeId,
    h: usize,
    kind: SymmetryKind,
) -> Result<SymmetryValue> {
    let pattern = extract_pattern(net, node, h)?;
    let tp = transform(&pattern, kind);
    let dist = propagate(&tp);
    Ok(SymmetryValue {
        node,
        kind,
        h,
        value: evaluate(&tp, &dist),
    })
}

/// Reusable scratch space for the fused symmetry sweep.
///
/// All per-node arrays are sized to the network once and invalidated by an
/// epoch stamp instead of being cleared, so a sweep over a node costs time
/// proportional to the pattern, not the network.
#[derive(Clone, Debug, Default)]
pub struct SymmetryEngine {
    epoch: u32,
    stamp: Vec<u32>,
    dist: Vec<u32>,
    order: Vec<NodeId>,
    level_start: Vec<usize>,
    out_count: Vec<u32>,
    mass: Vec<f64>,
    // Merged only: union-find parent, aggregated out-weight and mass at roots.
    parent: Vec<u32>,
    root_weight: Vec<u64>,
    root_mass: Vec<f64>,
}

impl SymmetryEngine {
    pub fn new(node_count: usize) -> Self {
        let mut engine = Self::default();
        engine.ensure(node_count);
        engine
    }

    fn ensure(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.dist.resize(n, 0);
            self.out_count.resize(n, 0);
            self.mass.resize(n, 0.0);
            self.parent.resize(n, 0);
            self.root_weight.resize(n, 0);
            self.root_mass.resize(n, 0.0);
        }
    }

    #[inline]
    fn seen(&self, v: NodeId) -> bool {
        self.stamp[v.index()] == self.epoch
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Breadth-first levels up to `h`, recording each node's count of edges
    /// into the next level.
    fn explore(&mut self, net: &WordNetwork, center: NodeId, h: usize) {
        self.next_epoch();
        self.order.clear();
        self.level_start.clear();
        let c = center.index();
        self.stamp[c] = self.epoch;
        self.dist[c] = 0;
        self.mass[c] = 1.0;
        self.order.push(center);
        self.level_start.push(0);
        let mut head = 0;
        for r in 0..h as u32 {
            let end = self.order.len();
            self.level_start.push(end);
            while head < end {
                let u = self.order[head];
                head += 1;
                let mut out = 0u32;
                for &v in net.neighbors(u) {
                    let vi = v.index();
                    if self.stamp[vi] != self.epoch {
                        self.stamp[vi] = self.epoch;
                        self.dist[vi] = r + 1;
                        self.mass[vi] = 0.0;
                        self.order.push(v);
                        out += 1;
                    } else if self.dist[vi] == r + 1 {
                        out += 1;
                    }
                }
                self.out_count[u.index()] = out;
            }
        }
        self.level_start.push(self.order.len());
    }

    fn level(&self, r: usize) -> std::ops::Range<usize> {
        self.level_start[r]..self.level_start[r + 1]
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Runs the outward walk and feeds every terminal mass to `sink`.
    /// Returns `false` (and emits nothing) for an isolated center.
    pub fn sweep<F: FnMut(f64)>(
        &mut self,
        net: &WordNetwork,
        center: NodeId,
        h: usize,
        kind: SymmetryKind,
        mut sink: F,
    ) -> Result<bool> {
        check_args(net, center, h)?;
        self.ensure(net.node_count());
        self.explore(net, center, h);
        if self.level(1).is_empty() {
            return Ok(false);
        }
        // Shares of a unit mass can round to just above 1.
        let mut sink = |m: f64| sink(m.min(1.0));
        match kind {
            SymmetryKind::Backbone => self.sweep_backbone(net, h, &mut sink),
            SymmetryKind::Merged => self.sweep_merged(net, h, &mut sink),
        }
        Ok(true)
    }

    fn sweep_backbone(&mut self, net: &WordNetwork, h: usize, sink: &mut impl FnMut(f64)) {
        for r in 0..h {
            let next = r as u32 + 1;
            for i in self.level(r) {
                let u = self.order[i];
                let m = self.mass[u.index()];
                let out = self.out_count[u.index()];
                if out == 0 {
                    sink(m);
                    continue;
                }
                let share = m / out as f64;
                for &v in net.neighbors(u) {
                    if self.seen(v) && self.dist[v.index()] == next {
                        self.mass[v.index()] += share;
                    }
                }
            }
        }
        for i in self.level(h) {
            sink(self.mass[self.order[i].index()]);
        }
    }

    fn sweep_merged(&mut self, net: &WordNetwork, h: usize, sink: &mut impl FnMut(f64)) {
        for i in 0..self.order.len() {
            let u = self.order[i].0;
            self.parent[u as usize] = u;
        }
        for r in 0..=h {
            // Collapse intra-level components; the smallest id becomes root.
            let level = r as u32;
            for i in self.level(r) {
                let u = self.order[i];
                for &v in net.neighbors(u) {
                    if v > u && self.seen(v) && self.dist[v.index()] == level {
                        let (ru, rv) = (self.find(u.0), self.find(v.0));
                        if ru != rv {
                            let (lo, hi) = if ru < rv { (ru, rv) } else { (rv, ru) };
                            self.parent[hi as usize] = lo;
                        }
                    }
                }
            }
            for i in self.level(r) {
                let u = self.order[i].0;
                let root = self.find(u) as usize;
                if root == u as usize {
                    self.root_weight[root] = 0;
                    self.root_mass[root] = 0.0;
                }
            }
            for i in self.level(r) {
                let u = self.order[i].0;
                let root = self.find(u);
                self.parent[u as usize] = root;
                let root = root as usize;
                self.root_mass[root] += self.mass[u as usize];
                if r < h {
                    self.root_weight[root] += self.out_count[u as usize] as u64;
                }
            }
            if r == h {
                for i in self.level(r) {
                    let u = self.order[i].0;
                    if self.parent[u as usize] == u {
                        sink(self.root_mass[u as usize]);
                    }
                }
                break;
            }
            let next = level + 1;
            for i in self.level(r) {
                let u = self.order[i];
                let root = self.parent[u.index()] as usize;
                if root == u.index() && self.root_weight[root] == 0 {
                    sink(self.root_mass[root]);
                }
                let w = self.root_weight[root];
                if w == 0 || self.out_count[u.index()] == 0 {
                    continue;
                }
                let share = self.root_mass[root] / w as f64;
                for &v in net.neighbors(u) {
                    if self.seen(v) && self.dist[v.index()] == next {
                        self.mass[v.index()] += share;
                    }
                }
            }
        }
    }

    pub fn terminal_masses(
        &mut self,
        net: &WordNetwork,
        center: NodeId,
        h: usize,
        kind: SymmetryKind,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        self.sweep(net, center, h, kind, |m| out.push(m))?;
        Ok(out)
    }

    pub fn symmetry(
        &mut self,
        net: &WordNetwork,
        center: NodeId,
        h: usize,
        kind: SymmetryKind,
    ) -> Result<Option<f64>> {
        let mut h_sum = 0.0;
        let mut outcomes = 0usize;
        let defined = self.sweep(net, center, h, kind, |p| {
            outcomes += 1;
            if p > 0.0 {
                h_sum -= p * p.ln();
            }
        })?;
        Ok(defined.then(|| (h_sum.exp() / outcomes as f64).min(1.0)))
    }
}

/// Symmetry of every node, indexed by node id. Parallel over nodes; the
/// result does not depend on the thread count.
pub fn symmetry_all(net: &WordNetwork, h: usize, kind: SymmetryKind) -> Result<Vec<SymmetryValue>> {
    if h == 0 {
        return Err(Error::InvalidLevel(h));
    }
    let n = net.node_count();
    (0..n as u32)
        .into_par_iter()
        .map_init(
            || SymmetryEngine::new(n),
            |engine, u| {
                let node = NodeId(u);
                engine
                    .symmetry(net, node, h, kind)
                    .map(|value| SymmetryValue {
                        node,
                        kind,
                        h,
                        value,
                    })
            },
        )
        .collect()
}

/// Symmetry for a chosen subset of nodes, in the given order.
pub fn symmetry_of(
    net: &WordNetwork,
    nodes: &[NodeId],
    h: usize,
    kind: SymmetryKind,
) -> Result<Vec<Option<f64>>> {
    let mut engine = SymmetryEngine::new(net.node_count());
    nodes
        .iter()
        .map(|&u| engine.symmetry(net, u, h, kind))
        .collect()
}
