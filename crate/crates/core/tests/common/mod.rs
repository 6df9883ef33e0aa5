//! Shared fixtures: random graphs and a brute-force symmetry oracle that
//! shares no code with the library's sweep.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use symnet_core::{SymmetryKind, WordNetwork};

pub fn random_graph(rng: &mut ChaCha8Rng) -> WordNetwork {
    let n = rng.gen_range(1..=12);
    let p = rng.gen_range(0.2..=0.6);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((format!("n{a:02}"), format!("n{b:02}"), 1));
            }
        }
    }
    let nodes: Vec<(String, u64)> = (0..n).map(|i| (format!("n{i:02}"), 1)).collect();
    WordNetwork::from_parts(nodes, edges)
}

/// Brute force straight from the definitions: dense adjacency, Floyd-Warshall
/// distances, naive label-propagation components, and explicit recursion over
/// every strictly outward walk.
pub mod oracle {
    use super::*;

    pub struct Outcomes {
        /// (level, smallest member id) -> terminal mass.
        pub mass: BTreeMap<(usize, usize), f64>,
        /// Super-nodes at level h plus dead ends below it.
        pub denominator: usize,
    }

    fn adjacency(net: &WordNetwork) -> Vec<Vec<bool>> {
        let n = net.node_count();
        let mut adj = vec![vec![false; n]; n];
        for (a, b, _) in net.edges() {
            adj[a.index()][b.index()] = true;
            adj[b.index()][a.index()] = true;
        }
        adj
    }

    fn distances(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
        let n = adj.len();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for i in 0..n {
            d[i][i] = 0;
            for j in 0..n {
                if adj[i][j] {
                    d[i][j] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    pub fn outcomes(
        net: &WordNetwork,
        center: usize,
        h: usize,
        kind: SymmetryKind,
    ) -> Option<Outcomes> {
        let adj = adjacency(net);
        if !adj[center].iter().any(|&e| e) {
            return None;
        }
        let n = adj.len();
        let dist = &distances(&adj)[center];
        let level = |v: usize| (dist[v] <= h).then_some(dist[v]);

        // Group label per node: itself for backbone, smallest node of its
        // intra-level component for merged.
        let mut label: Vec<usize> = (0..n).collect();
        if kind == SymmetryKind::Merged {
            loop {
                let mut changed = false;
                for a in 0..n {
                    for b in 0..n {
                        if adj[a][b]
                            && level(a).is_some()
                            && level(a) == level(b)
                            && label[b] < label[a]
                        {
                            label[a] = label[b];
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }

        // Weighted outward edges between groups.
        let mut out: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if adj[a][b] && level(a).is_some() && dist[b] == dist[a] + 1 && dist[b] <= h {
                    *out.entry(label[a])
                        .or_default()
                        .entry(label[b])
                        .or_default() += 1;
                }
            }
        }

        let mut groups: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..n {
            if let Some(r) = level(v) {
                groups.insert(label[v], r);
            }
        }
        let denominator = groups
            .iter()
            .filter(|&(g, &r)| r == h || (r < h && !out.contains_key(g)))
            .count();

        let mut mass = BTreeMap::new();
        fn walk(
            g: usize,
            p: f64,
            h: usize,
            groups: &BTreeMap<usize, usize>,
            out: &BTreeMap<usize, BTreeMap<usize, usize>>,
            mass: &mut BTreeMap<(usize, usize), f64>,
        ) {
            let r = groups[&g];
            match out.get(&g) {
                Some(next) if r < h => {
                    let total: usize = next.values().sum();
                    for (&b, &w) in next {
                        walk(b, p * w as f64 / total as f64, h, groups, out, mass);
                    }
                }
                _ => *mass.entry((r, g)).or_default() += p,
            }
        }
        walk(label[center], 1.0, h, &groups, &out, &mut mass);
        Some(Outcomes { mass, denominator })
    }

    pub fn symmetry(o: &Outcomes) -> f64 {
        let entropy: f64 = o
            .mass
            .values()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        entropy.exp() / o.denominator as f64
    }
}
