//! Classical per-node network measurements.
//!
//! All measurements except strength use the unweighted topology.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wan::{NodeId, WordNetwork};

const PAGERANK_DAMPING: f64 = 0.85;
const PAGERANK_TOL: f64 = 1e-10;
const EIGENVECTOR_TOL: f64 = 1e-10;
const MAX_POWER_ITERATIONS: usize = 10_000;
/// Sources per Brandes work unit. Fixed so that the floating-point summation
/// order does not depend on the thread count.
const BRANDES_CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measurement {
    Degree,
    Strength,
    Clustering,
    Betweenness,
    Closeness,
    PageRank,
    Eigenvector,
    AvgNeighborDegree,
}

impl Measurement {
    pub const ALL: [Measurement; 8] = [
        Measurement::Degree,
        Measurement::Strength,
        Measurement::Clustering,
        Measurement::Betweenness,
        Measurement::Closeness,
        Measurement::PageRank,
        Measurement::Eigenvector,
        Measurement::AvgNeighborDegree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measurement::Degree => "degree",
            Measurement::Strength => "strength",
            Measurement::Clustering => "clustering",
            Measurement::Betweenness => "betweenness",
            Measurement::Closeness => "closeness",
            Measurement::PageRank => "pagerank",
            Measurement::Eigenvector => "eigenvector",
            Measurement::AvgNeighborDegree => "avg_neighbor_degree",
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measurement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measurement::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnsupportedMeasurement(s.to_owned()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementVector {
    pub measurement: Measurement,
    /// Indexed by node id.
    pub values: Vec<f64>,
}

pub fn compute_measurement(net: &WordNetwork, measurement: Measurement) -> MeasurementVector {
    let values = match measurement {
        Measurement::Degree => net.nodes().map(|u| net.degree(u) as f64).collect(),
        Measurement::Strength => net.nodes().map(|u| net.strength(u) as f64).collect(),
        Measurement::Clustering => clustering(net),
        Measurement::Betweenness => betweenness(net),
        Measurement::Closeness => closeness(net),
        Measurement::PageRank => pagerank(net),
        Measurement::Eigenvector => eigenvector(net),
        Measurement::AvgNeighborDegree => average_neighbor_degree(net),
    };
    MeasurementVector {
        measurement,
        values,
    }
}

/// Parses the measurement name first, so unknown names fail before any work.
pub fn compute_measurement_by_name(net: &WordNetwork, name: &str) -> Result<MeasurementVector> {
    Ok(compute_measurement(net, name.parse()?))
}

/// Local clustering coefficient; 0 for degree below 2.
pub fn clustering(net: &WordNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut mark = vec![u32::MAX; n];
    net.nodes()
        .map(|u| {
            let k = net.degree(u);
            if k < 2 {
                return 0.0;
            }
            for &v in net.neighbors(u) {
                mark[v.index()] = u.0;
            }
            let mut links = 0usize;
            for &v in net.neighbors(u) {
                links += net
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| w > v && mark[w.index()] == u.0)
                    .count();
            }
            2.0 * links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

/// Unnormalized Brandes betweenness, each unordered pair counted once.
pub fn betweenness(net: &WordNetwork) -> Vec<f64> {
    let n = net.node_count();
    let sources: Vec<u32> = (0..n as u32).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(BRANDES_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut state = BrandesState::new(n);
            for &s in chunk {
                state.accumulate(net, NodeId(s), &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.iter_mut().for_each(|b| *b /= 2.0);
    total
}

struct BrandesState {
    stack: Vec<NodeId>,
    sigma: Vec<f64>,
    dist: Vec<i64>,
    delta: Vec<f64>,
    queue: VecDeque<NodeId>,
}

impl BrandesState {
    fn new(n: usize) -> Self {
        Self {
            stack: Vec::with_capacity(n),
            sigma: vec![0.0; n],
            dist: vec![-1; n],
            delta: vec![0.0; n],
            queue: VecDeque::with_capacity(n),
        }
    }

    fn accumulate(&mut self, net: &WordNetwork, s: NodeId, acc: &mut [f64]) {
        for &v in &self.stack {
            self.sigma[v.index()] = 0.0;
            self.dist[v.index()] = -1;
            self.delta[v.index()] = 0.0;
        }
        self.stack.clear();
        self.sigma[s.index()] = 1.0;
        self.dist[s.index()] = 0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.stack.push(v);
            let dv = self.dist[v.index()];
            for &w in net.neighbors(v) {
                if self.dist[w.index()] < 0 {
                    self.dist[w.index()] = dv + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w.index()] == dv + 1 {
                    self.sigma[w.index()] += self.sigma[v.index()];
                }
            }
        }
        // Predecessors are exactly the neighbors one level closer.
        for &w in self.stack.iter().rev() {
            let dw = self.dist[w.index()];
            let coeff = (1.0 + self.delta[w.index()]) / self.sigma[w.index()];
            for &v in net.neighbors(w) {
                if self.dist[v.index()] == dw - 1 {
                    self.delta[v.index()] += self.sigma[v.index()] * coeff;
                }
            }
            if w != s {
                acc[w.index()] += self.delta[w.index()];
            }
        }
    }
}

fn bfs_distances(
    net: &WordNetwork,
    s: NodeId,
    dist: &mut [i64],
    queue: &mut VecDeque<NodeId>,
) -> (usize, i64) {
    dist.iter_mut().for_each(|d| *d = -1);
    dist[s.index()] = 0;
    queue.clear();
    queue.push_back(s);
    let (mut reached, mut total) = (1usize, 0i64);
    while let Some(v) = queue.pop_front() {
        for &w in net.neighbors(v) {
            if dist[w.index()] < 0 {
                dist[w.index()] = dist[v.index()] + 1;
                reached += 1;
                total += dist[w.index()];
                queue.push_back(w);
            }
        }
    }
    (reached, total)
}

/// Closeness with the Wasserman–Faust correction for disconnected graphs:
/// `(r - 1) / Σd · (r - 1) / (n - 1)` where `r` counts reachable nodes
/// including the source.
pub fn closeness(net: &WordNetwork) -> Vec<f64> {
    let n = net.node_count();
    (0..n as u32)
        .into_par_iter()
        .map_init(
            || (vec![-1i64; n], VecDeque::new()),
            |(dist, queue), u| {
                let (reached, total) = bfs_distances(net, NodeId(u), dist, queue);
                if total == 0 || n < 2 {
                    return 0.0;
                }
                let r = (reached - 1) as f64;
                (r / total as f64) * (r / (n - 1) as f64)
            },
        )
        .collect()
}

/// PageRank on the unweighted graph; dangling mass is spread uniformly.
pub fn pagerank(net: &WordNetwork) -> Vec<f64> {
    let n = net.node_count();
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_POWER_ITERATIONS {
        let dangling: f64 = net
            .nodes()
            .filter(|&u| net.degree(u) == 0)
            .map(|u| rank[u.index()])
            .sum();
        let base = (1.0 - PAGERANK_DAMPING) / nf + PAGERANK_DAMPING * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for u in net.nodes() {
            let k = net.degree(u);
            if k == 0 {
                continue;
            }
            let share = PAGERANK_DAMPING * rank[u.index()] / k as f64;
            for &v in net.neighbors(u) {
                next[v.index()] += share;
            }
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < PAGERANK_TOL {
            break;
        }
    }
    let total: f64 = rank.iter().sum();
    rank.iter_mut().for_each(|x| *x /= total);
    rank
}

/// Eigenvector centrality by power iteration on `A + I`, unit Euclidean norm.
pub fn eigenvector(net: &WordNetwork) -> Vec<f64> {
    let n = net.node_count();
    if n == 0 {
        return Vec::new();
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    for _ in 0..MAX_POWER_ITERATIONS {
        for u in net.nodes() {
            next[u.index()] =
                x[u.index()] + net.neighbors(u).iter().map(|v| x[v.index()]).sum::<f64>();
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        next.iter_mut().for_each(|v| *v /= norm);
        let change: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if change < n as f64 * EIGENVECTOR_TOL {
            break;
        }
    }
    x
}

/// Mean degree of each node's neighbors; 0 for isolated nodes.
pub fn average_neighbor_degree(net: &WordNetwork) -> Vec<f64> {
    net.nodes()
        .map(|u| {
            let k = net.degree(u);
            if k == 0 {
                return 0.0;
            }
            net.neighbors(u)
                .iter()
                .map(|&v| net.degree(v) as f64)
                .sum::<f64>()
                / k as f64
        })
        .collect()
}
