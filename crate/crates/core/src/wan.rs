//! Word adjacency networks.
//!
//! Nodes are distinct lemmas, numbered in lexicographic lemma order so that two
//! networks with the same lemma set always agree on node ids. Edges are
//! undirected, carry the number of times the two lemmas were adjacent, and are
//! stored in compressed sparse row form with neighbors sorted by id.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Token;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordNetwork {
    lemmas: Vec<String>,
    index: HashMap<String, NodeId>,
    frequency: Vec<u64>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<u32>,
}

impl Default for WordNetwork {
    fn default() -> Self {
        Self {
            lemmas: Vec::new(),
            index: HashMap::new(),
            frequency: Vec::new(),
            offsets: vec![0],
            targets: Vec::new(),
            weights: Vec::new(),
        }
    }
}

impl WordNetwork {
    /// Builds a network from per-lemma frequencies and weighted lemma pairs.
    ///
    /// Lemmas that only appear in `edges` get frequency 0. Repeated pairs
    /// accumulate weight; self-pairs and zero weights are ignored.
    pub fn from_parts<L, E, S>(nodes: L, edges: E) -> Self
    where
        L: IntoIterator<Item = (S, u64)>,
        E: IntoIterator<Item = (S, S, u32)>,
        S: AsRef<str>,
    {
        let mut freq: BTreeMap<String, u64> = BTreeMap::new();
        for (lemma, f) in nodes {
            *freq.entry(lemma.as_ref().to_owned()).or_default() += f;
        }
        let mut named_edges: BTreeMap<(String, String), u32> = BTreeMap::new();
        for (a, b, w) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            freq.entry(a.to_owned()).or_default();
            freq.entry(b.to_owned()).or_default();
            if a == b || w == 0 {
                continue;
            }
            let key = if a < b { (a, b) } else { (b, a) };
            *named_edges
                .entry((key.0.to_owned(), key.1.to_owned()))
                .or_default() += w;
        }

        let lemmas: Vec<String> = freq.keys().cloned().collect();
        let frequency: Vec<u64> = freq.into_values().collect();
        let index: HashMap<String, NodeId> = lemmas
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), NodeId(i as u32)))
            .collect();
        let edges: Vec<_> = named_edges
            .into_iter()
            .map(|((a, b), w)| (index[&a], index[&b], w))
            .collect();
        Self::from_indexed(lemmas, index, frequency, edges)
    }

    fn from_indexed<E>(
        lemmas: Vec<String>,
        index: HashMap<String, NodeId>,
        frequency: Vec<u64>,
        edges: E,
    ) -> Self
    where
        E: IntoIterator<Item = (NodeId, NodeId, u32)>,
    {
        let n = lemmas.len();
        let mut adj: Vec<Vec<(NodeId, u32)>> = vec![Vec::new(); n];
        for (a, b, w) in edges {
            adj[a.index()].push((b, w));
            adj[b.index()].push((a, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
            for &(v, w) in list.iter() {
                targets.push(v);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Self {
            lemmas,
            index,
            frequency,
            offsets,
            targets,
            weights,
        }
    }

    pub fn node_count(&self) -> usize {
        self.lemmas.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> {
        (0..self.lemmas.len() as u32).map(NodeId)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.lemmas.len()
    }

    pub fn lemma(&self, node: NodeId) -> &str {
        &self.lemmas[node.index()]
    }

    pub fn lemmas(&self) -> &[String] {
        &self.lemmas
    }

    pub fn node(&self, lemma: &str) -> Option<NodeId> {
        self.index.get(lemma).copied()
    }

    pub fn frequency(&self, node: NodeId) -> u64 {
        self.frequency[node.index()]
    }

    #[inline]
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[node.index()]..self.offsets[node.index() + 1]]
    }

    pub fn neighbor_weights(&self, node: NodeId) -> &[u32] {
        &self.weights[self.offsets[node.index()]..self.offsets[node.index() + 1]]
    }

    #[inline]
    pub fn degree(&self, node: NodeId) -> usize {
        self.offsets[node.index() + 1] - self.offsets[node.index()]
    }

    /// Sum of incident co-occurrence weights.
    pub fn strength(&self, node: NodeId) -> u64 {
        self.neighbor_weights(node).iter().map(|&w| w as u64).sum()
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<u32> {
        let nbrs = self.neighbors(a);
        nbrs.binary_search(&b)
            .ok()
            .map(|i| self.neighbor_weights(a)[i])
    }

    /// Each undirected edge once, as `(low id, high id, weight)` in id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u32)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.neighbor_weights(u))
                .filter(move |(&v, _)| u < v)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    pub fn total_frequency(&self) -> u64 {
        self.frequency.iter().sum()
    }
}

/// Links consecutive tokens' lemmas. Pairs that straddle a sentence boundary
/// are skipped unless `cross_sentence_edges` is set; identical neighbors
/// produce no self-loop.
pub fn build_wan(tokens: &[Token], cross_sentence_edges: bool) -> WordNetwork {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *freq.entry(t.lemma.as_str()).or_default() += 1;
    }
    let mut lemmas: Vec<String> = freq.keys().map(|s| s.to_string()).collect();
    lemmas.sort_unstable();
    let index: HashMap<String, NodeId> = lemmas
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), NodeId(i as u32)))
        .collect();
    let frequency = lemmas.iter().map(|l| freq[l.as_str()]).collect();

    let mut pairs: HashMap<(NodeId, NodeId), u32> = HashMap::new();
    for w in tokens.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !cross_sentence_edges && a.sentence_index != b.sentence_index {
            continue;
        }
        let (ia, ib) = (index[&a.lemma], index[&b.lemma]);
        if ia == ib {
            continue;
        }
        *pairs.entry((ia.min(ib), ia.max(ib))).or_default() += 1;
    }
    let mut edges: Vec<_> = pairs.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    edges.sort_unstable();
    WordNetwork::from_indexed(lemmas, index, frequency, edges)
}

/// Lemmas present in every network, sorted lexicographically.
pub fn shared_vocabulary(networks: &[WordNetwork]) -> Vec<String> {
    let Some((first, rest)) = networks.split_first() else {
        return Vec::new();
    };
    first
        .lemmas()
        .iter()
        .filter(|l| rest.iter().all(|net| net.node(l).is_some()))
        .cloned()
        .collect()
}

/// `lemma_a<TAB>lemma_b<TAB>weight` lines, sorted lexicographically.
pub fn write_edge_list(net: &WordNetwork, out: &mut dyn Write) -> std::io::Result<()> {
    // Ids follow lemma order, so `edges()` is already lexicographic.
    for (a, b, w) in net.edges() {
        writeln!(out, "{}\t{}\t{}", net.lemma(a), net.lemma(b), w)?;
    }
    Ok(())
}

pub fn read_edge_list(reader: impl BufRead, source: &Path) -> Result<WordNetwork> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: &str| Error::Parse {
            path: source.to_path_buf(),
            line: i + 1,
            message: message.to_owned(),
        };
        let mut fields = line.split('\t');
        let (Some(a), Some(b), Some(w), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(parse_err("expected `lemma_a<TAB>lemma_b<TAB>weight`"));
        };
        let w: u32 = w
            .trim()
            .parse()
            .map_err(|_| parse_err("weight is not a positive integer"))?;
        if w == 0 || a.is_empty() || b.is_empty() || a == b {
            return Err(parse_err(
                "edge must join two distinct lemmas with weight >= 1",
            ));
        }
        edges.push((a.to_owned(), b.to_owned(), w));
    }
    Ok(WordNetwork::from_parts(
        std::iter::empty::<(String, u64)>(),
        edges,
    ))
}

pub fn export_network(net: &WordNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, |w| {
        write_edge_list(net, w).map_err(|e| Error::io(path, e))
    })
}

/// Reads an edge list. Node frequencies are not part of the format and come
/// back as 0; isolated nodes are not representable.
pub fn import_network(path: impl AsRef<Path>) -> Result<WordNetwork> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_list(BufReader::new(file), path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonNode {
    pub lemma: String,
    pub freq: u64,
}

/// Plot-friendly form: `{"nodes":[{lemma,freq}], "edges":[[i,j,w]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub nodes: Vec<JsonNode>,
    pub edges: Vec<[u64; 3]>,
}

impl From<&WordNetwork> for NetworkJson {
    fn from(net: &WordNetwork) -> Self {
        NetworkJson {
            nodes: net
                .nodes()
                .map(|u| JsonNode {
                    lemma: net.lemma(u).to_owned(),
                    freq: net.frequency(u),
                })
                .collect(),
            edges: net
                .edges()
                .map(|(a, b, w)| [a.0 as u64, b.0 as u64, w as u64])
                .collect(),
        }
    }
}

impl TryFrom<NetworkJson> for WordNetwork {
    type Error = Error;

    fn try_from(json: NetworkJson) -> Result<Self> {
        let n = json.nodes.len() as u64;
        let mut edges = Vec::with_capacity(json.edges.len());
        for [a, b, w] in &json.edges {
            if *a >= n || *b >= n {
                return Err(Error::InvalidInput(format!(
                    "edge [{a},{b},{w}] references a node outside 0..{n}"
                )));
            }
            let w = u32::try_from(*w)
                .map_err(|_| Error::InvalidInput(format!("edge weight {w} out of range")))?;
            edges.push((
                json.nodes[*a as usize].lemma.as_str(),
                json.nodes[*b as usize].lemma.as_str(),
                w,
            ));
        }
        let distinct: BTreeSet<&str> = json.nodes.iter().map(|n| n.lemma.as_str()).collect();
        if distinct.len() != json.nodes.len() {
            return Err(Error::InvalidInput("duplicate lemma in node list".into()));
        }
        Ok(WordNetwork::from_parts(
            json.nodes.iter().map(|n| (n.lemma.as_str(), n.freq)),
            edges,
        ))
    }
}

pub fn export_json(net: &WordNetwork, path: impl AsRef<Path>) -> Result<()> {
    let json = NetworkJson::from(net);
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, &json)?;
        Ok(())
    })
}

pub fn import_json(path: impl AsRef<Path>) -> Result<WordNetwork> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let json: NetworkJson = serde_json::from_reader(BufReader::new(file))?;
    WordNetwork::try_from(json)
}

/// Loads either format, chosen by extension (`.json` or edge list otherwise).
pub fn load_network(path: impl AsRef<Path>) -> Result<WordNetwork> {
    let path = path.as_ref();
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        import_json(path)
    } else {
        import_network(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tokens(words: &[(&str, usize)]) -> Vec<Token> {
        words
            .iter()
            .enumerate()
            .map(|(i, (w, s))| Token {
                surface: w.to_string(),
                lemma: w.to_string(),
                sentence_index: *s,
                position: i,
            })
            .collect()
    }

    fn id(net: &WordNetwork, l: &str) -> NodeId {
        net.node(l).unwrap()
    }

    #[test]
    fn builds_weighted_edges() {
        let net = build_wan(&tokens(&[("cat", 0), ("run", 0), ("cat", 0)]), false);
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.weight(id(&net, "cat"), id(&net, "run")), Some(2));
        assert_eq!(net.frequency(id(&net, "cat")), 2);
        assert_eq!(net.frequency(id(&net, "run")), 1);
    }

    #[test]
    fn empty_tokens_empty_network() {
        let net = build_wan(&[], false);
        assert!(net.is_empty());
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn sentence_boundary_respected() {
        let toks = tokens(&[("a", 0), ("b", 0), ("c", 1)]);
        let net = build_wan(&toks, false);
        let edges: Vec<_> = net
            .edges()
            .map(|(a, b, _)| (net.lemma(a).to_owned(), net.lemma(b).to_owned()))
            .collect();
        assert_eq!(edges, [("a".to_owned(), "b".to_owned())]);

        let crossed = build_wan(&toks, true);
        assert_eq!(crossed.edge_count(), 2);
        assert!(crossed
            .weight(id(&crossed, "b"), id(&crossed, "c"))
            .is_some());
    }

    #[test]
    fn no_self_loops() {
        let net = build_wan(&tokens(&[("a", 0), ("a", 0), ("b", 0), ("b", 0)]), false);
        assert_eq!(net.edge_count(), 1);
        for u in net.nodes() {
            assert!(!net.neighbors(u).contains(&u));
        }
    }

    #[test]
    fn permutation_keeps_nodes_changes_edges() {
        let a = build_wan(&tokens(&[("x", 0), ("y", 0), ("z", 0), ("x", 0)]), false);
        let b = build_wan(&tokens(&[("x", 0), ("x", 0), ("y", 0), ("z", 0)]), false);
        assert_eq!(a.lemmas(), b.lemmas());
        assert_eq!(
            a.nodes().map(|u| a.frequency(u)).collect::<Vec<_>>(),
            b.nodes().map(|u| b.frequency(u)).collect::<Vec<_>>()
        );
        assert_eq!(a.edge_count(), 3);
        assert_eq!(b.edge_count(), 2);
    }

    fn net_with(lemmas: &[&str]) -> WordNetwork {
        WordNetwork::from_parts(
            lemmas.iter().map(|l| (*l, 1)),
            Vec::<(&str, &str, u32)>::new(),
        )
    }

    #[test]
    fn shared_vocabulary_cases() {
        let a = net_with(&["a", "b", "c"]);
        let b = net_with(&["b", "c", "d"]);
        assert_eq!(shared_vocabulary(&[a.clone(), b]), ["b", "c"]);
        assert_eq!(
            shared_vocabulary(&[net_with(&["c", "a", "b"])]),
            ["a", "b", "c"]
        );
        assert!(shared_vocabulary(&[a, net_with(&["x", "y"])]).is_empty());
        assert!(shared_vocabulary(&[]).is_empty());
    }

    #[test]
    fn edge_list_format() {
        let net = build_wan(&tokens(&[("run", 0), ("cat", 0), ("run", 0)]), false);
        let mut buf = Vec::new();
        write_edge_list(&net, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "cat\trun\t2\n");

        let mut buf = Vec::new();
        write_edge_list(&WordNetwork::default(), &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn edge_list_rejects_garbage() {
        let bad = "a\tb\n";
        assert!(read_edge_list(bad.as_bytes(), Path::new("x.tsv")).is_err());
        let bad = "a\tb\t0\n";
        assert!(read_edge_list(bad.as_bytes(), Path::new("x.tsv")).is_err());
        let bad = "a\ta\t3\n";
        assert!(read_edge_list(bad.as_bytes(), Path::new("x.tsv")).is_err());
    }

    #[test]
    fn json_rejects_out_of_range_edge() {
        let json = NetworkJson {
            nodes: vec![JsonNode {
                lemma: "a".into(),
                freq: 1,
            }],
            edges: vec![[0, 3, 1]],
        };
        assert!(WordNetwork::try_from(json).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let toks = tokens(&[("b", 0), ("a", 0), ("c", 0), ("a", 0), ("d", 1)]);
        let net = build_wan(&toks, false);
        let json = dir.path().join("n.json");
        export_json(&net, &json).unwrap();
        assert_eq!(load_network(&json).unwrap(), net);

        let tsv = dir.path().join("n.tsv");
        export_network(&net, &tsv).unwrap();
        let back = load_network(&tsv).unwrap();
        // `d` is isolated and the edge list cannot carry it.
        assert_eq!(back.node_count(), 3);
        assert_eq!(
            back.edges().collect::<Vec<_>>(),
            net.edges().collect::<Vec<_>>()
        );
    }

    fn arb_network() -> impl Strategy<Value = WordNetwork> {
        (2usize..12)
            .prop_flat_map(|n| {
                let pairs = proptest::collection::vec((0..n, 0..n, 1u32..5), 1..30);
                (Just(n), pairs)
            })
            .prop_map(|(_, pairs)| {
                let name = |i: usize| format!("w{i:02}");
                WordNetwork::from_parts(
                    Vec::<(String, u64)>::new(),
                    pairs
                        .into_iter()
                        .filter(|(a, b, _)| a != b)
                        .map(|(a, b, w)| (name(a), name(b), w))
                        .collect::<Vec<_>>(),
                )
            })
            .prop_filter("needs an edge", |net| net.edge_count() > 0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn edge_list_round_trip(net in arb_network()) {
            let mut buf = Vec::new();
            write_edge_list(&net, &mut buf).unwrap();
            let back = read_edge_list(buf.as_slice(), Path::new("mem")).unwrap();
            prop_assert_eq!(back, net);
        }

        #[test]
        fn wan_invariants(words in proptest::collection::vec((0u8..8, 0usize..3), 0..60)) {
            let mut toks: Vec<Token> = words
                .iter()
                .enumerate()
                .map(|(i, (w, s))| Token {
                    surface: format!("l{w}"),
                    lemma: format!("l{w}"),
                    sentence_index: *s,
                    position: i,
                })
                .collect();
            // Sentence indices must be non-decreasing.
            let mut s = 0;
            for t in &mut toks {
                s = s.max(t.sentence_index);
                t.sentence_index = s;
            }
            let net = build_wan(&toks, false);
            prop_assert_eq!(net.total_frequency(), toks.len() as u64);
            prop_assert!(net.edge_count() <= toks.len().saturating_sub(1));
            let distinct: BTreeSet<_> = toks.iter().map(|t| &t.lemma).collect();
            prop_assert_eq!(net.node_count(), distinct.len());
            for u in net.nodes() {
                prop_assert!(net.frequency(u) >= 1);
                for (&v, &w) in net.neighbors(u).iter().zip(net.neighbor_weights(u)) {
                    prop_assert!(v != u);
                    prop_assert!(w >= 1);
                    prop_assert_eq!(net.weight(v, u), Some(w));
                }
            }
        }
    }
}
