mod common;

use common::{oracle, random_graph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use symnet_core::concentric::{merged_transform, SymmetryEngine};
use symnet_core::{
    backbone_transform, extract_pattern, symmetry, symmetry_all, NodeId, SymmetryKind, WordNetwork,
};

fn arb_graph() -> impl Strategy<Value = WordNetwork> {
    (1usize..=10).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k] {
                        edges.push((format!("v{a}"), format!("v{b}"), 1));
                    }
                    k += 1;
                }
            }
            let nodes: Vec<(String, u64)> = (0..n).map(|i| (format!("v{i}"), 1)).collect();
            WordNetwork::from_parts(nodes, edges)
        })
    })
}

fn kind() -> impl Strategy<Value = SymmetryKind> {
    prop_oneof![Just(SymmetryKind::Backbone), Just(SymmetryKind::Merged)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sweep_matches_brute_force(net in arb_graph(), h in 1usize..=3, kind in kind()) {
        let mut engine = SymmetryEngine::new(net.node_count());
        for c in 0..net.node_count() {
            let got = engine.symmetry(&net, NodeId(c as u32), h, kind).unwrap();
            match oracle::outcomes(&net, c, h, kind) {
                None => prop_assert!(got.is_none()),
                Some(o) => {
                    let want = oracle::symmetry(&o);
                    prop_assert!((got.unwrap() - want).abs() <= 1e-10, "{} vs {}", got.unwrap(), want);
                    let mut masses = engine.terminal_masses(&net, NodeId(c as u32), h, kind).unwrap();
                    let mut expected: Vec<f64> = o.mass.values().copied().collect();
                    masses.sort_by(f64::total_cmp);
                    expected.sort_by(f64::total_cmp);
                    prop_assert_eq!(masses.len(), expected.len());
                    for (a, b) in masses.iter().zip(&expected) {
                        prop_assert!((a - b).abs() <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn merging_conserves_inter_level_weight(net in arb_graph(), h in 1usize..=3) {
        for c in net.nodes() {
            let p = extract_pattern(&net, c, h).unwrap();
            let b = backbone_transform(&p);
            let m = merged_transform(&p);
            for r in 0..h {
                prop_assert_eq!(b.inter_weight(r), p.inter_edges[r].len() as u64);
                prop_assert_eq!(m.inter_weight(r), p.inter_edges[r].len() as u64);
            }
            // Dead-end accounting: every counted outcome carries mass.
            for tp in [&b, &m] {
                let dist = symnet_core::propagate(tp);
                let positive = dist.terminal_mass.iter().filter(|&&(_, w)| w > 0.0).count();
                prop_assert_eq!(positive, tp.outcome_count());
            }
        }
    }

    #[test]
    fn kinds_agree_without_intra_level_edges(net in arb_graph(), h in 1usize..=3) {
        for c in net.nodes() {
            let p = extract_pattern(&net, c, h).unwrap();
            if p.intra_edges.iter().all(|e| e.is_empty()) {
                let b = symmetry(&net, c, h, SymmetryKind::Backbone).unwrap().value;
                let m = symmetry(&net, c, h, SymmetryKind::Merged).unwrap().value;
                prop_assert_eq!(b, m);
            }
        }
    }
}

#[test]
fn symmetry_all_equals_node_by_node() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let net = random_graph(&mut rng);
        for kind in SymmetryKind::ALL {
            for h in 1..=3 {
                let all = symmetry_all(&net, h, kind).unwrap();
                assert_eq!(all.len(), net.node_count());
                for v in &all {
                    let single = symmetry(&net, v.node, h, kind).unwrap();
                    assert_eq!(v.node, single.node);
                    match (v.value, single.value) {
                        (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12, "{a} vs {b}"),
                        (a, b) => assert_eq!(a, b),
                    }
                }
            }
        }
    }
}

#[test]
fn empty_network_has_no_values() {
    let net = WordNetwork::default();
    assert!(symmetry_all(&net, 2, SymmetryKind::Merged)
        .unwrap()
        .is_empty());
}
