mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use dlint_core::engine::run_to_fixpoint;
use dlint_core::graph::{Attr, AttrValue, AttributedGraph, EdgeLabel, NodeKind};
use dlint_core::rules::{catalog, patterns_of};

use common::{keras_source, random_stack, shaped_graph};

fn linear_chain(n: usize) -> AttributedGraph {
    let mut g = AttributedGraph::new();
    let mut prev = g.add_node(NodeKind::InputLayer);
    for _ in 0..n {
        let l = g.add_node_with(NodeKind::Layer, [(Attr::LayerType, AttrValue::text("dense"))], None);
        g.add_edge(prev, EdgeLabel::Next, l).unwrap();
        prev = l;
    }
    g
}

proptest! {
    #[test]
    fn next_closure_reaches_every_layer(n in 0usize..200) {
        let g = linear_chain(n);
        let input = g.first_of(NodeKind::InputLayer).unwrap().id;
        prop_assert_eq!(g.next_closure(input, |_| false).len(), n);
    }

    #[test]
    fn faults_keep_conformance(n in 1usize..50, picks in prop::collection::vec(any::<prop::sample::Index>(), 0..20)) {
        let mut g = linear_chain(n);
        prop_assert!(g.conforms());
        for p in picks {
            let anchor = dlint_core::graph::NodeId(p.index(g.node_count()) as u32);
            if g.node(anchor).unwrap().kind != NodeKind::Fault {
                g.attach_fault(anchor, "SI-19", "x").unwrap();
            }
            prop_assert!(g.conforms());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixpoint_is_bounded_confluent_and_additive(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let stack = random_stack(&mut rng, 60);
        let g = shaped_graph(&keras_source(&stack));
        let patterns = patterns_of(&catalog());
        let base = run_to_fixpoint(g.clone(), &patterns).unwrap();

        // one application per (code, anchor)
        let distinct: BTreeSet<_> = base.trace.iter().map(|a| (a.code, a.anchor)).collect();
        prop_assert_eq!(distinct.len(), base.trace.len());
        prop_assert!(base.trace.len() <= 23 * g.node_count());

        // nothing but faults is added
        prop_assert_eq!(base.graph.without_faults().dump(), g.dump());
        prop_assert!(base.graph.conforms());

        let mut shuffled = patterns.clone();
        shuffled.shuffle(&mut rng);
        for p in &mut shuffled {
            p.priority = rng.gen();
        }
        let other = run_to_fixpoint(g.clone(), &shuffled).unwrap();
        prop_assert_eq!(other.graph.fault_set(), base.graph.fault_set());

        // a fixpoint stays a fixpoint
        let again = run_to_fixpoint(base.graph.clone(), &patterns).unwrap();
        prop_assert!(again.trace.is_empty());
    }
}
