mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{chain, keras_source, observed, oracle, random_stack, shaped_graph};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inferred_shapes_match_oracle(seed in any::<u64>()) {
        let stack = random_stack(&mut StdRng::seed_from_u64(seed), 24);
        let g = shaped_graph(&keras_source(&stack));
        let layers = chain(&g);
        let want = oracle(&stack);
        prop_assert_eq!(layers.len(), want.len());
        for (i, (n, w)) in layers.iter().zip(&want).enumerate() {
            prop_assert_eq!(&observed(n), w, "layer {} of {:?}", i, stack);
        }
    }
}

#[test]
fn lenet_tf_shapes() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/base/lenet_tf.py")).unwrap();
    let g = shaped_graph(&src);
    let dims: Vec<_> = chain(&g).iter().map(|n| observed(n).dims).collect();
    let k = |v: &[u64]| v.iter().map(|&d| Some(d)).collect::<Vec<_>>();
    assert_eq!(dims.first(), Some(&k(&[28, 28, 1])));
    assert!(dims.contains(&k(&[14, 14, 32])));
    assert!(dims.contains(&k(&[7, 7, 64])));
    assert!(dims.contains(&k(&[3136])));
    assert_eq!(dims.last(), Some(&k(&[10])));
}

#[test]
fn generator_exercises_failures() {
    let mut kinds = std::collections::BTreeSet::new();
    for seed in 0..300 {
        let stack = random_stack(&mut StdRng::seed_from_u64(seed), 24);
        kinds.extend(oracle(&stack).into_iter().filter_map(|e| e.error));
    }
    assert!(kinds.contains("spatial_underflow") && kinds.contains("rank_mismatch"), "{kinds:?}");
}
