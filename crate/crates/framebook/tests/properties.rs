use framebook::generator::{gen_kframed, GenParams};
use framebook::io::{from_json, to_json, InstanceDocument};
use framebook::kframed::{augment_cliques, validate_kframed};
use framebook::mapgraph::{framed_to_map, half_square};
use framebook::multi_level::{embed, MultiLevelOptions};
use framebook::oracle::validate;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = GenParams> {
    (any::<u64>(), 3usize..=8, 2usize..=4, 0usize..=2, 0usize..120).prop_map(|(seed, k, depth, dens, extra)| {
        GenParams { seed, k, n: 3 * depth + extra, depth, density: dens as f64 / 2.0, ..Default::default() }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedding_is_crossing_free_and_bounded(p in params()) {
        let d = gen_kframed(&p).unwrap();
        prop_assert!(validate_kframed(&d).is_valid());
        let (e, _) = embed(&d, MultiLevelOptions::default()).unwrap();
        prop_assert!(validate(&e, &d.input_edge_pairs()).unwrap().is_empty());
        prop_assert!(e.pages_used() <= 6 * p.k.div_ceil(2) + 5);
    }

    #[test]
    fn framed_to_map_covers_the_graph(p in params()) {
        let d = gen_kframed(&p).unwrap();
        let hs = half_square(&framed_to_map(&augment_cliques(&d)).unwrap());
        prop_assert!(d.edge_pairs().iter().all(|e| hs.contains(e)));
    }

    #[test]
    fn instance_document_round_trips(p in params()) {
        let d = gen_kframed(&p).unwrap();
        let text = to_json(&InstanceDocument::from_drawing(&d));
        let back: InstanceDocument = from_json(&text).unwrap();
        let d2 = back.to_drawing().unwrap();
        prop_assert_eq!(to_json(&InstanceDocument::from_drawing(&d2)), text);
        prop_assert_eq!(gen_kframed(&p).map(|x| to_json(&InstanceDocument::from_drawing(&x))).unwrap(), to_json(&InstanceDocument::from_drawing(&d)));
    }
}
