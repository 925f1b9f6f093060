use std::collections::HashSet;

use perc_lab_core::{
    estimate_susceptibility, explore_cluster, AvoidSet, ExploreOptions, GraphSpec, PercolationSample, VertexId,
};
use proptest::prelude::*;

fn any_spec() -> impl Strategy<Value = GraphSpec> {
    prop_oneof![
        (2u32..=12).prop_map(|m| GraphSpec::hypercube(m).unwrap()),
        (3u64..=8, 1u32..=3).prop_map(|(n, d)| GraphSpec::torus(n, d).unwrap()),
        (2u64..=30).prop_map(|n| GraphSpec::complete(n).unwrap()),
        (2u64..=5, 2u32..=3).prop_map(|(n, d)| GraphSpec::complete_product(n, d).unwrap()),
    ]
}

fn case() -> impl Strategy<Value = (GraphSpec, f64, f64, u64, u64)> {
    (any_spec(), 0.0f64..=1.0, 0.0f64..=1.0, any::<u64>(), any::<u64>())
        .prop_map(|(s, a, b, seed, root)| (s, a.min(b), a.max(b), seed, root % s.vertex_count()))
}

fn members(spec: GraphSpec, p: f64, seed: u64, root: u64, avoid: &AvoidSet) -> HashSet<VertexId> {
    let sample = PercolationSample::new(spec, p, seed).unwrap();
    let report = explore_cluster(&sample, VertexId(root), &ExploreOptions::default(), avoid).unwrap();
    report.vertices.into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn clusters_grow_with_p((spec, p1, p2, seed, root) in case()) {
        let small = members(spec, p1, seed, root, &AvoidSet::new());
        let large = members(spec, p2, seed, root, &AvoidSet::new());
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn closing_edges_shrinks_clusters((spec, p, _, seed, root) in case(), other in any::<u64>()) {
        let avoid = AvoidSet::around_vertices(&spec, &[VertexId(other % spec.vertex_count())]).unwrap();
        let off = members(spec, p, seed, root, &avoid);
        let full = members(spec, p, seed, root, &AvoidSet::new());
        prop_assert!(off.is_subset(&full));
    }

    #[test]
    fn onearm_monotone_and_layers_conserved((spec, p, _, seed, root) in case(), r in 0u32..12) {
        let sample = PercolationSample::new(spec, p, seed).unwrap();
        let full = explore_cluster(&sample, VertexId(root), &ExploreOptions::default(), &AvoidSet::new()).unwrap();
        prop_assert_eq!(full.layers.iter().sum::<u64>(), full.size);
        prop_assert!(!full.truncated);
        for k in 1..=full.layers.len() as u32 + 1 {
            prop_assert!(!full.reaches(k) || full.reaches(k - 1));
        }
        let capped = explore_cluster(&sample, VertexId(root), &ExploreOptions::radius(r), &AvoidSet::new()).unwrap();
        prop_assert_eq!(capped.layers.iter().sum::<u64>(), capped.size);
        for k in 0..=r {
            prop_assert_eq!(capped.reaches(k), full.reaches(k));
            prop_assert_eq!(capped.boundary(k), full.boundary(k));
        }
    }

    #[test]
    fn exploration_is_deterministic((spec, p, _, seed, root) in case()) {
        let sample = PercolationSample::new(spec, p, seed).unwrap();
        let a = explore_cluster(&sample, VertexId(root), &ExploreOptions::default(), &AvoidSet::new()).unwrap();
        let b = explore_cluster(&sample, VertexId(root), &ExploreOptions::default(), &AvoidSet::new()).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn susceptibility_monotone_under_shared_seeds((spec, p1, p2, seed, _) in case()) {
        let a = estimate_susceptibility(spec, p1, 40, seed).unwrap();
        let b = estimate_susceptibility(spec, p2, 40, seed).unwrap();
        prop_assert!(a.mean <= b.mean);
    }
}
