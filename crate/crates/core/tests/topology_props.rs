use cbmds::topology::{shape_mask, Placement};
use cbmds::{generate_deployment, FieldSpec, Shape};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        Just(Shape::Square),
        Just(Shape::CShape),
        Just(Shape::LShape),
        Just(Shape::HShape)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_nodes_lie_inside_the_mask(s in shape(), n in 4usize..200, seed in any::<u64>()) {
        let d = generate_deployment(&FieldSpec::random(s, n, seed)).unwrap();
        prop_assert_eq!(d.len(), n);
        let mask = shape_mask(s, 10.0);
        prop_assert!(d.positions.iter().all(|p| mask.contains(p)));
    }

    #[test]
    fn grid_count_matches_lattice(s in shape(), seed in any::<u64>(), sigma in 0.0f64..0.3) {
        let spec = FieldSpec { placement_noise_sigma: sigma, ..FieldSpec::grid(s, seed) };
        let d = generate_deployment(&spec).unwrap();
        prop_assert_eq!(d.len(), spec.lattice_points().len());
        prop_assert_eq!(spec.placement, Placement::Grid);
    }

    #[test]
    fn same_seed_same_field(s in shape(), seed in any::<u64>()) {
        let spec = FieldSpec::random(s, 50, seed);
        prop_assert_eq!(generate_deployment(&spec).unwrap().positions, generate_deployment(&spec).unwrap().positions);
    }
}
