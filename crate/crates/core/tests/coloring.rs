use std::collections::HashSet;

use proptest::prelude::*;
use vperc_core::coloring::{enumerate_recolorings, Coloring, K_MAX};
use vperc_core::SeedPath;

proptest! {
    #[test]
    fn flip_is_a_pointwise_involution(seed in any::<u64>(), n in 1usize..200, cell in 0usize..200) {
        let c = Coloring::sample(n, 0.5, &SeedPath::root(seed)).unwrap();
        let cell = cell % n;
        let f = c.flip(cell).unwrap();
        prop_assert_eq!(f.sign(cell), -c.sign(cell));
        prop_assert!((0..n).filter(|&i| i != cell).all(|i| f.sign(i) == c.sign(i)));
        prop_assert_eq!((f.p(), f.stream()), (c.p(), c.stream()));
        prop_assert_eq!(f.flip(cell).unwrap(), c);
    }

    #[test]
    fn enumeration_visits_each_assignment_once(seed in any::<u64>(), cells in prop::collection::btree_set(0usize..30, 0..8)) {
        let base = Coloring::sample(30, 0.5, &SeedPath::root(seed)).unwrap();
        let cells: Vec<usize> = cells.into_iter().collect();
        let all: Vec<Coloring> = enumerate_recolorings(&base, &cells, K_MAX).unwrap().collect();
        prop_assert_eq!(all.len(), 1 << cells.len());
        let distinct: HashSet<Vec<i8>> = all.iter().map(|c| c.signs().to_vec()).collect();
        prop_assert_eq!(distinct.len(), all.len());
        for c in &all {
            prop_assert!((0..30).filter(|i| !cells.contains(i)).all(|i| c.sign(i) == base.sign(i)));
        }
    }

    #[test]
    fn sampling_regenerates_exactly(seed in any::<u64>(), n in 0usize..500, p in 0.0..=1.0f64) {
        let s = SeedPath::root(seed);
        prop_assert_eq!(Coloring::sample(n, p, &s).unwrap(), Coloring::sample(n, p, &s).unwrap());
    }
}
