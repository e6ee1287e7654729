use proptest::prelude::*;
use vperc_core::coloring::Coloring;
use vperc_core::events::{
    arms_on, decompose, detect_arms, detect_circuit, detect_cross, detect_white_vertical_cross, interfaces_on,
    EventSpec, PreparedEvent, SafeZone,
};
use vperc_core::geom::{build_complex, sample_poisson, Point, PointSet, RegionGraph, RegionSpec, VoronoiComplex, Window};
use vperc_core::oracle::{exact_probability, random_arm_instance};
use vperc_core::SeedPath;

fn index_of(cx: &VoronoiComplex, p: Point) -> usize {
    (0..cx.len()).find(|&i| cx.nucleus(i) == p).expect("nucleus present")
}

fn environment(seed: u64, half: f64, intensity: f64) -> VoronoiComplex {
    let window = Window::new(-half, -half, half, half).unwrap();
    build_complex(&sample_poisson(window, intensity, &SeedPath::root(seed)).unwrap()).unwrap()
}

#[test]
fn monochromatic_colorings_give_one_cluster() {
    let cx = environment(1, 20.0, 1.0);
    let region = RegionSpec::annulus(Point::default(), 2.0, 6.0);
    for black in [true, false] {
        let d = decompose(&cx, &Coloring::constant(cx.len(), black), &region).unwrap();
        assert_eq!(d.clusters().len(), 1);
        assert_eq!(d.clusters()[0].black, black);
    }
}

#[test]
fn cells_meeting_only_outside_the_region_stay_apart() {
    // The edge between a and b runs along x = 1 from y = 0 up; the region
    // lies below y = 0, where c separates them.
    let (a, b, c, d) = (Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(1.0, -1.0), Point::new(1.0, 3.0));
    let window = Window::new(-20.0, -20.0, 20.0, 20.0).unwrap();
    let cx = build_complex(&PointSet::from_points(vec![a, b, c, d], window).unwrap()).unwrap();
    let region = RegionSpec::rectangle(Point::new(1.0, -0.5), 1.5, 0.5);
    let mut coloring = Coloring::constant(4, true);
    coloring.set(index_of(&cx, c), false);
    let dec = decompose(&cx, &coloring, &region).unwrap();
    let black = dec.clusters().iter().filter(|k| k.black).count();
    assert_eq!(black, 2);
    assert_ne!(dec.cluster_of(index_of(&cx, a)), dec.cluster_of(index_of(&cx, b)));
    // Same cells, with c black too: one cluster.
    let dec = decompose(&cx, &Coloring::constant(4, true), &region).unwrap();
    assert_eq!(dec.clusters().len(), 1);
}

#[test]
fn six_point_crossing_matches_exhaustive_enumeration() {
    let pts = vec![
        Point::new(-1.6, 0.3),
        Point::new(-0.5, -0.6),
        Point::new(0.2, 0.7),
        Point::new(0.9, -0.2),
        Point::new(1.7, 0.5),
        Point::new(-0.1, -1.8),
    ];
    let window = Window::new(-14.0, -14.0, 14.0, 14.0).unwrap();
    let points = PointSet::from_points(pts, window).unwrap();
    let cx = build_complex(&points).unwrap();
    let spec = EventSpec::cross(RegionSpec::rectangle(Point::default(), 2.0, 1.0));
    let ev = PreparedEvent::new(&cx, &points, &spec, SafeZone::Check).unwrap();
    let exact = exact_probability(6, 0.5, |c| ev.holds(c).unwrap());
    assert!(exact > 0.05 && exact < 0.95, "{exact}");
    let root = SeedPath::root(11);
    let n = 100_000u64;
    let hits = (0..n)
        .filter(|&i| ev.holds(&Coloring::sample(6, 0.5, &root.child(i)).unwrap()).unwrap())
        .count();
    let freq = hits as f64 / n as f64;
    let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
    assert!((freq - exact).abs() <= 3.0 * sigma, "{freq} vs {exact}");
}

/// A jittered lattice on `[-k, k]^2` with unit spacing.
fn lattice(k: i32) -> (VoronoiComplex, Vec<Point>) {
    let mut pts = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let jitter = 0.013 * (((i * 7 + j * 13).rem_euclid(11)) as f64 / 11.0 - 0.5);
            pts.push(Point::new(i as f64 + jitter, j as f64 - jitter * 0.7));
        }
    }
    let half = k as f64 + 0.5;
    let window = Window::new(-half, -half, half, half).unwrap();
    let cx = build_complex(&PointSet::from_points(pts.clone(), window).unwrap()).unwrap();
    (cx, pts)
}

#[test]
fn explicit_black_ring_is_a_circuit() {
    let (cx, _) = lattice(18);
    // Q = [-6, 6]^2 and delta = 1/4: the annulus between 3 and 4.5.
    let q = RegionSpec::square(Point::default(), 6.0);
    let mut coloring = Coloring::constant(cx.len(), false);
    for i in 0..cx.len() {
        let p = cx.nucleus(i);
        let cheb = p.x.abs().max(p.y.abs()).round();
        if (3.0..=4.0).contains(&cheb) {
            coloring.set(i, true);
        }
    }
    assert_eq!(detect_circuit(&cx, &coloring, &q, 0.25).unwrap(), 1);
    assert_eq!(detect_circuit(&cx, &coloring.inverted(), &q, 0.25).unwrap(), -1);
    // Cut the ring along the positive x axis: no black circuit remains, and
    // the black ring still crosses radially, so there is no white one either.
    for i in 0..cx.len() {
        let p = cx.nucleus(i);
        if p.y.abs() < 0.5 && p.x > 0.0 {
            coloring.set(i, false);
        }
    }
    assert_eq!(detect_circuit(&cx, &coloring, &q, 0.25).unwrap(), 0);
    assert_eq!(detect_circuit(&cx, &Coloring::constant(cx.len(), true), &q, 0.25).unwrap(), 1);
}

#[test]
fn circuit_sign_has_mean_zero_at_one_half() {
    // Annulus between 1.2 and 6.6: wide enough for circuits to be common.
    let q = RegionSpec::square(Point::default(), 12.0);
    let window = Window::new(-24.0, -24.0, 24.0, 24.0).unwrap();
    let root = SeedPath::root(21);
    let n = 600u64;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let s = root.child(i);
            let cx = build_complex(&sample_poisson(window, 1.0, &s.child(0)).unwrap()).unwrap();
            let c = Coloring::sample(cx.len(), 0.5, &s.child(1)).unwrap();
            f64::from(detect_circuit(&cx, &c, &q, 0.45).unwrap())
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    assert!(var > 0.0);
    assert!(mean.abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn one_arm_of_all_black_and_no_two_arms_monochromatic() {
    let cx = environment(3, 20.0, 1.0);
    let region = RegionSpec::annulus(Point::default(), 1.0, 5.0);
    assert!(detect_arms(&cx, &Coloring::constant(cx.len(), true), &region, 1).unwrap());
    assert!(!detect_arms(&cx, &Coloring::constant(cx.len(), false), &region, 1).unwrap());
    for black in [true, false] {
        assert!(!detect_arms(&cx, &Coloring::constant(cx.len(), black), &region, 2).unwrap());
    }
}

#[test]
fn two_arms_are_not_monotone() {
    // Find a configuration with two arms that a single white-to-black flip
    // destroys.
    let root = SeedPath::root(31);
    let found = (0..200u64).any(|k| {
        let inst = random_arm_instance(&root, k, 25).unwrap();
        let Ok(cx) = build_complex(&inst.points) else { return false };
        let g = RegionGraph::new_unchecked(&cx, &inst.region).unwrap();
        if !arms_on(&g, &inst.coloring, 2) {
            return false;
        }
        (0..cx.len()).any(|i| {
            if inst.coloring.is_black(i) {
                return false;
            }
            let mut c = inst.coloring.clone();
            c.set(i, true);
            !arms_on(&g, &c, 2)
        })
    });
    assert!(found);
}

#[test]
fn constant_colorings_of_a_cross() {
    let cx = environment(4, 20.0, 1.0);
    let rect = RegionSpec::rectangle(Point::default(), 4.0, 2.0);
    assert!(detect_cross(&cx, &Coloring::constant(cx.len(), true), &rect).unwrap());
    assert!(!detect_cross(&cx, &Coloring::constant(cx.len(), false), &rect).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn black_crossing_and_white_dual_crossing_are_exclusive_and_exhaustive(seed in 0u64..1_000_000, lam in 1.0..5.0f64) {
        let window = Window::new(-20.0, -20.0, 20.0, 20.0).unwrap();
        let s = SeedPath::root(seed);
        let cx = build_complex(&sample_poisson(window, 1.0, &s.child(0)).unwrap()).unwrap();
        let c = Coloring::sample(cx.len(), 0.5, &s.child(1)).unwrap();
        let rect = RegionSpec::rectangle(Point::default(), lam, 2.0);
        prop_assert_ne!(detect_cross(&cx, &c, &rect).unwrap(), detect_white_vertical_cross(&cx, &c, &rect).unwrap());
    }

    #[test]
    fn increasing_events_stay_true_when_cells_turn_black(seed in 0u64..1_000_000, flips in prop::collection::vec(0usize..10_000, 1..8)) {
        let window = Window::new(-18.0, -18.0, 18.0, 18.0).unwrap();
        let s = SeedPath::root(seed);
        let cx = build_complex(&sample_poisson(window, 1.0, &s.child(0)).unwrap()).unwrap();
        let c = Coloring::sample(cx.len(), 0.5, &s.child(1)).unwrap();
        let mut up = c.clone();
        for f in flips {
            up.set(f % cx.len(), true);
        }
        let rect = RegionSpec::rectangle(Point::default(), 3.0, 3.0);
        let ann = RegionSpec::annulus(Point::default(), 1.0, 5.0);
        if detect_cross(&cx, &c, &rect).unwrap() {
            prop_assert!(detect_cross(&cx, &up, &rect).unwrap());
        }
        if detect_arms(&cx, &c, &ann, 1).unwrap() {
            prop_assert!(detect_arms(&cx, &up, &ann, 1).unwrap());
        }
    }

    #[test]
    fn interfaces_and_even_arms_agree(index in 0u64..100_000) {
        let inst = random_arm_instance(&SeedPath::root(41), index, 25).unwrap();
        if let RegionSpec::Annulus { .. } = inst.region {
            let cx = build_complex(&inst.points).unwrap();
            let g = RegionGraph::new_unchecked(&cx, &inst.region).unwrap();
            let y = interfaces_on(&g, &inst.coloring);
            prop_assert_eq!(y % 2, 0);
            for j in [2u32, 4, 6] {
                prop_assert_eq!(y >= j, arms_on(&g, &inst.coloring, j));
            }
        }
    }

    #[test]
    fn color_swap_exchanges_circuit_signs(seed in 0u64..1_000_000) {
        let window = Window::new(-16.0, -16.0, 16.0, 16.0).unwrap();
        let s = SeedPath::root(seed);
        let cx = build_complex(&sample_poisson(window, 1.0, &s.child(0)).unwrap()).unwrap();
        let c = Coloring::sample(cx.len(), 0.5, &s.child(1)).unwrap();
        let q = RegionSpec::square(Point::default(), 5.0);
        prop_assert_eq!(detect_circuit(&cx, &c, &q, 0.2).unwrap(), -detect_circuit(&cx, &c.inverted(), &q, 0.2).unwrap());
    }
}
