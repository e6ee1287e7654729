use vperc_core::coloring::{Coloring, K_MAX};
use vperc_core::events::{
    arms_on, arms_on_shifted, cells_with_nucleus_in, interfaces_on, EventSpec, PreparedEvent, SafeZone,
};
use vperc_core::geom::{build_complex, sample_poisson, Point, Rect, RegionGraph, RegionSpec, Window};
use vperc_core::oracle::{brute_pivotal, random_arm_instance, traced_interfaces, BruteRegion};
use vperc_core::SeedPath;

#[test]
fn region_graph_matches_brute_force_cells_and_edges() {
    let root = SeedPath::root(11);
    let mut split = 0;
    for i in 0..120 {
        let inst = random_arm_instance(&root, i, 25).unwrap();
        let cx = build_complex(&inst.points).unwrap();
        let g = RegionGraph::new_unchecked(&cx, &inst.region).unwrap();
        let b = BruteRegion::new(&inst.points.points, inst.points.window.rect(), &inst.region);
        let sites: Vec<usize> = (0..g.len()).map(|u| g.cell(u)).collect();
        assert_eq!(sites, b.cells, "instance {i}");
        split += usize::from(g.has_split_cells());
        for u in 0..g.len() {
            assert_eq!(g.touch(u), b.touch[u], "instance {i} node {u}");
            let mut nb: Vec<usize> = g.neighbors(u).iter().map(|&v| v as usize).collect();
            nb.sort_unstable();
            let mut bn = b.adj[u].clone();
            bn.sort_unstable();
            assert_eq!(nb, bn, "instance {i} node {u}");
        }
    }
    assert!(split > 0, "no instance cuts a cell in two");
}

#[test]
fn arms_agree_with_disjoint_path_search() {
    let root = SeedPath::root(12);
    let mut disagreements = Vec::new();
    let mut positives = [0u32; 5];
    for i in 0..400 {
        let inst = random_arm_instance(&root, i, 25).unwrap();
        let cx = build_complex(&inst.points).unwrap();
        let g = RegionGraph::new_unchecked(&cx, &inst.region).unwrap();
        let b = BruteRegion::new(&inst.points.points, inst.points.window.rect(), &inst.region);
        for j in 1..=4u32 {
            let fast = arms_on(&g, &inst.coloring, j);
            if fast != b.arms(&inst.coloring, j) {
                disagreements.push((i, j));
            }
            positives[j as usize] += u32::from(fast);
        }
    }
    assert!(disagreements.is_empty(), "{disagreements:?}");
    // Both outcomes occur for every j, so agreement is informative.
    for j in 1..=4 {
        assert!(positives[j] > 20 && positives[j] < 380, "j={j}: {positives:?}");
    }
}

#[test]
fn shifted_threshold_is_caught_by_the_oracle() {
    let root = SeedPath::root(13);
    let mut caught = 0;
    for i in 0..200 {
        let inst = random_arm_instance(&root, i, 25).unwrap();
        let cx = build_complex(&inst.points).unwrap();
        let g = RegionGraph::new_unchecked(&cx, &inst.region).unwrap();
        let b = BruteRegion::new(&inst.points.points, inst.points.window.rect(), &inst.region);
        for j in 2..=4u32 {
            caught += u32::from(arms_on_shifted(&g, &inst.coloring, j, 1) != b.arms(&inst.coloring, j));
        }
    }
    assert!(caught > 0);
}

#[test]
fn interface_count_matches_traced_edges() {
    let root = SeedPath::root(14);
    let mut nonzero = 0;
    let mut i = 0;
    let mut done = 0;
    while done < 60 {
        let inst = random_arm_instance(&root, i, 25).unwrap();
        i += 1;
        if !matches!(inst.region, RegionSpec::Annulus { r, .. } if r > 0.0) {
            continue;
        }
        done += 1;
        let cx = build_complex(&inst.points).unwrap();
        let g = RegionGraph::new_unchecked(&cx, &inst.region).unwrap();
        let y = interfaces_on(&g, &inst.coloring);
        assert_eq!(y % 2, 0);
        let t = traced_interfaces(&inst.points.points, inst.points.window.rect(), &inst.coloring, &inst.region);
        assert_eq!(y, t, "instance {i}");
        nonzero += u32::from(y > 0);
    }
    assert!(nonzero > 5);
}

#[test]
fn quenched_pivotality_matches_full_enumeration() {
    let window = Window::new(-3.0, -3.0, 3.0, 3.0).unwrap();
    let root = SeedPath::root(15);
    let mut agreements = 0;
    let mut pivotal = 0;
    let mut k = 0u64;
    while agreements < 200 {
        let s = root.child(k);
        k += 1;
        let points = sample_poisson(window, 0.3, &s.child(0)).unwrap();
        if !(4..=12).contains(&points.len()) {
            continue;
        }
        let Ok(cx) = build_complex(&points) else { continue };
        let inner = match k % 3 {
            0 => EventSpec::cross(RegionSpec::rectangle(Point::default(), 2.0, 1.5)),
            1 => EventSpec::arms(RegionSpec::annulus(Point::default(), 0.5, 2.5), 2),
            _ => EventSpec::arms(RegionSpec::annulus(Point::default(), 0.0, 2.0), 1),
        };
        let ev = PreparedEvent::new(&cx, &points, &inner, SafeZone::Skip).unwrap();
        let coloring = Coloring::sample(points.len(), 0.5, &s.child(1)).unwrap();
        let square = Rect::new(-1.0, -1.0, 1.0, 1.0);
        let d = cells_with_nucleus_in(&cx, &square);
        let fast = ev.pivotal_under(&coloring, &d, K_MAX).unwrap();
        let brute = brute_pivotal(&coloring, &d, |c| ev.holds(c).unwrap());
        assert_eq!(fast, brute, "environment {k}");
        agreements += 1;
        pivotal += u32::from(fast);
    }
    assert!(pivotal > 10 && pivotal < 190, "{pivotal}");
}
