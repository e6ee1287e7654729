use proptest::prelude::*;
use vperc_core::geom::{
    build_complex, cells_meeting, clipped_area, incircle, orient2d, polygon_area, sample_poisson, Point, PointSet,
    RegionSpec, VoronoiComplex, Window,
};
use vperc_core::oracle::brute_cell;
use vperc_core::SeedPath;

fn points_strategy(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..10.0f64, 0.0..10.0f64), 4..max)
}

fn complex_of(raw: &[(f64, f64)]) -> Option<VoronoiComplex> {
    let pts: Vec<Point> = raw.iter().map(|&(x, y)| Point::new(x, y)).collect();
    let window = Window::new(0.0, 0.0, 10.0, 10.0).unwrap();
    build_complex(&PointSet::from_points(pts, window).ok()?).ok()
}

fn empty_circumcircle_violations(cx: &VoronoiComplex) -> usize {
    cx.triangles()
        .iter()
        .filter(|t| {
            let [a, b, c] = t.map(|k| cx.nucleus(k as usize));
            let ccw = orient2d(a, b, c) > 0.0;
            (0..cx.len()).filter(|k| !t.contains(&(*k as u32))).any(|k| {
                let d = incircle(a, b, c, cx.nucleus(k));
                if ccw {
                    d > 0.0
                } else {
                    d < 0.0
                }
            })
        })
        .count()
}

fn euler_holds(cx: &VoronoiComplex) -> bool {
    let v = cx.len() as i64;
    let e = cx.edges().count() as i64;
    let f = cx.triangles().len() as i64 + 1;
    v - e + f == 2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delaunay_triangles_have_empty_circumcircles(raw in points_strategy(40)) {
        if let Some(cx) = complex_of(&raw) {
            prop_assert_eq!(empty_circumcircle_violations(&cx), 0);
            prop_assert!(euler_holds(&cx));
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_irreflexive(raw in points_strategy(40)) {
        if let Some(cx) = complex_of(&raw) {
            for i in 0..cx.len() {
                for &j in cx.neighbors(i) {
                    prop_assert_ne!(i, j as usize);
                    prop_assert!(cx.neighbors(j as usize).contains(&(i as u32)));
                }
            }
        }
    }

    #[test]
    fn cells_are_convex_contain_nuclei_and_tile_the_window(raw in points_strategy(40)) {
        if let Some(cx) = complex_of(&raw) {
            let mut total = 0.0;
            for i in 0..cx.len() {
                let poly = cx.polygon(i);
                let n = poly.len();
                prop_assert!(n >= 3);
                for k in 0..n {
                    prop_assert!(orient2d(poly[k], poly[(k + 1) % n], poly[(k + 2) % n]) >= -1e-9);
                    prop_assert!(orient2d(poly[k], poly[(k + 1) % n], cx.nucleus(i)) >= -1e-9);
                }
                total += polygon_area(poly);
            }
            prop_assert!((total - 100.0).abs() < 1e-8, "total area {}", total);
        }
    }

    #[test]
    fn cells_agree_with_halfplane_intersection(raw in points_strategy(20)) {
        if let Some(cx) = complex_of(&raw) {
            let window = *cx.window().rect();
            for i in 0..cx.len() {
                let brute = polygon_area(&brute_cell(cx.nuclei(), &window, i));
                prop_assert!((polygon_area(cx.polygon(i)) - brute).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn random_200_point_set_satisfies_euler_and_symmetry() {
    let window = Window::new(0.0, 0.0, 20.0, 20.0).unwrap();
    let points = sample_poisson(window, 0.5, &SeedPath::root(77)).unwrap();
    let pts: Vec<Point> = points.points.iter().take(200).copied().collect();
    assert_eq!(pts.len(), 200);
    let cx = build_complex(&PointSet::from_points(pts, window).unwrap()).unwrap();
    assert!(euler_holds(&cx));
    assert_eq!(empty_circumcircle_violations(&cx), 0);
    assert!((0..cx.len()).all(|i| cx.neighbors(i).iter().all(|&j| cx.neighbors(j as usize).contains(&(i as u32)))));
}

#[test]
fn poisson_count_has_the_right_mean() {
    let window = Window::new(0.0, 0.0, 100.0, 100.0).unwrap();
    let root = SeedPath::root(5);
    let reps = 10_000u64;
    let total: usize = (0..reps).map(|i| sample_poisson(window, 1.0, &root.child(i)).unwrap().len()).sum();
    let mean = total as f64 / reps as f64;
    // Standard error of the mean count: 100 / sqrt(reps).
    let se = 100.0 / (reps as f64).sqrt();
    assert!((mean - 1e4).abs() <= 3.0 * se, "mean {mean}");
}

#[test]
fn five_cells_rectangle_meets_exactly_two() {
    let pts = vec![
        Point::new(1.0, 1.0),
        Point::new(3.0, 1.0),
        Point::new(5.0, 1.0),
        Point::new(2.0, 4.0),
        Point::new(4.0, 4.0),
    ];
    let window = Window::new(-15.0, -15.0, 21.0, 20.0).unwrap();
    let cx = build_complex(&PointSet::from_points(pts.clone(), window).unwrap()).unwrap();
    // [0.5, 2.5] x [0.5, 1.5] is split by the bisector x = 2 and stays below
    // the bisectors with the upper row (y >= 1.83 over it).
    let region = RegionSpec::rectangle(Point::new(1.5, 1.0), 1.0, 0.5);
    let meeting = cells_meeting(&cx, &region).unwrap();
    let mut ids: Vec<Point> = meeting.cells.iter().map(|&c| cx.nucleus(c as usize)).collect();
    ids.sort_by(|a, b| a.x.total_cmp(&b.x));
    assert_eq!(ids, vec![pts[0], pts[1]]);
    let rect = region.bbox();
    let by_clipping: Vec<usize> = (0..pts.len())
        .filter(|&i| clipped_area(&brute_cell(&pts, window.rect(), i), &rect) > 1e-12)
        .collect();
    assert_eq!(by_clipping, vec![0, 1]);
}

#[test]
fn degenerate_annulus_meets_nothing() {
    let window = Window::new(-20.0, -20.0, 20.0, 20.0).unwrap();
    let points = sample_poisson(window, 1.0, &SeedPath::root(9)).unwrap();
    let cx = build_complex(&points).unwrap();
    let meeting = cells_meeting(&cx, &RegionSpec::annulus(Point::default(), 3.0, 3.0)).unwrap();
    assert!(meeting.cells.is_empty());
}
