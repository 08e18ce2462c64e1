use inpoly::curve::{build_curve, CurveSpec};
use inpoly::geom::Point;
use inpoly::penner::EdgeLengths;
use inpoly::solver::{continuation_solve, multistart_solve, Provenance, SolverOptions};
use inpoly::testmap::residual;

fn lengths(v: &[f64]) -> EdgeLengths {
    EdgeLengths::new(v.to_vec()).unwrap()
}

#[test]
fn continuation_and_multistart_share_a_solution() {
    let cases = [
        (CurveSpec::circle(1.0), vec![1.0, 1.0, 1.0]),
        (CurveSpec::ellipse(2.0, 1.0), vec![1.0; 4]),
        (CurveSpec::ellipse(2.0, 1.0), vec![1.2, 0.9, 1.05]),
        (CurveSpec::ellipse(3.0, 1.0).with_phase(0.7), vec![1.0, 2.0, 1.5, 1.8]),
    ];
    let opts = SolverOptions::default();
    for (spec, a) in cases {
        let a = lengths(&a);
        let cont = continuation_solve(&spec, &a, &opts).unwrap();
        let multi = multistart_solve(&spec, &a, &opts).unwrap();
        assert_eq!(cont.solutions.len(), 1);
        assert_eq!(cont.solutions[0].provenance, Provenance::Homotopy);
        let c = &cont.solutions[0].config;
        assert!(
            multi.solutions.iter().any(|s| s.config.distance(c) < 1e-6),
            "{spec:?} {a:?}: homotopy solution not among multistart solutions"
        );
        for s in multi.solutions.iter().chain(&cont.solutions) {
            assert!(s.convex, "{spec:?} {a:?}: non-convex solution on a strictly convex curve");
        }
    }
}

#[test]
fn polyline_square_with_vertices_on_knots() {
    // the inscribed square of the unit square sits exactly on the corners
    let spec = CurveSpec::Polyline {
        points: vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)],
        phase: 0.0,
    };
    let curve = build_curve(&spec).unwrap();
    let a = lengths(&[1.0; 4]);
    let res = multistart_solve(&spec, &a, &SolverOptions::default()).unwrap();
    assert!(!res.solutions.is_empty());
    for s in &res.solutions {
        let r = residual(&curve, &s.config, &a).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-10));
    }
    let corners = res.solutions.iter().find(|s| {
        s.polygon.on_curve.iter().zip([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).all(|(p, (x, y))| {
            (p.x - x).abs() < 1e-8 && (p.y - y).abs() < 1e-8
        })
    });
    assert!(corners.is_some(), "corner square not found");
}

#[test]
fn non_star_target_falls_back_to_multistart() {
    // U-shaped polygon: the notch blocks the view from the centroid
    let spec = CurveSpec::Polyline {
        points: [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [3.0, 4.0], [3.0, 1.0], [1.0, 1.0], [1.0, 4.0], [0.0, 4.0]]
            .into_iter()
            .map(Point::from)
            .collect(),
        phase: 0.0,
    };
    let a = lengths(&[1.0, 1.0, 1.0]);
    let res = continuation_solve(&spec, &a, &SolverOptions::default()).unwrap();
    assert!(!res.solutions.is_empty());
    assert!(res.solutions.iter().all(|s| matches!(s.provenance, Provenance::Multistart(_))));
}
