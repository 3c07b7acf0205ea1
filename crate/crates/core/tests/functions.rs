mod common;

use std::collections::BTreeMap;

use common::*;
use cutters::functions::{
    build_catalog_function, catalog_names, make_abs, make_distance, make_ellipse_residual,
    make_kink_family, make_kinked_abs, make_max_abs,
};
use cutters::{subgradient_project, ConvexFunction, Error, Point};
use proptest::prelude::*;

fn convex_catalog() -> Vec<ConvexFunction> {
    vec![
        make_abs(),
        make_max_abs(),
        make_kinked_abs(),
        make_kink_family(1).unwrap(),
        make_kink_family(4).unwrap(),
    ]
}

fn central_difference(f: &ConvexFunction, x: &Point) -> Vec<f64> {
    let h = 1e-6;
    (0..x.dim())
        .map(|i| {
            let mut up = x.coords().to_vec();
            let mut down = up.clone();
            up[i] += h;
            down[i] -= h;
            let fu = f.value(&Point::new(up).unwrap()).unwrap();
            let fd = f.value(&Point::new(down).unwrap()).unwrap();
            (fu - fd) / (2.0 * h)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn catalog_projectors_are_cutters(idx in 0usize..5, raw in prop::collection::vec(-5.0..5.0f64, 4)) {
        let f = &convex_catalog()[idx];
        let x = Point::new(raw[..f.dim()].to_vec()).unwrap();
        // every level set here is {0}
        let z = Point::zeros(f.dim());
        prop_assert!(f.value(&z).unwrap() <= 0.0);
        if f.value(&x).unwrap() > 0.0 {
            let p = subgradient_project(f, &x).unwrap();
            prop_assert!(x.sub(&p).dot(&z.sub(&p)) <= 1e-9);
            prop_assert!(subgradient_project(f, &p).is_ok());
        }
    }

    #[test]
    fn distance_projectors_are_cutters(set in primitive_set(DIM), x in point(DIM), z in point(DIM)) {
        let z = set.project(&z).unwrap();
        let f = make_distance(set);
        if f.value(&x).unwrap() > 0.0 {
            let p = subgradient_project(&f, &x).unwrap();
            prop_assert!(x.sub(&p).dot(&z.sub(&p)) <= 1e-9 * x.norm_sq().max(1.0));
        }
    }

    #[test]
    fn distance_projector_coincides_with_projection(set in primitive_set(DIM), x in point(DIM)) {
        let exact = set.project(&x).unwrap();
        let f = make_distance(set);
        let sub = subgradient_project(&f, &x).unwrap();
        prop_assert!(sub.dist(&exact) <= 1e-12 * x.norm().max(1.0), "gap {}", sub.dist(&exact));
    }

    #[test]
    fn subgradients_match_finite_differences(idx in 0usize..6, raw in prop::collection::vec(-5.0..5.0f64, 4)) {
        let f = match idx {
            5 => make_ellipse_residual(0.3, -0.2),
            i => convex_catalog()[i].clone(),
        };
        let x = Point::new(raw[..f.dim()].to_vec()).unwrap();
        // stay away from kinks, where the finite difference straddles two pieces
        let fd = central_difference(&f, &x);
        let near_kink = {
            let h = 1e-4;
            (0..x.dim()).any(|i| {
                [-h, h].iter().any(|d| {
                    let mut y = x.coords().to_vec();
                    y[i] += d;
                    let s = f.subgradient(&Point::new(y).unwrap()).unwrap();
                    s.dist(&f.subgradient(&x).unwrap()) > 1e-3 * (1.0 + s.norm())
                })
            })
        };
        prop_assume!(!near_kink);
        let s = f.subgradient(&x).unwrap();
        let err = s.coords().iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-5 * (1.0 + s.norm()), "{} vs {:?}", s, fd);
    }

    #[test]
    fn subgradient_inequality_holds(idx in 0usize..5, a in prop::collection::vec(-5.0..5.0f64, 4), b in prop::collection::vec(-5.0..5.0f64, 4)) {
        let f = &convex_catalog()[idx];
        let d = f.dim();
        let (x, y) = (Point::new(a[..d].to_vec()).unwrap(), Point::new(b[..d].to_vec()).unwrap());
        let s = f.subgradient(&x).unwrap();
        prop_assert!(f.value(&y).unwrap() + 1e-12 >= f.value(&x).unwrap() + s.dot(&y.sub(&x)));
    }
}

#[test]
fn catalog_lookup() {
    let names = catalog_names();
    for n in [
        "abs",
        "max_abs",
        "kinked_abs",
        "kink_family",
        "ellipse_residual",
    ] {
        assert!(names.contains(&n));
    }
    let mut p = BTreeMap::new();
    p.insert("k".to_string(), 3.0);
    assert_eq!(build_catalog_function("kink_family", &p).unwrap().dim(), 3);
    let err = build_catalog_function("cosh", &BTreeMap::new())
        .unwrap_err()
        .to_string();
    assert!(err.contains("max_abs") && err.contains("kink_family"));
    assert!(build_catalog_function("abs", &p).is_err());
    let f = build_catalog_function(
        "ellipse_residual",
        &[("a".to_string(), 0.0), ("b".to_string(), 0.0)].into(),
    )
    .unwrap();
    assert!(!f.is_certified_convex());
}

#[test]
fn nonconvex_input_is_rejected() {
    let r = ConvexFunction::new("neg_sq", 1, |x| -x[0] * x[0], |x| vec![-2.0 * x[0]]);
    assert!(matches!(r, Err(Error::InvalidSubgradient { .. })));
}

#[test]
fn zero_subgradient_is_an_error() {
    let f = ConvexFunction::nonconvex("shifted", 1, |_| 1.0, |_| vec![0.0]).unwrap();
    assert!(matches!(
        subgradient_project(&f, &Point::new(vec![0.0]).unwrap()),
        Err(Error::ZeroSubgradient { .. })
    ));
}
