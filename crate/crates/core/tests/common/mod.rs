#![allow(dead_code)]

use cutters::operators::{Cutter, PrimitiveSet};
use cutters::Point;
use proptest::prelude::*;

pub const DIM: usize = 3;

pub fn coord() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

pub fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(coord(), dim).prop_map(|v| Point::new(v).unwrap())
}

pub fn primitive_set(dim: usize) -> impl Strategy<Value = PrimitiveSet> {
    let halfspace = (point(dim), -3.0..3.0f64).prop_filter_map("nonzero normal", |(n, b)| {
        PrimitiveSet::halfspace(n, b).ok()
    });
    let hyperplane = (point(dim), -3.0..3.0f64).prop_filter_map("nonzero normal", |(n, b)| {
        PrimitiveSet::hyperplane(n, b).ok()
    });
    let ball = (point(dim), 0.1..5.0f64).prop_map(|(c, r)| PrimitiveSet::ball(c, r).unwrap());
    let boxed = (point(dim), prop::collection::vec(0.0..4.0f64, dim)).prop_map(|(lo, w)| {
        let hi: Vec<f64> = lo.coords().iter().zip(&w).map(|(l, w)| l + w).collect();
        PrimitiveSet::boxed(lo, Point::new(hi).unwrap()).unwrap()
    });
    let single = point(dim).prop_map(PrimitiveSet::singleton);
    prop_oneof![halfspace, hyperplane, ball, boxed, single]
}

pub fn exact_cutter(dim: usize) -> impl Strategy<Value = Cutter> {
    primitive_set(dim).prop_map(Cutter::exact)
}

pub fn relax_gamma() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.1),
        Just(0.5),
        Just(1.0),
        Just(1.5),
        Just(1.9),
        0.01..1.99f64
    ]
}
