#![allow(dead_code)]

use degenlab_core::{ConvexBody, Sym2, Vec2};

pub fn pentagon() -> ConvexBody {
    ConvexBody::polytope(vec![
        Vec2::new(1.2, 0.1),
        Vec2::new(0.4, 1.0),
        Vec2::new(-0.9, 0.6),
        Vec2::new(-0.7, -0.8),
        Vec2::new(0.6, -1.1),
    ])
    .unwrap()
}

/// Ball, ellipsoid `x²/4 + y² ≤ 1`, square `(±1, ±1)` and an irregular pentagon.
pub fn bodies() -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("ball", ConvexBody::ball(1.0).unwrap()),
        ("ellipsoid", ConvexBody::ellipsoid(Sym2::new(0.25, 0.0, 1.0)).unwrap()),
        ("square", ConvexBody::square(1.0).unwrap()),
        ("pentagon", pentagon()),
    ]
}
