use plume_core::field::{Boundary, Field, FlowField, GaussianPuff, GridField, PuffPlume};
use plume_core::validation::{self, Options};
use plume_core::Vec2;
use proptest::prelude::*;

#[test]
fn analytic_checks_of_the_validation_suite() {
    for check in [
        validation::puff_pde_residual,
        validation::puff_derivatives,
        validation::grid_mass_conservation,
    ] {
        let (ok, detail) = check(&Options::default());
        assert!(ok, "{detail}");
    }
}

fn plume(releases: &[(f64, [f64; 2], f64)]) -> PuffPlume {
    let flow = FlowField::uniform(Vec2::new(0.3, -0.1));
    let mut p = PuffPlume::new(Vec2::zeros(), 0.0, 0.5, flow, 0.8, -100.0).unwrap();
    for &(t, x, q) in releases {
        p = p.with_release(t, Vec2::new(x[0], x[1]), q).unwrap();
    }
    p
}

proptest! {
    #[test]
    fn superposition_is_linear(
        t1 in -20.0f64..-0.1, t2 in -20.0f64..-0.1,
        q1 in 1.0f64..500.0, q2 in 1.0f64..500.0,
        x in -10.0f64..10.0, y in -10.0f64..10.0,
    ) {
        let a = [(t1, [1.0, 2.0], q1)];
        let b = [(t2, [-3.0, 0.5], q2)];
        let both = plume(&[a[0], b[0]]).eval(Vec2::new(x, y), 0.0).unwrap();
        let sa = plume(&a).eval(Vec2::new(x, y), 0.0).unwrap();
        let sb = plume(&b).eval(Vec2::new(x, y), 0.0).unwrap();
        let scale = sa.c.abs() + sb.c.abs() + 1e-300;
        prop_assert!((both.c - sa.c - sb.c).abs() <= 1e-12 * scale);
        prop_assert!((both.grad - sa.grad - sb.grad).norm() <= 1e-12 * (sa.grad.norm() + sb.grad.norm() + 1e-300));
    }

    #[test]
    fn scaling_scales_every_quantity(s in 0.1f64..10.0, x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let f = Field::Puff(plume(&[(-5.0, [0.0, 0.0], 300.0), (-2.0, [2.0, 1.0], 50.0)]));
        let a = f.eval(Vec2::new(x, y), 0.0).unwrap();
        let b = f.scaled(s).eval(Vec2::new(x, y), 0.0).unwrap();
        prop_assert!((b.c - s * a.c).abs() <= 1e-12 * s * a.c.abs().max(1e-300));
        prop_assert!((b.lap - s * a.lap).abs() <= 1e-12 * s * a.lap.abs().max(1e-300));
    }
}

#[test]
fn continuous_source_matches_its_puffs() {
    let flow = FlowField::uniform(Vec2::new(0.2, 0.0));
    let p = PuffPlume::new(Vec2::new(1.0, 1.0), 4.0, 0.5, flow.clone(), 1.0, 0.0).unwrap();
    let x = Vec2::new(3.0, 1.5);
    let t = 2.2;
    // releases at 0, 0.5, ..., 2.0, each carrying 4 * 0.5
    let expected: f64 = (0..5)
        .map(|i| {
            GaussianPuff::new(i as f64 * 0.5, Vec2::new(1.0, 1.0), 2.0, 1.0)
                .unwrap()
                .concentration(&flow, x, t)
                .unwrap()
        })
        .sum();
    assert!((p.eval(x, t).unwrap().c - expected).abs() < 1e-12);
    assert_eq!(p.released_puffs(t).count(), 5);
}

#[test]
fn periodic_grid_keeps_mass_under_piecewise_flow() {
    let flow = FlowField::piecewise(vec![1.0], vec![Vec2::new(0.5, 0.0), Vec2::new(-0.2, 0.4)]).unwrap();
    let mut g = GridField::from_fn(Vec2::zeros(), 0.2, 40, 30, 0.1, flow, Boundary::Periodic, 0.0, |x| {
        (-(x - Vec2::new(4.0, 3.0)).norm_squared()).exp()
    })
    .unwrap();
    let m0 = g.mass();
    g.advance_to(2.0, 0.05).unwrap();
    assert!(((g.mass() - m0) / m0).abs() < 1e-10 * 200.0);
    assert!((g.time - 2.0).abs() < 1e-12);
}
