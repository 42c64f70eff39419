//! Invariants of the discrete operators, checked on random data.

use std::sync::Arc;

use proptest::prelude::*;

use plap_frac::frac_ops::{
    caputo_derivative_grid, gamma, rl_derivative_grid, rl_integral_grid, FractionalOrder,
};
use plap_frac::io::{read_solution_csv, write_solution_csv};
use plap_frac::problem::ProblemSpec;
use plap_frac::solver::{Mode, Operator};
use plap_frac::verify::residual_bc;
use plap_frac::{GridFunction, Mesh};

fn order(v: f64) -> FractionalOrder {
    FractionalOrder::new(v).unwrap()
}

fn impulse_mesh(points: &[f64], m: usize) -> Arc<Mesh> {
    Arc::new(Mesh::new(std::f64::consts::PI, points, m).unwrap())
}

fn points() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![Just(vec![]), Just(vec![1.0]), Just(vec![0.8, 2.1])]
}

fn linear_spec(a: f64, b: f64, c: f64) -> ProblemSpec {
    let value = format!("{a}*y");
    let slope = format!("{b}*y");
    ProblemSpec::parse(1.6, 0.6, 0.1, "cos(t)", &format!("{c}"), 2.0, &[(1.2, &value, &slope)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integral_is_exact_on_affine(a in 0.2f64..2.5, c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, pts in points()) {
        let mesh = impulse_mesh(&pts, 24);
        let f = GridFunction::from_fn(Arc::clone(&mesh), |t| c0 + c1 * t);
        let got = rl_integral_grid(order(a), &f);
        for (_, t, _, v) in got.samples() {
            let exact = c0 * t.powf(a) / gamma(a + 1.0) + c1 * t.powf(a + 1.0) / gamma(a + 2.0);
            prop_assert!((v - exact).abs() <= 1e-11 * (1.0 + exact.abs()), "t {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn integral_is_linear(a in 0.2f64..2.0, s in -2.0f64..2.0, r in -2.0f64..2.0, pts in points()) {
        let mesh = impulse_mesh(&pts, 16);
        let f = GridFunction::from_piecewise(Arc::clone(&mesh), |k, t| (t + k as f64).sin());
        let g = GridFunction::from_fn(Arc::clone(&mesh), |t| t.exp() - 1.0);
        let lhs = rl_integral_grid(order(a), &f.zip_with(&g, |x, y| s * x + r * y));
        let rhs = rl_integral_grid(order(a), &f).zip_with(&rl_integral_grid(order(a), &g), |x, y| s * x + r * y);
        prop_assert!(lhs.sub(&rhs).pc_norm() <= 1e-12 * (1.0 + rhs.pc_norm()));
    }

    #[test]
    fn caputo_annihilates_piecewise_affine(a in 1.05f64..2.0, c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, pts in points()) {
        let mesh = impulse_mesh(&pts, 32);
        let y = GridFunction::from_piecewise(Arc::clone(&mesh), |k, t| c0 + c1 * t + 0.5 * k as f64)
            .with_derivative_fn(|_, _| c1);
        let d = caputo_derivative_grid(order(a), &y).unwrap();
        prop_assert!(d.pc_norm() <= 1e-8 * (1.0 + c0.abs() + c1.abs()), "{}", d.pc_norm());
    }

    #[test]
    fn rl_derivative_exact_on_leading_terms(b in 0.1f64..1.0, c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, pts in points()) {
        let mesh = impulse_mesh(&pts, 32);
        let f = GridFunction::from_fn(Arc::clone(&mesh), |t| c0 * t.powf(b) + c1 * t.powf(1.0 + b));
        let d = rl_derivative_grid(order(b), &f).unwrap();
        for (_, t, _, v) in d.samples() {
            let exact = c0 * gamma(1.0 + b) + c1 * gamma(2.0 + b) * t;
            prop_assert!((v - exact).abs() <= 1e-8 * (1.0 + exact.abs()), "t {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn operator_is_linear_for_p_two(a in -0.3f64..0.3, b in -0.3f64..0.3, c in 0.0f64..1.0,
                                     s in -2.0f64..2.0, r in -2.0f64..2.0) {
        let spec = linear_spec(a, b, c);
        let op = Operator::new(&spec, spec.mesh(24).unwrap()).unwrap();
        let mesh = Arc::clone(op.mesh());
        let y1 = GridFunction::from_fn(Arc::clone(&mesh), |t| t.cos());
        let y2 = GridFunction::from_piecewise(Arc::clone(&mesh), |k, t| t * t - k as f64);
        for mode in [Mode::Rederived, Mode::AsPublished] {
            let combined = op.apply(&y1.zip_with(&y2, |x, y| s * x + r * y), mode, 1.0).unwrap();
            let t1 = op.apply(&y1, mode, 1.0).unwrap();
            let t2 = op.apply(&y2, mode, 1.0).unwrap();
            let expect = t1.zip_with(&t2, |x, y| s * x + r * y);
            prop_assert!(combined.sub(&expect).pc_norm() <= 1e-11 * (1.0 + expect.pc_norm()));
        }
    }

    #[test]
    fn rederived_image_meets_boundary_conditions(a in -0.3f64..0.3, b in -0.3f64..0.3, c in 0.0f64..1.0, w in 0.1f64..3.0) {
        let spec = linear_spec(a, b, c);
        let op = Operator::new(&spec, spec.mesh(24).unwrap()).unwrap();
        let y = GridFunction::from_fn(Arc::clone(op.mesh()), |t| (w * t).sin() + 0.3);
        let ty = op.apply(&y, Mode::Rederived, 1.0).unwrap();
        let (b0, b1) = residual_bc(&ty).unwrap();
        prop_assert!(b0.abs().max(b1.abs()) <= 1e-12 * (1.0 + ty.pc_norm()), "{b0} {b1}");
    }

    #[test]
    fn csv_roundtrip_is_bit_exact(raw in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 27),
                                  pts in points()) {
        let mesh = impulse_mesh(&pts, 8);
        let values = raw.chunks(9).take(mesh.piece_count()).map(<[f64]>::to_vec).collect();
        let y = GridFunction::from_values(Arc::clone(&mesh), values).unwrap();
        let mut buf = Vec::new();
        write_solution_csv(&mut buf, &y).unwrap();
        let back = read_solution_csv(buf.as_slice(), &mesh).unwrap();
        prop_assert_eq!(back.values(), y.values());
    }
}
