//! Randomized structural properties: the config parser's total error
//! handling, linearity of the integrator and quadratures, and the data
//! window's range guarantees.

use ndarray::Array3;
use nullwave::config::parse_config;
use nullwave::datagen::plateau;
use nullwave::field::rk_step;
use nullwave::grid::{Geometry, GridSpec};
use nullwave::ops::{deriv, quadrature_slice};
use proptest::prelude::*;

fn small_grid() -> GridSpec {
    GridSpec::new(Geometry::Plane { lx: 1.0, ly: 1.0 }, 1.0, [4, 4, 4], None, 2, 0.5, 0.0)
        .unwrap()
}

fn cube(vals: Vec<f64>) -> Array3<f64> {
    Array3::from_shape_vec((4, 4, 4), vals).unwrap()
}

proptest! {
    #[test]
    fn parser_rejects_garbage_without_panicking(
        key in "[a-z_]{1,12}",
        value in "[ -~]{0,16}",
    ) {
        let overrides = vec![format!("{key}={value}")];
        let _ = parse_config(None, &overrides);
    }

    #[test]
    fn parsed_numeric_overrides_round_trip(t in 0.01f64..4.0, cfl in 0.05f64..1.0) {
        let overrides = vec![format!("t_final={t}"), format!("cfl={cfl}")];
        let cfg = parse_config(None, &overrides).unwrap();
        prop_assert_eq!(cfg.t_final, t);
        prop_assert_eq!(cfg.cfl, cfl);
    }

    #[test]
    fn integrator_is_linear(vals in proptest::collection::vec(-10.0f64..10.0, 64), a in -3.0f64..3.0) {
        let grid = small_grid();
        let f = cube(vals);
        let step = |s: &Vec<Array3<f64>>| {
            rk_step(s, 0.1, grid.order, |st, _| vec![deriv(&st[0], 1, &grid)])
        };
        let lhs = step(&vec![f.mapv(|v| a * v)]);
        let rhs = step(&vec![f]);
        for (u, v) in lhs[0].iter().zip(rhs[0].iter()) {
            prop_assert!((u - a * v).abs() <= 1e-12 * (1.0 + v.abs() * a.abs()));
        }
    }

    #[test]
    fn quadrature_is_linear_and_exact_on_constants(
        vals in proptest::collection::vec(-5.0f64..5.0, 64),
        c in -4.0f64..4.0,
    ) {
        let grid = small_grid();
        let f = cube(vals);
        let qf = quadrature_slice(&f, &grid);
        let qcf = quadrature_slice(&f.mapv(|v| c * v), &grid);
        prop_assert!((qcf - c * qf).abs() <= 1e-12 * (1.0 + qf.abs() * c.abs()));
        // slab volume is t_final * lx * ly = 1
        let ones = Array3::from_elem((4, 4, 4), 1.0);
        prop_assert!((quadrature_slice(&ones, &grid) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn plateau_stays_in_range_and_decreases(
        x in -2.0f64..3.0,
        lo in -1.0f64..0.5,
        width in 0.1f64..1.5,
    ) {
        let hi = lo + width;
        let v = plateau(x, lo, hi);
        prop_assert!((0.0..=1.0).contains(&v));
        let w = plateau(x + 0.1, lo, hi);
        prop_assert!(w <= v + 1e-15);
    }
}
