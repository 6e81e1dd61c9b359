//! Property tests of the spectral layer: Parseval, transform round trips,
//! multiplier composition and commutation on arbitrary fields, symbol
//! oddness, and resonance-function consistency.

use fkp_core::grid::make_grid;
use fkp_core::norms::{norm_l2, norm_hs1s2};
use fkp_core::ops::{bessel_x, dealias_23, frac_deriv_x};
use fkp_core::resonance::{gamma2, omega_res, Variant};
use fkp_core::symbols::{eval_omega, eval_w, KPSymbol, Kappa, SymbolFamily};
use fkp_core::Field;
use ndarray::Array2;
use proptest::prelude::*;
use std::f64::consts::PI;

fn field_strategy() -> impl Strategy<Value = Field> {
    (
        proptest::collection::vec(-1.0f64..1.0, 16 * 16),
        1.0f64..10.0,
        1.0f64..10.0,
    )
        .prop_map(|(vals, lx, ly)| {
            let grid = make_grid(16, 16, lx, ly).unwrap();
            let arr = Array2::from_shape_vec((16, 16), vals).unwrap();
            Field::from_values(grid, arr).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_and_round_trip(u in field_strategy()) {
        let direct = norm_l2(&u).unwrap();
        let spectral = norm_l2(&u.to_spectral()).unwrap();
        prop_assert!((direct - spectral).abs() <= 1e-12 * direct.max(1.0));

        let back = u.to_spectral().to_real().unwrap();
        let worst = u
            .values()
            .unwrap()
            .iter()
            .zip(back.values().unwrap().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        prop_assert!(worst <= 1e-12);
    }

    #[test]
    fn fractional_derivatives_compose(
        u in field_strategy(),
        a in 0.1f64..1.5,
        b in 0.1f64..1.5,
    ) {
        let two_step = frac_deriv_x(&frac_deriv_x(&u, a).unwrap(), b).unwrap();
        let one_step = frac_deriv_x(&u, a + b).unwrap();
        let scale = norm_l2(&one_step).unwrap();
        let worst = two_step
            .values()
            .unwrap()
            .iter()
            .zip(one_step.values().unwrap().iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0_f64, f64::max);
        prop_assert!(worst <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn diagonal_multipliers_commute(
        u in field_strategy(),
        s in -1.0f64..2.0,
        r in 0.1f64..1.5,
    ) {
        let ab = bessel_x(&frac_deriv_x(&u, r).unwrap(), s).unwrap();
        let ba = frac_deriv_x(&bessel_x(&u, s).unwrap(), r).unwrap();
        let scale = norm_l2(&ab).unwrap();
        let worst = ab
            .values()
            .unwrap()
            .iter()
            .zip(ba.values().unwrap().iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0_f64, f64::max);
        prop_assert!(worst <= 1e-11 * scale.max(1.0));
    }

    #[test]
    fn dealias_is_a_projection(u in field_strategy()) {
        let once = dealias_23(&u);
        let twice = dealias_23(&once);
        let a = once.coefficients().unwrap();
        let b = twice.coefficients().unwrap();
        let worst = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0_f64, f64::max);
        prop_assert!(worst == 0.0);
        prop_assert!(norm_l2(&once).unwrap() <= norm_l2(&u).unwrap() + 1e-12);
    }

    #[test]
    fn hs_norm_dominates_l2_for_nonnegative_orders(
        u in field_strategy(),
        s1 in 0.0f64..2.0,
        s2 in 0.0f64..2.0,
    ) {
        let weighted = norm_hs1s2(&u, s1, s2).unwrap();
        prop_assert!(weighted + 1e-12 >= norm_l2(&u).unwrap());
    }

    #[test]
    fn symbols_are_odd(xi in -30.0f64..30.0, delta in 0.2f64..5.0, b in 0.2f64..5.0) {
        for fam in [
            SymbolFamily::pure_power(1.3).unwrap(),
            SymbolFamily::ilw(delta).unwrap(),
            SymbolFamily::whitham_st(b).unwrap(),
        ] {
            prop_assert_eq!(eval_w(&fam, -xi) + eval_w(&fam, xi), 0.0);
        }
    }

    #[test]
    fn resonance_matches_symbol_additivity(
        xi1 in 0.05f64..4.0,
        xi2 in 0.05f64..4.0,
        eta1 in -4.0f64..4.0,
        eta2 in -4.0f64..4.0,
        alpha in 0.2f64..2.0,
    ) {
        for (variant, kappa) in [(Variant::Fkp2, Kappa::PlusOne), (Variant::Fkp1, Kappa::MinusOne)] {
            let sym = KPSymbol::pure_power(alpha, kappa).unwrap();
            let direct = eval_omega(&sym, xi1 + xi2, eta1 + eta2)
                - eval_omega(&sym, xi1, eta1)
                - eval_omega(&sym, xi2, eta2);
            let split = omega_res(variant, alpha, xi1, xi2, eta1, eta2).unwrap();
            let scale = direct.abs().max(split.abs()).max(1.0);
            prop_assert!((direct - split).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn gamma2_nonnegative_when_denominator_positive(
        xi1 in 0.01f64..5.0,
        xi2 in 0.01f64..5.0,
        eta1 in -5.0f64..5.0,
        eta2 in -5.0f64..5.0,
    ) {
        prop_assert!(gamma2(xi1, xi2, eta1, eta2).unwrap() >= 0.0);
    }
}

#[test]
fn snapshot_header_is_parseable_back() {
    let grid = make_grid(16, 8, 2.0 * PI, 1.0).unwrap();
    let u = Field::from_fn(grid, |x, y| (x + 2.0 * y).sin());
    let dir = std::env::temp_dir().join(format!("fkp_props_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("u.fkp");
    fkp_core::io::write_snapshot(&path, &u).unwrap();
    let v = fkp_core::io::read_snapshot(&path).unwrap();
    assert_eq!(
        u.values().unwrap().as_slice().unwrap(),
        v.values().unwrap().as_slice().unwrap()
    );
    std::fs::remove_dir_all(&dir).ok();
}
