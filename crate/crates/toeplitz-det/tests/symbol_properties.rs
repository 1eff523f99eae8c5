//! Randomized properties of the circle-symbol layer: sampling round trips,
//! winding additivity, reflection algebra, and the log/exp inverse pair on
//! the preset families.

use num_complex::Complex64;
use proptest::prelude::*;
use toeplitz_det::symbol::exp_symbol;
use toeplitz_det::{
    coefficients_from_samples, multiply, preset, PresetParams, Symbol, TruncationPolicy,
};

/// Symbols with support inside `[-12, 12]` and coefficients of modulus
/// at most `2*sqrt(2)`; a grid of 32 points oversamples all of them.
fn arb_band_limited() -> impl Strategy<Value = Symbol> {
    prop::collection::vec((-12i64..=12, -2.0f64..2.0, -2.0f64..2.0), 1..24).prop_map(|pairs| {
        Symbol::from_pairs(
            pairs
                .into_iter()
                .map(|(k, re, im)| (k, Complex64::new(re, im))),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Sampling at enough roots of unity and transforming back is the
    /// identity on coefficients, up to round-off scaled by the mass.
    #[test]
    fn sampling_round_trips_band_limited_symbols(x in arb_band_limited()) {
        let recovered = coefficients_from_samples(&x.sample(32)).unwrap();
        let tol = 1e-13 * (1.0 + x.l1_norm());
        for k in -16i64..=16 {
            prop_assert!(
                (recovered.coeff(k) - x.coeff(k)).norm() <= tol,
                "coefficient {} drifted: {} vs {}",
                k,
                recovered.coeff(k),
                x.coeff(k),
            );
        }
    }

    /// Winding numbers add under pointwise products.
    #[test]
    fn winding_is_additive_over_products(
        p in -4i64..=4,
        q in -4i64..=4,
        r in 0.1f64..0.8,
        s in 0.1f64..0.8,
    ) {
        let x = preset(&PresetParams::geom(r, s)).unwrap().shift(p);
        let y = preset(&PresetParams::exp2(s, r)).unwrap().shift(q);
        let product = multiply(&x, &y);
        let grid = product.default_grid();
        prop_assert_eq!(x.winding_number(grid).unwrap(), p);
        prop_assert_eq!(y.winding_number(grid).unwrap(), q);
        prop_assert_eq!(product.winding_number(grid).unwrap(), p + q);
    }

    /// Reflection is an involution and distributes over products.
    #[test]
    fn reflection_is_multiplicative(x in arb_band_limited(), y in arb_band_limited()) {
        prop_assert_eq!(x.reflect().reflect(), x.clone());
        let lhs = multiply(&x, &y).reflect();
        let rhs = multiply(&x.reflect(), &y.reflect());
        let tol = 1e-12 * (1.0 + x.l1_norm() * y.l1_norm());
        for k in -26i64..=26 {
            prop_assert!((lhs.coeff(k) - rhs.coeff(k)).norm() <= tol);
        }
    }
}

/// `exp(log a)` returns to `a` pointwise on the sampling grid for every
/// zero-winding preset family.
#[test]
fn log_then_exp_returns_to_the_symbol() {
    for params in [
        PresetParams::geom(0.5, 0.3),
        PresetParams::exp2(0.4, 0.2),
        PresetParams::cbeta(1.5, 7, 0.2),
    ] {
        let a = preset(&params).unwrap();
        let back = exp_symbol(&a.log_default().unwrap(), a.default_grid()).unwrap();
        let m = a.default_grid();
        for (u, v) in back.sample(m).iter().zip(a.sample(m)) {
            assert!(
                (u - v).norm() <= 1e-10 * v.norm().max(1.0),
                "{}: pointwise gap {:.3e}",
                params.name(),
                (u - v).norm()
            );
        }
    }
}

/// Truncation policies deserialize from sparse JSON with defaults filled in,
/// which is how the experiment configs spell them.
#[test]
fn truncation_policy_deserializes_with_defaults() {
    let policy: TruncationPolicy = serde_json::from_str("{}").unwrap();
    assert_eq!(policy.target_level, 64);
    assert!((policy.tail_tol - 1e-12).abs() < 1e-27);
    assert!(policy.doubling_check);

    let overridden: TruncationPolicy =
        serde_json::from_str(r#"{"target_level": 128, "doubling_check": false}"#).unwrap();
    assert_eq!(overridden.target_level, 128);
    assert!(!overridden.doubling_check);

    let text = serde_json::to_string(&overridden).unwrap();
    let back: TruncationPolicy = serde_json::from_str(&text).unwrap();
    assert_eq!(back.target_level, overridden.target_level);
    assert_eq!(back.doubling_check, overridden.doubling_check);
}
