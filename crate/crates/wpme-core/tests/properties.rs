//! Property tests for the structural invariants the rest of the crate
//! leans on: the summation-by-parts identities of the discrete Witten
//! Laplacian on *randomised* geometry, and the ordering of the porous
//! gradient-bound families as pure functions of their parameters.

use proptest::prelude::*;
use wpme_core::curvature::bakry_emery;
use wpme_core::estimates::{bound_rhs, EstimateKind};
use wpme_core::manifold::{Manifold, Weight};
use wpme_core::ops::{divergence_scale, symmetry_defect, weighted_integral, witten_laplacian};
use wpme_core::trig::TrigPoly;
use wpme_core::ScalarField;

proptest! {
    /// The discrete operator keeps its defining identities on arbitrary
    /// circle geometry (length, resolution, weight amplitude) and
    /// arbitrary trig data — not just on the curated grids the unit tests
    /// use: self-adjointness in L²(dμ) to round-off, constants exactly in
    /// the kernel, exact conservation of ∫Δ_φf dμ, and a curvature report
    /// that is invariant under the gauge shift φ → φ + c (which rescales
    /// dμ but leaves Ric_φ^m untouched).
    #[test]
    fn operator_identities_hold_on_random_geometry(
        length in 3.0f64..12.0,
        n in 48usize..160,
        amplitude in 0.0f64..0.8,
        shift in -3.0f64..3.0,
        m in 1.05f64..12.0,
        seed in 0u64..1_000_000,
    ) {
        let mf = Manifold::circle(length, n, Weight::SinFirstCoord { amplitude }).unwrap();
        let u = TrigPoly::random(seed, &[length], 4, 0.7, 0.6).sample(&mf);
        let v = TrigPoly::random(seed ^ 0x9e37_79b9, &[length], 4, 0.7, 0.6).sample(&mf);

        // ⟨Δ_φu, v⟩_μ = ⟨u, Δ_φv⟩_μ to round-off relative to the size of
        // the two pairings.
        let lap_u = witten_laplacian(&u);
        let lap_v = witten_laplacian(&v);
        let one = ScalarField::constant(&mf, 1.0);
        let vol = weighted_integral(&one);
        let scale = vol
            * (lap_u.norm_inf() * v.norm_inf()).max(u.norm_inf() * lap_v.norm_inf());
        let defect = symmetry_defect(&u, &v).unwrap();
        prop_assert!(defect <= 1e-10 * scale, "symmetry defect {defect:.3e} vs scale {scale:.3e}");

        // Constants are in the kernel exactly: every stencil term is a
        // difference of equal values.
        prop_assert_eq!(witten_laplacian(&one).norm_inf(), 0.0);

        // ∫Δ_φu dμ telescopes to zero; compare against the weighted L¹
        // mass of the integrand, not an absolute epsilon.
        let mass = weighted_integral(&lap_u).abs();
        prop_assert!(mass <= 1e-12 * divergence_scale(&u));

        // Gauge invariance of the curvature report.
        let base = bakry_emery(&mf, m).unwrap();
        let shifted_phi: Vec<f64> = mf.phi().iter().map(|p| p + shift).collect();
        let mf_shifted = Manifold::circle(length, n, Weight::Custom(shifted_phi)).unwrap();
        let shifted = bakry_emery(&mf_shifted, m).unwrap();
        let tens_scale = 1.0 + base.tensor.norm_inf();
        prop_assert!(
            (base.lambda_min - shifted.lambda_min).abs() <= 1e-10 * tens_scale,
            "lambda_min moved under φ → φ + c: {} vs {}",
            base.lambda_min,
            shifted.lambda_min
        );
        prop_assert!((base.k - shifted.k).abs() <= 1e-10 * tens_scale);
    }

    /// Ordering of the porous bound families as pure functions of
    /// (ã, M, K, α, t): the sharpened α-bound never exceeds the plain one,
    /// and the coth-schedule right-hand side sits between its analytic
    /// floor ã/t + ãMK and the linear-schedule right-hand side (the
    /// chain that makes the coth schedule the preferred one).
    #[test]
    fn porous_bound_families_are_ordered(
        a_tilde in 0.05f64..0.95,
        big_m in 0.01f64..5.0,
        k in 0.0f64..3.0,
        t in 0.01f64..10.0,
        alpha in 1.001f64..8.0,
    ) {
        let plain = bound_rhs(EstimateKind::PorousAlpha, a_tilde, big_m, k, Some(alpha), t)
            .unwrap()
            .bound;
        let sharp = bound_rhs(EstimateKind::PorousAlphaSharp, a_tilde, big_m, k, Some(alpha), t)
            .unwrap()
            .bound;
        prop_assert!(
            sharp <= plain + 1e-12 * (1.0 + plain.abs()),
            "sharp {sharp} > plain {plain}"
        );

        let coth = bound_rhs(EstimateKind::PorousCothAlpha, a_tilde, big_m, k, None, t).unwrap();
        let lin = bound_rhs(EstimateKind::PorousLinearAlpha, a_tilde, big_m, k, None, t).unwrap();
        let floor = a_tilde / t + a_tilde * big_m * k;
        let eps = 1e-9 * (1.0 + lin.bound.abs());
        prop_assert!(coth.bound >= floor - eps, "coth rhs {} below floor {floor}", coth.bound);
        prop_assert!(coth.bound <= lin.bound + eps, "coth rhs {} above linear {}", coth.bound, lin.bound);

        // The schedules themselves obey the same ordering, starting from 1.
        let alpha_lin = 1.0 + (2.0 / 3.0) * big_m * k * t;
        prop_assert!(coth.alpha >= 1.0 - 1e-12);
        prop_assert!(coth.alpha <= alpha_lin + 1e-9 * alpha_lin);
    }
}
