mod common;

use charlab::dist::JointCharFunction;
use charlab::feq::{
    eliminate_lemma1, eliminate_lemma2, equation3_residual, is_in_dmk, polynomial_degree,
    reconstruction_error, validate_certificate, EliminationOptions, FeqError, GroupFunction, Space,
};
use charlab::homs::{CoefficientSystem, Homomorphism};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn random_function(seed: u64, y: &charlab::group::FiniteAbelianGroup) -> GroupFunction {
    let mut r = rng(seed);
    GroupFunction::from_fn(y, |_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn differences_commute_and_are_linear(moduli in prop::collection::vec(2i64..=6, 1..=2), seed in any::<u64>()) {
        let y = g(&moduli);
        let psi = random_function(seed, &y);
        let phi = random_function(seed ^ 1, &y);
        let h = y.element_at(seed as usize % y.order());
        let k = y.element_at((seed >> 17) as usize % y.order());
        let a = psi.difference(&h).unwrap().difference(&k).unwrap();
        let b = psi.difference(&k).unwrap().difference(&h).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            prop_assert!((u - v).norm() <= 1e-12);
        }
        let sum = psi.add(&phi).unwrap().difference(&h).unwrap();
        let parts = psi.difference(&h).unwrap().add(&phi.difference(&h).unwrap()).unwrap();
        for (u, v) in sum.values().iter().zip(parts.values()) {
            prop_assert!((u - v).norm() <= 1e-12);
        }
    }

    #[test]
    fn constructed_members_pass_and_bumps_fail(seed in any::<u64>(), m in 2usize..=3, n in 2i64..=4) {
        let y = g(&[n]);
        let mut r = rng(seed);
        let f = constructed_member(&mut r, &y, m);
        let v = is_in_dmk(&f, m - 1, 1e-9).unwrap();
        prop_assert!(v.member && v.residual <= 1e-10);
        prop_assert!(anchored_interaction_residual(f.values(), y.order(), m) <= 1e-9);
        let mut bumped = f.clone();
        let at = r.random_range(1..bumped.values().len());
        bumped.values_mut()[at] *= Complex64::from_polar(1.0, 0.3);
        let v = is_in_dmk(&bumped, m - 1, 1e-9).unwrap();
        prop_assert!(!v.member && v.residual >= 0.1);
        prop_assert!(anchored_interaction_residual(bumped.values(), y.order(), m) > 1e-9);
    }
}

#[test]
fn characters_and_random_functions_have_no_degree() {
    let y = g(&[5]);
    let chi = GroupFunction::character(&y, &y.element_at(1)).unwrap();
    assert_eq!(polynomial_degree(&chi, 1e-9), None);
    let d = chi.difference(&y.element_at(1)).unwrap();
    let factor = chi.values()[1] - 1.0;
    for (k, v) in d.values().iter().enumerate() {
        assert!((v - chi.values()[k] * factor).norm() < 1e-12);
    }
    assert_eq!(polynomial_degree(&GroupFunction::constant(&y, Complex64::new(2.0, 1.0)), 1e-9), Some(0));
    assert_eq!(polynomial_degree(&random_function(4, &y), 1e-9), None);
}

#[test]
fn product_joint_reports_factors_that_reconstruct() {
    let y = g(&[3]);
    let f = constructed_member(&mut rng(12), &y, 2);
    let v = is_in_dmk(&f, 1, 1e-9).unwrap();
    assert!(v.member);
    if let Some(factors) = &v.factors {
        assert!(reconstruction_error(&f, factors) <= 1e-6);
    } else {
        assert!(v.factors_omitted.is_some());
    }
}

#[test]
fn dmk_rejects_bad_class_index() {
    let y = g(&[2]);
    let f = JointCharFunction::new(&y, 2, vec![Complex64::new(1.0, 0.0); 4]).unwrap();
    assert!(matches!(is_in_dmk(&f, 0, 1e-9), Err(FeqError::InvalidArgument(_))));
    assert!(matches!(is_in_dmk(&f, 3, 1e-9), Err(FeqError::InvalidArgument(_))));
    assert!(is_in_dmk(&f, 2, 1e-9).unwrap().member);
}

#[test]
fn lemma1_on_constants_and_characters() {
    let y = g(&[7]);
    let adjoints = vec![Homomorphism::scalar(&y, 1), Homomorphism::scalar(&y, 3)];
    let opts = EliminationOptions::default();
    let c = GroupFunction::constant(&y, Complex64::new(0.5, -0.25));
    let r = eliminate_lemma1(&adjoints, &c, &opts).unwrap();
    assert!(r.is_polynomial && r.degree == Some(0) && r.degree_bound_met);
    let chi = GroupFunction::character(&y, &y.element_at(2)).unwrap();
    assert!(!eliminate_lemma1(&adjoints, &chi, &opts).unwrap().is_polynomial);
}

#[test]
fn lemma2_certificates_replay_and_catch_perturbations() {
    let mut r = rng(77);
    for y in [g(&[5]), g(&[2, 2]), g(&[7]), g(&[3, 3])] {
        let cs = random_system_with_condition_11(&mut r, &y, 2, 2).unwrap();
        let psis: Vec<GroupFunction> = (0..2)
            .map(|k| GroupFunction::constant(&y, Complex64::new(k as f64, 1.0)))
            .collect();
        let opts = EliminationOptions::default();
        assert!(equation3_residual(&cs, &psis, Space::Additive).unwrap() <= 1e-12);
        let certs = eliminate_lemma2(&cs, &psis, &opts).unwrap();
        for c in &certs {
            assert_eq!(c.degree, 0);
            validate_certificate(&cs, &psis, c, &opts).unwrap();
            // certificates survive a JSON round trip
            let text = serde_json::to_string(c).unwrap();
            let back = serde_json::from_str(&text).unwrap();
            validate_certificate(&cs, &psis, &back, &opts).unwrap();
        }
        // a tampered shift is rejected
        let mut bad = certs[0].clone();
        if let Some(rec) = bad.shifts.first_mut() {
            rec.h[0][0] = (rec.h[0][0] + 1) % y.moduli()[0];
            assert!(validate_certificate(&cs, &psis, &bad, &opts).is_err());
        }
        let mut perturbed = psis.clone();
        let chi = GroupFunction::character(&y, &y.element_at(1)).unwrap();
        perturbed[1] = perturbed[1].add(&chi.scale(Complex64::new(1e-3, 0.0))).unwrap();
        match eliminate_lemma2(&cs, &perturbed, &opts) {
            Err(FeqError::Equation3Violated { residual }) => assert!((residual - 1e-3).abs() <= 1e-4),
            other => panic!("expected equation-3-violated on {y}, got {other:?}"),
        }
    }
}

#[test]
fn lemma2_requires_condition_11() {
    let y = g(&[2]);
    let cs = CoefficientSystem::from_scalars(&y, &[vec![1, 1], vec![1, 1]]).unwrap();
    let psis = vec![GroupFunction::constant(&y, Complex64::new(0.0, 0.0)); 2];
    assert!(matches!(
        eliminate_lemma2(&cs, &psis, &EliminationOptions::default()),
        Err(FeqError::Condition11Violated { .. })
    ));
}
