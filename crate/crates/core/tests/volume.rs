use std::f64::consts::PI;

use conformal_core::builtin;
use conformal_core::curvature::curvature_suite;
use conformal_core::fg::fg_expand;
use conformal_core::series::{Basis, TruncatedSeries};
use conformal_core::tensor::{trace, MetricJet};
use conformal_core::volume::*;
use conformal_core::{Error, Rational, Scalar};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

fn one_plus(f: FourierSum) -> FourierSum {
    FourierSum::constant(f.dim(), 1.0).plus(&f).unwrap()
}

/// A generic small trig metric on T^4.
fn trig_metric() -> FourierMetric {
    FourierMetric::from_tensor(
        FourierTensor::identity(4)
            .with(0, 0, one_plus(FourierSum::cos(&[1, 0, 0, 0], 0.1)))
            .with(1, 1, one_plus(FourierSum::sin(&[0, 1, 1, 0], 0.08)))
            .with(0, 2, FourierSum::cos(&[0, 0, 0, 1], 0.05))
            .with(1, 3, FourierSum::sin(&[1, 0, 1, 0], 0.04)),
    )
}

fn trig_perturbation() -> FourierField {
    FourierField::from_tensor(
        FourierTensor::zero(4)
            .with(0, 0, FourierSum::sin(&[1, 0, 0, 0], 0.3))
            .with(2, 2, FourierSum::cos(&[0, 1, 1, 0], 0.2))
            .with(1, 3, FourierSum::sin(&[1, 0, 1, 0], 0.2)),
    )
}

#[test]
fn sphere_volume_coefficients_are_binomial() {
    let g = builtin::sphere(4, 4, q(1, 4)).unwrap();
    let vc = volume_coeffs(&fg_expand(&g, 4).unwrap()).unwrap();
    assert_eq!(vc.even(), vec![q(-1, 1), q(3, 8)]);
    assert_eq!(*vc.v(1), q(0, 1));
    assert_eq!(*vc.v(3), q(0, 1));
    assert_eq!(*vc.log_term(), q(0, 1));
}

#[test]
fn flat_volume_coefficients_vanish() {
    let g = builtin::flat::<Rational>(4, 4).unwrap();
    let vc = volume_coeffs(&fg_expand(&g, 4).unwrap()).unwrap();
    assert_eq!(vc.all(), &[q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)]);
}

#[test]
fn second_volume_coefficient_is_half_trace_schouten() {
    for seed in 0..3 {
        let g = builtin::random::<Rational, _>(4, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let vc = volume_coeffs(&fg_expand(&g, 4).unwrap()).unwrap();
        let s = curvature_suite(&g).unwrap();
        let tr_p = trace(s.schouten(), &g, 0, 1).unwrap().value(&[]);
        assert_eq!(*vc.v(2), -tr_p.clone() * q(1, 2));
        // R = 2(n-1) tr P
        let r = s.scalar().value().clone();
        assert_eq!(r * q(-1, 12), *vc.v(2));
        assert_eq!(*vc.log_term(), q(0, 1));
    }
}

#[test]
fn unit_sphere_volumes() {
    assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-12);
    assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    assert!((sphere_volume(6) - 16.0 * PI.powi(3) / 15.0).abs() < 1e-12);
}

#[test]
fn trapezoid_examples() {
    let flat = FourierMetric::flat(4);
    let vol = integrate_torus(|_| Ok(1.0), &flat, &Grid::new(5)).unwrap();
    assert!((vol.value - (2.0 * PI).powi(4)).abs() < 1e-9);
    for n in 3..8 {
        let c = integrate_torus(|p| Ok(p[0].cos()), &flat, &Grid::new(n)).unwrap();
        assert!(c.value.abs() < 1e-10, "N = {n}: {}", c.value);
    }
    let c2 = integrate_torus(|p| Ok(p[0].cos().powi(2)), &flat, &Grid::new(5)).unwrap();
    assert!((c2.value - (2.0 * PI).powi(4) / 2.0).abs() < 1e-9);
}

#[test]
fn undersampled_grid_warns() {
    let g = FourierMetric::conformally_flat(&FourierSum::cos(&[3, 0, 0, 0], 0.1));
    let r = integrate_torus(|_| Ok(1.0), &g, &Grid::new(5)).unwrap();
    assert_eq!(r.warnings.len(), 1);
    assert!(r.warnings[0].contains("aliased"));
    assert!(Grid::new(7).warnings(3).is_empty());
    assert_eq!(Grid::default_for(1).points, 7);
}

#[test]
fn fourier_jet_matches_values_and_derivatives() {
    let f = FourierSum::cos(&[1, 2, 0, 0], 0.3)
        .plus(&FourierSum::sin(&[0, -1, 1, 3], 0.2))
        .unwrap();
    let basis = Basis::new(4, 3);
    let p = [0.3, 1.1, -0.4, 2.0];
    let jet = f.jet(&p, &basis, 3);
    assert!((jet.value() - f.eval(&p)).abs() < 1e-14);
    let h = 1e-5;
    for v in 0..4 {
        let mut a = p;
        let mut b = p;
        a[v] += h;
        b[v] -= h;
        let fd = (f.eval(&a) - f.eval(&b)) / (2.0 * h);
        let mut e = vec![0u32; 4];
        e[v] = 1;
        assert!((jet.coeff(&e) - fd).abs() < 1e-8);
    }
    // y_1^2 y_3: k_1^2 k_3 / 2 times the third derivative phase
    let third = f.jet(&p, &basis, 3).coeff(&[0, 2, 0, 1]);
    let th = -p[1] + p[2] + 3.0 * p[3];
    let expect = 0.2 * (-1.0f64).powi(2) * 3.0 / 2.0 * (th + 1.5 * PI).sin();
    assert!((third - expect).abs() < 1e-14);
}

#[test]
fn negative_wave_vectors_are_canonicalized() {
    let a = FourierSum::sin(&[-1, 2], 0.5);
    assert_eq!(a.modes()[0].k, vec![1, -2]);
    assert_eq!(a.modes()[0].sin, -0.5);
    let z = a.plus(&FourierSum::sin(&[1, -2], 0.5)).unwrap();
    assert!(z.is_zero());
    assert!(FourierSum::from_modes(2, vec![Mode { k: vec![1], cos: 1.0, sin: 0.0 }]).is_err());
}

proptest! {
    #[test]
    fn fourier_product_is_pointwise(
        k1 in prop::collection::vec(-2i32..3, 3),
        k2 in prop::collection::vec(-2i32..3, 3),
        a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in -1.0f64..1.0,
        p in prop::collection::vec(0.0f64..6.3, 3),
    ) {
        let f = FourierSum::from_modes(3, vec![Mode { k: k1, cos: a, sin: b }]).unwrap();
        let g = FourierSum::from_modes(3, vec![Mode { k: k2, cos: c, sin: d }]).unwrap();
        let fg = f.times(&g).unwrap();
        prop_assert!((fg.eval(&p) - f.eval(&p) * g.eval(&p)).abs() < 1e-12);
    }
}

#[test]
fn conformal_field_jets_exponentiate() {
    let u = FourierSum::cos(&[1, 0, 0, 0], 0.2);
    let g = FourierMetric::conformally_flat(&u);
    let basis = Basis::new(4, 3);
    let p = [0.7, 0.0, 1.0, 2.0];
    let jet = g.jet(&p, &basis, 3).unwrap();
    let expect = u.jet(&p, &basis, 3).scale(&2.0).exp().unwrap();
    let got: TruncatedSeries<f64> = jet.g().get(&[2, 2]);
    assert!(got.try_sub(&expect).unwrap().is_negligible(1e-14));
    assert!(jet.g().get(&[0, 1]).is_negligible(0.0));
    assert!((g.values(&p)[0] - (0.4 * 0.7f64.cos()).exp()).abs() < 1e-14);
}

#[test]
fn positivity_is_checked_on_the_grid() {
    let bad = FourierMetric::from_tensor(FourierTensor::identity(2).with(0, 0, one_plus(FourierSum::cos(&[1, 0], 1.5))));
    assert!(matches!(positivity_margin(&bad, &Grid::new(5)), Err(Error::NotPositiveDefinite(_))));
    let good = positivity_margin(&trig_metric(), &Grid::new(5)).unwrap();
    assert!(good > 0.8 && good < 1.0);
}

#[test]
fn flat_torus_has_no_log_term() {
    let r = volume_report(&FourierMetric::flat(4), 4, &Grid::new(3), false).unwrap();
    assert_eq!(r.log_coefficient, 0.0);
    assert_eq!(r.q_integral, 0.0);
    assert!(r.v_integrals.iter().all(|&v| v == 0.0));
}

#[test]
fn log_coefficient_is_conformally_and_translation_invariant() {
    let g = trig_metric();
    let grid = Grid::new(7);
    let l = log_coefficient(&g, 4, &grid).unwrap().value;
    assert!(l.abs() > 1e-3);
    let shifted = log_coefficient(&g, 4, &grid.clone().with_offset(0.37)).unwrap().value;
    let upsilon = FourierSum::sin(&[0, 0, 1, 0], 0.1);
    let rescaled = log_coefficient(&g.conformally_rescaled(&upsilon).unwrap(), 4, &Grid::new(7)).unwrap().value;
    assert!((shifted - l).abs() < 1e-5 * l.abs(), "{l} vs {shifted}");
    assert!((rescaled - l).abs() < 1e-5 * l.abs(), "{l} vs {rescaled}");
}

#[test]
fn volume_report_error_estimate() {
    let g = FourierMetric::conformally_flat(&FourierSum::cos(&[1, 0, 0, 0], 0.1));
    let r = volume_report(&g, 4, &Grid::new(7), true).unwrap();
    assert!(r.max_log_term < 1e-12);
    // conformally flat on a torus: int Q = 8 pi^2 chi - (1/4) int |W|^2 = 0
    assert!(r.q_integral.abs() < 1e-9);
    assert!(r.error_estimate.unwrap() < 1e-9);
    assert_eq!(r.grid_points, 2401);
}

#[test]
fn zero_perturbation_gives_zero_variation() {
    let r = variation_check(&trig_metric(), &FourierField::zero(4), 4, &Grid::new(5), 1e-3).unwrap();
    assert_eq!(r.q_derivative, 0.0);
    assert_eq!(r.obstruction_pairing, 0.0);
    assert_eq!(r.identity, [1.0, 1.0]);
    let b = boundary_variation(&trig_metric(), &FourierField::zero(4), 4, &default_sweep(), &Grid::new(3), 1e-3).unwrap();
    assert!(b.integrals.iter().all(|&f| f == 0.0));
}

#[test]
fn boundary_fit_vanishes_on_flat_background() {
    let b = boundary_variation(&FourierMetric::flat(4), &trig_perturbation(), 4, &default_sweep(), &Grid::new(5), 1e-3)
        .unwrap();
    assert_eq!(b.expected, 0.0);
    // the boundary integral vanishes identically, so only difference noise is left to fit
    assert!(b.integrals.iter().all(|f| f.abs() < 1e-8), "{:?}", b.integrals);
}

#[test]
fn family_must_stay_positive() {
    let h = FourierField::from_tensor(FourierTensor::diagonal(&FourierSum::cos(&[1, 0, 0, 0], 1.0)));
    let err = variation_check(&FourierMetric::flat(4), &h, 4, &Grid::new(3), 2.0).unwrap_err();
    assert!(matches!(err, Error::NotPositiveDefinite(_)));
}

#[test]
fn float_jet_agrees_with_rational_metric() {
    // the same constant-coefficient metric on both backends gives the same expansion
    let g = FourierMetric::from_tensor(FourierTensor::identity(4).with(0, 1, FourierSum::constant(4, 0.25)));
    let jet = g.jet(&[0.0; 4], &Basis::new(4, 4), 4).unwrap();
    assert!(fg_expand(&jet, 4).unwrap().obstruction().is_negligible(0.0));
    let _: &MetricJet<TruncatedSeries<f64>> = &jet;
}
