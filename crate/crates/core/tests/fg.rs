use conformal_core::builtin;
use conformal_core::curvature::curvature_suite;
use conformal_core::fg::*;
use conformal_core::series::{Basis, Jet, TruncatedSeries};
use conformal_core::tensor::{trace, trace_free_part, MetricJet, Symmetry, TensorJet, Variance};
use conformal_core::{Error, Rational, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Q = TruncatedSeries<Rational>;

fn q(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

fn random(dim: usize, cap: usize, seed: u64) -> MetricJet<Q> {
    builtin::random(dim, cap, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn beyond(order: Option<(usize, bool)>, k: usize) -> bool {
    order.is_none_or(|(o, _)| o >= k)
}

#[test]
fn dimensional_constants() {
    let c4 = constants::<Rational>(4).unwrap();
    assert_eq!((c4.c, c4.k), (q(2, 1), q(16, 1)));
    let c6 = constants::<Rational>(6).unwrap();
    assert_eq!((c6.c, c6.k), (q(16, 1), q(-384, 1)));
    let c8 = constants::<Rational>(8).unwrap();
    assert_eq!((c8.c, c8.k), (q(384, 1), q(18432, 1)));
    for n in [4, 6, 8] {
        let c = constants::<Rational>(n).unwrap();
        let sign = if (n / 2) % 2 == 0 { 1 } else { -1 };
        assert_eq!(c.k / (c.c * q(2 * n as i64, 1)), q(sign * (n as i64 - 2), 2));
    }
    assert!(constants::<Rational>(5).is_err());
    assert!(constants::<Rational>(2).is_err());
}

#[test]
fn flat_expansion_is_trivial() {
    let g = builtin::flat::<Rational>(4, 4).unwrap();
    let fg = fg_expand(&g, 4).unwrap();
    for s in 1..=4 {
        assert!(fg.coefficient(s).is_zero());
    }
    assert!(fg.obstruction().is_zero());
    assert!(fg.log_coefficient().is_zero());
}

#[test]
fn second_coefficient_is_minus_schouten() {
    for seed in 0..2 {
        let g = random(4, 4, seed);
        let fg = fg_expand(&g, 4).unwrap();
        let s = curvature_suite(&g).unwrap();
        assert!(fg.coefficient(2).plus(s.schouten()).unwrap().is_zero());
        assert!(fg.coefficient(1).is_zero());
        assert!(fg.coefficient(3).is_zero());
    }
}

#[test]
fn sphere_expansion_is_binomial() {
    let g = builtin::sphere(4, 4, q(1, 4)).unwrap();
    let fg = fg_expand(&g, 4).unwrap();
    let g2 = g.g().truncated(2).scaled(&q(-1, 2));
    assert!(fg.coefficient(2).minus(&g2).unwrap().is_zero());
    let g4 = g.g().truncated(0).scaled(&q(1, 16));
    assert!(fg.coefficient(4).minus(&g4).unwrap().is_zero());
    assert!(fg.obstruction().is_zero());
    assert!(fg.log_coefficient().is_zero());
}

#[test]
fn four_dimensional_obstruction_is_bach() {
    let g = random(4, 5, 7);
    let o = obstruction_fg(&g, 4).unwrap();
    let b = curvature_suite(&g).unwrap().bach().unwrap().truncated(1);
    assert!(!b.is_zero());
    assert!(o.minus(&b).unwrap().is_zero());
}

#[test]
fn rejects_bad_dimension_and_cap() {
    let g = random(4, 3, 1);
    assert!(matches!(fg_expand(&g, 4), Err(Error::InsufficientDegree { .. })));
    let g5 = random(5, 5, 1);
    assert!(matches!(fg_expand(&g5, 5), Err(Error::UnsupportedDimension { .. })));
}

#[test]
fn exact_einstein_solution_has_no_residual() {
    let flat = builtin::flat::<Rational>(4, 4).unwrap();
    let (gx, warn) = einstein_exact_solution(&flat, &q(0, 1), 4).unwrap();
    assert!(warn.is_none());
    for_each(&gx, |i, j, c| assert_eq!(c.value(), if i == j { q(1, 1) } else { q(0, 1) }));
    for (n, lambda) in [(4, q(1, 4)), (4, q(-1, 3)), (5, q(1, 4))] {
        let g = builtin::sphere(n, 5, lambda.clone()).unwrap();
        let (gx, warn) = einstein_exact_solution(&g, &lambda, n).unwrap();
        assert!(warn.is_none());
        let e = einstein_residual(&gx, n).unwrap();
        assert_eq!(e.orders(), [None, None, None], "n = {n}");
    }
    let (_, warn) = einstein_exact_solution(&random(4, 3, 2), &q(1, 4), 4).unwrap();
    assert!(warn.is_some());
}

fn for_each(gx: &RadialMetric<Rational>, mut f: impl FnMut(usize, usize, &conformal_core::series::RadialSeries<Rational>)) {
    let n = gx.dim();
    for i in 0..n {
        for j in 0..n {
            f(i, j, &gx.g().get(&[i, j]));
        }
    }
}

#[test]
fn solved_expansion_residual_orders() {
    let n = 4;
    let g = random(n, 5, 11);
    let fg = fg_expand(&g, n).unwrap();
    let poly = einstein_residual(&fg.polynomial_metric().unwrap(), n).unwrap();
    let [eij, ei0, e00] = poly.orders();
    assert_eq!(eij, Some((n - 2, false)));
    assert!(beyond(ei0, n - 1) && beyond(e00, n - 1));
    let lead = poly.tangential_coefficient(n - 2, false).unwrap();
    let g0 = g.truncated(lead.cap()).unwrap();
    assert!(trace(&lead, &g0, 0, 1).unwrap().is_zero());
    let o = trace_free_part(&lead, &g0).unwrap().scaled(&fg.constants().c);
    assert!(o.minus(fg.obstruction()).unwrap().is_zero());

    let full = einstein_residual(&fg.radial_metric().unwrap(), n).unwrap();
    for order in full.orders() {
        assert!(beyond(order, n - 1), "{order:?}");
    }
    assert_eq!(full.caps(), [n - 1, n - 1, n - 1]);
}

#[test]
fn corrupted_coefficient_is_detected() {
    let n = 4;
    let g = random(n, 4, 3);
    let fg = fg_expand(&g, n).unwrap();
    let mut coeffs = fg.coefficients().to_vec();
    let bump = TensorJet::from_fn(n, &[Variance::Covariant; 2], Symmetry::symmetric(2, 0, 1), coeffs[2].zero_jet(), |t| {
        Ok(coeffs[2].zero_jet().constant_like(if t == [0, 1] { q(1, 3) } else { q(0, 1) }))
    })
    .unwrap();
    coeffs[2] = coeffs[2].plus(&bump).unwrap();
    let gx = radial_metric_from_coefficients(&coeffs, None, fg.cap()).unwrap();
    let e = einstein_residual(&gx, n).unwrap();
    assert_eq!(e.orders()[0].map(|o| o.0), Some(0));
}

#[test]
fn bianchi_identities_hold_off_shell() {
    let n = 4;
    let cap = 5;
    let g = random(n, cap, 4);
    let basis = Basis::new(n, cap);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut coeffs = vec![g.g().clone(), g.g().scaled(&q(0, 1))];
    for k in 2..=4 {
        coeffs.push(
            TensorJet::from_fn(n, &[Variance::Covariant; 2], Symmetry::symmetric(2, 0, 1), g.g().zero_jet(), |_| {
                Ok(builtin::random_series(&basis, cap - k, 0, 2, 5, &mut rng))
            })
            .unwrap(),
        );
    }
    let gx = radial_metric_from_coefficients(&coeffs, None, cap).unwrap();
    let (b1, b2) = bianchi_residual(&gx, n).unwrap();
    assert!(b1.is_zero() && b2.is_zero());
    assert!(einstein_residual(&gx, n).unwrap().orders()[0].is_some());

    let fg = fg_expand(&g, n).unwrap();
    let (b1, b2) = bianchi_residual(&fg.radial_metric().unwrap(), n).unwrap();
    assert!(b1.is_zero() && b2.is_zero());
    let sphere = builtin::sphere(n, cap, q(1, 4)).unwrap();
    let (gx, _) = einstein_exact_solution(&sphere, &q(1, 4), n).unwrap();
    let (b1, b2) = bianchi_residual(&gx, n).unwrap();
    assert!(b1.is_zero() && b2.is_zero());
}

#[test]
fn log_coefficient_relations() {
    let n = 4;
    let g = random(n, 4, 21);
    let fg = fg_expand(&g, n).unwrap();
    let r = fg.log_coefficient();
    let lhs = r.scaled(&(fg.constants().c.clone() * q(n as i64, 1)));
    assert!(lhs.minus(&fg.obstruction().scaled(&q(2, 1))).unwrap().is_zero());
    let g0 = g.truncated(0).unwrap();
    assert!(trace(r, &g0, 0, 1).unwrap().is_zero());
    assert!(!r.is_zero());
}
