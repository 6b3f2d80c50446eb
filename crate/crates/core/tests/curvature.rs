use conformal_core::builtin;
use conformal_core::curvature::*;
use conformal_core::series::{Basis, Jet, TruncatedSeries};
use conformal_core::tensor::{for_each_index, trace, covariant_derivative, MetricJet, Symmetry, TensorJet, Variance};
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

fn conformally_flat(dim: usize, cap: usize, seed: u64) -> MetricJet<Q> {
    let basis = Basis::new(dim, cap);
    let u = builtin::random_series(&basis, cap, 1, 2, 5, &mut ChaCha8Rng::seed_from_u64(seed));
    builtin::conformally_flat(dim, &u).unwrap()
}

#[test]
fn flat_metric_has_no_curvature() {
    let g = builtin::flat::<Rational>(4, 4).unwrap();
    let s = curvature_suite(&g).unwrap();
    assert!(s.christoffel().unwrap().is_zero());
    assert!(s.riemann().is_zero());
    assert!(s.ricci().is_zero());
    assert!(s.scalar().is_zero());
    assert!(s.schouten().is_zero());
    assert!(s.weyl().is_zero());
    assert!(s.cotton().unwrap().is_zero());
    assert!(s.bach().unwrap().is_zero());
    assert!(obstruction_closed_form(&s, 4).unwrap().is_zero());
}

#[test]
fn sphere_normalization() {
    for n in 3..=6 {
        let g = builtin::sphere(n, 3, q(1, 4)).unwrap();
        let s = curvature_suite(&g).unwrap();
        for_each_index(n, 2, |t| {
            let gij = g.g().get(t).truncate(1);
            assert_eq!(s.ricci().get(t), gij.scale(&Rational::from_i64(n as i64 - 1)));
            assert_eq!(s.schouten().get(t), gij.scale(&q(1, 2)));
        });
        assert_eq!(s.scalar().value().clone(), Rational::from_i64((n * (n - 1)) as i64));
        let tp = trace(s.schouten(), &g, 0, 1).unwrap().get(&[]);
        assert_eq!(tp.value().clone(), q(n as i64, 2));
        assert!(s.weyl().is_zero());
    }
}

#[test]
fn conformally_flat_has_vanishing_weyl() {
    for n in 4..=5 {
        let g = conformally_flat(n, 3, n as u64);
        let s = curvature_suite(&g).unwrap();
        assert!(!s.riemann().is_zero());
        assert!(s.weyl().is_zero());
    }
}

#[test]
fn riemann_identities_exact() {
    for n in 3..=4 {
        let g = random(n, 3, 10 + n as u64);
        let full = riemann_unsymmetrized(&g).unwrap();
        assert!(full.respects(&Symmetry::riemann()));
        for_each_index(n, 4, |t| {
            let (i, j, k, l) = (t[0], t[1], t[2], t[3]);
            let cyc = full.get(&[i, j, k, l]).plus(&full.get(&[i, k, l, j])).plus(&full.get(&[i, l, j, k]));
            assert!(cyc.is_zero());
        });
        let stored = riemann(&g).unwrap();
        assert!(full.minus(&stored).unwrap().is_zero());
    }
}

#[test]
fn ricci_paths_agree_and_symmetric() {
    let g = random(4, 3, 3);
    let s = curvature_suite(&g).unwrap();
    let direct = ricci_unsymmetrized(&g).unwrap();
    assert!(direct.respects(&Symmetry::symmetric(2, 0, 1)));
    assert!(direct.minus(s.ricci()).unwrap().is_zero());
    let by_trace = trace(s.riemann(), &g, 0, 2).unwrap();
    assert!(by_trace.respects(&Symmetry::symmetric(2, 0, 1)));
}

#[test]
fn contracted_second_bianchi() {
    let g = random(4, 3, 4);
    let s = curvature_suite(&g).unwrap();
    let div = trace(&covariant_derivative(s.ricci(), &g).unwrap(), &g, 1, 2).unwrap();
    for i in 0..4 {
        let dr = s.scalar().partial(i).unwrap().scale(&q(1, 2));
        assert_eq!(div.get(&[i]), dr);
    }
}

#[test]
fn weyl_cotton_bach_traces() {
    let g = random(4, 4, 5);
    let s = curvature_suite(&g).unwrap();
    for t in s.weyl_traces().unwrap() {
        assert!(t.is_zero());
    }
    let c = s.cotton().unwrap();
    assert!(trace(c, &g, 0, 1).unwrap().is_zero());
    assert!(trace(c, &g, 0, 2).unwrap().is_zero());
    let dp = s.schouten_derivative().unwrap();
    for_each_index(4, 3, |t| {
        let raw = dp.get(t).minus(&dp.get(&[t[0], t[2], t[1]]));
        assert_eq!(raw, c.get(t));
    });
    let b = s.bach().unwrap();
    assert!(b.respects(&Symmetry::symmetric(2, 0, 1)));
    assert!(trace(b, &g, 0, 1).unwrap().is_zero());
    assert!(!b.is_zero());
}

#[test]
fn weyl_divergence_identity() {
    let flat = builtin::flat::<Rational>(4, 4).unwrap();
    let (l, r) = weyl_divergence_check(&curvature_suite(&flat).unwrap()).unwrap();
    assert!(l.is_zero() && r.is_zero());
    for (n, seed) in [(4, 1), (4, 2), (6, 3)] {
        let g = random(n, 4, seed);
        let (l, r) = weyl_divergence_check(&curvature_suite(&g).unwrap()).unwrap();
        assert!(!l.is_zero());
        assert!(l.minus(&r).unwrap().is_zero(), "n = {n}");
    }
}

#[test]
fn closed_form_obstruction() {
    let g = random(4, 4, 9);
    let s = curvature_suite(&g).unwrap();
    assert!(obstruction_closed_form(&s, 4).unwrap().minus(s.bach().unwrap()).unwrap().is_zero());
    let sphere = builtin::sphere(6, 6, q(1, 4)).unwrap();
    let o = obstruction_closed_form(&curvature_suite(&sphere).unwrap(), 6).unwrap();
    assert!(o.is_zero());
    let g5 = random(5, 4, 1);
    assert!(matches!(
        obstruction_closed_form(&curvature_suite(&g5).unwrap(), 5),
        Err(Error::UnsupportedDimension { .. })
    ));
    let short = random(6, 5, 1);
    assert!(matches!(
        obstruction_closed_form(&curvature_suite(&short).unwrap(), 6),
        Err(Error::InsufficientDegree { .. })
    ));
}

#[test]
fn insufficient_cap_reported_per_member() {
    let g = random(4, 2, 1);
    let s = curvature_suite(&g).unwrap();
    assert!(matches!(s.cotton(), Err(Error::InsufficientDegree { required: 3, .. })));
    assert!(matches!(s.bach(), Err(Error::InsufficientDegree { required: 4, .. })));
    let g1 = random(4, 1, 1);
    assert!(curvature_suite(&g1).is_err());
}

#[test]
fn linearized_ricci_flat_cases() {
    let g = builtin::flat::<Rational>(4, 4).unwrap();
    assert!(linearized_ricci(g.g(), &g).unwrap().is_zero());
    let basis = Basis::new(4, 4);
    let f: Q = builtin::random_series(&basis, 4, 2, 3, 2, &mut ChaCha8Rng::seed_from_u64(1));
    let h = TensorJet::from_fn(4, &[Variance::Covariant; 2], Symmetry::symmetric(2, 0, 1), &f, |t| {
        f.partial(t[0])?.partial(t[1])
    })
    .unwrap();
    assert!(!h.is_zero());
    assert!(linearized_ricci(&h, &g).unwrap().is_zero());
}

#[test]
fn linearized_ricci_matches_difference_quotient() {
    let n = 4;
    let g: MetricJet<TruncatedSeries<f64>> = builtin::random(n, 3, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let basis = Basis::new(n, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = TensorJet::from_fn(n, &[Variance::Covariant; 2], Symmetry::symmetric(2, 0, 1), g.g().zero_jet(), |_| {
        Ok(builtin::random_series(&basis, 3, 0, 3, 4, &mut rng))
    })
    .unwrap();
    let lin = linearized_ricci(&h, &g).unwrap();
    let ric0 = ricci(&g).unwrap();
    let quotient = |eps: f64| {
        let ge = MetricJet::new(g.g().plus(&h.scaled(&eps)).unwrap()).unwrap();
        ricci(&ge).unwrap().minus(&ric0).unwrap().scaled(&(1.0 / eps))
    };
    let err = |eps: f64| quotient(eps).minus(&lin).unwrap().max_abs();
    let (e1, e2) = (err(1e-3), err(5e-4));
    assert!(e1 < 1e-1, "{e1}");
    assert!((e1 / e2 - 2.0).abs() < 0.1, "ratio {}", e1 / e2);
    let rich = quotient(5e-4).scaled(&2.0).minus(&quotient(1e-3)).unwrap().minus(&lin).unwrap().max_abs();
    assert!(rich < 1e-5, "{rich}");
}

#[test]
fn q_curvature_four() {
    let flat = builtin::flat::<Rational>(4, 4).unwrap();
    assert!(q4(&flat).unwrap().is_zero());
    let s4 = builtin::sphere(4, 4, q(1, 4)).unwrap();
    assert_eq!(q4(&s4).unwrap().value().clone(), Rational::from_i64(6));
    assert!(q4(&random(5, 4, 1)).is_err());
}

#[test]
fn selfdual_split() {
    let flat = builtin::flat::<Rational>(4, 2).unwrap();
    let (p, m) = weyl_selfdual_split(&curvature_suite(&flat).unwrap(), 1).unwrap();
    assert!(p.is_zero() && m.is_zero());
    let cf = conformally_flat(4, 3, 2);
    let (p, m) = weyl_selfdual_split(&curvature_suite(&cf).unwrap(), 1).unwrap();
    assert!(p.is_zero() && m.is_zero());
    let g = random(4, 3, 6);
    let s = curvature_suite(&g).unwrap();
    for orientation in [1, -1] {
        let (p, m) = weyl_selfdual_split(&s, orientation).unwrap();
        assert!(p.plus(&m).unwrap().minus(s.weyl()).unwrap().is_zero());
        let sp = hodge_first_pair(&p, &g, orientation).unwrap();
        let sm = hodge_first_pair(&m, &g, orientation).unwrap();
        assert!(sp.minus(&p).unwrap().is_zero());
        assert!(sm.plus(&m).unwrap().is_zero());
        assert!(!p.is_zero() && !m.is_zero());
    }
}
