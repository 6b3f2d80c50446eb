use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::builtin;
use crate::series::{Basis, TruncatedSeries};
use crate::{Rational, Scalar};

type Q = TruncatedSeries<Rational>;

fn random_metric(dim: usize, cap: usize, seed: u64) -> MetricJet<Q> {
    builtin::random(dim, cap, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn random_tensor(g: &MetricJet<Q>, variance: &[Variance], symmetry: Symmetry, seed: u64) -> TensorJet<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = g.g().zero_jet().basis().clone();
    let cap = g.cap();
    TensorJet::from_fn(g.dim(), variance, symmetry, g.g().zero_jet(), |_| {
        Ok(builtin::random_series(&basis, cap, 0, 3, 4, &mut rng))
    })
    .unwrap()
}

#[test]
fn riemann_layout_counts() {
    // n^2 (n^2 - 1) / 12 independent components plus the cyclic sums, which
    // the layout does not impose: pairs of antisymmetric pairs give
    // m (m + 1) / 2 with m = n (n - 1) / 2.
    for n in 2..6 {
        let l = Layout::new(n, Symmetry::riemann());
        let m = n * (n - 1) / 2;
        assert_eq!(l.canonical.len(), m * (m + 1) / 2);
        assert!(l.locate(&[0, 0, 1, 0]).is_none());
        let (s, neg) = l.locate(&[1, 0, 0, 1]).unwrap();
        assert_eq!(l.canonical[s], vec![0, 1, 0, 1]);
        assert!(neg);
    }
}

#[test]
fn symmetry_round_trip() {
    let g = random_metric(3, 2, 1);
    let t = random_tensor(&g, &[Variance::Covariant; 4], Symmetry::riemann(), 2);
    assert!(t.respects(&Symmetry::riemann()));
    assert_eq!(t.get(&[2, 1, 0, 1]), t.get(&[0, 1, 2, 1]));
    assert_eq!(t.get(&[1, 2, 0, 1]), t.get(&[0, 1, 2, 1]).negated());
    let plain = t.with_symmetry(Symmetry::none(4)).unwrap();
    assert_eq!(plain.num_stored(), 81);
    assert_eq!(plain.symmetry_defect(&Symmetry::riemann()), 0.0);
}

#[test]
fn metric_compatibility() {
    for seed in 0..3 {
        let g = random_metric(3, 3, seed);
        assert!(covariant_derivative(g.g(), &g).unwrap().is_zero());
        assert!(covariant_derivative(g.g_inv(), &g).unwrap().is_zero());
    }
}

#[test]
fn trace_of_metric_is_dimension() {
    let g = random_metric(4, 3, 7);
    let t = trace(g.g(), &g, 0, 1).unwrap().get(&[]);
    assert_eq!(t, t.constant_like(Rational::from_i64(4)));
    let mixed = raise_index(g.g(), &g, 0).unwrap();
    let id = trace(&mixed, &g, 0, 1).unwrap().get(&[]);
    assert_eq!(id, t);
}

#[test]
fn raise_metric_is_identity() {
    let g = random_metric(3, 3, 11);
    let m = raise_index(g.g(), &g, 0).unwrap();
    for_each_index(3, 2, |t| {
        let expect = if t[0] == t[1] { Rational::from_i64(1) } else { Rational::from_i64(0) };
        assert_eq!(m.get(t), m.zero_jet().constant_like(expect));
    });
}

#[test]
fn raise_lower_round_trip() {
    let g = random_metric(3, 3, 5);
    let t = random_tensor(&g, &[Variance::Covariant; 3], Symmetry::antisymmetric(3, 1, 2), 6);
    let up = raise_index(&t, &g, 1).unwrap();
    assert_eq!(up.variance(), [Variance::Covariant, Variance::Contravariant, Variance::Covariant]);
    let back = lower_index(&up, &g, 1).unwrap();
    assert!(back.minus(&t).unwrap().is_zero());
}

#[test]
fn pairing_two_paths() {
    let g = random_metric(4, 2, 3);
    let sym = Symmetry::symmetric(2, 0, 1);
    let o = random_tensor(&g, &[Variance::Covariant; 2], sym.clone(), 4);
    let h = random_tensor(&g, &[Variance::Covariant; 2], sym, 5);
    let h_up = raise_index(&raise_index(&h, &g, 0).unwrap(), &g, 1).unwrap();
    let mut via_raise = o.zero_jet().clone();
    let mut explicit = o.zero_jet().clone();
    for_each_index(4, 2, |ij| via_raise.add_product(&o.get(ij), &h_up.get(ij)));
    for_each_index(4, 4, |t| {
        let (i, j, k, l) = (t[0], t[1], t[2], t[3]);
        let w = g.g_inv().get(&[i, k]).times(&g.g_inv().get(&[j, l]));
        explicit.add_product(&o.get(&[i, j]), &w.times(&h.get(&[k, l])));
    });
    assert_eq!(via_raise, explicit);
}

#[test]
fn trace_free_part_properties() {
    let g = random_metric(4, 2, 8);
    assert!(trace_free_part(g.g(), &g).unwrap().is_zero());
    let s = random_tensor(&g, &[Variance::Covariant; 2], Symmetry::symmetric(2, 0, 1), 9);
    let tf = trace_free_part(&s, &g).unwrap();
    assert!(trace(&tf, &g, 0, 1).unwrap().is_zero());
    let again = trace_free_part(&tf, &g).unwrap();
    assert!(again.minus(&tf).unwrap().is_zero());
}

#[test]
fn flat_derivative_is_coordinate_derivative() {
    let g = builtin::flat::<Rational>(3, 3).unwrap();
    let t = random_tensor(&g, &[Variance::Covariant, Variance::Contravariant], Symmetry::none(2), 1);
    let d = covariant_derivative(&t, &g).unwrap();
    for_each_index(3, 3, |ijk| {
        assert_eq!(d.get(ijk), t.get(&ijk[..2]).partial(ijk[2]).unwrap());
    });
}

#[test]
fn scalar_hessian_is_symmetric() {
    let g = random_metric(3, 4, 2);
    let basis = g.g().zero_jet().basis().clone();
    let f = builtin::random_series(&basis, 4, 0, 3, 2, &mut ChaCha8Rng::seed_from_u64(3));
    let df = covariant_derivative(&TensorJet::scalar(3, f.clone()), &g).unwrap();
    for k in 0..3 {
        assert_eq!(df.get(&[k]), f.partial(k).unwrap());
    }
    let hess = covariant_derivative(&df, &g).unwrap();
    assert!(hess.respects(&Symmetry::symmetric(2, 0, 1)));
}

#[test]
fn leibniz_rule() {
    let g = random_metric(3, 3, 12);
    let a = random_tensor(&g, &[Variance::Covariant], Symmetry::none(1), 13);
    let b = random_tensor(&g, &[Variance::Contravariant], Symmetry::none(1), 14);
    let ab = TensorJet::from_fn(3, &[Variance::Covariant, Variance::Contravariant], Symmetry::none(2), a.zero_jet(), |t| {
        Ok(a.get(&t[..1]).times(&b.get(&t[1..])))
    })
    .unwrap();
    let lhs = covariant_derivative(&ab, &g).unwrap();
    let da = covariant_derivative(&a, &g).unwrap();
    let db = covariant_derivative(&b, &g).unwrap();
    for_each_index(3, 3, |t| {
        let (i, j, k) = (t[0], t[1], t[2]);
        let rhs = da.get(&[i, k]).times(&b.get(&[j])).plus(&a.get(&[i]).times(&db.get(&[j, k])));
        assert_eq!(lhs.get(t), rhs.truncated(lhs.cap()));
    });
}

#[test]
fn rejects_indefinite_and_bad_slots() {
    let basis = Basis::new(2, 1);
    let one = Q::one(&basis, 1);
    let zero = Q::zero(&basis, 1);
    let m = vec![one.clone(), zero.clone(), zero.clone(), one.negated()];
    assert!(matches!(MetricJet::from_matrix(2, &m), Err(crate::Error::NotPositiveDefinite(_))));
    let g = MetricJet::from_matrix(2, &[one.clone(), zero.clone(), zero, one]).unwrap();
    assert!(trace(g.g(), &g, 0, 2).is_err());
    assert!(lower_index(g.g(), &g, 0).is_err());
    let g0 = g.truncated(0).unwrap();
    assert!(covariant_derivative(g0.g(), &g0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn leibniz_random(seed in 0u64..1000) {
        let g = random_metric(2, 3, seed);
        let a = random_tensor(&g, &[Variance::Covariant], Symmetry::none(1), seed + 1);
        let b = random_tensor(&g, &[Variance::Covariant], Symmetry::none(1), seed + 2);
        let ab = TensorJet::from_fn(2, &[Variance::Covariant; 2], Symmetry::none(2), a.zero_jet(), |t| {
            Ok(a.get(&t[..1]).times(&b.get(&t[1..])))
        }).unwrap();
        let lhs = covariant_derivative(&ab, &g).unwrap();
        let da = covariant_derivative(&a, &g).unwrap();
        let db = covariant_derivative(&b, &g).unwrap();
        let mut ok = true;
        for_each_index(2, 3, |t| {
            let rhs = da.get(&[t[0], t[2]]).times(&b.get(&[t[1]]))
                .plus(&a.get(&[t[0]]).times(&db.get(&[t[1], t[2]])));
            ok &= lhs.get(t) == rhs.truncated(lhs.cap());
        });
        prop_assert!(ok);
    }

    #[test]
    fn symmetric_reads_agree(seed in 0u64..1000, i in 0usize..3, j in 0usize..3) {
        let g = random_metric(3, 1, seed);
        prop_assert_eq!(g.g().get(&[i, j]), g.g().get(&[j, i]));
        let v: Vec<_> = g.g_inv().values();
        prop_assert_eq!(v.len(), 6);
    }
}
