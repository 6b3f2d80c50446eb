//! Curvature of a metric jet and the conformally covariant tensors built
//! from it.
//!
//! Conventions: `R_ijkl` is fully covariant with
//! `R_ijkl = d_k Gamma_{i,lj} - d_l Gamma_{i,kj} - Gamma_{m,ki} Gamma^m_lj + Gamma_{m,li} Gamma^m_kj`,
//! so that the unit sphere has `R_ijkl = g_ik g_jl - g_il g_jk`,
//! `Ric_jl = g^ik R_ijkl = (n - 1) g_jl` and scalar curvature `n (n - 1)`.
//! The Schouten tensor is `P = (Ric - R g / (2 (n - 1))) / (n - 2)` and the
//! Weyl tensor is what remains of `R` after removing
//! `P_ik g_jl - P_il g_jk + P_jl g_ik - P_jk g_il`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::series::{Jet, TruncatedSeries};
use crate::tensor::{covariant_derivative, for_each_index, raise_index, trace, MetricJet, Symmetry, TensorJet, Variance};
use crate::{Error, Result, Scalar};

use Variance::{Contravariant, Covariant};

fn need(operation: &'static str, required: usize, available: usize) -> Result<()> {
    if available < required {
        return Err(Error::InsufficientDegree { operation, required, available });
    }
    Ok(())
}

fn sym2() -> Symmetry {
    Symmetry::symmetric(2, 0, 1)
}

/// All components `R_ijkl` evaluated from the defining formula, without
/// imposing any symmetry. Used to verify the algebraic identities.
pub fn riemann_unsymmetrized<J: Jet>(g: &MetricJet<J>) -> Result<TensorJet<J>> {
    riemann_with(g, Symmetry::none(4))
}

/// `R_ijkl`, stored by its pair symmetries.
pub fn riemann<J: Jet>(g: &MetricJet<J>) -> Result<TensorJet<J>> {
    riemann_with(g, Symmetry::riemann())
}

fn riemann_with<J: Jet>(g: &MetricJet<J>, symmetry: Symmetry) -> Result<TensorJet<J>> {
    need("Riemann tensor", 2, g.cap())?;
    let n = g.dim();
    let up = g.christoffel()?;
    let low = g.christoffel_lower()?;
    // d[v][s]: partial_v of stored lower Christoffel component s
    let d: Vec<Vec<J>> = (0..n)
        .map(|v| low.stored().map(|(_, c)| c.partial(v)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let dlow = |v: usize, idx: &[usize]| -> J {
        let (s, neg) = low.locate(idx).expect("lower Christoffel symbols have no forced zeros");
        if neg {
            d[v][s].negated()
        } else {
            d[v][s].clone()
        }
    };
    let template = d[0][0].clone().zero_like();
    // gg(k, i, l, j) = Gamma_{m,ki} Gamma^m_lj, symmetric in (k, i) and in (l, j)
    let pair = |a: usize, b: usize| a.max(b) * (a.max(b) + 1) / 2 + a.min(b);
    let pairs = n * (n + 1) / 2;
    let mut cache: Vec<Option<J>> = alloc::vec![None; pairs * pairs];
    let mut gg = |k: usize, i: usize, l: usize, j: usize| -> J {
        cache[pair(k, i) * pairs + pair(l, j)]
            .get_or_insert_with(|| {
                let mut acc = template.clone();
                for m in 0..n {
                    acc.add_product(&low.get(&[m, k, i]), &up.get(&[m, l, j]));
                }
                acc
            })
            .clone()
    };
    TensorJet::from_fn(n, &[Covariant; 4], symmetry, &template, |t| {
        let (i, j, k, l) = (t[0], t[1], t[2], t[3]);
        let mut acc = dlow(k, &[i, l, j]).minus(&dlow(l, &[i, k, j]));
        acc.sub_assign_jet(&gg(k, i, l, j));
        acc.add_assign_jet(&gg(l, i, k, j));
        Ok(acc)
    })
}

/// `Ric_jl` directly from the Christoffel symbols:
/// `d_k Gamma^k_lj - d_l Gamma^k_kj + Gamma^k_km Gamma^m_lj - Gamma^k_lm Gamma^m_kj`.
pub fn ricci<J: Jet>(g: &MetricJet<J>) -> Result<TensorJet<J>> {
    ricci_with(g, sym2())
}

/// As [`ricci`] but computing every component, so symmetry can be checked.
pub fn ricci_unsymmetrized<J: Jet>(g: &MetricJet<J>) -> Result<TensorJet<J>> {
    ricci_with(g, Symmetry::none(2))
}

fn ricci_with<J: Jet>(g: &MetricJet<J>, symmetry: Symmetry) -> Result<TensorJet<J>> {
    need("Ricci tensor", 2, g.cap())?;
    let n = g.dim();
    let gamma = g.christoffel()?;
    let tr: Vec<J> = (0..n)
        .map(|m| {
            let mut acc = gamma.zero_jet().clone();
            for k in 0..n {
                acc.add_assign_jet(&gamma.get(&[k, k, m]));
            }
            acc
        })
        .collect();
    let template = gamma.zero_jet().truncated(gamma.cap() - 1);
    TensorJet::from_fn(n, &[Covariant; 2], symmetry, &template, |t| {
        let (j, l) = (t[0], t[1]);
        let mut acc = tr[j].partial(l)?.negated();
        for k in 0..n {
            acc.add_assign_jet(&gamma.get(&[k, l, j]).partial(k)?);
        }
        for m in 0..n {
            acc.add_product(&tr[m], &gamma.get(&[m, l, j]));
            for k in 0..n {
                acc.sub_product(&gamma.get(&[k, l, m]), &gamma.get(&[m, k, j]));
            }
        }
        Ok(acc)
    })
}

/// Scalar curvature `g^jl Ric_jl`.
pub fn scalar_curvature<J: Jet>(g: &MetricJet<J>, ric: &TensorJet<J>) -> Result<J> {
    Ok(trace(ric, g, 0, 1)?.get(&[]))
}

/// `P = (Ric - R g / (2 (n - 1))) / (n - 2)`, `n >= 3`.
pub fn schouten<J: Jet>(g: &MetricJet<J>, ric: &TensorJet<J>, r: &J) -> Result<TensorJet<J>> {
    let n = g.dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension { dimension: n, reason: "the Schouten tensor needs n >= 3" });
    }
    let a = J::Scalar::from_ratio(1, (n - 2) as i64);
    let b = J::Scalar::from_ratio(1, (2 * (n - 1) * (n - 2)) as i64);
    let rb = r.scaled(&b);
    TensorJet::from_fn(n, &[Covariant; 2], sym2(), ric.zero_jet(), |t| {
        let mut c = ric.get(t).scaled(&a);
        c.sub_product(&rb, &g.g().get(t));
        Ok(c)
    })
}

/// Every metric contraction of `t` over two slots, each as a tensor.
fn all_traces<J: Jet>(t: &TensorJet<J>, g: &MetricJet<J>) -> Result<Vec<TensorJet<J>>> {
    let r = t.rank();
    let mut out = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            out.push(trace(t, g, a, b)?);
        }
    }
    Ok(out)
}

/// The curvature tensors of one metric jet at the chart origin.
///
/// Caps: Riemann, Ricci, scalar, Schouten and Weyl have the metric cap minus
/// two; the Cotton tensor needs metric cap 3 and the Bach tensor cap 4.
/// Members that the cap does not support report [`Error::InsufficientDegree`].
#[derive(Clone, Debug)]
pub struct CurvatureSuite<J: Jet> {
    metric: MetricJet<J>,
    riemann: TensorJet<J>,
    ricci: TensorJet<J>,
    scalar: J,
    schouten: TensorJet<J>,
    weyl: TensorJet<J>,
    schouten_derivative: Option<TensorJet<J>>,
    cotton: Option<TensorJet<J>>,
    schouten_second: OnceBox<TensorJet<J>>,
    bach: OnceBox<TensorJet<J>>,
}

impl<J: Jet> CurvatureSuite<J> {
    pub fn new(g: &MetricJet<J>) -> Result<Self> {
        let n = g.dim();
        if n < 3 {
            return Err(Error::UnsupportedDimension { dimension: n, reason: "curvature suite needs n >= 3" });
        }
        need("curvature suite", 2, g.cap())?;
        let riemann = riemann(g)?;
        let ricci = trace(&riemann, g, 0, 2)?.with_symmetry(sym2())?;
        let scalar = scalar_curvature(g, &ricci)?;
        let schouten = schouten(g, &ricci, &scalar)?;
        let weyl = TensorJet::from_fn(n, &[Covariant; 4], Symmetry::riemann(), riemann.zero_jet(), |t| {
            let (i, j, k, l) = (t[0], t[1], t[2], t[3]);
            let gg = |a: usize, b: usize| g.g().get(&[a, b]);
            let p = |a: usize, b: usize| schouten.get(&[a, b]);
            let mut w = riemann.get(t);
            w.sub_product(&p(i, k), &gg(j, l));
            w.add_product(&p(i, l), &gg(j, k));
            w.sub_product(&p(j, l), &gg(i, k));
            w.add_product(&p(j, k), &gg(i, l));
            Ok(w)
        })?;
        let mut suite = CurvatureSuite {
            metric: g.clone(),
            riemann,
            ricci,
            scalar,
            schouten,
            weyl,
            schouten_derivative: None,
            cotton: None,
            schouten_second: OnceBox::new(),
            bach: OnceBox::new(),
        };
        if g.cap() >= 3 {
            let dp = covariant_derivative(&suite.schouten, g)?;
            suite.cotton = Some(TensorJet::from_fn(
                n,
                &[Covariant; 3],
                Symmetry::antisymmetric(3, 1, 2),
                dp.zero_jet(),
                |t| Ok(dp.get(t).minus(&dp.get(&[t[0], t[2], t[1]]))),
            )?);
            suite.schouten_derivative = Some(dp);
        }
        Ok(suite)
    }

    pub fn metric(&self) -> &MetricJet<J> {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn christoffel(&self) -> Result<&TensorJet<J>> {
        self.metric.christoffel()
    }

    pub fn riemann(&self) -> &TensorJet<J> {
        &self.riemann
    }

    pub fn ricci(&self) -> &TensorJet<J> {
        &self.ricci
    }

    pub fn scalar(&self) -> &J {
        &self.scalar
    }

    pub fn schouten(&self) -> &TensorJet<J> {
        &self.schouten
    }

    pub fn weyl(&self) -> &TensorJet<J> {
        &self.weyl
    }

    fn member<'a>(&self, m: &'a Option<TensorJet<J>>, name: &'static str, cap: usize) -> Result<&'a TensorJet<J>> {
        m.as_ref().ok_or(Error::InsufficientDegree { operation: name, required: cap, available: self.metric.cap() })
    }

    /// `P_ij,k`
    pub fn schouten_derivative(&self) -> Result<&TensorJet<J>> {
        self.member(&self.schouten_derivative, "Schouten derivative", 3)
    }

    /// `C_ijk = P_ij,k - P_ik,j`
    pub fn cotton(&self) -> Result<&TensorJet<J>> {
        self.member(&self.cotton, "Cotton tensor", 3)
    }

    /// `P_ij,kl`
    pub fn schouten_second(&self) -> Result<&TensorJet<J>> {
        need("second Schouten derivative", 4, self.metric.cap())?;
        self.schouten_second
            .get_or_try_init(|| Ok(Box::new(covariant_derivative(self.schouten_derivative()?, &self.metric)?)))
    }

    /// `B_ij = P_ij,k^k - P_ik,j^k - P^kl W_kijl`, stored without imposing
    /// symmetry.
    pub fn bach(&self) -> Result<&TensorJet<J>> {
        need("Bach tensor", 4, self.metric.cap())?;
        self.bach.get_or_try_init(|| {
            let (g, n) = (&self.metric, self.dim());
            let ddp = self.schouten_second()?;
            // P_ij,k^k and P_ik,j^k
            let lap = trace(ddp, g, 2, 3)?;
            let cross = trace(ddp, g, 1, 3)?;
            let p_up = raise_index(&raise_index(&self.schouten, g, 0)?, g, 1)?;
            let b = TensorJet::from_fn(n, &[Covariant; 2], Symmetry::none(2), lap.zero_jet(), |t| {
                let (i, j) = (t[0], t[1]);
                let mut b = lap.get(&[i, j]).minus(&cross.get(&[i, j]));
                for k in 0..n {
                    for l in 0..n {
                        self.weyl.accumulate_into(&mut b, &p_up.get(&[k, l]), &[k, i, j, l], true);
                    }
                }
                Ok(b)
            })?;
            Ok(Box::new(b))
        })
    }

    /// Every two-slot trace of the Weyl tensor.
    pub fn weyl_traces(&self) -> Result<Vec<TensorJet<J>>> {
        all_traces(&self.weyl, &self.metric)
    }
}

/// Shorthand for [`CurvatureSuite::new`].
pub fn curvature_suite<J: Jet>(g: &MetricJet<J>) -> Result<CurvatureSuite<J>> {
    CurvatureSuite::new(g)
}

/// Both sides of `W_kijl,^kl = (3 - n)(P_ij,k^k - P_ik,j^k)`.
pub fn weyl_divergence_check<J: Jet>(suite: &CurvatureSuite<J>) -> Result<(TensorJet<J>, TensorJet<J>)> {
    let g = suite.metric();
    let n = g.dim();
    need("Weyl divergence identity", 4, g.cap())?;
    // D_ijl = W_kijl,^k, then its divergence in l
    let dw = covariant_derivative(suite.weyl(), g)?;
    let div = trace(&dw, g, 0, 4)?;
    let lhs = trace(&covariant_derivative(&div, g)?, g, 2, 3)?;
    let ddp = suite.schouten_second()?;
    let c = J::Scalar::from_i64(3 - n as i64);
    let lap = trace(ddp, g, 2, 3)?;
    let cross = trace(ddp, g, 1, 3)?;
    let rhs = TensorJet::from_fn(n, &[Covariant; 2], Symmetry::none(2), lap.zero_jet(), |t| {
        Ok(lap.get(t).minus(&cross.get(t)).scaled(&c))
    })?;
    Ok((lhs, rhs))
}

/// `T_{(ij)...}`: average over the first two slots.
fn sym_first<J: Jet>(t: &TensorJet<J>, idx: &[usize]) -> J {
    let mut sw = idx.to_vec();
    sw.swap(0, 1);
    t.get(idx).plus(&t.get(&sw)).scaled(&J::Scalar::from_ratio(1, 2))
}

/// The obstruction tensor from its explicit formula: the Bach tensor when
/// `n = 4`, and for `n = 6`
///
/// `B_ij,k^k - 2 W_kijl B^kl - 4 P_k^k B_ij + 8 P^kl C_(ij)k,l - 4 C^k_i^l C_ljk
///  + 2 C_i^kl C_jkl + 4 P^k_k,l C_(ij)^l - 4 W_kijl P^k_m P^ml`.
///
/// Other dimensions are reported as unsupported; use the expansion solver.
pub fn obstruction_closed_form<J: Jet>(suite: &CurvatureSuite<J>, n: usize) -> Result<TensorJet<J>> {
    let g = suite.metric();
    if n != g.dim() {
        return Err(Error::Mismatch(format!("dimension {n} requested for a metric in dimension {}", g.dim())));
    }
    match n {
        4 => {
            need("obstruction tensor (closed form)", 4, g.cap())?;
            Ok(suite.bach()?.clone())
        }
        6 => obstruction_six(suite),
        _ => Err(Error::UnsupportedDimension {
            dimension: n,
            reason: "no closed form; use the expansion solver path",
        }),
    }
}

fn obstruction_six<J: Jet>(suite: &CurvatureSuite<J>) -> Result<TensorJet<J>> {
    let g = suite.metric();
    let n = 6;
    need("obstruction tensor (closed form)", 6, g.cap())?;
    let b = suite.bach()?;
    let p = suite.schouten();
    let w = suite.weyl();
    let c = suite.cotton()?;

    let lap_b = trace(&covariant_derivative(&covariant_derivative(b, g)?, g)?, g, 2, 3)?;
    let b_up = raise_index(&raise_index(b, g, 0)?, g, 1)?;
    let j = trace(p, g, 0, 1)?.get(&[]);
    let dj = covariant_derivative(&TensorJet::scalar(n, j.clone()), g)?;
    let p_up = raise_index(&raise_index(p, g, 0)?, g, 1)?;
    let dc = covariant_derivative(c, g)?;
    // C^k_i^l with slots (k, i, l)
    let c_up02 = raise_index(&raise_index(c, g, 0)?, g, 2)?;
    // C_i^kl with slots (i, k, l)
    let c_up12 = raise_index(&raise_index(c, g, 1)?, g, 2)?;
    // C_(ij)^l
    let c_up2 = raise_index(c, g, 2)?;
    // (P^2)^kl = P^k_m P^ml
    let p_mixed = raise_index(p, g, 0)?;
    let p2 = TensorJet::from_fn(n, &[Contravariant; 2], Symmetry::none(2), p.zero_jet(), |t| {
        let mut acc = p.zero_jet().clone();
        for m in 0..n {
            acc.add_product(&p_mixed.get(&[t[0], m]), &p_up.get(&[m, t[1]]));
        }
        Ok(acc)
    })?;
    let k = |v: i64| J::Scalar::from_i64(v);

    TensorJet::from_fn(n, &[Covariant; 2], Symmetry::none(2), lap_b.zero_jet(), |t| {
        let (i, jj) = (t[0], t[1]);
        let mut wb = lap_b.zero_jet().clone();
        let mut pc = wb.clone();
        let mut cc1 = wb.clone();
        let mut cc2 = wb.clone();
        let mut jc = wb.clone();
        let mut wpp = wb.clone();
        for a in 0..n {
            for l in 0..n {
                w.accumulate_into(&mut wb, &b_up.get(&[a, l]), &[a, i, jj, l], false);
                w.accumulate_into(&mut wpp, &p2.get(&[a, l]), &[a, i, jj, l], false);
                pc.add_product(&p_up.get(&[a, l]), &sym_first(&dc, &[i, jj, a, l]));
                cc1.add_product(&c_up02.get(&[a, i, l]), &c.get(&[l, jj, a]));
                cc2.add_product(&c_up12.get(&[i, a, l]), &c.get(&[jj, a, l]));
            }
            jc.add_product(&dj.get(&[a]), &sym_first(&c_up2, &[i, jj, a]));
        }
        let mut o = lap_b.get(t);
        o.add_scaled_jet(&k(-2), &wb);
        o.sub_product(&j.scaled(&k(4)), &b.get(t));
        o.add_scaled_jet(&k(8), &pc);
        o.add_scaled_jet(&k(-4), &cc1);
        o.add_scaled_jet(&k(2), &cc2);
        o.add_scaled_jet(&k(4), &jc);
        o.add_scaled_jet(&k(-4), &wpp);
        Ok(o)
    })
}

/// First variation of Ricci in the direction `h`:
/// `(h_ik,j^k + h_jk,i^k - h_ij,k^k - h_k^k,ij) / 2`.
pub fn linearized_ricci<J: Jet>(h: &TensorJet<J>, g: &MetricJet<J>) -> Result<TensorJet<J>> {
    let n = g.dim();
    if h.variance() != [Covariant, Covariant] {
        return Err(Error::InvalidArgument(format!("linearized Ricci of a {}", h.describe())));
    }
    need("linearized Ricci", 2, h.cap().min(g.cap()))?;
    let ddh = covariant_derivative(&covariant_derivative(h, g)?, g)?;
    // h_ik,j^k: slots (i, k, j, l) contracted over k = slot 1 and l = slot 3
    let div = trace(&ddh, g, 1, 3)?;
    let lap = trace(&ddh, g, 2, 3)?;
    let tr = trace(h, g, 0, 1)?;
    let hess = covariant_derivative(&covariant_derivative(&tr, g)?, g)?;
    let half = J::Scalar::from_ratio(1, 2);
    TensorJet::from_fn(n, &[Covariant; 2], Symmetry::none(2), div.zero_jet(), |t| {
        let (i, j) = (t[0], t[1]);
        let s = div.get(&[i, j]).plus(&div.get(&[j, i])).minus(&lap.get(t)).minus(&hess.get(t));
        Ok(s.scaled(&half))
    })
}

/// The four-dimensional Q-curvature, `6 Q = -Delta R + R^2 - 3 |Ric|^2`.
pub fn q4<J: Jet>(g: &MetricJet<J>) -> Result<J> {
    if g.dim() != 4 {
        return Err(Error::UnsupportedDimension { dimension: g.dim(), reason: "Q-curvature formula is four-dimensional" });
    }
    need("Q-curvature", 4, g.cap())?;
    let ric = ricci(g)?;
    let r = scalar_curvature(g, &ric)?;
    let rs = TensorJet::scalar(4, r.clone());
    let lap = trace(&covariant_derivative(&covariant_derivative(&rs, g)?, g)?, g, 0, 1)?.get(&[]);
    let ric_up = raise_index(&raise_index(&ric, g, 0)?, g, 1)?;
    let mut norm = ric.zero_jet().clone();
    for_each_index(4, 2, |t| norm.add_product(&ric.get(t), &ric_up.get(t)));
    let mut six_q = r.times(&r);
    six_q.sub_assign_jet(&lap);
    six_q.add_scaled_jet(&J::Scalar::from_i64(-3), &norm);
    Ok(six_q.scaled(&J::Scalar::from_ratio(1, 6)))
}

/// Sign of a permutation of `0..4`.
fn parity(p: &[usize; 4]) -> i64 {
    let mut sign = 1;
    for a in 0..4 {
        for b in a + 1..4 {
            if p[a] == p[b] {
                return 0;
            }
            if p[a] > p[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Hodge star on the first index pair of a 4-tensor:
/// `(*T)_ijkl = (1/2) eps_ij^ab T_abkl`, with `eps_1234 = orientation sqrt(det g)`.
pub fn hodge_first_pair<S: Scalar>(
    t: &TensorJet<TruncatedSeries<S>>,
    g: &MetricJet<TruncatedSeries<S>>,
    orientation: i64,
) -> Result<TensorJet<TruncatedSeries<S>>> {
    if g.dim() != 4 || t.rank() != 4 {
        return Err(Error::UnsupportedDimension { dimension: g.dim(), reason: "Hodge star on 2-forms is taken in dimension 4" });
    }
    if orientation != 1 && orientation != -1 {
        return Err(Error::InvalidArgument(format!("orientation must be +1 or -1, got {orientation}")));
    }
    let vol = g.determinant()?.sqrt()?.scale(&S::from_i64(orientation));
    let t_up = raise_index(&raise_index(t, g, 0)?, g, 1)?;
    let half = S::from_ratio(1, 2);
    TensorJet::from_fn(4, &[Covariant; 4], t.symmetry().clone(), t_up.zero_jet(), |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc = t_up.zero_jet().clone();
        for a in 0..4 {
            for b in 0..4 {
                let s = parity(&[i, j, a, b]);
                if s != 0 {
                    acc.add_scaled(&S::from_i64(s), &t_up.get(&[a, b, idx[2], idx[3]]));
                }
            }
        }
        Ok(acc.times(&vol).scale(&half))
    })
}

/// `(W+, W-)` with `W+- = (W +- *W) / 2`, `*` acting on the first pair.
/// The metric determinant at the origin must be a perfect square on the exact
/// backend.
pub fn weyl_selfdual_split<S: Scalar>(
    suite: &CurvatureSuite<TruncatedSeries<S>>,
    orientation: i64,
) -> Result<(TensorJet<TruncatedSeries<S>>, TensorJet<TruncatedSeries<S>>)> {
    let g = suite.metric();
    if g.dim() != 4 {
        return Err(Error::UnsupportedDimension { dimension: g.dim(), reason: "self-dual splitting is four-dimensional" });
    }
    let w = suite.weyl();
    let star = hodge_first_pair(w, g, orientation)?;
    let half = S::from_ratio(1, 2);
    let plus = w.plus(&star)?.scaled(&half).with_symmetry(Symmetry::riemann())?;
    let minus = w.minus(&star)?.scaled(&half).with_symmetry(Symmetry::riemann())?;
    Ok((plus, minus))
}
