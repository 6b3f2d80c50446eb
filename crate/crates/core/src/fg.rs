//! The Poincare-metric expansion `g_+ = x^{-2}(dx^2 + g_x)` solved order by
//! order in `x`, the obstruction tensor it produces, and residual oracles for
//! the Einstein equation `E = Ric(g_+) + n g_+`.
//!
//! Radial jets use [`RadialSeries`] over the spatial variables plus `x`, with
//! total-degree cap `D`: the coefficient of `x^k` is known to spatial degree
//! `D - k`. Each order of the expansion consumes two spatial derivatives
//! through `Ric(g_x)`, so a metric of cap `D` yields the order-`n`
//! coefficients with spatial cap `D - n`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::curvature::ricci;
use crate::series::{Basis, Jet, RadialSeries, TruncatedSeries};
use crate::tensor::{covariant_derivative, raise_index, trace, trace_free_part, MetricJet, Symmetry, TensorJet, Variance};
use crate::{Error, Result, Scalar};

use Variance::Covariant;

pub type SeriesTensor<S> = TensorJet<TruncatedSeries<S>>;
pub type RadialTensor<S> = TensorJet<RadialSeries<S>>;
pub type RadialMetric<S> = MetricJet<RadialSeries<S>>;

/// The dimensional constants of the obstruction tensor and of the relation
/// between the integral of Q and the log coefficient of the volume.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constants<S> {
    pub n: usize,
    /// `c_n = 2^(n-2) ((n/2 - 1)!)^2 / (n - 2)`
    pub c: S,
    /// `k_n = (-1)^(n/2) n (n - 2) c_n`
    pub k: S,
}

fn check_even(n: usize) -> Result<()> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::UnsupportedDimension { dimension: n, reason: "the obstruction tensor needs even n >= 4" });
    }
    Ok(())
}

/// `c_n` and `k_n` for even `n >= 4`.
pub fn constants<S: Scalar>(n: usize) -> Result<Constants<S>> {
    check_even(n)?;
    let mut c = S::from_i64(1);
    for _ in 0..n - 2 {
        c *= &S::from_i64(2);
    }
    for m in 1..n / 2 {
        let f = S::from_i64(m as i64);
        c *= &f;
        c *= &f;
    }
    c *= &S::from_ratio(1, (n - 2) as i64);
    let sign = if (n / 2).is_multiple_of(2) { 1 } else { -1 };
    let k = c.clone() * S::from_i64(sign * (n * (n - 2)) as i64);
    Ok(Constants { n, c, k })
}

/// A solved expansion
/// `g_x = g + g^(2) x^2 + ... + g^(n) x^n + r_0 x^n log x`.
#[derive(Clone, Debug)]
pub struct FGExpansion<S: Scalar> {
    n: usize,
    cap: usize,
    metric: MetricJet<TruncatedSeries<S>>,
    coefficients: Vec<SeriesTensor<S>>,
    log_coefficient: SeriesTensor<S>,
    obstruction: SeriesTensor<S>,
    constants: Constants<S>,
}

impl<S: Scalar> FGExpansion<S> {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Total-degree cap of the input metric.
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn metric(&self) -> &MetricJet<TruncatedSeries<S>> {
        &self.metric
    }

    pub fn constants(&self) -> &Constants<S> {
        &self.constants
    }

    /// Taylor coefficient of `x^s` (`g^(s)` in the usual notation), for
    /// `0 <= s <= n`. Its cap is `D - s`. The order-`n` coefficient is pure
    /// trace; its trace-free part is set to zero.
    pub fn coefficient(&self, s: usize) -> &SeriesTensor<S> {
        &self.coefficients[s]
    }

    pub fn coefficients(&self) -> &[SeriesTensor<S>] {
        &self.coefficients
    }

    /// `r_0`, the coefficient of `x^n log x`.
    pub fn log_coefficient(&self) -> &SeriesTensor<S> {
        &self.log_coefficient
    }

    pub fn obstruction(&self) -> &SeriesTensor<S> {
        &self.obstruction
    }

    fn assemble(&self, with_log: bool) -> Result<RadialMetric<S>> {
        let log = with_log.then_some(&self.log_coefficient);
        radial_metric_from_coefficients(&self.coefficients, log, self.cap)
    }

    /// `g_x` including the `x^n log x` term.
    pub fn radial_metric(&self) -> Result<RadialMetric<S>> {
        self.assemble(true)
    }

    /// `g_x` without the log term: the approximate solution whose residual
    /// exposes the obstruction at order `x^(n-2)`.
    pub fn polynomial_metric(&self) -> Result<RadialMetric<S>> {
        self.assemble(false)
    }
}

/// `d/dx` of every component.
fn d_dx<S: Scalar>(t: &RadialTensor<S>) -> Result<RadialTensor<S>> {
    t.try_map(|c| c.d_dx())
}

/// `2x E_ij` from
/// `-x g'' + x g^kl g'_ik g'_jl - (x/2) g^kl g'_kl g'_ij + (n-1) g' + g^kl g'_kl g + 2x Ric(g_x)`.
fn two_x_e<S: Scalar>(gx: &RadialMetric<S>) -> Result<RadialTensor<S>> {
    let n = gx.dim();
    let g = gx.g();
    let gp = d_dx(g)?;
    let gpp = d_dx(&gp)?;
    let tau = trace(&gp, gx, 0, 1)?.get(&[]);
    let gp_mixed = raise_index(&gp, gx, 1)?;
    let ric = ricci(gx)?;
    let half_tau_x = tau.scaled(&S::from_ratio(1, 2)).mul_x();
    TensorJet::from_fn(n, &[Covariant; 2], Symmetry::symmetric(2, 0, 1), &ric.zero_jet().mul_x(), |t| {
        let (i, j) = (t[0], t[1]);
        let mut inner = ric.get(t).scaled(&S::from_i64(2));
        inner.sub_assign_jet(&gpp.get(t));
        for l in 0..n {
            inner.add_product(&gp_mixed.get(&[i, l]), &gp.get(&[j, l]));
        }
        let mut acc = inner.mul_x();
        acc.sub_product(&half_tau_x, &gp.get(t));
        acc.add_scaled_jet(&S::from_i64(n as i64 - 1), &gp.get(t));
        acc.add_product(&tau, &g.get(t));
        Ok(acc)
    })
}

/// The components of `E = Ric(g_+) + n g_+` for `g_+ = x^{-2}(dx^2 + g_x)`.
#[derive(Clone, Debug)]
pub struct EinsteinResidual<S: Scalar> {
    /// `E_ij`
    pub tangential: RadialTensor<S>,
    /// `E_i0`
    pub mixed: RadialTensor<S>,
    /// `E_00`
    pub normal: RadialSeries<S>,
}

/// Vanishing order of a radial jet: `None` if it is zero through its cap,
/// otherwise the leading `(k, has_log)`.
pub fn vanishing_order<S: Scalar>(f: &RadialSeries<S>) -> Option<(usize, bool)> {
    f.leading_order()
}

fn tensor_order<S: Scalar>(t: &RadialTensor<S>) -> Option<(usize, bool)> {
    t.stored().filter_map(|(_, c)| c.leading_order()).min_by(|a, b| {
        // x^k log x is larger than x^k as x -> 0
        a.0.cmp(&b.0).then(b.1.cmp(&a.1))
    })
}

impl<S: Scalar> EinsteinResidual<S> {
    /// Leading orders of `E_ij`, `E_i0`, `E_00`.
    pub fn orders(&self) -> [Option<(usize, bool)>; 3] {
        [tensor_order(&self.tangential), tensor_order(&self.mixed), self.normal.leading_order()]
    }

    /// Caps of `E_ij`, `E_i0`, `E_00`: coefficients of `x^k` with `k` up to
    /// the cap are known (at the base point).
    pub fn caps(&self) -> [usize; 3] {
        [self.tangential.cap(), self.mixed.cap(), self.normal.cap()]
    }

    /// Spatial coefficient of `x^k` (or `x^k log x`) of `E_ij`.
    pub fn tangential_coefficient(&self, k: usize, log: bool) -> Result<SeriesTensor<S>> {
        let spatial = spatial_basis(self.tangential.zero_jet());
        let template = self.tangential.zero_jet().coefficient(k, log, &spatial);
        TensorJet::from_fn(self.tangential.dim(), &[Covariant; 2], self.tangential.symmetry().clone(), &template, |t| {
            Ok(self.tangential.get(t).coefficient(k, log, &spatial))
        })
    }
}

fn spatial_basis<S: Scalar>(r: &RadialSeries<S>) -> Arc<Basis> {
    let b = r.regular_part().basis();
    Basis::new(b.num_vars() - 1, b.max_degree())
}

/// Evaluates `E_ij`, `E_i0` and `E_00` on any radial metric with
/// `d/dx g_x = 0` at `x = 0`.
pub fn einstein_residual<S: Scalar>(gx: &RadialMetric<S>, n: usize) -> Result<EinsteinResidual<S>> {
    if gx.dim() != n {
        return Err(Error::Mismatch(format!("dimension {n} requested for a radial metric in dimension {}", gx.dim())));
    }
    need_cap("Einstein residual", 3, gx.cap())?;
    let tangential = two_x_e(gx)?.try_map(|c| c.div_x().map(|e| e.scaled(&S::from_ratio(1, 2))))
        .map_err(|_| Error::RadialRange("2x E_ij has an x^0 term; the radial metric must have g' = 0 at x = 0".into()))?;
    let g = gx.g();
    let gp = d_dx(g)?;
    let gpp = d_dx(&gp)?;
    let dgp = covariant_derivative(&gp, gx)?;
    let half = S::from_ratio(1, 2);
    // E_i0 = (1/2) g^kl (grad_l g'_ik - grad_i g'_kl)
    let mixed = TensorJet::from_fn(n, &[Covariant], Symmetry::none(1), dgp.zero_jet(), |t| {
        let i = t[0];
        let mut acc = dgp.zero_jet().clone();
        for k in 0..n {
            for l in 0..n {
                let d = dgp.get(&[i, k, l]).minus(&dgp.get(&[k, l, i]));
                acc.add_product(&gx.g_inv().get(&[k, l]), &d);
            }
        }
        Ok(acc.scaled(&half))
    })?;
    // E_00 = -(1/2) tr g'' + (1/4) tr((g^-1 g')^2) + (1/2) x^-1 tr g'
    let tr_gpp = trace(&gpp, gx, 0, 1)?.get(&[]);
    let a = raise_index(&gp, gx, 0)?;
    let mut sq = a.zero_jet().clone();
    for k in 0..n {
        for p in 0..n {
            sq.add_product(&a.get(&[k, p]), &a.get(&[p, k]));
        }
    }
    let tau = trace(&gp, gx, 0, 1)?.get(&[]);
    let mut normal = tr_gpp.scaled(&-half.clone());
    normal.add_scaled_jet(&S::from_ratio(1, 4), &sq);
    normal.add_scaled_jet(&half, &tau.div_x()?);
    Ok(EinsteinResidual { tangential, mixed, normal })
}

fn need_cap(operation: &'static str, required: usize, available: usize) -> Result<()> {
    if available < required {
        return Err(Error::InsufficientDegree { operation, required, available });
    }
    Ok(())
}

/// Left minus right sides of the two contracted Bianchi identities for
/// `g_+`, written through `E` and the connection of `g_x`:
///
/// `g^jk E'_jk - 2 grad^j E_j0 - (d_x + g^jk g'_jk - 2(n-1)/x) E_00` and
/// `d_i E_00 + d_i E_j^j - 2 grad^j E_ij - 2 (d_x + (1/2) g^jk g'_jk - (n-1)/x) E_i0`.
///
/// Both vanish for every radial metric.
pub fn bianchi_residual<S: Scalar>(gx: &RadialMetric<S>, n: usize) -> Result<(RadialSeries<S>, RadialTensor<S>)> {
    let e = einstein_residual(gx, n)?;
    let gp = d_dx(gx.g())?;
    let tau = trace(&gp, gx, 0, 1)?.get(&[]);
    let nm1 = S::from_i64(n as i64 - 1);

    let ep = d_dx(&e.tangential)?;
    let tr_ep = trace(&ep, gx, 0, 1)?.get(&[]);
    let div_mixed = trace(&covariant_derivative(&e.mixed, gx)?, gx, 0, 1)?.get(&[]);
    let mut first = tr_ep.minus(&div_mixed.scaled(&S::from_i64(2)));
    first.sub_assign_jet(&e.normal.d_dx()?);
    first.sub_product(&tau, &e.normal);
    first.add_scaled_jet(&(nm1.clone() + nm1.clone()), &e.normal.div_x()?);

    let tr_e = trace(&e.tangential, gx, 0, 1)?.get(&[]);
    let div_e = trace(&covariant_derivative(&e.tangential, gx)?, gx, 1, 2)?;
    let half_tau = tau.scaled(&S::from_ratio(1, 2));
    let second = TensorJet::from_fn(n, &[Covariant], Symmetry::none(1), div_e.zero_jet(), |t| {
        let i = t[0];
        let ei0 = e.mixed.get(t);
        let mut acc = e.normal.partial(i)?.plus(&tr_e.partial(i)?);
        acc.sub_assign_jet(&div_e.get(t).scaled(&S::from_i64(2)));
        let mut rhs = ei0.d_dx()?;
        rhs.add_product(&half_tau, &ei0);
        rhs.sub_assign_jet(&ei0.div_x()?.scaled(&nm1));
        acc.sub_assign_jet(&rhs.scaled(&S::from_i64(2)));
        Ok(acc)
    })?;
    Ok((first, second))
}

/// Solves the expansion for a metric jet of cap `D >= n`.
///
/// For `s = 1 .. n-1` the coefficient `g^(s)` is fixed by requiring the
/// `x^(s-1)` coefficient of `2x E_ij` to vanish: with `a` that coefficient
/// computed from the lower orders, `s ((n - s) eta + tr(eta) g) = -a`. At
/// `s = n` the trace-free part of `a` cannot be removed and gives
/// `O = c_n tf(a) / 2`; the trace of `g^(n)` is chosen to kill the trace of
/// `a`, and `r_0 = tf(a) / n`.
pub fn fg_expand<S: Scalar>(g: &MetricJet<TruncatedSeries<S>>, n: usize) -> Result<FGExpansion<S>> {
    check_even(n)?;
    if g.dim() != n {
        return Err(Error::Mismatch(format!("dimension {n} requested for a metric in dimension {}", g.dim())));
    }
    let cap = g.cap();
    need_cap("expansion to order n", n, cap)?;
    let constants = constants::<S>(n)?;
    let spatial = g.g().zero_jet().basis().clone();
    let g0 = g.g().clone();
    let mut coefficients: Vec<SeriesTensor<S>> = Vec::with_capacity(n + 1);
    coefficients.push(g0.clone());
    let sym = Symmetry::symmetric(2, 0, 1);

    let order_coefficient = |coefficients: &[SeriesTensor<S>], s: usize| -> Result<SeriesTensor<S>> {
        let gx = radial_metric_from_coefficients(coefficients, None, cap)?;
        let e = two_x_e(&gx)?;
        let template = e.zero_jet().coefficient(s - 1, false, &spatial);
        TensorJet::from_fn(n, &[Covariant; 2], sym.clone(), &template, |t| {
            Ok(e.get(t).coefficient(s - 1, false, &spatial))
        })
    };

    for s in 1..n {
        let gs = g.truncated(cap - s)?;
        if s % 2 == 1 {
            // 2xE is odd in x while the lower coefficients are even, so odd orders vanish
            coefficients.push(gs.g().scaled(&S::zero()));
            continue;
        }
        let a = order_coefficient(&coefficients, s)?;
        // B = -a / s, tr eta = tr B / (2n - s), eta = (B - tr eta g) / (n - s)
        let b = a.scaled(&S::from_ratio(-1, s as i64));
        let tr_b = trace(&b, &gs, 0, 1)?.get(&[]);
        let tr_eta = tr_b.scaled(&S::from_ratio(1, (2 * n - s) as i64));
        let inv = S::from_ratio(1, (n - s) as i64);
        let eta = TensorJet::from_fn(n, &[Covariant; 2], sym.clone(), b.zero_jet(), |t| {
            let mut c = b.get(t);
            c.sub_product(&tr_eta, &gs.g().get(t));
            Ok(c.scaled(&inv))
        })?;
        coefficients.push(eta);
    }

    let a = order_coefficient(&coefficients, n)?;
    let gn_metric = g.truncated(cap - n)?;
    let tf = trace_free_part(&a, &gn_metric)?;
    let tr_a = trace(&a, &gn_metric, 0, 1)?.get(&[]);
    let nn = n as i64;
    let scale = tr_a.scaled(&S::from_ratio(-1, nn * nn * nn));
    let gn = gn_metric.g().times_jet(&scale);
    coefficients.push(gn);
    let obstruction = tf.scaled(&(constants.c.clone() * S::from_ratio(1, 2)));
    let log_coefficient = tf.scaled(&S::from_ratio(1, nn));
    Ok(FGExpansion {
        n,
        cap,
        metric: g.clone(),
        coefficients,
        log_coefficient,
        obstruction,
        constants,
    })
}

/// The obstruction tensor from the expansion solver.
pub fn obstruction_fg<S: Scalar>(g: &MetricJet<TruncatedSeries<S>>, n: usize) -> Result<SeriesTensor<S>> {
    Ok(fg_expand(g, n)?.obstruction)
}

/// `g_x = (1 - lambda x^2)^2 g`, the exact solution when
/// `Ric(g) = 4 lambda (n - 1) g`.
///
/// The Einstein condition is checked on the supplied jet; a violation is
/// reported in the returned message rather than as an error.
pub fn einstein_exact_solution<S: Scalar>(
    g: &MetricJet<TruncatedSeries<S>>,
    lambda: &S,
    n: usize,
) -> Result<(RadialMetric<S>, Option<String>)> {
    if g.dim() != n {
        return Err(Error::Mismatch(format!("dimension {n} requested for a metric in dimension {}", g.dim())));
    }
    let cap = g.cap();
    let spatial = g.g().zero_jet().basis().clone();
    let warning = if cap >= 2 {
        let ric = ricci(g)?;
        let k = lambda.clone() * S::from_i64(4 * (n as i64 - 1));
        let defect = ric.minus(&g.g().truncated(cap - 2).scaled(&k))?;
        let tol = if S::EXACT { 0.0 } else { 1e-9 };
        let size = defect.max_abs();
        (size > tol).then(|| format!("Ric(g) - 4 lambda (n - 1) g does not vanish (max coefficient {size:e})"))
    } else {
        Some(String::from("metric cap below 2; the Einstein condition was not checked"))
    };
    let two_l = lambda.clone() * S::from_i64(-2);
    let l2 = lambda.clone() * lambda.clone();
    let mut m = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let gij = g.g().get(&[i, j]);
            let terms = [(0, false, gij.clone()), (2, false, gij.scale(&two_l)), (4, false, gij.scale(&l2))];
            m.push(RadialSeries::from_coefficients(&spatial, cap, &terms));
        }
    }
    Ok((MetricJet::from_matrix(n, &m)?, warning))
}

/// A radial metric from explicit spatial coefficients of `x^k`.
pub fn radial_metric_from_coefficients<S: Scalar>(
    coefficients: &[SeriesTensor<S>],
    log: Option<&SeriesTensor<S>>,
    cap: usize,
) -> Result<RadialMetric<S>> {
    let first = coefficients
        .first()
        .ok_or_else(|| Error::InvalidArgument("radial metric needs at least the x^0 coefficient".into()))?;
    let n = first.dim();
    let spatial = first.zero_jet().basis().clone();
    let mut m = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut terms: Vec<(usize, bool, TruncatedSeries<S>)> =
                coefficients.iter().enumerate().map(|(k, c)| (k, false, c.get(&[i, j]))).collect();
            if let Some(r) = log {
                terms.push((n, true, r.get(&[i, j])));
            }
            m.push(RadialSeries::from_coefficients(&spatial, cap, &terms));
        }
    }
    MetricJet::from_matrix(n, &m)
}

