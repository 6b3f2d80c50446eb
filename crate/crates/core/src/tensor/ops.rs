use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{MetricJet, Symmetry, TensorJet, Variance};
use crate::series::Jet;
use crate::{Error, Result, Scalar};

use Variance::{Contravariant, Covariant};

fn check_dim<J: Jet>(t: &TensorJet<J>, g: &MetricJet<J>) -> Result<()> {
    if t.dim() != g.dim() {
        return Err(Error::Mismatch(format!(
            "{} paired with a metric in dimension {}",
            t.describe(),
            g.dim()
        )));
    }
    Ok(())
}

fn check_slot<J: Jet>(t: &TensorJet<J>, slot: usize) -> Result<()> {
    if slot >= t.rank() {
        return Err(Error::InvalidIndex(format!("slot {slot} of a {}", t.describe())));
    }
    Ok(())
}

/// Levi-Civita derivative `T_{...;k}`, appending the new covariant slot
/// last. The result has cap `min(cap T, cap g) - 1`.
pub fn covariant_derivative<J: Jet>(t: &TensorJet<J>, g: &MetricJet<J>) -> Result<TensorJet<J>> {
    check_dim(t, g)?;
    if t.cap() == 0 {
        return Err(Error::InsufficientDegree {
            operation: "covariant derivative",
            required: 1,
            available: 0,
        });
    }
    let gamma = g.christoffel()?;
    let n = t.dim();
    let r = t.rank();
    // partials[s][k] for every stored component s
    let partials: Vec<Vec<J>> = t
        .stored()
        .map(|(_, c)| (0..n).map(|k| c.partial(k)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut variance = t.variance().to_vec();
    variance.push(Covariant);
    let symmetry = t.symmetry().extended(r + 1);
    let template = t.zero_jet().truncated(t.cap() - 1);
    let mut idx = vec![0usize; r];
    TensorJet::from_fn(n, &variance, symmetry, &template, |full| {
        let k = full[r];
        let base = &full[..r];
        let mut acc = match t.layout.locate(base) {
            None => template.clone(),
            Some((s, false)) => partials[s][k].clone(),
            Some((s, true)) => partials[s][k].negated(),
        };
        for a in 0..r {
            idx.copy_from_slice(base);
            for m in 0..n {
                idx[a] = m;
                match t.variance()[a] {
                    Covariant => {
                        if let Some((gm, gneg)) = gamma.lookup(&[m, k, base[a]]) {
                            t.accumulate_into(&mut acc, gm, &idx, !gneg);
                        }
                    }
                    Contravariant => {
                        if let Some((gm, gneg)) = gamma.lookup(&[base[a], k, m]) {
                            t.accumulate_into(&mut acc, gm, &idx, gneg);
                        }
                    }
                }
            }
        }
        Ok(acc)
    })
}

/// Contraction of slots `a` and `b`, inserting `g_ij` or `g^ij` when both
/// slots have the same variance. The result carries the symmetries of `t`
/// that fix both slots.
pub fn trace<J: Jet>(t: &TensorJet<J>, g: &MetricJet<J>, a: usize, b: usize) -> Result<TensorJet<J>> {
    check_dim(t, g)?;
    check_slot(t, a)?;
    check_slot(t, b)?;
    if a == b {
        return Err(Error::InvalidIndex(format!("cannot contract slot {a} with itself")));
    }
    let n = t.dim();
    let r = t.rank();
    let va = t.variance()[a];
    let vb = t.variance()[b];
    let variance: Vec<Variance> = (0..r).filter(|&s| s != a && s != b).map(|s| t.variance()[s]).collect();
    let symmetry = t.symmetry().without_slots(&[a, b]);
    let mut full = vec![0usize; r];
    TensorJet::from_fn(n, &variance, symmetry, t.zero_jet(), |rest| {
        let mut it = rest.iter();
        for (s, f) in full.iter_mut().enumerate() {
            if s != a && s != b {
                *f = *it.next().unwrap();
            }
        }
        let mut acc = t.zero_jet().clone();
        if va != vb {
            for p in 0..n {
                full[a] = p;
                full[b] = p;
                if let Some((c, neg)) = t.lookup(&full) {
                    if neg {
                        acc.sub_assign_jet(c)
                    } else {
                        acc.add_assign_jet(c)
                    }
                }
            }
        } else {
            let m = if va == Covariant { g.g_inv() } else { g.g() };
            for p in 0..n {
                for q in 0..n {
                    full[a] = p;
                    full[b] = q;
                    if let Some((w, _)) = m.lookup(&[p, q]) {
                        t.accumulate_into(&mut acc, w, &full, false);
                    }
                }
            }
        }
        Ok(acc)
    })
}

fn flip_index<J: Jet>(t: &TensorJet<J>, g: &MetricJet<J>, slot: usize, from: Variance) -> Result<TensorJet<J>> {
    check_dim(t, g)?;
    check_slot(t, slot)?;
    if t.variance()[slot] != from {
        return Err(Error::InvalidIndex(format!("slot {slot} of a {} is not {from:?}", t.describe())));
    }
    let n = t.dim();
    let m = if from == Covariant { g.g_inv() } else { g.g() };
    let mut variance = t.variance().to_vec();
    variance[slot] = from.flipped();
    let symmetry = t.symmetry().fixing(&[slot]);
    let mut idx = vec![0usize; t.rank()];
    TensorJet::from_fn(n, &variance, symmetry, t.zero_jet(), |out| {
        idx.copy_from_slice(out);
        let mut acc = t.zero_jet().clone();
        for p in 0..n {
            idx[slot] = p;
            if let Some((w, _)) = m.lookup(&[out[slot], p]) {
                t.accumulate_into(&mut acc, w, &idx, false);
            }
        }
        Ok(acc)
    })
}

/// Raises a covariant slot with `g^ij`.
pub fn raise_index<J: Jet>(t: &TensorJet<J>, g: &MetricJet<J>, slot: usize) -> Result<TensorJet<J>> {
    flip_index(t, g, slot, Covariant)
}

/// Lowers a contravariant slot with `g_ij`.
pub fn lower_index<J: Jet>(t: &TensorJet<J>, g: &MetricJet<J>, slot: usize) -> Result<TensorJet<J>> {
    flip_index(t, g, slot, Contravariant)
}

/// `S - (tr S / n) g` for a covariant symmetric 2-tensor.
pub fn trace_free_part<J: Jet>(s: &TensorJet<J>, g: &MetricJet<J>) -> Result<TensorJet<J>> {
    check_dim(s, g)?;
    if s.variance() != [Covariant, Covariant] {
        return Err(Error::InvalidArgument(format!("trace-free part of a {}", s.describe())));
    }
    let n = s.dim();
    let tr = trace(s, g, 0, 1)?.get(&[]);
    let mean = tr.scaled(&J::Scalar::from_ratio(1, n as i64));
    let symmetry = if s.symmetry().rank() == 2 && *s.symmetry() == Symmetry::symmetric(2, 0, 1) {
        s.symmetry().clone()
    } else {
        Symmetry::none(2)
    };
    TensorJet::from_fn(n, &[Covariant; 2], symmetry, s.zero_jet(), |t| {
        let mut c = s.get(t);
        if let Some((gij, _)) = g.g().lookup(t) {
            c.sub_product(&mean, gij);
        }
        Ok(c)
    })
}
