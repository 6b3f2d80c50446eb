use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use once_cell::race::OnceBox;

const NONE: u32 = u32::MAX;

/// Monomials in `num_vars` variables of total degree at most `max_degree`,
/// enumerated in graded-lexicographic order.
///
/// Because the order is graded, the monomials of degree `<= d` form a prefix of
/// the enumeration for every `d`. A series with degree cap `d` therefore stores
/// exactly `count(d)` coefficients, and series with different caps share one
/// indexing scheme.
pub struct Basis {
    num_vars: usize,
    max_degree: usize,
    exponents: Vec<u8>,
    degrees: Vec<u8>,
    /// `offsets[d]` is the number of monomials of degree `< d`.
    offsets: Vec<usize>,
    row_start: Vec<usize>,
    products: Vec<u32>,
    /// `raise[v * len + i]`: index of monomial `i` times variable `v`.
    raise: Vec<u32>,
    /// `binomial[a * width + b] = C(a, b)`.
    binomial: Vec<usize>,
    width: usize,
    radial: OnceBox<Arc<Basis>>,
}

fn push_compositions(out: &mut Vec<Vec<u8>>, prefix: &mut Vec<u8>, vars_left: usize, degree: usize) {
    if vars_left == 1 {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first as u8);
        push_compositions(out, prefix, vars_left - 1, degree - first);
        prefix.pop();
    }
}

/// Position of a monomial in graded-lexicographic order. Within one degree,
/// the monomials before `e` are those that are larger at the first position
/// where they differ; for position `i` with `r` degrees left these number
/// `C(r - e_i - 1 + k, k)` with `k` the count of later variables.
fn rank_of(e: &[u8], offsets: &[usize], binomial: &[usize], width: usize) -> usize {
    let degree: usize = e.iter().map(|&x| x as usize).sum();
    let mut rank = offsets[degree];
    let mut left = degree;
    let v = e.len();
    for (i, &x) in e.iter().enumerate().take(v.saturating_sub(1)) {
        let x = x as usize;
        if left > x {
            let k = v - i - 1;
            rank += binomial[(left - x - 1 + k) * width + k];
        }
        left -= x;
    }
    rank
}

impl Basis {
    pub fn new(num_vars: usize, max_degree: usize) -> Arc<Self> {
        assert!(num_vars >= 1, "a basis needs at least one variable");
        assert!(max_degree < 64, "degree caps above 63 are not supported");
        let mut monomials = Vec::new();
        let mut offsets = vec![0usize];
        for d in 0..=max_degree {
            push_compositions(&mut monomials, &mut Vec::new(), num_vars, d);
            offsets.push(monomials.len());
        }
        let len = monomials.len();
        let width = max_degree + num_vars + 1;
        let mut binomial = vec![0usize; width * width];
        for a in 0..width {
            binomial[a * width] = 1;
            for b in 1..=a {
                binomial[a * width + b] = binomial[(a - 1) * width + b - 1] + binomial[(a - 1) * width + b];
            }
        }
        let rank = |m: &[u8]| rank_of(m, &offsets, &binomial, width) as u32;
        let degrees: Vec<u8> = monomials.iter().map(|m| m.iter().sum()).collect();

        let mut row_start = Vec::with_capacity(len + 1);
        let mut products = Vec::new();
        let mut buf = vec![0u8; num_vars];
        for (i, mi) in monomials.iter().enumerate() {
            row_start.push(products.len());
            let room = max_degree - degrees[i] as usize;
            for mj in &monomials[..offsets[room + 1]] {
                for v in 0..num_vars {
                    buf[v] = mi[v] + mj[v];
                }
                products.push(rank(&buf));
            }
        }
        row_start.push(products.len());

        let mut raise = vec![NONE; num_vars * len];
        for (i, m) in monomials.iter().enumerate() {
            if degrees[i] as usize == max_degree {
                continue;
            }
            for v in 0..num_vars {
                buf.copy_from_slice(m);
                buf[v] += 1;
                raise[v * len + i] = rank(&buf);
            }
        }

        Arc::new(Basis {
            num_vars,
            max_degree,
            exponents: monomials.concat(),
            degrees,
            offsets,
            row_start,
            products,
            raise,
            binomial,
            width,
            radial: OnceBox::new(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Total number of monomials.
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Number of monomials of total degree `<= degree`.
    pub fn count(&self, degree: usize) -> usize {
        self.offsets[degree.min(self.max_degree) + 1]
    }

    /// Index range of the monomials of exactly this degree.
    pub fn degree_range(&self, degree: usize) -> core::ops::Range<usize> {
        self.offsets[degree]..self.offsets[degree + 1]
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.degrees[i] as usize
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exponents[i * self.num_vars..(i + 1) * self.num_vars]
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        let degree: usize = exponents.iter().map(|&e| e as usize).sum();
        if exponents.len() != self.num_vars || degree > self.max_degree {
            return None;
        }
        Some(rank_of(exponents, &self.offsets, &self.binomial, self.width))
    }

    /// `product_row(i)[j]` is the index of monomial `i` times monomial `j`, for
    /// every `j` with `degree(i) + degree(j) <= max_degree`.
    pub fn product_row(&self, i: usize) -> &[u32] {
        &self.products[self.row_start[i]..self.row_start[i + 1]]
    }

    /// Index of monomial `i` multiplied by variable `var`, if within the basis.
    pub fn raised(&self, var: usize, i: usize) -> Option<usize> {
        match self.raise[var * self.len() + i] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    /// The basis with one extra trailing variable (the radial coordinate `x`)
    /// and the same maximal degree. Built on first use and cached.
    pub fn radial_extension(&self) -> &Arc<Basis> {
        self.radial
            .get_or_init(|| alloc::boxed::Box::new(Basis::new(self.num_vars + 1, self.max_degree)))
    }
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.max_degree == other.max_degree
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Basis")
            .field("num_vars", &self.num_vars)
            .field("max_degree", &self.max_degree)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_prefix_counts() {
        let b = Basis::new(3, 4);
        // C(d + 3, 3)
        assert_eq!(b.count(0), 1);
        assert_eq!(b.count(1), 4);
        assert_eq!(b.count(2), 10);
        assert_eq!(b.count(4), 35);
        assert_eq!(b.exponents(1), &[1, 0, 0]);
        assert_eq!(b.exponents(3), &[0, 0, 1]);
    }

    #[test]
    fn product_table_matches_exponent_sums() {
        let b = Basis::new(2, 5);
        for i in 0..b.len() {
            for (j, &k) in b.product_row(i).iter().enumerate() {
                let expect: Vec<u8> = b
                    .exponents(i)
                    .iter()
                    .zip(b.exponents(j))
                    .map(|(x, y)| x + y)
                    .collect();
                assert_eq!(b.exponents(k as usize), &expect[..]);
            }
        }
    }

    #[test]
    fn rank_inverts_enumeration() {
        for (vars, deg) in [(1, 6), (2, 5), (4, 4), (5, 7)] {
            let b = Basis::new(vars, deg);
            for i in 0..b.len() {
                assert_eq!(b.index_of(b.exponents(i)), Some(i));
            }
            assert_eq!(b.index_of(&vec![0; vars + 1]), None);
            let mut over = vec![0u8; vars];
            over[0] = deg as u8 + 1;
            assert_eq!(b.index_of(&over), None);
        }
    }
}
