use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

/// A group of slot permutations with signs, acting on the index tuples of a
/// tensor: each element `(p, negate)` states `T[t] = +/- T[t o p]` where
/// `(t o p)[s] = t[p[s]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symmetry {
    rank: usize,
    generators: Vec<(Vec<usize>, bool)>,
}

impl Symmetry {
    pub fn none(rank: usize) -> Self {
        Symmetry { rank, generators: Vec::new() }
    }

    fn swap(rank: usize, a: usize, b: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..rank).collect();
        p.swap(a, b);
        p
    }

    /// Symmetric under exchange of slots `a` and `b`.
    pub fn symmetric(rank: usize, a: usize, b: usize) -> Self {
        Self::none(rank).with_symmetric(a, b)
    }

    /// Antisymmetric under exchange of slots `a` and `b`.
    pub fn antisymmetric(rank: usize, a: usize, b: usize) -> Self {
        Self::none(rank).with_antisymmetric(a, b)
    }

    pub fn with_symmetric(mut self, a: usize, b: usize) -> Self {
        assert!(a < self.rank && b < self.rank && a != b);
        self.generators.push((Self::swap(self.rank, a, b), false));
        self
    }

    pub fn with_antisymmetric(mut self, a: usize, b: usize) -> Self {
        assert!(a < self.rank && b < self.rank && a != b);
        self.generators.push((Self::swap(self.rank, a, b), true));
        self
    }

    /// Algebraic symmetries of a curvature tensor `R_ijkl`: antisymmetric in
    /// each pair, symmetric under pair exchange.
    pub fn riemann() -> Self {
        let mut s = Self::none(4).with_antisymmetric(0, 1).with_antisymmetric(2, 3);
        s.generators.push((vec![2, 3, 0, 1], false));
        s
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The same symmetry on a tensor with extra trailing slots.
    pub fn extended(&self, rank: usize) -> Self {
        assert!(rank >= self.rank);
        Symmetry {
            rank,
            generators: self
                .generators
                .iter()
                .map(|(p, neg)| {
                    let mut q = p.clone();
                    q.extend(self.rank..rank);
                    (q, *neg)
                })
                .collect(),
        }
    }

    /// Keeps the generators that fix every slot in `slots`.
    pub fn fixing(&self, slots: &[usize]) -> Self {
        Symmetry {
            rank: self.rank,
            generators: self
                .generators
                .iter()
                .filter(|(p, _)| slots.iter().all(|&s| p[s] == s))
                .cloned()
                .collect(),
        }
    }

    /// Drops slots that every kept generator fixes, renumbering the rest.
    pub fn without_slots(&self, slots: &[usize]) -> Self {
        let kept = self.fixing(slots);
        let map: Vec<Option<usize>> = {
            let mut next = 0;
            (0..self.rank)
                .map(|s| {
                    if slots.contains(&s) {
                        None
                    } else {
                        next += 1;
                        Some(next - 1)
                    }
                })
                .collect()
        };
        let rank = self.rank - slots.len();
        Symmetry {
            rank,
            generators: kept
                .generators
                .iter()
                .map(|(p, neg)| {
                    let q = (0..self.rank)
                        .filter(|s| !slots.contains(s))
                        .map(|s| map[p[s]].unwrap())
                        .collect();
                    (q, *neg)
                })
                .collect(),
        }
    }

    /// All group elements generated by the declared generators.
    pub fn elements(&self) -> Vec<(Vec<usize>, bool)> {
        let identity: Vec<usize> = (0..self.rank).collect();
        let mut seen: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
        seen.insert(identity.clone(), false);
        let mut frontier = vec![(identity, false)];
        while let Some((p, neg)) = frontier.pop() {
            for (g, gneg) in &self.generators {
                let r: Vec<usize> = (0..self.rank).map(|s| p[g[s]]).collect();
                let rneg = neg ^ gneg;
                if !seen.contains_key(&r) {
                    seen.insert(r.clone(), rneg);
                    frontier.push((r, rneg));
                }
            }
        }
        seen.into_iter().collect()
    }
}

const ZERO: u32 = u32::MAX;

/// Storage plan for one (dimension, symmetry) pair: the lexicographically
/// minimal tuple of every orbit is stored, every other tuple maps onto it
/// with a sign. Orbits that contain a tuple together with its negative are
/// identically zero and store nothing.
#[derive(Debug)]
pub struct Layout {
    pub(crate) dim: usize,
    pub(crate) symmetry: Symmetry,
    pub(crate) canonical: Vec<Vec<usize>>,
    lookup: Vec<(u32, bool)>,
}

impl Layout {
    pub fn new(dim: usize, symmetry: Symmetry) -> Self {
        let rank = symmetry.rank();
        let elements = symmetry.elements();
        let total = dim.pow(rank as u32);
        let mut lookup = vec![(ZERO, false); total];
        let mut canonical = Vec::new();
        let mut slot_of: BTreeMap<Vec<usize>, u32> = BTreeMap::new();
        let mut t = vec![0usize; rank];
        for flat in 0..total {
            let mut rem = flat;
            for s in (0..rank).rev() {
                t[s] = rem % dim;
                rem /= dim;
            }
            let mut best: Option<(Vec<usize>, bool)> = None;
            let mut vanishes = false;
            let mut images: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
            for (p, neg) in &elements {
                let img: Vec<usize> = (0..rank).map(|s| t[p[s]]).collect();
                if let Some(prev) = images.get(&img) {
                    if *prev != *neg {
                        vanishes = true;
                    }
                } else {
                    images.insert(img.clone(), *neg);
                }
                if best.as_ref().is_none_or(|(b, _)| img < *b) {
                    best = Some((img, *neg));
                }
            }
            if vanishes {
                continue;
            }
            let (m, neg) = best.unwrap();
            let slot = match slot_of.get(&m) {
                Some(&s) => s,
                None => {
                    let s = canonical.len() as u32;
                    slot_of.insert(m.clone(), s);
                    canonical.push(m);
                    s
                }
            };
            lookup[flat] = (slot, neg);
        }
        Layout { dim, symmetry, canonical, lookup }
    }

    pub fn rank(&self) -> usize {
        self.symmetry.rank()
    }

    pub(crate) fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// Storage slot and sign of an index tuple; `None` if the component
    /// vanishes by symmetry.
    pub fn locate(&self, idx: &[usize]) -> Option<(usize, bool)> {
        match self.lookup[self.flat(idx)] {
            (ZERO, _) => None,
            (s, neg) => Some((s as usize, neg)),
        }
    }
}
