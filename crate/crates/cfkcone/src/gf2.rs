//! Dense linear algebra over F2 on packed bit vectors.

use std::collections::HashMap;

#[derive(Clone, Debug, Default)]
pub struct BitVec {
    words: Vec<u64>,
}

impl PartialEq for BitVec {
    fn eq(&self, other: &Self) -> bool {
        let n = self.words.len().max(other.words.len());
        (0..n).all(|k| self.words.get(k).unwrap_or(&0) == other.words.get(k).unwrap_or(&0))
    }
}

impl Eq for BitVec {}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn get(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    pub fn set(&mut self, i: usize, on: bool) {
        if self.get(i) != on {
            self.flip(i);
        }
    }

    pub fn flip(&mut self, i: usize) {
        let w = i / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1 << (i % 64);
    }

    pub fn xor_with(&mut self, other: &BitVec) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the highest set bit.
    pub fn leading(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + 63 - w.leading_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// A subspace in echelon form. Each stored row remembers which inserted
/// vectors it was assembled from.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(BitVec, BitVec)>,
    pivots: HashMap<usize, usize>,
    inserted: usize,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows; returns the residue and the
    /// combination of inserted vectors that was subtracted.
    pub fn reduce(&self, v: &BitVec) -> (BitVec, BitVec) {
        let mut v = v.clone();
        let mut residue = BitVec::default();
        let mut comb = BitVec::default();
        while let Some(h) = v.leading() {
            match self.pivots.get(&h) {
                Some(&r) => {
                    v.xor_with(&self.rows[r].0);
                    comb.xor_with(&self.rows[r].1);
                }
                None => {
                    residue.flip(h);
                    v.flip(h);
                }
            }
        }
        (residue, comb)
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Inserts `v`; returns `None` if it was independent, or the combination
    /// of earlier inserted vectors that equals it.
    pub fn insert(&mut self, v: &BitVec) -> Option<BitVec> {
        let idx = self.inserted;
        self.inserted += 1;
        let mut w = v.clone();
        let mut comb = BitVec::default();
        while let Some(h) = w.leading() {
            match self.pivots.get(&h) {
                Some(&r) => {
                    w.xor_with(&self.rows[r].0);
                    comb.xor_with(&self.rows[r].1);
                }
                None => {
                    comb.flip(idx);
                    self.pivots.insert(h, self.rows.len());
                    self.rows.push((w, comb));
                    return None;
                }
            }
        }
        Some(comb)
    }
}

/// Basis of `{c : sum_i c_i * cols[i] = 0}`.
pub fn kernel(cols: &[BitVec]) -> Vec<BitVec> {
    let mut ech = Echelon::new();
    let mut out = Vec::new();
    for (i, c) in cols.iter().enumerate() {
        if let Some(mut comb) = ech.insert(c) {
            comb.flip(i);
            out.push(comb);
        }
    }
    out
}

pub fn rank(cols: &[BitVec]) -> usize {
    let mut ech = Echelon::new();
    for c in cols {
        ech.insert(c);
    }
    ech.rank()
}

/// Some `c` with `sum_i c_i * cols[i] = target`, if one exists.
pub fn solve(cols: &[BitVec], target: &BitVec) -> Option<BitVec> {
    let mut ech = Echelon::new();
    for c in cols {
        ech.insert(c);
    }
    let (residue, comb) = ech.reduce(target);
    residue.is_zero().then_some(comb)
}
