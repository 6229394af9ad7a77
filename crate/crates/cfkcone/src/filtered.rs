//! Doubly filtered complexes over `F2[U, U^-1]` whose generators remember the
//! cone tower they came from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, BitVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Part {
    A,
    B,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::A => "A",
            Part::B => "B",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredGen {
    pub id: String,
    pub part: Part,
    pub s: i64,
    /// Id of the underlying knot generator.
    pub base: String,
    /// Position of `base` among the knot's generators; used for ordering.
    pub base_pos: usize,
    pub i: i64,
    pub j: i64,
    pub filt_i: i64,
    pub filt_j: i64,
    pub maslov: i64,
    pub label: Option<String>,
}

impl FilteredGen {
    pub fn cone_id(part: Part, s: i64, base: &str) -> String {
        format!("{part}{s}:{base}")
    }

    /// Reduction order: tower, then `B` before `A`, then base position.
    pub fn order_key(&self) -> (i64, u8, usize) {
        (self.s, if self.part == Part::B { 0 } else { 1 }, self.base_pos)
    }

    pub fn name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.id)
    }
}

/// Map between filtered complexes; `f[x]` sends generator `x` to a sum of
/// `U^k y`.
pub type FilteredMap = Vec<BTreeMap<usize, i64>>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilteredComplex {
    gens: Vec<FilteredGen>,
    index: BTreeMap<String, usize>,
    diff: Vec<BTreeMap<usize, i64>>,
}

impl FilteredComplex {
    pub fn new(gens: Vec<FilteredGen>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (k, g) in gens.iter().enumerate() {
            if index.insert(g.id.clone(), k).is_some() {
                return Err(Error::invalid(format!("duplicate generator id {:?}", g.id)));
            }
        }
        let diff = vec![BTreeMap::new(); gens.len()];
        Ok(FilteredComplex { gens, index, diff })
    }

    /// U-power of a term `x -> y`, forced by the Maslov gradings.
    pub fn power(&self, x: usize, y: usize) -> Result<i64> {
        let d = self.gens[y].maslov - self.gens[x].maslov + 1;
        if d % 2 != 0 {
            return Err(Error::invalid(format!(
                "{} -> {} has the wrong Maslov parity",
                self.gens[x].id, self.gens[y].id
            )));
        }
        Ok(d / 2)
    }

    pub fn add_term(&mut self, x: usize, y: usize) -> Result<()> {
        let k = self.power(x, y)?;
        if self.diff[x].insert(y, k).is_some() {
            return Err(Error::invalid(format!(
                "duplicate differential entry {} -> {}",
                self.gens[x].id, self.gens[y].id
            )));
        }
        Ok(())
    }

    pub fn gens(&self) -> &[FilteredGen] {
        &self.gens
    }

    pub fn gen(&self, x: usize) -> &FilteredGen {
        &self.gens[x]
    }

    pub fn set_label(&mut self, x: usize, label: Option<String>) {
        self.gens[x].label = label;
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Looks a generator up by id or by label.
    pub fn find(&self, name: &str) -> Option<usize> {
        self.index_of(name).or_else(|| self.gens.iter().position(|g| g.label.as_deref() == Some(name)))
    }

    pub fn differential(&self, x: usize) -> &BTreeMap<usize, i64> {
        &self.diff[x]
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.diff.iter().enumerate().flat_map(|(x, d)| d.iter().map(move |(&y, &k)| (x, y, k)))
    }

    pub fn edge_count(&self) -> usize {
        self.diff.iter().map(BTreeMap::len).sum()
    }

    /// Filtration drop `(I, J)(x) - (I, J)(U^k y)` of a differential term.
    pub fn delta(&self, x: usize, y: usize) -> Result<(i64, i64)> {
        let k = *self.diff[x].get(&y).ok_or_else(|| {
            Error::invalid(format!("{} does not appear in the differential of {}", self.gens[y].name(), self.gens[x].name()))
        })?;
        Ok(self.drop_of(x, y, k))
    }

    pub(crate) fn drop_of(&self, x: usize, y: usize, k: i64) -> (i64, i64) {
        let (a, b) = (&self.gens[x], &self.gens[y]);
        (a.filt_i - (b.filt_i - k), a.filt_j - (b.filt_j - k))
    }

    /// Problems with the complex, one line each; empty when it is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (x, y, k) in self.terms() {
            let (a, b) = (&self.gens[x], &self.gens[y]);
            if b.maslov - 2 * k != a.maslov - 1 {
                out.push(format!("{} -> U^{k} {} does not drop Maslov by 1", a.id, b.id));
            }
            let (di, dj) = self.drop_of(x, y, k);
            if di < 0 || dj < 0 {
                out.push(format!("{} -> U^{k} {} raises a filtration", a.id, b.id));
            }
        }
        for x in 0..self.len() {
            for (z, k) in compose(&self.diff, &self.diff, x) {
                out.push(format!("d^2({}) contains U^{k} {}", self.gens[x].id, self.gens[z].id));
            }
        }
        out
    }

    /// Terms that preserve both filtrations.
    pub fn flat_terms(&self) -> Vec<(usize, usize)> {
        self.terms()
            .filter(|&(x, y, k)| self.drop_of(x, y, k) == (0, 0))
            .map(|(x, y, _)| (x, y))
            .collect()
    }

    pub fn is_reduced(&self) -> bool {
        self.flat_terms().is_empty()
    }

    /// Rank of homology with `U` set to 1.
    pub fn localized_rank(&self) -> usize {
        let cols: Vec<BitVec> =
            self.diff.iter().map(|d| BitVec::from_ones(self.len(), d.keys().copied())).collect();
        self.len() - 2 * gf2::rank(&cols)
    }

    /// Whether `f` (from `self` to `other`) commutes with the differentials.
    pub fn is_chain_map(&self, other: &FilteredComplex, f: &[BTreeMap<usize, i64>]) -> bool {
        (0..self.len()).all(|x| compose(f, &other.diff, x) == compose(&self.diff, f, x))
    }

    /// Keeps the listed generators (in the given order) and the terms
    /// between them.
    pub fn restrict(&self, keep: &[usize]) -> FilteredComplex {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &x)| (x, k)).collect();
        let mut out = FilteredComplex::new(keep.iter().map(|&x| self.gens[x].clone()).collect())
            .expect("subset of distinct ids");
        for (k, &x) in keep.iter().enumerate() {
            out.diff[k] = self.diff[x].iter().filter_map(|(y, &e)| pos.get(y).map(|&p| (p, e))).collect();
        }
        out
    }

    pub(crate) fn diff_mut(&mut self) -> &mut Vec<BTreeMap<usize, i64>> {
        &mut self.diff
    }

    /// Towers present, as sorted `(part, s)` pairs.
    pub fn towers(&self) -> BTreeSet<(Part, i64)> {
        self.gens.iter().map(|g| (g.part, g.s)).collect()
    }
}

/// `(g ∘ f)(x)` as a set of `U^k z` terms, with F2 cancellation.
pub(crate) fn compose(f: &[BTreeMap<usize, i64>], g: &[BTreeMap<usize, i64>], x: usize) -> BTreeSet<(usize, i64)> {
    let mut acc = BTreeSet::new();
    for (&y, &a) in &f[x] {
        for (&z, &b) in &g[y] {
            if !acc.remove(&(z, a + b)) {
                acc.insert((z, a + b));
            }
        }
    }
    acc
}
