//! Bigraded free complexes over `F2[U,V]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{self, BitVec, Echelon};
use crate::snf;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub u: u32,
    pub v: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { u: 0, v: 0 };

    pub fn new(u: u32, v: u32) -> Self {
        Monomial { u, v }
    }

    pub fn mul(self, other: Monomial) -> Monomial {
        Monomial::new(self.u + other.u, self.v + other.v)
    }

    pub fn divides(self, other: Monomial) -> bool {
        self.u <= other.u && self.v <= other.v
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (name, e) in [("U", self.u), ("V", self.v)] {
            match e {
                0 => {}
                1 => {
                    write!(f, "{name}")?;
                    wrote = true;
                }
                _ => {
                    write!(f, "{name}^{e}")?;
                    wrote = true;
                }
            }
        }
        if !wrote {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// A formal sum of `monomial * generator` with F2 coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Chain(BTreeSet<(usize, Monomial)>);

impl Chain {
    pub fn new() -> Self {
        Chain::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Monomial)>) -> Self {
        let mut c = Chain::new();
        for t in terms {
            c.toggle(t.0, t.1);
        }
        c
    }

    pub fn toggle(&mut self, gen: usize, m: Monomial) {
        if !self.0.remove(&(gen, m)) {
            self.0.insert((gen, m));
        }
    }

    pub fn add(&mut self, other: &Chain) {
        for &(g, m) in &other.0 {
            self.toggle(g, m);
        }
    }

    pub fn times(&self, m: Monomial) -> Chain {
        Chain(self.0.iter().map(|&(g, k)| (g, k.mul(m))).collect())
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, Monomial)> + '_ {
        self.0.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, gen: usize, m: Monomial) -> bool {
        self.0.contains(&(gen, m))
    }

    pub fn coefficient_of(&self, gen: usize) -> Vec<Monomial> {
        self.0.range((gen, Monomial::ONE)..).take_while(|t| t.0 == gen).map(|t| t.1).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BigradedGen {
    pub id: String,
    pub gr_u: i64,
    pub gr_v: i64,
}

impl BigradedGen {
    pub fn new(id: impl Into<String>, gr_u: i64, gr_v: i64) -> Self {
        BigradedGen { id: id.into(), gr_u, gr_v }
    }

    /// `(gr_u - gr_v) / 2`, when that is an integer.
    pub fn alexander(&self) -> Option<i64> {
        let d = self.gr_u - self.gr_v;
        (d % 2 == 0).then_some(d / 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    SquareNonZero { source: String, target: String, mono: Monomial },
    GradingDrop { source: String, target: String, mono: Monomial },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SquareNonZero { source, target, mono } => {
                write!(f, "d^2({source}) contains {mono}*{target}")
            }
            Violation::GradingDrop { source, target, mono } => {
                write!(f, "term {source} -> {mono}*{target} does not drop the bigrading by (1,1)")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComplexUV {
    gens: Vec<BigradedGen>,
    index: BTreeMap<String, usize>,
    diff: Vec<Chain>,
}

impl ComplexUV {
    pub fn new(gens: Vec<BigradedGen>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, g) in gens.iter().enumerate() {
            if index.insert(g.id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate generator id {:?}", g.id)));
            }
        }
        let diff = vec![Chain::new(); gens.len()];
        Ok(ComplexUV { gens, index, diff })
    }

    pub fn from_parts(
        gens: Vec<BigradedGen>,
        terms: impl IntoIterator<Item = (String, String, Monomial)>,
    ) -> Result<Self> {
        let mut c = ComplexUV::new(gens)?;
        for (from, to, m) in terms {
            c.add_term(&from, &to, m)?;
        }
        Ok(c)
    }

    /// The complex of the unknot: one generator in bigrading (0,0).
    pub fn unit() -> Self {
        ComplexUV::new(vec![BigradedGen::new("x", 0, 0)]).expect("single id")
    }

    pub fn add_term(&mut self, from: &str, to: &str, m: Monomial) -> Result<()> {
        let x = self.require(from)?;
        let y = self.require(to)?;
        if self.diff[x].contains(y, m) {
            return Err(Error::invalid(format!("duplicate differential entry {from} -> {m}*{to}")));
        }
        self.diff[x].toggle(y, m);
        Ok(())
    }

    pub fn set_differential(&mut self, gen: usize, chain: Chain) {
        self.diff[gen] = chain;
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::invalid(format!("unknown generator {id:?}")))
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn gens(&self) -> &[BigradedGen] {
        &self.gens
    }

    pub fn gen(&self, i: usize) -> &BigradedGen {
        &self.gens[i]
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn differential(&self, i: usize) -> &Chain {
        &self.diff[i]
    }

    /// All terms as `(source, target, monomial)`, sorted.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, Monomial)> + '_ {
        self.diff.iter().enumerate().flat_map(|(x, c)| c.terms().map(move |(y, m)| (x, y, m)))
    }

    pub fn edge_count(&self) -> usize {
        self.diff.iter().map(Chain::len).sum()
    }

    /// Bigrading of `m * gen`.
    pub fn grading_of(&self, gen: usize, m: Monomial) -> (i64, i64) {
        let g = &self.gens[gen];
        (g.gr_u - 2 * m.u as i64, g.gr_v - 2 * m.v as i64)
    }

    /// Applies the differential to a formal sum.
    pub fn apply(&self, c: &Chain) -> Chain {
        let mut out = Chain::new();
        for (g, m) in c.terms() {
            out.add(&self.diff[g].times(m));
        }
        out
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (x, y, m) in self.terms() {
            let (gu, gv) = self.grading_of(y, m);
            let g = &self.gens[x];
            if gu != g.gr_u - 1 || gv != g.gr_v - 1 {
                out.push(Violation::GradingDrop {
                    source: g.id.clone(),
                    target: self.gens[y].id.clone(),
                    mono: m,
                });
            }
        }
        for (x, d) in self.diff.iter().enumerate() {
            for (y, m) in self.apply(d).terms() {
                out.push(Violation::SquareNonZero {
                    source: self.gens[x].id.clone(),
                    target: self.gens[y].id.clone(),
                    mono: m,
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Dual complex: negated gradings, arrows reversed with the same weights.
    pub fn dualize(&self) -> ComplexUV {
        let gens = self.gens.iter().map(|g| BigradedGen::new(dual_id(&g.id), -g.gr_u, -g.gr_v)).collect();
        let mut out = ComplexUV::new(gens).expect("dual ids stay distinct");
        for (x, y, m) in self.terms() {
            out.diff[y].toggle(x, m);
        }
        out
    }

    pub fn tensor(&self, other: &ComplexUV) -> ComplexUV {
        let n2 = other.len();
        let mut gens = Vec::with_capacity(self.len() * n2);
        for a in &self.gens {
            for b in &other.gens {
                gens.push(BigradedGen::new(format!("{}⊗{}", a.id, b.id), a.gr_u + b.gr_u, a.gr_v + b.gr_v));
            }
        }
        let mut out = ComplexUV::new(gens).expect("product ids stay distinct");
        for x in 0..self.len() {
            for y in 0..n2 {
                let mut d = Chain::new();
                for (x2, m) in self.diff[x].terms() {
                    d.toggle(x2 * n2 + y, m);
                }
                for (y2, m) in other.diff[y].terms() {
                    d.toggle(x * n2 + y2, m);
                }
                out.diff[x * n2 + y] = d;
            }
        }
        out
    }

    pub fn shift(&self, delta: (i64, i64)) -> ComplexUV {
        let mut out = self.clone();
        for g in &mut out.gens {
            g.gr_u += delta.0;
            g.gr_v += delta.1;
        }
        out
    }

    /// Renames generators through `f`; fails if two ids collide.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> Result<ComplexUV> {
        let gens = self.gens.iter().map(|g| BigradedGen::new(f(&g.id), g.gr_u, g.gr_v)).collect();
        let mut out = ComplexUV::new(gens)?;
        out.diff = self.diff.clone();
        Ok(out)
    }

    /// Keeps the listed generators (in the given order) and every term
    /// between them.
    pub fn restrict(&self, keep: &[usize]) -> ComplexUV {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let gens = keep.iter().map(|&i| self.gens[i].clone()).collect();
        let mut out = ComplexUV::new(gens).expect("subset of distinct ids");
        for (k, &i) in keep.iter().enumerate() {
            out.diff[k] = Chain::from_terms(self.diff[i].terms().filter_map(|(y, m)| pos.get(&y).map(|&p| (p, m))));
        }
        out
    }

    pub fn quotient(&self, q: &QuotientSpec) -> Result<QuotientComplex> {
        let (u, v) = q.rules()?;
        Ok(QuotientComplex { base: self.clone(), u, v })
    }

    /// An isomorphism `self -> other` preserving gradings and every term,
    /// as a map of generator indices.
    pub fn isomorphism_to(&self, other: &ComplexUV) -> Option<Vec<usize>> {
        iso::find(self, other)
    }
}

/// `x` becomes `x*` and `x*` becomes `x`.
pub fn dual_id(id: &str) -> String {
    match id.strip_suffix('*') {
        Some(base) => base.to_string(),
        None => format!("{id}*"),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuotientSpec {
    pub set_u_to_one: bool,
    pub set_u_to_zero: bool,
    pub u_power_zero: Option<u32>,
    pub set_v_to_one: bool,
    pub set_v_to_zero: bool,
    pub v_power_zero: Option<u32>,
}

impl QuotientSpec {
    pub fn none() -> Self {
        QuotientSpec::default()
    }

    pub fn v_one() -> Self {
        QuotientSpec { set_v_to_one: true, ..Self::default() }
    }

    pub fn u_one() -> Self {
        QuotientSpec { set_u_to_one: true, ..Self::default() }
    }

    pub fn u_zero() -> Self {
        QuotientSpec { set_u_to_zero: true, ..Self::default() }
    }

    pub fn v_one_u_power(k: u32) -> Self {
        QuotientSpec { set_v_to_one: true, u_power_zero: Some(k), ..Self::default() }
    }

    pub fn rules(&self) -> Result<(VarRule, VarRule)> {
        Ok((
            rule("U", self.set_u_to_one, self.set_u_to_zero, self.u_power_zero)?,
            rule("V", self.set_v_to_one, self.set_v_to_zero, self.v_power_zero)?,
        ))
    }
}

fn rule(name: &str, one: bool, zero: bool, power: Option<u32>) -> Result<VarRule> {
    match (one, zero, power) {
        (false, false, None) => Ok(VarRule::Free),
        (true, false, None) => Ok(VarRule::One),
        (false, true, None) => Ok(VarRule::Nilpotent(1)),
        (false, false, Some(0)) => Err(Error::invalid(format!("{name}^0 = 0 collapses the ring"))),
        (false, false, Some(k)) => Ok(VarRule::Nilpotent(k)),
        _ => Err(Error::invalid(format!("contradictory constraints on {name}"))),
    }
}

/// What a quotient does to one variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRule {
    Free,
    One,
    /// `W^k = 0`; `k = 1` sets the variable to zero.
    Nilpotent(u32),
}

impl VarRule {
    /// Reduced exponent, or `None` if the monomial vanishes.
    fn reduce(self, e: u32) -> Option<u32> {
        match self {
            VarRule::Free => Some(e),
            VarRule::One => Some(0),
            VarRule::Nilpotent(k) => (e < k).then_some(e),
        }
    }

    fn keeps_grading(self) -> bool {
        self != VarRule::One
    }

    fn is_field_like(self) -> bool {
        matches!(self, VarRule::One | VarRule::Nilpotent(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    U,
    V,
}

/// A complex over `F2[U,V]` viewed over a quotient ring.
#[derive(Clone, Debug)]
pub struct QuotientComplex {
    base: ComplexUV,
    pub u: VarRule,
    pub v: VarRule,
}

/// One cyclic summand of a homology module. `order == None` means a free
/// summand (a copy of the coefficient ring).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Summand {
    pub gr_u: Option<i64>,
    pub gr_v: Option<i64>,
    pub order: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Homology {
    pub summands: Vec<Summand>,
}

impl Homology {
    pub fn free(&self) -> impl Iterator<Item = &Summand> {
        self.summands.iter().filter(|s| s.order.is_none())
    }

    pub fn torsion(&self) -> impl Iterator<Item = &Summand> {
        self.summands.iter().filter(|s| s.order.is_some())
    }

    pub fn free_rank(&self) -> usize {
        self.free().count()
    }
}

impl QuotientComplex {
    pub fn base(&self) -> &ComplexUV {
        &self.base
    }

    pub fn reduce_mono(&self, m: Monomial) -> Option<Monomial> {
        Some(Monomial::new(self.u.reduce(m.u)?, self.v.reduce(m.v)?))
    }

    pub fn reduce_chain(&self, c: &Chain) -> Chain {
        Chain::from_terms(c.terms().filter_map(|(g, m)| self.reduce_mono(m).map(|m| (g, m))))
    }

    pub fn apply(&self, c: &Chain) -> Chain {
        self.reduce_chain(&self.base.apply(c))
    }

    /// Retained gradings of `m * gen`.
    pub fn grading_of(&self, gen: usize, m: Monomial) -> (Option<i64>, Option<i64>) {
        let (gu, gv) = self.base.grading_of(gen, m);
        (self.u.keeps_grading().then_some(gu), self.v.keeps_grading().then_some(gv))
    }

    pub fn homology(&self) -> Result<Homology> {
        let active = match (self.u.is_field_like(), self.v.is_field_like()) {
            (false, false) => {
                return Err(Error::invalid(
                    "homology is only computed over F2, F2[W] or F2[W]/(W^k)",
                ))
            }
            (false, true) => Some(Var::U),
            (true, false) => Some(Var::V),
            (true, true) => None,
        };
        let nil = match active {
            Some(Var::U) => nilpotency(self.u),
            Some(Var::V) => nilpotency(self.v),
            None => None,
        };
        let mut entries = Vec::new();
        for (x, y, m) in self.base.terms() {
            // The active variable is lifted to F2[W] and truncated only after
            // splitting; the other one is applied right away.
            let entry = match active {
                Some(Var::U) => self.v.reduce(m.v).map(|_| m.u),
                Some(Var::V) => self.u.reduce(m.u).map(|_| m.v),
                None => self.reduce_mono(m).map(|_| 0),
            };
            if let Some(e) = entry {
                entries.push((x, y, e));
            }
        }
        let pairing = snf::pair_off(self.base.len(), entries)?;
        let grade = |g: usize, shift: u32| -> Summand {
            let m = match active {
                Some(Var::U) => Monomial::new(shift, 0),
                Some(Var::V) => Monomial::new(0, shift),
                None => Monomial::ONE,
            };
            let (gr_u, gr_v) = self.grading_of(g, m);
            Summand { gr_u, gr_v, order: None }
        };
        let mut summands = Vec::new();
        for &g in &pairing.unpaired {
            summands.push(grade(g, 0));
        }
        for &(x, y, e) in &pairing.pairs {
            if e == 0 || active.is_none() {
                continue;
            }
            match nil {
                None => summands.push(Summand { order: Some(e), ..grade(y, 0) }),
                Some(k) if e >= k => {
                    summands.push(grade(x, 0));
                    summands.push(grade(y, 0));
                }
                Some(k) => {
                    summands.push(Summand { order: Some(e), ..grade(y, 0) });
                    summands.push(Summand { order: Some(e), ..grade(x, k - e) });
                }
            }
        }
        summands.sort_by(|a, b| (b.gr_u, b.gr_v, a.order).cmp(&(a.gr_u, a.gr_v, b.order)));
        Ok(Homology { summands })
    }

    /// Whether a cycle of the quotient is a boundary there.
    pub fn is_boundary(&self, cycle: &Chain) -> Result<bool> {
        let cycle = self.reduce_chain(cycle);
        if !self.apply(&cycle).is_zero() {
            return Err(Error::invalid("element is not a cycle in the quotient"));
        }
        let mut parts: BTreeMap<(Option<i64>, Option<i64>), Chain> = BTreeMap::new();
        for (g, m) in cycle.terms() {
            parts.entry(self.grading_of(g, m)).or_default().toggle(g, m);
        }
        for (grading, part) in parts {
            if !self.homogeneous_is_boundary(grading, &part) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn homogeneous_is_boundary(&self, grading: (Option<i64>, Option<i64>), part: &Chain) -> bool {
        let want = (grading.0.map(|g| g + 1), grading.1.map(|g| g + 1));
        let mut coords: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
        let mut cols = Vec::new();
        let mut images = Vec::new();
        for z in 0..self.base.len() {
            let g = self.base.gen(z);
            let Some(eu) = exponent_for(self.u, g.gr_u, want.0) else { continue };
            let Some(ev) = exponent_for(self.v, g.gr_v, want.1) else { continue };
            let image = self.apply(&Chain::from_terms([(z, Monomial::new(eu, ev))]));
            for t in image.terms() {
                let k = coords.len();
                coords.entry(t).or_insert(k);
            }
            images.push(image);
        }
        for t in part.terms() {
            let k = coords.len();
            coords.entry(t).or_insert(k);
        }
        for image in &images {
            cols.push(BitVec::from_ones(coords.len(), image.terms().map(|t| coords[&t])));
        }
        let target = BitVec::from_ones(coords.len(), part.terms().map(|t| coords[&t]));
        gf2::solve(&cols, &target).is_some()
    }
}

fn nilpotency(r: VarRule) -> Option<u32> {
    match r {
        VarRule::Nilpotent(k) => Some(k),
        _ => None,
    }
}

/// Exponent `e` with `gr - 2e == want`, subject to the variable's rule.
fn exponent_for(rule: VarRule, gr: i64, want: Option<i64>) -> Option<u32> {
    match (rule, want) {
        (VarRule::One, _) => Some(0),
        (_, None) => None,
        (r, Some(w)) => {
            let d = gr - w;
            if d < 0 || d % 2 != 0 {
                return None;
            }
            r.reduce((d / 2) as u32)
        }
    }
}

/// Homology of the V=1 quotient is a single free F2[U].
pub fn is_s3_knotlike(c: &ComplexUV) -> Result<bool> {
    let h = c.quotient(&QuotientSpec::v_one())?.homology()?;
    Ok(h.summands.len() == 1 && h.free_rank() == 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMapReport {
    pub is_chain_map: bool,
    /// Common bigrading shift of all terms; `None` for the zero map or a
    /// map that is not homogeneous.
    pub bigrading: Option<(i64, i64)>,
    pub homogeneous: bool,
    pub is_local: bool,
}

/// Checks a map `src -> dst` given as one formal sum (over `dst`) per
/// generator of `src`.
pub fn verify_local_map(f: &[Chain], src: &ComplexUV, dst: &ComplexUV) -> Result<LocalMapReport> {
    if f.len() != src.len() {
        return Err(Error::invalid(format!("map has {} images for {} generators", f.len(), src.len())));
    }
    let image = |c: &Chain| {
        let mut out = Chain::new();
        for (g, m) in c.terms() {
            out.add(&f[g].times(m));
        }
        out
    };
    let is_chain_map = (0..src.len()).all(|x| dst.apply(&f[x]) == image(src.differential(x)));
    let mut shifts = BTreeSet::new();
    for (x, fx) in f.iter().enumerate() {
        let g = src.gen(x);
        for (y, m) in fx.terms() {
            let (gu, gv) = dst.grading_of(y, m);
            shifts.insert((gu - g.gr_u, gv - g.gr_v));
        }
    }
    let homogeneous = shifts.len() <= 1;
    let bigrading = if shifts.len() == 1 { shifts.first().copied() } else { None };
    let is_local = is_chain_map && localized_iso(f, src, dst);
    Ok(LocalMapReport { is_chain_map, bigrading, homogeneous, is_local })
}

/// Differential of the complex with U = V = 1, as columns over F2.
pub(crate) fn specialized_columns(c: &ComplexUV) -> Vec<BitVec> {
    (0..c.len())
        .map(|x| {
            let mut v = BitVec::zeros(c.len());
            for (y, _) in c.differential(x).terms() {
                v.flip(y);
            }
            v
        })
        .collect()
}

/// Representatives of a homology basis of an F2 complex given by columns.
pub(crate) fn homology_reps(cols: &[BitVec]) -> (Echelon, Vec<BitVec>) {
    let mut bounds = Echelon::new();
    for c in cols {
        bounds.insert(c);
    }
    let mut span = bounds.clone();
    let mut reps = Vec::new();
    for z in gf2::kernel(cols) {
        if span.insert(&z).is_none() {
            reps.push(z);
        }
    }
    (bounds, reps)
}

fn localized_iso(f: &[Chain], src: &ComplexUV, dst: &ComplexUV) -> bool {
    let (_, reps) = homology_reps(&specialized_columns(src));
    let (bounds, dst_reps) = homology_reps(&specialized_columns(dst));
    if reps.len() != dst_reps.len() {
        return false;
    }
    let mut span = bounds;
    reps.iter().all(|z| {
        let mut w = BitVec::zeros(dst.len());
        for x in z.ones() {
            for (y, _) in f[x].terms() {
                w.flip(y);
            }
        }
        span.insert(&w).is_none()
    })
}

/// Rank of homology after inverting both variables.
pub fn localized_rank(c: &ComplexUV) -> usize {
    let cols = specialized_columns(c);
    c.len() - 2 * gf2::rank(&cols)
}

mod iso {
    use super::*;

    pub(super) fn find(a: &ComplexUV, b: &ComplexUV) -> Option<Vec<usize>> {
        if a.len() != b.len() || a.edge_count() != b.edge_count() {
            return None;
        }
        let key = |c: &ComplexUV, i: usize| {
            let g = c.gen(i);
            let out: Vec<Monomial> = {
                let mut v: Vec<_> = c.differential(i).terms().map(|t| t.1).collect();
                v.sort();
                v
            };
            let mut inc: Vec<Monomial> = c.terms().filter(|t| t.1 == i).map(|t| t.2).collect();
            inc.sort();
            (g.gr_u, g.gr_v, out, inc)
        };
        let ka: Vec<_> = (0..a.len()).map(|i| key(a, i)).collect();
        let kb: Vec<_> = (0..b.len()).map(|i| key(b, i)).collect();
        let mut ma = ka.clone();
        let mut mb = kb.clone();
        ma.sort();
        mb.sort();
        if ma != mb {
            return None;
        }
        let mut map = vec![usize::MAX; a.len()];
        let mut used = vec![false; b.len()];
        if extend(a, b, &ka, &kb, 0, &mut map, &mut used) {
            Some(map)
        } else {
            None
        }
    }

    fn consistent(a: &ComplexUV, b: &ComplexUV, map: &[usize], i: usize) -> bool {
        let j = map[i];
        for (y, m) in a.differential(i).terms() {
            if map[y] != usize::MAX && !b.differential(j).contains(map[y], m) {
                return false;
            }
        }
        for x in 0..a.len() {
            if map[x] == usize::MAX {
                continue;
            }
            for m in a.differential(x).coefficient_of(i) {
                if !b.differential(map[x]).contains(j, m) {
                    return false;
                }
            }
        }
        true
    }

    fn extend(
        a: &ComplexUV,
        b: &ComplexUV,
        ka: &[(i64, i64, Vec<Monomial>, Vec<Monomial>)],
        kb: &[(i64, i64, Vec<Monomial>, Vec<Monomial>)],
        i: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == a.len() {
            return true;
        }
        for j in 0..b.len() {
            if used[j] || ka[i] != kb[j] {
                continue;
            }
            map[i] = j;
            used[j] = true;
            if consistent(a, b, map, i) && extend(a, b, ka, kb, i + 1, map, used) {
                return true;
            }
            used[j] = false;
            map[i] = usize::MAX;
        }
        false
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// x1 -> U x0 + V x2, the trefoil.
    pub(crate) fn trefoil() -> ComplexUV {
        ComplexUV::from_parts(
            vec![BigradedGen::new("x0", 0, -2), BigradedGen::new("x1", -1, -1), BigradedGen::new("x2", -2, 0)],
            [
                ("x1".into(), "x0".into(), Monomial::new(1, 0)),
                ("x1".into(), "x2".into(), Monomial::new(0, 1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn unit_and_trefoil_validate() {
        assert!(ComplexUV::unit().is_valid());
        assert!(trefoil().is_valid());
    }

    #[test]
    fn corrupted_exponent_is_one_violation() {
        let mut c = trefoil();
        c.set_differential(1, Chain::from_terms([(0, Monomial::new(2, 0)), (2, Monomial::new(0, 1))]));
        let v = c.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::GradingDrop { .. }));
    }

    #[test]
    fn duplicate_entries_rejected() {
        let mut c = trefoil();
        assert!(c.add_term("x1", "x0", Monomial::new(1, 0)).is_err());
        assert!(ComplexUV::new(vec![BigradedGen::new("a", 0, 0), BigradedGen::new("a", 0, 0)]).is_err());
    }

    #[test]
    fn dual_is_involution() {
        let t = trefoil();
        let d = t.dualize();
        assert!(d.is_valid());
        assert_eq!(d.gen(0).gr_u, 0);
        assert_eq!(d.gen(0).gr_v, 2);
        assert_eq!(d.dualize(), t);
        let single = ComplexUV::new(vec![BigradedGen::new("g", 3, -1)]).unwrap().dualize();
        assert_eq!(single.gen(0), &BigradedGen::new("g*", -3, 1));
    }

    #[test]
    fn tensor_with_unit_and_square() {
        let t = trefoil();
        let tu = t.tensor(&ComplexUV::unit());
        assert!(tu.isomorphism_to(&t).is_some());
        let tt = t.tensor(&t);
        assert_eq!(tt.len(), 9);
        assert!(tt.is_valid());
    }

    #[test]
    fn shift_round_trip() {
        let t = trefoil();
        assert_eq!(t.shift((0, 0)), t);
        assert_eq!(t.shift((2, 2)).shift((-2, -2)), t);
        let shifted_unit = ComplexUV::unit().shift((4, 4));
        let tu = t.tensor(&shifted_unit);
        assert_eq!(tu.gen(0).gr_u, 4);
    }

    #[test]
    fn contradictory_quotients_rejected() {
        let q = QuotientSpec { set_u_to_one: true, set_u_to_zero: true, ..QuotientSpec::none() };
        assert!(trefoil().quotient(&q).is_err());
        let q = QuotientSpec { set_v_to_zero: true, v_power_zero: Some(3), ..QuotientSpec::none() };
        assert!(trefoil().quotient(&q).is_err());
    }

    #[test]
    fn trefoil_homologies() {
        let t = trefoil();
        let h = t.quotient(&QuotientSpec::v_one()).unwrap().homology().unwrap();
        assert_eq!(h.summands, vec![Summand { gr_u: Some(0), gr_v: None, order: None }]);
        let h = t.quotient(&QuotientSpec::u_zero()).unwrap().homology().unwrap();
        assert_eq!(h.free_rank(), 1);
        assert_eq!(h.torsion().map(|s| s.order).collect::<Vec<_>>(), vec![Some(1)]);
        assert_eq!(h.free().next().unwrap().gr_v, Some(-2));
        assert!(is_s3_knotlike(&t).unwrap());
    }

    #[test]
    fn unit_quotients() {
        let q = QuotientSpec { set_u_to_zero: true, set_v_to_zero: true, ..QuotientSpec::none() };
        let h = ComplexUV::unit().quotient(&q).unwrap().homology().unwrap();
        assert_eq!(h.free_rank(), 1);
        assert!(is_s3_knotlike(&ComplexUV::unit()).unwrap());
        let two = ComplexUV::new(vec![BigradedGen::new("a", 0, 0), BigradedGen::new("b", 0, 0)]).unwrap();
        assert!(!is_s3_knotlike(&two).unwrap());
        let h = two.quotient(&QuotientSpec::v_one()).unwrap().homology().unwrap();
        assert_eq!(h.free_rank(), 2);
    }

    #[test]
    fn two_variable_homology_rejected() {
        assert!(trefoil().quotient(&QuotientSpec::none()).unwrap().homology().is_err());
    }

    #[test]
    fn boundaries_in_trefoil() {
        let t = trefoil();
        let q = t.quotient(&QuotientSpec::none()).unwrap();
        assert!(q.is_boundary(&Chain::new()).unwrap());
        let d = Chain::from_terms([(0, Monomial::new(1, 0)), (2, Monomial::new(0, 1))]);
        assert!(q.is_boundary(&d).unwrap());
        assert!(!q.is_boundary(&Chain::from_terms([(0, Monomial::ONE)])).unwrap());
        assert!(q.is_boundary(&Chain::from_terms([(1, Monomial::ONE)])).is_err());
        // with V = 1, x2 is homologous to U x0, so U x0 + x2 is a boundary
        let q1 = t.quotient(&QuotientSpec::v_one()).unwrap();
        assert!(q1.is_boundary(&Chain::from_terms([(0, Monomial::new(1, 0)), (2, Monomial::ONE)])).unwrap());
    }

    #[test]
    fn local_maps() {
        let t = trefoil();
        let id: Vec<Chain> = (0..3).map(|i| Chain::from_terms([(i, Monomial::ONE)])).collect();
        let r = verify_local_map(&id, &t, &t).unwrap();
        assert!(r.is_chain_map && r.is_local);
        assert_eq!(r.bigrading, Some((0, 0)));
        let zero = vec![Chain::new(); 3];
        let r = verify_local_map(&zero, &t, &t).unwrap();
        assert!(r.is_chain_map && !r.is_local);
        // unit -> trefoil sending x to x0 is local of bigrading (0,-2)
        let f = vec![Chain::from_terms([(0, Monomial::ONE)])];
        let r = verify_local_map(&f, &ComplexUV::unit(), &t).unwrap();
        assert!(r.is_chain_map && r.is_local);
        assert_eq!(r.bigrading, Some((0, -2)));
    }

    #[test]
    fn localized_rank_of_trefoil() {
        assert_eq!(localized_rank(&trefoil()), 1);
    }
}
