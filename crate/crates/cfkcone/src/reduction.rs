//! Filtered cancellation, truncation of the cone to a window of towers, and
//! translation of the result into a complex over `F2[U,V]`.
//!
//! All work happens on a mutable copy of the complex and is recorded as a
//! list of [`Step`]s; [`replay`] runs such a list again from the start.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::algebra::{BigradedGen, Chain, ComplexUV, Monomial};
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::filtered::{FilteredComplex, FilteredGen, FilteredMap, Part};
use crate::gf2::{self, BitVec};
use crate::staircase::InftyComplex;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Addend {
    pub id: String,
    pub power: i64,
}

/// One step of a reduction.
///
/// * `ChangeBasis` replaces `target` by `target + Σ U^power id`, which adds
///   the differentials of the addends to that of `target`. Every addend is
///   quotiented away by a later step.
/// * `Cancel` quotients by the acyclic pair `{source, ∂source}`; `target`
///   must by then be hit by `source` alone.
/// * `Discard` removes a direct summand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "camelCase")]
pub enum Step {
    Cancel { source: String, target: String, power: i64 },
    ChangeBasis { target: String, add: Vec<Addend> },
    Discard { ids: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedComplex {
    pub p: i64,
    pub genus: i64,
    /// Staircase parameter when the knot is the mirror of `T(2n, 2n+1)`.
    pub n: Option<i64>,
    /// Largest tower index kept; the window is `[p - level, level]`.
    pub level: i64,
    pub complex: FilteredComplex,
    pub log: Vec<Step>,
}

impl ReducedComplex {
    /// Generators that received no label.
    pub fn unlabeled(&self) -> Vec<&str> {
        self.complex.gens().iter().filter(|g| g.label.is_none()).map(|g| g.id.as_str()).collect()
    }

    pub fn find(&self, name: &str) -> Result<usize> {
        self.complex.find(name).ok_or_else(|| Error::invalid(format!("no generator named {name:?}")))
    }
}

/// Mutable sparse copy of a filtered complex.
struct Work {
    gens: Vec<FilteredGen>,
    index: BTreeMap<String, usize>,
    alive: Vec<bool>,
    fwd: Vec<BTreeMap<usize, i64>>,
    rev: Vec<BTreeSet<usize>>,
    log: Vec<Step>,
}

impl Work {
    fn new(c: &FilteredComplex) -> Self {
        let n = c.len();
        let mut rev = vec![BTreeSet::new(); n];
        let mut fwd = vec![BTreeMap::new(); n];
        for (x, y, k) in c.terms() {
            fwd[x].insert(y, k);
            rev[y].insert(x);
        }
        Work {
            gens: c.gens().to_vec(),
            index: c.gens().iter().enumerate().map(|(k, g)| (g.id.clone(), k)).collect(),
            alive: vec![true; n],
            fwd,
            rev,
            log: Vec::new(),
        }
    }

    fn id(&self, x: usize) -> &str {
        &self.gens[x].id
    }

    fn lookup(&self, id: &str) -> Result<usize> {
        match self.index.get(id) {
            Some(&x) if self.alive[x] => Ok(x),
            Some(_) => Err(Error::invalid(format!("generator {id} was already removed"))),
            None => Err(Error::invalid(format!("unknown generator {id}"))),
        }
    }

    fn drop_of(&self, x: usize, y: usize, k: i64) -> (i64, i64) {
        let (a, b) = (&self.gens[x], &self.gens[y]);
        (a.filt_i - (b.filt_i - k), a.filt_j - (b.filt_j - k))
    }

    fn is_flat(&self, x: usize, y: usize) -> bool {
        self.fwd[x].get(&y).is_some_and(|&k| self.drop_of(x, y, k) == (0, 0))
    }

    fn toggle(&mut self, z: usize, w: usize, k: i64) -> Result<()> {
        match self.fwd[z].get(&w) {
            Some(&old) if old == k => {
                self.fwd[z].remove(&w);
                self.rev[w].remove(&z);
            }
            Some(&old) => {
                return Err(Error::invariant(format!(
                    "{} -> {} would carry U-powers {old} and {k}",
                    self.id(z),
                    self.id(w)
                )))
            }
            None => {
                self.fwd[z].insert(w, k);
                self.rev[w].insert(z);
            }
        }
        Ok(())
    }

    /// `z ↦ z + Σ U^m x`, checked to be filtered and homogeneous.
    fn change_basis(&mut self, z: usize, adds: &[(usize, i64)]) -> Result<()> {
        for &(x, m) in adds {
            let (a, b) = (&self.gens[z], &self.gens[x]);
            if b.maslov - 2 * m != a.maslov {
                return Err(Error::invariant(format!("U^{m} {} is not homogeneous with {}", b.id, a.id)));
            }
            if b.filt_i - m > a.filt_i || b.filt_j - m > a.filt_j {
                return Err(Error::invariant(format!(
                    "change of basis {} += U^{m} {} is not filtered",
                    a.id, b.id
                )));
            }
            let targets: Vec<(usize, i64)> = self.fwd[x].iter().map(|(&w, &k)| (w, k + m)).collect();
            for (w, k) in targets {
                self.toggle(z, w, k)?;
            }
        }
        let add = adds.iter().map(|&(x, m)| Addend { id: self.id(x).to_string(), power: m }).collect();
        self.log.push(Step::ChangeBasis { target: self.id(z).to_string(), add });
        Ok(())
    }

    fn remove(&mut self, x: usize) {
        for w in std::mem::take(&mut self.fwd[x]).into_keys() {
            self.rev[w].remove(&x);
        }
        for z in std::mem::take(&mut self.rev[x]) {
            self.fwd[z].remove(&x);
        }
        self.alive[x] = false;
    }

    fn cancel(&mut self, x: usize, y: usize) -> Result<()> {
        if !self.is_flat(x, y) {
            return Err(Error::invalid(format!(
                "{} -> {} is not a filtration-preserving term",
                self.id(x),
                self.id(y)
            )));
        }
        if self.rev[y].len() != 1 {
            return Err(Error::invalid(format!("{} is hit by more than {}", self.id(y), self.id(x))));
        }
        let power = self.fwd[x][&y];
        self.log.push(Step::Cancel { source: self.id(x).to_string(), target: self.id(y).to_string(), power });
        self.remove(x);
        self.remove(y);
        Ok(())
    }

    /// Clears every other arrow into `y` and cancels `x -> y`.
    fn eliminate(&mut self, x: usize, y: usize) -> Result<()> {
        let c = self.fwd[x][&y];
        let others: Vec<usize> = self.rev[y].iter().copied().filter(|&z| z != x).collect();
        for z in others {
            let m = self.fwd[z][&y] - c;
            self.change_basis(z, &[(x, m)])?;
        }
        self.cancel(x, y)
    }

    fn discard(&mut self, set: &BTreeSet<usize>) -> Result<()> {
        for &x in set {
            if let Some(w) = self.fwd[x].keys().find(|w| !set.contains(w)) {
                return Err(Error::invalid(format!("{} maps out of the summand to {}", self.id(x), self.id(*w))));
            }
            if let Some(z) = self.rev[x].iter().find(|z| !set.contains(z)) {
                return Err(Error::invalid(format!("{} is hit from outside the summand by {}", self.id(x), self.id(*z))));
            }
        }
        self.log.push(Step::Discard { ids: set.iter().map(|&x| self.id(x).to_string()).collect() });
        for &x in set {
            self.remove(x);
        }
        Ok(())
    }

    fn apply(&mut self, step: &Step) -> Result<()> {
        match step {
            Step::Cancel { source, target, power } => {
                let (x, y) = (self.lookup(source)?, self.lookup(target)?);
                if self.fwd[x].get(&y) != Some(power) {
                    return Err(Error::invalid(format!("{source} -> U^{power} {target} is not a term")));
                }
                self.cancel(x, y)
            }
            Step::ChangeBasis { target, add } => {
                let z = self.lookup(target)?;
                let adds = add.iter().map(|a| Ok((self.lookup(&a.id)?, a.power))).collect::<Result<Vec<_>>>()?;
                self.change_basis(z, &adds)
            }
            Step::Discard { ids } => {
                let set = ids.iter().map(|id| self.lookup(id)).collect::<Result<BTreeSet<_>>>()?;
                self.discard(&set)
            }
        }
    }

    fn alive_sorted(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.gens.len()).filter(|&x| self.alive[x]).collect();
        v.sort_by_key(|&x| self.gens[x].order_key());
        v
    }

    fn finish(self) -> (FilteredComplex, Vec<Step>) {
        let keep: Vec<usize> = (0..self.gens.len()).filter(|&x| self.alive[x]).collect();
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &x)| (x, k)).collect();
        let mut c = FilteredComplex::new(keep.iter().map(|&x| self.gens[x].clone()).collect())
            .expect("ids stay distinct");
        for (k, &x) in keep.iter().enumerate() {
            c.diff_mut()[k] = self.fwd[x].iter().map(|(w, &e)| (pos[w], e)).collect();
        }
        (c, self.log)
    }
}

/// Which flat terms a reduction pass may cancel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    WithinB,
    WithinA,
    AToNextB,
    AToSameB,
    Any,
}

impl Class {
    fn allows(self, x: &FilteredGen, y: &FilteredGen) -> bool {
        match self {
            Class::WithinB => x.part == Part::B && y.part == Part::B && x.s == y.s,
            Class::WithinA => x.part == Part::A && y.part == Part::A && x.s == y.s,
            Class::AToNextB => x.part == Part::A && y.part == Part::B && y.s == x.s + 1,
            Class::AToSameB => x.part == Part::A && y.part == Part::B && y.s == x.s,
            Class::Any => true,
        }
    }
}

/// Cancels every filtration-preserving term. Passes run in a fixed order of
/// term classes (inside `B` towers, inside `A` towers, `A_s -> B_{s+1}`,
/// `A_s -> B_s`, then anything); within a pass, sources are visited in
/// [`FilteredGen::order_key`] order and the target with the smallest key is
/// taken.
pub fn reduce_filtered(cone: &Cone) -> Result<ReducedComplex> {
    let mut w = Work::new(&cone.complex);
    for class in [Class::WithinB, Class::WithinA, Class::AToNextB, Class::AToSameB, Class::Any] {
        loop {
            let mut changed = false;
            for x in w.alive_sorted() {
                if !w.alive[x] {
                    continue;
                }
                let target = w.fwd[x]
                    .keys()
                    .copied()
                    .filter(|&y| w.is_flat(x, y) && class.allows(&w.gens[x], &w.gens[y]))
                    .min_by_key(|&y| w.gens[y].order_key());
                if let Some(y) = target {
                    w.eliminate(x, y)?;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    finish_reduced(cone, w)
}

fn finish_reduced(cone: &Cone, w: Work) -> Result<ReducedComplex> {
    let (mut complex, log) = w.finish();
    let n = staircase_n(&cone.knot);
    if let Some(n) = n {
        label_generators(&mut complex, n);
    }
    Ok(ReducedComplex { p: cone.p, genus: cone.genus, n, level: cone.a_range.1, complex, log })
}

/// Cancels the given pairs in order. A missing target means "the flat term
/// of smallest key inside the source's own tower".
pub fn quotient_chain(cone: &Cone, pairs: &[(String, Option<String>)]) -> Result<ReducedComplex> {
    let mut w = Work::new(&cone.complex);
    for (source, target) in pairs {
        let x = w.lookup(source)?;
        let y = match target {
            Some(t) => w.lookup(t)?,
            None => {
                let g = &w.gens[x];
                w.fwd[x]
                    .keys()
                    .copied()
                    .filter(|&y| w.is_flat(x, y) && w.gens[y].part == g.part && w.gens[y].s == g.s)
                    .min_by_key(|&y| w.gens[y].order_key())
                    .ok_or_else(|| Error::invalid(format!("{source} has no filtration-preserving term in its tower")))?
            }
        };
        w.eliminate(x, y)?;
    }
    finish_reduced(cone, w)
}

/// The cancellation order that reduces the cone of the mirror staircase
/// (`n ≥ 3`, `p = 2n - 1`) tower by tower: `B` towers down to one
/// generator, `A` towers down to three or five, then the `h` and `v` pairs.
pub fn staircase_script(n: i64) -> Result<Vec<(String, Option<String>)>> {
    if n < 3 {
        return Err(Error::invalid("the scripted order needs n >= 3"));
    }
    let g = n * (2 * n - 1);
    let p = 2 * n - 1;
    let id = |part, s, base: String| FilteredGen::cone_id(part, s, &base);
    let mut out = Vec::new();
    for s in -g + 2..=g + p - 1 {
        for i in 2..=2 * n {
            out.push((id(Part::B, s, format!("a{i}")), Some(id(Part::B, s, format!("b{}", i - 1)))));
        }
    }
    for s in -g + 1..=g + p - 1 {
        let kept = (1..=2 * n - 2)
            .find(|&j| -g + 2 * j * n + 1 <= s && s <= -g + 2 * (j + 1) * n - 2)
            .map(|j| j + 1);
        for i in 2..2 * n {
            if Some(i) != kept {
                out.push((id(Part::A, s, format!("a{i}")), None));
            }
        }
    }
    for s in -g + 1..=g {
        out.push((id(Part::A, s, format!("a{}", 2 * n)), Some(id(Part::B, s + 1, "a1".into()))));
    }
    for s in g + 2..=g + p - 1 {
        out.push((id(Part::A, s, "a1".into()), Some(id(Part::B, s, "a1".into()))));
    }
    Ok(out)
}

/// Replays a log on the complex it was recorded against.
pub fn replay(original: &FilteredComplex, log: &[Step]) -> Result<FilteredComplex> {
    let mut w = Work::new(original);
    for step in log {
        w.apply(step)?;
    }
    let (mut c, _) = w.finish();
    for k in 0..c.len() {
        c.set_label(k, None);
    }
    Ok(c)
}

/// `n` when the knot is exactly the mirror staircase of `T(2n, 2n+1)`.
pub fn staircase_n(knot: &InftyComplex) -> Option<i64> {
    let len = knot.len() as i64;
    if (len + 1) % 4 != 0 {
        return None;
    }
    let n = (len + 1) / 4;
    let expected = crate::staircase::mirror_staircase(n).ok()?;
    (expected == *knot).then_some(n)
}

/// Names survivors after the base generator: `a1` in `A_s` is `α{s}`,
/// `a_k` (`1 < k < 2n`) is `α~{s}`, and `b_k` is `b{k}({s})`. Anything else
/// stays unlabeled.
pub fn label_generators(c: &mut FilteredComplex, n: i64) {
    for x in 0..c.len() {
        let g = c.gen(x);
        let label = match (g.part, g.base.split_at(1)) {
            (Part::A, ("a", k)) => match k.parse::<i64>() {
                Ok(1) => Some(format!("α{}", g.s)),
                Ok(k) if k < 2 * n => Some(format!("α~{}", g.s)),
                _ => None,
            },
            (Part::A, ("b", k)) => k.parse::<i64>().ok().map(|k| format!("b{k}({})", g.s)),
            _ => None,
        };
        c.set_label(x, label);
    }
}

/// One tower split off during truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitRecord {
    /// `"low"` or `"high"`.
    pub side: &'static str,
    pub tower: i64,
    pub removed: Vec<String>,
    /// Basis changes made to detach the summand: target, then addends with
    /// U-powers normalized as if every generator sat at `I = 0`.
    pub changes: Vec<(String, Vec<(String, i64)>)>,
    /// Whether the changes agree with the closed-form recipe, when one
    /// applies (low side of a staircase cone with `n >= 3`).
    pub recipe_ok: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct Truncation {
    pub result: ReducedComplex,
    /// The acyclic summand that was split off.
    pub removed: FilteredComplex,
    /// From `result` into the input, in the input's basis.
    pub inclusion: FilteredMap,
    /// From the input onto `result`.
    pub projection: FilteredMap,
    pub splits: Vec<SplitRecord>,
}

/// Tower a generator is charged to when splitting off the low end (`high =
/// true`: the largest tower it maps into) or the high end (the smallest).
fn charge(w: &Work, x: usize, high: bool) -> i64 {
    let towers = w.fwd[x].keys().map(|&y| w.gens[y].s);
    let t = if high { towers.max() } else { towers.min() };
    t.unwrap_or(w.gens[x].s)
}

/// Splits off towers until only `[p - to, to]` remains, one tower from each
/// end per level. Each split must be a filtered change of basis.
pub fn truncate(reduced: &ReducedComplex, to: i64) -> Result<Truncation> {
    let p = reduced.p;
    if to > reduced.level {
        return Err(Error::invalid(format!("cannot truncate level {} up to {to}", reduced.level)));
    }
    if let Some(n) = reduced.n {
        if to < 2 * n - 1 {
            return Err(Error::invalid(format!("truncation level must be at least {}", 2 * n - 1)));
        }
    }
    let mut w = Work::new(&reduced.complex);
    let original_len = w.gens.len();
    // expression of every current basis element in the input basis
    let mut expr: Vec<BTreeMap<usize, i64>> = (0..original_len).map(|x| BTreeMap::from([(x, 0)])).collect();
    let mut removed_parts = Vec::new();
    let mut splits = Vec::new();
    for level in (to + 1..=reduced.level).rev() {
        for (side, tower) in [("low", p - level), ("high", level)] {
            let high = side == "low";
            let set: BTreeSet<usize> =
                (0..original_len).filter(|&x| w.alive[x] && charge(&w, x, high) == tower).collect();
            if set.is_empty() {
                continue;
            }
            let changes = split_summand(&mut w, &set, &mut expr)?;
            let normalized: Vec<(String, Vec<(String, i64)>)> = changes
                .iter()
                .map(|(z, adds)| {
                    let gz = &w.gens[*z];
                    let adds = adds
                        .iter()
                        .map(|&(x, m)| (w.gens[x].name().to_string(), m + gz.filt_i - w.gens[x].filt_i))
                        .collect();
                    (gz.name().to_string(), adds)
                })
                .collect();
            let recipe_ok = match (reduced.n, side) {
                (Some(n), "low") if n >= 3 => Some(matches_recipe(n, tower + 1, &normalized)),
                _ => None,
            };
            let ids: Vec<usize> = set.iter().copied().collect();
            removed_parts.push(restrict_work(&w, &ids));
            w.discard(&set)?;
            splits.push(SplitRecord {
                side,
                tower,
                removed: ids.iter().map(|&x| w.gens[x].name().to_string()).collect(),
                changes: normalized,
                recipe_ok,
            });
        }
    }
    let survivors: Vec<usize> = (0..original_len).filter(|&x| w.alive[x]).collect();
    let inclusion: FilteredMap = survivors.iter().map(|&z| expr[z].clone()).collect();
    let projection = project(&reduced.complex, &expr, &survivors)?;
    let mut log = reduced.log.clone();
    let (complex, steps) = w.finish();
    log.extend(steps);
    let removed = direct_sum(&removed_parts)?;
    Ok(Truncation {
        result: ReducedComplex { level: to, complex, log, ..reduced.clone() },
        removed,
        inclusion,
        projection,
        splits,
    })
}

/// One step: `X<level>` to `X<level-1>` plus an acyclic summand.
pub fn truncate_local(reduced: &ReducedComplex, level: i64) -> Result<Truncation> {
    if level != reduced.level {
        return Err(Error::invalid(format!("complex is at level {}, not {level}", reduced.level)));
    }
    if let Some(n) = reduced.n {
        let top = (n + 1) * (2 * n - 1) - 1;
        if level < 2 * n || level > top {
            return Err(Error::invalid(format!("level must lie in [{}, {top}]", 2 * n)));
        }
    }
    truncate(reduced, level - 1)
}

fn restrict_work(w: &Work, ids: &[usize]) -> FilteredComplex {
    let pos: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    let mut c = FilteredComplex::new(ids.iter().map(|&x| w.gens[x].clone()).collect()).expect("distinct ids");
    for (k, &x) in ids.iter().enumerate() {
        c.diff_mut()[k] = w.fwd[x].iter().filter_map(|(y, &e)| pos.get(y).map(|&p| (p, e))).collect();
    }
    c
}

fn direct_sum(parts: &[FilteredComplex]) -> Result<FilteredComplex> {
    let gens: Vec<FilteredGen> = parts.iter().flat_map(|c| c.gens().iter().cloned()).collect();
    let mut out = FilteredComplex::new(gens)?;
    let mut offset = 0;
    for c in parts {
        for (x, y, k) in c.terms() {
            out.diff_mut()[offset + x].insert(offset + y, k);
        }
        offset += c.len();
    }
    Ok(out)
}

/// Detaches a closed, acyclic set of generators: every outside generator
/// that maps into it is corrected by a combination of its sources.
fn split_summand(
    w: &mut Work,
    set: &BTreeSet<usize>,
    expr: &mut [BTreeMap<usize, i64>],
) -> Result<Vec<(usize, Vec<(usize, i64)>)>> {
    for &x in set {
        if let Some(&y) = w.fwd[x].keys().find(|y| !set.contains(y)) {
            return Err(Error::invariant(format!("tower piece is not closed: {} -> {}", w.id(x), w.id(y))));
        }
    }
    let sources: Vec<usize> = set.iter().copied().filter(|&x| !w.fwd[x].is_empty()).collect();
    let targets: Vec<usize> = set.iter().copied().filter(|&x| w.fwd[x].is_empty()).collect();
    let pos: BTreeMap<usize, usize> = targets.iter().enumerate().map(|(k, &y)| (y, k)).collect();
    let mut cols = Vec::with_capacity(sources.len());
    for &x in &sources {
        let mut v = BitVec::zeros(targets.len());
        for y in w.fwd[x].keys() {
            let k = *pos
                .get(y)
                .ok_or_else(|| Error::invariant(format!("{} maps onto the source {}", w.id(x), w.id(*y))))?;
            v.flip(k);
        }
        cols.push(v);
    }
    if sources.len() != targets.len() || gf2::rank(&cols) != sources.len() {
        return Err(Error::invariant(format!(
            "tower piece {:?} is not an invertible block",
            set.iter().map(|&x| w.id(x)).collect::<Vec<_>>()
        )));
    }
    let outside: Vec<usize> =
        (0..w.gens.len()).filter(|&z| w.alive[z] && !set.contains(&z) && w.fwd[z].keys().any(|y| set.contains(y))).collect();
    let mut changes = Vec::new();
    for z in outside {
        if let Some(&x) = w.fwd[z].keys().find(|&&y| set.contains(&y) && !pos.contains_key(&y)) {
            return Err(Error::invariant(format!("{} maps onto the source {}", w.id(z), w.id(x))));
        }
        let hit = BitVec::from_ones(targets.len(), w.fwd[z].keys().filter_map(|y| pos.get(y).copied()));
        let sol = gf2::solve(&cols, &hit).ok_or_else(|| Error::invariant(format!("cannot detach {}", w.id(z))))?;
        let adds: Vec<(usize, i64)> = sol
            .ones()
            .map(|k| {
                let x = sources[k];
                (x, (w.gens[x].maslov - w.gens[z].maslov) / 2)
            })
            .collect();
        w.change_basis(z, &adds)?;
        let mut e: BTreeSet<(usize, i64)> = expr[z].iter().map(|(&a, &b)| (a, b)).collect();
        for &(x, m) in &adds {
            for (&v, &k) in &expr[x] {
                if !e.remove(&(v, k + m)) {
                    e.insert((v, k + m));
                }
            }
        }
        expr[z] = e.into_iter().collect();
        changes.push((z, adds));
    }
    Ok(changes)
}

/// Coordinates of each input generator in the final basis, dropping the
/// discarded part.
fn project(input: &FilteredComplex, expr: &[BTreeMap<usize, i64>], survivors: &[usize]) -> Result<FilteredMap> {
    let n = input.len();
    let cols: Vec<BitVec> = (0..n).map(|z| BitVec::from_ones(n, expr[z].keys().copied())).collect();
    let pos: BTreeMap<usize, usize> = survivors.iter().enumerate().map(|(k, &z)| (z, k)).collect();
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let sol = gf2::solve(&cols, &BitVec::from_ones(n, [v]))
            .ok_or_else(|| Error::invariant("basis change is not invertible"))?;
        let image = sol
            .ones()
            .filter_map(|z| pos.get(&z).map(|&k| (k, (input.gen(z).maslov - input.gen(v).maslov) / 2)))
            .collect();
        out.push(image);
    }
    Ok(out)
}

/// Closed-form basis changes that split off the tower below `α_s`.
fn recipe(n: i64, s: i64) -> Option<BTreeSet<(String, i64)>> {
    let g = n * (2 * n - 1);
    let plain = BTreeSet::from([(format!("α{}", s - 1), -s + 1)]);
    if (-g + 2..=-g + 2 * n + 1).contains(&s) {
        return Some(plain);
    }
    for j in 1..n {
        if (-g + 2 * j * n + 2..=-g + 2 * (j + 1) * n - 1).contains(&s) && s <= 1 {
            let mut r = plain.clone();
            r.insert((format!("α~{}", s - 1), -s + 1 + j * (j + 1) / 2));
            return Some(r);
        }
        if j >= 2 && (s == -g + 2 * j * n || s == -g + 2 * j * n + 1) {
            return Some(plain);
        }
    }
    None
}

fn matches_recipe(n: i64, s: i64, changes: &[(String, Vec<(String, i64)>)]) -> bool {
    let Some(want) = recipe(n, s) else { return false };
    match changes {
        [(z, adds)] => *z == format!("α{s}") && adds.iter().cloned().collect::<BTreeSet<_>>() == want,
        _ => false,
    }
}

/// Translation into `F2[U,V]`: a generator gets `(gr_U, gr_V) = (M - 2I, M - 2J)`
/// and a term `U^c β` in `∂α` becomes `U^{ΔI} V^{ΔJ} β`.
pub fn translate_fuv(c: &FilteredComplex, shift: (i64, i64)) -> Result<ComplexUV> {
    let gens = c
        .gens()
        .iter()
        .map(|g| BigradedGen::new(g.name(), g.maslov - 2 * g.filt_i + shift.0, g.maslov - 2 * g.filt_j + shift.1))
        .collect();
    let mut out = ComplexUV::new(gens)?;
    for x in 0..c.len() {
        let mut chain = Chain::new();
        for (&y, &k) in c.differential(x) {
            let (di, dj) = c.drop_of(x, y, k);
            if di < 0 || dj < 0 {
                return Err(Error::invalid(format!("term {} -> {} raises a filtration", c.gen(x).id, c.gen(y).id)));
            }
            chain.toggle(y, Monomial::new(di as u32, dj as u32));
        }
        out.set_differential(x, chain);
    }
    Ok(out)
}

/// Translates a map between filtered complexes the same way.
pub fn translate_map(f: &FilteredMap, src: &FilteredComplex, dst: &FilteredComplex) -> Result<Vec<Chain>> {
    f.iter()
        .enumerate()
        .map(|(x, img)| {
            let mut chain = Chain::new();
            for (&y, &k) in img {
                let di = src.gen(x).filt_i - (dst.gen(y).filt_i - k);
                let dj = src.gen(x).filt_j - (dst.gen(y).filt_j - k);
                if di < 0 || dj < 0 {
                    return Err(Error::invariant(format!("map term {} -> {} is not filtered", src.gen(x).id, dst.gen(y).id)));
                }
                chain.toggle(y, Monomial::new(di as u32, dj as u32));
            }
            Ok(chain)
        })
        .collect()
}

/// Translates a reduced, truncated complex into `F2[U,V]` and, when it is a
/// single zigzag, splits off end segments that are locally trivial.
pub fn to_local_fuv(reduced: &FilteredComplex, shift: (i64, i64)) -> Result<ComplexUV> {
    if !reduced.is_reduced() {
        return Err(Error::invalid("complex still has filtration-preserving terms"));
    }
    let c = translate_fuv(reduced, shift)?;
    Ok(peel_tails(&c))
}

/// The generators of `c` in path order, when the underlying graph is one
/// path (or a single point).
pub fn zigzag_order(c: &ComplexUV) -> Option<Vec<usize>> {
    let n = c.len();
    if n == 0 {
        return None;
    }
    let mut adj = vec![Vec::new(); n];
    for (x, y, _) in c.terms() {
        adj[x].push(y);
        adj[y].push(x);
    }
    if adj.iter().any(|a| a.len() > 2) || c.edge_count() + 1 != n {
        return None;
    }
    let start = (0..n).find(|&v| adj[v].len() <= 1)?;
    let mut path = vec![start];
    let mut prev = usize::MAX;
    while let Some(&next) = adj[*path.last().expect("nonempty")].iter().find(|&&w| w != prev) {
        prev = *path.last().expect("nonempty");
        path.push(next);
    }
    (path.len() == n).then_some(path)
}

fn edge_exp(c: &ComplexUV, a: usize, b: usize) -> (u32, u32) {
    let m = c.differential(a).coefficient_of(b).into_iter().chain(c.differential(b).coefficient_of(a)).next();
    let m = m.expect("adjacent generators");
    (m.u, m.v)
}

/// Removes even-length end segments `x0 .. x_{2k-1}` of a zigzag that a
/// change of basis over `F2[U,V]` detaches; such a segment has no localized
/// homology, so the rest is locally equivalent to the whole.
pub fn peel_tails(c: &ComplexUV) -> ComplexUV {
    let mut cur = c.clone();
    'outer: loop {
        let Some(path) = zigzag_order(&cur) else { return cur };
        for path in [path.clone(), path.iter().rev().copied().collect()] {
            let len = path.len();
            for k in (1..=(len - 1) / 2).rev() {
                if detachable(&cur, &path, k) {
                    let drop: BTreeSet<usize> = path[..2 * k].iter().copied().collect();
                    let keep: Vec<usize> = (0..cur.len()).filter(|v| !drop.contains(v)).collect();
                    cur = cur.restrict(&keep);
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}

fn detachable(c: &ComplexUV, path: &[usize], k: usize) -> bool {
    let mut need = edge_exp(c, path[2 * k - 1], path[2 * k]);
    let mut i = 2 * k - 2;
    loop {
        let have = edge_exp(c, path[i], path[i + 1]);
        if have.0 > need.0 || have.1 > need.1 {
            return false;
        }
        if i == 0 {
            return true;
        }
        let back = edge_exp(c, path[i], path[i - 1]);
        need = (need.0 - have.0 + back.0, need.1 - have.1 + back.1);
        i -= 2;
    }
}

/// Cone of the mirror staircase with `p = 2n - 1`, reduced, truncated to
/// `<2n-1>` and translated into `F2[U,V]`.
pub fn staircase_pipeline(n: i64) -> Result<(Truncation, ComplexUV)> {
    let knot = crate::staircase::mirror_staircase(n)?;
    let cone = crate::cone::build_cone(&knot, 2 * n - 1)?;
    let reduced = reduce_filtered(&cone)?;
    let t = truncate(&reduced, 2 * n - 1)?;
    let c = to_local_fuv(&t.result.complex, (0, 0))?;
    Ok((t, c))
}

/// `(ΔI, ΔJ)` of the term from `source` to `target`, by id or label.
pub fn delta_ij(reduced: &ReducedComplex, source: &str, target: &str) -> Result<(i64, i64)> {
    reduced.complex.delta(reduced.find(source)?, reduced.find(target)?)
}
