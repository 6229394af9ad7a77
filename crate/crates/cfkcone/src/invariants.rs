//! The local class `C_n` and its dual, and the invariants read off from
//! them: `τ`, standard-complex parameters, `φ_{i,j}` and `d`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{homology_reps, specialized_columns, BigradedGen, ComplexUV, Monomial, QuotientSpec};
use crate::gf2::{self, BitVec};
use crate::error::{Error, Result};
use crate::reduction::zigzag_order;
use crate::snf;
use crate::staircase::InftyComplex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalClassCn {
    pub n: i64,
    /// Generator ids are the labels `α{s}`, `α~{s}` and `b{k}({s})`.
    pub complex: ComplexUV,
}

fn alpha(s: i64) -> String {
    format!("α{s}")
}

fn alpha_t(s: i64) -> String {
    format!("α~{s}")
}

fn b(k: i64, s: i64) -> String {
    format!("b{k}({s})")
}

/// Terms `(source, target, (U-power, V-power))` of `C_n`.
pub fn cn_terms(n: i64) -> Vec<(String, String, (u32, u32))> {
    let mut out = Vec::new();
    let mut push = |x: String, y: String, e: (i64, i64)| out.push((x, y, (e.0 as u32, e.1 as u32)));
    match n {
        ..=1 => {}
        2 => {
            push(alpha(1), b(2, 1), (3, 1));
            push(alpha(2), b(2, 1), (2, 3));
            push(alpha(2), b(2, 2), (3, 2));
            push(alpha(3), b(2, 2), (1, 3));
        }
        _ => {
            let t = n * (n - 1) / 2;
            let p = n * (n + 1) / 2;
            for s in 1..2 * n {
                if s == 1 {
                    push(alpha(s), b(n - 1, 1), (t, t));
                } else if s <= n - 2 {
                    push(alpha(s), b(n, s - 1), (p - s + 1, p));
                    push(alpha(s), b(n - 1, s), (t, t));
                } else if s <= n + 1 {
                    push(alpha(s), b(n, s - 1), (t + n - s + 1, p));
                    push(alpha(s), b(n, s), (p, t - n + s + 1));
                } else if s <= 2 * n - 2 {
                    push(alpha(s), b(n + 1, s - 1), (t, t));
                    push(alpha(s), b(n, s), (p, t - n + s + 1));
                } else {
                    push(alpha(s), b(n + 1, 2 * n - 2), (t, t));
                }
            }
            for s in 1..=n - 2 {
                push(alpha_t(s), b(n, s), (n, 0));
                push(alpha_t(s), b(n - 1, s), (0, n - s - 1));
            }
            for s in n + 1..=2 * n - 2 {
                push(alpha_t(s), b(n + 1, s), (s - n, 0));
                push(alpha_t(s), b(n, s), (0, n));
            }
        }
    }
    out
}

/// Builds a connected complex from its terms, fixing gradings by the drop
/// law and then shifting so that both free towers start in grading 0.
pub fn complex_from_terms(ids: &[String], terms: &[(String, String, (u32, u32))]) -> Result<ComplexUV> {
    let pos: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();
    let mut adj = vec![Vec::new(); ids.len()];
    for (x, y, (u, v)) in terms {
        let (x, y) = (pos[x.as_str()], pos[y.as_str()]);
        // gr(y) - 2(u, v) = gr(x) - 1
        let d = (2 * *u as i64 - 1, 2 * *v as i64 - 1);
        adj[x].push((y, d));
        adj[y].push((x, (-d.0, -d.1)));
    }
    let mut gr: Vec<Option<(i64, i64)>> = vec![None; ids.len()];
    for root in 0..ids.len() {
        if gr[root].is_some() {
            continue;
        }
        gr[root] = Some((0, 0));
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let g = gr[x].expect("visited");
            for &(y, d) in &adj[x] {
                let want = (g.0 + d.0, g.1 + d.1);
                match gr[y] {
                    None => {
                        gr[y] = Some(want);
                        queue.push_back(y);
                    }
                    Some(h) if h != want => {
                        return Err(Error::invalid(format!("inconsistent gradings at {}", ids[y])))
                    }
                    _ => {}
                }
            }
        }
    }
    let gens = ids
        .iter()
        .zip(&gr)
        .map(|(id, g)| {
            let (u, v) = g.expect("all visited");
            BigradedGen::new(id.clone(), u, v)
        })
        .collect();
    let c = ComplexUV::from_parts(gens, terms.iter().map(|(x, y, (u, v))| (x.clone(), y.clone(), Monomial::new(*u, *v))))?;
    normalize_towers(&c)
}

/// Shifts gradings so the `V = 1` tower starts at `gr_U = 0` and the `U = 1`
/// tower at `gr_V = 0`.
pub fn normalize_towers(c: &ComplexUV) -> Result<ComplexUV> {
    let top = |q: QuotientSpec, pick: fn(&crate::algebra::Summand) -> Option<i64>| -> Result<i64> {
        let h = c.quotient(&q)?.homology()?;
        let free: Vec<_> = h.free().collect();
        if free.len() != 1 {
            return Err(Error::invalid(format!("expected one free tower, found {}", free.len())));
        }
        pick(free[0]).ok_or_else(|| Error::invariant("free tower without a grading"))
    };
    let du = top(QuotientSpec::v_one(), |s| s.gr_u)?;
    let dv = top(QuotientSpec::u_one(), |s| s.gr_v)?;
    Ok(c.shift((-du, -dv)))
}

/// The local class `C_n`: a single generator for `n = 1`, a five-term zigzag
/// for `n = 2`, and `8n - 11` generators for `n ≥ 3`.
pub fn local_class_cn(n: i64) -> Result<LocalClassCn> {
    if n < 1 {
        return Err(Error::invalid(format!("n must be at least 1, got {n}")));
    }
    if n == 1 {
        let complex = ComplexUV::new(vec![BigradedGen::new(alpha(1), 0, 0)])?;
        return Ok(LocalClassCn { n, complex });
    }
    let terms = cn_terms(n);
    let mut ids: Vec<String> = Vec::new();
    for (x, y, _) in &terms {
        for id in [x, y] {
            if !ids.contains(id) {
                ids.push(id.clone());
            }
        }
    }
    Ok(LocalClassCn { n, complex: complex_from_terms(&ids, &terms)? })
}

/// `C_n*`, with ids suffixed by `*`.
pub fn dual_class(n: i64) -> Result<ComplexUV> {
    Ok(local_class_cn(n)?.complex.dualize())
}

/// `τ` of a knotlike complex: the least Alexander level `m` at which a
/// cycle of `C/(U, V-1)` supported in `A ≤ m` is homologous there to the
/// reduction of a cycle generating the top of the `V = 1` tower. When
/// `H(C/U)` has free rank one this is the Alexander grading of its free
/// generator.
pub fn tau(c: &ComplexUV) -> Result<i64> {
    let h = c.quotient(&QuotientSpec::v_one())?.homology()?;
    let towers: Vec<_> = h.free().collect();
    if towers.len() != 1 {
        return Err(Error::invalid(format!("V = 1 homology has {} free towers, not 1", towers.len())));
    }
    let d = towers[0].gr_u.ok_or_else(|| Error::invariant("tower without a grading"))?;
    let (bounds, _) = homology_reps(&specialized_columns(c));
    let survives = |v: &BitVec| !bounds.contains(v);

    // U^a x in the V = 1 complex, graded gr_U(x) - 2a
    let level = |k: i64| -> Vec<(usize, u32)> {
        (0..c.len())
            .filter_map(|x| {
                let e = c.gen(x).gr_u - k;
                (e >= 0 && e % 2 == 0).then_some((x, (e / 2) as u32))
            })
            .collect()
    };
    let top = level(d);
    let below: BTreeMap<(usize, u32), usize> = level(d - 1).into_iter().enumerate().map(|(k, t)| (t, k)).collect();
    let cols: Vec<BitVec> = top
        .iter()
        .map(|&(x, a)| {
            let mut v = BitVec::zeros(below.len());
            for (y, m) in c.differential(x).terms() {
                v.flip(below[&(y, a + m.u)]);
            }
            v
        })
        .collect();
    let cycles = gf2::kernel(&cols);

    let hat: Vec<usize> = (0..c.len()).filter(|&x| c.gen(x).gr_u == d).collect();
    let hat_pos: BTreeMap<usize, usize> = hat.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    let localize = |z: &BitVec| BitVec::from_ones(c.len(), z.ones().map(|k| top[k].0));
    let mod_u = |z: &BitVec| {
        BitVec::from_ones(hat.len(), z.ones().filter(|&k| top[k].1 == 0).map(|k| hat_pos[&top[k].0]))
    };
    let hat_image = |x: usize, index: &dyn Fn(usize) -> Option<usize>, len: usize| {
        let mut v = BitVec::zeros(len);
        for (y, m) in c.differential(x).terms() {
            if m.u == 0 {
                if let Some(k) = index(y) {
                    v.flip(k);
                }
            }
        }
        v
    };
    let hat_bounds: Vec<BitVec> = (0..c.len())
        .filter(|&x| c.gen(x).gr_u == d + 1)
        .map(|x| hat_image(x, &|y| hat_pos.get(&y).copied(), hat.len()))
        .collect();
    let reduced: Vec<BitVec> = cycles.iter().map(mod_u).collect();

    let alexander = |x: usize| (c.gen(x).gr_u - c.gen(x).gr_v) / 2;
    let (lo, hi) = match (hat.iter().map(|&x| alexander(x)).min(), hat.iter().map(|&x| alexander(x)).max()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(Error::invariant("no generators in the tower grading")),
    };
    for m in lo..=hi {
        let sub: Vec<usize> = hat.iter().copied().filter(|&x| alexander(x) <= m).collect();
        let sub_cols: Vec<BitVec> = sub.iter().map(|&x| hat_image(x, &|y| Some(y), c.len())).collect();
        let filtered: Vec<BitVec> = gf2::kernel(&sub_cols)
            .iter()
            .map(|z| BitVec::from_ones(hat.len(), z.ones().map(|k| hat_pos[&sub[k]])))
            .collect();
        let mut all = filtered.clone();
        all.extend(reduced.iter().cloned());
        all.extend(hat_bounds.iter().cloned());
        for k in gf2::kernel(&all) {
            let mut t = BitVec::zeros(top.len());
            for j in k.ones().filter(|&j| j >= filtered.len() && j < filtered.len() + cycles.len()) {
                t.xor_with(&cycles[j - filtered.len()]);
            }
            if survives(&localize(&t)) {
                return Ok(m);
            }
        }
    }
    Err(Error::invariant("no filtration level carries the tower generator"))
}

/// One standard-complex parameter `±(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Param {
    pub sign: i8,
    pub x: u32,
    pub y: u32,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign < 0 { "-" } else { "+" };
        write!(f, "{s}({},{})", self.x, self.y)
    }
}

/// Parameters `a_1, a_2, ...` read along a zigzag. Odd entries are
/// `(U-power, V-power)`, even ones `(V-power, U-power)`; the sign is `+`
/// when the arrow points back toward the start.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardParams {
    pub params: Vec<Param>,
    /// Generator ids in walking order.
    pub walk: Vec<String>,
}

impl StandardParams {
    pub fn odd(&self) -> impl Iterator<Item = &Param> {
        self.params.iter().step_by(2)
    }
}

fn walk_params(c: &ComplexUV, path: &[usize]) -> Vec<Param> {
    path.windows(2)
        .enumerate()
        .map(|(k, w)| {
            let (a, b) = (w[0], w[1]);
            let (m, forward) = match c.differential(a).coefficient_of(b).first() {
                Some(&m) => (m, true),
                None => (c.differential(b).coefficient_of(a)[0], false),
            };
            let (x, y) = if k % 2 == 0 { (m.u, m.v) } else { (m.v, m.u) };
            Param { sign: if forward { -1 } else { 1 }, x, y }
        })
        .collect()
}

/// Walks a zigzag from the end whose odd steps are all `U`-dominant
/// (`x ≥ 1` and `x ≥ y`); if both ends qualify, the one with the larger
/// first step wins.
pub fn standard_params(c: &ComplexUV) -> Result<StandardParams> {
    let path = zigzag_order(c).ok_or_else(|| {
        let degrees: Vec<usize> = (0..c.len())
            .map(|x| c.differential(x).len() + c.terms().filter(|&(_, y, _)| y == x).count())
            .collect();
        Error::invalid(format!(
            "not a zigzag: {} generators, {} terms, largest degree {}",
            c.len(),
            c.edge_count(),
            degrees.iter().max().copied().unwrap_or(0)
        ))
    })?;
    if c.terms().any(|(x, y, _)| c.differential(x).coefficient_of(y).len() > 1) {
        return Err(Error::invalid("a zigzag step carries more than one monomial"));
    }
    let reversed: Vec<usize> = path.iter().rev().copied().collect();
    let ok = |p: &[Param]| p.iter().step_by(2).all(|q| q.x >= 1 && q.x >= q.y);
    let fwd = walk_params(c, &path);
    let bwd = walk_params(c, &reversed);
    let (params, order) = match (ok(&fwd), ok(&bwd)) {
        (true, true) if bwd.first().map(|q| (q.x, q.y)) > fwd.first().map(|q| (q.x, q.y)) => (bwd, reversed),
        (true, _) => (fwd, path),
        (false, true) => (bwd, reversed),
        (false, false) => return Err(Error::invalid("neither end of the zigzag starts a standard walk")),
    };
    Ok(StandardParams { params, walk: order.iter().map(|&x| c.gen(x).id.clone()).collect() })
}

/// Sparse `φ_{i,j}` values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhiTable(pub BTreeMap<(u32, u32), i64>);

impl PhiTable {
    pub fn get(&self, i: u32, j: u32) -> i64 {
        self.0.get(&(i, j)).copied().unwrap_or(0)
    }
}

/// Signed count of odd parameters equal to `±(i, j)`.
pub fn phi(params: &StandardParams) -> PhiTable {
    let mut t = BTreeMap::new();
    for q in params.odd() {
        *t.entry((q.x, q.y)).or_insert(0) += q.sign as i64;
    }
    t.retain(|_, v| *v != 0);
    PhiTable(t)
}

/// Top Maslov grading of the non-torsion part of the `I ≤ 0` subcomplex.
pub fn d_invariant(m: &InftyComplex) -> Result<i64> {
    let mut entries = Vec::new();
    for (x, y, k) in m.terms() {
        let e = m.gen(x).i + k - m.gen(y).i;
        if e < 0 {
            return Err(Error::invalid(format!("term {} -> {} raises the filtration", m.gen(x).id, m.gen(y).id)));
        }
        entries.push((x, y, e as u32));
    }
    let pairing = snf::pair_off(m.len(), entries)?;
    match pairing.unpaired.as_slice() {
        [x] => {
            let g = m.gen(*x);
            Ok(g.maslov - 2 * g.i)
        }
        other => Err(Error::invalid(format!("localized homology has rank {}, not 1", other.len()))),
    }
}
