//! The doubly filtered mapping cone `X_p` built from towers `A_s` and `B_s`
//! of a knot complex, joined by the maps `v_s` and `h_s`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtered::{FilteredComplex, FilteredGen, FilteredMap, Part};
use crate::staircase::{InftyComplex, InftyGen};

/// `-n(n-1)/2 + ns`
pub fn f(n: i64, s: i64) -> i64 {
    -n * (n - 1) / 2 + n * s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub p: i64,
    pub genus: i64,
    pub a_range: (i64, i64),
    /// `None` when there are no `B` towers.
    pub b_range: Option<(i64, i64)>,
    pub knot: InftyComplex,
    pub complex: FilteredComplex,
}

fn a_gen(x: &InftyGen, pos: usize, p: i64, s: i64) -> FilteredGen {
    FilteredGen {
        id: FilteredGen::cone_id(Part::A, s, &x.id),
        part: Part::A,
        s,
        base: x.id.clone(),
        base_pos: pos,
        i: x.i,
        j: x.j,
        filt_i: x.i.max(x.j - s),
        filt_j: (x.i - p).max(x.j - s) + f(p, s),
        maslov: x.maslov + s * (s - 1),
        label: None,
    }
}

fn b_gen(x: &InftyGen, pos: usize, p: i64, s: i64) -> FilteredGen {
    FilteredGen {
        id: FilteredGen::cone_id(Part::B, s, &x.id),
        part: Part::B,
        s,
        base: x.id.clone(),
        base_pos: pos,
        i: x.i,
        j: x.j,
        filt_i: x.i,
        filt_j: x.i - p + f(p, s),
        maslov: x.maslov + s * (s - 1) - 1,
        label: None,
    }
}

fn in_range(r: Option<(i64, i64)>, s: i64) -> bool {
    r.is_some_and(|(lo, hi)| lo <= s && s <= hi)
}

/// Builds the cone for surgery coefficient +1 and the `(p, 1)` cable. The
/// knot must carry its flip symmetry.
pub fn build_cone(knot: &InftyComplex, p: i64) -> Result<Cone> {
    if p <= 0 {
        return Err(Error::invalid(format!("cable parameter p must be positive, got {p}")));
    }
    if knot.is_empty() {
        return Err(Error::invalid("knot complex has no generators"));
    }
    let problems = knot.validate();
    if !problems.is_empty() {
        return Err(Error::invalid(format!("knot complex is invalid: {}", problems.join("; "))));
    }
    if knot.symmetry().is_none() {
        return Err(Error::invalid("the cone needs the flip symmetry of the knot complex"));
    }
    let g = knot.genus();
    let top = g + p - 1;
    let a_range = ((-g + 1).min(top), top);
    let b_range = (-g + 2 <= top).then_some((-g + 2, top));

    let mut gens = Vec::new();
    for s in a_range.0..=a_range.1 {
        if in_range(b_range, s) {
            gens.extend(knot.gens().iter().enumerate().map(|(k, x)| b_gen(x, k, p, s)));
        }
        gens.extend(knot.gens().iter().enumerate().map(|(k, x)| a_gen(x, k, p, s)));
    }
    let mut c = FilteredComplex::new(gens)?;
    let id = |part, s, x: usize| FilteredGen::cone_id(part, s, &knot.gen(x).id);
    let sym = knot.symmetry().expect("checked above");
    let arrow = |c: &mut FilteredComplex, from: String, to: String, want: i64| -> Result<()> {
        let (x, y) = (c.index_of(&from).expect("built"), c.index_of(&to).expect("built"));
        c.add_term(x, y)?;
        if c.differential(x)[&y] != want {
            return Err(Error::invariant(format!("{from} -> {to} has U-power {} instead of {want}", c.differential(x)[&y])));
        }
        Ok(())
    };
    for s in a_range.0..=a_range.1 {
        for (x, y, k) in knot.terms() {
            arrow(&mut c, id(Part::A, s, x), id(Part::A, s, y), k)?;
            if in_range(b_range, s) {
                arrow(&mut c, id(Part::B, s, x), id(Part::B, s, y), k)?;
            }
        }
        for x in 0..knot.len() {
            if in_range(b_range, s) {
                arrow(&mut c, id(Part::A, s, x), id(Part::B, s, x), 0)?;
            }
            if in_range(b_range, s + 1) {
                let w = s + knot.symmetry_weight(x).expect("symmetry attached");
                arrow(&mut c, id(Part::A, s, x), id(Part::B, s + 1, sym[x]), w)?;
            }
        }
    }
    Ok(Cone { p, genus: g, a_range, b_range, knot: knot.clone(), complex: c })
}

impl Cone {
    pub fn a_tower_count(&self) -> usize {
        (self.a_range.1 - self.a_range.0 + 1) as usize
    }

    pub fn b_tower_count(&self) -> usize {
        self.b_range.map_or(0, |(lo, hi)| (hi - lo + 1) as usize)
    }
}

/// The symmetry `Ψ` of the cone exchanging the two filtrations: `A_s` goes
/// to `A_{p-s}` through the knot's flip, and `B_s` goes to `B_{p-s+1}`
/// on the same knot generator, each with a fixed U-power.
pub fn psi(cone: &Cone) -> Result<FilteredMap> {
    let p = cone.p;
    let knot = &cone.knot;
    let sym = knot.symmetry().ok_or_else(|| Error::invalid("knot carries no flip symmetry"))?;
    let c = &cone.complex;
    let mut out = Vec::with_capacity(c.len());
    for g in c.gens() {
        let x = knot.index_of(&g.base).ok_or_else(|| Error::invalid(format!("unknown base generator {}", g.base)))?;
        let (target, w) = match g.part {
            Part::A => {
                let y = &knot.gen(sym[x]).id;
                let w = (p - 1) * (p - 2 * g.s) / 2 + knot.symmetry_weight(x).expect("symmetry attached");
                (FilteredGen::cone_id(Part::A, p - g.s, y), w)
            }
            Part::B => (FilteredGen::cone_id(Part::B, p - g.s + 1, &g.base), p * (p - 2 * g.s + 1) / 2),
        };
        let t = c
            .index_of(&target)
            .ok_or_else(|| Error::invalid(format!("image {target} of {} lies outside the cone", g.id)))?;
        out.push(BTreeMap::from([(t, w)]));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiReport {
    pub chain_map: bool,
    pub swaps_filtrations: bool,
    pub preserves_maslov: bool,
    pub involution: bool,
}

impl PsiReport {
    pub fn all_pass(&self) -> bool {
        self.chain_map && self.swaps_filtrations && self.preserves_maslov && self.involution
    }
}

pub fn check_psi(cone: &Cone) -> Result<PsiReport> {
    let map = psi(cone)?;
    let c = &cone.complex;
    let chain_map = c.is_chain_map(c, &map);
    let swaps_filtrations = map.iter().enumerate().all(|(x, img)| {
        img.iter().all(|(&y, &w)| {
            let (a, b) = (c.gen(x), c.gen(y));
            (b.filt_i - w, b.filt_j - w) == (a.filt_j, a.filt_i)
        })
    });
    let preserves_maslov = map
        .iter()
        .enumerate()
        .all(|(x, img)| img.iter().all(|(&y, &w)| c.gen(y).maslov - 2 * w == c.gen(x).maslov));
    let involution = (0..c.len()).all(|x| crate::filtered::compose(&map, &map, x) == [(x, 0)].into());
    Ok(PsiReport { chain_map, swaps_filtrations, preserves_maslov, involution })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessEntry {
    /// `"h"` or `"v"`.
    pub map: &'static str,
    pub s: i64,
    pub iso: bool,
}

/// Checks on towers just outside the cone's range that `h_s` (below) and
/// `v_s` (above) are filtered isomorphisms, so truncating there loses
/// nothing.
pub fn truncation_witness(cone: &Cone) -> Vec<WitnessEntry> {
    let g = cone.genus;
    if g == 0 {
        return Vec::new();
    }
    let p = cone.p;
    let knot = &cone.knot;
    let sym = knot.symmetry().expect("cone knots carry a symmetry");
    let mut out = Vec::new();
    for s in [-g, -g - 1] {
        let iso = (0..knot.len()).all(|x| {
            let a = a_gen(knot.gen(x), x, p, s);
            let b = b_gen(knot.gen(sym[x]), sym[x], p, s + 1);
            let w = s + knot.symmetry_weight(x).expect("symmetry attached");
            (b.filt_i - w, b.filt_j - w, b.maslov - 2 * w) == (a.filt_i, a.filt_j, a.maslov - 1)
        });
        out.push(WitnessEntry { map: "h", s, iso });
    }
    for s in [g + p, g + p + 1] {
        let iso = (0..knot.len()).all(|x| {
            let a = a_gen(knot.gen(x), x, p, s);
            let b = b_gen(knot.gen(x), x, p, s);
            (b.filt_i, b.filt_j, b.maslov) == (a.filt_i, a.filt_j, a.maslov - 1)
        });
        out.push(WitnessEntry { map: "v", s, iso });
    }
    out
}

/// Forgets the second filtration: the result is a complex for the surgered
/// manifold, with `j` set equal to `i`.
pub fn collapse_to_surgery(c: &FilteredComplex) -> InftyComplex {
    let gens = c.gens().iter().map(|g| InftyGen::new(g.id.clone(), g.filt_i, g.filt_i, g.maslov)).collect();
    let mut out = InftyComplex::new(gens).expect("ids already distinct");
    for (x, y, k) in c.terms() {
        out.add_term(x, y, k).expect("no duplicate terms");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::staircase::{mirror_staircase, unknot};

    #[test]
    fn tower_ranges() {
        let c = build_cone(&mirror_staircase(3).unwrap(), 5).unwrap();
        assert_eq!(c.a_range, (-14, 19));
        assert_eq!(c.b_range, Some((-13, 19)));
        assert_eq!(c.a_tower_count() as i64, 2 * c.genus + c.p - 1);
        assert_eq!(c.b_tower_count() as i64, 2 * c.genus + c.p - 2);
        assert!(c.complex.validate().is_empty());
    }

    #[test]
    fn unknot_cone_is_unknot() {
        let c = build_cone(&unknot(), 1).unwrap();
        assert_eq!(c.complex.len(), 1);
        assert_eq!(c.b_range, None);
        assert!(truncation_witness(&c).is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        let k = mirror_staircase(1).unwrap();
        assert!(build_cone(&k, 0).is_err());
        assert!(build_cone(&InftyComplex::default(), 1).is_err());
    }

    #[test]
    fn shorthand_step() {
        for n in 1..6 {
            for s in -5..5 {
                assert_eq!(f(n, s - 1) + n, f(n, s));
            }
        }
    }

    #[test]
    fn psi_weights_and_identities() {
        let c = build_cone(&mirror_staircase(3).unwrap(), 5).unwrap();
        let map = psi(&c).unwrap();
        let b3 = c.complex.index_of("B3:a1").unwrap();
        assert_eq!(map[b3].values().copied().collect::<Vec<_>>(), vec![0]);
        let r = check_psi(&c).unwrap();
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn witness_for_trefoil_mirror() {
        let c = build_cone(&mirror_staircase(2).unwrap(), 3).unwrap();
        let w = truncation_witness(&c);
        assert_eq!(w.len(), 4);
        assert!(w.iter().all(|e| e.iso));
    }

    #[test]
    fn collapse_keeps_terms() {
        let c = build_cone(&mirror_staircase(1).unwrap(), 1).unwrap();
        let m = collapse_to_surgery(&c.complex);
        assert_eq!(m.len(), c.complex.len());
        assert!(m.validate().is_empty());
    }
}
