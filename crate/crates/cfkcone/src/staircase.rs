//! `CFK^∞`-style complexes over `F2[U, U^-1]` and the staircases of the torus
//! knots `T(2n, 2n+1)`.

use std::collections::BTreeMap;

use crate::algebra::dual_id;
use crate::error::{Error, Result};

/// A generator with plane coordinates `(i, j)` and Maslov grading. Acting by
/// `U` moves it to `(i-1, j-1, maslov-2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InftyGen {
    pub id: String,
    pub i: i64,
    pub j: i64,
    pub maslov: i64,
}

impl InftyGen {
    pub fn new(id: impl Into<String>, i: i64, j: i64, maslov: i64) -> Self {
        InftyGen { id: id.into(), i, j, maslov }
    }
}

/// Free complex over `F2[U, U^-1]`. A term `(y, k)` in `∂x` stands for
/// `U^k y`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InftyComplex {
    gens: Vec<InftyGen>,
    index: BTreeMap<String, usize>,
    diff: Vec<BTreeMap<usize, i64>>,
    symmetry: Option<Vec<usize>>,
}

impl InftyComplex {
    pub fn new(gens: Vec<InftyGen>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (k, g) in gens.iter().enumerate() {
            if index.insert(g.id.clone(), k).is_some() {
                return Err(Error::invalid(format!("duplicate generator id {:?}", g.id)));
            }
        }
        let diff = vec![BTreeMap::new(); gens.len()];
        Ok(InftyComplex { gens, index, diff, symmetry: None })
    }

    /// Adds `U^k y` to `∂x`; `k` is forced by the Maslov gradings.
    pub fn add_arrow(&mut self, x: usize, y: usize) -> Result<()> {
        let d = self.gens[y].maslov - self.gens[x].maslov + 1;
        if d % 2 != 0 {
            return Err(Error::invalid(format!(
                "{} -> {} has the wrong Maslov parity",
                self.gens[x].id, self.gens[y].id
            )));
        }
        self.add_term(x, y, d / 2)
    }

    pub fn add_term(&mut self, x: usize, y: usize, k: i64) -> Result<()> {
        if self.diff[x].insert(y, k).is_some() {
            return Err(Error::invalid(format!(
                "duplicate differential entry {} -> {}",
                self.gens[x].id, self.gens[y].id
            )));
        }
        Ok(())
    }

    pub fn gens(&self) -> &[InftyGen] {
        &self.gens
    }

    pub fn gen(&self, k: usize) -> &InftyGen {
        &self.gens[k]
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

    pub fn differential(&self, x: usize) -> &BTreeMap<usize, i64> {
        &self.diff[x]
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.diff.iter().enumerate().flat_map(|(x, d)| d.iter().map(move |(&y, &k)| (x, y, k)))
    }

    /// Maximal Alexander coordinate `j - i` over the generators.
    pub fn genus(&self) -> i64 {
        self.gens.iter().map(|g| g.j - g.i).max().unwrap_or(0).max(0)
    }

    /// The generator permutation realizing the flip `(i, j) -> (j, i)`, if
    /// one was attached.
    pub fn symmetry(&self) -> Option<&[usize]> {
        self.symmetry.as_deref()
    }

    /// Attaches a flip symmetry after checking it is an involutive chain map
    /// that exchanges the two coordinates.
    pub fn with_symmetry(mut self, perm: Vec<usize>) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::invalid("symmetry must map every generator"));
        }
        for (x, &y) in perm.iter().enumerate() {
            if y >= self.len() || perm[y] != x {
                return Err(Error::invalid("symmetry must be an involution"));
            }
            let (a, b) = (&self.gens[x], &self.gens[y]);
            if b.j - b.i != a.i - a.j || b.maslov - 2 * b.i != a.maslov - 2 * a.j {
                return Err(Error::invalid(format!("{} and {} are not mirror images", a.id, b.id)));
            }
        }
        self.symmetry = Some(perm);
        if !self.symmetry_is_chain_map() {
            self.symmetry = None;
            return Err(Error::invalid("symmetry is not a chain map"));
        }
        Ok(self)
    }

    /// U-power taking the stored representative of `ψx` to the image of `x`
    /// under the flip.
    pub fn symmetry_weight(&self, x: usize) -> Option<i64> {
        let y = self.symmetry.as_ref()?[x];
        Some(self.gens[y].i - self.gens[x].j)
    }

    fn symmetry_is_chain_map(&self) -> bool {
        let Some(perm) = &self.symmetry else { return true };
        let e = |x: usize| self.symmetry_weight(x).expect("symmetry attached");
        (0..self.len()).all(|x| {
            let lhs: BTreeMap<usize, i64> = self.diff[perm[x]].iter().map(|(&y, &k)| (y, k + e(x))).collect();
            let rhs: BTreeMap<usize, i64> = self.diff[x].iter().map(|(&y, &k)| (perm[y], k + e(y))).collect();
            lhs == rhs
        })
    }

    /// Problems with the complex, one line each; empty when it is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (x, y, k) in self.terms() {
            let (a, b) = (&self.gens[x], &self.gens[y]);
            if b.maslov - 2 * k != a.maslov - 1 {
                out.push(format!("{} -> U^{k} {} does not drop Maslov by 1", a.id, b.id));
            }
            if b.i - k > a.i || b.j - k > a.j {
                out.push(format!("{} -> U^{k} {} raises a filtration", a.id, b.id));
            }
        }
        for x in 0..self.len() {
            let mut acc: BTreeMap<(usize, i64), bool> = BTreeMap::new();
            for (&y, &k) in &self.diff[x] {
                for (&z, &k2) in &self.diff[y] {
                    let e = acc.entry((z, k + k2)).or_default();
                    *e = !*e;
                }
            }
            for ((z, k), odd) in acc {
                if odd {
                    out.push(format!("d^2({}) contains U^{k} {}", self.gens[x].id, self.gens[z].id));
                }
            }
        }
        if !self.symmetry_is_chain_map() {
            out.push("attached symmetry is not a chain map".into());
        }
        out
    }

    /// Dual complex: `(i, j, M)` negated and arrows reversed.
    pub fn dual(&self) -> InftyComplex {
        let gens = self.gens.iter().map(|g| InftyGen::new(dual_id(&g.id), -g.i, -g.j, -g.maslov)).collect();
        let mut out = InftyComplex::new(gens).expect("dual ids stay distinct");
        for (x, y, k) in self.terms() {
            out.diff[y].insert(x, k);
        }
        out.symmetry = self.symmetry.clone();
        out
    }
}

/// `-(2n-i)(2n-i+1)/2 + i(i-1)/2`
pub fn g_a(n: i64, i: i64) -> i64 {
    -(2 * n - i) * (2 * n - i + 1) / 2 + i * (i - 1) / 2
}

/// `-(2n-i)(2n-i+1)/2 + i(i+1)/2`
pub fn g_b(n: i64, i: i64) -> i64 {
    -(2 * n - i) * (2 * n - i + 1) / 2 + i * (i + 1) / 2
}

pub fn genus(n: i64) -> i64 {
    n * (2 * n - 1)
}

fn check_n(n: i64) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid(format!("n must be at least 1, got {n}")));
    }
    Ok(())
}

/// Coefficients (index = degree) of the Alexander polynomial of `T(2n, 2n+1)`.
pub fn alexander_poly(n: i64) -> Result<Vec<i64>> {
    check_n(n)?;
    let mut c = vec![0; 2 * genus(n) as usize + 1];
    c[0] += 1;
    for i in 0..=2 * n - 2 {
        c[((2 * n - i) * (2 * n - 1) - i) as usize] += 1;
        c[((2 * n - i) * (2 * n - 1) - 2 * i - 1) as usize] -= 1;
    }
    Ok(c)
}

/// Closed form of the partial sum `Σ_{i≤l} (t^{e_i} - t^{e_i-i-1})(1 + t + ... + t^{2n-1})`
/// where `e_i = (2n-i)(2n-1) - i`.
pub fn telescoped_sum(n: i64, l: i64) -> Result<Vec<i64>> {
    check_n(n)?;
    if !(0..=2 * n - 2).contains(&l) {
        return Err(Error::invalid(format!("partial sum index {l} out of range")));
    }
    let mut c = vec![0; ((2 * n - 1) * (2 * n + 1)) as usize + 1];
    for k in 0..=l {
        c[((2 * n - 1 - k) * (2 * n + 1)) as usize] += 1;
    }
    for m in l + 1..=2 * l + 1 {
        c[((2 * n - l) * (2 * n - 1) - m) as usize] -= 1;
    }
    Ok(c)
}

/// Staircase of a positive L-space knot from its Alexander polynomial
/// (coefficients by degree). Generators `x0, x1, ...` from the top corner.
pub fn lspace_staircase(coeffs: &[i64]) -> Result<InftyComplex> {
    let exps = staircase_exponents(coeffs)?;
    let names: Vec<String> = (0..exps.len()).map(|k| format!("x{k}")).collect();
    build_positive(&exps, &names)
}

fn staircase_exponents(coeffs: &[i64]) -> Result<Vec<i64>> {
    let top = coeffs.iter().rposition(|&c| c != 0).ok_or_else(|| Error::invalid("zero polynomial"))?;
    let c = &coeffs[..=top];
    if c.iter().zip(c.iter().rev()).any(|(a, b)| a != b) {
        return Err(Error::invalid("Alexander polynomial must be symmetric"));
    }
    let exps: Vec<i64> = (0..c.len()).rev().filter(|&k| c[k] != 0).map(|k| k as i64).collect();
    for (pos, &e) in exps.iter().enumerate() {
        let want = if pos % 2 == 0 { 1 } else { -1 };
        if c[e as usize] != want {
            return Err(Error::invalid("coefficients must be ±1 and alternate in sign from the top"));
        }
    }
    Ok(exps)
}

/// Positive staircase from descending exponents `α_0 > α_1 > ...`.
fn build_positive(exps: &[i64], names: &[String]) -> Result<InftyComplex> {
    let g = exps[0] / 2;
    let mut maslov = 0;
    let mut gens = Vec::with_capacity(exps.len());
    for (k, &a) in exps.iter().enumerate() {
        if k > 0 {
            maslov += if k % 2 == 1 { 1 - 2 * (exps[k - 1] - a) } else { -1 };
        }
        gens.push(InftyGen::new(names[k].clone(), 0, a - g, maslov));
    }
    let mut c = InftyComplex::new(gens)?;
    for k in (1..exps.len()).step_by(2) {
        c.add_arrow(k, k - 1)?;
        c.add_arrow(k, k + 1)?;
    }
    let last = exps.len() - 1;
    c.with_symmetry((0..exps.len()).map(|k| last - k).collect())
}

fn staircase_names(n: i64, suffix: &str) -> Vec<String> {
    let mut names = Vec::new();
    for i in 1..=2 * n {
        names.push(format!("a{i}{suffix}"));
        if i < 2 * n {
            names.push(format!("b{i}{suffix}"));
        }
    }
    names
}

/// `CFK^∞` of `T(2n, 2n+1)`, generators `a1*, b1*, a2*, ...`.
pub fn staircase(n: i64) -> Result<InftyComplex> {
    check_n(n)?;
    let mut exps = Vec::new();
    let g = genus(n);
    for i in 1..=2 * n {
        exps.push(g - g_a(n, i));
        if i < 2 * n {
            exps.push(g - g_b(n, i));
        }
    }
    build_positive(&exps, &staircase_names(n, "*"))
}

/// `CFK^∞` of the mirror `-T(2n, 2n+1)`, generators `a1, b1, a2, ...` with
/// `∂a_i = U^i b_i + b_{i-1}`.
pub fn mirror_staircase(n: i64) -> Result<InftyComplex> {
    check_n(n)?;
    let names = staircase_names(n, "");
    let mut gens = Vec::new();
    let mut m = 0;
    for i in 1..=2 * n {
        gens.push(InftyGen::new(names[gens.len()].clone(), 0, g_a(n, i), m));
        if i < 2 * n {
            m += 2 * i - 1;
            gens.push(InftyGen::new(names[gens.len()].clone(), 0, g_b(n, i), m));
            m += 1;
        }
    }
    let mut c = InftyComplex::new(gens)?;
    let a = |i: i64| (2 * i - 2) as usize;
    let b = |i: i64| (2 * i - 1) as usize;
    for i in 1..=2 * n {
        if i < 2 * n {
            c.add_arrow(a(i), b(i))?;
        }
        if i > 1 {
            c.add_arrow(a(i), b(i - 1))?;
        }
    }
    let last = c.len() - 1;
    c.with_symmetry((0..=last).map(|k| last - k).collect())
}

/// The complex of the unknot: one generator at the origin.
pub fn unknot() -> InftyComplex {
    let c = InftyComplex::new(vec![InftyGen::new("x", 0, 0, 0)]).expect("one id");
    c.with_symmetry(vec![0]).expect("trivial symmetry")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trefoil_staircase() {
        let s = staircase(1).unwrap();
        let coords: Vec<_> = s.gens().iter().map(|g| (g.id.as_str(), g.i, g.j, g.maslov)).collect();
        assert_eq!(coords, vec![("a1*", 0, 1, 0), ("b1*", 0, 0, -1), ("a2*", 0, -1, -2)]);
        assert_eq!(s.differential(1).iter().map(|(&y, &k)| (y, k)).collect::<Vec<_>>(), vec![(0, 1), (2, 0)]);
        assert!(s.validate().is_empty());
    }

    #[test]
    fn shorthand_values() {
        assert_eq!(g_a(3, 1), -15);
        assert_eq!(g_b(3, 5), 14);
        for n in 1..=6 {
            assert_eq!(g_a(n, n), -n);
            assert_eq!(g_b(n, n), 0);
            for i in 1..2 * n {
                assert_eq!(g_a(n, i) + i, g_b(n, i));
            }
        }
    }

    #[test]
    fn mirror_is_dual_of_staircase() {
        for n in 1..=6 {
            let m = mirror_staircase(n).unwrap();
            assert!(m.validate().is_empty(), "{:?}", m.validate());
            assert_eq!(m.dual(), staircase(n).unwrap());
            assert_eq!(m.genus(), genus(n));
        }
    }

    #[test]
    fn mirror_step_lengths() {
        let m = mirror_staircase(3).unwrap();
        assert_eq!(m.len(), 11);
        assert_eq!(m.gen(0).j, -15);
        for i in 1..=5 {
            let a = m.index_of(&format!("a{i}")).unwrap();
            let b = m.index_of(&format!("b{i}")).unwrap();
            assert_eq!(m.differential(a)[&b], i);
            let a_next = m.index_of(&format!("a{}", i + 1)).unwrap();
            assert_eq!(m.gen(a_next).j - m.gen(b).j, 6 - i);
        }
    }

    #[test]
    fn generic_staircase_rejects_bad_input() {
        assert!(lspace_staircase(&[1, 1, 1]).is_err());
        assert!(lspace_staircase(&[1, -1, 0]).is_err());
        assert!(lspace_staircase(&[0]).is_err());
        let t34 = lspace_staircase(&[1, -1, 0, 1, 0, -1, 1]).unwrap();
        assert!(t34.validate().is_empty());
        assert_eq!(t34.genus(), 3);
    }

    #[test]
    fn bad_symmetry_rejected() {
        let s = staircase(1).unwrap();
        assert!(s.clone().with_symmetry(vec![0, 1, 2]).is_err());
        assert!(s.with_symmetry(vec![2, 1, 0]).is_ok());
    }

    #[test]
    fn unknot_is_valid() {
        assert!(unknot().validate().is_empty());
        assert_eq!(unknot().genus(), 0);
    }
}
