//! Pairing off a free complex over a graded one-variable ring `F2[W]`.
//!
//! Every entry of the differential is a single power of `W`. When the
//! exponents come from a grading (so `e(z, w) = c(w) - d(z)`), always
//! pivoting on a globally minimal exponent keeps every row and column
//! operation defined over `F2[W]`, and the complex splits into singletons
//! and pairs `x -> W^e y`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pairing {
    /// `(source, target, exponent)` in the order they were split off.
    pub pairs: Vec<(usize, usize, u32)>,
    pub unpaired: Vec<usize>,
}

pub fn pair_off(n: usize, entries: impl IntoIterator<Item = (usize, usize, u32)>) -> Result<Pairing> {
    let mut fwd: Vec<BTreeMap<usize, u32>> = vec![BTreeMap::new(); n];
    let mut rev: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut queue: BTreeSet<(u32, usize, usize)> = BTreeSet::new();
    for (x, y, e) in entries {
        if x == y {
            return Err(Error::invalid(format!("generator {x} maps to itself")));
        }
        if fwd[x].remove(&y).is_some() {
            rev[y].remove(&x);
            queue.retain(|&(_, a, b)| (a, b) != (x, y));
        } else {
            fwd[x].insert(y, e);
            rev[y].insert(x);
            queue.insert((e, x, y));
        }
    }

    let mut alive = vec![true; n];
    let mut out = Pairing::default();
    while let Some(&(e, x, y)) = queue.iter().next() {
        let sources: Vec<(usize, u32)> =
            rev[y].iter().filter(|&&z| z != x).map(|&z| (z, fwd[z][&y])).collect();
        let targets: Vec<(usize, u32)> =
            fwd[x].iter().filter(|(&w, _)| w != y).map(|(&w, &k)| (w, k)).collect();
        for &(z, ezy) in &sources {
            for &(w, exw) in &targets {
                let ezw = ezy + exw - e;
                match fwd[z].get(&w).copied() {
                    Some(old) if old == ezw => {
                        fwd[z].remove(&w);
                        rev[w].remove(&z);
                        queue.remove(&(old, z, w));
                    }
                    Some(old) => {
                        return Err(Error::invalid(format!(
                            "entry {z}->{w} has exponents {old} and {ezw}; the complex is not homogeneous"
                        )))
                    }
                    None => {
                        fwd[z].insert(w, ezw);
                        rev[w].insert(z);
                        queue.insert((ezw, z, w));
                    }
                }
            }
        }
        for v in [x, y] {
            for (w, k) in std::mem::take(&mut fwd[v]) {
                rev[w].remove(&v);
                queue.remove(&(k, v, w));
            }
            for z in std::mem::take(&mut rev[v]) {
                if let Some(k) = fwd[z].remove(&v) {
                    queue.remove(&(k, z, v));
                }
            }
            alive[v] = false;
        }
        out.pairs.push((x, y, e));
    }
    out.unpaired = (0..n).filter(|&i| alive[i]).collect();
    Ok(out)
}
