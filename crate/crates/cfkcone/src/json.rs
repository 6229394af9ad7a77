//! JSON documents for complexes, cones and reductions, and JSON lines for
//! reduction logs. Writers emit a canonical form: generators in stored
//! order, terms sorted by source then target.

use serde::{Deserialize, Serialize};

use crate::algebra::{BigradedGen, ComplexUV, Monomial};
use crate::cone::{build_cone, Cone};
use crate::error::{Error, Result};
use crate::filtered::{FilteredComplex, FilteredGen, Part};
use crate::reduction::{label_generators, staircase_n, ReducedComplex, Step};
use crate::staircase::{InftyComplex, InftyGen};

pub const RING_UV: &str = "F2[U,V]";
pub const RING_LAURENT: &str = "F2[U,Uinv]";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UvGenDoc {
    pub id: String,
    pub gr_u: i64,
    pub gr_v: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UvTermDoc {
    pub from: String,
    pub to: String,
    pub u: u32,
    pub v: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UvDoc {
    pub ring: String,
    pub generators: Vec<UvGenDoc>,
    pub differential: Vec<UvTermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LaurentTermDoc {
    pub from: String,
    pub to: String,
    pub u_power: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InftyGenDoc {
    pub id: String,
    pub i: i64,
    pub j: i64,
    pub maslov: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDoc {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InftyDoc {
    pub ring: String,
    pub generators: Vec<InftyGenDoc>,
    pub differential: Vec<LaurentTermDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Vec<PairDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConeGenDoc {
    pub id: String,
    pub part: Part,
    pub s: i64,
    pub base_id: String,
    pub i: i64,
    pub j: i64,
    pub filt_i: i64,
    pub filt_j: i64,
    pub maslov: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilteredKind {
    Cone,
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredDoc {
    pub ring: String,
    pub kind: FilteredKind,
    pub p: i64,
    pub genus: i64,
    /// Largest tower index present.
    pub level: i64,
    pub knot: InftyDoc,
    pub generators: Vec<ConeGenDoc>,
    pub differential: Vec<LaurentTermDoc>,
}

/// Any document this crate reads.
#[derive(Clone, Debug)]
pub enum Document {
    Uv(ComplexUV),
    Infty(InftyComplex),
    Cone(Cone),
    Reduced(ReducedComplex),
}

fn sorted<T, K: Ord>(mut v: Vec<T>, key: impl Fn(&T) -> K) -> Vec<T> {
    v.sort_by_key(key);
    v
}

pub fn uv_doc(c: &ComplexUV) -> UvDoc {
    let terms = sorted(c.terms().collect(), |&(x, y, m)| (x, y, m));
    UvDoc {
        ring: RING_UV.into(),
        generators: c.gens().iter().map(|g| UvGenDoc { id: g.id.clone(), gr_u: g.gr_u, gr_v: g.gr_v }).collect(),
        differential: terms
            .into_iter()
            .map(|(x, y, m)| UvTermDoc { from: c.gen(x).id.clone(), to: c.gen(y).id.clone(), u: m.u, v: m.v })
            .collect(),
    }
}

pub fn uv_from_doc(doc: &UvDoc) -> Result<ComplexUV> {
    if doc.ring != RING_UV {
        return Err(Error::invalid(format!("expected ring {RING_UV}, found {}", doc.ring)));
    }
    let gens = doc.generators.iter().map(|g| BigradedGen::new(g.id.clone(), g.gr_u, g.gr_v)).collect();
    ComplexUV::from_parts(gens, doc.differential.iter().map(|t| (t.from.clone(), t.to.clone(), Monomial::new(t.u, t.v))))
}

pub fn infty_doc(c: &InftyComplex) -> InftyDoc {
    InftyDoc {
        ring: RING_LAURENT.into(),
        generators: c
            .gens()
            .iter()
            .map(|g| InftyGenDoc { id: g.id.clone(), i: g.i, j: g.j, maslov: g.maslov })
            .collect(),
        differential: c
            .terms()
            .map(|(x, y, k)| LaurentTermDoc { from: c.gen(x).id.clone(), to: c.gen(y).id.clone(), u_power: k })
            .collect(),
        symmetry: c.symmetry().map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(x, &y)| PairDoc { from: c.gen(x).id.clone(), to: c.gen(y).id.clone() })
                .collect()
        }),
    }
}

pub fn infty_from_doc(doc: &InftyDoc) -> Result<InftyComplex> {
    if doc.ring != RING_LAURENT {
        return Err(Error::invalid(format!("expected ring {RING_LAURENT}, found {}", doc.ring)));
    }
    let gens = doc.generators.iter().map(|g| InftyGen::new(g.id.clone(), g.i, g.j, g.maslov)).collect();
    let mut c = InftyComplex::new(gens)?;
    let find = |c: &InftyComplex, id: &str| c.index_of(id).ok_or_else(|| Error::invalid(format!("unknown generator {id}")));
    for t in &doc.differential {
        let (x, y) = (find(&c, &t.from)?, find(&c, &t.to)?);
        c.add_term(x, y, t.u_power)?;
    }
    let problems = c.validate();
    if !problems.is_empty() {
        return Err(Error::invalid(problems.join("; ")));
    }
    if let Some(pairs) = &doc.symmetry {
        let mut perm = vec![usize::MAX; c.len()];
        for p in pairs {
            perm[find(&c, &p.from)?] = find(&c, &p.to)?;
        }
        if perm.contains(&usize::MAX) {
            return Err(Error::invalid("symmetry leaves a generator unmapped"));
        }
        c = c.with_symmetry(perm)?;
    }
    Ok(c)
}

fn filtered_parts(c: &FilteredComplex) -> (Vec<ConeGenDoc>, Vec<LaurentTermDoc>) {
    let gens = c
        .gens()
        .iter()
        .map(|g| ConeGenDoc {
            id: g.id.clone(),
            part: g.part,
            s: g.s,
            base_id: g.base.clone(),
            i: g.i,
            j: g.j,
            filt_i: g.filt_i,
            filt_j: g.filt_j,
            maslov: g.maslov,
            label: g.label.clone(),
        })
        .collect();
    let terms = c
        .terms()
        .map(|(x, y, k)| LaurentTermDoc { from: c.gen(x).id.clone(), to: c.gen(y).id.clone(), u_power: k })
        .collect();
    (gens, terms)
}

fn filtered_from_parts(doc: &FilteredDoc, knot: &InftyComplex) -> Result<FilteredComplex> {
    let mut gens = Vec::with_capacity(doc.generators.len());
    for g in &doc.generators {
        let base_pos =
            knot.index_of(&g.base_id).ok_or_else(|| Error::invalid(format!("unknown base generator {}", g.base_id)))?;
        gens.push(FilteredGen {
            id: g.id.clone(),
            part: g.part,
            s: g.s,
            base: g.base_id.clone(),
            base_pos,
            i: g.i,
            j: g.j,
            filt_i: g.filt_i,
            filt_j: g.filt_j,
            maslov: g.maslov,
            label: g.label.clone(),
        });
    }
    let mut c = FilteredComplex::new(gens)?;
    for t in &doc.differential {
        let find = |id: &str| c.index_of(id).ok_or_else(|| Error::invalid(format!("unknown generator {id}")));
        let (x, y) = (find(&t.from)?, find(&t.to)?);
        c.add_term(x, y)?;
        if c.differential(x)[&y] != t.u_power {
            return Err(Error::invalid(format!("{} -> {} has the wrong U-power", t.from, t.to)));
        }
    }
    let problems = c.validate();
    if !problems.is_empty() {
        return Err(Error::invalid(problems.join("; ")));
    }
    Ok(c)
}

pub fn cone_doc(cone: &Cone) -> FilteredDoc {
    let (generators, differential) = filtered_parts(&cone.complex);
    FilteredDoc {
        ring: RING_LAURENT.into(),
        kind: FilteredKind::Cone,
        p: cone.p,
        genus: cone.genus,
        level: cone.a_range.1,
        knot: infty_doc(&cone.knot),
        generators,
        differential,
    }
}

/// Rebuilds the cone from its knot and `p` and insists the stored complex
/// agrees with it.
pub fn cone_from_doc(doc: &FilteredDoc) -> Result<Cone> {
    if doc.kind != FilteredKind::Cone {
        return Err(Error::invalid("document is not a cone"));
    }
    let knot = infty_from_doc(&doc.knot)?;
    let cone = build_cone(&knot, doc.p)?;
    let stored = filtered_from_parts(doc, &knot)?;
    if stored != cone.complex {
        return Err(Error::invalid("stored cone does not match the cone of its knot"));
    }
    Ok(cone)
}

pub fn reduced_doc(r: &ReducedComplex, knot: &InftyComplex) -> FilteredDoc {
    let (generators, differential) = filtered_parts(&r.complex);
    FilteredDoc {
        ring: RING_LAURENT.into(),
        kind: FilteredKind::Reduced,
        p: r.p,
        genus: r.genus,
        level: r.level,
        knot: infty_doc(knot),
        generators,
        differential,
    }
}

/// The log is not part of the document; pass it separately.
pub fn reduced_from_doc(doc: &FilteredDoc, log: Vec<Step>) -> Result<(ReducedComplex, InftyComplex)> {
    if doc.kind != FilteredKind::Reduced {
        return Err(Error::invalid("document is not a reduced complex"));
    }
    let knot = infty_from_doc(&doc.knot)?;
    let mut complex = filtered_from_parts(doc, &knot)?;
    let n = staircase_n(&knot);
    if let Some(n) = n {
        if complex.gens().iter().all(|g| g.label.is_none()) {
            label_generators(&mut complex, n);
        }
    }
    Ok((ReducedComplex { p: doc.p, genus: doc.genus, n, level: doc.level, complex, log }, knot))
}

pub fn to_string<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn log_to_jsonl(log: &[Step]) -> String {
    log.iter().map(|s| serde_json::to_string(s).expect("steps serialize") + "\n").collect()
}

pub fn log_from_jsonl(text: &str) -> Result<Vec<Step>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| serde_json::from_str(l).map_err(|e| Error::invalid(format!("log line {}: {e}", k + 1))))
        .collect()
}

/// Reads any document, dispatching on `ring` and `kind`.
pub fn read_document(text: &str) -> Result<Document> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::invalid(format!("not JSON: {e}")))?;
    let ring = value.get("ring").and_then(|r| r.as_str()).unwrap_or_default().to_string();
    let parse = |v: serde_json::Value| -> Result<FilteredDoc> {
        serde_json::from_value(v).map_err(|e| Error::invalid(format!("malformed document: {e}")))
    };
    match (ring.as_str(), value.get("kind").and_then(|k| k.as_str())) {
        (RING_UV, _) => {
            let doc: UvDoc = serde_json::from_value(value).map_err(|e| Error::invalid(format!("malformed complex: {e}")))?;
            Ok(Document::Uv(uv_from_doc(&doc)?))
        }
        (RING_LAURENT, None) => {
            let doc: InftyDoc = serde_json::from_value(value).map_err(|e| Error::invalid(format!("malformed complex: {e}")))?;
            Ok(Document::Infty(infty_from_doc(&doc)?))
        }
        (RING_LAURENT, Some("cone")) => Ok(Document::Cone(cone_from_doc(&parse(value)?)?)),
        (RING_LAURENT, Some("reduced")) => Ok(Document::Reduced(reduced_from_doc(&parse(value)?, Vec::new())?.0)),
        (r, k) => Err(Error::invalid(format!("unrecognized document (ring {r:?}, kind {k:?})"))),
    }
}
