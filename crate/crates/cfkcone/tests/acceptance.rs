//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL
//! line; the test fails if any criterion does.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use cfkcone::algebra::ComplexUV;
use cfkcone::cone::{build_cone, check_psi, collapse_to_surgery};
use cfkcone::invariants::{d_invariant, dual_class, local_class_cn, phi, standard_params, tau};
use cfkcone::obstruction::genus_bound;
use cfkcone::reduction::{delta_ij, reduce_filtered, staircase_pipeline, to_local_fuv, truncate, Truncation};
use cfkcone::staircase::{alexander_poly, genus, mirror_staircase, staircase, telescoped_sum, unknot};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pipeline(n: i64) -> Result<(Truncation, ComplexUV), String> {
    staircase_pipeline(n).map_err(|e| format!("n = {n}: {e}"))
}

fn pipeline_equals_fixture() -> Outcome {
    let start = Instant::now();
    for n in 1..=5 {
        let (_, got) = pipeline(n)?;
        let want = local_class_cn(n).map_err(|e| e.to_string())?.complex;
        ensure(got.isomorphism_to(&want).is_some(), || format!("n = {n}: pipeline output is not the fixture"))?;
    }
    let main = start.elapsed();
    ensure(main < Duration::from_secs(10), || format!("n = 1..5 took {main:?}"))?;
    let start = Instant::now();
    let (_, got) = pipeline(6)?;
    let want = local_class_cn(6).map_err(|e| e.to_string())?.complex;
    ensure(got.isomorphism_to(&want).is_some(), || "n = 6: pipeline output is not the fixture".into())?;
    let stretch = start.elapsed();
    ensure(stretch < Duration::from_secs(60), || format!("n = 6 took {stretch:?}"))?;
    Ok(format!("n = 1..5 in {main:?}, n = 6 in {stretch:?}"))
}

/// The eight families of drops between the surviving generators, written
/// out from their closed forms.
fn delta_families(n: i64) -> Vec<(String, String, (i64, i64))> {
    let t = n * (n - 1) / 2;
    let p = n * (n + 1) / 2;
    let a = |s: i64| format!("α{s}");
    let at = |s: i64| format!("α~{s}");
    let b = |k: i64, s: i64| format!("b{k}({s})");
    let mut out = Vec::new();
    for s in 1..=n - 2 {
        out.push((a(s), b(n - 1, s), (t, t)));
    }
    for s in n + 2..=2 * n - 1 {
        out.push((a(s), b(n + 1, s - 1), (t, t)));
    }
    for s in 2..=n {
        out.push((a(s), b(n, s - 1), (p - s + 1, p)));
    }
    for s in n..=2 * n - 2 {
        out.push((a(s), b(n, s), (p, t + s - n + 1)));
    }
    out.push((a(n - 1), b(n, n - 1), (p, t)));
    out.push((a(n + 1), b(n, n), (t, p)));
    for s in 1..=n - 2 {
        out.push((at(s), b(n - 1, s), (0, n - 1 - s)));
        out.push((at(s), b(n, s), (n, 0)));
    }
    for s in n + 1..=2 * n - 2 {
        out.push((at(s), b(n, s), (0, n)));
        out.push((at(s), b(n + 1, s), (s - n, 0)));
    }
    out
}

fn delta_tables() -> Outcome {
    let mut checked = 0;
    let mut cases: Vec<(i64, Vec<(String, String, (i64, i64))>)> = (3..=6).map(|n| (n, delta_families(n))).collect();
    cases.push((
        2,
        vec![
            ("α1".into(), "b2(1)".into(), (3, 1)),
            ("α2".into(), "b2(1)".into(), (2, 3)),
            ("α2".into(), "b2(2)".into(), (3, 2)),
            ("α3".into(), "b2(2)".into(), (1, 3)),
        ],
    ));
    for (n, rows) in cases {
        let (t, _) = pipeline(n)?;
        for (x, y, want) in rows {
            let got = delta_ij(&t.result, &x, &y).map_err(|e| format!("n = {n}, {x} -> {y}: {e}"))?;
            ensure(got == want, || format!("n = {n}, {x} -> {y}: {got:?} instead of {want:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} drops"))
}

fn tau_values() -> Outcome {
    for n in 1..=5 {
        let (_, c) = pipeline(n)?;
        let got = tau(&c.dualize()).map_err(|e| e.to_string())?;
        let want = 2 * n * n - 3 * n + 1;
        ensure(got == want, || format!("n = {n}: tau of the dual is {got}, expected {want}"))?;
    }
    let (_, c2) = pipeline(2)?;
    let got = tau(&c2).map_err(|e| e.to_string())?;
    ensure(got == -3, || format!("tau(C_2) = {got}"))?;
    Ok("0, 3, 10, 21, 36 and -3".into())
}

fn phi_tables() -> Outcome {
    for n in 3..=5i64 {
        let (_, c) = pipeline(n)?;
        let table = phi(&standard_params(&c).map_err(|e| e.to_string())?).0;
        let (t, p) = ((n * (n - 1) / 2) as u32, (n * (n + 1) / 2) as u32);
        let mut want = BTreeMap::new();
        for i in 1..=(n - 2) as u32 {
            want.insert((i, 0), -1);
        }
        *want.entry((n as u32, 0)).or_insert(0) += -n + 2;
        *want.entry((t, t)).or_insert(0) += -n + 2;
        for j in t..p {
            *want.entry((p, j)).or_insert(0) += -1;
        }
        want.retain(|_, v| *v != 0);
        ensure(want.len() as i64 == (n - 1) + 1 + n, || format!("n = {n}: expected support has the wrong size"))?;
        ensure(table == want, || format!("n = {n}: {table:?} instead of {want:?}"))?;
    }
    let (_, c) = pipeline(2)?;
    let table = phi(&standard_params(&c).map_err(|e| e.to_string())?).0;
    let want = BTreeMap::from([((3, 1), -1), ((3, 2), -1)]);
    ensure(table == want, || format!("n = 2: {table:?}"))?;
    Ok("n = 2..5".into())
}

fn obstruction_certificates() -> Outcome {
    for n in 2..=5 {
        let cert = genus_bound(n).map_err(|e| e.to_string())?;
        let failed: Vec<&str> = cert.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        ensure(failed.is_empty(), || format!("n = {n}: failed {failed:?}"))?;
        ensure(cert.bound == Some(n - 1), || format!("n = {n}: bound {:?}", cert.bound))?;
    }
    let two = genus_bound(2).map_err(|e| e.to_string())?;
    let witness = two.checks.iter().find(|c| c.name.starts_with("phi off")).map(|c| c.witness.clone());
    let want = serde_json::json!([{ "i": 3, "j": 1, "value": -1 }, { "i": 3, "j": 2, "value": -1 }]);
    ensure(witness.as_ref() == Some(&want), || format!("n = 2 off-axis witness is {witness:?}"))?;
    Ok("bounds 1, 2, 3, 4".into())
}

fn structural_suites() -> Outcome {
    let mut gens = 0;
    for n in 1..=6 {
        let knot = mirror_staircase(n).map_err(|e| e.to_string())?;
        let problems = knot.validate();
        ensure(problems.is_empty(), || format!("knot n = {n}: {problems:?}"))?;
        gens += knot.len();
        let cone = build_cone(&knot, 2 * n - 1).map_err(|e| e.to_string())?;
        let problems = cone.complex.validate();
        ensure(problems.is_empty(), || format!("cone n = {n}: {:?}", &problems[..problems.len().min(3)]))?;
        gens += cone.complex.len();
        if n <= 4 {
            let psi = check_psi(&cone).map_err(|e| e.to_string())?;
            ensure(psi.all_pass(), || format!("n = {n}: {psi:?}"))?;
        }
        let reduced = reduce_filtered(&cone).map_err(|e| e.to_string())?;
        ensure(reduced.complex.validate().is_empty(), || format!("reduced n = {n} is not a filtered complex"))?;
        ensure(reduced.complex.is_reduced(), || format!("reduced n = {n} keeps a flat term"))?;
        gens += reduced.complex.len();
        let t = truncate(&reduced, 2 * n - 1).map_err(|e| e.to_string())?;
        ensure(t.result.complex.validate().is_empty(), || format!("truncated n = {n} is not a filtered complex"))?;
        ensure(t.result.complex.localized_rank() == 1, || format!("truncated n = {n} has localized rank != 1"))?;
        gens += t.result.complex.len();
        let local = to_local_fuv(&t.result.complex, (0, 0)).map_err(|e| e.to_string())?;
        for c in [local.clone(), local.dualize(), dual_class(n).map_err(|e| e.to_string())?] {
            ensure(c.is_valid(), || format!("n = {n}: {:?}", c.validate()))?;
            gens += c.len();
        }
    }
    ensure(gens >= 10_000, || format!("only {gens} generators checked"))?;
    Ok(format!("{gens} generators"))
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division by a monic polynomial; `None` if there is a remainder.
fn poly_div(num: &[i64], den: &[i64]) -> Option<Vec<i64>> {
    let mut r = num.to_vec();
    let d = den.len() - 1;
    let mut q = vec![0; r.len() - d];
    for k in (0..q.len()).rev() {
        let c = r[k + d];
        q[k] = c;
        for (j, x) in den.iter().enumerate() {
            r[k + j] -= c * x;
        }
    }
    r.iter().all(|&x| x == 0).then_some(q)
}

fn binomial_minus_one(e: usize) -> Vec<i64> {
    let mut v = vec![0; e + 1];
    v[0] = -1;
    v[e] = 1;
    v
}

fn trim(mut v: Vec<i64>) -> Vec<i64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn alexander_identity() -> Outcome {
    for n in 1..=5i64 {
        let (p, q) = (2 * n as usize, 2 * n as usize + 1);
        let num = poly_mul(&binomial_minus_one(p * q), &binomial_minus_one(1));
        let den = poly_mul(&binomial_minus_one(p), &binomial_minus_one(q));
        let oracle = poly_div(&num, &den).ok_or("torus knot quotient has a remainder")?;
        let got = alexander_poly(n).map_err(|e| e.to_string())?;
        ensure(trim(got.clone()) == trim(oracle), || format!("n = {n}: {got:?}"))?;
        ensure(got.len() as i64 == 2 * genus(n) + 1, || format!("n = {n}: degree is not twice the genus"))?;
        let ones = vec![1; 2 * n as usize];
        let mut partial = vec![0];
        for l in 0..=2 * n - 2 {
            let e = (2 * n - l) * (2 * n - 1) - l;
            let mut s = vec![0; e as usize + 1];
            s[e as usize] = 1;
            s[(e - l - 1) as usize] = -1;
            let term = poly_mul(&s, &ones);
            if partial.len() < term.len() {
                partial.resize(term.len(), 0);
            }
            for (k, x) in term.iter().enumerate() {
                partial[k] += x;
            }
            let closed = telescoped_sum(n, l).map_err(|e| e.to_string())?;
            ensure(trim(partial.clone()) == trim(closed), || format!("n = {n}: partial sum {l} differs"))?;
        }
    }
    Ok("n = 1..5".into())
}

/// `V_0` of a positive L-space knot, read off its Alexander polynomial.
fn v0_lspace(coeffs: &[i64]) -> i64 {
    let g = (coeffs.len() - 1) / 2;
    coeffs[g + 1..].iter().enumerate().map(|(j, a)| (j as i64 + 1) * a).sum()
}

fn d_calibration() -> Outcome {
    let d_of = |k: &cfkcone::staircase::InftyComplex| -> Result<i64, String> {
        let cone = build_cone(k, 1).map_err(|e| e.to_string())?;
        d_invariant(&collapse_to_surgery(&cone.complex)).map_err(|e| e.to_string())
    };
    let s3 = d_of(&unknot())?;
    ensure(s3 == 0, || format!("d(S^3) = {s3}"))?;
    let plus = v0_lspace(&alexander_poly(1).map_err(|e| e.to_string())?);
    let got = d_of(&staircase(1).map_err(|e| e.to_string())?)?;
    ensure(got == -2 * plus, || format!("positive trefoil: d = {got}, oracle {}", -2 * plus))?;
    ensure(got == -2, || format!("positive trefoil: d = {got}"))?;
    // the mirror of a nontrivial L-space knot has V_0 = 0
    let got = d_of(&mirror_staircase(1).map_err(|e| e.to_string())?)?;
    ensure(got == 0, || format!("negative trefoil: d = {got}"))?;
    Ok("0, -2, 0".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("pipeline equals the local class fixture", pipeline_equals_fixture),
        ("drop tables of the reduced basis", delta_tables),
        ("tau values", tau_values),
        ("phi tables", phi_tables),
        ("obstruction certificates", obstruction_certificates),
        ("structural suites", structural_suites),
        ("Alexander polynomial identity", alexander_identity),
        ("d-invariant calibration", d_calibration),
    ];
    let mut err = std::io::stderr().lock();
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let line = match check() {
            Ok(note) => format!("PASS  {name}: {note}"),
            Err(why) => {
                failed.push(name);
                format!("FAIL  {name}: {why}")
            }
        };
        writeln!(err, "{line}").expect("stderr is writable");
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
