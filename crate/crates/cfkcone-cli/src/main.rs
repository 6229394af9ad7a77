use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cfkcone::cone::{build_cone, collapse_to_surgery};
use cfkcone::export::{figure_filtered, figure_infty, figure_uv, to_dot, to_svg, to_tsv, Figure};
use cfkcone::invariants::{d_invariant, phi, standard_params, tau, PhiTable};
use cfkcone::json::{self, Document};
use cfkcone::obstruction::genus_bound;
use cfkcone::reduction::{reduce_filtered, replay, to_local_fuv, truncate, ReducedComplex};
use cfkcone::staircase::{mirror_staircase, staircase, unknot, InftyComplex};
use cfkcone::{Error, Result};

/// Where relative `--out` paths land when set.
const OUT_DIR_VAR: &str = "CFKCONE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "cfkcone", version, about = "Knot complexes, surgery mapping cones and their local invariants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KnotKind {
    Staircase,
    Mirror,
    Unknot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Dot,
    Svg,
}

#[derive(clap::Args, Debug)]
struct Io {
    /// Input document; stdin when absent or `-`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file; stdout when absent or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Writes the staircase complex of `T(2n, 2n+1)` or its mirror.
    BuildStaircase {
        #[arg(long)]
        n: i64,
        #[arg(long, value_enum, default_value = "mirror")]
        knot: KnotKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds the mapping cone of a knot complex, given as a file or as a
    /// staircase parameter.
    BuildCone {
        #[arg(long, conflicts_with = "input")]
        n: Option<i64>,
        #[arg(long, value_enum, default_value = "mirror")]
        knot: KnotKind,
        #[arg(long)]
        p: i64,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cancels every filtration-preserving term of a cone.
    Reduce {
        #[command(flatten)]
        io: Io,
        /// Basis change log as JSON lines.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Splits off the outer towers of a reduced complex.
    Truncate {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        to: i64,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Computes tau, phi and, where defined, d.
    Invariants {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Writes genus bound certificates, one per `n`.
    Obstruct {
        #[arg(long, required = true, value_delimiter = ',')]
        n: Vec<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Draws a complex.
    Export {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
    },
    /// Replays basis change logs on a cone and compares with a reduced
    /// complex.
    Verify {
        /// The cone the logs start from.
        #[arg(long = "in")]
        input: PathBuf,
        /// Logs, applied in the order given.
        #[arg(long, required = true)]
        log: Vec<PathBuf>,
        #[arg(long)]
        against: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_internal() => 2,
            _ => 1,
        }
    }

    fn report(&self) -> Value {
        let (kind, message) = match self {
            Failure::Lib(e) if e.is_internal() => ("internal", e.to_string()),
            Failure::Lib(e) => ("invalid-input", e.to_string()),
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Io(m) => ("io", m.clone()),
        };
        json!({ "error": kind, "message": message })
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn read_input(path: Option<&Path>) -> Run<String> {
    let mut text = String::new();
    match path {
        Some(p) if p != Path::new("-") => {
            text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes through a temporary sibling and a rename, so readers never see a
/// partial file.
fn write_atomic(path: &Path, contents: &str) -> Run<()> {
    let path = resolve(path);
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().ok_or_else(|| Failure::Usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, &path).map_err(io)
}

fn emit(out: Option<&Path>, contents: &str) -> Run<()> {
    match out {
        Some(p) if p != Path::new("-") => write_atomic(p, contents),
        _ => std::io::stdout().write_all(contents.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn knot_for(kind: KnotKind, n: i64) -> Result<InftyComplex> {
    match kind {
        KnotKind::Staircase => staircase(n),
        KnotKind::Mirror => mirror_staircase(n),
        KnotKind::Unknot => Ok(unknot()),
    }
}

fn check_n(n: i64) -> Run<()> {
    if n < 1 {
        return Err(Error::invalid(format!("n must be at least 1, got {n}")).into());
    }
    Ok(())
}

fn read_knot(text: &str) -> Run<InftyComplex> {
    match json::read_document(text)? {
        Document::Infty(k) => Ok(k),
        Document::Cone(c) => Ok(c.knot),
        _ => Err(Error::invalid("expected a knot complex").into()),
    }
}

/// A reduced complex together with its knot, from a cone (reduced on the
/// fly) or a reduced document.
fn read_reduced(text: &str) -> Run<(ReducedComplex, InftyComplex)> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::invalid(format!("not JSON: {e}")))?;
    let doc: json::FilteredDoc =
        serde_json::from_value(value).map_err(|e| Error::invalid(format!("expected a cone or reduced complex: {e}")))?;
    match doc.kind {
        json::FilteredKind::Cone => {
            let cone = json::cone_from_doc(&doc)?;
            Ok((reduce_filtered(&cone)?, cone.knot))
        }
        json::FilteredKind::Reduced => Ok(json::reduced_from_doc(&doc, Vec::new())?),
    }
}

fn phi_rows(t: &PhiTable) -> Vec<Value> {
    t.0.iter().map(|(&(i, j), &v)| json!({ "i": i, "j": j, "value": v })).collect()
}

fn invariants(text: &str) -> Run<Value> {
    let (local, d) = match json::read_document(text)? {
        Document::Uv(c) => (Some(c), None),
        Document::Infty(k) => (None, Some(d_invariant(&k)?)),
        Document::Cone(cone) => {
            let r = reduce_filtered(&cone)?;
            (Some(to_local_fuv(&r.complex, (0, 0))?), d_invariant(&collapse_to_surgery(&cone.complex)).ok())
        }
        Document::Reduced(r) => {
            (Some(to_local_fuv(&r.complex, (0, 0))?), d_invariant(&collapse_to_surgery(&r.complex)).ok())
        }
    };
    let mut out = serde_json::Map::new();
    if let Some(c) = &local {
        out.insert("tau".into(), json!(tau(c)?));
        let rows = standard_params(c).ok().map(|p| phi_rows(&phi(&p)));
        out.insert("phi".into(), json!(rows));
    }
    if let Some(d) = d {
        out.insert("d".into(), json!(d));
    }
    Ok(Value::Object(out))
}

fn invariants_tsv(v: &Value) -> String {
    let mut out = String::from("invariant\tvalue\n");
    for key in ["tau", "d"] {
        if let Some(x) = v.get(key) {
            out.push_str(&format!("{key}\t{x}\n"));
        }
    }
    if let Some(rows) = v.get("phi").and_then(|p| p.as_array()) {
        out.push_str("i\tj\tphi\n");
        for r in rows {
            out.push_str(&format!("{}\t{}\t{}\n", r["i"], r["j"], r["value"]));
        }
    }
    out
}

fn figure(text: &str) -> Run<Figure> {
    Ok(match json::read_document(text)? {
        Document::Uv(c) => figure_uv(&c),
        Document::Infty(k) => figure_infty(&k),
        Document::Cone(c) => figure_filtered(&c.complex),
        Document::Reduced(r) => figure_filtered(&r.complex),
    })
}

/// Runs `f` on every item with up to `jobs` threads, keeping input order.
fn sweep<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(k) else { break };
                *slots[k].lock().expect("no panics while held") = Some(f(item));
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().expect("no panics while held").expect("every slot filled")).collect()
}

fn run(cli: Cli) -> Run<()> {
    match cli.command {
        Command::BuildStaircase { n, knot, out } => {
            check_n(n)?;
            emit(out.as_deref(), &json::to_string(&json::infty_doc(&knot_for(knot, n)?)))
        }
        Command::BuildCone { n, knot, p, input, out } => {
            if p < 1 {
                return Err(Error::invalid(format!("p must be at least 1, got {p}")).into());
            }
            let k = match (n, input) {
                (Some(n), _) => {
                    check_n(n)?;
                    knot_for(knot, n)?
                }
                (None, input) => read_knot(&read_input(input.as_deref())?)?,
            };
            emit(out.as_deref(), &json::to_string(&json::cone_doc(&build_cone(&k, p)?)))
        }
        Command::Reduce { io, log } => {
            let text = read_input(io.input.as_deref())?;
            let cone = match json::read_document(&text)? {
                Document::Cone(c) => c,
                _ => return Err(Error::invalid("reduce expects a cone").into()),
            };
            let r = reduce_filtered(&cone)?;
            if let Some(log) = log {
                write_atomic(&log, &json::log_to_jsonl(&r.log))?;
            }
            emit(io.out.as_deref(), &json::to_string(&json::reduced_doc(&r, &cone.knot)))
        }
        Command::Truncate { io, to, log } => {
            let (r, knot) = read_reduced(&read_input(io.input.as_deref())?)?;
            let t = truncate(&r, to)?;
            if let Some(log) = log {
                write_atomic(&log, &json::log_to_jsonl(&t.result.log))?;
            }
            emit(io.out.as_deref(), &json::to_string(&json::reduced_doc(&t.result, &knot)))
        }
        Command::Invariants { io, format } => {
            let v = invariants(&read_input(io.input.as_deref())?)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&v).expect("values serialize") + "\n",
                Format::Tsv => invariants_tsv(&v),
                other => return Err(Failure::Usage(format!("invariants cannot be written as {other:?}"))),
            };
            emit(io.out.as_deref(), &text)
        }
        Command::Obstruct { n, out, jobs } => {
            let certs = sweep(&n, jobs, |&n| genus_bound(n));
            let certs = certs.into_iter().collect::<Result<Vec<_>>>()?;
            let doc = match certs.as_slice() {
                [one] => json::to_string(one),
                many => json::to_string(&many),
            };
            emit(out.as_deref(), &doc)
        }
        Command::Export { io, format } => {
            let f = figure(&read_input(io.input.as_deref())?)?;
            let text = match format {
                Format::Dot => to_dot(&f),
                Format::Svg => to_svg(&f),
                Format::Tsv => to_tsv(&f),
                Format::Json => return Err(Failure::Usage("export writes dot, svg or tsv".into())),
            };
            emit(io.out.as_deref(), &text)
        }
        Command::Verify { input, log, against, out } => {
            let cone = match json::read_document(&read_input(Some(&input))?)? {
                Document::Cone(c) => c,
                _ => return Err(Error::invalid("verify starts from a cone").into()),
            };
            let mut steps = Vec::new();
            for path in &log {
                steps.extend(json::log_from_jsonl(&read_input(Some(path))?)?);
            }
            let (target, _) = read_reduced(&read_input(Some(&against))?)?;
            let got = replay(&cone.complex, &steps)?;
            let report = diff(&got, &target.complex);
            let ok = report["match"] == json!(true);
            emit(out.as_deref(), &(serde_json::to_string_pretty(&report).expect("values serialize") + "\n"))?;
            if ok {
                Ok(())
            } else {
                Err(Error::invalid("replayed log does not reproduce the reduced complex").into())
            }
        }
    }
}

/// Differences between two filtered complexes, ignoring labels.
fn diff(a: &cfkcone::filtered::FilteredComplex, b: &cfkcone::filtered::FilteredComplex) -> Value {
    use std::collections::BTreeSet;
    let gens = |c: &cfkcone::filtered::FilteredComplex| -> BTreeSet<String> {
        c.gens().iter().map(|g| format!("{} I={} J={} M={}", g.id, g.filt_i, g.filt_j, g.maslov)).collect()
    };
    let terms = |c: &cfkcone::filtered::FilteredComplex| -> BTreeSet<String> {
        c.terms().map(|(x, y, k)| format!("{} -> U^{} {}", c.gen(x).id, k, c.gen(y).id)).collect()
    };
    let (ga, gb, ta, tb) = (gens(a), gens(b), terms(a), terms(b));
    let only = |x: &BTreeSet<String>, y: &BTreeSet<String>| x.difference(y).cloned().collect::<Vec<_>>();
    let report = json!({
        "generatorsOnlyInReplay": only(&ga, &gb),
        "generatorsOnlyInTarget": only(&gb, &ga),
        "termsOnlyInReplay": only(&ta, &tb),
        "termsOnlyInTarget": only(&tb, &ta),
    });
    let matched = report.as_object().expect("object").values().all(|v| v.as_array().is_some_and(|a| a.is_empty()));
    let mut report = report;
    report["match"] = json!(matched);
    report
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.report());
            ExitCode::from(f.exit_code())
        }
    }
}
