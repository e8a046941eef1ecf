//! Command-line front end. [`run`] is the whole program minus process exit,
//! so it can be driven from tests.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::cycleindex;
use crate::error::Error;
use crate::kronecker::{compare_engines, kron_by_cosets, kron_in_basis, Family, StructureConstantTable};
use crate::partitions::Partition;
use crate::permutations::DEFAULT_LIMIT;
use crate::steggall::{counts_by_stabilizer, verify_steggall_identity};
use crate::symfunc::{self, format_rational, Basis, SymFunc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_CONSISTENCY: i32 = 4;

pub const CACHE_DIR_ENV: &str = "SPECKRON_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(name = "speckron", version, about = "Exact C/K-basis symmetric functions and Kronecker products")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Refuse factorial-size enumeration above this degree (hard cap 9 for cosets, 10 for patterns).
    #[arg(long = "limit-n", default_value_t = DEFAULT_LIMIT, global = true)]
    pub limit_n: usize,

    /// Worker threads for library-internal parallelism; output is unaffected.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Algebraic,
    Cosets,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand one basis element (P, H/E, M, S, C, K) in another basis.
    Expand {
        family: String,
        alpha: String,
        #[arg(long = "in", default_value = "P")]
        target: String,
    },
    /// Structure constants of X_α ⋆ X_β for X in E/H, C, K.
    Kron {
        family: String,
        alpha: String,
        beta: String,
        #[arg(long, value_enum, default_value_t = Engine::Algebraic)]
        engine: Engine,
    },
    /// Full transition matrix between two bases at degree n.
    Transition { from: String, to: String, n: usize },
    /// Number of labelled structures of E_α, C_α or K_α.
    Count { family: String, alpha: String },
    /// Steggall patterns of size n and the C_n ⋆ C_n identity.
    Steggall { n: usize },
    /// Classified double cosets behind X_α ⋆ X_β.
    Cosets { family: String, alpha: String, beta: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn err(code: i32, msg: impl Into<String>) -> Self {
        Outcome { code, stdout: String::new(), stderr: msg.into() }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::WeightMismatch(..) | Error::BasisMismatch(..) | Error::InvalidPermutation(_) => {
            EXIT_USAGE
        }
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Classification(_) | Error::Consistency(_) => EXIT_CONSISTENCY,
        Error::Io(_) => 1,
    }
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        Outcome::err(exit_code(&e), format!("error: {e}\n"))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK { Outcome::ok(text) } else { Outcome::err(code, text) };
        }
    };
    if let Ok(dir) = std::env::var(CACHE_DIR_ENV) {
        if !dir.is_empty() {
            symfunc::set_persist_dir(Some(PathBuf::from(dir)));
        }
    }
    match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Outcome::err(EXIT_USAGE, format!("error: bad thread count: {e}\n")),
        },
        None => execute(&cli),
    }
}

fn execute(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Expand { family, alpha, target } => cmd_expand(family, alpha, target, cli.format),
        Command::Kron { family, alpha, beta, engine } => {
            cmd_kron(family, alpha, beta, *engine, cli.format, coset_limit(cli))
        }
        Command::Transition { from, to, n } => cmd_transition(from, to, *n, cli.format),
        Command::Count { family, alpha } => cmd_count(family, alpha, cli.format),
        Command::Steggall { n } => cmd_steggall(*n, cli.format, cli.limit_n),
        Command::Cosets { family, alpha, beta } => cmd_cosets(family, alpha, beta, cli.format, coset_limit(cli)),
    };
    result.unwrap_or_else(Outcome::from)
}

fn coset_limit(cli: &Cli) -> usize {
    cli.limit_n.min(DEFAULT_LIMIT)
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Right-aligned coefficient column followed by the basis element.
fn text_terms(header: &str, rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(c, _)| c.len()).max().unwrap_or(0);
    let mut out = format!("{header}\n");
    if rows.is_empty() {
        out.push_str("  0\n");
    }
    for (c, e) in rows {
        out.push_str(&format!("  {c:>width$}  {e}\n"));
    }
    out
}

fn symfunc_rows(f: &SymFunc) -> Vec<(String, String)> {
    f.terms()
        .map(|(l, c)| (format_rational(c), format!("{}[{}]", f.basis().symbol(), l)))
        .collect()
}

fn table_rows(t: &StructureConstantTable) -> Vec<(String, String)> {
    t.iter().map(|(mu, v)| (v.to_string(), format!("{}[{}]", t.family, mu))).collect()
}

pub fn cmd_expand(family: &str, alpha: &str, target: &str, format: Format) -> Result<Outcome, Error> {
    let source: Basis = family.parse()?;
    let target: Basis = target.parse()?;
    let alpha: Partition = alpha.parse()?;
    let f = symfunc::convert(&SymFunc::unit(source, &alpha), target);
    Ok(Outcome::ok(match format {
        Format::Json => render(&json!({
            "family": source.to_string(),
            "alpha": alpha.parts(),
            "expansion": f.to_json(),
        })),
        Format::Text => text_terms(&format!("{}[{}] in {}:", source.symbol(), alpha, target), &symfunc_rows(&f)),
    }))
}

pub fn cmd_kron(
    family: &str,
    alpha: &str,
    beta: &str,
    engine: Engine,
    format: Format,
    limit: usize,
) -> Result<Outcome, Error> {
    let family: Family = family.parse()?;
    let alpha: Partition = alpha.parse()?;
    let beta: Partition = beta.parse()?;
    let (table, count, agree, other) = match engine {
        Engine::Algebraic => (kron_in_basis(&alpha, &beta, family)?, None, None, None),
        Engine::Cosets => {
            let d = kron_by_cosets(&alpha, &beta, family, limit)?;
            let c = d.cosets.len();
            (d.table, Some(c), None, None)
        }
        Engine::Both => {
            let cmp = compare_engines(&alpha, &beta, family, limit)?;
            let agree = cmp.agree();
            (cmp.algebraic, Some(cmp.double_coset_count), Some(agree), Some(cmp.cosets))
        }
    };
    let engine_name = match engine {
        Engine::Algebraic => "algebraic",
        Engine::Cosets => "cosets",
        Engine::Both => "both",
    };
    let stdout = match format {
        Format::Json => {
            let mut v = table.to_json(engine_name, count);
            if let Some(a) = agree {
                v["agree"] = json!(a);
                if !a {
                    let o = other.as_ref().expect("both engines ran");
                    v["cosets_coefficients"] = o.to_json("cosets", None)["coefficients"].clone();
                }
            }
            render(&v)
        }
        Format::Text => {
            let mut s = text_terms(&format!("{f}[{alpha}] * {f}[{beta}] ({engine_name}):", f = family), &table_rows(&table));
            if let Some(c) = count {
                s.push_str(&format!("double cosets: {c}\n"));
            }
            if let Some(a) = agree {
                s.push_str(&format!("engines agree: {}\n", if a { "yes" } else { "NO" }));
                if !a {
                    let o = other.as_ref().expect("both engines ran");
                    s.push_str(&text_terms("cosets engine:", &table_rows(o)));
                }
            }
            s
        }
    };
    if agree == Some(false) {
        return Ok(Outcome { code: EXIT_CONSISTENCY, stdout, stderr: "error: engines disagree\n".into() });
    }
    Ok(Outcome::ok(stdout))
}

pub fn cmd_transition(from: &str, to: &str, n: usize, format: Format) -> Result<Outcome, Error> {
    let from: Basis = from.parse()?;
    let to: Basis = to.parse()?;
    let m = symfunc::transition(from, to, n);
    let cells: Vec<Vec<String>> = m.rows().iter().map(|r| r.iter().map(format_rational).collect()).collect();
    Ok(Outcome::ok(match format {
        Format::Json => render(&json!({
            "from": from.to_string(),
            "to": to.to_string(),
            "n": n,
            "index": m.index().iter().map(|p| p.parts().to_vec()).collect::<Vec<_>>(),
            "rows": cells,
        })),
        Format::Text => {
            let labels: Vec<String> = m.index().iter().map(|p| p.to_string()).collect();
            let lw = labels.iter().map(String::len).max().unwrap_or(0);
            let cw = cells.iter().flatten().chain(labels.iter()).map(String::len).max().unwrap_or(1);
            let mut s = format!("{from} -> {to} at n = {n} (row: {from} element, column: {to} element)\n");
            s.push_str(&format!("{:lw$}", ""));
            for l in &labels {
                s.push_str(&format!("  {l:>cw$}"));
            }
            s.push('\n');
            for (l, row) in labels.iter().zip(&cells) {
                s.push_str(&format!("{l:>lw$}"));
                for c in row {
                    s.push_str(&format!("  {c:>cw$}"));
                }
                s.push('\n');
            }
            s
        }
    }))
}

pub fn cmd_count(family: &str, alpha: &str, format: Format) -> Result<Outcome, Error> {
    let family: Family = family.parse()?;
    let alpha: Partition = alpha.parse()?;
    let count = match family {
        Family::E => cycleindex::count_structures_e(&alpha),
        Family::C => cycleindex::count_structures_c(&alpha),
        Family::K => cycleindex::count_structures_k(&alpha),
    };
    Ok(Outcome::ok(match format {
        Format::Json => render(&json!({
            "family": family.to_string(),
            "alpha": alpha.parts(),
            "n": alpha.weight(),
            "count": symfunc::json_int(&count.into()),
        })),
        Format::Text => format!("{count}\n"),
    }))
}

pub fn cmd_steggall(n: usize, format: Format, limit: usize) -> Result<Outcome, Error> {
    if n > limit {
        return Err(Error::Capacity { n, limit });
    }
    let (v, text) = if n <= DEFAULT_LIMIT {
        let report = verify_steggall_identity(n, DEFAULT_LIMIT)?;
        let mut text = format!("n = {n}\ntotal patterns: {}\n", report.total_patterns);
        for c in &report.checks {
            text.push_str(&format!(
                "  d = {:>2}  patterns {:>6}  b^({}) = {}  {}\n",
                c.d,
                c.patterns,
                c.mu,
                c.algebraic,
                if c.passed() { "ok" } else { "MISMATCH" }
            ));
        }
        text.push_str(&format!("identity check: {}\n", if report.passed() { "pass" } else { "fail" }));
        (report.to_json(), text)
    } else {
        let counts = counts_by_stabilizer(n)?;
        let total: usize = counts.values().sum();
        let by: serde_json::Map<String, Value> = counts.iter().map(|(d, c)| (d.to_string(), json!(c))).collect();
        let mut text = format!("n = {n}\ntotal patterns: {total}\n");
        for (d, c) in &counts {
            text.push_str(&format!("  d = {d:>2}  patterns {c:>6}\n"));
        }
        text.push_str("identity check: skipped (coset enumeration above limit)\n");
        (json!({ "n": n, "total": total, "by_stabilizer": by, "identity_check": "skipped" }), text)
    };
    let failed = v["identity_check"] == "fail";
    let stdout = match format {
        Format::Json => render(&v),
        Format::Text => text,
    };
    Ok(Outcome { code: if failed { EXIT_CONSISTENCY } else { EXIT_OK }, stdout, stderr: String::new() })
}

pub fn cmd_cosets(family: &str, alpha: &str, beta: &str, format: Format, limit: usize) -> Result<Outcome, Error> {
    let family: Family = family.parse()?;
    let alpha: Partition = alpha.parse()?;
    let beta: Partition = beta.parse()?;
    let d = kron_by_cosets(&alpha, &beta, family, limit)?;
    Ok(Outcome::ok(match format {
        Format::Json => {
            let cosets: Vec<Value> = d
                .cosets
                .iter()
                .map(|c| {
                    json!({
                        "representative": c.representative.to_string(),
                        "cycles": c.representative.cycle_notation(),
                        "size": c.size,
                        "mu": c.mu.parts(),
                    })
                })
                .collect();
            let mut v = d.table.to_json("cosets", Some(d.cosets.len()));
            v["cosets"] = json!(cosets);
            render(&v)
        }
        Format::Text => {
            let rw = d.cosets.iter().map(|c| c.representative.to_string().len()).max().unwrap_or(0);
            let mut s = format!("{f}[{alpha}] x {f}[{beta}]: {} double cosets\n", d.cosets.len(), f = family);
            for c in &d.cosets {
                s.push_str(&format!("  {:<rw$}  size {:>6}  mu {}\n", c.representative.to_string(), c.size, c.mu));
            }
            s.push_str(&text_terms("tally:", &table_rows(&d.table)));
            s
        }
    }))
}
