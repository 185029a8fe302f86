//! Command-line front end: configuration, dispatch, reports and exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O or internal error |
//! | 2 | configuration error |
//! | 3 | node verification failed |
//! | 4 | numerical refutation |
//! | 5 | invariance refutation |
//! | 6 | even-eight refutation |
//! | 7 | effectivity refutation |
//! | 8 | certificate integrity error |
//! | 9 | certificate is not certified |
//! | 10 | a lattice self-check failed |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::abstractlattice::horikawa_report;
use crate::cohomology::{certify_ulrich, descend_to_enriques, CohomologyError, MRecipe, Refutation, UlrichCertificate, Verdict};
use crate::corpus::{self, Entry};
use crate::exactalg::{PrimeField, Rationals};
use crate::kummer::{parse_root, verify_sixteen_nodes, Genus2Curve, KummerError, KummerQuartic, NodeLabel};
use crate::piclattice::{
    build_theta_star, default_generators, even_eight_sweep, incidence_configuration, is_invariant, labels_of_mask,
    polarization, three_l_minus, trope, EvenEightTester, TropeLabel, DEFAULT_M_NODES,
};

pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NODES: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const INVARIANCE: i32 = 5;
    pub const EVEN_EIGHT: i32 = 6;
    pub const EFFECTIVITY: i32 = 7;
    pub const INTEGRITY: i32 = 8;
    pub const UNCERTIFIED: i32 = 9;
    pub const LATTICE: i32 = 10;
}

pub fn refutation_exit_code(r: Refutation) -> i32 {
    match r {
        Refutation::NodeVerification => exit::NODES,
        Refutation::Numerical => exit::NUMERICAL,
        Refutation::Invariance => exit::INVARIANCE,
        Refutation::EvenEight => exit::EVEN_EIGHT,
        Refutation::Effectivity => exit::EFFECTIVITY,
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("certificate integrity: {0}")]
    Integrity(String),
    #[error("{0}")]
    Uncertified(String),
    #[error("node verification: {0}")]
    Nodes(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } | CliError::Internal(_) => exit::IO,
            CliError::Integrity(_) => exit::INTEGRITY,
            CliError::Uncertified(_) => exit::UNCERTIFIED,
            CliError::Nodes(_) => exit::NODES,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ulrich", version, about = "Certify an Ulrich line bundle on a Kummer quartic covering an Enriques surface")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "paper_defaults")]
    pub config: Option<PathBuf>,
    /// Use the built-in degree-8 Kummer configuration.
    #[arg(long, global = true)]
    pub paper_defaults: bool,
    /// Override the prime of the coefficient field.
    #[arg(long, global = true)]
    pub prime: Option<u64>,
    /// Where to write the JSON report.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute and verify the sixteen nodes.
    Nodes,
    /// Run the full Ulrich certification.
    Certify,
    /// Lattice checks that need no geometric input.
    Lattice {
        #[arg(value_enum)]
        check: LatticeCheck,
    },
    /// Enriques-side report from a certificate file.
    Descend { certificate: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatticeCheck {
    ThetaCheck,
    Incidence,
    EvenEights,
    Horikawa,
}

/// The built-in configuration.
pub const DEFAULT_CONFIG: &str = r#"[field]
prime = 32003

[curve]
roots = ["1", "-1", "2", "-2", "3", "-3"]

[quartic]
corpus = "kummer-quartic"

[ulrich]
nodes = ["0", "16", "26", "36", "46", "56", "12", "13", "14", "15", "24", "35"]
"#;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    field: Option<FieldSection>,
    curve: Option<CurveSection>,
    quartic: Option<QuarticSection>,
    ulrich: Option<UlrichSection>,
    output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldSection {
    prime: u64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RootLiteral {
    Int(i64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveSection {
    roots: Vec<RootLiteral>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuarticSection {
    corpus: Option<String>,
    inline: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UlrichSection {
    nodes: Option<Vec<String>>,
    class: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuarticSource {
    Corpus(String),
    Inline(String),
}

/// A validated run configuration. Sections missing from a file take the
/// built-in values.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub prime: u64,
    pub roots: Vec<BigRational>,
    pub quartic: QuarticSource,
    pub recipe: MRecipe,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn paper_defaults() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("built-in configuration is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let defaults: ConfigFile = toml::from_str(DEFAULT_CONFIG).expect("built-in configuration parses");
        let prime = file.field.or(defaults.field).expect("default").prime;
        PrimeField::new(prime).map_err(|e| CliError::Config(e.to_string()))?;

        let curve = file.curve.or(defaults.curve).expect("default");
        let roots = curve
            .roots
            .iter()
            .map(|r| match r {
                RootLiteral::Int(n) => Ok(BigRational::from_integer((*n).into())),
                RootLiteral::Text(t) => parse_root(t),
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Genus2Curve::new(Rationals, roots.clone()).map_err(|e| CliError::Config(e.to_string()))?;

        let q = file.quartic.or(defaults.quartic).expect("default");
        let quartic = match (q.corpus, q.inline) {
            (Some(name), None) => {
                if Entry::from_name(&name).ok() != Some(Entry::KummerQuartic) {
                    return Err(CliError::Config(format!("corpus entry {name:?} is not a quartic")));
                }
                QuarticSource::Corpus(name)
            }
            (None, Some(text)) => QuarticSource::Inline(text),
            _ => return Err(CliError::Config("[quartic] needs exactly one of `corpus` or `inline`".into())),
        };

        let u = file.ulrich.or(defaults.ulrich).expect("default");
        let recipe = match (u.nodes, u.class) {
            (Some(labels), None) => {
                let labels = labels
                    .iter()
                    .map(|l| l.parse::<NodeLabel>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let mut distinct = labels.clone();
                distinct.sort_unstable();
                distinct.dedup();
                if labels.len() != 12 || distinct.len() != 12 {
                    return Err(CliError::Config(format!(
                        "[ulrich] nodes must list 12 distinct node labels, got {} ({} distinct)",
                        labels.len(),
                        distinct.len()
                    )));
                }
                MRecipe::Nodes(labels)
            }
            (None, Some(expr)) => MRecipe::Class(expr.parse().map_err(|e: crate::piclattice::PicError| CliError::Config(e.to_string()))?),
            _ => return Err(CliError::Config("[ulrich] needs exactly one of `nodes` or `class`".into())),
        };

        Ok(RunConfig {
            prime,
            roots,
            quartic,
            recipe,
            output: file.output.and_then(|o| o.path),
        })
    }

    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.prime).expect("validated")
    }

    pub fn curve(&self) -> Genus2Curve<Rationals> {
        Genus2Curve::new(Rationals, self.roots.clone()).expect("validated")
    }

    pub fn load_quartic(&self) -> Result<KummerQuartic, CliError> {
        let text = match &self.quartic {
            QuarticSource::Corpus(_) => corpus::load(Entry::KummerQuartic).map_err(|e| CliError::Config(e.to_string()))?,
            QuarticSource::Inline(t) => t.clone(),
        };
        KummerQuartic::parse(self.field(), &text).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, cli.paper_defaults) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            RunConfig::from_toml(&text)?
        }
        (None, true) => RunConfig::paper_defaults(),
        (None, false) => return Err(CliError::Config("no configuration: pass --config <path> or --paper-defaults".into())),
    };
    if let Some(p) = cli.prime {
        PrimeField::new(p).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.prime = p;
    }
    Ok(cfg)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
        say(out, &format!("report written to {}", path.display()));
    }
    Ok(())
}

fn say(out: &mut dyn Write, line: &str) {
    // A closed stdout is not worth failing a computation over.
    let _ = writeln!(out, "{line}");
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_nodes(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_config(cli)?;
    let quartic = cfg.load_quartic()?;
    let curve = cfg.curve().reduce(cfg.field()).map_err(|e| match e {
        KummerError::RepeatedRoots(..) => CliError::Nodes(format!("{e} modulo {}", cfg.prime)),
        other => CliError::Nodes(other.to_string()),
    })?;
    let report = verify_sixteen_nodes(&quartic, &curve).map_err(|e| CliError::Nodes(e.to_string()))?;
    say(out, &format!("nodes over F_{}", cfg.prime));
    for n in &report.nodes {
        say(out, &format!("{:>3}  {:<24} singular={}", n.label, n.point, n.singular));
    }
    say(
        out,
        &format!(
            "singular locus: codim {} degree {}",
            report.singular_locus.codim.map_or("-".into(), |c| c.to_string()),
            report.singular_locus.degree.map_or("-".into(), |d| d.to_string())
        ),
    );
    say(out, &format!("pairwise distinct: {}", report.pairwise_distinct));
    let path = cli.out.clone().or(cfg.output.clone());
    write_json(path.as_deref(), &report, out)?;
    if report.passed {
        say(out, "node verification: PASS");
        Ok(exit::OK)
    } else {
        let why = report.first_failure.unwrap_or_default();
        say(out, &format!("node verification: FAIL ({why})"));
        Ok(exit::NODES)
    }
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn cmd_certify(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = resolve_config(cli)?;
    let quartic = cfg.load_quartic()?;
    let body = match certify_ulrich(&cfg.curve(), &quartic, &cfg.recipe) {
        Ok(b) => b,
        Err(CohomologyError::Kummer(e)) => return Err(CliError::Nodes(e.to_string())),
        Err(e @ (CohomologyError::UnsupportedShape(_) | CohomologyError::Cardinality { .. })) => {
            return Err(CliError::Config(e.to_string()))
        }
        Err(e) => return Err(CliError::Internal(e.to_string())),
    };
    say(out, &format!("M = {}", body.m));
    say(out, &format!("H_X = {}", body.h_x));
    for c in &body.checks {
        say(out, &format!("{} {:<28} {}", mark(c.pass), c.name, summarize(&c.value)));
    }
    let cert = UlrichCertificate::new(body, now_unix());
    let path = cli.out.clone().or(cfg.output.clone()).unwrap_or_else(|| PathBuf::from("certificate.json"));
    write_json(Some(&path), &cert, out)?;
    match &cert.body.verdict {
        Verdict::Certified => {
            say(out, "verdict: certified");
            Ok(exit::OK)
        }
        Verdict::Refuted { reason, failed_check } => {
            say(out, &format!("verdict: refuted ({reason}: {failed_check})"));
            Ok(refutation_exit_code(*reason))
        }
    }
}

fn summarize(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Object(o) if o.contains_key("h0") => format!("h0 = {}", o["h0"]),
        serde_json::Value::Object(o) if o.contains_key("codim") => {
            format!("codim {} degree {}", o["codim"], o["degree"])
        }
        other => other.to_string(),
    }
}

fn cmd_descend(cli: &Cli, path: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cert: UlrichCertificate =
        serde_json::from_str(&text).map_err(|e| CliError::Integrity(format!("unreadable certificate: {e}")))?;
    if !cert.integrity_ok() {
        return Err(CliError::Integrity(format!(
            "body digest {} does not match header {}",
            cert.body.digest(),
            cert.header.body_sha256
        )));
    }
    let report = descend_to_enriques(&cert.body).map_err(|e| CliError::Uncertified(e.to_string()))?;
    say(out, &report.to_string());
    write_json(cli.out.as_deref(), &report, out)?;
    Ok(exit::OK)
}

fn cmd_lattice(cli: &Cli, check: LatticeCheck, out: &mut dyn Write) -> Result<i32, CliError> {
    let (ok, value) = match check {
        LatticeCheck::ThetaCheck => {
            let theta = build_theta_star();
            let inv = theta.involution_defects();
            let iso = theta.isometry_defects();
            let tropes_ok = TropeLabel::all()
                .into_iter()
                .all(|t| trope(t).square() == BigRational::from_integer((-2).into()));
            let m = three_l_minus(&DEFAULT_M_NODES);
            let h_inv = is_invariant(&theta, &polarization());
            let m_inv = is_invariant(&theta, &m);
            say(out, &format!("{} theta*^2 = id ({} defects)", mark(inv.is_empty()), inv.len()));
            say(out, &format!("{} isometry on 153 basis pairs ({} defects)", mark(iso.is_empty()), iso.len()));
            say(out, &format!("{} all 16 tropes have square -2", mark(tropes_ok)));
            say(out, &format!("{} theta* H_X = H_X", mark(h_inv)));
            say(out, &format!("{} theta* M = M for M = {m}", mark(m_inv)));
            let ok = inv.is_empty() && iso.is_empty() && tropes_ok && h_inv && m_inv;
            let matrix: Vec<Vec<String>> =
                theta.matrix().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
            (
                ok,
                json!({
                    "involution_defects": inv,
                    "isometry_defects": iso,
                    "tropes_square_minus_two": tropes_ok,
                    "h_invariant": h_inv,
                    "m_invariant": m_inv,
                    "matrix": matrix,
                }),
            )
        }
        LatticeCheck::Incidence => {
            let table = incidence_configuration();
            let header: Vec<String> = TropeLabel::all().iter().map(ToString::to_string).collect();
            say(out, &format!("{:>4} {}", "", header.iter().map(|h| format!("{h:>5}")).collect::<String>()));
            for (n, row) in NodeLabel::all().iter().zip(&table.entries) {
                let cells: String = row.iter().map(|x| format!("{x:>5}")).collect();
                say(out, &format!("{:>4} {cells}  | {}", format!("E{n}"), row.iter().sum::<i64>()));
            }
            say(out, &format!("column sums: {:?}", table.column_sums()));
            let ok = table.is_16_6();
            say(out, &format!("{} (16)_6 configuration", mark(ok)));
            (
                ok,
                json!({ "nodes": NodeLabel::all().iter().map(ToString::to_string).collect::<Vec<_>>(),
                        "tropes": header, "entries": table.entries, "is_16_6": ok }),
            )
        }
        LatticeCheck::EvenEights => {
            let tester = EvenEightTester::new(&default_generators()).map_err(|e| CliError::Internal(e.to_string()))?;
            let sweep = even_eight_sweep(&tester).map_err(|e| CliError::Internal(e.to_string()))?;
            let eights: Vec<Vec<String>> = sweep
                .positives
                .iter()
                .map(|&m| labels_of_mask(m).iter().map(ToString::to_string).collect())
                .collect();
            for e in &eights {
                say(out, &format!("even eight: {}", e.join(" ")));
            }
            say(out, &format!("subsets checked: {}", sweep.subsets_checked));
            say(out, &format!("even eights: {}", sweep.positives.len()));
            let ok = sweep.complement_closed();
            say(out, &format!("{} closed under complement", mark(ok)));
            (ok, json!({ "subsets_checked": sweep.subsets_checked, "even_eights": eights, "complement_closed": ok }))
        }
        LatticeCheck::Horikawa => {
            let r = horikawa_report().map_err(|e| CliError::Internal(e.to_string()))?;
            say(out, &format!("ambient: rank {} det {} signature {}", r.ambient_rank, r.ambient_determinant, r.ambient_signature));
            say(out, &format!("invariant sublattice: rank {} det {} signature {}", r.rank, r.determinant, r.signature));
            say(out, &format!("all Gram entries even: {}", r.all_entries_even));
            say(out, &format!("primitive: {}  model U(2)+E8(-2) matches: {}", r.primitive, r.model.passed()));
            let ok = r.passed();
            say(out, &format!("{} Horikawa block", mark(ok)));
            (ok, serde_json::to_value(&r).map_err(|e| CliError::Internal(e.to_string()))?)
        }
    };
    write_json(cli.out.as_deref(), &value, out)?;
    Ok(if ok { exit::OK } else { exit::LATTICE })
}

/// Runs a parsed command line, writing the summary to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Nodes => cmd_nodes(cli, out),
        Command::Certify => cmd_certify(cli, out),
        Command::Lattice { check } => cmd_lattice(cli, *check, out),
        Command::Descend { certificate } => cmd_descend(cli, certificate, out),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return exit::CONFIG;
            }
            let _ = write!(out, "{e}");
            return exit::OK;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ulrich").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn default_config_round_trips() {
        let cfg = RunConfig::paper_defaults();
        assert_eq!(cfg.prime, 32003);
        assert_eq!(cfg.recipe, MRecipe::Nodes(DEFAULT_M_NODES.to_vec()));
        assert_eq!(cfg.quartic, QuarticSource::Corpus("kummer-quartic".into()));
    }

    #[test]
    fn config_validation() {
        let bad = [
            "[field]\nprime = 32004\n",
            "[curve]\nroots = [1, 1, 2, 3, 4, 5]\n",
            "[curve]\nroots = [1, 2, 3]\n",
            "[curve]\nroots = [\"1/0\", 2, 3, 4, 5, 6]\n",
            "[ulrich]\nnodes = [\"0\", \"12\"]\n",
            "[ulrich]\nnodes = [\"0\",\"0\",\"26\",\"36\",\"46\",\"56\",\"12\",\"13\",\"14\",\"15\",\"24\",\"35\"]\n",
            "[ulrich]\nclass = \"2L +\"\n",
            "[ulrich]\n",
            "[quartic]\ncorpus = \"u\"\n",
            "[surprise]\nx = 1\n",
        ];
        for text in bad {
            assert!(matches!(RunConfig::from_toml(text), Err(CliError::Config(_))), "{text}");
        }
        let cfg = RunConfig::from_toml("[curve]\nroots = [\"1/2\", -1, 2, -2, 3, -3]\n").unwrap();
        assert_eq!(cfg.roots[0], BigRational::new(1.into(), 2.into()));
        let cfg = RunConfig::from_toml("[ulrich]\nclass = \"2L - 1/2(E13+E14+E15+E16+E23+E24+E25+E26)\"\n").unwrap();
        assert!(matches!(cfg.recipe, MRecipe::Class(_)));
    }

    #[test]
    fn missing_config_is_a_config_error() {
        let (code, _, err) = run_args(&["nodes"]);
        assert_eq!(code, exit::CONFIG);
        assert!(err.contains("--paper-defaults"));
    }

    #[test]
    fn nodes_command_prints_published_points() {
        let (code, out, _) = run_args(&["nodes", "--paper-defaults"]);
        assert_eq!(code, exit::OK);
        assert!(out.contains(" 23  (1:1:-2:-44)"));
        assert!(out.contains("  0  (0:0:0:1)"));
    }

    #[test]
    fn lattice_commands() {
        for check in ["theta-check", "incidence", "even-eights", "horikawa"] {
            let (code, out, _) = run_args(&["lattice", check]);
            assert_eq!(code, exit::OK, "{check}: {out}");
        }
    }
}
