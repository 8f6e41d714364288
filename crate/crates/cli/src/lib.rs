//! Batch front end: one subcommand per construction or audit.
//!
//! Exit codes: 0 on success, 1 when a mathematical finding is reported
//! (a rejected structure, a counterexample, a failed amalgam or audit),
//! 2 for unusable input.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use multitree::amalgam::amalgamate;
use multitree::document::{validate_document, Document, DocumentError};
use multitree::dot::export_dot;
use multitree::extension::{
    classify_extension, extend_type1, extend_type2, good_filtration, ExtensionError,
};
use multitree::generator::{check_extension_property, generate, GenConfig, GenerateError, StepOutcome};
use multitree::geometry::{apartment, half_apartment};
use multitree::search::{search_counterexample, Lemma};
use multitree::validate::{validate, ValidationConfig, ValidationReport, Violation};
use multitree::{AmalgamError, WideMultiTree};

/// What a command produced: exit code, human-readable text and the path the
/// JSON report was written to, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub report: String,
    pub json_report: Option<PathBuf>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDING: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "multitree", version, about = "Construct and audit finite multiple-tree fragments")]
struct Cli {
    /// Also write a machine-readable JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the four axioms and list every violation.
    Validate {
        file: PathBuf,
        #[arg(long = "zero-guard", value_enum, default_value = "on")]
        zero_guard: Switch,
        #[arg(long = "allow-missing-zero")]
        allow_missing_zero: bool,
    },
    /// Apply one elementary good extension.
    Extend {
        file: PathBuf,
        #[arg(long = "type", value_parser = clap::value_parser!(u8).range(1..=2))]
        kind: u8,
        #[arg(long)]
        tree: usize,
        #[arg(long)]
        attach: String,
        #[arg(long)]
        witness: Option<String>,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// List the descriptors realizing a one-point enlargement.
    Classify { base: PathBuf, ext: PathBuf },
    /// Decompose a superstructure into elementary good extensions.
    Filtration { base: PathBuf, sup: PathBuf },
    /// Amalgamate B and C over A.
    Amalgamate {
        a: PathBuf,
        b: PathBuf,
        c: PathBuf,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Grow a bounded stage of the limit structure.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "audit-bound", default_value_t = GenConfig::DEFAULT_AUDIT_BOUND)]
        audit_bound: usize,
        #[arg(long = "max-tree-size")]
        max_tree_size: Option<usize>,
        /// Write the run log (a JSON array of steps) here.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(short = 'o')]
        out: PathBuf,
    },
    /// Check the bounded extension property.
    Audit {
        file: PathBuf,
        #[arg(long = "size-bound")]
        size_bound: usize,
    },
    /// Half apartments and apartments at a zero tuple.
    Apartments {
        file: PathBuf,
        #[arg(long)]
        base: String,
        #[arg(long)]
        tree: usize,
        #[arg(long)]
        y: Option<String>,
        #[arg(long, requires = "y")]
        z: Option<String>,
    },
    /// Bounded breadth-first search for counterexamples.
    SearchCounterexample {
        #[arg(long, value_parser = parse_lemma)]
        lemma: Lemma,
        #[arg(long = "max-size")]
        max_size: usize,
        #[arg(long = "zero-guard", value_enum, default_value = "on")]
        zero_guard: Switch,
    },
    /// Export as Graphviz DOT or canonical JSON.
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long = "profile-base")]
        profile_base: Option<String>,
        #[arg(short = 'o')]
        out: Option<PathBuf>,
    },
}

fn parse_lemma(s: &str) -> Result<Lemma, String> {
    s.parse()
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: i32,
    text: String,
    json: Option<Value>,
}

fn input_error(text: impl Into<String>) -> Failure {
    let mut text = text.into();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    Failure {
        code: EXIT_INPUT,
        text,
        json: None,
    }
}

struct Success {
    code: i32,
    text: String,
    json: Value,
}

fn done(code: i32, text: String, json: impl Serialize) -> Result<Success, Failure> {
    Ok(Success {
        code,
        text,
        json: serde_json::to_value(json).expect("reports serialize"),
    })
}

/// Parses and runs one command line (the first item is the program name).
pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return CommandOutcome {
                code,
                report: e.render().to_string(),
                json_report: None,
            };
        }
    };
    let (code, mut text, json) = match execute(cli.command) {
        Ok(s) => (s.code, s.text, Some(s.json)),
        Err(f) => (f.code, f.text, f.json),
    };
    let mut json_report = None;
    if let (Some(path), Some(value)) = (cli.report, json) {
        let body = serde_json::to_string_pretty(&value).expect("reports serialize") + "\n";
        match fs::write(&path, body) {
            Ok(()) => json_report = Some(path),
            Err(e) => {
                let _ = writeln!(text, "cannot write report {}: {e}", path.display());
                return CommandOutcome {
                    code: EXIT_INPUT,
                    report: text,
                    json_report: None,
                };
            }
        }
    }
    CommandOutcome {
        code,
        report: text,
        json_report,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<WideMultiTree, Failure> {
    let text = read(path)?;
    let doc = Document::from_json(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    doc.to_multitree()
        .map_err(|e| input_error(format!("{}: {}", path.display(), DocumentError::from(e))))
}

fn names(list: &str) -> Vec<String> {
    list.split(',').map(|s| s.trim().to_string()).collect()
}

fn guard(s: Switch) -> bool {
    s == Switch::On
}

fn describe_violation(v: &Violation) -> String {
    match v {
        Violation::Structural { reason } => format!("structure: {reason}"),
        Violation::NoZeroTuple => "axiom 1: no tuple has codistance 0".into(),
        Violation::NotUnitStep { tuple, tree, neighbor, from, to } => format!(
            "axiom 2 at ({}): tree {tree} neighbor {neighbor} moves {from} to {to}",
            tuple.join(",")
        ),
        Violation::MultipleRaisers { tuple, tree, value, neighbors } => format!(
            "axiom 3 at ({}) = {value}: tree {tree} raisers {}",
            tuple.join(","),
            neighbors.join(",")
        ),
        Violation::DoubleRaise { tuple, trees, neighbors, value, found } => format!(
            "axiom 4 at ({}) = {value}: trees {},{} neighbors {},{} give {found}, expected {}",
            tuple.join(","),
            trees[0],
            trees[1],
            neighbors[0],
            neighbors[1],
            value + 2
        ),
    }
}

fn describe_report(r: &ValidationReport) -> String {
    let mut out = String::new();
    if r.accepted() {
        out.push_str("accept\n");
    } else {
        let _ = writeln!(out, "reject: {} violation(s)", r.violations.len());
        for v in &r.violations {
            let _ = writeln!(out, "  {}", describe_violation(v));
        }
    }
    out
}

fn json_list<T: Serialize>(items: &[T]) -> String {
    serde_json::to_string_pretty(items).expect("serializes") + "\n"
}

fn extension_failure(e: ExtensionError) -> Failure {
    match e {
        ExtensionError::FiltrationStuck { .. } => Failure {
            code: EXIT_FINDING,
            text: format!("{e}\n"),
            json: Some(json!({ "error": e.to_string() })),
        },
        other => input_error(other.to_string()),
    }
}

fn execute(cmd: Command) -> Result<Success, Failure> {
    match cmd {
        Command::Validate { file, zero_guard, allow_missing_zero } => {
            let text = read(&file)?;
            let doc = Document::from_json(&text).map_err(|e| input_error(format!("{}: {e}", file.display())))?;
            let config = ValidationConfig {
                zero_guard: guard(zero_guard),
                require_zero_tuple: !allow_missing_zero,
            };
            let report = validate_document(&doc, config);
            let code = if report.accepted() { EXIT_OK } else { EXIT_FINDING };
            done(code, describe_report(&report), &report)
        }
        Command::Extend { file, kind, tree, attach, witness, out } => {
            let a = load(&file)?;
            let (b, desc) = match (kind, witness) {
                (1, None) => extend_type1(&a, tree, &attach),
                (1, Some(_)) => return Err(input_error("--witness applies to --type 2 only")),
                (_, None) => return Err(input_error("--type 2 needs --witness")),
                (_, Some(w)) => {
                    let w = names(&w);
                    if tree == 0 || tree > w.len() || w[tree - 1] != attach {
                        return Err(input_error(format!(
                            "--attach {attach} differs from witness coordinate {tree}"
                        )));
                    }
                    extend_type2(&a, &w, tree)
                }
            }
            .map_err(|e| input_error(e.to_string()))?;
            write(&out, &Document::from_multitree(&b).to_json())?;
            let text = serde_json::to_string_pretty(&desc).expect("serializes") + "\n";
            done(EXIT_OK, text, &desc)
        }
        Command::Classify { base, ext } => {
            let (a, b) = (load(&base)?, load(&ext)?);
            let found = classify_extension(&a, &b).map_err(|e| input_error(e.to_string()))?;
            let code = if found.is_empty() { EXIT_FINDING } else { EXIT_OK };
            let mut text = json_list(&found);
            if found.is_empty() {
                text.push_str("not an elementary good extension\n");
            }
            done(code, text, &found)
        }
        Command::Filtration { base, sup } => {
            let (a, b) = (load(&base)?, load(&sup)?);
            let steps = good_filtration(&a, &b).map_err(extension_failure)?;
            done(EXIT_OK, json_list(&steps), &steps)
        }
        Command::Amalgamate { a, b, c, out } => {
            let (a, b, c) = (load(&a)?, load(&b)?, load(&c)?);
            match amalgamate(&a, &b, &c) {
                Ok(am) => {
                    write(&out, &Document::from_multitree(&am.structure).to_json())?;
                    let value = json!({
                        "from_b": am.from_b,
                        "from_c": am.from_c,
                        "cases": am.cases.iter().map(|c| c.letter().to_string()).collect::<Vec<_>>(),
                        "identified": am.identified,
                        "sizes": am.structure.sizes(),
                    });
                    let text = serde_json::to_string_pretty(&value).expect("serializes") + "\n";
                    done(EXIT_OK, text, value)
                }
                Err(e) => Err(amalgam_failure(e)),
            }
        }
        Command::Generate { n, steps, seed, audit_bound, max_tree_size, log, out } => {
            let mut cfg = GenConfig::new(n, steps, seed);
            cfg.audit_bound = audit_bound;
            cfg.max_tree_size = max_tree_size;
            match generate::<u64>(&cfg) {
                Ok(g) => {
                    write(&out, &Document::from_multitree(&g.structure).to_json())?;
                    if let Some(path) = &log {
                        write(path, &json_list(&g.log))?;
                    }
                    let count = |o: StepOutcome| g.log.iter().filter(|r| r.outcome == o).count();
                    let value = json!({
                        "config": cfg,
                        "sizes": g.structure.sizes(),
                        "realized": count(StepOutcome::Realized),
                        "discharged": count(StepOutcome::Discharged),
                        "deferred": count(StepOutcome::Deferred),
                        "pending": g.pending,
                        "processed_witnesses": g.processed.len(),
                    });
                    let text = format!(
                        "seed {seed}: {} steps, sizes {:?}, realized {}, discharged {}, deferred {}, pending {}\n",
                        g.log.len(),
                        g.structure.sizes(),
                        count(StepOutcome::Realized),
                        count(StepOutcome::Discharged),
                        count(StepOutcome::Deferred),
                        g.pending
                    );
                    done(EXIT_OK, text, value)
                }
                Err(GenerateError::Config(e)) => Err(input_error(e.to_string())),
                Err(e @ GenerateError::Aborted { .. }) => {
                    let GenerateError::Aborted { report, log: partial, .. } = &e else { unreachable!() };
                    if let Some(path) = &log {
                        write(path, &json_list(partial))?;
                    }
                    let mut text = format!("seed {seed}: generation aborted: {e}\n");
                    if let Some(r) = report {
                        text.push_str(&describe_report(r));
                    }
                    Err(Failure {
                        code: EXIT_FINDING,
                        text,
                        json: Some(json!({ "seed": seed, "error": e.to_string(), "report": report, "log": partial })),
                    })
                }
            }
        }
        Command::Audit { file, size_bound } => {
            let m = load(&file)?;
            let report = validate(&m, ValidationConfig::default());
            if !report.accepted() {
                return Err(Failure {
                    code: EXIT_FINDING,
                    text: describe_report(&report),
                    json: Some(serde_json::to_value(&report).expect("serializes")),
                });
            }
            let audit = check_extension_property(&m, size_bound);
            let mut text = format!(
                "bound {}: {} substructures, {} extensions realized, {} missing, {} germ type(s)\n",
                audit.bound,
                audit.substructures,
                audit.realized,
                audit.missing.len(),
                audit.germ_types.len()
            );
            for miss in audit.missing.iter().take(10) {
                let _ = writeln!(
                    text,
                    "  missing over {}: {}",
                    miss.fingerprint,
                    serde_json::to_string(&miss.descriptor).expect("serializes")
                );
            }
            if audit.missing.len() > 10 {
                let _ = writeln!(text, "  ... {} more", audit.missing.len() - 10);
            }
            let code = if audit.holds() { EXIT_OK } else { EXIT_FINDING };
            done(code, text, &audit)
        }
        Command::Apartments { file, base, tree, y, z } => {
            let m = load(&file)?;
            let base = names(&base);
            let geo = |e: multitree::geometry::GeometryError| input_error(e.to_string());
            let value = match (y, z) {
                (Some(y), Some(z)) => serde_json::to_value(apartment(&m, &base, tree, &y, &z).map_err(geo)?),
                (Some(y), None) => serde_json::to_value(half_apartment(&m, &base, tree, &y).map_err(geo)?),
                (None, _) => {
                    if tree == 0 || tree > m.n() {
                        return Err(input_error(format!("tree index {tree} out of range 1..={}", m.n())));
                    }
                    let t = m.tuple(&base).map_err(|e| input_error(e.to_string()))?;
                    let slot = tree - 1;
                    let all = m
                        .tree(slot)
                        .neighbors(t[slot])
                        .iter()
                        .map(|&y| half_apartment(&m, &base, tree, m.tree(slot).name(y)))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(geo)?;
                    serde_json::to_value(all)
                }
            }
            .expect("serializes");
            let text = serde_json::to_string_pretty(&value).expect("serializes") + "\n";
            done(EXIT_OK, text, value)
        }
        Command::SearchCounterexample { lemma, max_size, zero_guard } => {
            let config = ValidationConfig {
                zero_guard: guard(zero_guard),
                require_zero_tuple: true,
            };
            let report = search_counterexample(lemma, max_size, config);
            let found = report.counterexamples.len();
            let mut text = format!(
                "{} up to {} vertices (zero guard {}): explored {} types, {} counterexample(s)\n",
                lemma.as_str(),
                max_size,
                if config.zero_guard { "on" } else { "off" },
                report.explored,
                found
            );
            if let Some(first) = report.counterexamples.first() {
                let _ = writeln!(text, "first: {}", serde_json::to_string(&first.certificate).expect("serializes"));
                text.push_str(&first.structure.to_json());
            }
            let code = if found > 0 { EXIT_FINDING } else { EXIT_OK };
            done(code, text, &report)
        }
        Command::Export { file, format, profile_base, out } => {
            let m = load(&file)?;
            let body = match format {
                Format::Json => {
                    if profile_base.is_some() {
                        return Err(input_error("--profile-base applies to --format dot only"));
                    }
                    Document::from_multitree(&m).to_json()
                }
                Format::Dot => {
                    let base = profile_base.as_deref().map(names);
                    export_dot(&m, base.as_deref()).map_err(|e| input_error(format!("--profile-base: {e}")))?
                }
            };
            match out {
                Some(path) => {
                    write(&path, &body)?;
                    done(EXIT_OK, format!("wrote {}\n", path.display()), json!({ "output": path }))
                }
                None => done(EXIT_OK, body, json!({ "output": Value::Null })),
            }
        }
    }
}

fn amalgam_failure(e: AmalgamError) -> Failure {
    let mut inner = &e;
    while let AmalgamError::Step { source, .. } = inner {
        inner = source;
    }
    let finding = matches!(
        inner,
        AmalgamError::Failure { .. }
            | AmalgamError::LostGoodness
            | AmalgamError::Extension(ExtensionError::FiltrationStuck { .. })
    );
    let mut text = format!("amalgamation failed: {e}\n");
    let mut value = json!({ "error": e.to_string() });
    if let AmalgamError::Failure { report, case } = inner {
        text.push_str(&describe_report(report));
        value = json!({ "error": e.to_string(), "case": case, "report": report });
    }
    Failure {
        code: if finding { EXIT_FINDING } else { EXIT_INPUT },
        text,
        json: Some(value),
    }
}
