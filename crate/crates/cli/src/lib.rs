//! Command-line front end. [`run`] parses arguments, dispatches to the
//! checker in `pabisim-core` and returns the process exit code:
//! 0 equivalent/accepted/proven, 1 distinct/rejected/refuted,
//! 2 unknown, 3 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pabisim_core::algebra::{axioms_report, Lifted};
use pabisim_core::bisim::{convex_bisimilarity, strong_bisimilarity, Partition};
use pabisim_core::model::{parse_pa, ModelError};
use pabisim_core::transformer::{successors, TransformerError};
use pabisim_core::upto::{
    certificate_from_json, certificate_to_json, check_certificate, search_witness, Base, SearchOutcome,
    TechniqueConfig, UptoError, Verdict,
};
use pabisim_core::{Dist, Label, Pa, StateId};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Upto(#[from] UptoError),
    #[error(transparent)]
    Transformer(#[from] TransformerError),
}

#[derive(Parser, Debug)]
#[command(name = "pabisim", version, about = "Exact bisimilarity checks for probabilistic automata")]
struct Cli {
    /// Emit a JSON report instead of text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Strong,
    Convex,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether two states are strongly or convex bisimilar
    Check {
        #[arg(long, value_enum)]
        mode: Mode,
        file: PathBuf,
        left: String,
        right: String,
    },
    /// Check a bisimulation up-to certificate
    Certify { file: PathBuf, cert: PathBuf },
    /// Search for a certificate or a refutation of two distributions
    Search {
        file: PathBuf,
        left: String,
        right: String,
        #[arg(long, default_value_t = 32)]
        max_pairs: usize,
        #[arg(long, default_value_t = 5)]
        max_depth: usize,
        /// plain, cvx or cvx_e
        #[arg(long, default_value = "cvx_e")]
        technique: Base,
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        identity_slack: bool,
        /// Write the certificate found to this file
        #[arg(long)]
        emit_cert: Option<PathBuf>,
    },
    /// List the generators of a distribution's successor set on a label
    Successors { file: PathBuf, dist: String, label: String },
    /// Print the bisimilarity partition
    Partition {
        #[arg(long, value_enum)]
        mode: Mode,
        file: PathBuf,
    },
    /// Run the convex-algebra law checker
    Selftest {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

struct Report {
    code: i32,
    text: String,
    json: Value,
}

fn load_pa(path: &Path) -> Result<Pa, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_pa(&text).map_err(|source| CliError::Model {
        path: path.to_owned(),
        source,
    })
}

fn state<'p>(pa: &'p Pa, name: &str) -> Result<&'p StateId, CliError> {
    pa.state(name)
        .ok_or_else(|| CliError::Input(format!("unknown state `{name}`")))
}

fn label<'p>(pa: &'p Pa, name: &str) -> Result<&'p Label, CliError> {
    pa.label(name)
        .ok_or_else(|| CliError::Input(format!("unknown label `{name}`")))
}

fn dist(pa: &Pa, text: &str) -> Result<Dist, CliError> {
    let d = Dist::parse_literal(text).map_err(|e| CliError::Input(format!("bad distribution `{text}`: {e}")))?;
    if let Some(s) = d.support().find(|s| !pa.states().contains(*s)) {
        return Err(CliError::Input(format!("unknown state `{s}` in `{text}`")));
    }
    Ok(d)
}

fn partition_of(pa: &Pa, mode: Mode) -> Partition {
    match mode {
        Mode::Strong => strong_bisimilarity(pa),
        Mode::Convex => convex_bisimilarity(pa),
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Strong => "strong",
        Mode::Convex => "convex",
    }
}

fn block_strings(p: &Partition) -> Vec<Vec<String>> {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(StateId::to_string).collect())
        .collect()
}

fn block_containing(p: &Partition, s: &StateId) -> Vec<String> {
    p.blocks()
        .iter()
        .find(|b| b.contains(s))
        .map(|b| b.iter().map(StateId::to_string).collect())
        .unwrap_or_default()
}

fn cmd_check(mode: Mode, file: &Path, left: &str, right: &str) -> Result<Report, CliError> {
    let pa = load_pa(file)?;
    let (l, r) = (state(&pa, left)?, state(&pa, right)?);
    let part = partition_of(&pa, mode);
    let same = part.same_block(l, r);
    let verdict = if same { "equivalent" } else { "distinct" };
    let (bl, br) = (block_containing(&part, l), block_containing(&part, r));
    let text = format!(
        "{verdict}\n{l} in {{{}}}\n{r} in {{{}}}\n",
        bl.join(","),
        br.join(",")
    );
    Ok(Report {
        code: if same { EXIT_YES } else { EXIT_NO },
        text,
        json: json!({
            "command": "check",
            "mode": mode_name(mode),
            "verdict": verdict,
            "left": {"state": l.to_string(), "block": bl},
            "right": {"state": r.to_string(), "block": br},
        }),
    })
}

fn cmd_certify(file: &Path, cert_path: &Path) -> Result<Report, CliError> {
    let pa = load_pa(file)?;
    let raw = fs::read_to_string(cert_path).map_err(|source| CliError::Io {
        path: cert_path.to_owned(),
        source,
    })?;
    let cert = certificate_from_json(&raw)?;
    let verdict = check_certificate(&pa, &cert)?;
    let mut text = String::new();
    let mut obligations = Vec::new();
    match &verdict {
        Verdict::Accepted => text.push_str("Accepted\n"),
        Verdict::Rejected(obs) => {
            text.push_str("Rejected\n");
            for ob in obs {
                let (l, r) = &cert.pairs[ob.pair_index];
                text.push_str(&format!("  ({l}, {r}) {ob}\n"));
                obligations.push(json!({
                    "pair_index": ob.pair_index,
                    "pair": [l.to_string(), r.to_string()],
                    "label": ob.label.to_string(),
                    "spoiler": ob.spoiler,
                    "generator": ob.generator.as_ref().map(Dist::to_string),
                    "reason": ob.reason,
                }));
            }
        }
    }
    Ok(Report {
        code: if verdict.is_accepted() { EXIT_YES } else { EXIT_NO },
        text,
        json: json!({
            "command": "certify",
            "verdict": if verdict.is_accepted() { "accepted" } else { "rejected" },
            "technique": cert.config,
            "obligations": obligations,
        }),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    file: &Path,
    left: &str,
    right: &str,
    max_pairs: usize,
    max_depth: usize,
    technique: Base,
    identity_slack: bool,
    emit_cert: Option<&Path>,
) -> Result<Report, CliError> {
    let pa = load_pa(file)?;
    let (l, r) = (dist(&pa, left)?, dist(&pa, right)?);
    let config = TechniqueConfig::new(technique, identity_slack);
    let outcome = search_witness(&pa, &l, &r, max_pairs, max_depth, config)?;
    let report = match &outcome {
        SearchOutcome::Proven(cert) => {
            if let Some(path) = emit_cert {
                fs::write(path, certificate_to_json(cert) + "\n").map_err(|source| CliError::Io {
                    path: path.to_owned(),
                    source,
                })?;
            }
            let pairs: Vec<[String; 2]> = cert
                .pairs
                .iter()
                .map(|(a, b)| [a.to_string(), b.to_string()])
                .collect();
            let mut text = format!("Proven ({} pairs, technique {})\n", pairs.len(), technique.name());
            for [a, b] in &pairs {
                text.push_str(&format!("  ({a}, {b})\n"));
            }
            Report {
                code: EXIT_YES,
                text,
                json: json!({"command": "search", "verdict": "proven", "technique": config, "pairs": pairs}),
            }
        }
        SearchOutcome::Refuted(trace) => Report {
            code: EXIT_NO,
            text: format!("Refuted\n  {trace}\n"),
            json: json!({"command": "search", "verdict": "refuted", "trace": trace.to_string()}),
        },
        SearchOutcome::Unknown => Report {
            code: EXIT_UNKNOWN,
            text: "Unknown\n".to_owned(),
            json: json!({"command": "search", "verdict": "unknown"}),
        },
    };
    Ok(report)
}

fn cmd_successors(file: &Path, d: &str, a: &str) -> Result<Report, CliError> {
    let pa = load_pa(file)?;
    let xi = dist(&pa, d)?;
    let a = label(&pa, a)?;
    let lines: Vec<String> = match successors(&pa, &xi, a)? {
        Lifted::Bottom => vec!["*".to_owned()],
        Lifted::Set(p) => p.generators().iter().map(Dist::to_string).collect(),
    };
    let mut text = lines.join("\n");
    text.push('\n');
    Ok(Report {
        code: EXIT_YES,
        text,
        json: json!({"command": "successors", "source": xi.to_string(), "label": a.to_string(), "generators": lines}),
    })
}

fn cmd_partition(mode: Mode, file: &Path) -> Result<Report, CliError> {
    let pa = load_pa(file)?;
    let blocks = block_strings(&partition_of(&pa, mode));
    let mut text = String::new();
    for b in &blocks {
        text.push_str(&format!("{{{}}}\n", b.join(",")));
    }
    Ok(Report {
        code: EXIT_YES,
        text,
        json: json!({"command": "partition", "mode": mode_name(mode), "blocks": blocks}),
    })
}

fn cmd_selftest(samples: usize, seed: u64) -> Report {
    let report = axioms_report(samples, seed);
    let failures = report.total_failures();
    let mut text = report.to_string();
    text.push_str(&format!("total failures: {failures}\n"));
    Report {
        code: if failures == 0 { EXIT_YES } else { EXIT_NO },
        text,
        json: json!({"command": "selftest", "report": report, "total_failures": failures}),
    }
}

fn dispatch(command: Command) -> Result<Report, CliError> {
    match command {
        Command::Check { mode, file, left, right } => cmd_check(mode, &file, &left, &right),
        Command::Certify { file, cert } => cmd_certify(&file, &cert),
        Command::Search {
            file,
            left,
            right,
            max_pairs,
            max_depth,
            technique,
            identity_slack,
            emit_cert,
        } => cmd_search(
            &file,
            &left,
            &right,
            max_pairs,
            max_depth,
            technique,
            identity_slack,
            emit_cert.as_deref(),
        ),
        Command::Successors { file, dist, label } => cmd_successors(&file, &dist, &label),
        Command::Partition { mode, file } => cmd_partition(mode, &file),
        Command::Selftest { samples, seed } => Ok(cmd_selftest(samples, seed)),
    }
}

/// Runs one invocation; the report goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_YES };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(report) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&report.json).expect("json report") + "\n"
            } else {
                report.text
            };
            let _ = out.write_all(body.as_bytes());
            report.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
