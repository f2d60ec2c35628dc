//! Command-line front end.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use witness_resolve::linearizer::witness_residual;
use witness_resolve::session::journal_to_jsonl;
use witness_resolve::{
    analyze, detect_maximal_well_parts, detect_minimal_over_parts, greedy_over_baseline,
    greedy_well_baseline, parse_model, Error, Model, Phase, Session, Verdict,
};

use crate::report::{
    summary, CompareReport, DetectReport, Parts, ResolveReport, StateReport, ValidateReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNRESOLVED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "witness-resolve",
    version,
    about = "Find and resolve over/under-constraint in constraint models"
)]
pub struct Cli {
    /// Print machine-readable JSON reports.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the document schema and that the geometry satisfies every constraint.
    Validate { model: PathBuf },
    /// Print the constraint state.
    Analyze { model: PathBuf },
    /// Print minimal over-constrained or maximal well-constrained parts.
    Detect { model: PathBuf },
    /// Resolve interactively, or automatically with --auto.
    Resolve {
        model: PathBuf,
        #[arg(long)]
        auto: bool,
        /// Where to write the resolved document.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the decision journal (JSON lines).
        #[arg(long)]
        journal: Option<PathBuf>,
    },
    /// Compare the detectors with the greedy baselines.
    Compare { model: PathBuf },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "WITNESS_RESOLVE_PORT", default_value_t = 8080)]
        port: u16,
    },
}

struct Io<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    json: bool,
}

impl Io<'_> {
    fn emit<T: Serialize>(
        &mut self,
        report: &T,
        text: impl FnOnce() -> String,
    ) -> std::io::Result<()> {
        if self.json {
            writeln!(
                self.out,
                "{}",
                serde_json::to_string_pretty(report).expect("reports serialise")
            )
        } else {
            writeln!(self.out, "{}", text())
        }
    }
}

enum Failure {
    Invalid(String),
    Unresolved(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn invalid(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Invalid(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Model, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(path, e))?;
    parse_model(&text).map_err(|e| invalid(path, e))
}

fn checked(path: &Path) -> Result<(Model, witness_resolve::Analysis), Failure> {
    let m = load(path)?;
    let a = analyze(&m).map_err(|e| invalid(path, e))?;
    Ok((m, a))
}

fn list(parts: &[Vec<String>]) -> String {
    parts
        .iter()
        .map(|p| format!("  {{{}}}", p.join(", ")))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let mut io = Io {
        input,
        out,
        err,
        json: cli.json,
    };
    match dispatch(cli.command, &mut io) {
        Ok(()) => EXIT_OK,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(io.err, "invalid model: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Unresolved(msg)) => {
            let _ = writeln!(io.err, "unresolved: {msg}");
            EXIT_UNRESOLVED
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(io.err, "i/o error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, io: &mut Io) -> Result<(), Failure> {
    match command {
        Command::Validate { model } => {
            let m = load(&model)?;
            let residual = witness_residual(&m).map_err(|e| invalid(&model, e))?;
            if residual > witness_resolve::tolerance::WITNESS {
                return Err(invalid(
                    &model,
                    Error::WitnessInvalid {
                        residual,
                        tolerance: witness_resolve::tolerance::WITNESS,
                    },
                ));
            }
            let r = ValidateReport {
                entities: m.entities().len(),
                constraints: m.constraints().len(),
                witness_residual: residual,
            };
            io.emit(&r, || {
                format!("valid: {}, witness residual {residual:.3e}", summary(&m))
            })?;
        }
        Command::Analyze { model } => {
            let (_, a) = checked(&model)?;
            let r = StateReport::from(a.state);
            io.emit(&r, || r.to_string())?;
        }
        Command::Detect { model } => {
            let (m, a) = checked(&model)?;
            let mut parts = Parts::default();
            if a.state.over {
                parts.over = Parts::from_over(
                    &detect_minimal_over_parts(&m).map_err(|e| invalid(&model, e))?,
                );
            } else {
                parts.well = Parts::from_well(
                    &detect_maximal_well_parts(&m).map_err(|e| invalid(&model, e))?,
                );
            }
            let r = DetectReport {
                state: a.state.into(),
                parts,
            };
            io.emit(&r, || {
                let (what, parts) = if r.state.over {
                    ("minimal over-constrained parts", &r.parts.over)
                } else {
                    ("maximal well-constrained parts", &r.parts.well)
                };
                format!("{}\n{what}:\n{}", r.state, list(parts))
            })?;
        }
        Command::Compare { model } => {
            let (m, a) = checked(&model)?;
            let (mut optimal, mut greedy) = (Parts::default(), Parts::default());
            let e = |e| invalid(&model, e);
            if a.state.over {
                optimal.over = Parts::from_over(&detect_minimal_over_parts(&m).map_err(e)?);
                greedy.over = Parts::from_over(&greedy_over_baseline(&m, None).map_err(e)?);
            } else {
                optimal.well = Parts::from_well(&detect_maximal_well_parts(&m).map_err(e)?);
                greedy.well = Parts::from_well(&greedy_well_baseline(&m).map_err(e)?);
            }
            let r = CompareReport {
                state: a.state.into(),
                optimal,
                greedy,
            };
            io.emit(&r, || {
                let (o, g) = if r.state.over {
                    (&r.optimal.over, &r.greedy.over)
                } else {
                    (&r.optimal.well, &r.greedy.well)
                };
                format!("{}\noptimal:\n{}\ngreedy:\n{}", r.state, list(o), list(g))
            })?;
        }
        Command::Resolve {
            model,
            auto,
            out,
            journal,
        } => resolve(io, &model, auto, out, journal)?,
        Command::Serve { port } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::http::serve(port))?;
        }
    }
    Ok(())
}

fn resolve(
    io: &mut Io,
    path: &Path,
    auto: bool,
    out: Option<PathBuf>,
    journal: Option<PathBuf>,
) -> Result<(), Failure> {
    let m = load(path)?;
    let mut s = Session::start(m).map_err(|e| invalid(path, e))?;
    let before = StateReport::from(s.presentation().state);
    let outcome = if auto {
        s.auto_resolve().map(|_| ()).map_err(|e| e.to_string())
    } else {
        prompt_loop(io, &mut s)?
    };
    if let Some(p) = &journal {
        std::fs::write(p, journal_to_jsonl(s.journal()))?;
    }
    if let Err(msg) = outcome {
        return Err(Failure::Unresolved(msg));
    }
    if let Some(p) = &out {
        std::fs::write(p, s.current_document())?;
    }
    let count = |v: Verdict| s.journal().iter().filter(|e| e.verdict == v).count();
    let r = ResolveReport {
        before,
        after: s.presentation().state.into(),
        accepted: count(Verdict::Accepted),
        rejected: count(Verdict::Rejected),
        undone: count(Verdict::Undone),
        out: out.map(|p| p.display().to_string()),
    };
    io.emit(&r, || {
        format!("{} -> {} ({} accepted)", r.before, r.after, r.accepted)
    })?;
    Ok(())
}

/// Terminal prompts. `Ok(Err(_))` means the user stopped before the model
/// was well-constrained.
fn prompt_loop(io: &mut Io, s: &mut Session) -> Result<Result<(), String>, Failure> {
    let mut line = String::new();
    while s.phase() != Phase::WellDone {
        let p = s.presentation();
        writeln!(
            io.err,
            "\n{} (over_dim={}, under_dim={})",
            p.state.label(),
            p.state.over_dim,
            p.state.under_dim
        )?;
        if p.options.is_empty() {
            return Ok(Err("no valid option for the remaining inconsistency".into()));
        }
        for (k, o) in p.options.iter().enumerate() {
            let score = o.score.map_or("-".into(), |x| format!("{x:.4}"));
            writeln!(
                io.err,
                "  [{}] {:<40} precedence {} rate {score}",
                k + 1,
                o.describe(),
                o.precedence
            )?;
        }
        if p.forced {
            writeln!(
                io.err,
                "  the only option left for this part must be accepted"
            )?;
        }
        write!(
            io.err,
            "accept <n> | r <n> reject | u undo | a auto | q quit > "
        )?;
        io.err.flush()?;
        line.clear();
        if io.input.read_line(&mut line)? == 0 {
            return Ok(Err("input closed".into()));
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let pick = |w: Option<&&str>| {
            w.and_then(|w| w.parse::<usize>().ok())
                .and_then(|n| n.checked_sub(1))
                .and_then(|k| p.options.get(k))
                .map(|o| o.id.clone())
        };
        let result = match words.as_slice() {
            ["q" | "quit"] => return Ok(Err("stopped by user".into())),
            ["a" | "auto"] => s.auto_resolve().map(|_| ()),
            ["u" | "undo"] => s.undo().map(|_| ()),
            ["r" | "reject", rest @ ..] => match pick(rest.first()) {
                Some(id) => s.reject(&id).map(|_| ()),
                None => Ok(writeln!(io.err, "no such option")?),
            },
            [n] => match pick(Some(n)) {
                Some(id) => s.accept(&id).map(|_| ()),
                None => Ok(writeln!(io.err, "no such option")?),
            },
            _ => Ok(writeln!(io.err, "?")?),
        };
        if let Err(e) = result {
            writeln!(io.err, "{e}")?;
        }
    }
    Ok(Ok(()))
}
