//! Command-line front end: reads instance files, runs the solvers or the
//! oracle, and renders the result as compact JSON or plain text.
//!
//! Exit status: 0 success, 1 the command's contract failed (validation,
//! theorem check, comparative hypothesis, non-stable or non-ample input),
//! 2 usage or parse error, 3 ideal-count cap exceeded.

pub mod instance;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::choice::{Law, PlottReport};
use crate::error::{Error, Names};
use crate::oracle::{self, ClassKind, TheoremReport, VerifyOptions, Witness};
use crate::stability::{self, LatticeOp, Problem};
use crate::system::System;
use instance::LoadOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "contract-stability",
    version,
    about = "Stable contract systems between a Worker and a Firm"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for the oracle's sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of ideals any enumeration may visit.
    #[arg(long, global = true, default_value_t = crate::DEFAULT_MAX_IDEALS)]
    pub max_ideals: usize,
    /// Accept choice functions that are not known to be Plott.
    #[arg(long, global = true)]
    pub permissive: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check both choice functions against the Plott axioms.
    Validate { instance: PathBuf },
    /// Worker-best and Worker-worst stable systems.
    Solve { instance: PathBuf },
    /// All ideals of one class, in canonical order.
    Enumerate {
        /// stable, neat, ample, quasi_stable, acceptable_w or acceptable_f
        #[arg(long, default_value = "stable")]
        kind: ClassKind,
        instance: PathBuf,
    },
    /// Lattice bounds of a family of stable systems, each given as a
    /// comma-separated list of elements ("" is the empty system).
    Lattice {
        instance: PathBuf,
        #[arg(required = true)]
        systems: Vec<String>,
    },
    /// Check that the second problem has a more demanding Firm and a more
    /// compliant Worker, then map every stable system across.
    Compare {
        original: PathBuf,
        modified: PathBuf,
    },
    /// Rounds of the Worker-offers / Firm-responds iteration.
    Trace {
        instance: PathBuf,
        /// Ample starting system; defaults to every element.
        #[arg(long)]
        seed_system: Option<String>,
    },
    /// Run every theorem check of the brute-force oracle.
    Verify {
        instance: PathBuf,
        /// Sampled three-member families when the stable set is large.
        #[arg(long, default_value_t = 64)]
        family_samples: usize,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::DomainTooLarge { .. } => EXIT_CAP,
        Error::UnknownElement(_) | Error::NotAnIdeal(_) => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(code_of(&e), e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let mut out = String::new();
    let result = dispatch(cli, &mut out);
    let (code, stderr) = match result {
        Ok(code) => (code, String::new()),
        Err(f) => (f.code, format!("error: {}\n", f.message)),
    };
    Outcome {
        code,
        stdout: out,
        stderr,
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut String,
}

impl Ctx<'_> {
    fn load(&self, path: &Path, strict: bool) -> Result<Problem, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
        let opts = LoadOptions {
            strict,
            max_ideals: self.cli.max_ideals,
        };
        instance::load(&text, opts).map_err(|e| {
            let code = match e.domain() {
                Some(Error::DomainTooLarge { .. }) => EXIT_CAP,
                Some(Error::PlottFailed(_) | Error::UncheckedChoiceFunction) => EXIT_FAILED,
                _ => EXIT_USAGE,
            };
            Failure::new(code, format!("{}: {e}", path.display()))
        })
    }

    fn problem(&self, path: &Path) -> Result<Problem, Failure> {
        self.load(path, !self.cli.permissive)
    }

    fn emit(&mut self, value: &impl Serialize, text: impl FnOnce(&mut String)) {
        match self.cli.format {
            Format::Json => {
                self.out
                    .push_str(&serde_json::to_string(value).expect("report serializes"));
                self.out.push('\n');
            }
            Format::Text => text(self.out),
        }
    }
}

fn dispatch(cli: &Cli, out: &mut String) -> Result<i32, Failure> {
    let mut cx = Ctx { cli, out };
    match &cli.command {
        Command::Validate { instance } => validate(&mut cx, instance),
        Command::Solve { instance } => solve(&mut cx, instance),
        Command::Enumerate { kind, instance } => enumerate(&mut cx, instance, *kind),
        Command::Lattice { instance, systems } => lattice(&mut cx, instance, systems),
        Command::Compare { original, modified } => compare(&mut cx, original, modified),
        Command::Trace {
            instance,
            seed_system,
        } => trace(&mut cx, instance, seed_system.as_deref()),
        Command::Verify {
            instance,
            family_samples,
        } => verify(&mut cx, instance, *family_samples),
    }
}

fn set(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

/// Elements separated by commas; blank entries are ignored.
fn parse_system(pr: &Problem, arg: &str) -> Result<System, Failure> {
    let arg = arg.trim();
    let arg = arg
        .strip_prefix('{')
        .and_then(|a| a.strip_suffix('}'))
        .unwrap_or(arg);
    let names: Vec<&str> = arg
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    Ok(pr.poset().system(&names)?)
}

fn law_name(law: Law) -> &'static str {
    match law {
        Law::Consistency => "consistency",
        Law::Substitutability => "substitutability",
        Law::IdealValued => "ideal_valued",
        Law::UnionBound => "union_bound",
        Law::PathIndependence => "path_independence",
    }
}

fn validate(cx: &mut Ctx, path: &Path) -> Result<i32, Failure> {
    let pr = cx.load(path, false)?;
    let worker = pr.worker().validate_plott(cx.cli.max_ideals)?;
    let firm = pr.firm().validate_plott(cx.cli.max_ideals)?;
    let ok = worker.is_plott() && firm.is_plott();
    cx.emit(&json!({"worker": worker, "firm": firm}), |o| {
        for (who, r) in [("worker", &worker), ("firm", &firm)] {
            write_plott(o, who, r);
        }
    });
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn write_plott(o: &mut String, who: &str, r: &PlottReport) {
    let verdict = if r.is_plott() { "plott" } else { "NOT plott" };
    let _ = writeln!(o, "{who}: {verdict} ({} ideals)", r.ideals);
    for w in &r.witnesses {
        let _ = writeln!(
            o,
            "  {}: A={} B={} C(A)={} C(B)={}",
            law_name(w.law),
            set(&w.a),
            set(&w.b),
            set(&w.choice_a),
            set(&w.choice_b)
        );
    }
}

fn solve(cx: &mut Ctx, path: &Path) -> Result<i32, Failure> {
    let pr = cx.problem(path)?;
    let ext = pr.extremal_stable()?;
    let p = pr.poset();
    let (max, min) = (p.names(ext.s_max_w), p.names(ext.s_min_w));
    cx.emit(&json!({"s_max_w": max, "s_min_w": min}), |o| {
        let _ = writeln!(o, "s_max_w: {}", set(&max));
        let _ = writeln!(o, "s_min_w: {}", set(&min));
    });
    Ok(EXIT_OK)
}

fn enumerate(cx: &mut Ctx, path: &Path, kind: ClassKind) -> Result<i32, Failure> {
    let pr = cx.problem(path)?;
    let found: Vec<Names> = oracle::enumerate_class(&pr, kind, cx.cli.max_ideals)?
        .into_iter()
        .map(|s| pr.poset().names(s))
        .collect();
    cx.emit(&found, |o| {
        for s in &found {
            let _ = writeln!(o, "{}", set(s));
        }
    });
    Ok(EXIT_OK)
}

fn lattice(cx: &mut Ctx, path: &Path, args: &[String]) -> Result<i32, Failure> {
    let pr = cx.problem(path)?;
    let family = args
        .iter()
        .map(|a| parse_system(&pr, a))
        .collect::<Result<Vec<_>, _>>()?;
    let ops = [
        ("meet_w", LatticeOp::MeetW),
        ("join_w", LatticeOp::JoinW),
        ("inf_w", LatticeOp::InfW),
        ("sup_w", LatticeOp::SupW),
    ];
    let mut report = serde_json::Map::new();
    let mut lines = String::new();
    for (key, op) in ops {
        let names = pr.poset().names(pr.lattice_op(op, &family)?);
        let _ = writeln!(lines, "{key}: {}", set(&names));
        report.insert(key.to_owned(), json!(names));
    }
    cx.emit(&report, |o| o.push_str(&lines));
    Ok(EXIT_OK)
}

fn compare(cx: &mut Ctx, original: &Path, modified: &Path) -> Result<i32, Failure> {
    let (orig, modi) = (cx.problem(original)?, cx.problem(modified)?);
    let cmp = stability::check_comparative(&orig, &modi, cx.cli.max_ideals)?;
    if let Some((ideal, violation)) = cmp.witness {
        let names = orig.poset().names(ideal);
        cx.emit(
            &json!({"holds": false, "witness": {"ideal": names, "violation": violation}}),
            |o| {
                let _ = writeln!(o, "holds: false");
                let _ = writeln!(o, "witness: {} ({violation:?})", set(&names));
            },
        );
        return Err(Failure::new(
            EXIT_FAILED,
            format!("comparative hypothesis fails at {}", set(&names)),
        ));
    }
    let stable = oracle::enumerate_class(&orig, ClassKind::Stable, cx.cli.max_ideals)?;
    let images = stability::transfer_all(&orig, &modi, &stable, cx.cli.max_ideals)?;
    let p = orig.poset();
    let transfers: Vec<_> = stable
        .iter()
        .zip(&images)
        .map(|(&s, &t)| json!({"stable": p.names(s), "image": p.names(t)}))
        .collect();
    cx.emit(&json!({"holds": true, "transfers": transfers}), |o| {
        let _ = writeln!(o, "holds: true");
        for (&s, &t) in stable.iter().zip(&images) {
            let _ = writeln!(o, "{} -> {}", set(&p.names(s)), set(&p.names(t)));
        }
    });
    Ok(EXIT_OK)
}

fn trace(cx: &mut Ctx, path: &Path, seed: Option<&str>) -> Result<i32, Failure> {
    let pr = cx.problem(path)?;
    let start = match seed {
        Some(arg) => parse_system(&pr, arg)?,
        None => pr.poset().full(),
    };
    let outcome = pr.sigma(start)?;
    let n = |s: System| pr.poset().names(s);
    let rounds: Vec<_> = outcome
        .trace
        .rounds
        .iter()
        .enumerate()
        .map(|(i, r)| {
            json!({
                "round": i,
                "current": n(r.current),
                "offered": n(r.offered),
                "retained": n(r.retained),
                "rejected": n(r.rejected),
                "next": n(r.next),
            })
        })
        .collect();
    let report = json!({
        "seed": n(start),
        "rounds": rounds,
        "fixpoint": n(outcome.trace.fixpoint),
        "stable": n(outcome.stable),
    });
    cx.emit(&report, |o| {
        for (i, r) in outcome.trace.rounds.iter().enumerate() {
            let _ = writeln!(
                o,
                "round {i}: B={} W(B)={} retained={} rejected={} next={}",
                set(&n(r.current)),
                set(&n(r.offered)),
                set(&n(r.retained)),
                set(&n(r.rejected)),
                set(&n(r.next))
            );
        }
        let _ = writeln!(o, "fixpoint: {}", set(&n(outcome.trace.fixpoint)));
        let _ = writeln!(o, "stable: {}", set(&n(outcome.stable)));
    });
    Ok(EXIT_OK)
}

fn verify(cx: &mut Ctx, path: &Path, family_samples: usize) -> Result<i32, Failure> {
    let pr = cx.problem(path)?;
    let opts = VerifyOptions {
        max_ideals: cx.cli.max_ideals,
        seed: cx.cli.seed,
        family_samples,
    };
    let report = oracle::verify_theorems(&pr, opts)?;
    cx.emit(&report, |o| write_report(o, &report));
    Ok(if report.all_passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}

fn write_witness(o: &mut String, w: &Witness) {
    for l in &w.systems {
        let _ = write!(o, " {}={}", l.label, set(&l.system));
    }
}

fn write_report(o: &mut String, r: &TheoremReport) {
    let c = &r.counts;
    let _ = writeln!(o, "seed: {}", r.seed);
    let _ = writeln!(
        o,
        "ideals: {}  stable: {}  neat: {}  ample: {}  quasi_stable: {}",
        c.ideals, c.stable, c.neat, c.ample, c.quasi_stable
    );
    for check in &r.checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        let _ = write!(o, "{status} {} ({} cases)", check.id, check.checked);
        if let Some(w) = &check.witness {
            let _ = write!(o, ":");
            write_witness(o, w);
        }
        o.push('\n');
    }
    let f = &r.findings;
    let _ = writeln!(
        o,
        "intersection of stable: {}",
        set(&f.intersection_of_stable)
    );
    let _ = writeln!(
        o,
        "intersection of ample: {}",
        set(&f.intersection_of_ample)
    );
    let _ = writeln!(
        o,
        "ample closure of empty: {}",
        set(&f.ample_closure_of_empty)
    );
    let _ = writeln!(o, "all passed: {}", r.all_passed);
}
