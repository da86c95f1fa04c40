//! Command-line entry points: `check`, `project`, `run`, `equiv`, `analyze`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::anno::well_annotated;
use crate::ast::{DpocProc, GlobalState, Label, Network, UpdateRepo};
use crate::checkers::{
    check_deadlock_freedom, check_orphan_freedom, check_race_freedom, Verdict,
};
use crate::cond::{check_wellannotated_dpoc, minimality_witness};
use crate::connect::connected;
use crate::dioc::DiocSystem;
use crate::dpoc::{scheduled_steps_dpoc, DpocSystem};
use crate::equiv::{equiv_check, EquivResult};
use crate::eval::FunctionEnv;
use crate::parse::{parse_dioc, parse_dpocnet, parse_fns, parse_updates};
use crate::pretty::{pretty_dpoc, PrettyMode};
use crate::project::project;
use crate::sched::{parse_script, scheduled_steps_dioc, Schedule};
use crate::trace::render_record;

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARSE: u8 = 1;
pub const EXIT_CHECK: u8 = 2;
pub const EXIT_FUEL: u8 = 3;
pub const EXIT_STUCK: u8 = 4;
pub const EXIT_COUNTEREXAMPLE: u8 = 5;
pub const EXIT_PROPERTY: u8 = 6;

#[derive(Parser)]
#[command(name = "chorup", version, about = "Choreography compiler and verification workbench")]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Level {
    Dioc,
    Dpoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Fault {
    /// Delete the first receive of the projection.
    DropReceive,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a program and check annotation and connectedness.
    Check {
        program: PathBuf,
    },
    /// Project a program onto its roles, one `.dpoc` file per role.
    Project {
        program: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Project even when the connectedness check fails.
        #[arg(long)]
        force: bool,
    },
    /// Execute one seeded run, writing its trace.
    Run {
        program: PathBuf,
        /// Semantic level to run at.
        #[arg(long, value_enum, default_value_t = Level::Dpoc)]
        level: Level,
        /// Update repository: a `.upd` file or a directory of them.
        #[arg(long)]
        updates: Option<PathBuf>,
        /// `noupdate`, `first`, or `script:<path>`.
        #[arg(long, default_value = "first")]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum number of transitions.
        #[arg(long, default_value_t = 100_000)]
        fuel: u64,
        /// Function stub file.
        #[arg(long)]
        fns: Option<PathBuf>,
        /// Trace output path (defaults to stdout).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check weak bisimilarity of a program against its projection.
    Equiv {
        program: PathBuf,
        #[arg(long)]
        updates: Option<PathBuf>,
        /// `noupdate`, `first`, `exhaustive`, or `script:<path>`.
        #[arg(long, default_value = "exhaustive")]
        policy: String,
        /// Maximum number of configuration pairs.
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
        #[arg(long)]
        fns: Option<PathBuf>,
        /// Mutate the projection before checking.
        #[arg(long = "inject-fault", value_enum)]
        inject_fault: Option<Fault>,
    },
    /// Run the property checkers on a projection (or a raw `.dpocnet`).
    Analyze {
        program: PathBuf,
        #[arg(long)]
        updates: Option<PathBuf>,
        /// Maximum number of explored states per property.
        #[arg(long, default_value_t = 100_000)]
        fuel: usize,
        #[arg(long)]
        fns: Option<PathBuf>,
    },
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(dispatch(cli.cmd))
}

fn dispatch(cmd: Cmd) -> u8 {
    match cmd {
        Cmd::Check { program } => cmd_check(&program),
        Cmd::Project { program, out, force } => cmd_project(&program, &out, force),
        Cmd::Run { program, level, updates, policy, seed, fuel, fns, trace } => {
            cmd_run(&program, level, updates, &policy, seed, fuel, fns, trace)
        }
        Cmd::Equiv { program, updates, policy, fuel, fns, inject_fault } => {
            cmd_equiv(&program, updates, &policy, fuel, fns, inject_fault)
        }
        Cmd::Analyze { program, updates, fuel, fns } => {
            cmd_analyze(&program, updates, fuel, fns)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn report(result: Result<u8, Failure>) -> u8 {
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| fail(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<crate::parse::DiocProgram, Failure> {
    let src = read(path)?;
    parse_dioc(&src).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

/// Load `--updates`: a single `.upd` file, or every `.upd` in a directory in
/// name order (concatenated into one repository with id 1).
fn load_updates(path: Option<&Path>) -> Result<UpdateRepo, Failure> {
    let Some(path) = path else { return Ok(UpdateRepo::new(1)) };
    let src = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| fail(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "upd"))
            .collect();
        files.sort();
        let mut joined = String::new();
        for f in files {
            joined.push_str(&read(&f)?);
            joined.push('\n');
        }
        joined
    } else {
        read(path)?
    };
    parse_updates(&src, 1).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_fns(path: Option<&Path>) -> Result<FunctionEnv, Failure> {
    let Some(path) = path else { return Ok(FunctionEnv::empty()) };
    let src = read(path)?;
    parse_fns(&src).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

/// `noupdate` | `first` | `exhaustive` | `script:<path>`.
fn load_policy(policy: &str, allow_exhaustive: bool) -> Result<Schedule, Failure> {
    match policy {
        "noupdate" | "noup" => Ok(Schedule::no_update()),
        "first" => Ok(Schedule::first_applicable()),
        "exhaustive" | "all" if allow_exhaustive => Ok(Schedule::exhaustive()),
        "exhaustive" | "all" => Err(fail(
            EXIT_CHECK,
            "policy `exhaustive` explores all branches; a run follows one, \
             pick `noupdate`, `first`, or a script",
        )),
        other => match other.strip_prefix("script:") {
            Some(p) => {
                let path = Path::new(p);
                let src = read(path)?;
                parse_script(path, &src).map_err(|e| fail(EXIT_CHECK, e.to_string()))
            }
            None => Err(fail(
                EXIT_CHECK,
                format!("unknown policy `{other}` (noupdate, first, exhaustive, script:<path>)"),
            )),
        },
    }
}

/// Parse + annotate + connectedness; the shared front half of most commands.
fn checked_program(path: &Path) -> Result<crate::parse::DiocProgram, Failure> {
    let prog = load_program(path)?;
    if let Err(errors) = well_annotated(&prog.proc) {
        let mut msg = format!("{}: annotation check failed:", path.display());
        for e in errors {
            let _ = write!(msg, "\n  {e}");
        }
        return Err(fail(EXIT_CHECK, msg));
    }
    if let Err(e) = connected(&prog.proc) {
        return Err(fail(EXIT_CHECK, format!("{}: {e}", path.display())));
    }
    Ok(prog)
}

fn cmd_check(path: &Path) -> u8 {
    report((|| {
        let prog = checked_program(path)?;
        let roles = crate::ast::roles(&prog.proc);
        let names: Vec<&str> = roles.iter().map(|r| r.as_str()).collect();
        println!("{}: ok ({} roles: {})", path.display(), names.len(), names.join(", "));
        Ok(EXIT_OK)
    })())
}

fn cmd_project(path: &Path, out: &Path, force: bool) -> u8 {
    report((|| {
        let prog = if force {
            let prog = load_program(path)?;
            if let Err(errors) = well_annotated(&prog.proc) {
                let msgs: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
                return Err(fail(EXIT_CHECK, msgs.join("; ")));
            }
            prog
        } else {
            checked_program(path)?
        };
        let net = project(&prog.proc, &GlobalState::new(), &[]);
        fs::create_dir_all(out)
            .map_err(|e| fail(EXIT_CHECK, format!("cannot create {}: {e}", out.display())))?;
        for (role, (proc, _)) in net.0.iter() {
            let file = out.join(format!("{role}.dpoc"));
            let text = pretty_dpoc(proc, PrettyMode::Display);
            fs::write(&file, text)
                .map_err(|e| fail(EXIT_CHECK, format!("cannot write {}: {e}", file.display())))?;
            println!("wrote {}", file.display());
        }
        Ok(EXIT_OK)
    })())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    path: &Path,
    level: Level,
    updates: Option<PathBuf>,
    policy: &str,
    seed: u64,
    fuel: u64,
    fns: Option<PathBuf>,
    trace: Option<PathBuf>,
) -> u8 {
    report((|| {
        let prog = checked_program(path)?;
        let repo = load_updates(updates.as_deref())?;
        let fns = load_fns(fns.as_deref())?;
        let sched = load_policy(policy, false)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<Label> = Vec::new();
        let outcome = match level {
            Level::Dioc => {
                let mut sys =
                    DiocSystem::initial(prog.proc, GlobalState::new(), repo, fns);
                let mut cursor = 0usize;
                run_loop(fuel, &mut labels, |labels| {
                    let mut steps = scheduled_steps_dioc(&sys, &sched, cursor);
                    if steps.is_empty() {
                        return false;
                    }
                    let k = (rng.next_u64() % steps.len() as u64) as usize;
                    let (step, cur) = steps.swap_remove(k);
                    labels.push(step.label);
                    sys = step.succ;
                    cursor = cur;
                    true
                })
            }
            Level::Dpoc => {
                let net = project(&prog.proc, &GlobalState::new(), &[]);
                let dioc = DiocSystem::initial(
                    prog.proc,
                    GlobalState::new(),
                    repo.clone(),
                    fns.clone(),
                );
                let mut sys = DpocSystem::new(net, repo, fns);
                sys.fresh = dioc.fresh;
                let mut cursor = 0usize;
                run_loop(fuel, &mut labels, |labels| {
                    let mut steps = scheduled_steps_dpoc(&sys, &sched, cursor);
                    if steps.is_empty() {
                        return false;
                    }
                    let k = (rng.next_u64() % steps.len() as u64) as usize;
                    let (step, cur) = steps.swap_remove(k);
                    labels.push(step.label);
                    sys = step.succ;
                    cursor = cur;
                    true
                })
            }
        };
        let mut text = String::new();
        for label in &labels {
            if let Some(line) = render_record(label) {
                text.push_str(&line);
                text.push('\n');
            }
        }
        match trace {
            Some(p) => fs::write(&p, text)
                .map_err(|e| fail(EXIT_CHECK, format!("cannot write {}: {e}", p.display())))?,
            None => {
                print!("{text}");
                let _ = std::io::stdout().flush();
            }
        }
        match outcome {
            RunOutcome::Ticked => Ok(EXIT_OK),
            RunOutcome::FuelExhausted => {
                eprintln!("fuel exhausted after {fuel} steps");
                Ok(EXIT_FUEL)
            }
            RunOutcome::Stuck => {
                eprintln!("stuck after {} steps without termination", labels.len());
                Ok(EXIT_STUCK)
            }
        }
    })())
}

enum RunOutcome {
    Ticked,
    FuelExhausted,
    Stuck,
}

fn run_loop(
    fuel: u64,
    labels: &mut Vec<Label>,
    mut step: impl FnMut(&mut Vec<Label>) -> bool,
) -> RunOutcome {
    let mut taken = 0u64;
    loop {
        if labels.last() == Some(&Label::Tick) {
            return RunOutcome::Ticked;
        }
        if taken >= fuel {
            return RunOutcome::FuelExhausted;
        }
        if !step(labels) {
            return RunOutcome::Stuck;
        }
        taken += 1;
    }
}

fn cmd_equiv(
    path: &Path,
    updates: Option<PathBuf>,
    policy: &str,
    fuel: usize,
    fns: Option<PathBuf>,
    inject_fault: Option<Fault>,
) -> u8 {
    report((|| {
        let prog = checked_program(path)?;
        let repo = load_updates(updates.as_deref())?;
        let fns = load_fns(fns.as_deref())?;
        let sched = load_policy(policy, true)?;
        let dioc = DiocSystem::initial(prog.proc, GlobalState::new(), repo.clone(), fns.clone());
        let mut net = project(&dioc.proc, &dioc.sigma, &[]);
        if let Some(Fault::DropReceive) = inject_fault {
            if !drop_first_receive(&mut net) {
                return Err(fail(EXIT_CHECK, "no receive to drop in the projection"));
            }
        }
        let mut dpoc = DpocSystem::new(net, repo, fns);
        dpoc.fresh = dioc.fresh;
        let result = equiv_check(&dioc, &dpoc, fuel, &sched);
        println!("{result}");
        match result {
            EquivResult::Equivalent { .. } => Ok(EXIT_OK),
            EquivResult::NotEquivalent { .. } => Ok(EXIT_COUNTEREXAMPLE),
            EquivResult::Inconclusive { .. } => Ok(EXIT_FUEL),
        }
    })())
}

/// Replace the first receive leaf (role order, then pre-order) with `1`.
fn drop_first_receive(net: &mut Network) -> bool {
    fn drop_in(p: &mut DpocProc) -> bool {
        match p {
            DpocProc::Recv { .. } => {
                *p = DpocProc::Skip;
                true
            }
            DpocProc::Seq(a, b) | DpocProc::Par(a, b) => drop_in(a) || drop_in(b),
            DpocProc::If { then_br, else_br, .. } => drop_in(then_br) || drop_in(else_br),
            DpocProc::While { body, .. }
            | DpocProc::ScopeCoord { body, .. }
            | DpocProc::ScopeSimple { body, .. } => drop_in(body),
            _ => false,
        }
    }
    for (_, (proc, _)) in net.0.iter_mut() {
        if drop_in(proc) {
            return true;
        }
    }
    false
}

fn cmd_analyze(path: &Path, updates: Option<PathBuf>, fuel: usize, fns: Option<PathBuf>) -> u8 {
    report((|| {
        let repo = load_updates(updates.as_deref())?;
        let fns = load_fns(fns.as_deref())?;
        let sys = if path.extension().is_some_and(|x| x == "dpocnet") {
            let src = read(path)?;
            let net = parse_dpocnet(&src)
                .map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
            DpocSystem::new(net, repo, fns)
        } else {
            let prog = checked_program(path)?;
            let dioc =
                DiocSystem::initial(prog.proc, GlobalState::new(), repo.clone(), fns.clone());
            let net = project(&dioc.proc, &dioc.sigma, &[]);
            let mut sys = DpocSystem::new(net, repo, fns);
            sys.fresh = dioc.fresh;
            sys
        };

        let mut failed = false;
        let mut inconclusive = false;
        let verdicts = [
            ("deadlock freedom", check_deadlock_freedom(&sys, fuel)),
            ("race freedom", check_race_freedom(&sys, fuel)),
            ("orphan freedom", check_orphan_freedom(&sys, fuel)),
        ];
        for (name, verdict) in &verdicts {
            println!("{name:<20} {verdict}");
            failed |= verdict.failed();
            inconclusive |= matches!(verdict, Verdict::Inconclusive { .. });
        }

        let violations = check_wellannotated_dpoc(&sys.net);
        if violations.is_empty() {
            println!("{:<20} pass", "well-annotated");
        } else {
            for v in &violations {
                println!("{:<20} fail: {v}", "well-annotated");
            }
            failed = true;
        }
        match minimality_witness(&sys) {
            None => println!("{:<20} pass", "minimality"),
            Some(w) => {
                println!("{:<20} fail: {w}", "minimality");
                failed = true;
            }
        }
        if failed {
            Ok(EXIT_PROPERTY)
        } else if inconclusive {
            Ok(EXIT_FUEL)
        } else {
            Ok(EXIT_OK)
        }
    })())
}
