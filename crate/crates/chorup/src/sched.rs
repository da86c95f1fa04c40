//! Scheduling of scope decisions and repository swaps.
//!
//! Both semantics offer, at every scope, one step per applicable update plus
//! the no-update step. A `Schedule` prunes these offers so that runs and
//! equivalence checks can pin down scenarios: per-scope decisions, a default
//! decision, and scripted repository swaps that fire right before a given
//! scope decides. Keeping the pruning identical at both layers is what makes
//! the layers comparable under a scenario.

use crate::ast::{Label, UpdateRepo};
use crate::dioc::{enabled_dioc, DiocStep, DiocSystem};
use std::collections::BTreeMap;
use std::path::Path;

/// What a scope should do when it decides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// Commit to the original body.
    NoUp,
    /// Apply the named update (the scope blocks if it is not applicable).
    Up(String),
    /// Apply the first applicable update, or run the body if none.
    First,
    /// Keep every offer (exhaustive exploration).
    All,
}

/// A scripted repository swap, fired by the environment right before the
/// named scope decides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Swap {
    pub before_scope: u64,
    pub repo: UpdateRepo,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub default: Decision,
    pub decisions: BTreeMap<u64, Decision>,
    pub swaps: Vec<Swap>,
}

impl Schedule {
    pub fn uniform(default: Decision) -> Schedule {
        Schedule { default, decisions: BTreeMap::new(), swaps: Vec::new() }
    }
    pub fn no_update() -> Schedule {
        Schedule::uniform(Decision::NoUp)
    }
    pub fn first_applicable() -> Schedule {
        Schedule::uniform(Decision::First)
    }
    pub fn exhaustive() -> Schedule {
        Schedule::uniform(Decision::All)
    }
    fn decision_for(&self, scope: u64) -> &Decision {
        self.decisions.get(&scope).unwrap_or(&self.default)
    }
}

/// CLI-facing policy names; the CLI turns them into a `Schedule`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    NoUpdate,
    FirstApplicable,
    Exhaustive,
    Script(std::path::PathBuf),
}

/// A pruned view of one enabled step.
pub struct StepView {
    pub label: Label,
    pub scope_idx: Option<u64>,
}

pub enum FilterOutcome {
    /// Replace all offers with the pending swap (given by its index).
    InjectSwap(usize),
    /// Keep exactly these offers.
    Keep(Vec<usize>),
}

/// Decide what survives of the enabled steps under the schedule. A pending
/// swap fires as soon as its scope is about to decide; otherwise scope
/// offers are pruned per decision and everything else passes through.
pub fn filter_steps(views: &[StepView], sched: &Schedule, cursor: usize) -> FilterOutcome {
    if let Some(swap) = sched.swaps.get(cursor) {
        let scope_deciding = views.iter().any(|v| {
            v.scope_idx == Some(swap.before_scope)
                && matches!(v.label, Label::Update { .. } | Label::NoUp)
        });
        if scope_deciding {
            return FilterOutcome::InjectSwap(cursor);
        }
    }
    let mut keep = Vec::new();
    // For `First` we need, per scope, the first update offer if any.
    let mut first_update: BTreeMap<u64, usize> = BTreeMap::new();
    for (i, v) in views.iter().enumerate() {
        if let (Some(s), Label::Update { .. }) = (v.scope_idx, &v.label) {
            first_update.entry(s).or_insert(i);
        }
    }
    for (i, v) in views.iter().enumerate() {
        let Some(scope) = v.scope_idx else {
            keep.push(i);
            continue;
        };
        let keep_it = match sched.decision_for(scope) {
            Decision::All => true,
            Decision::NoUp => matches!(v.label, Label::NoUp),
            Decision::Up(name) => {
                matches!(&v.label, Label::Update { name: n, .. } if n == name)
            }
            Decision::First => match first_update.get(&scope) {
                Some(first) => i == *first,
                None => matches!(v.label, Label::NoUp),
            },
        };
        if keep_it {
            keep.push(i);
        }
    }
    FilterOutcome::Keep(keep)
}

/// Enabled choreography steps under a schedule. Each step carries the swap
/// cursor that the continuation should use.
pub fn scheduled_steps_dioc(
    sys: &DiocSystem,
    sched: &Schedule,
    cursor: usize,
) -> Vec<(DiocStep, usize)> {
    let steps = enabled_dioc(sys);
    let views: Vec<StepView> = steps
        .iter()
        .map(|s| StepView { label: s.label.clone(), scope_idx: s.scope_idx })
        .collect();
    match filter_steps(&views, sched, cursor) {
        FilterOutcome::InjectSwap(i) => {
            let repo = sched.swaps[i].repo.clone();
            let label = Label::ChangeUpdates { repo_id: repo.id };
            let mut succ = sys.clone();
            succ.repo = repo;
            vec![(DiocStep { label, succ, scope_idx: None }, i + 1)]
        }
        FilterOutcome::Keep(ids) => {
            let mut steps: Vec<Option<DiocStep>> = steps.into_iter().map(Some).collect();
            ids.into_iter()
                .map(|k| (steps[k].take().expect("indices are distinct"), cursor))
                .collect()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{path}: cannot read swap repository `{repo}`: {source}")]
    SwapIo {
        path: String,
        repo: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: swap repository `{repo}`: {source}")]
    SwapParse {
        path: String,
        repo: String,
        #[source]
        source: crate::parse::ParseError,
    },
}

/// Parse a schedule script. One directive per line:
///
/// ```text
/// default noup | first | all
/// scope <idx> apply <update-name>
/// scope <idx> noup
/// swap <repo.upd> before scope <idx>
/// ```
///
/// Swap repository paths are resolved relative to the script file; swapped
/// repositories get ids 2, 3, ... in order.
pub fn parse_script(path: &Path, src: &str) -> Result<Schedule, ScriptError> {
    let display = path.display().to_string();
    let err = |line: usize, msg: String| ScriptError::Syntax {
        path: display.clone(),
        line,
        msg,
    };
    let mut sched = Schedule::no_update();
    let mut next_repo_id = 2u64;
    for (lineno, raw) in src.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.split("//").next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            ["default", d] => {
                sched.default = match *d {
                    "noup" => Decision::NoUp,
                    "first" => Decision::First,
                    "all" => Decision::All,
                    other => {
                        return Err(err(line, format!("unknown default decision `{other}`")))
                    }
                };
            }
            ["scope", idx, "apply", name] => {
                let idx: u64 = idx
                    .parse()
                    .map_err(|_| err(line, format!("bad scope index `{idx}`")))?;
                sched.decisions.insert(idx, Decision::Up(name.to_string()));
            }
            ["scope", idx, "noup"] => {
                let idx: u64 = idx
                    .parse()
                    .map_err(|_| err(line, format!("bad scope index `{idx}`")))?;
                sched.decisions.insert(idx, Decision::NoUp);
            }
            ["scope", idx, "first"] => {
                let idx: u64 = idx
                    .parse()
                    .map_err(|_| err(line, format!("bad scope index `{idx}`")))?;
                sched.decisions.insert(idx, Decision::First);
            }
            ["swap", repo_path, "before", "scope", idx] => {
                let idx: u64 = idx
                    .parse()
                    .map_err(|_| err(line, format!("bad scope index `{idx}`")))?;
                let resolved = path
                    .parent()
                    .map(|d| d.join(repo_path))
                    .unwrap_or_else(|| repo_path.into());
                let src = std::fs::read_to_string(&resolved).map_err(|e| ScriptError::SwapIo {
                    path: display.clone(),
                    repo: repo_path.to_string(),
                    source: e,
                })?;
                let repo = crate::parse::parse_updates(&src, next_repo_id).map_err(|e| {
                    ScriptError::SwapParse {
                        path: display.clone(),
                        repo: repo_path.to_string(),
                        source: e,
                    }
                })?;
                next_repo_id += 1;
                sched.swaps.push(Swap { before_scope: idx, repo });
            }
            _ => return Err(err(line, format!("unrecognized directive `{text}`"))),
        }
    }
    Ok(sched)
}
