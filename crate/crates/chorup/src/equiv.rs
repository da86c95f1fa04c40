//! Bounded weak system bisimulation between a choreography and a network.
//!
//! The checker plays the bisimulation game on lazily discovered pairs of
//! configurations. Every choreography move must be answered by the network
//! after finitely many hidden moves (silent steps and auxiliary
//! communications); every network move must either be mirrored by the
//! choreography in a single step, or be hidden, in which case the
//! choreography may stand still. Pairs start out optimistic and are knocked
//! out once one of their obligations has no surviving answer; what survives
//! a complete exploration is a weak bisimulation containing the roots.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::ast::Label;
use crate::dioc::DiocSystem;
use crate::dpoc::{scheduled_steps_dpoc, DpocSystem};
use crate::sched::{scheduled_steps_dioc, Schedule};

/// Hidden moves explored from one configuration while answering a single
/// choreography move. Generous: answer chains in practice are short (a
/// handful of auxiliary exchanges per scope).
const HIDDEN_CAP: usize = 4096;

/// Cap on the length of a reconstructed counterexample.
const TRACE_CAP: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivResult {
    /// Every discovered pair survived a complete game.
    Equivalent { pairs: usize },
    /// The root pair was knocked out; `trace` leads from the roots to the
    /// unanswerable move described by `detail`.
    NotEquivalent { trace: Vec<Label>, detail: String },
    /// The pair budget or a hidden-closure cap was hit before the game
    /// settled.
    Inconclusive { pairs: usize },
}

impl EquivResult {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivResult::Equivalent { .. })
    }
}

impl fmt::Display for EquivResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivResult::Equivalent { pairs } => {
                write!(f, "equivalent ({pairs} pairs checked)")
            }
            EquivResult::NotEquivalent { trace, detail } => {
                writeln!(f, "not equivalent: {detail}")?;
                write!(f, "  after:")?;
                if trace.is_empty() {
                    write!(f, " (initial configurations)")?;
                }
                for label in trace {
                    write!(f, "\n    {label}")?;
                }
                Ok(())
            }
            EquivResult::Inconclusive { pairs } => {
                write!(f, "inconclusive: exploration bound hit ({pairs} pairs)")
            }
        }
    }
}

/// One requirement on a pair: the move `label` on the side named by `side`
/// must be answered by a surviving candidate pair. `truncated` obligations
/// had their candidate search cut off and can never knock a pair out.
struct Obligation {
    label: Label,
    side: Side,
    candidates: Vec<usize>,
    truncated: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Choreography,
    Network,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Choreography => write!(f, "choreography"),
            Side::Network => write!(f, "network"),
        }
    }
}

struct Pair {
    dioc: DiocSystem,
    dioc_cursor: usize,
    dpoc: DpocSystem,
    dpoc_cursor: usize,
    obligations: Vec<Obligation>,
    expanded: bool,
    failed: bool,
}

struct Game<'a> {
    sched: &'a Schedule,
    pairs: Vec<Pair>,
    index: HashMap<(u64, u64), usize>,
    truncated: bool,
}

fn fingerprint<T: Hash>(value: &T) -> (u64, u64) {
    let mut a = DefaultHasher::new();
    value.hash(&mut a);
    let mut b = DefaultHasher::new();
    0x9e3779b97f4a7c15u64.hash(&mut b);
    value.hash(&mut b);
    (a.finish(), b.finish())
}

fn pair_key(d: &DiocSystem, dc: usize, n: &DpocSystem, nc: usize) -> (u64, u64) {
    // The function environment is fixed over a run, so it stays out of the
    // key; the repositories do not (the environment can swap them).
    fingerprint(&(
        format!("{:?}|{:?}|{:?}|{}", d.proc, d.sigma, d.repo, d.fresh),
        dc,
        format!("{:?}|{:?}|{}", n.net, n.repo, n.fresh),
        nc,
    ))
}

impl<'a> Game<'a> {
    fn intern(
        &mut self,
        d: DiocSystem,
        dc: usize,
        n: DpocSystem,
        nc: usize,
    ) -> usize {
        let key = pair_key(&d, dc, &n, nc);
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.pairs.len();
        self.index.insert(key, id);
        self.pairs.push(Pair {
            dioc: d,
            dioc_cursor: dc,
            dpoc: n,
            dpoc_cursor: nc,
            obligations: Vec::new(),
            expanded: false,
            failed: false,
        });
        id
    }

    /// Network configurations reachable from `(n, nc)` by hidden moves only,
    /// followed by one move labelled `mu`.
    fn weak_answers(
        &mut self,
        n: &DpocSystem,
        nc: usize,
        mu: &Label,
    ) -> (Vec<(DpocSystem, usize)>, bool) {
        let mut out = Vec::new();
        let mut seen = HashMap::new();
        let mut queue = VecDeque::new();
        let mut truncated = false;
        seen.insert(pair_key_net(n, nc), ());
        queue.push_back((n.clone(), nc));
        let mut visited = 0usize;
        while let Some((cur, cursor)) = queue.pop_front() {
            visited += 1;
            if visited > HIDDEN_CAP {
                truncated = true;
                break;
            }
            for (step, next_cursor) in scheduled_steps_dpoc(&cur, self.sched, cursor) {
                if step.label == *mu {
                    out.push((step.succ.clone(), next_cursor));
                }
                if step.label.is_weak_hidden(true) {
                    let key = pair_key_net(&step.succ, next_cursor);
                    if !seen.contains_key(&key) {
                        seen.insert(key, ());
                        queue.push_back((step.succ, next_cursor));
                    }
                }
            }
        }
        (out, truncated)
    }

    fn expand(&mut self, id: usize) {
        let (d, dc, n, nc) = {
            let p = &self.pairs[id];
            (p.dioc.clone(), p.dioc_cursor, p.dpoc.clone(), p.dpoc_cursor)
        };
        let dioc_steps = scheduled_steps_dioc(&d, self.sched, dc);
        let dpoc_steps = scheduled_steps_dpoc(&n, self.sched, nc);
        let mut obligations = Vec::new();

        for (step, next_dc) in &dioc_steps {
            let (answers, truncated) = self.weak_answers(&n, nc, &step.label);
            let mut candidates = Vec::new();
            for (succ_n, succ_nc) in answers {
                let cand = self.intern(step.succ.clone(), *next_dc, succ_n, succ_nc);
                if !candidates.contains(&cand) {
                    candidates.push(cand);
                }
            }
            obligations.push(Obligation {
                label: step.label.clone(),
                side: Side::Choreography,
                candidates,
                truncated,
            });
        }

        for (step, next_nc) in &dpoc_steps {
            let mut candidates = Vec::new();
            if step.label.is_weak_hidden(true) {
                let cand = self.intern(d.clone(), dc, step.succ.clone(), *next_nc);
                candidates.push(cand);
            }
            for (dstep, next_dc) in &dioc_steps {
                if dstep.label == step.label {
                    let cand =
                        self.intern(dstep.succ.clone(), *next_dc, step.succ.clone(), *next_nc);
                    if !candidates.contains(&cand) {
                        candidates.push(cand);
                    }
                }
            }
            obligations.push(Obligation {
                label: step.label.clone(),
                side: Side::Network,
                candidates,
                truncated: false,
            });
        }

        let p = &mut self.pairs[id];
        p.obligations = obligations;
        p.expanded = true;
    }

    /// Knock out pairs whose obligations cannot all be met, to fixpoint.
    fn settle(&mut self) {
        loop {
            let mut changed = false;
            for id in 0..self.pairs.len() {
                if self.pairs[id].failed || !self.pairs[id].expanded {
                    continue;
                }
                let doomed = self.pairs[id].obligations.iter().any(|ob| {
                    !ob.truncated && ob.candidates.iter().all(|&c| self.pairs[c].failed)
                });
                if doomed {
                    self.pairs[id].failed = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Walk from a failed root into failed candidates, collecting the moves
    /// that could not be answered along the way.
    fn counterexample(&self, root: usize) -> (Vec<Label>, String) {
        let mut trace = Vec::new();
        let mut cur = root;
        for _ in 0..TRACE_CAP {
            let pair = &self.pairs[cur];
            let Some(ob) = pair.obligations.iter().find(|ob| {
                !ob.truncated && ob.candidates.iter().all(|&c| self.pairs[c].failed)
            }) else {
                break;
            };
            trace.push(ob.label.clone());
            match ob.candidates.iter().find(|&&c| self.pairs[c].expanded) {
                Some(&next) => cur = next,
                None => {
                    let detail = if ob.candidates.is_empty() {
                        format!("{} move `{}` has no weak answer", ob.side, ob.label)
                    } else {
                        format!(
                            "{} move `{}` only leads to refuted pairs",
                            ob.side, ob.label
                        )
                    };
                    return (trace, detail);
                }
            }
        }
        let detail = match trace.last() {
            Some(label) => format!("every answer to `{label}` is eventually refuted"),
            None => "the initial pair is refuted".to_string(),
        };
        (trace, detail)
    }
}

fn pair_key_net(n: &DpocSystem, nc: usize) -> (u64, u64) {
    fingerprint(&(format!("{:?}|{:?}|{}", n.net, n.repo, n.fresh), nc))
}

/// Check weak system bisimilarity of the two initial configurations under a
/// shared schedule, exploring at most `fuel` configuration pairs.
pub fn equiv_check(
    dioc: &DiocSystem,
    dpoc: &DpocSystem,
    fuel: usize,
    sched: &Schedule,
) -> EquivResult {
    let mut game = Game { sched, pairs: Vec::new(), index: HashMap::new(), truncated: false };
    let root = game.intern(dioc.clone(), 0, dpoc.clone(), 0);
    let mut frontier = 0usize;
    while frontier < game.pairs.len() {
        if frontier >= fuel {
            game.truncated = true;
            break;
        }
        game.expand(frontier);
        if game.pairs[frontier].obligations.iter().any(|ob| ob.truncated) {
            game.truncated = true;
        }
        frontier += 1;
    }
    game.settle();
    if game.pairs[root].failed {
        let (mut trace, detail) = game.counterexample(root);
        // The last entry is the unanswered move itself, not a shared step.
        trace.pop();
        return EquivResult::NotEquivalent { trace, detail };
    }
    if game.truncated {
        return EquivResult::Inconclusive { pairs: game.pairs.len() };
    }
    EquivResult::Equivalent { pairs: game.pairs.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{DpocProc, GlobalState, Role, UpdateRepo};
    use crate::eval::FunctionEnv;
    use crate::parse::{parse_dioc, parse_updates};
    use crate::project::project;
    use crate::sched::Schedule;

    fn systems(src: &str, repo: UpdateRepo) -> (DiocSystem, DpocSystem) {
        let prog = parse_dioc(src).unwrap();
        let d = DiocSystem::initial(
            prog.proc,
            GlobalState::new(),
            repo.clone(),
            FunctionEnv::empty(),
        );
        let net = project(&d.proc, &d.sigma, &[]);
        let mut n = DpocSystem::new(net, repo, FunctionEnv::empty());
        n.fresh = d.fresh;
        (d, n)
    }

    #[test]
    fn single_interaction_is_equivalent() {
        let (d, n) = systems("o : A(5) -> B(x)", UpdateRepo::default());
        let result = equiv_check(&d, &n, 10_000, &Schedule::exhaustive());
        assert!(result.is_equivalent(), "{result}");
    }

    #[test]
    fn update_run_is_equivalent() {
        let repo = parse_updates("update swap { o2 : B(2) -> A(w) }", 1).unwrap();
        let src = "scope @A { o : A(1) -> B(v) }; o3 : B(v) -> A(z)";
        let (d, n) = systems(src, repo);
        let result = equiv_check(&d, &n, 50_000, &Schedule::exhaustive());
        assert!(result.is_equivalent(), "{result}");
    }

    #[test]
    fn while_run_is_equivalent() {
        let src = "k@A = true; while (k)@A { o : A(1) -> B(v); k@A = false }";
        let (d, n) = systems(src, UpdateRepo::default());
        let result = equiv_check(&d, &n, 50_000, &Schedule::exhaustive());
        assert!(result.is_equivalent(), "{result}");
    }

    #[test]
    fn dropped_receive_is_not_equivalent() {
        let (d, n) = systems("o : A(5) -> B(x); o2 : A(6) -> B(y)", UpdateRepo::default());
        let mut net = n.net.clone();
        let b = Role::new("B");
        let entry = net.0.get_mut(&b).unwrap();
        if let DpocProc::Seq(first, _) = entry.0.clone() {
            entry.0 = *first;
        } else {
            panic!("expected a sequence at B, got {:?}", entry.0);
        }
        let broken = DpocSystem { net, ..n };
        let result = equiv_check(&d, &broken, 10_000, &Schedule::exhaustive());
        match result {
            EquivResult::NotEquivalent { .. } => {}
            other => panic!("expected a counterexample, got {other}"),
        }
    }

    #[test]
    fn tiny_fuel_is_inconclusive() {
        let src = "k@A = true; while (k)@A { o : A(1) -> B(v); k@A = false }";
        let (d, n) = systems(src, UpdateRepo::default());
        let result = equiv_check(&d, &n, 2, &Schedule::exhaustive());
        assert!(matches!(result, EquivResult::Inconclusive { .. }), "{result}");
    }
}
