//! Bounded exploration checkers for the runtime guarantees: deadlock
//! freedom, race freedom, and orphan-message freedom.
//!
//! Each checker walks the reachable states of a network system, following
//! every enabled step including all update decisions at scopes. The state
//! bound (`fuel`) caps the number of distinct states visited; hitting it
//! yields an inconclusive verdict, never a spurious pass or fail.

use std::collections::BTreeSet;

use crate::ast::{DpocProc, Label};
use crate::dpoc::{role_step, system_step, Action, DpocStep, DpocSystem};
use crate::pretty::{pretty_network, PrettyMode};

/// Outcome of a bounded exploration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass { states: usize },
    Fail { witness: String },
    /// The state bound was reached before the space was exhausted.
    Inconclusive { states: usize },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
    pub fn failed(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass { states } => write!(f, "pass ({states} states)"),
            Verdict::Fail { witness } => write!(f, "fail: {witness}"),
            Verdict::Inconclusive { states } => {
                write!(f, "inconclusive (state bound hit after {states} states)")
            }
        }
    }
}

fn explore(
    sys: &DpocSystem,
    fuel: usize,
    mut check: impl FnMut(&DpocSystem, &[DpocStep]) -> Option<String>,
) -> Verdict {
    let mut stack = vec![sys.clone()];
    let mut seen = BTreeSet::new();
    let mut states = 0usize;
    while let Some(s) = stack.pop() {
        if !seen.insert(format!("{:?}|{}", s.net, s.fresh)) {
            continue;
        }
        if states == fuel {
            return Verdict::Inconclusive { states };
        }
        states += 1;
        let steps = system_step(&s);
        if let Some(witness) = check(&s, &steps) {
            return Verdict::Fail { witness };
        }
        for st in steps {
            stack.push(st.succ);
        }
    }
    Verdict::Pass { states }
}

fn all_end(sys: &DpocSystem) -> bool {
    sys.net.0.values().all(|(p, _)| matches!(p, DpocProc::End))
}

/// Every maximal finite run must end with the termination tick: a state
/// with no enabled step is accepted only if it is the all-`0` network the
/// tick leaves behind.
pub fn check_deadlock_freedom(sys: &DpocSystem, fuel: usize) -> Verdict {
    explore(sys, fuel, |s, steps| {
        if steps.is_empty() && !all_end(s) {
            Some(format!(
                "stuck non-terminated state:\n{}",
                pretty_network(&s.net, PrettyMode::Display)
            ))
        } else {
            None
        }
    })
}

/// No two enabled sends may interact with the same enabled receive, and no
/// two enabled receives with the same send, at any reachable state.
pub fn check_race_freedom(sys: &DpocSystem, fuel: usize) -> Verdict {
    explore(sys, fuel, |s, _| {
        let mut sends = Vec::new();
        let mut recvs = Vec::new();
        for role in s.net.roles() {
            for o in role_step(s, role) {
                match &o.action {
                    Action::Send { op, to, .. } | Action::SendUp { op, to, .. } => {
                        sends.push((o.role.clone(), op.clone(), to.clone()))
                    }
                    Action::Recv { op, from, .. } | Action::RecvUp { op, from } => {
                        recvs.push((o.role.clone(), op.clone(), from.clone()))
                    }
                    _ => {}
                }
            }
        }
        for (role, op, from) in &recvs {
            let n = sends.iter().filter(|(sr, so, st)| sr == from && so == op && st == role).count();
            if n > 1 {
                return Some(format!("{n} sends on {op} from {from} race for one receive at {role}"));
            }
        }
        for (role, op, to) in &sends {
            let n = recvs.iter().filter(|(rr, ro, rf)| rr == to && ro == op && rf == role).count();
            if n > 1 {
                return Some(format!("{n} receives on {op} at {to} race for one send from {role}"));
            }
        }
        None
    })
}

fn has_send_leaf(p: &DpocProc) -> bool {
    match p {
        DpocProc::Send { .. } | DpocProc::SendUpdate { .. } => true,
        DpocProc::Seq(a, b) | DpocProc::Par(a, b) => has_send_leaf(a) || has_send_leaf(b),
        DpocProc::If { then_br, else_br, .. } => has_send_leaf(then_br) || has_send_leaf(else_br),
        DpocProc::While { body, .. }
        | DpocProc::ScopeCoord { body, .. }
        | DpocProc::ScopeSimple { body, .. } => has_send_leaf(body),
        _ => false,
    }
}

/// After the termination tick the residual network must contain no send;
/// a stuck state must not hold an enabled send that can never be consumed.
pub fn check_orphan_freedom(sys: &DpocSystem, fuel: usize) -> Verdict {
    explore(sys, fuel, |s, steps| {
        for st in steps {
            if st.label == Label::Tick {
                for (role, (p, _)) in &st.succ.net.0 {
                    if has_send_leaf(p) {
                        return Some(format!("send survives termination at role {role}"));
                    }
                }
            }
        }
        if steps.is_empty() {
            for role in s.net.roles() {
                for o in role_step(s, role) {
                    if matches!(o.action, Action::Send { .. } | Action::SendUp { .. }) {
                        return Some(format!("orphan send pending at stuck role {role}"));
                    }
                }
            }
        }
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anno::annotate;
    use crate::ast::{
        DpocIndex, Expr, GlobalState, Network, OperationName, Role, RoleState, UpdateRepo, Value,
    };
    use crate::eval::FunctionEnv;
    use crate::parse::{parse_dioc, parse_updates};
    use crate::project::project;

    fn projected(src: &str, repo: UpdateRepo) -> DpocSystem {
        let p = annotate(&parse_dioc(src).unwrap().proc);
        let rs: Vec<Role> = crate::ast::roles(&p).into_iter().collect();
        let net = project(&p, &GlobalState::new(), &rs);
        DpocSystem::new(net, repo, FunctionEnv::empty())
    }

    #[test]
    fn projections_pass_all_three_checks() {
        let repo = parse_updates("update swap { o2 : B(2) -> A(w) }", 1).unwrap();
        let sys = projected(
            "k@A = true; while (k)@A { scope @A { o : A(1) -> B(v) }; k@A = false }",
            repo,
        );
        assert!(check_deadlock_freedom(&sys, 10_000).passed());
        assert!(check_race_freedom(&sys, 10_000).passed());
        assert!(check_orphan_freedom(&sys, 10_000).passed());
    }

    #[test]
    fn lone_receive_deadlocks() {
        let o = OperationName::prog(1, "o");
        let net = Network(
            [(
                Role::new("B"),
                (
                    DpocProc::Recv {
                        idx: DpocIndex::plain(1),
                        op: o,
                        var: "x".into(),
                        from: Role::new("A"),
                    },
                    RoleState::new(),
                ),
            )]
            .into_iter()
            .collect(),
        );
        let sys = DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty());
        let v = check_deadlock_freedom(&sys, 100);
        assert!(v.failed(), "{v}");
    }

    #[test]
    fn duplicated_send_same_endpoints_races() {
        let o = OperationName::prog(1, "o");
        let send = DpocProc::Send {
            idx: DpocIndex::plain(1),
            op: o.clone(),
            expr: Expr::Lit(Value::Int(1)),
            to: Role::new("B"),
        };
        let net = Network(
            [
                (Role::new("A"), (DpocProc::par(send.clone(), send), RoleState::new())),
                (
                    Role::new("B"),
                    (
                        DpocProc::Recv {
                            idx: DpocIndex::plain(1),
                            op: o,
                            var: "x".into(),
                            from: Role::new("A"),
                        },
                        RoleState::new(),
                    ),
                ),
            ]
            .into_iter()
            .collect(),
        );
        let sys = DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty());
        let v = check_race_freedom(&sys, 100);
        assert!(v.failed(), "{v}");
    }

    #[test]
    fn stray_send_is_an_orphan() {
        let o = OperationName::prog(9, "stray");
        let net = Network(
            [(
                Role::new("A"),
                (
                    DpocProc::Send {
                        idx: DpocIndex::plain(9),
                        op: o,
                        expr: Expr::Lit(Value::Int(1)),
                        to: Role::new("B"),
                    },
                    RoleState::new(),
                ),
            ), (Role::new("B"), (DpocProc::Skip, RoleState::new()))]
            .into_iter()
            .collect(),
        );
        let sys = DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty());
        let v = check_orphan_freedom(&sys, 100);
        assert!(v.failed(), "{v}");
    }

    #[test]
    fn fuel_exhaustion_is_inconclusive() {
        let sys = projected("o : A(1) -> B(x); p : B(2) -> A(y)", UpdateRepo::new(0));
        let v = check_deadlock_freedom(&sys, 1);
        assert_eq!(v, Verdict::Inconclusive { states: 1 });
    }
}
