//! Operational semantics of choreographies.
//!
//! A system is a choreography together with the global state, the current
//! update repository and a fresh-index counter. Systems step by interaction,
//! assignment, guard evaluation, scope decision (apply an update or commit
//! to the original body) and final tick.

use crate::anno::{max_index, reindex};
use crate::ast::{
    roles, DiocProc, GlobalState, Label, Role, UpdateEntry, UpdateRepo, Value, Var,
};
use crate::eval::{eval_expr, FunctionEnv};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiocSystem {
    pub sigma: GlobalState,
    pub repo: UpdateRepo,
    pub proc: DiocProc,
    pub fresh: u64,
    pub fns: FunctionEnv,
}

impl DiocSystem {
    /// Build the initial system; the fresh counter starts past every index
    /// used by the program (update bodies are offset by it on application).
    pub fn initial(
        proc: DiocProc,
        sigma: GlobalState,
        repo: UpdateRepo,
        fns: FunctionEnv,
    ) -> DiocSystem {
        let fresh = max_index(&proc);
        DiocSystem { sigma, repo, proc, fresh, fns }
    }
}

#[derive(Clone, Debug)]
pub struct DiocStep {
    pub label: Label,
    pub succ: DiocSystem,
    /// For scope decisions (`Update`/`NoUp`): the deciding scope's index,
    /// used by schedules to pick per-scope behaviour.
    pub scope_idx: Option<u64>,
}

/// Whether an update may be applied at a scope with the given body roles and
/// name: its body must be connected, only mention roles of the scope, and
/// match the scope's name when it targets one.
pub fn update_applicable(
    entry: &UpdateEntry,
    scope_roles: &BTreeSet<Role>,
    scope_name: Option<&str>,
) -> bool {
    entry.connected
        && roles(&entry.body).is_subset(scope_roles)
        && match &entry.target {
            None => true,
            Some(t) => scope_name == Some(t.as_str()),
        }
}

/// Termination residue: `Some` when the term can tick, carrying what it
/// becomes. Only inert compositions can tick.
fn tick_res(p: &DiocProc) -> Option<DiocProc> {
    match p {
        DiocProc::Skip => Some(DiocProc::End),
        DiocProc::Seq(a, b) => {
            tick_res(a)?;
            tick_res(b)
        }
        DiocProc::Par(a, b) => {
            let a = tick_res(a)?;
            let b = tick_res(b)?;
            Some(DiocProc::par(a, b))
        }
        _ => None,
    }
}

pub fn can_tick_dioc(p: &DiocProc) -> bool {
    tick_res(p).is_some()
}

struct Succ {
    label: Label,
    residue: DiocProc,
    assign: Option<(Role, Var, Value)>,
    fresh_add: u64,
    scope_idx: Option<u64>,
}

fn succs(p: &DiocProc, sys: &DiocSystem) -> Vec<Succ> {
    match p {
        DiocProc::Interaction { idx, op, sender, expr, receiver, var } => {
            let value = eval_expr(expr, &sys.sigma.role_state(sender), &sys.fns);
            vec![Succ {
                label: Label::Interaction {
                    op: crate::ast::OperationName::prog(idx.0, op.clone()),
                    sender: sender.clone(),
                    value: value.clone(),
                    receiver: receiver.clone(),
                    var: var.clone(),
                },
                residue: DiocProc::Assign {
                    idx: *idx,
                    role: receiver.clone(),
                    var: var.clone(),
                    expr: crate::ast::Expr::Lit(value),
                },
                assign: None,
                fresh_add: 0,
                scope_idx: None,
            }]
        }
        DiocProc::Assign { role, var, expr, .. } => {
            let value = eval_expr(expr, &sys.sigma.role_state(role), &sys.fns);
            vec![Succ {
                label: Label::Tau,
                residue: DiocProc::Skip,
                assign: Some((role.clone(), var.clone(), value)),
                fresh_add: 0,
                scope_idx: None,
            }]
        }
        DiocProc::Seq(a, b) => {
            let mut out: Vec<Succ> = succs(a, sys)
                .into_iter()
                .filter(|s| s.label != Label::Tick)
                .map(|s| Succ { residue: DiocProc::seq(s.residue, (**b).clone()), ..s })
                .collect();
            if can_tick_dioc(a) {
                out.extend(succs(b, sys));
            }
            out
        }
        DiocProc::Par(a, b) => {
            let mut out: Vec<Succ> = succs(a, sys)
                .into_iter()
                .filter(|s| s.label != Label::Tick)
                .map(|s| Succ { residue: DiocProc::par(s.residue, (**b).clone()), ..s })
                .collect();
            out.extend(
                succs(b, sys)
                    .into_iter()
                    .filter(|s| s.label != Label::Tick)
                    .map(|s| Succ { residue: DiocProc::par((**a).clone(), s.residue), ..s }),
            );
            if let (Some(ra), Some(rb)) = (tick_res(a), tick_res(b)) {
                out.push(Succ {
                    label: Label::Tick,
                    residue: DiocProc::par(ra, rb),
                    assign: None,
                    fresh_add: 0,
                    scope_idx: None,
                });
            }
            out
        }
        DiocProc::Skip => vec![Succ {
            label: Label::Tick,
            residue: DiocProc::End,
            assign: None,
            fresh_add: 0,
            scope_idx: None,
        }],
        DiocProc::End => vec![],
        DiocProc::If { role, cond, then_br, else_br, .. } => {
            let guard = eval_expr(cond, &sys.sigma.role_state(role), &sys.fns);
            let branch = if guard.truthy() { then_br } else { else_br };
            vec![Succ {
                label: Label::Tau,
                residue: (**branch).clone(),
                assign: None,
                fresh_add: 0,
                scope_idx: None,
            }]
        }
        DiocProc::While { role, cond, body, .. } => {
            let guard = eval_expr(cond, &sys.sigma.role_state(role), &sys.fns);
            let residue = if guard.truthy() {
                DiocProc::seq((**body).clone(), p.clone())
            } else {
                DiocProc::Skip
            };
            vec![Succ { label: Label::Tau, residue, assign: None, fresh_add: 0, scope_idx: None }]
        }
        DiocProc::Scope { idx, body, props, .. } => {
            let scope_roles = roles(body);
            let scope_name = props.get("name").map(String::as_str);
            let mut out = Vec::new();
            for entry in sys.repo.iter() {
                if update_applicable(entry, &scope_roles, scope_name) {
                    out.push(Succ {
                        label: Label::Update {
                            name: entry.name.clone(),
                            body_hash: entry.body_hash,
                        },
                        residue: reindex(&entry.body, sys.fresh),
                        assign: None,
                        fresh_add: max_index(&entry.body),
                        scope_idx: Some(idx.0),
                    });
                }
            }
            out.push(Succ {
                label: Label::NoUp,
                residue: (**body).clone(),
                assign: None,
                fresh_add: 0,
                scope_idx: Some(idx.0),
            });
            out
        }
    }
}

/// All enabled steps of the system, in a fixed deterministic order.
pub fn enabled_dioc(sys: &DiocSystem) -> Vec<DiocStep> {
    succs(&sys.proc, sys)
        .into_iter()
        .map(|s| {
            let mut succ = sys.clone();
            succ.proc = s.residue;
            succ.fresh += s.fresh_add;
            if let Some((role, var, value)) = s.assign {
                succ.sigma.set(&role, var, value);
            }
            DiocStep { label: s.label, succ, scope_idx: s.scope_idx }
        })
        .collect()
}

/// Take the `k`-th enabled step, if any.
pub fn step_dioc(sys: &DiocSystem, k: usize) -> Option<DiocStep> {
    enabled_dioc(sys).into_iter().nth(k)
}

/// A set of traces: completed runs and runs cut short by fuel.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceSet {
    pub complete: BTreeSet<Vec<Label>>,
    pub truncated: BTreeSet<Vec<Label>>,
}

impl TraceSet {
    pub fn is_exhaustive(&self) -> bool {
        self.truncated.is_empty()
    }
}

/// All weak traces of the system under a schedule: every label sequence with
/// the silent steps removed, explored exhaustively up to `fuel` steps per
/// run.
pub fn weak_traces_dioc(
    sys: &DiocSystem,
    fuel: u64,
    sched: &crate::sched::Schedule,
) -> TraceSet {
    let mut out = TraceSet::default();
    walk(sys, sched, 0, fuel, &mut Vec::new(), &mut out);
    fn walk(
        sys: &DiocSystem,
        sched: &crate::sched::Schedule,
        cursor: usize,
        fuel: u64,
        prefix: &mut Vec<Label>,
        out: &mut TraceSet,
    ) {
        let steps = crate::sched::scheduled_steps_dioc(sys, sched, cursor);
        if steps.is_empty() {
            out.complete.insert(prefix.clone());
            return;
        }
        if fuel == 0 {
            out.truncated.insert(prefix.clone());
            return;
        }
        for (step, next_cursor) in steps {
            let visible = !step.label.is_weak_hidden(false);
            if visible {
                prefix.push(step.label.clone());
            }
            walk(&step.succ, sched, next_cursor, fuel - 1, prefix, out);
            if visible {
                prefix.pop();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Expr, Index};
    use crate::parse::{parse_dioc, parse_updates};

    fn sys_of(src: &str) -> DiocSystem {
        let prog = parse_dioc(src).unwrap();
        DiocSystem::initial(
            prog.proc,
            GlobalState::new(),
            UpdateRepo::new(0),
            FunctionEnv::empty(),
        )
    }

    #[test]
    fn interaction_leaves_assignment_residue() {
        let sys = sys_of("ping : A(41 + 1) -> B(y)");
        let steps = enabled_dioc(&sys);
        assert_eq!(steps.len(), 1);
        match &steps[0].label {
            Label::Interaction { value, .. } => assert_eq!(*value, Value::Int(42)),
            other => panic!("unexpected label: {other:?}"),
        }
        match &steps[0].succ.proc {
            DiocProc::Assign { idx, role, var, expr } => {
                assert_eq!(*idx, Index(1));
                assert_eq!(role, &Role::new("B"));
                assert_eq!(var, "y");
                assert_eq!(*expr, Expr::Lit(Value::Int(42)));
            }
            other => panic!("unexpected residue: {other:?}"),
        }
        // The residue assignment then stores the value at the receiver.
        let next = enabled_dioc(&steps[0].succ);
        assert_eq!(next[0].label, Label::Tau);
        assert_eq!(next[0].succ.sigma.get(&Role::new("B"), "y"), Value::Int(42));
    }

    #[test]
    fn while_unfolds_and_exits() {
        let sys = sys_of("k@A = true; while (k)@A { k@A = false }");
        // k := true
        let s1 = &enabled_dioc(&sys)[0].succ;
        // unfold: residue is body; while
        let s2 = &enabled_dioc(s1)[0].succ;
        match &s2.proc {
            DiocProc::Seq(body, rest) => {
                assert!(matches!(**body, DiocProc::Assign { .. }));
                assert!(matches!(**rest, DiocProc::While { .. }));
            }
            other => panic!("unexpected residue: {other:?}"),
        }
        // k := false, then the guard exits to the inert process.
        let s3 = &enabled_dioc(s2)[0].succ;
        let s4 = &enabled_dioc(s3)[0].succ;
        assert_eq!(s4.proc, DiocProc::Skip);
        // and the system ticks.
        let s5 = &enabled_dioc(s4)[0];
        assert_eq!(s5.label, Label::Tick);
        assert_eq!(s5.succ.proc, DiocProc::End);
        assert!(enabled_dioc(&s5.succ).is_empty());
    }

    #[test]
    fn err_guard_selects_false_branch() {
        let sys = sys_of("if (unbound)@A { x@A = 1 } else { x@A = 2 }");
        let s1 = &enabled_dioc(&sys)[0].succ;
        match &s1.proc {
            DiocProc::Assign { expr, .. } => assert_eq!(*expr, Expr::Lit(Value::Int(2))),
            other => panic!("unexpected residue: {other:?}"),
        }
    }

    #[test]
    fn parallel_interleaves_and_ticks_together() {
        let sys = sys_of("{ x@A = 1 | y@B = 2 }");
        assert_eq!(enabled_dioc(&sys).len(), 2);
        let s1 = &enabled_dioc(&sys)[0].succ; // x := 1
        let s2 = &enabled_dioc(s1)[0].succ; // y := 2
        let steps = enabled_dioc(s2);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, Label::Tick);
    }

    #[test]
    fn scope_offers_noup_and_applicable_updates() {
        let prog = parse_dioc("scope @A { greet : A(1) -> B(x) }").unwrap();
        let repo = parse_updates(
            r#"
            update swap { greet : A(2) -> B(x) }
            update other_roles { hello : A(2) -> C(x) }
            "#,
            1,
        )
        .unwrap();
        let sys = DiocSystem::initial(prog.proc, GlobalState::new(), repo, FunctionEnv::empty());
        let steps = enabled_dioc(&sys);
        // `other_roles` mentions role C, outside the scope body: not offered.
        assert_eq!(steps.len(), 2);
        match &steps[0].label {
            Label::Update { name, .. } => assert_eq!(name, "swap"),
            other => panic!("unexpected label: {other:?}"),
        }
        assert_eq!(steps[1].label, Label::NoUp);
        assert_eq!(steps[0].scope_idx, Some(1));
        // The applied body is shifted past the fresh counter.
        assert_eq!(crate::anno::max_index(&steps[0].succ.proc), 2 + 10000);
        assert_eq!(steps[0].succ.fresh, 2 + 10000);
    }

    #[test]
    fn target_matching() {
        let prog = parse_dioc(r#"scope @A { x@A = 1 } prop { name = "here" }"#).unwrap();
        let repo = parse_updates(
            r#"
            update yes target here { y@A = 2 }
            update no target elsewhere { y@A = 3 }
            update always { y@A = 4 }
            "#,
            1,
        )
        .unwrap();
        let sys = DiocSystem::initial(prog.proc, GlobalState::new(), repo, FunctionEnv::empty());
        let names: Vec<String> = enabled_dioc(&sys)
            .iter()
            .filter_map(|s| match &s.label {
                Label::Update { name, .. } => Some(name.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(names, vec!["yes".to_string(), "always".to_string()]);
    }
}
