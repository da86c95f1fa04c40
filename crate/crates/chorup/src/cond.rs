//! Well-annotation conditions over network event structures.
//!
//! C1 and C3-C6 are static shape conditions on the event structure of a
//! network; they hold for every projection of a well-annotated connected
//! choreography and catch hand-written networks that could not have come
//! from one. C2 ("only causally minimal events correspond to enabled
//! transitions") is semantic and checked dynamically by
//! [`check_minimality`] along executions.

use std::collections::BTreeMap;

use crate::ast::{GlobalIndex, Network, Role};
use crate::dpoc::{role_step, Action, DpocSystem, Offer};
use crate::events::{event_of_offer, events_net, EventKind, EventSystem};

/// One violated condition with a human-readable witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: &'static str,
    pub witness: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.condition, self.witness)
    }
}

/// Check conditions C1 and C3-C6 on a network. An empty result means the
/// network is well annotated for its causality relation.
pub fn check_wellannotated_dpoc(net: &Network) -> Vec<Violation> {
    let es = events_net(net);
    let mut out = Vec::new();
    check_c1(&es, &mut out);
    check_c3_c4(&es, &mut out);
    check_c5(&es, &mut out);
    check_c6(&es, &mut out);
    out
}

/// C1: at most two communication events on programmer operations share a
/// global index, and two sharing one must be a matching send/receive pair.
fn check_c1(es: &EventSystem, out: &mut Vec<Violation>) {
    let mut by_gi: BTreeMap<GlobalIndex, Vec<usize>> = BTreeMap::new();
    for (i, ev) in es.events.iter().enumerate() {
        if ev.is_prog_comm() {
            by_gi.entry(ev.gi.clone()).or_default().push(i);
        }
    }
    for (gi, group) in by_gi {
        if group.len() > 2 {
            out.push(Violation {
                condition: "C1",
                witness: format!(
                    "{} communication events share global index {gi}",
                    group.len()
                ),
            });
        } else if group.len() == 2 && !es.matching(group[0]).contains(&group[1]) {
            out.push(Violation {
                condition: "C1",
                witness: format!(
                    "non-matching events {} and {} share global index {gi}",
                    es.events[group[0]], es.events[group[1]]
                ),
            });
        }
    }
}

/// C3/C4: non-conflicting sends (receives) of one role on the same
/// operation towards the same peer must be causally comparable.
fn check_c3_c4(es: &EventSystem, out: &mut Vec<Violation>) {
    let n = es.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&es.events[i], &es.events[j]);
            if a.gi == b.gi || a.owner != b.owner {
                continue;
            }
            let cond = match (&a.kind, &b.kind) {
                (EventKind::Send { op: o1, to: t1 }, EventKind::Send { op: o2, to: t2 })
                    if o1 == o2 && t1 == t2 =>
                {
                    "C3"
                }
                (EventKind::Recv { op: o1, from: f1 }, EventKind::Recv { op: o2, from: f2 })
                    if o1 == o2 && f1 == f2 =>
                {
                    "C4"
                }
                _ => continue,
            };
            if !es.conflicting(i, j) && !es.leq(i, j) && !es.leq(j, i) {
                out.push(Violation {
                    condition: cond,
                    witness: format!("{a} and {b} are unordered"),
                });
            }
        }
    }
}

/// C5: matching events lie inside scopes with the same global indexes.
fn check_c5(es: &EventSystem, out: &mut Vec<Violation>) {
    for i in 0..es.len() {
        for &m in es.matching(i) {
            if m < i {
                continue;
            }
            if es.scopes_of(i) != es.scopes_of(m) {
                out.push(Violation {
                    condition: "C5",
                    witness: format!(
                        "matching events {} and {} have different enclosing scopes",
                        es.events[i], es.events[m]
                    ),
                });
            }
        }
    }
}

/// C6: two events with the same own index but different global indexes must
/// be an unfolding pair: one still inside a loop body, the other outside it
/// and causally before the loop's guard event.
fn check_c6(es: &EventSystem, out: &mut Vec<Violation>) {
    let ordered_ok = |e1: usize, e2: usize| {
        es.whiles_of(e1).iter().any(|xi| {
            if es.whiles_of(e2).contains(xi) {
                return false;
            }
            es.events.iter().enumerate().any(|(g, ev)| {
                ev.kind == EventKind::GuardWhile && &ev.gi == xi && es.leq(e2, g)
            })
        })
    };
    let n = es.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&es.events[i], &es.events[j]);
            if a.gi.own() != b.gi.own() || a.gi == b.gi {
                continue;
            }
            if !ordered_ok(i, j) && !ordered_ok(j, i) {
                out.push(Violation {
                    condition: "C6",
                    witness: format!("{a} and {b} duplicate an index outside an unfolding"),
                });
            }
        }
    }
}

/// C2, checked dynamically: every event that could fire in the current
/// state is minimal in the causality relation. Communication halves count
/// as firable only when a rendezvous partner is present.
pub fn check_minimality(sys: &DpocSystem) -> bool {
    minimality_witness(sys).is_none()
}

/// The first enabled-but-not-minimal event of the current state, if any.
pub fn minimality_witness(sys: &DpocSystem) -> Option<String> {
    let es = events_net(&sys.net);
    let mut offers: BTreeMap<Role, Vec<Offer>> = BTreeMap::new();
    for role in sys.net.roles() {
        offers.insert(role.clone(), role_step(sys, &role));
    }
    let has = |role: &Role, pred: &dyn Fn(&Action) -> bool| {
        offers.get(role).is_some_and(|v| v.iter().any(|o| pred(&o.action)))
    };
    for (role, offs) in &offers {
        for o in offs {
            let firable = match &o.action {
                Action::Tau { .. } | Action::LeadUp { .. } | Action::LeadNoUp { .. } => true,
                Action::Send { op, to, .. } => has(to, &|a| {
                    matches!(a, Action::Recv { op: o2, from, .. } if o2 == op && from == role)
                }),
                Action::Recv { op, from, .. } => has(from, &|a| {
                    matches!(a, Action::Send { op: o2, to, .. } if o2 == op && to == role)
                }),
                Action::SendUp { op, to, .. } => has(to, &|a| {
                    matches!(a, Action::RecvUp { op: o2, from } if o2 == op && from == role)
                }),
                Action::RecvUp { op, from } => has(from, &|a| {
                    matches!(a, Action::SendUp { op: o2, to, .. } if o2 == op && to == role)
                }),
            };
            if !firable {
                continue;
            }
            let Some(ev) = event_of_offer(&sys.net, o) else {
                return Some(format!("offer at role {role} maps to no event"));
            };
            let Some(pos) = es.position(&ev) else {
                return Some(format!("event {ev} missing from the event structure"));
            };
            if !es.is_minimal(pos) {
                return Some(format!("enabled event {ev} is not causally minimal"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anno::annotate;
    use crate::ast::{
        DpocIndex, DpocProc, Expr, GlobalState, OperationName, RoleState, UpdateRepo, Value,
    };
    use crate::dpoc::system_step;
    use crate::eval::FunctionEnv;
    use crate::parse::parse_dioc;
    use crate::project::project;

    fn role(s: &str) -> Role {
        Role::new(s)
    }

    fn send(i: u64, op: OperationName, to: &str) -> DpocProc {
        DpocProc::Send {
            idx: DpocIndex::plain(i),
            op,
            expr: Expr::Lit(Value::Int(1)),
            to: role(to),
        }
    }

    fn recv(i: u64, op: OperationName, from: &str) -> DpocProc {
        DpocProc::Recv { idx: DpocIndex::plain(i), op, var: "x".into(), from: role(from) }
    }

    fn net(parts: Vec<(&str, DpocProc)>) -> Network {
        Network(
            parts
                .into_iter()
                .map(|(r, p)| (role(r), (p, RoleState::new())))
                .collect(),
        )
    }

    fn conds(v: &[Violation]) -> Vec<&'static str> {
        v.iter().map(|x| x.condition).collect()
    }

    fn projected_net(src: &str) -> Network {
        let p = annotate(&parse_dioc(src).unwrap().proc);
        let rs: Vec<Role> = crate::ast::roles(&p).into_iter().collect();
        project(&p, &GlobalState::new(), &rs)
    }

    #[test]
    fn projections_are_well_annotated() {
        let srcs = [
            "o : A(1) -> B(x); p : B(x) -> C(y)",
            "k@A = true; while (k)@A { o : A(1) -> B(x); k@A = false }",
            "scope @A { o : A(1) -> B(x) }; if (x)@B { p : B(1) -> A(z) } else { q : B(2) -> A(z) }",
            "{ o : A(1) -> B(x) | p : C(2) -> D(y) }; r : B(1) -> C(w)",
        ];
        for src in srcs {
            let report = check_wellannotated_dpoc(&projected_net(src));
            assert!(report.is_empty(), "{src}: {report:?}");
        }
    }

    #[test]
    fn duplicate_index_same_role_fails_c1() {
        let o = OperationName::prog(1, "o");
        let n = net(vec![
            ("A", DpocProc::par(send(1, o.clone(), "B"), send(1, o.clone(), "B"))),
            ("B", recv(1, o, "A")),
        ]);
        let report = check_wellannotated_dpoc(&n);
        assert!(conds(&report).contains(&"C1"), "{report:?}");
    }

    #[test]
    fn unordered_same_operation_sends_fail_c3() {
        let o = OperationName::prog(1, "o");
        let bad = net(vec![
            ("A", DpocProc::par(send(1, o.clone(), "B"), send(2, o.clone(), "B"))),
            ("B", DpocProc::seq(recv(1, o.clone(), "A"), recv(2, o.clone(), "A"))),
        ]);
        let report = check_wellannotated_dpoc(&bad);
        assert!(conds(&report).contains(&"C3"), "{report:?}");

        let good = net(vec![
            ("A", DpocProc::seq(send(1, o.clone(), "B"), send(2, o.clone(), "B"))),
            ("B", DpocProc::seq(recv(1, o.clone(), "A"), recv(2, o, "A"))),
        ]);
        assert!(!conds(&check_wellannotated_dpoc(&good)).contains(&"C3"));
    }

    #[test]
    fn unordered_same_operation_receives_fail_c4() {
        let o = OperationName::prog(1, "o");
        let n = net(vec![
            ("A", DpocProc::seq(send(1, o.clone(), "B"), send(2, o.clone(), "B"))),
            ("B", DpocProc::par(recv(1, o.clone(), "A"), recv(2, o, "A"))),
        ]);
        let report = check_wellannotated_dpoc(&n);
        assert!(conds(&report).contains(&"C4"), "{report:?}");
    }

    #[test]
    fn matching_event_outside_the_scope_fails_c5() {
        let o = OperationName::prog(4, "o");
        let n = net(vec![
            (
                "A",
                DpocProc::ScopeCoord {
                    idx: crate::ast::Index(3),
                    lead: role("A"),
                    body: Box::new(send(4, o.clone(), "B")),
                    roleset: [role("A"), role("B")].into_iter().collect(),
                    name: None,
                },
            ),
            ("B", recv(4, o, "A")),
        ]);
        let report = check_wellannotated_dpoc(&n);
        assert!(conds(&report).contains(&"C5"), "{report:?}");
    }

    #[test]
    fn duplicated_index_after_a_loop_fails_c6() {
        let assign = |i: u64| DpocProc::Assign {
            idx: DpocIndex::plain(i),
            var: "x".into(),
            expr: Expr::Lit(Value::Int(1)),
        };
        let looped = |body: DpocProc| DpocProc::While {
            idx: crate::ast::Index(1),
            cond: Expr::Var("k".into()),
            body: Box::new(body),
        };
        let bad = net(vec![("A", DpocProc::seq(looped(assign(2)), assign(2)))]);
        assert!(conds(&check_wellannotated_dpoc(&bad)).contains(&"C6"));

        // The unfolding shape: the copy before the loop is fine.
        let good = net(vec![("A", DpocProc::seq(assign(2), looped(assign(2))))]);
        assert!(conds(&check_wellannotated_dpoc(&good)).is_empty());
    }

    #[test]
    fn minimality_holds_along_projection_runs() {
        let src = "k@A = true; while (k)@A { o : A(1) -> B(x); k@A = false }; p : A(2) -> B(y)";
        let p = annotate(&parse_dioc(src).unwrap().proc);
        let rs: Vec<Role> = crate::ast::roles(&p).into_iter().collect();
        let net = project(&p, &GlobalState::new(), &rs);
        let mut stack = vec![DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty())];
        let mut seen = std::collections::BTreeSet::new();
        let mut visited = 0;
        while let Some(s) = stack.pop() {
            if !seen.insert(format!("{:?}", s.net)) {
                continue;
            }
            visited += 1;
            assert!(check_minimality(&s), "state {visited}: {:?}", minimality_witness(&s));
            for step in system_step(&s) {
                stack.push(step.succ);
            }
        }
        assert!(visited > 10);
    }
}
