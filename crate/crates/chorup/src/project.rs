//! Projection of a choreography onto per-role processes.
//!
//! The projection is homomorphic on composition and inserts the auxiliary
//! coordination each construct needs: conditionals broadcast the evaluated
//! guard (`cnd*`), loops broadcast entry/exit and collect acknowledgements
//! (`wb*`/`we*`), scopes are kept by every involved role so that the
//! coordinator can later distribute updates (`sb*`/`se*`).

use crate::ast::{
    aux_var, roles, AuxKind, DiocProc, DpocIndex, DpocProc, Expr, GlobalState, Index, IndexVariant,
    Network, OperationName, Role, Value,
};
use std::collections::BTreeSet;

/// Project one role out of a choreography.
pub fn pi(p: &DiocProc, r: &Role) -> DpocProc {
    match p {
        DiocProc::Interaction { idx, op, sender, expr, receiver, var } => {
            if r == sender {
                DpocProc::Send {
                    idx: DpocIndex::plain(idx.0),
                    op: OperationName::prog(idx.0, op.clone()),
                    expr: expr.clone(),
                    to: receiver.clone(),
                }
            } else if r == receiver {
                DpocProc::Recv {
                    idx: DpocIndex::plain(idx.0),
                    op: OperationName::prog(idx.0, op.clone()),
                    var: var.clone(),
                    from: sender.clone(),
                }
            } else {
                DpocProc::Skip
            }
        }
        DiocProc::Assign { idx, role, var, expr } => {
            if r == role {
                DpocProc::Assign {
                    idx: DpocIndex::plain(idx.0),
                    var: var.clone(),
                    expr: expr.clone(),
                }
            } else {
                DpocProc::Skip
            }
        }
        DiocProc::Seq(a, b) => DpocProc::seq(pi(a, r), pi(b, r)),
        DiocProc::Par(a, b) => DpocProc::par(pi(a, r), pi(b, r)),
        DiocProc::Skip => DpocProc::Skip,
        DiocProc::End => DpocProc::End,
        DiocProc::If { idx, role, cond, then_br, else_br } => {
            let i = idx.0;
            let mut participants: BTreeSet<Role> = roles(then_br);
            participants.extend(roles(else_br));
            participants.remove(role);
            if r == role {
                let branch = |value: bool, body: &DiocProc| {
                    let variant = if value { IndexVariant::True } else { IndexVariant::False };
                    let sends: Vec<DpocProc> = participants
                        .iter()
                        .map(|s| DpocProc::Send {
                            idx: DpocIndex::with(i, variant),
                            op: OperationName::aux(i, AuxKind::Cnd, i),
                            expr: Expr::Lit(Value::Bool(value)),
                            to: s.clone(),
                        })
                        .collect();
                    let projected = pi(body, r);
                    if sends.is_empty() {
                        projected
                    } else {
                        DpocProc::seq(DpocProc::par_all(sends), projected)
                    }
                };
                DpocProc::If {
                    idx: Index(i),
                    cond: cond.clone(),
                    then_br: Box::new(branch(true, then_br)),
                    else_br: Box::new(branch(false, else_br)),
                }
            } else if participants.contains(r) {
                let x = aux_var(i);
                DpocProc::seq(
                    DpocProc::Recv {
                        idx: DpocIndex::with(i, IndexVariant::Recv),
                        op: OperationName::aux(i, AuxKind::Cnd, i),
                        var: x.clone(),
                        from: role.clone(),
                    },
                    DpocProc::If {
                        idx: Index(i),
                        cond: Expr::Var(x),
                        then_br: Box::new(pi(then_br, r)),
                        else_br: Box::new(pi(else_br, r)),
                    },
                )
            } else {
                DpocProc::Skip
            }
        }
        DiocProc::While { idx, role, cond, body } => {
            let i = idx.0;
            let mut participants: BTreeSet<Role> = roles(body);
            participants.remove(role);
            if r == role {
                if participants.is_empty() {
                    return DpocProc::While {
                        idx: Index(i),
                        cond: cond.clone(),
                        body: Box::new(pi(body, r)),
                    };
                }
                let wb = |value: bool| {
                    let variant = if value { IndexVariant::True } else { IndexVariant::False };
                    DpocProc::par_all(
                        participants
                            .iter()
                            .map(|s| DpocProc::Send {
                                idx: DpocIndex::with(i, variant),
                                op: OperationName::aux(i, AuxKind::Wb, i),
                                expr: Expr::Lit(Value::Bool(value)),
                                to: s.clone(),
                            })
                            .collect(),
                    )
                };
                let we_recvs = DpocProc::par_all(
                    participants
                        .iter()
                        .map(|s| DpocProc::Recv {
                            idx: DpocIndex::with(i, IndexVariant::Close),
                            op: OperationName::aux(i, AuxKind::We, i),
                            var: "aux$_".into(),
                            from: s.clone(),
                        })
                        .collect(),
                );
                let inner = DpocProc::seq(wb(true), DpocProc::seq(pi(body, r), we_recvs));
                DpocProc::seq(
                    DpocProc::While { idx: Index(i), cond: cond.clone(), body: Box::new(inner) },
                    wb(false),
                )
            } else if participants.contains(r) {
                let x = aux_var(i);
                let wb_recv = || DpocProc::Recv {
                    idx: DpocIndex::with(i, IndexVariant::Recv),
                    op: OperationName::aux(i, AuxKind::Wb, i),
                    var: x.clone(),
                    from: role.clone(),
                };
                let we_send = DpocProc::Send {
                    idx: DpocIndex::with(i, IndexVariant::Close),
                    op: OperationName::aux(i, AuxKind::We, i),
                    expr: Expr::Lit(Value::Str("ok".into())),
                    to: role.clone(),
                };
                let inner = DpocProc::seq(pi(body, r), DpocProc::seq(we_send, wb_recv()));
                DpocProc::seq(
                    wb_recv(),
                    DpocProc::While { idx: Index(i), cond: Expr::Var(x), body: Box::new(inner) },
                )
            } else {
                DpocProc::Skip
            }
        }
        DiocProc::Scope { idx, role, body, props } => {
            let body_roles = roles(body);
            if r == role {
                DpocProc::ScopeCoord {
                    idx: *idx,
                    lead: role.clone(),
                    body: Box::new(pi(body, r)),
                    roleset: body_roles,
                    name: props.get("name").cloned(),
                }
            } else if body_roles.contains(r) {
                DpocProc::ScopeSimple { idx: *idx, lead: role.clone(), body: Box::new(pi(body, r)) }
            } else {
                DpocProc::Skip
            }
        }
    }
}

/// Project a whole choreography: one process per role of the program (plus
/// any extra declared roles, which get the inert process), each paired with
/// that role's slice of the global state.
pub fn project(p: &DiocProc, sigma: &GlobalState, extra_roles: &[Role]) -> Network {
    let mut all: BTreeSet<Role> = roles(p);
    all.extend(extra_roles.iter().cloned());
    Network(
        all.into_iter()
            .map(|r| {
                let proc = pi(p, &r);
                let state = sigma.role_state(&r);
                (r, (proc, state))
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_dioc;
    use crate::pretty::{pretty_dpoc, PrettyMode};

    fn r(s: &str) -> Role {
        Role::new(s)
    }

    #[test]
    fn interaction_projects_to_ends() {
        let p = parse_dioc("ping : A(x + 1) -> B(y)").unwrap().proc;
        let a = pi(&p, &r("A"));
        let b = pi(&p, &r("B"));
        let c = pi(&p, &r("C"));
        assert_eq!(pretty_dpoc(&a, PrettyMode::Strict), "1 1.ping : x + 1 to B\n");
        assert_eq!(pretty_dpoc(&b, PrettyMode::Strict), "1 1.ping : y from A\n");
        assert_eq!(c, DpocProc::Skip);
    }

    #[test]
    fn conditional_coordinator_broadcasts() {
        let src = r#"
            if (go)@A {
                step : A(1) -> B(u)
            } else {
                halt : A(0) -> B(v)
            }
        "#;
        let p = parse_dioc(src).unwrap().proc;
        let a = pretty_dpoc(&pi(&p, &r("A")), PrettyMode::Display);
        assert_eq!(
            a,
            "1 if (go) {\n  1?t cnd*_1 : true to B;\n  2 step : 1 to B\n} else {\n  1?f cnd*_1 : false to B;\n  3 halt : 0 to B\n}\n"
        );
        let b = pretty_dpoc(&pi(&p, &r("B")), PrettyMode::Display);
        assert_eq!(
            b,
            "1?r cnd*_1 : x_1 from A;\n1 if (x_1) {\n  2 step : u from A\n} else {\n  3 halt : v from A\n}\n"
        );
    }

    #[test]
    fn conditional_without_participants_has_no_aux() {
        let p = parse_dioc("if (go)@A { x@A = 1 } else { x@A = 2 }").unwrap().proc;
        let a = pi(&p, &r("A"));
        match &a {
            DpocProc::If { then_br, .. } => {
                assert!(matches!(**then_br, DpocProc::Assign { .. }))
            }
            other => panic!("unexpected shape: {other:?}"),
        }
        assert_eq!(pi(&p, &r("B")), DpocProc::Skip);
    }

    #[test]
    fn while_coordinator_and_participant() {
        let src = "while (k)@A { step : A(1) -> B(u) }";
        let p = parse_dioc(src).unwrap().proc;
        let a = pretty_dpoc(&pi(&p, &r("A")), PrettyMode::Display);
        assert_eq!(
            a,
            "1 while (k) {\n  1?t wb*_1 : true to B;\n  2 step : 1 to B;\n  1?c we*_1 : _ from B\n};\n1?f wb*_1 : false to B\n"
        );
        let b = pretty_dpoc(&pi(&p, &r("B")), PrettyMode::Display);
        assert_eq!(
            b,
            "1?r wb*_1 : x_1 from A;\n1 while (x_1) {\n  2 step : u from A;\n  1?c we*_1 : \"ok\" to A;\n  1?r wb*_1 : x_1 from A\n}\n"
        );
    }

    #[test]
    fn scope_keeps_all_involved_roles() {
        let src = r#"
            scope @A {
                step : A(1) -> B(u)
            } prop { name = "patchpoint" }
        "#;
        let p = parse_dioc(src).unwrap().proc;
        match pi(&p, &r("A")) {
            DpocProc::ScopeCoord { roleset, name, .. } => {
                assert_eq!(roleset, [r("A"), r("B")].into_iter().collect());
                assert_eq!(name.as_deref(), Some("patchpoint"));
            }
            other => panic!("unexpected shape: {other:?}"),
        }
        assert!(matches!(pi(&p, &r("B")), DpocProc::ScopeSimple { .. }));
        assert_eq!(pi(&p, &r("C")), DpocProc::Skip);
    }

    #[test]
    fn project_covers_declared_roles() {
        let prog = parse_dioc("role C\nping : A(1) -> B(x)").unwrap();
        let net = project(&prog.proc, &GlobalState::new(), &prog.declared_roles);
        assert_eq!(net.0.len(), 3);
        assert_eq!(net.proc_of(&r("C")), Some(&DpocProc::Skip));
    }
}
