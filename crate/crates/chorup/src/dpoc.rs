//! Operational semantics of networks of per-role processes.
//!
//! Each role offers steps from the enabled positions of its process: silent
//! moves (assignments, guards), communication halves (sends, receives), and
//! scope moves (a coordinator leading an update or committing to the body, a
//! participant receiving either code or the go-ahead). The system semantics
//! lifts silent and scope-lead moves, pairs communication halves into
//! rendezvous, and ticks when every role is inert.

use crate::anno::{max_index, reindex};
use crate::ast::{
    AuxKind, DpocIndex, DpocProc, Expr, Label, Network, OperationName, PayloadDigest, Role,
    RoleState, UpdatePayload, UpdateRepo, Value, Var,
};
use crate::dioc::{update_applicable, TraceSet};
use crate::eval::{eval_expr, FunctionEnv};
use crate::project::pi;
use crate::sched::{filter_steps, FilterOutcome, Schedule, StepView};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpocSystem {
    pub net: Network,
    pub repo: UpdateRepo,
    pub fresh: u64,
    pub fns: FunctionEnv,
}

impl DpocSystem {
    pub fn new(net: Network, repo: UpdateRepo, fns: FunctionEnv) -> DpocSystem {
        let fresh = net
            .0
            .values()
            .map(|(p, _)| max_dpoc_index(p))
            .max()
            .unwrap_or(0);
        DpocSystem { net, repo, fresh, fns }
    }
}

/// Largest base index mentioned anywhere in a process.
pub fn max_dpoc_index(p: &DpocProc) -> u64 {
    match p {
        DpocProc::Recv { idx, op, .. } | DpocProc::Send { idx, op, .. } => {
            idx.base.0.max(op.prefix.0)
        }
        DpocProc::SendUpdate { idx, op, payload, .. } => {
            let inner = match payload {
                UpdatePayload::No => 0,
                UpdatePayload::Code(c) => max_dpoc_index(c),
            };
            idx.0.max(op.prefix.0).max(inner)
        }
        DpocProc::Assign { idx, .. } => idx.base.0,
        DpocProc::Seq(a, b) | DpocProc::Par(a, b) => max_dpoc_index(a).max(max_dpoc_index(b)),
        DpocProc::Skip | DpocProc::End => 0,
        DpocProc::If { idx, then_br, else_br, .. } => {
            idx.0.max(max_dpoc_index(then_br)).max(max_dpoc_index(else_br))
        }
        DpocProc::While { idx, body, .. } => idx.0.max(max_dpoc_index(body)),
        DpocProc::ScopeCoord { idx, body, .. } | DpocProc::ScopeSimple { idx, body, .. } => {
            idx.0.max(max_dpoc_index(body))
        }
    }
}

/// One step through a `Seq`/`Par` spine towards an enabled position.
/// `SeqR` records that the left side can tick, in which case acting on the
/// right discards the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    SeqL,
    SeqR,
    ParL,
    ParR,
}

/// What an enabled position offers.
#[derive(Clone, Debug)]
pub enum Action {
    Tau { residue: DpocProc, assign: Option<(Var, Value)> },
    Send { op: OperationName, value: Value, to: Role },
    Recv { op: OperationName, var: Var, from: Role },
    SendUp { op: OperationName, payload: UpdatePayload, to: Role },
    RecvUp { op: OperationName, from: Role },
    LeadUp { name: String, body_hash: u64, residue: DpocProc, fresh_add: u64 },
    LeadNoUp { residue: DpocProc },
}

/// An enabled step of one role: the position it acts at and the action.
#[derive(Clone, Debug)]
pub struct Offer {
    pub role: Role,
    pub path: Vec<Dir>,
    pub action: Action,
    /// The deciding scope's index for `LeadUp`/`LeadNoUp`.
    pub scope_idx: Option<u64>,
}

impl Offer {
    /// The role-level label this offer produces; receives take the value the
    /// matching send provides.
    pub fn delta_label(&self, recv_value: Option<&Value>) -> Label {
        match &self.action {
            Action::Tau { .. } => Label::Tau,
            Action::Send { op, value, to } => Label::DeltaSend {
                role: self.role.clone(),
                op: op.clone(),
                value: value.clone(),
                to: to.clone(),
            },
            Action::Recv { op, var, from } => Label::DeltaRecv {
                role: self.role.clone(),
                op: op.clone(),
                var: var.clone(),
                value: recv_value.cloned().unwrap_or(Value::Err),
                from: from.clone(),
            },
            Action::SendUp { op, payload, to } => Label::DeltaSendUp {
                role: self.role.clone(),
                op: op.clone(),
                payload: PayloadDigest::of(payload),
                to: to.clone(),
            },
            Action::RecvUp { op, from } => Label::DeltaRecvUp {
                role: self.role.clone(),
                op: op.clone(),
                payload: PayloadDigest::No,
                from: from.clone(),
            },
            Action::LeadUp { name, body_hash, .. } => {
                Label::Update { name: name.clone(), body_hash: *body_hash }
            }
            Action::LeadNoUp { .. } => Label::NoUp,
        }
    }
}

/// What closes a receive-like offer when it is applied.
#[derive(Clone, Debug)]
pub enum Fill {
    None,
    Val(Value),
    Payload(UpdatePayload),
}

fn se_send(idx: u64, lead: &Role) -> DpocProc {
    DpocProc::Send {
        idx: DpocIndex::plain(idx),
        op: OperationName::aux(idx, AuxKind::Se, idx),
        expr: Expr::Lit(Value::Str("ok".into())),
        to: lead.clone(),
    }
}

fn se_recv(idx: u64, from: &Role) -> DpocProc {
    DpocProc::Recv {
        idx: DpocIndex::plain(idx),
        op: OperationName::aux(idx, AuxKind::Se, idx),
        var: "aux$_".into(),
        from: from.clone(),
    }
}

/// Termination residue at role level.
fn tick_res(p: &DpocProc) -> Option<DpocProc> {
    match p {
        DpocProc::Skip => Some(DpocProc::End),
        DpocProc::Seq(a, b) => {
            tick_res(a)?;
            tick_res(b)
        }
        DpocProc::Par(a, b) => {
            let a = tick_res(a)?;
            let b = tick_res(b)?;
            Some(DpocProc::par(a, b))
        }
        _ => None,
    }
}

pub fn can_tick_dpoc(p: &DpocProc) -> bool {
    tick_res(p).is_some()
}

/// All enabled offers of one role's process.
pub fn role_step(sys: &DpocSystem, role: &Role) -> Vec<Offer> {
    let Some((proc, state)) = sys.net.0.get(role) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    collect(proc, state, sys, role, &mut Vec::new(), &mut out);
    out
}

fn collect(
    p: &DpocProc,
    state: &RoleState,
    sys: &DpocSystem,
    role: &Role,
    path: &mut Vec<Dir>,
    out: &mut Vec<Offer>,
) {
    let mk = |path: &Vec<Dir>, action: Action, scope_idx: Option<u64>| Offer {
        role: role.clone(),
        path: path.clone(),
        action,
        scope_idx,
    };
    match p {
        DpocProc::Skip | DpocProc::End => {}
        DpocProc::Assign { var, expr, .. } => {
            let value = eval_expr(expr, state, &sys.fns);
            out.push(mk(
                path,
                Action::Tau { residue: DpocProc::Skip, assign: Some((var.clone(), value)) },
                None,
            ));
        }
        DpocProc::Send { op, expr, to, .. } => {
            let value = eval_expr(expr, state, &sys.fns);
            out.push(mk(path, Action::Send { op: op.clone(), value, to: to.clone() }, None));
        }
        DpocProc::Recv { op, var, from, .. } => {
            out.push(mk(
                path,
                Action::Recv { op: op.clone(), var: var.clone(), from: from.clone() },
                None,
            ));
        }
        DpocProc::SendUpdate { op, payload, to, .. } => {
            out.push(mk(
                path,
                Action::SendUp { op: op.clone(), payload: payload.clone(), to: to.clone() },
                None,
            ));
        }
        DpocProc::If { cond, then_br, else_br, .. } => {
            let guard = eval_expr(cond, state, &sys.fns);
            let residue = if guard.truthy() { (**then_br).clone() } else { (**else_br).clone() };
            out.push(mk(path, Action::Tau { residue, assign: None }, None));
        }
        DpocProc::While { cond, body, .. } => {
            let guard = eval_expr(cond, state, &sys.fns);
            let residue = if guard.truthy() {
                DpocProc::seq((**body).clone(), p.clone())
            } else {
                DpocProc::Skip
            };
            out.push(mk(path, Action::Tau { residue, assign: None }, None));
        }
        DpocProc::ScopeCoord { idx, lead, body, roleset, name } => {
            let i = idx.0;
            let others: Vec<&Role> = roleset.iter().filter(|r| *r != lead).collect();
            for entry in sys.repo.iter() {
                if update_applicable(entry, roleset, name.as_deref()) {
                    let shifted = reindex(&entry.body, sys.fresh);
                    let sends = DpocProc::par_all(
                        others
                            .iter()
                            .map(|s| DpocProc::SendUpdate {
                                idx: crate::ast::Index(i),
                                op: OperationName::aux(i, AuxKind::Sb, i),
                                payload: UpdatePayload::Code(Box::new(pi(&shifted, s))),
                                to: (*s).clone(),
                            })
                            .collect(),
                    );
                    let recvs =
                        DpocProc::par_all(others.iter().map(|s| se_recv(i, s)).collect());
                    let own = pi(&shifted, lead);
                    let residue = if others.is_empty() {
                        own
                    } else {
                        DpocProc::seq(sends, DpocProc::seq(own, recvs))
                    };
                    out.push(mk(
                        path,
                        Action::LeadUp {
                            name: entry.name.clone(),
                            body_hash: entry.body_hash,
                            residue,
                            fresh_add: max_index(&entry.body),
                        },
                        Some(i),
                    ));
                }
            }
            let sends = DpocProc::par_all(
                others
                    .iter()
                    .map(|s| DpocProc::SendUpdate {
                        idx: crate::ast::Index(i),
                        op: OperationName::aux(i, AuxKind::Sb, i),
                        payload: UpdatePayload::No,
                        to: (*s).clone(),
                    })
                    .collect(),
            );
            let recvs = DpocProc::par_all(others.iter().map(|s| se_recv(i, s)).collect());
            let residue = if others.is_empty() {
                (**body).clone()
            } else {
                DpocProc::seq(sends, DpocProc::seq((**body).clone(), recvs))
            };
            out.push(mk(path, Action::LeadNoUp { residue }, Some(i)));
        }
        DpocProc::ScopeSimple { idx, lead, .. } => {
            let i = idx.0;
            out.push(mk(
                path,
                Action::RecvUp {
                    op: OperationName::aux(i, AuxKind::Sb, i),
                    from: lead.clone(),
                },
                None,
            ));
        }
        DpocProc::Seq(a, b) => {
            path.push(Dir::SeqL);
            collect(a, state, sys, role, path, out);
            path.pop();
            if can_tick_dpoc(a) {
                path.push(Dir::SeqR);
                collect(b, state, sys, role, path, out);
                path.pop();
            }
        }
        DpocProc::Par(a, b) => {
            path.push(Dir::ParL);
            collect(a, state, sys, role, path, out);
            path.pop();
            path.push(Dir::ParR);
            collect(b, state, sys, role, path, out);
            path.pop();
        }
    }
}

/// Replace the enabled position at `path` by its residue. Acting on the
/// right of a sequence whose left side can tick discards the left side.
fn rebuild(p: &DpocProc, path: &[Dir], leaf: &dyn Fn(&DpocProc) -> DpocProc) -> DpocProc {
    match path.split_first() {
        None => leaf(p),
        Some((dir, rest)) => match (dir, p) {
            (Dir::SeqL, DpocProc::Seq(a, b)) => {
                DpocProc::seq(rebuild(a, rest, leaf), (**b).clone())
            }
            (Dir::SeqR, DpocProc::Seq(_, b)) => rebuild(b, rest, leaf),
            (Dir::ParL, DpocProc::Par(a, b)) => {
                DpocProc::par(rebuild(a, rest, leaf), (**b).clone())
            }
            (Dir::ParR, DpocProc::Par(a, b)) => {
                DpocProc::par((**a).clone(), rebuild(b, rest, leaf))
            }
            _ => unreachable!("offer path does not match the process shape"),
        },
    }
}

fn leaf_residue(action: &Action, fill: &Fill) -> impl Fn(&DpocProc) -> DpocProc {
    let action = action.clone();
    let fill = fill.clone();
    move |leaf: &DpocProc| match (&action, &fill) {
        (Action::Tau { residue, .. }, _)
        | (Action::LeadUp { residue, .. }, _)
        | (Action::LeadNoUp { residue }, _) => residue.clone(),
        (Action::Send { .. }, _) | (Action::SendUp { .. }, _) => DpocProc::Skip,
        (Action::Recv { var, .. }, Fill::Val(v)) => match leaf {
            DpocProc::Recv { idx, .. } => DpocProc::Assign {
                idx: *idx,
                var: var.clone(),
                expr: Expr::Lit(v.clone()),
            },
            other => unreachable!("receive offer at non-receive leaf: {other:?}"),
        },
        (Action::RecvUp { .. }, Fill::Payload(payload)) => match leaf {
            DpocProc::ScopeSimple { idx, lead, body } => {
                let inner = match payload {
                    UpdatePayload::No => (**body).clone(),
                    UpdatePayload::Code(code) => (**code).clone(),
                };
                DpocProc::seq(inner, se_send(idx.0, lead))
            }
            other => unreachable!("scope offer at non-scope leaf: {other:?}"),
        },
        (a, f) => unreachable!("offer {a:?} applied with incompatible fill {f:?}"),
    }
}

/// Apply one offer to its role, producing the updated system. Receive-like
/// offers need the matching `Fill`.
pub fn apply_offer(sys: &DpocSystem, offer: &Offer, fill: &Fill) -> DpocSystem {
    let mut next = sys.clone();
    let (proc, state) = next.net.0.get_mut(&offer.role).expect("offer role exists");
    let leaf = leaf_residue(&offer.action, fill);
    *proc = rebuild(proc, &offer.path, &leaf);
    if let Action::Tau { assign: Some((var, value)), .. } = &offer.action {
        state.insert(var.clone(), value.clone());
    }
    if let Action::LeadUp { fresh_add, .. } = &offer.action {
        next.fresh += fresh_add;
    }
    next
}

#[derive(Clone, Debug)]
pub struct DpocStep {
    pub label: Label,
    pub succ: DpocSystem,
    pub scope_idx: Option<u64>,
}

/// All enabled system steps: lifted silent and scope-lead moves, rendezvous
/// of matching communication halves, and the global tick.
pub fn system_step(sys: &DpocSystem) -> Vec<DpocStep> {
    let mut steps = Vec::new();
    let mut sends = Vec::new();
    let mut recvs = Vec::new();
    let mut up_sends = Vec::new();
    let mut up_recvs = Vec::new();
    let roles: Vec<Role> = sys.net.roles().cloned().collect();
    for role in &roles {
        for offer in role_step(sys, role) {
            match &offer.action {
                Action::Tau { .. } => steps.push(DpocStep {
                    label: Label::Tau,
                    succ: apply_offer(sys, &offer, &Fill::None),
                    scope_idx: None,
                }),
                Action::LeadUp { name, body_hash, .. } => steps.push(DpocStep {
                    label: Label::Update { name: name.clone(), body_hash: *body_hash },
                    succ: apply_offer(sys, &offer, &Fill::None),
                    scope_idx: offer.scope_idx,
                }),
                Action::LeadNoUp { .. } => steps.push(DpocStep {
                    label: Label::NoUp,
                    succ: apply_offer(sys, &offer, &Fill::None),
                    scope_idx: offer.scope_idx,
                }),
                Action::Send { .. } => sends.push(offer),
                Action::Recv { .. } => recvs.push(offer),
                Action::SendUp { .. } => up_sends.push(offer),
                Action::RecvUp { .. } => up_recvs.push(offer),
            }
        }
    }
    for s in &sends {
        let Action::Send { op: sop, value, to } = &s.action else { unreachable!() };
        for r in &recvs {
            let Action::Recv { op: rop, var, from } = &r.action else { unreachable!() };
            if s.role != r.role && sop == rop && to == &r.role && from == &s.role {
                let mid = apply_offer(sys, s, &Fill::None);
                let succ = apply_offer(&mid, r, &Fill::Val(value.clone()));
                steps.push(DpocStep {
                    label: Label::Interaction {
                        op: sop.clone(),
                        sender: s.role.clone(),
                        value: value.clone(),
                        receiver: r.role.clone(),
                        var: var.clone(),
                    },
                    succ,
                    scope_idx: None,
                });
            }
        }
    }
    for s in &up_sends {
        let Action::SendUp { op: sop, payload, to } = &s.action else { unreachable!() };
        for r in &up_recvs {
            let Action::RecvUp { op: rop, from } = &r.action else { unreachable!() };
            if s.role != r.role && sop == rop && to == &r.role && from == &s.role {
                let mid = apply_offer(sys, s, &Fill::None);
                let succ = apply_offer(&mid, r, &Fill::Payload(payload.clone()));
                steps.push(DpocStep {
                    label: Label::UpdateInteraction {
                        op: sop.clone(),
                        sender: s.role.clone(),
                        payload: PayloadDigest::of(payload),
                        receiver: r.role.clone(),
                    },
                    succ,
                    scope_idx: None,
                });
            }
        }
    }
    let ticks: Vec<Option<DpocProc>> =
        roles.iter().map(|r| tick_res(sys.net.proc_of(r).unwrap())).collect();
    if !roles.is_empty() && ticks.iter().all(Option::is_some) {
        let mut succ = sys.clone();
        for (role, res) in roles.iter().zip(ticks) {
            succ.net.0.get_mut(role).unwrap().0 = res.unwrap();
        }
        steps.push(DpocStep { label: Label::Tick, succ, scope_idx: None });
    }
    steps
}

/// Enabled network steps under a schedule, mirroring the choreography-side
/// wrapper: each step carries the swap cursor for its continuation.
pub fn scheduled_steps_dpoc(
    sys: &DpocSystem,
    sched: &Schedule,
    cursor: usize,
) -> Vec<(DpocStep, usize)> {
    let steps = system_step(sys);
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
            vec![(DpocStep { label, succ, scope_idx: None }, i + 1)]
        }
        FilterOutcome::Keep(ids) => {
            let mut steps: Vec<Option<DpocStep>> = steps.into_iter().map(Some).collect();
            ids.into_iter()
                .map(|k| (steps[k].take().expect("indices are distinct"), cursor))
                .collect()
        }
    }
}

/// All weak traces of the network under a schedule: strong traces with the
/// silent steps and auxiliary communications removed.
pub fn weak_traces_dpoc(sys: &DpocSystem, fuel: u64, sched: &Schedule) -> TraceSet {
    let mut out = TraceSet::default();
    walk(sys, sched, 0, fuel, &mut Vec::new(), &mut out);
    fn walk(
        sys: &DpocSystem,
        sched: &Schedule,
        cursor: usize,
        fuel: u64,
        prefix: &mut Vec<Label>,
        out: &mut TraceSet,
    ) {
        let steps = scheduled_steps_dpoc(sys, sched, cursor);
        if steps.is_empty() {
            out.complete.insert(prefix.clone());
            return;
        }
        if fuel == 0 {
            out.truncated.insert(prefix.clone());
            return;
        }
        for (step, next_cursor) in steps {
            let visible = !step.label.is_weak_hidden(true);
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
    use crate::ast::GlobalState;
    use crate::parse::{parse_dioc, parse_dpocnet, parse_updates};
    use crate::project::project;

    fn projected(src: &str) -> DpocSystem {
        let prog = parse_dioc(src).unwrap();
        let net = project(&prog.proc, &GlobalState::new(), &prog.declared_roles);
        DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty())
    }

    #[test]
    fn rendezvous_of_matching_halves() {
        let sys = projected("ping : A(5) -> B(y)");
        let steps = system_step(&sys);
        assert_eq!(steps.len(), 1);
        match &steps[0].label {
            Label::Interaction { op, sender, value, receiver, var } => {
                assert_eq!(op.bare(), "ping");
                assert_eq!(sender, &Role::new("A"));
                assert_eq!(*value, Value::Int(5));
                assert_eq!(receiver, &Role::new("B"));
                assert_eq!(var, "y");
            }
            other => panic!("unexpected label: {other:?}"),
        }
        // Receiver residue is the inherited assignment; one tau later the
        // store holds the value, then the system ticks.
        let s1 = &steps[0].succ;
        let steps = system_step(s1);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, Label::Tau);
        let s2 = &steps[0].succ;
        assert_eq!(s2.net.state_of(&Role::new("B")).unwrap().get("y"), Some(&Value::Int(5)));
        let steps = system_step(s2);
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, Label::Tick);
        assert!(system_step(&steps[0].succ).is_empty());
    }

    #[test]
    fn mismatched_operations_do_not_pair() {
        let net = parse_dpocnet(
            r#"
            role A { 1 1.ping : 1 to B }
            role B { 2 2.pong : x from A }
            "#,
        )
        .unwrap();
        let sys = DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty());
        assert!(system_step(&sys).is_empty());
    }

    #[test]
    fn prefixes_keep_same_name_operations_apart() {
        let net = parse_dpocnet(
            r#"
            role A { 1 1.ping : 1 to B }
            role B { 2 1.ping : x from A }
            "#,
        )
        .unwrap();
        let sys = DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty());
        // Same prefix 1 on both halves: they pair.
        assert_eq!(system_step(&sys).len(), 1);
        let net2 = parse_dpocnet(
            r#"
            role A { 1 1.ping : 1 to B }
            role B { 2 2.ping : x from A }
            "#,
        )
        .unwrap();
        let sys2 = DpocSystem::new(net2, UpdateRepo::new(0), FunctionEnv::empty());
        assert!(system_step(&sys2).is_empty());
    }

    #[test]
    fn scope_noup_runs_protocol() {
        let sys = projected("scope @A { ping : A(7) -> B(y) }");
        let steps = system_step(&sys);
        // Only the coordinator moves: B waits for the scope message.
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].label, Label::NoUp);
        let s1 = &steps[0].succ;
        // Next: the sb* rendezvous carrying `no`.
        let steps = system_step(s1);
        assert_eq!(steps.len(), 1);
        match &steps[0].label {
            Label::UpdateInteraction { op, payload, .. } => {
                assert_eq!(op.bare(), "sb*_1");
                assert_eq!(*payload, PayloadDigest::No);
            }
            other => panic!("unexpected label: {other:?}"),
        }
        let s2 = &steps[0].succ;
        // B now runs its original body half; the ping pairs.
        let steps = system_step(s2);
        assert_eq!(steps.len(), 1);
        assert!(matches!(steps[0].label, Label::Interaction { .. }));
        // Then B's tau (stored assignment), then the se* acknowledgement.
        let s3 = &steps[0].succ;
        let s4 = &system_step(s3)[0].succ;
        let steps = system_step(s4);
        assert_eq!(steps.len(), 1);
        match &steps[0].label {
            Label::Interaction { op, sender, value, receiver, .. } => {
                assert_eq!(op.bare(), "se*_1");
                assert!(op.is_aux());
                assert_eq!(sender, &Role::new("B"));
                assert_eq!(*value, Value::Str("ok".into()));
                assert_eq!(receiver, &Role::new("A"));
            }
            other => panic!("unexpected label: {other:?}"),
        }
        // The acknowledgement's inherited assignment fires, then the tick.
        let s5 = &steps[0].succ;
        assert_eq!(system_step(s5)[0].label, Label::Tau);
        let s6 = &system_step(s5)[0].succ;
        assert_eq!(system_step(s6)[0].label, Label::Tick);
    }

    #[test]
    fn scope_update_distributes_projections() {
        let prog = parse_dioc("scope @A { ping : A(7) -> B(y) }").unwrap();
        let repo = parse_updates("update better { ping : A(9) -> B(y) }", 1).unwrap();
        let net = project(&prog.proc, &GlobalState::new(), &[]);
        let sys = DpocSystem::new(net, repo, FunctionEnv::empty());
        let steps = system_step(&sys);
        assert_eq!(steps.len(), 2);
        match &steps[0].label {
            Label::Update { name, .. } => assert_eq!(name, "better"),
            other => panic!("unexpected label: {other:?}"),
        }
        let s1 = &steps[0].succ;
        assert_eq!(s1.fresh, sys.fresh + 10000);
        // sb* carries B's projection of the shifted update body.
        let steps = system_step(s1);
        assert_eq!(steps.len(), 1);
        match &steps[0].label {
            Label::UpdateInteraction { payload, .. } => {
                assert!(matches!(payload, PayloadDigest::Code(_)))
            }
            other => panic!("unexpected label: {other:?}"),
        }
        let s2 = &steps[0].succ;
        // Now the updated ping (value 9) runs, then se*, then tick.
        let steps = system_step(s2);
        assert_eq!(steps.len(), 1);
        match &steps[0].label {
            Label::Interaction { value, .. } => assert_eq!(*value, Value::Int(9)),
            other => panic!("unexpected label: {other:?}"),
        }
    }

    #[test]
    fn weak_traces_hide_aux() {
        let sys = projected("scope @A { ping : A(7) -> B(y) }");
        let traces = weak_traces_dpoc(&sys, 50, &Schedule::no_update());
        assert!(traces.is_exhaustive());
        assert_eq!(traces.complete.len(), 1);
        let t = traces.complete.iter().next().unwrap();
        let kinds: Vec<&str> = t
            .iter()
            .map(|l| match l {
                Label::NoUp => "noup",
                Label::Interaction { .. } => "comm",
                Label::Tick => "tick",
                other => panic!("unexpected weak label: {other:?}"),
            })
            .collect();
        assert_eq!(kinds, vec!["noup", "comm", "tick"]);
    }

    #[test]
    fn paths_through_par_and_seq() {
        let net = parse_dpocnet(
            r#"
            role A {
                { 1 x = 1 | 2 y = 2 };
                3 z = 3
            }
            "#,
        )
        .unwrap();
        let sys = DpocSystem::new(net, UpdateRepo::new(0), FunctionEnv::empty());
        let offers = role_step(&sys, &Role::new("A"));
        // Both parallel assignments are enabled; z is not (the par cannot
        // tick yet).
        assert_eq!(offers.len(), 2);
        assert_eq!(offers[0].path, vec![Dir::SeqL, Dir::ParL]);
        assert_eq!(offers[1].path, vec![Dir::SeqL, Dir::ParR]);
        // After both fire, the right of the seq becomes reachable.
        let s1 = apply_offer(&sys, &offers[0], &Fill::None);
        let offers1 = role_step(&s1, &Role::new("A"));
        assert_eq!(offers1.len(), 1);
        let s2 = apply_offer(&s1, &offers1[0], &Fill::None);
        let offers2 = role_step(&s2, &Role::new("A"));
        assert_eq!(offers2.len(), 1);
        assert_eq!(offers2[0].path, vec![Dir::SeqR]);
    }
}
