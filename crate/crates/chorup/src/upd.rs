//! Static completion of in-flight auxiliary protocols.
//!
//! A running network is generally "between" projections: some auxiliary
//! messages (guard broadcasts, scope openings) have been sent but not yet
//! consumed everywhere. `upd_normalize` completes those protocols statically
//! and strips the auxiliary bookkeeping, yielding the projection of the
//! choreography state the network currently implements. It is the identity
//! (up to `norm`) on freshly projected networks.
//!
//! `compl` performs pending receptions and resolves auxiliary guards; it
//! never rewrites inside a while body, since an in-flight message can only
//! target the current iteration, not future ones. `clean` then removes the
//! closing handshakes of scopes and while iterations, and `norm` flattens
//! sequence and parallel spines, dropping inert `1`s.

use crate::ast::{
    is_aux_var, AuxKind, DpocProc, Expr, Network, OpKind, Role, RoleState, UpdatePayload, Value,
};
use crate::dpoc::{can_tick_dpoc, Dir, DpocSystem};
use crate::eval::eval_expr;

/// Canonical form: sequence and parallel spines flattened and re-associated
/// to the right with inert `1`s dropped, recursively through every body.
pub fn norm(p: &DpocProc) -> DpocProc {
    match p {
        DpocProc::Seq(..) => {
            let mut items = Vec::new();
            seq_items(p, &mut items);
            DpocProc::seq_all(items)
        }
        DpocProc::Par(..) => {
            let mut items = Vec::new();
            par_items(p, &mut items);
            DpocProc::par_all(items)
        }
        DpocProc::If { idx, cond, then_br, else_br } => DpocProc::If {
            idx: *idx,
            cond: cond.clone(),
            then_br: Box::new(norm(then_br)),
            else_br: Box::new(norm(else_br)),
        },
        DpocProc::While { idx, cond, body } => DpocProc::While {
            idx: *idx,
            cond: cond.clone(),
            body: Box::new(norm(body)),
        },
        DpocProc::ScopeCoord { idx, lead, body, roleset, name } => DpocProc::ScopeCoord {
            idx: *idx,
            lead: lead.clone(),
            body: Box::new(norm(body)),
            roleset: roleset.clone(),
            name: name.clone(),
        },
        DpocProc::ScopeSimple { idx, lead, body } => DpocProc::ScopeSimple {
            idx: *idx,
            lead: lead.clone(),
            body: Box::new(norm(body)),
        },
        DpocProc::SendUpdate { idx, op, payload: UpdatePayload::Code(c), to } => {
            DpocProc::SendUpdate {
                idx: *idx,
                op: op.clone(),
                payload: UpdatePayload::Code(Box::new(norm(c))),
                to: to.clone(),
            }
        }
        other => other.clone(),
    }
}

fn seq_items(p: &DpocProc, out: &mut Vec<DpocProc>) {
    match p {
        DpocProc::Seq(a, b) => {
            seq_items(a, out);
            seq_items(b, out);
        }
        other => splice_seq(norm(other), out),
    }
}

fn splice_seq(p: DpocProc, out: &mut Vec<DpocProc>) {
    match p {
        DpocProc::Skip => {}
        DpocProc::Seq(a, b) => {
            splice_seq(*a, out);
            splice_seq(*b, out);
        }
        x => out.push(x),
    }
}

fn par_items(p: &DpocProc, out: &mut Vec<DpocProc>) {
    match p {
        DpocProc::Par(a, b) => {
            par_items(a, out);
            par_items(b, out);
        }
        other => splice_par(norm(other), out),
    }
}

fn splice_par(p: DpocProc, out: &mut Vec<DpocProc>) {
    match p {
        DpocProc::Skip => {}
        DpocProc::Par(a, b) => {
            splice_par(*a, out);
            splice_par(*b, out);
        }
        x => out.push(x),
    }
}

/// `norm` applied to every process of a network; states are untouched.
pub fn norm_net(net: &Network) -> Network {
    Network(
        net.0
            .iter()
            .map(|(r, (p, st))| (r.clone(), (norm(p), st.clone())))
            .collect(),
    )
}

/// Enabled positions of a process: the leaves reachable through sequencing
/// (skipping past terminated left sides) and parallel composition.
fn enabled_leaves(p: &DpocProc) -> Vec<(Vec<Dir>, DpocProc)> {
    fn go(p: &DpocProc, path: &mut Vec<Dir>, out: &mut Vec<(Vec<Dir>, DpocProc)>) {
        match p {
            DpocProc::Skip | DpocProc::End => {}
            DpocProc::Seq(a, b) => {
                path.push(Dir::SeqL);
                go(a, path, out);
                path.pop();
                if can_tick_dpoc(a) {
                    path.push(Dir::SeqR);
                    go(b, path, out);
                    path.pop();
                }
            }
            DpocProc::Par(a, b) => {
                path.push(Dir::ParL);
                go(a, path, out);
                path.pop();
                path.push(Dir::ParR);
                go(b, path, out);
                path.pop();
            }
            leaf => out.push((path.clone(), leaf.clone())),
        }
    }
    let mut out = Vec::new();
    go(p, &mut Vec::new(), &mut out);
    out
}

fn replace_at(p: &DpocProc, path: &[Dir], new: DpocProc) -> DpocProc {
    match path.split_first() {
        None => new,
        Some((dir, rest)) => match (dir, p) {
            (Dir::SeqL, DpocProc::Seq(a, b)) => {
                DpocProc::seq(replace_at(a, rest, new), (**b).clone())
            }
            (Dir::SeqR, DpocProc::Seq(a, b)) => {
                DpocProc::seq((**a).clone(), replace_at(b, rest, new))
            }
            (Dir::ParL, DpocProc::Par(a, b)) => {
                DpocProc::par(replace_at(a, rest, new), (**b).clone())
            }
            (Dir::ParR, DpocProc::Par(a, b)) => {
                DpocProc::par((**a).clone(), replace_at(b, rest, new))
            }
            _ => unreachable!("path does not match the process shape"),
        },
    }
}

/// Rewrite every subterm outside while bodies for which `f` yields a
/// replacement; replacements are not rescanned.
fn map_outside_while(p: &DpocProc, f: &dyn Fn(&DpocProc) -> Option<DpocProc>) -> DpocProc {
    if let Some(r) = f(p) {
        return r;
    }
    match p {
        DpocProc::Seq(a, b) => {
            DpocProc::seq(map_outside_while(a, f), map_outside_while(b, f))
        }
        DpocProc::Par(a, b) => {
            DpocProc::par(map_outside_while(a, f), map_outside_while(b, f))
        }
        DpocProc::If { idx, cond, then_br, else_br } => DpocProc::If {
            idx: *idx,
            cond: cond.clone(),
            then_br: Box::new(map_outside_while(then_br, f)),
            else_br: Box::new(map_outside_while(else_br, f)),
        },
        DpocProc::ScopeCoord { idx, lead, body, roleset, name } => DpocProc::ScopeCoord {
            idx: *idx,
            lead: lead.clone(),
            body: Box::new(map_outside_while(body, f)),
            roleset: roleset.clone(),
            name: name.clone(),
        },
        DpocProc::ScopeSimple { idx, lead, body } => DpocProc::ScopeSimple {
            idx: *idx,
            lead: lead.clone(),
            body: Box::new(map_outside_while(body, f)),
        },
        other => other.clone(),
    }
}

/// The `while x_i { P; we-send; wb-recv }` shape a projected loop has at a
/// participant. Bodies are matched as flattened sequences: the last two
/// elements must be the closing `we*` send and the next `wb*` receive.
struct WhilePat {
    guard_var: String,
    owner: u64,
    body_head: DpocProc,
    we: DpocProc,
    wb: DpocProc,
}

fn while_pattern(w: &DpocProc) -> Option<WhilePat> {
    let DpocProc::While { cond: Expr::Var(v), body, .. } = w else {
        return None;
    };
    if !is_aux_var(v) {
        return None;
    }
    let mut items = Vec::new();
    splice_seq(norm(body), &mut items);
    if items.len() < 3 {
        return None;
    }
    let wb = items.pop().unwrap();
    let we = items.pop().unwrap();
    let DpocProc::Send { op: we_op, .. } = &we else {
        return None;
    };
    let DpocProc::Recv { op: wb_op, var: wb_var, .. } = &wb else {
        return None;
    };
    let (OpKind::Aux(AuxKind::We, we_owner), OpKind::Aux(AuxKind::Wb, wb_owner)) =
        (&we_op.kind, &wb_op.kind)
    else {
        return None;
    };
    if we_owner != wb_owner || wb_var != v {
        return None;
    }
    Some(WhilePat {
        guard_var: v.clone(),
        owner: we_owner.0,
        body_head: DpocProc::seq_all(items),
        we: we.clone(),
        wb: wb.clone(),
    })
}

/// One unfolding: `P; we-send; wb-recv; while x_i { ... }`.
fn unfold(pat: &WhilePat, w: &DpocProc) -> DpocProc {
    DpocProc::seq(
        pat.body_head.clone(),
        DpocProc::seq(pat.we.clone(), DpocProc::seq(pat.wb.clone(), w.clone())),
    )
}

fn is_wb_recv(p: &DpocProc, owner: u64) -> Option<&str> {
    let DpocProc::Recv { op, var, .. } = p else {
        return None;
    };
    match &op.kind {
        OpKind::Aux(AuxKind::Wb, o) if o.0 == owner => Some(var),
        _ => None,
    }
}

fn is_cnd_recv(p: &DpocProc, owner: u64) -> Option<&str> {
    let DpocProc::Recv { op, var, .. } = p else {
        return None;
    };
    match &op.kind {
        OpKind::Aux(AuxKind::Cnd, o) if o.0 == owner => Some(var),
        _ => None,
    }
}

/// The `wb-recv; while` shape a projected loop has at a participant before
/// the guard broadcast arrives; matched on a normalised sequence spine, so
/// the receive and the loop may be the first two of many elements.
fn wb_term_replacement(t: &DpocProc, owner: u64, guard: bool) -> Option<DpocProc> {
    let DpocProc::Seq(recv, rest) = t else {
        return None;
    };
    let var = is_wb_recv(recv, owner)?;
    let (w, cont) = match &**rest {
        DpocProc::Seq(w, cont) => (&**w, Some(&**cont)),
        w => (w, None),
    };
    let pat = while_pattern(w)?;
    if pat.owner != owner || pat.guard_var != var {
        return None;
    }
    let replaced = if guard { unfold(&pat, w) } else { DpocProc::Skip };
    Some(match cont {
        None => replaced,
        Some(c) => DpocProc::seq(replaced, c.clone()),
    })
}

/// The `cnd-recv; if` shape a projected conditional has at a participant.
fn cnd_term_replacement(t: &DpocProc, owner: u64, guard: bool) -> Option<DpocProc> {
    let DpocProc::Seq(recv, rest) = t else {
        return None;
    };
    let var = is_cnd_recv(recv, owner)?;
    let (cond, cont) = match &**rest {
        DpocProc::Seq(c, cont) => (&**c, Some(&**cont)),
        c => (c, None),
    };
    let DpocProc::If { cond: Expr::Var(v), then_br, else_br, .. } = cond else {
        return None;
    };
    if v != var {
        return None;
    }
    let replaced = if guard { (**then_br).clone() } else { (**else_br).clone() };
    Some(match cont {
        None => replaced,
        Some(c) => DpocProc::seq(replaced, c.clone()),
    })
}

/// One completion rewrite, first applicable in role order; `true` if any
/// rule fired.
fn compl_step(sys: &mut DpocSystem) -> bool {
    let roles: Vec<Role> = sys.net.roles().cloned().collect();
    for role in &roles {
        let (proc, state) = sys.net.0.get(role).unwrap();
        let (proc, state) = (proc.clone(), state.clone());
        for (path, leaf) in enabled_leaves(&proc) {
            match &leaf {
                DpocProc::Send { op, expr, .. } => {
                    let (kind, owner) = match &op.kind {
                        OpKind::Aux(k @ (AuxKind::Wb | AuxKind::Cnd), o) => (*k, o.0),
                        _ => continue,
                    };
                    let Value::Bool(guard) = eval_expr(expr, &state, &sys.fns) else {
                        continue;
                    };
                    let consumed = replace_at(&proc, &path, DpocProc::Skip);
                    sys.net.0.get_mut(role).unwrap().0 = consumed;
                    for r in &roles {
                        let cur = sys.net.0.get(r).unwrap().0.clone();
                        let rewritten = map_outside_while(&cur, &|t| match kind {
                            AuxKind::Wb => wb_term_replacement(t, owner, guard),
                            _ => cnd_term_replacement(t, owner, guard),
                        });
                        sys.net.0.get_mut(r).unwrap().0 = rewritten;
                    }
                    return true;
                }
                DpocProc::SendUpdate { op, payload, to, .. } => {
                    let OpKind::Aux(AuxKind::Sb, o) = &op.kind else {
                        continue;
                    };
                    let owner = o.0;
                    let consumed = replace_at(&proc, &path, DpocProc::Skip);
                    sys.net.0.get_mut(role).unwrap().0 = consumed;
                    if let Some((target, _)) = sys.net.0.get(to) {
                        let rewritten = map_outside_while(target, &|t| match t {
                            DpocProc::ScopeSimple { idx, body, .. } if idx.0 == owner => {
                                Some(match payload {
                                    UpdatePayload::No => (**body).clone(),
                                    UpdatePayload::Code(c) => (**c).clone(),
                                })
                            }
                            _ => None,
                        });
                        sys.net.0.get_mut(to).unwrap().0 = rewritten;
                    }
                    return true;
                }
                DpocProc::While { .. } => {
                    let Some(pat) = while_pattern(&leaf) else {
                        continue;
                    };
                    let Some(Value::Bool(guard)) = state.get(&pat.guard_var).cloned() else {
                        continue;
                    };
                    let res = if guard { unfold(&pat, &leaf) } else { DpocProc::Skip };
                    sys.net.0.get_mut(role).unwrap().0 = replace_at(&proc, &path, res);
                    return true;
                }
                DpocProc::If { cond: Expr::Var(v), then_br, else_br, .. } => {
                    if !is_aux_var(v) {
                        continue;
                    }
                    let Some(Value::Bool(guard)) = state.get(v).cloned() else {
                        continue;
                    };
                    let res = if guard { (**then_br).clone() } else { (**else_br).clone() };
                    sys.net.0.get_mut(role).unwrap().0 = replace_at(&proc, &path, res);
                    return true;
                }
                DpocProc::Assign { var, expr, .. } => {
                    if !is_aux_var(var) {
                        continue;
                    }
                    let value = eval_expr(expr, &state, &sys.fns);
                    let slot = sys.net.0.get_mut(role).unwrap();
                    slot.0 = replace_at(&proc, &path, DpocProc::Skip);
                    slot.1.insert(var.clone(), value);
                    return true;
                }
                _ => {}
            }
        }
    }
    false
}

/// Complete all in-flight auxiliary protocols: deliver enabled guard
/// broadcasts and scope openings to their targets, resolve auxiliary guards
/// whose value is already known locally, and perform pending auxiliary
/// assignments.
pub fn compl(sys: &DpocSystem) -> DpocSystem {
    let mut cur = sys.clone();
    loop {
        cur.net = norm_net(&cur.net);
        if !compl_step(&mut cur) {
            return cur;
        }
    }
}

/// Remove the closing handshakes (`se*`/`we*` sends and receives) outside
/// while bodies and normalise.
pub fn clean(net: &Network) -> Network {
    Network(
        net.0
            .iter()
            .map(|(r, (p, st))| {
                let removed = map_outside_while(p, &|t| match t {
                    DpocProc::Send { op, .. } | DpocProc::Recv { op, .. }
                        if matches!(op.kind, OpKind::Aux(AuxKind::Se | AuxKind::We, _)) =>
                    {
                        Some(DpocProc::Skip)
                    }
                    _ => None,
                });
                (r.clone(), (norm(&removed), st.clone()))
            })
            .collect(),
    )
}

fn strip_aux_state(st: &RoleState) -> RoleState {
    st.iter()
        .filter(|(k, _)| !is_aux_var(k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

/// The projection this network currently implements: complete in-flight
/// protocols, drop closing handshakes, normalise, and forget auxiliary
/// variables. Compare the result against `norm_net` of a projection.
pub fn upd_normalize(sys: &DpocSystem) -> Network {
    let completed = compl(sys);
    let cleaned = clean(&completed.net);
    Network(
        cleaned
            .0
            .iter()
            .map(|(r, (p, st))| (r.clone(), (p.clone(), strip_aux_state(st))))
            .collect(),
    )
}
