//! Event structures and causality relations of annotated terms.
//!
//! Every annotated construct contributes events: an interaction gives a
//! matching send/receive pair, an assignment one event, a conditional or
//! loop a guard event, a scope an init and a term event shared by all the
//! roles involved. Events are identified by their global index (the chain
//! of enclosing loop indexes plus the construct's own index), which stays
//! stable across transitions and across projection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::{
    roles, DiocProc, DpocIndex, DpocProc, GlobalIndex, Index, IndexVariant, Network,
    OperationName, Role,
};
use crate::dpoc::{Dir, Offer};

/// What a single event stands for.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    /// Sending half of a communication, towards `to`.
    Send { op: OperationName, to: Role },
    /// Receiving half of a communication, from `from`.
    Recv { op: OperationName, from: Role },
    Assign,
    ScopeInit,
    ScopeTerm,
    GuardIf,
    GuardWhile,
}

/// One event of a term or network. Scope init/term events with the same
/// global index coincide across roles, so `owner` is a set; every other
/// event belongs to exactly one role.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub gi: GlobalIndex,
    pub kind: EventKind,
    pub owner: BTreeSet<Role>,
}

impl Event {
    pub fn is_comm(&self) -> bool {
        matches!(self.kind, EventKind::Send { .. } | EventKind::Recv { .. })
    }
    /// A communication event on a programmer-written operation.
    pub fn is_prog_comm(&self) -> bool {
        match &self.kind {
            EventKind::Send { op, .. } | EventKind::Recv { op, .. } => !op.is_aux(),
            _ => false,
        }
    }
    pub fn is_scope(&self) -> bool {
        matches!(self.kind, EventKind::ScopeInit | EventKind::ScopeTerm)
    }
    /// Identity used when comparing events of different terms: scope events
    /// compare without owners (they are shared), everything else by value.
    pub fn same_as(&self, other: &Event) -> bool {
        if self.is_scope() {
            self.gi == other.gi && self.kind == other.kind
        } else {
            self == other
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} ", self.gi)?;
        match &self.kind {
            EventKind::Send { op, to } => write!(f, "{op}!{to}")?,
            EventKind::Recv { op, from } => write!(f, "{op}?{from}")?,
            EventKind::Assign => f.write_str("assign")?,
            EventKind::ScopeInit => f.write_str("scope-init")?,
            EventKind::ScopeTerm => f.write_str("scope-term")?,
            EventKind::GuardIf => f.write_str("if-guard")?,
            EventKind::GuardWhile => f.write_str("while-guard")?,
        }
        f.write_str("]")?;
        let owners: Vec<&str> = self.owner.iter().map(|r| r.as_str()).collect();
        if owners.len() == 1 {
            write!(f, "@{}", owners[0])
        } else {
            write!(f, "@{{{}}}", owners.join(","))
        }
    }
}

/// The events of one term or network together with the causality relation,
/// the conflict relation, and each event's syntactic position.
pub struct EventSystem {
    pub events: Vec<Event>,
    /// Reflexive-transitive causality; `leq[a][b]` means event a precedes b.
    order: Vec<Vec<bool>>,
    /// Matching partners per event, per the level's matching relation.
    matches: Vec<Vec<usize>>,
    /// Symmetric cross-branch pairs of the same conditional.
    conflict: BTreeSet<(usize, usize)>,
    /// Global indexes of the scopes enclosing each event.
    scopes_of: Vec<BTreeSet<GlobalIndex>>,
    /// Global indexes of the while loops whose body encloses each event.
    whiles_of: Vec<BTreeSet<GlobalIndex>>,
}

impl EventSystem {
    pub fn len(&self) -> usize {
        self.events.len()
    }
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.order[a][b]
    }
    pub fn conflicting(&self, a: usize, b: usize) -> bool {
        self.conflict.contains(&(a, b))
    }
    /// All cross-branch pairs, each reported once with `a < b`.
    pub fn conflict_pairs(&self) -> Vec<(usize, usize)> {
        self.conflict.iter().filter(|(a, b)| a < b).cloned().collect()
    }
    pub fn matching(&self, e: usize) -> &[usize] {
        &self.matches[e]
    }
    pub fn scopes_of(&self, e: usize) -> &BTreeSet<GlobalIndex> {
        &self.scopes_of[e]
    }
    pub fn whiles_of(&self, e: usize) -> &BTreeSet<GlobalIndex> {
        &self.whiles_of[e]
    }
    /// No distinct event precedes `e`.
    pub fn is_minimal(&self, e: usize) -> bool {
        (0..self.len()).all(|j| j == e || !self.order[j][e])
    }
    pub fn position(&self, ev: &Event) -> Option<usize> {
        self.events.iter().position(|e| e.same_as(ev))
    }
    pub fn contains(&self, ev: &Event) -> bool {
        self.position(ev).is_some()
    }
    /// The relation is a partial order iff no two distinct events are
    /// mutually related.
    pub fn antisymmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| (0..n).all(|b| a == b || !(self.order[a][b] && self.order[b][a])))
    }
}

struct Builder {
    events: Vec<Event>,
    edges: Vec<(usize, usize)>,
    conflict: BTreeSet<(usize, usize)>,
    scopes_of: Vec<BTreeSet<GlobalIndex>>,
    whiles_of: Vec<BTreeSet<GlobalIndex>>,
    /// Dedup table for shared scope events.
    scope_ids: BTreeMap<(GlobalIndex, bool), usize>,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            events: Vec::new(),
            edges: Vec::new(),
            conflict: BTreeSet::new(),
            scopes_of: Vec::new(),
            whiles_of: Vec::new(),
            scope_ids: BTreeMap::new(),
        }
    }

    fn push(&mut self, ev: Event) -> usize {
        if ev.is_scope() {
            let key = (ev.gi.clone(), matches!(ev.kind, EventKind::ScopeInit));
            if let Some(&id) = self.scope_ids.get(&key) {
                let owners: Vec<Role> = ev.owner.into_iter().collect();
                self.events[id].owner.extend(owners);
                return id;
            }
            self.scope_ids.insert(key, self.events.len());
        }
        self.events.push(ev);
        self.scopes_of.push(BTreeSet::new());
        self.whiles_of.push(BTreeSet::new());
        self.events.len() - 1
    }

    fn seq_edges(&mut self, left: &[usize], right: &[usize]) {
        for &a in left {
            for &b in right {
                self.edges.push((a, b));
            }
        }
    }

    fn conflict_pairs(&mut self, left: &[usize], right: &[usize]) {
        for &a in left {
            for &b in right {
                self.conflict.insert((a, b));
                self.conflict.insert((b, a));
            }
        }
    }

    fn finish(mut self, dpoc_sync: bool) -> EventSystem {
        let n = self.events.len();
        let mut order = vec![vec![false; n]; n];
        for (i, row) in order.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in self.edges.drain(..) {
            order[a][b] = true;
        }
        close_transitive(&mut order);
        let matches = compute_matching(&self.events);
        if dpoc_sync {
            // Synchronisation clause: whenever e strictly precedes x, the
            // events matching e precede x as well. Iterate to fixpoint.
            loop {
                let mut changed = false;
                for e in 0..n {
                    for &m in &matches[e] {
                        for x in 0..n {
                            if x != e && order[e][x] && !order[m][x] {
                                order[m][x] = true;
                                changed = true;
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
                close_transitive(&mut order);
            }
        }
        EventSystem {
            events: self.events,
            order,
            matches,
            conflict: self.conflict,
            scopes_of: self.scopes_of,
            whiles_of: self.whiles_of,
        }
    }
}

fn close_transitive(m: &mut [Vec<bool>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
}

/// Send/receive pairs with dual endpoints, equal operation, and compatible
/// global indexes: equal, or equal except the last component where the `?r`
/// receive variant faces the sender's `?t`/`?f` variant.
fn compute_matching(events: &[Event]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); events.len()];
    for (i, a) in events.iter().enumerate() {
        for (j, b) in events.iter().enumerate() {
            let (op_a, to) = match &a.kind {
                EventKind::Send { op, to } => (op, to),
                _ => continue,
            };
            let (op_b, from) = match &b.kind {
                EventKind::Recv { op, from } => (op, from),
                _ => continue,
            };
            if op_a != op_b
                || !b.owner.contains(to)
                || !a.owner.contains(from)
                || !gi_compatible(&a.gi, &b.gi)
            {
                continue;
            }
            out[i].push(j);
            out[j].push(i);
        }
    }
    out
}

fn gi_compatible(a: &GlobalIndex, b: &GlobalIndex) -> bool {
    if a == b {
        return true;
    }
    if a.0.len() != b.0.len() || a.0[..a.0.len() - 1] != b.0[..b.0.len() - 1] {
        return false;
    }
    let (x, y) = (a.own(), b.own());
    if x.base != y.base {
        return false;
    }
    let bridged = |s: IndexVariant, r: IndexVariant| {
        r == IndexVariant::Recv && matches!(s, IndexVariant::True | IndexVariant::False)
    };
    bridged(x.variant, y.variant) || bridged(y.variant, x.variant)
}

fn gi_of(prefix: &[DpocIndex], own: DpocIndex) -> GlobalIndex {
    let mut v = prefix.to_vec();
    v.push(own);
    GlobalIndex(v)
}

fn one(role: &Role) -> BTreeSet<Role> {
    BTreeSet::from([role.clone()])
}

/// Events and causality of an annotated choreography.
pub fn events_dioc(p: &DiocProc) -> EventSystem {
    let mut b = Builder::new();
    walk_dioc(&mut b, p, &[]);
    b.finish(false)
}

fn walk_dioc(b: &mut Builder, p: &DiocProc, prefix: &[DpocIndex]) -> Vec<usize> {
    match p {
        DiocProc::Interaction { idx, op, sender, receiver, .. } => {
            let gi = gi_of(prefix, DpocIndex::plain(idx.0));
            let opn = OperationName::prog(idx.0, op.clone());
            let s = b.push(Event {
                gi: gi.clone(),
                kind: EventKind::Send { op: opn.clone(), to: receiver.clone() },
                owner: one(sender),
            });
            let r = b.push(Event {
                gi,
                kind: EventKind::Recv { op: opn, from: sender.clone() },
                owner: one(receiver),
            });
            // The sending event precedes the receiving event.
            b.edges.push((s, r));
            vec![s, r]
        }
        DiocProc::Assign { idx, role, .. } => {
            let ev = Event {
                gi: gi_of(prefix, DpocIndex::plain(idx.0)),
                kind: EventKind::Assign,
                owner: one(role),
            };
            vec![b.push(ev)]
        }
        DiocProc::Seq(x, y) => {
            let lx = walk_dioc(b, x, prefix);
            let ly = walk_dioc(b, y, prefix);
            b.seq_edges(&lx, &ly);
            lx.into_iter().chain(ly).collect()
        }
        DiocProc::Par(x, y) => {
            let mut lx = walk_dioc(b, x, prefix);
            lx.extend(walk_dioc(b, y, prefix));
            lx
        }
        DiocProc::Skip | DiocProc::End => Vec::new(),
        DiocProc::If { idx, role, then_br, else_br, .. } => {
            let g = b.push(Event {
                gi: gi_of(prefix, DpocIndex::plain(idx.0)),
                kind: EventKind::GuardIf,
                owner: one(role),
            });
            let lt = walk_dioc(b, then_br, prefix);
            let le = walk_dioc(b, else_br, prefix);
            b.seq_edges(&[g], &lt);
            b.seq_edges(&[g], &le);
            b.conflict_pairs(&lt, &le);
            let mut all = vec![g];
            all.extend(lt);
            all.extend(le);
            all
        }
        DiocProc::While { idx, role, body, .. } => {
            let gi = gi_of(prefix, DpocIndex::plain(idx.0));
            let g = b.push(Event { gi: gi.clone(), kind: EventKind::GuardWhile, owner: one(role) });
            let inner: Vec<DpocIndex> = gi.0.clone();
            let lb = walk_dioc(b, body, &inner);
            b.seq_edges(&[g], &lb);
            for &e in &lb {
                b.whiles_of[e].insert(gi.clone());
            }
            let mut all = vec![g];
            all.extend(lb);
            all
        }
        DiocProc::Scope { idx, body, .. } => {
            let gi = gi_of(prefix, DpocIndex::plain(idx.0));
            let owner = roles(body);
            let up = b.push(Event {
                gi: gi.clone(),
                kind: EventKind::ScopeInit,
                owner: owner.clone(),
            });
            let down = b.push(Event { gi: gi.clone(), kind: EventKind::ScopeTerm, owner });
            let lb = walk_dioc(b, body, prefix);
            b.seq_edges(&[up], &lb);
            b.seq_edges(&lb, &[down]);
            b.edges.push((up, down));
            for &e in &lb {
                b.scopes_of[e].insert(gi.clone());
            }
            let mut all = vec![up];
            all.extend(lb);
            all.push(down);
            all
        }
    }
}

/// Events and causality of a network of per-role processes.
pub fn events_net(n: &Network) -> EventSystem {
    let mut b = Builder::new();
    for (role, (proc, _)) in &n.0 {
        walk_dpoc(&mut b, proc, &[], role);
    }
    b.finish(true)
}

fn walk_dpoc(b: &mut Builder, p: &DpocProc, prefix: &[DpocIndex], r: &Role) -> Vec<usize> {
    match p {
        DpocProc::Send { idx, op, to, .. } => {
            let ev = Event {
                gi: gi_of(prefix, *idx),
                kind: EventKind::Send { op: op.clone(), to: to.clone() },
                owner: one(r),
            };
            vec![b.push(ev)]
        }
        // The shipped code is a value until the rendezvous installs it at
        // the target role, so it contributes no events here.
        DpocProc::SendUpdate { idx, op, to, .. } => {
            let ev = Event {
                gi: gi_of(prefix, DpocIndex::plain(idx.0)),
                kind: EventKind::Send { op: op.clone(), to: to.clone() },
                owner: one(r),
            };
            vec![b.push(ev)]
        }
        DpocProc::Recv { idx, op, from, .. } => {
            let ev = Event {
                gi: gi_of(prefix, *idx),
                kind: EventKind::Recv { op: op.clone(), from: from.clone() },
                owner: one(r),
            };
            vec![b.push(ev)]
        }
        DpocProc::Assign { idx, .. } => {
            let ev =
                Event { gi: gi_of(prefix, *idx), kind: EventKind::Assign, owner: one(r) };
            vec![b.push(ev)]
        }
        DpocProc::Seq(x, y) => {
            let lx = walk_dpoc(b, x, prefix, r);
            let ly = walk_dpoc(b, y, prefix, r);
            b.seq_edges(&lx, &ly);
            lx.into_iter().chain(ly).collect()
        }
        DpocProc::Par(x, y) => {
            let mut lx = walk_dpoc(b, x, prefix, r);
            lx.extend(walk_dpoc(b, y, prefix, r));
            lx
        }
        DpocProc::Skip | DpocProc::End => Vec::new(),
        DpocProc::If { idx, then_br, else_br, .. } => {
            let g = b.push(Event {
                gi: gi_of(prefix, DpocIndex::plain(idx.0)),
                kind: EventKind::GuardIf,
                owner: one(r),
            });
            let lt = walk_dpoc(b, then_br, prefix, r);
            let le = walk_dpoc(b, else_br, prefix, r);
            b.seq_edges(&[g], &lt);
            b.seq_edges(&[g], &le);
            b.conflict_pairs(&lt, &le);
            let mut all = vec![g];
            all.extend(lt);
            all.extend(le);
            all
        }
        DpocProc::While { idx, body, .. } => {
            let gi = gi_of(prefix, DpocIndex::plain(idx.0));
            let g = b.push(Event { gi: gi.clone(), kind: EventKind::GuardWhile, owner: one(r) });
            let inner: Vec<DpocIndex> = gi.0.clone();
            let lb = walk_dpoc(b, body, &inner, r);
            b.seq_edges(&[g], &lb);
            for &e in &lb {
                b.whiles_of[e].insert(gi.clone());
            }
            let mut all = vec![g];
            all.extend(lb);
            all
        }
        DpocProc::ScopeCoord { idx, body, .. } | DpocProc::ScopeSimple { idx, body, .. } => {
            let gi = gi_of(prefix, DpocIndex::plain(idx.0));
            let up =
                b.push(Event { gi: gi.clone(), kind: EventKind::ScopeInit, owner: one(r) });
            let down =
                b.push(Event { gi: gi.clone(), kind: EventKind::ScopeTerm, owner: one(r) });
            let lb = walk_dpoc(b, body, prefix, r);
            b.seq_edges(&[up], &lb);
            b.seq_edges(&lb, &[down]);
            b.edges.push((up, down));
            for &e in &lb {
                b.scopes_of[e].insert(gi.clone());
            }
            let mut all = vec![up];
            all.extend(lb);
            all.push(down);
            all
        }
    }
}

/// The event a pending offer would execute. Enabled constructs are never
/// inside a while body (the loop has to unfold first), so the offer's global
/// index is the construct's own index.
pub fn event_of_offer(net: &Network, offer: &Offer) -> Option<Event> {
    let (proc, _) = net.0.get(&offer.role)?;
    let mut cur = proc;
    for d in &offer.path {
        cur = match (d, cur) {
            (Dir::SeqL, DpocProc::Seq(a, _)) => a,
            (Dir::SeqR, DpocProc::Seq(_, b)) => b,
            (Dir::ParL, DpocProc::Par(a, _)) => a,
            (Dir::ParR, DpocProc::Par(_, b)) => b,
            _ => return None,
        };
    }
    let owner = one(&offer.role);
    let single = |i: Index| GlobalIndex(vec![DpocIndex::plain(i.0)]);
    Some(match cur {
        DpocProc::Send { idx, op, to, .. } => Event {
            gi: GlobalIndex(vec![*idx]),
            kind: EventKind::Send { op: op.clone(), to: to.clone() },
            owner,
        },
        DpocProc::SendUpdate { idx, op, to, .. } => Event {
            gi: single(*idx),
            kind: EventKind::Send { op: op.clone(), to: to.clone() },
            owner,
        },
        DpocProc::Recv { idx, op, from, .. } => Event {
            gi: GlobalIndex(vec![*idx]),
            kind: EventKind::Recv { op: op.clone(), from: from.clone() },
            owner,
        },
        DpocProc::Assign { idx, .. } => {
            Event { gi: GlobalIndex(vec![*idx]), kind: EventKind::Assign, owner }
        }
        DpocProc::If { idx, .. } => Event { gi: single(*idx), kind: EventKind::GuardIf, owner },
        DpocProc::While { idx, .. } => {
            Event { gi: single(*idx), kind: EventKind::GuardWhile, owner }
        }
        DpocProc::ScopeCoord { idx, .. } | DpocProc::ScopeSimple { idx, .. } => {
            Event { gi: single(*idx), kind: EventKind::ScopeInit, owner }
        }
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anno::annotate;
    use crate::ast::GlobalState;
    use crate::parse::parse_dioc;
    use crate::project::project;

    fn dioc(src: &str) -> DiocProc {
        annotate(&parse_dioc(src).unwrap().proc)
    }

    fn net_of(p: &DiocProc) -> Network {
        let sigma = GlobalState::new();
        let rs: Vec<Role> = roles(p).into_iter().collect();
        project(p, &sigma, &rs)
    }

    fn find(es: &EventSystem, pred: impl Fn(&Event) -> bool) -> usize {
        es.events.iter().position(|e| pred(e)).expect("event not found")
    }

    #[test]
    fn interaction_gives_matching_ordered_pair() {
        let es = events_dioc(&dioc("o : A(1) -> B(x)"));
        assert_eq!(es.len(), 2);
        let s = find(&es, |e| matches!(e.kind, EventKind::Send { .. }));
        let r = find(&es, |e| matches!(e.kind, EventKind::Recv { .. }));
        assert!(es.leq(s, r));
        assert!(!es.leq(r, s));
        assert_eq!(es.matching(s), &[r]);
        assert!(es.antisymmetric());
    }

    #[test]
    fn sequence_orders_all_cross_pairs_and_parallel_none() {
        let es = events_dioc(&dioc("o : A(1) -> B(x); p : B(2) -> A(y)"));
        for a in 0..2 {
            for b in 2..4 {
                assert!(es.leq(a, b) || es.leq(b, a));
            }
        }
        let es = events_dioc(&dioc("{ o : A(1) -> B(x) | p : C(2) -> D(y) }"));
        for a in 0..2 {
            for b in 2..4 {
                assert!(!es.leq(a, b) && !es.leq(b, a));
            }
        }
    }

    #[test]
    fn guard_precedes_branches_which_conflict() {
        let es = events_dioc(&dioc(
            "if (k)@A { o : A(1) -> B(x) } else { p : A(2) -> B(y) }",
        ));
        let g = find(&es, |e| e.kind == EventKind::GuardIf);
        let s1 = find(&es, |e| matches!(&e.kind, EventKind::Send { op, .. } if op.bare() == "o"));
        let s2 = find(&es, |e| matches!(&e.kind, EventKind::Send { op, .. } if op.bare() == "p"));
        assert!(es.leq(g, s1) && es.leq(g, s2));
        assert!(es.conflicting(s1, s2));
        assert!(!es.conflicting(g, s1));
        assert_eq!(es.conflict_pairs().len(), 4);
    }

    #[test]
    fn while_extends_global_indexes_of_body() {
        let es = events_dioc(&dioc("while (k)@A { o : A(1) -> B(x) }"));
        let g = find(&es, |e| e.kind == EventKind::GuardWhile);
        let s = find(&es, |e| matches!(e.kind, EventKind::Send { .. }));
        assert_eq!(es.events[g].gi.0.len(), 1);
        assert_eq!(es.events[s].gi.0.len(), 2);
        assert_eq!(es.events[s].gi.0[0], es.events[g].gi.own());
        assert!(es.leq(g, s));
        assert_eq!(es.whiles_of(s).len(), 1);
        assert!(es.whiles_of(g).is_empty());
    }

    #[test]
    fn scope_events_bracket_the_body_and_join_roles() {
        let p = dioc("scope @A { o : A(1) -> B(x) }");
        let es = events_dioc(&p);
        let up = find(&es, |e| e.kind == EventKind::ScopeInit);
        let down = find(&es, |e| e.kind == EventKind::ScopeTerm);
        let s = find(&es, |e| matches!(e.kind, EventKind::Send { .. }));
        assert!(es.leq(up, s) && es.leq(s, down) && es.leq(up, down));
        assert_eq!(es.events[up].owner.len(), 2);

        let net = events_net(&net_of(&p));
        let pu = net.position(&es.events[up]).unwrap();
        assert_eq!(net.events[pu].owner.len(), 2);
    }

    #[test]
    fn projection_preserves_events_and_causality() {
        let srcs = [
            "o : A(1) -> B(x); p : B(x) -> C(y)",
            "k@A = true; while (k)@A { o : A(1) -> B(x); k@A = false }",
            "scope @A { o : A(1) -> B(x) }; if (x)@B { p : B(1) -> A(z) } else { q : B(2) -> A(z) }",
        ];
        for src in srcs {
            let p = dioc(src);
            let di = events_dioc(&p);
            let dp = events_net(&net_of(&p));
            for (i, ev) in di.events.iter().enumerate() {
                let pi = dp.position(ev).unwrap_or_else(|| panic!("missing {ev} for {src}"));
                for (j, ev2) in di.events.iter().enumerate() {
                    if !di.leq(i, j) {
                        continue;
                    }
                    let pj = dp.position(ev2).unwrap();
                    let ok = dp.leq(pi, pj)
                        || dp.matching(pj).iter().any(|&m| dp.leq(pi, m));
                    assert!(ok, "causality lost between {ev} and {ev2} in {src}");
                }
            }
            assert!(di.antisymmetric());
        }
    }

    #[test]
    fn network_synchronisation_closes_across_roles() {
        // At B the o-receive precedes the p-send, so by synchronisation the
        // o-send at A precedes the p-send too.
        let p = dioc("o : A(1) -> B(x); p : B(x) -> C(y)");
        let es = events_net(&net_of(&p));
        let so = find(&es, |e| matches!(&e.kind, EventKind::Send { op, .. } if op.bare() == "o"));
        let sp = find(&es, |e| matches!(&e.kind, EventKind::Send { op, .. } if op.bare() == "p"));
        assert!(es.leq(so, sp));
        assert!(es.antisymmetric());
    }

    #[test]
    fn variant_indexes_bridge_matching() {
        let p = dioc("if (k)@A { o : A(1) -> B(x) } else { p : A(2) -> B(y) }");
        let es = events_net(&net_of(&p));
        let s = find(&es, |e| {
            matches!(&e.kind, EventKind::Send { op, .. } if op.is_aux())
                && e.gi.own().variant == IndexVariant::True
        });
        let partners = es.matching(s);
        assert_eq!(partners.len(), 1);
        assert_eq!(es.events[partners[0]].gi.own().variant, IndexVariant::Recv);
    }
}
