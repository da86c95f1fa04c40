//! Core syntax: values, expressions, choreographies (DIOC), per-role
//! processes (DPOC), networks, update repositories and transition labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A participant name. Ordered lexicographically; canonical orderings of
/// role sets throughout the crate rely on this.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role(pub String);

impl Role {
    pub fn new(s: impl Into<String>) -> Role {
        Role(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Var = String;

/// Runtime values. `Err` is the distinguished error value produced by
/// unbound variables, type mismatches and unknown functions; evaluation is
/// total and never panics.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Err,
}

impl Value {
    /// Guard truthiness: only `true` counts, everything else (including
    /// `Err`) selects the false branch.
    pub fn truthy(&self) -> bool {
        matches!(self, Value::Bool(true))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Err => f.write_str("<err>"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    Var(Var),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

/// Construct index. `0` means "not yet annotated"; well-annotated programs
/// use distinct positive indexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index(pub u64);

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Variant tag a projected index may carry: the coordinator of a conditional
/// or loop emits auxiliary messages under `?t`/`?f`, participants receive
/// under `?r` and close loop iterations under `?c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexVariant {
    Plain,
    True,
    False,
    Recv,
    Close,
}

impl IndexVariant {
    pub fn suffix(&self) -> &'static str {
        match self {
            IndexVariant::Plain => "",
            IndexVariant::True => "?t",
            IndexVariant::False => "?f",
            IndexVariant::Recv => "?r",
            IndexVariant::Close => "?c",
        }
    }
}

/// Index of a DPOC construct: the base index inherited from the
/// choreography plus an optional variant tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DpocIndex {
    pub base: Index,
    pub variant: IndexVariant,
}

impl DpocIndex {
    pub fn plain(i: u64) -> DpocIndex {
        DpocIndex { base: Index(i), variant: IndexVariant::Plain }
    }
    pub fn with(i: u64, variant: IndexVariant) -> DpocIndex {
        DpocIndex { base: Index(i), variant }
    }
}

impl fmt::Display for DpocIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, self.variant.suffix())
    }
}

/// Global index of an event: the chain of enclosing loop indexes followed by
/// the construct's own index, written `i1:i2:...:i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalIndex(pub Vec<DpocIndex>);

impl GlobalIndex {
    pub fn own(&self) -> DpocIndex {
        *self.0.last().expect("global index is never empty")
    }
}

impl fmt::Display for GlobalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ix in &self.0 {
            if !first {
                f.write_str(":")?;
            }
            write!(f, "{ix}")?;
            first = false;
        }
        Ok(())
    }
}

/// The five auxiliary operation families used by projection: conditional
/// broadcast, loop begin/end, scope begin/end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AuxKind {
    Cnd,
    Wb,
    We,
    Sb,
    Se,
}

impl AuxKind {
    pub fn name(&self) -> &'static str {
        match self {
            AuxKind::Cnd => "cnd",
            AuxKind::Wb => "wb",
            AuxKind::We => "we",
            AuxKind::Sb => "sb",
            AuxKind::Se => "se",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    /// An operation written by the programmer, e.g. `priceReq`.
    Prog(String),
    /// An auxiliary operation `cnd*_i` / `wb*_i` / ... owned by construct `i`.
    Aux(AuxKind, Index),
}

/// A full operation name as it appears on the wire: the prefix index keeps
/// messages of syntactically identical constructs apart.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperationName {
    pub kind: OpKind,
    pub prefix: Index,
}

impl OperationName {
    pub fn prog(prefix: u64, name: impl Into<String>) -> OperationName {
        OperationName { kind: OpKind::Prog(name.into()), prefix: Index(prefix) }
    }
    pub fn aux(prefix: u64, kind: AuxKind, owner: u64) -> OperationName {
        OperationName { kind: OpKind::Aux(kind, Index(owner)), prefix: Index(prefix) }
    }
    pub fn is_aux(&self) -> bool {
        matches!(self.kind, OpKind::Aux(..))
    }
    /// The operation name without the prefix, e.g. `offer` or `cnd*_15`.
    pub fn bare(&self) -> String {
        match &self.kind {
            OpKind::Prog(s) => s.clone(),
            OpKind::Aux(k, owner) => format!("{}*_{}", k.name(), owner),
        }
    }
}

impl fmt::Display for OperationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.prefix, self.bare())
    }
}

/// Choreography terms. `Skip` is the inert `1`, `End` the terminated `0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiocProc {
    Interaction {
        idx: Index,
        op: String,
        sender: Role,
        expr: Expr,
        receiver: Role,
        var: Var,
    },
    Assign {
        idx: Index,
        role: Role,
        var: Var,
        expr: Expr,
    },
    Seq(Box<DiocProc>, Box<DiocProc>),
    Par(Box<DiocProc>, Box<DiocProc>),
    Skip,
    End,
    If {
        idx: Index,
        role: Role,
        cond: Expr,
        then_br: Box<DiocProc>,
        else_br: Box<DiocProc>,
    },
    While {
        idx: Index,
        role: Role,
        cond: Expr,
        body: Box<DiocProc>,
    },
    Scope {
        idx: Index,
        role: Role,
        body: Box<DiocProc>,
        props: BTreeMap<String, String>,
    },
}

impl DiocProc {
    pub fn seq(a: DiocProc, b: DiocProc) -> DiocProc {
        DiocProc::Seq(Box::new(a), Box::new(b))
    }
    pub fn par(a: DiocProc, b: DiocProc) -> DiocProc {
        DiocProc::Par(Box::new(a), Box::new(b))
    }
    /// Right-associated sequence of the given terms; `Skip` when empty.
    pub fn seq_all(items: Vec<DiocProc>) -> DiocProc {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => DiocProc::Skip,
            Some(last) => it.fold(last, |acc, x| DiocProc::seq(x, acc)),
        }
    }
}

/// Payload of a scope-coordination message: either actual code for the
/// receiving role or the token `no` signalling "run the original body".
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UpdatePayload {
    No,
    Code(Box<DpocProc>),
}

/// Per-role process terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DpocProc {
    Recv {
        idx: DpocIndex,
        op: OperationName,
        var: Var,
        from: Role,
    },
    Send {
        idx: DpocIndex,
        op: OperationName,
        expr: Expr,
        to: Role,
    },
    SendUpdate {
        idx: Index,
        op: OperationName,
        payload: UpdatePayload,
        to: Role,
    },
    Assign {
        idx: DpocIndex,
        var: Var,
        expr: Expr,
    },
    Seq(Box<DpocProc>, Box<DpocProc>),
    Par(Box<DpocProc>, Box<DpocProc>),
    Skip,
    End,
    If {
        idx: Index,
        cond: Expr,
        then_br: Box<DpocProc>,
        else_br: Box<DpocProc>,
    },
    While {
        idx: Index,
        cond: Expr,
        body: Box<DpocProc>,
    },
    /// The scope as kept by its coordinator; `roleset` lists the roles of the
    /// original scope body, `name` its optional update-target name.
    ScopeCoord {
        idx: Index,
        lead: Role,
        body: Box<DpocProc>,
        roleset: BTreeSet<Role>,
        name: Option<String>,
    },
    /// The scope as kept by a non-coordinating participant.
    ScopeSimple {
        idx: Index,
        lead: Role,
        body: Box<DpocProc>,
    },
}

impl DpocProc {
    pub fn seq(a: DpocProc, b: DpocProc) -> DpocProc {
        DpocProc::Seq(Box::new(a), Box::new(b))
    }
    pub fn par(a: DpocProc, b: DpocProc) -> DpocProc {
        DpocProc::Par(Box::new(a), Box::new(b))
    }
    /// Right-associated parallel of the given terms; `Skip` when empty.
    pub fn par_all(items: Vec<DpocProc>) -> DpocProc {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => DpocProc::Skip,
            Some(last) => it.fold(last, |acc, x| DpocProc::par(x, acc)),
        }
    }
    pub fn seq_all(items: Vec<DpocProc>) -> DpocProc {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => DpocProc::Skip,
            Some(last) => it.fold(last, |acc, x| DpocProc::seq(x, acc)),
        }
    }
}

/// Reserved namespace for the variables auxiliary messages assign to.
/// `aux_var(15)` is rendered `x_15` for display.
pub fn aux_var(owner: u64) -> Var {
    format!("aux$x_{owner}")
}

/// True for identifiers in the reserved auxiliary namespace.
pub fn is_aux_var(name: &str) -> bool {
    name.starts_with("aux$")
}

pub type RoleState = BTreeMap<Var, Value>;

/// Global choreography state: one variable store per role. Lookup of an
/// unbound variable yields `Value::Err`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalState(pub BTreeMap<Role, RoleState>);

impl GlobalState {
    pub fn new() -> GlobalState {
        GlobalState(BTreeMap::new())
    }
    pub fn get(&self, role: &Role, var: &str) -> Value {
        self.0
            .get(role)
            .and_then(|m| m.get(var))
            .cloned()
            .unwrap_or(Value::Err)
    }
    pub fn set(&mut self, role: &Role, var: impl Into<Var>, value: Value) {
        self.0.entry(role.clone()).or_default().insert(var.into(), value);
    }
    pub fn role_state(&self, role: &Role) -> RoleState {
        self.0.get(role).cloned().unwrap_or_default()
    }
}

/// A network: one process and one local store per role.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Network(pub BTreeMap<Role, (DpocProc, RoleState)>);

impl Network {
    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.0.keys()
    }
    pub fn proc_of(&self, role: &Role) -> Option<&DpocProc> {
        self.0.get(role).map(|(p, _)| p)
    }
    pub fn state_of(&self, role: &Role) -> Option<&RoleState> {
        self.0.get(role).map(|(_, s)| s)
    }
}

/// One named update in the repository. `body` keeps the indexes it was
/// written with; applying the update shifts them past the system's fresh
/// counter. `target` restricts the update to scopes with a matching name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateEntry {
    pub name: String,
    pub target: Option<String>,
    pub body: DiocProc,
    /// Hash of the index-stripped body; identifies the update in labels.
    pub body_hash: u64,
    /// Result of the connectedness check, computed at load time.
    pub connected: bool,
}

/// Ordered collection of available updates. The `id` tags repository
/// versions so that repository swaps show up in labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateRepo {
    pub id: u64,
    entries: indexmap::IndexMap<String, UpdateEntry>,
}

impl UpdateRepo {
    pub fn new(id: u64) -> UpdateRepo {
        UpdateRepo { id, entries: indexmap::IndexMap::new() }
    }
    pub fn insert(&mut self, entry: UpdateEntry) {
        self.entries.insert(entry.name.clone(), entry);
    }
    pub fn get(&self, name: &str) -> Option<&UpdateEntry> {
        self.entries.get(name)
    }
    pub fn iter(&self) -> impl Iterator<Item = &UpdateEntry> {
        self.entries.values()
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    /// Largest index used by any stored body (for fresh-counter seeding).
    pub fn max_index(&self) -> u64 {
        self.iter().map(|e| crate::anno::max_index(&e.body)).max().unwrap_or(0)
    }
}

/// Digest of an update-message payload, used in labels so that label
/// equality stays cheap and structural.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PayloadDigest {
    No,
    Code(u64),
}

impl PayloadDigest {
    pub fn of(payload: &UpdatePayload) -> PayloadDigest {
        match payload {
            UpdatePayload::No => PayloadDigest::No,
            UpdatePayload::Code(p) => {
                use std::collections::hash_map::DefaultHasher;
                use std::hash::{Hash, Hasher};
                let mut h = DefaultHasher::new();
                p.hash(&mut h);
                PayloadDigest::Code(h.finish())
            }
        }
    }
}

/// Transition labels, shared (where meaningful) between the two layers.
/// The first block are system-level labels; the `Delta*` block are
/// role-level labels that never surface in system traces because the system
/// semantics pairs them into rendezvous.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Tau,
    /// A completed value communication `o : R(v) -> S(x)`.
    Interaction {
        op: OperationName,
        sender: Role,
        value: Value,
        receiver: Role,
        var: Var,
    },
    /// A completed scope-coordination communication on `sb*`/`se*`-like ops.
    UpdateInteraction {
        op: OperationName,
        sender: Role,
        payload: PayloadDigest,
        receiver: Role,
    },
    /// Termination tick.
    Tick,
    /// An update was applied at a scope.
    Update { name: String, body_hash: u64 },
    /// A scope committed to running its original body.
    NoUp,
    /// The environment swapped the update repository.
    ChangeUpdates { repo_id: u64 },
    DeltaSend {
        role: Role,
        op: OperationName,
        value: Value,
        to: Role,
    },
    DeltaRecv {
        role: Role,
        op: OperationName,
        var: Var,
        value: Value,
        from: Role,
    },
    DeltaSendUp {
        role: Role,
        op: OperationName,
        payload: PayloadDigest,
        to: Role,
    },
    DeltaRecvUp {
        role: Role,
        op: OperationName,
        payload: PayloadDigest,
        from: Role,
    },
}

impl Label {
    /// Auxiliary-communication labels: completed communications on aux
    /// operations. These are exactly the labels a weak DPOC trace hides in
    /// addition to `Tau`.
    pub fn is_aux_comm(&self) -> bool {
        match self {
            Label::Interaction { op, .. } => op.is_aux(),
            Label::UpdateInteraction { op, .. } => op.is_aux(),
            _ => false,
        }
    }
    /// Labels hidden by the weak-trace filter at the given layer.
    pub fn is_weak_hidden(&self, dpoc: bool) -> bool {
        match self {
            Label::Tau => true,
            _ => dpoc && self.is_aux_comm(),
        }
    }
}

impl fmt::Display for PayloadDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PayloadDigest::No => write!(f, "no"),
            PayloadDigest::Code(h) => write!(f, "code#{h:x}"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => write!(f, "tau"),
            Label::Interaction { op, sender, value, receiver, var } => {
                write!(f, "{op} : {sender}({value}) -> {receiver}({var})")
            }
            Label::UpdateInteraction { op, sender, payload, receiver } => {
                write!(f, "{op} : {sender}({payload}) -> {receiver}")
            }
            Label::Tick => write!(f, "tick"),
            Label::Update { name, .. } => write!(f, "update {name}"),
            Label::NoUp => write!(f, "noup"),
            Label::ChangeUpdates { repo_id } => write!(f, "change-updates#{repo_id}"),
            Label::DeltaSend { role, op, value, to } => {
                write!(f, "{role}: send {op}({value}) to {to}")
            }
            Label::DeltaRecv { role, op, var, value, from } => {
                write!(f, "{role}: recv {op}({value}) into {var} from {from}")
            }
            Label::DeltaSendUp { role, op, payload, to } => {
                write!(f, "{role}: send {op}({payload}) to {to}")
            }
            Label::DeltaRecvUp { role, op, payload, from } => {
                write!(f, "{role}: recv {op}({payload}) from {from}")
            }
        }
    }
}

/// Role sets of a choreography: interactions contribute both ends,
/// assignments and guards their role, composite terms the union of their
/// parts.
pub fn roles(p: &DiocProc) -> BTreeSet<Role> {
    let mut out = BTreeSet::new();
    collect_roles(p, &mut out);
    out
}

fn collect_roles(p: &DiocProc, out: &mut BTreeSet<Role>) {
    match p {
        DiocProc::Interaction { sender, receiver, .. } => {
            out.insert(sender.clone());
            out.insert(receiver.clone());
        }
        DiocProc::Assign { role, .. } => {
            out.insert(role.clone());
        }
        DiocProc::Seq(a, b) | DiocProc::Par(a, b) => {
            collect_roles(a, out);
            collect_roles(b, out);
        }
        DiocProc::Skip | DiocProc::End => {}
        DiocProc::If { role, then_br, else_br, .. } => {
            out.insert(role.clone());
            collect_roles(then_br, out);
            collect_roles(else_br, out);
        }
        DiocProc::While { role, body, .. } | DiocProc::Scope { role, body, .. } => {
            out.insert(role.clone());
            collect_roles(body, out);
        }
    }
}

/// Role sets of a per-role process (used for sanity checks on raw networks).
pub fn dpoc_roles(p: &DpocProc) -> BTreeSet<Role> {
    let mut out = BTreeSet::new();
    collect_dpoc_roles(p, &mut out);
    out
}

fn collect_dpoc_roles(p: &DpocProc, out: &mut BTreeSet<Role>) {
    match p {
        DpocProc::Recv { from, .. } => {
            out.insert(from.clone());
        }
        DpocProc::Send { to, .. } | DpocProc::SendUpdate { to, .. } => {
            out.insert(to.clone());
        }
        DpocProc::Assign { .. } | DpocProc::Skip | DpocProc::End => {}
        DpocProc::Seq(a, b) | DpocProc::Par(a, b) => {
            collect_dpoc_roles(a, out);
            collect_dpoc_roles(b, out);
        }
        DpocProc::If { then_br, else_br, .. } => {
            collect_dpoc_roles(then_br, out);
            collect_dpoc_roles(else_br, out);
        }
        DpocProc::While { body, .. } => collect_dpoc_roles(body, out),
        DpocProc::ScopeCoord { lead, body, roleset, .. } => {
            out.insert(lead.clone());
            out.extend(roleset.iter().cloned());
            collect_dpoc_roles(body, out);
        }
        DpocProc::ScopeSimple { lead, body, .. } => {
            out.insert(lead.clone());
            collect_dpoc_roles(body, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Role {
        Role::new(s)
    }

    fn interaction(i: u64, op: &str, s: &str, rc: &str) -> DiocProc {
        DiocProc::Interaction {
            idx: Index(i),
            op: op.into(),
            sender: r(s),
            expr: Expr::Lit(Value::Int(0)),
            receiver: r(rc),
            var: "x".into(),
        }
    }

    #[test]
    fn roles_of_leaves() {
        assert_eq!(
            roles(&interaction(1, "o", "A", "B")),
            [r("A"), r("B")].into_iter().collect()
        );
        let assign = DiocProc::Assign {
            idx: Index(1),
            role: r("C"),
            var: "x".into(),
            expr: Expr::Lit(Value::Int(1)),
        };
        assert_eq!(roles(&assign), [r("C")].into_iter().collect());
        assert_eq!(roles(&DiocProc::Skip), BTreeSet::new());
        assert_eq!(roles(&DiocProc::End), BTreeSet::new());
    }

    #[test]
    fn roles_of_composites() {
        let p = DiocProc::If {
            idx: Index(1),
            role: r("A"),
            cond: Expr::Lit(Value::Bool(true)),
            then_br: Box::new(interaction(2, "o", "B", "C")),
            else_br: Box::new(DiocProc::Skip),
        };
        assert_eq!(roles(&p), [r("A"), r("B"), r("C")].into_iter().collect());
        let w = DiocProc::While {
            idx: Index(1),
            role: r("A"),
            cond: Expr::Lit(Value::Bool(false)),
            body: Box::new(interaction(2, "o", "A", "B")),
        };
        assert_eq!(roles(&w), [r("A"), r("B")].into_iter().collect());
        let s = DiocProc::Scope {
            idx: Index(1),
            role: r("A"),
            body: Box::new(interaction(2, "o", "B", "C")),
            props: BTreeMap::new(),
        };
        assert_eq!(roles(&s), [r("A"), r("B"), r("C")].into_iter().collect());
    }

    #[test]
    fn guard_truthiness() {
        assert!(Value::Bool(true).truthy());
        assert!(!Value::Bool(false).truthy());
        assert!(!Value::Err.truthy());
        assert!(!Value::Int(1).truthy());
        assert!(!Value::Str("true".into()).truthy());
    }

    #[test]
    fn operation_display() {
        let op = OperationName::prog(5, "priceReq");
        assert_eq!(op.to_string(), "5.priceReq");
        let aux = OperationName::aux(3, AuxKind::Wb, 3);
        assert_eq!(aux.to_string(), "3.wb*_3");
        let cnd = OperationName::aux(15, AuxKind::Cnd, 15);
        assert_eq!(cnd.bare(), "cnd*_15");
        assert!(aux.is_aux() && !op.is_aux());
    }

    #[test]
    fn global_index_display() {
        let gi = GlobalIndex(vec![
            DpocIndex::plain(3),
            DpocIndex::with(5, IndexVariant::Recv),
        ]);
        assert_eq!(gi.to_string(), "3:5?r");
        assert_eq!(gi.own(), DpocIndex::with(5, IndexVariant::Recv));
    }

    #[test]
    fn unbound_lookup_is_err() {
        let st = GlobalState::new();
        assert_eq!(st.get(&r("A"), "x"), Value::Err);
        let mut st = st;
        st.set(&r("A"), "x", Value::Int(3));
        assert_eq!(st.get(&r("A"), "x"), Value::Int(3));
        assert_eq!(st.get(&r("B"), "x"), Value::Err);
    }
}
