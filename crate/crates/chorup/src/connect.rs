//! Connectedness analysis: transition frontiers (`trans_i`, `trans_f`), the
//! sequence condition, and the fast pairset intersection test.

use crate::ast::{roles, DiocProc, Role};

use std::fmt;

/// An unordered pair of roles. `{R, R}` is a legal pair (self-synchronizing
/// constructs such as assignments and guards own both ends). Stored sorted
/// so that equality is unordered-pair equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RolePair(Role, Role);

impl RolePair {
    pub fn new(a: Role, b: Role) -> RolePair {
        if a <= b {
            RolePair(a, b)
        } else {
            RolePair(b, a)
        }
    }
    pub fn contains(&self, r: &Role) -> bool {
        &self.0 == r || &self.1 == r
    }
    pub fn sides(&self) -> (&Role, &Role) {
        (&self.0, &self.1)
    }
}

impl fmt::Display for RolePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.0, self.1)
    }
}

/// A set of role pairs: the possible first (or last) synchronization
/// frontiers of a term. Kept sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrontierSet(Vec<RolePair>);

impl FrontierSet {
    pub fn empty() -> FrontierSet {
        FrontierSet(Vec::new())
    }
    pub fn single(a: Role, b: Role) -> FrontierSet {
        FrontierSet(vec![RolePair::new(a, b)])
    }
    pub fn from_pairs(pairs: impl IntoIterator<Item = RolePair>) -> FrontierSet {
        let mut v: Vec<RolePair> = pairs.into_iter().collect();
        v.sort();
        v.dedup();
        FrontierSet(v)
    }
    pub fn union(&self, other: &FrontierSet) -> FrontierSet {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        v.sort();
        v.dedup();
        FrontierSet(v)
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn pairs(&self) -> &[RolePair] {
        &self.0
    }
}

impl fmt::Display for FrontierSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Roles that may take part in the first synchronization of the term.
pub fn trans_i(p: &DiocProc) -> FrontierSet {
    frontiers(p).0
}

/// Roles that may take part in the last synchronization of the term.
pub fn trans_f(p: &DiocProc) -> FrontierSet {
    frontiers(p).1
}

/// Compute both frontiers bottom-up in one pass.
fn frontiers(p: &DiocProc) -> (FrontierSet, FrontierSet) {
    match p {
        DiocProc::Interaction { sender, receiver, .. } => {
            let s = FrontierSet::single(sender.clone(), receiver.clone());
            (s.clone(), s)
        }
        DiocProc::Assign { role, .. } => {
            let s = FrontierSet::single(role.clone(), role.clone());
            (s.clone(), s)
        }
        DiocProc::Skip | DiocProc::End => (FrontierSet::empty(), FrontierSet::empty()),
        DiocProc::Seq(a, b) => {
            let (ia, fa) = frontiers(a);
            let (ib, fb) = frontiers(b);
            let i = if ia.is_empty() { ib } else { ia };
            let f = if fb.is_empty() { fa } else { fb };
            (i, f)
        }
        DiocProc::Par(a, b) => {
            let (ia, fa) = frontiers(a);
            let (ib, fb) = frontiers(b);
            (ia.union(&ib), fa.union(&fb))
        }
        DiocProc::If { role, then_br, else_br, .. } => {
            let i = FrontierSet::single(role.clone(), role.clone());
            let ft = frontiers(then_br).1;
            let fe = frontiers(else_br).1;
            let f = ft.union(&fe);
            let f = if f.is_empty() { i.clone() } else { f };
            (i, f)
        }
        DiocProc::While { role, body, .. } => {
            let i = FrontierSet::single(role.clone(), role.clone());
            let fb = frontiers(body).1;
            let f = if fb.is_empty() {
                i.clone()
            } else {
                let others: Vec<RolePair> = roles(p)
                    .into_iter()
                    .filter(|r| r != role)
                    .map(|r| RolePair::new(role.clone(), r))
                    .collect();
                FrontierSet::from_pairs(others)
            };
            (i, f)
        }
        DiocProc::Scope { role, body, .. } => {
            let i = FrontierSet::single(role.clone(), role.clone());
            let body_roles = roles(body);
            let only_lead = body_roles.iter().all(|r| r == role);
            let f = if only_lead {
                FrontierSet::single(role.clone(), role.clone())
            } else {
                FrontierSet::from_pairs(
                    body_roles
                        .into_iter()
                        .filter(|r| r != role)
                        .map(|r| RolePair::new(r, role.clone())),
                )
            };
            (i, f)
        }
    }
}

/// Reference intersection test: every pair in `a` shares a role with every
/// pair in `b`. Quadratic; kept as the oracle the fast path is checked
/// against.
pub fn pairsets_all_intersect_brute(a: &FrontierSet, b: &FrontierSet) -> bool {
    a.pairs().iter().all(|pa| {
        b.pairs().iter().all(|pb| {
            let (x, y) = pa.sides();
            pb.contains(x) || pb.contains(y)
        })
    })
}

/// Fast intersection test. With `n = |a| + |b|`: when the smaller set has at
/// most 9 pairs the quadratic scan is already O(n); otherwise, by a
/// pigeonhole argument on sets of unordered pairs, all pairs of both sets
/// must share one common role, which only the two roles of any single pair
/// can be - an O(n) membership scan.
pub fn pairsets_all_intersect(a: &FrontierSet, b: &FrontierSet) -> bool {
    if a.is_empty() || b.is_empty() {
        return true;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if small.len() <= 9 {
        return small.pairs().iter().all(|pa| {
            large.pairs().iter().all(|pb| {
                let (x, y) = pa.sides();
                pb.contains(x) || pb.contains(y)
            })
        });
    }
    let (c1, c2) = small.pairs()[0].sides();
    let all_contain = |r: &Role| {
        small.pairs().iter().all(|p| p.contains(r))
            && large.pairs().iter().all(|p| p.contains(r))
    };
    all_contain(c1) || all_contain(c2)
}

/// A violation of the sequence condition: a sequential composition whose
/// left final frontier misses the right initial frontier.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error(
    "sequence not connected at `{left_text}; {right_text}`: final pair {final_pair} of the left \
     side shares no role with initial pair {initial_pair} of the right side"
)]
pub struct ConnError {
    pub left_text: String,
    pub right_text: String,
    pub final_pair: RolePair,
    pub initial_pair: RolePair,
}

/// Check connectedness (for sequence): for every subterm `A; B`, every pair
/// in `trans_f(A)` shares a role with every pair in `trans_i(B)`. Returns
/// the first violation found, with the offending pairs.
pub fn connected(p: &DiocProc) -> Result<(), ConnError> {
    check(p).map(|_| ())
}

fn check(p: &DiocProc) -> Result<(FrontierSet, FrontierSet), ConnError> {
    match p {
        DiocProc::Seq(a, b) => {
            let (ia, fa) = check(a)?;
            let (ib, fb) = check(b)?;
            if !pairsets_all_intersect(&fa, &ib) {
                let witness = first_disjoint(&fa, &ib)
                    .expect("intersection failed, a disjoint witness exists");
                return Err(ConnError {
                    left_text: crate::pretty::dioc_headline(a),
                    right_text: crate::pretty::dioc_headline(b),
                    final_pair: witness.0,
                    initial_pair: witness.1,
                });
            }
            let i = if ia.is_empty() { ib } else { ia };
            let f = if fb.is_empty() { fa } else { fb };
            Ok((i, f))
        }
        DiocProc::Par(a, b) => {
            let (ia, fa) = check(a)?;
            let (ib, fb) = check(b)?;
            Ok((ia.union(&ib), fa.union(&fb)))
        }
        DiocProc::If { then_br, else_br, .. } => {
            check(then_br)?;
            check(else_br)?;
            Ok((trans_i(p), trans_f(p)))
        }
        DiocProc::While { body, .. } | DiocProc::Scope { body, .. } => {
            check(body)?;
            Ok((trans_i(p), trans_f(p)))
        }
        _ => Ok((trans_i(p), trans_f(p))),
    }
}

fn first_disjoint(a: &FrontierSet, b: &FrontierSet) -> Option<(RolePair, RolePair)> {
    for pa in a.pairs() {
        for pb in b.pairs() {
            let (x, y) = pa.sides();
            if !(pb.contains(x) || pb.contains(y)) {
                return Some((pa.clone(), pb.clone()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Expr, Index, Value};

    fn r(s: &str) -> Role {
        Role::new(s)
    }

    fn interaction(i: u64, s: &str, rc: &str) -> DiocProc {
        DiocProc::Interaction {
            idx: Index(i),
            op: "o".into(),
            sender: r(s),
            expr: Expr::Lit(Value::Int(0)),
            receiver: r(rc),
            var: "x".into(),
        }
    }

    fn assign(i: u64, role: &str) -> DiocProc {
        DiocProc::Assign {
            idx: Index(i),
            role: r(role),
            var: "x".into(),
            expr: Expr::Lit(Value::Int(1)),
        }
    }

    fn pair(a: &str, b: &str) -> RolePair {
        RolePair::new(r(a), r(b))
    }

    #[test]
    fn frontier_base_cases() {
        assert_eq!(trans_i(&interaction(1, "A", "B")), FrontierSet::single(r("A"), r("B")));
        assert_eq!(trans_f(&assign(1, "R")), FrontierSet::single(r("R"), r("R")));
        assert!(trans_i(&DiocProc::Skip).is_empty());
        assert!(trans_f(&DiocProc::End).is_empty());
    }

    #[test]
    fn seq_skips_empty_sides() {
        // trans_i(1; x@R = e) = {{R, R}}
        let p = DiocProc::seq(DiocProc::Skip, assign(1, "R"));
        assert_eq!(trans_i(&p), FrontierSet::single(r("R"), r("R")));
        // trans_f(x@R = e; 1) = {{R, R}}
        let q = DiocProc::seq(assign(1, "R"), DiocProc::Skip);
        assert_eq!(trans_f(&q), FrontierSet::single(r("R"), r("R")));
    }

    #[test]
    fn if_frontiers() {
        let p = DiocProc::If {
            idx: Index(1),
            role: r("A"),
            cond: Expr::Lit(Value::Bool(true)),
            then_br: Box::new(interaction(2, "B", "C")),
            else_br: Box::new(DiocProc::Skip),
        };
        assert_eq!(trans_i(&p), FrontierSet::single(r("A"), r("A")));
        assert_eq!(trans_f(&p), FrontierSet::single(r("B"), r("C")));
        // Both branches empty: falls back to the guard role.
        let q = DiocProc::If {
            idx: Index(1),
            role: r("A"),
            cond: Expr::Lit(Value::Bool(true)),
            then_br: Box::new(DiocProc::Skip),
            else_br: Box::new(DiocProc::Skip),
        };
        assert_eq!(trans_f(&q), FrontierSet::single(r("A"), r("A")));
    }

    #[test]
    fn while_frontiers() {
        // while at R with body touching B and C: last synchronizations pair R
        // with each other role of the loop.
        let p = DiocProc::While {
            idx: Index(1),
            role: r("R"),
            cond: Expr::Lit(Value::Bool(false)),
            body: Box::new(interaction(2, "B", "C")),
        };
        assert_eq!(trans_i(&p), FrontierSet::single(r("R"), r("R")));
        assert_eq!(trans_f(&p), FrontierSet::from_pairs(vec![pair("R", "B"), pair("R", "C")]));
        // Body with no final frontier: the guard role is the frontier.
        let q = DiocProc::While {
            idx: Index(1),
            role: r("R"),
            cond: Expr::Lit(Value::Bool(false)),
            body: Box::new(DiocProc::Skip),
        };
        assert_eq!(trans_f(&q), FrontierSet::single(r("R"), r("R")));
    }

    #[test]
    fn scope_frontiers() {
        let p = DiocProc::Scope {
            idx: Index(1),
            role: r("R"),
            body: Box::new(interaction(2, "R", "B")),
            props: Default::default(),
        };
        assert_eq!(trans_f(&p), FrontierSet::from_pairs(vec![pair("B", "R")]));
        let only_lead = DiocProc::Scope {
            idx: Index(1),
            role: r("R"),
            body: Box::new(assign(2, "R")),
            props: Default::default(),
        };
        assert_eq!(trans_f(&only_lead), FrontierSet::single(r("R"), r("R")));
    }

    #[test]
    fn connectedness_verdicts() {
        let ok = DiocProc::seq(interaction(1, "A", "B"), interaction(2, "B", "C"));
        assert!(connected(&ok).is_ok());
        let bad = DiocProc::seq(interaction(1, "A", "B"), interaction(2, "C", "D"));
        let err = connected(&bad).unwrap_err();
        assert_eq!(err.final_pair, pair("A", "B"));
        assert_eq!(err.initial_pair, pair("C", "D"));
        // The check also looks inside branches and bodies.
        let nested = DiocProc::If {
            idx: Index(3),
            role: r("A"),
            cond: Expr::Lit(Value::Bool(true)),
            then_br: Box::new(bad),
            else_br: Box::new(DiocProc::Skip),
        };
        assert!(connected(&nested).is_err());
    }

    #[test]
    fn fast_intersection_matches_brute_on_edges() {
        let empty = FrontierSet::empty();
        let one = FrontierSet::single(r("A"), r("B"));
        assert!(pairsets_all_intersect(&empty, &one));
        assert!(pairsets_all_intersect(&one, &empty));
        // A large pair of sets sharing the hub role A.
        let star = |m: usize| {
            FrontierSet::from_pairs(
                (0..m).map(|k| RolePair::new(r("A"), r(&format!("R{k}")))),
            )
        };
        let s1 = star(15);
        let s2 = star(20);
        assert!(pairsets_all_intersect(&s1, &s2));
        assert_eq!(
            pairsets_all_intersect(&s1, &s2),
            pairsets_all_intersect_brute(&s1, &s2)
        );
        // Break the hub with one stray pair.
        let broken = s2.union(&FrontierSet::single(r("X"), r("Y")));
        assert!(!pairsets_all_intersect(&s1, &broken));
        assert_eq!(
            pairsets_all_intersect(&s1, &broken),
            pairsets_all_intersect_brute(&s1, &broken)
        );
    }
}
