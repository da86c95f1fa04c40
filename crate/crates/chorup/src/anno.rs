//! Index annotation of choreographies: checking, generating, shifting and
//! stripping indexes, plus global-index extraction.

use crate::ast::{DiocProc, DpocIndex, GlobalIndex, Index};
use std::collections::BTreeMap;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

/// A well-annotatedness complaint, pointing at the offending index.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AnnoError {
    #[error("construct has no index (index 0): {construct}")]
    Missing { construct: String },
    #[error("index {idx} used more than once: {first} and {second}")]
    Duplicate { idx: u64, first: String, second: String },
}

/// Check that every indexed construct carries a distinct positive index.
pub fn well_annotated(p: &DiocProc) -> Result<(), Vec<AnnoError>> {
    let mut seen: BTreeMap<u64, String> = BTreeMap::new();
    let mut errors = Vec::new();
    visit_indexed(p, &mut |idx, desc| {
        if idx.0 == 0 {
            errors.push(AnnoError::Missing { construct: desc.clone() });
        } else if let Some(first) = seen.get(&idx.0) {
            errors.push(AnnoError::Duplicate {
                idx: idx.0,
                first: first.clone(),
                second: desc.clone(),
            });
        } else {
            seen.insert(idx.0, desc.clone());
        }
    });
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn visit_indexed(p: &DiocProc, f: &mut impl FnMut(Index, &String)) {
    match p {
        DiocProc::Interaction { idx, op, sender, receiver, .. } => {
            f(*idx, &format!("interaction {op}: {sender} -> {receiver}"));
        }
        DiocProc::Assign { idx, role, var, .. } => {
            f(*idx, &format!("assignment {var}@{role}"));
        }
        DiocProc::Seq(a, b) | DiocProc::Par(a, b) => {
            visit_indexed(a, f);
            visit_indexed(b, f);
        }
        DiocProc::Skip | DiocProc::End => {}
        DiocProc::If { idx, role, then_br, else_br, .. } => {
            f(*idx, &format!("if @{role}"));
            visit_indexed(then_br, f);
            visit_indexed(else_br, f);
        }
        DiocProc::While { idx, role, body, .. } => {
            f(*idx, &format!("while @{role}"));
            visit_indexed(body, f);
        }
        DiocProc::Scope { idx, role, body, .. } => {
            f(*idx, &format!("scope @{role}"));
            visit_indexed(body, f);
        }
    }
}

/// Assign fresh indexes 1, 2, 3, ... in pre-order (a construct before its
/// children), overwriting whatever was there.
pub fn annotate(p: &DiocProc) -> DiocProc {
    let mut next = 1u64;
    number(p, &mut next)
}

fn number(p: &DiocProc, next: &mut u64) -> DiocProc {
    let mut take = || {
        let i = Index(*next);
        *next += 1;
        i
    };
    match p {
        DiocProc::Interaction { op, sender, expr, receiver, var, .. } => DiocProc::Interaction {
            idx: take(),
            op: op.clone(),
            sender: sender.clone(),
            expr: expr.clone(),
            receiver: receiver.clone(),
            var: var.clone(),
        },
        DiocProc::Assign { role, var, expr, .. } => DiocProc::Assign {
            idx: take(),
            role: role.clone(),
            var: var.clone(),
            expr: expr.clone(),
        },
        DiocProc::Seq(a, b) => {
            let a = number(a, next);
            let b = number(b, next);
            DiocProc::seq(a, b)
        }
        DiocProc::Par(a, b) => {
            let a = number(a, next);
            let b = number(b, next);
            DiocProc::par(a, b)
        }
        DiocProc::Skip => DiocProc::Skip,
        DiocProc::End => DiocProc::End,
        DiocProc::If { role, cond, then_br, else_br, .. } => {
            let idx = take();
            let t = number(then_br, next);
            let e = number(else_br, next);
            DiocProc::If {
                idx,
                role: role.clone(),
                cond: cond.clone(),
                then_br: Box::new(t),
                else_br: Box::new(e),
            }
        }
        DiocProc::While { role, cond, body, .. } => {
            let idx = take();
            let b = number(body, next);
            DiocProc::While { idx, role: role.clone(), cond: cond.clone(), body: Box::new(b) }
        }
        DiocProc::Scope { role, body, props, .. } => {
            let idx = take();
            let b = number(body, next);
            DiocProc::Scope {
                idx,
                role: role.clone(),
                body: Box::new(b),
                props: props.clone(),
            }
        }
    }
}

/// Largest index appearing in the term (0 if none).
pub fn max_index(p: &DiocProc) -> u64 {
    let mut max = 0;
    visit_indexed(p, &mut |idx, _| max = max.max(idx.0));
    max
}

/// Shift every index by `offset`. Used when an update body enters a running
/// system: its stored indexes move past the system's fresh counter, keeping
/// all live indexes distinct.
pub fn reindex(p: &DiocProc, offset: u64) -> DiocProc {
    map_indexes(p, &|i| Index(i.0 + offset))
}

/// Zero out every index (the canonical form used for body hashing).
pub fn strip_indexes(p: &DiocProc) -> DiocProc {
    map_indexes(p, &|_| Index(0))
}

fn map_indexes(p: &DiocProc, f: &impl Fn(Index) -> Index) -> DiocProc {
    match p {
        DiocProc::Interaction { idx, op, sender, expr, receiver, var } => DiocProc::Interaction {
            idx: f(*idx),
            op: op.clone(),
            sender: sender.clone(),
            expr: expr.clone(),
            receiver: receiver.clone(),
            var: var.clone(),
        },
        DiocProc::Assign { idx, role, var, expr } => DiocProc::Assign {
            idx: f(*idx),
            role: role.clone(),
            var: var.clone(),
            expr: expr.clone(),
        },
        DiocProc::Seq(a, b) => DiocProc::seq(map_indexes(a, f), map_indexes(b, f)),
        DiocProc::Par(a, b) => DiocProc::par(map_indexes(a, f), map_indexes(b, f)),
        DiocProc::Skip => DiocProc::Skip,
        DiocProc::End => DiocProc::End,
        DiocProc::If { idx, role, cond, then_br, else_br } => DiocProc::If {
            idx: f(*idx),
            role: role.clone(),
            cond: cond.clone(),
            then_br: Box::new(map_indexes(then_br, f)),
            else_br: Box::new(map_indexes(else_br, f)),
        },
        DiocProc::While { idx, role, cond, body } => DiocProc::While {
            idx: f(*idx),
            role: role.clone(),
            cond: cond.clone(),
            body: Box::new(map_indexes(body, f)),
        },
        DiocProc::Scope { idx, role, body, props } => DiocProc::Scope {
            idx: f(*idx),
            role: role.clone(),
            body: Box::new(map_indexes(body, f)),
            props: props.clone(),
        },
    }
}

/// Hash of the index-stripped term. Stable across runs (fixed-key hasher),
/// used to identify update bodies in labels.
pub fn body_hash(p: &DiocProc) -> u64 {
    let mut h = DefaultHasher::new();
    strip_indexes(p).hash(&mut h);
    h.finish()
}

/// Global indexes of all indexed constructs: the chain of enclosing loop
/// indexes followed by the construct's own index. In any state reachable
/// from a well-annotated choreography these are pairwise distinct even
/// though loop unfolding duplicates plain indexes.
pub fn global_indexes(p: &DiocProc) -> Vec<(GlobalIndex, String)> {
    let mut out = Vec::new();
    collect_gi(p, &Vec::new(), &mut out);
    out
}

fn collect_gi(p: &DiocProc, prefix: &Vec<DpocIndex>, out: &mut Vec<(GlobalIndex, String)>) {
    let gi_of = |idx: Index| {
        let mut path = prefix.clone();
        path.push(DpocIndex::plain(idx.0));
        GlobalIndex(path)
    };
    match p {
        DiocProc::Interaction { idx, op, .. } => {
            out.push((gi_of(*idx), format!("interaction {op}")));
        }
        DiocProc::Assign { idx, var, role, .. } => {
            out.push((gi_of(*idx), format!("assignment {var}@{role}")));
        }
        DiocProc::Seq(a, b) | DiocProc::Par(a, b) => {
            collect_gi(a, prefix, out);
            collect_gi(b, prefix, out);
        }
        DiocProc::Skip | DiocProc::End => {}
        DiocProc::If { idx, role, then_br, else_br, .. } => {
            out.push((gi_of(*idx), format!("if @{role}")));
            collect_gi(then_br, prefix, out);
            collect_gi(else_br, prefix, out);
        }
        DiocProc::While { idx, role, body, .. } => {
            let gi = gi_of(*idx);
            out.push((gi.clone(), format!("while @{role}")));
            collect_gi(body, &gi.0, out);
        }
        DiocProc::Scope { idx, role, body, .. } => {
            out.push((gi_of(*idx), format!("scope @{role}")));
            collect_gi(body, prefix, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Expr, Role, Value};

    fn assign(i: u64, role: &str) -> DiocProc {
        DiocProc::Assign {
            idx: Index(i),
            role: Role::new(role),
            var: "x".into(),
            expr: Expr::Lit(Value::Int(1)),
        }
    }

    #[test]
    fn annotate_preorder() {
        // if { a; b } else { c } ; d  indexes: if=1, a=2, b=3, c=4, d=5
        let p = DiocProc::seq(
            DiocProc::If {
                idx: Index(0),
                role: Role::new("A"),
                cond: Expr::Lit(Value::Bool(true)),
                then_br: Box::new(DiocProc::seq(assign(0, "A"), assign(0, "A"))),
                else_br: Box::new(assign(0, "A")),
            },
            assign(0, "A"),
        );
        let q = annotate(&p);
        let gis: Vec<u64> = global_indexes(&q).iter().map(|(g, _)| g.own().base.0).collect();
        assert_eq!(gis, vec![1, 2, 3, 4, 5]);
        assert!(well_annotated(&q).is_ok());
    }

    #[test]
    fn duplicate_and_missing_detected() {
        let p = DiocProc::seq(assign(2, "A"), assign(2, "B"));
        let errs = well_annotated(&p).unwrap_err();
        assert!(matches!(errs[0], AnnoError::Duplicate { idx: 2, .. }));
        let q = DiocProc::seq(assign(0, "A"), assign(1, "B"));
        let errs = well_annotated(&q).unwrap_err();
        assert!(matches!(errs[0], AnnoError::Missing { .. }));
    }

    #[test]
    fn reindex_shifts_everything() {
        let p = DiocProc::seq(assign(1, "A"), assign(2, "B"));
        let q = reindex(&p, 30);
        assert_eq!(max_index(&q), 32);
        assert!(well_annotated(&q).is_ok());
    }

    #[test]
    fn body_hash_ignores_indexes() {
        let p = DiocProc::seq(assign(1, "A"), assign(2, "B"));
        let q = DiocProc::seq(assign(7, "A"), assign(9, "B"));
        assert_eq!(body_hash(&p), body_hash(&q));
        let different = DiocProc::seq(assign(1, "A"), assign(2, "C"));
        assert_ne!(body_hash(&p), body_hash(&different));
    }

    #[test]
    fn global_indexes_nest_only_under_while() {
        let p = DiocProc::While {
            idx: Index(1),
            role: Role::new("A"),
            cond: Expr::Lit(Value::Bool(false)),
            body: Box::new(DiocProc::Scope {
                idx: Index(2),
                role: Role::new("A"),
                body: Box::new(assign(3, "A")),
                props: Default::default(),
            }),
        };
        let gis: Vec<String> =
            global_indexes(&p).iter().map(|(g, _)| g.to_string()).collect();
        assert_eq!(gis, vec!["1", "1:2", "1:3"]);
    }
}
