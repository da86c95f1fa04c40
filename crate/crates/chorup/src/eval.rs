//! Total expression evaluation against a role-local store and a function
//! environment of stubbed externals.

use crate::ast::{BinOp, Expr, RoleState, UnOp, Value};

/// Pattern in a function stub: either a literal that must match exactly or a
/// wildcard `_` that matches anything (including `Err`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pat {
    Any,
    Val(Value),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnRule {
    pub name: String,
    pub params: Vec<Pat>,
    pub result: Value,
}

/// Stubbed external functions. Rules are tried in order; the first whose
/// name, arity and patterns match decides the result. Calls with no matching
/// rule evaluate to `Err`, keeping evaluation total and deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionEnv {
    pub rules: Vec<FnRule>,
}

impl FunctionEnv {
    pub fn empty() -> FunctionEnv {
        FunctionEnv::default()
    }

    pub fn apply(&self, name: &str, args: &[Value]) -> Value {
        for rule in &self.rules {
            if rule.name == name && rule.params.len() == args.len() {
                let ok = rule
                    .params
                    .iter()
                    .zip(args)
                    .all(|(p, a)| match p {
                        Pat::Any => true,
                        Pat::Val(v) => v == a,
                    });
                if ok {
                    return rule.result.clone();
                }
            }
        }
        Value::Err
    }
}

/// Evaluate an expression. Never fails: unbound variables, type mismatches,
/// division by zero and unknown functions all yield `Value::Err`, and `Err`
/// is strict through every operator.
pub fn eval_expr(e: &Expr, local: &RoleState, fns: &FunctionEnv) -> Value {
    match e {
        Expr::Lit(v) => v.clone(),
        Expr::Var(x) => local.get(x).cloned().unwrap_or(Value::Err),
        Expr::Un(op, a) => {
            let va = eval_expr(a, local, fns);
            match (op, va) {
                (_, Value::Err) => Value::Err,
                (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                (UnOp::Neg, Value::Int(n)) => Value::Int(n.wrapping_neg()),
                _ => Value::Err,
            }
        }
        Expr::Bin(op, a, b) => {
            let va = eval_expr(a, local, fns);
            let vb = eval_expr(b, local, fns);
            eval_bin(*op, va, vb)
        }
        Expr::Call(name, args) => {
            let vals: Vec<Value> = args.iter().map(|a| eval_expr(a, local, fns)).collect();
            fns.apply(name, &vals)
        }
    }
}

fn eval_bin(op: BinOp, a: Value, b: Value) -> Value {
    use BinOp::*;
    use Value::*;
    if a == Err || b == Err {
        return Err;
    }
    match (op, a, b) {
        (Add, Int(x), Int(y)) => Int(x.wrapping_add(y)),
        (Add, Str(x), Str(y)) => Str(x + &y),
        (Sub, Int(x), Int(y)) => Int(x.wrapping_sub(y)),
        (Mul, Int(x), Int(y)) => Int(x.wrapping_mul(y)),
        (Div, Int(_), Int(0)) => Err,
        (Div, Int(x), Int(y)) => Int(x.wrapping_div(y)),
        (And, Bool(x), Bool(y)) => Bool(x && y),
        (Or, Bool(x), Bool(y)) => Bool(x || y),
        (Eq, x, y) => cmp_eq(x, y).map(Bool).unwrap_or(Err),
        (Neq, x, y) => cmp_eq(x, y).map(|r| Bool(!r)).unwrap_or(Err),
        (Lt, Int(x), Int(y)) => Bool(x < y),
        (Leq, Int(x), Int(y)) => Bool(x <= y),
        (Gt, Int(x), Int(y)) => Bool(x > y),
        (Geq, Int(x), Int(y)) => Bool(x >= y),
        _ => Err,
    }
}

fn cmp_eq(a: Value, b: Value) -> Option<bool> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Some(x == y),
        (Value::Bool(x), Value::Bool(y)) => Some(x == y),
        (Value::Str(x), Value::Str(y)) => Some(x == y),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Value::*;

    fn st(pairs: &[(&str, Value)]) -> RoleState {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn lit(v: Value) -> Expr {
        Expr::Lit(v)
    }

    #[test]
    fn arithmetic_and_errors() {
        let fns = FunctionEnv::empty();
        let s = st(&[("x", Int(7))]);
        let e = Expr::Bin(
            BinOp::Mul,
            Box::new(Expr::Var("x".into())),
            Box::new(lit(Int(90))),
        );
        assert_eq!(eval_expr(&e, &s, &fns), Int(630));
        let div0 = Expr::Bin(BinOp::Div, Box::new(lit(Int(1))), Box::new(lit(Int(0))));
        assert_eq!(eval_expr(&div0, &s, &fns), Err);
        let unbound = Expr::Var("nope".into());
        assert_eq!(eval_expr(&unbound, &s, &fns), Err);
        let err_prop = Expr::Bin(BinOp::Add, Box::new(unbound), Box::new(lit(Int(1))));
        assert_eq!(eval_expr(&err_prop, &s, &fns), Err);
    }

    #[test]
    fn booleans() {
        let fns = FunctionEnv::empty();
        let s = st(&[("price_ok", Bool(false)), ("continue", Bool(true))]);
        // !price_ok and continue
        let e = Expr::Bin(
            BinOp::And,
            Box::new(Expr::Un(UnOp::Not, Box::new(Expr::Var("price_ok".into())))),
            Box::new(Expr::Var("continue".into())),
        );
        assert_eq!(eval_expr(&e, &s, &fns), Bool(true));
        let bad = Expr::Un(UnOp::Not, Box::new(lit(Int(3))));
        assert_eq!(eval_expr(&bad, &s, &fns), Err);
    }

    #[test]
    fn comparisons() {
        let fns = FunctionEnv::empty();
        let s = RoleState::new();
        let eq = Expr::Bin(BinOp::Eq, Box::new(lit(Str("a".into()))), Box::new(lit(Str("a".into()))));
        assert_eq!(eval_expr(&eq, &s, &fns), Bool(true));
        let mixed = Expr::Bin(BinOp::Eq, Box::new(lit(Int(1))), Box::new(lit(Bool(true))));
        assert_eq!(eval_expr(&mixed, &s, &fns), Err);
        let lt = Expr::Bin(BinOp::Lt, Box::new(lit(Int(2))), Box::new(lit(Int(5))));
        assert_eq!(eval_expr(&lt, &s, &fns), Bool(true));
    }

    #[test]
    fn function_rules_in_order() {
        let fns = FunctionEnv {
            rules: vec![
                FnRule {
                    name: "getPrice".into(),
                    params: vec![Pat::Val(Str("widget".into()))],
                    result: Int(250),
                },
                FnRule { name: "getPrice".into(), params: vec![Pat::Any], result: Int(100) },
            ],
        };
        assert_eq!(fns.apply("getPrice", &[Str("widget".into())]), Int(250));
        assert_eq!(fns.apply("getPrice", &[Str("gadget".into())]), Int(100));
        assert_eq!(fns.apply("getPrice", &[Err]), Int(100));
        assert_eq!(fns.apply("getPrice", &[]), Err);
        assert_eq!(fns.apply("unknown", &[Int(1)]), Err);
    }

    #[test]
    fn call_evaluates_args() {
        let fns = FunctionEnv {
            rules: vec![FnRule { name: "f".into(), params: vec![Pat::Val(Int(3))], result: Bool(true) }],
        };
        let s = st(&[("x", Int(1))]);
        let call = Expr::Call(
            "f".into(),
            vec![Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Var("x".into())),
                Box::new(lit(Int(2))),
            )],
        );
        assert_eq!(eval_expr(&call, &s, &fns), Bool(true));
    }
}
