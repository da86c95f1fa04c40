//! Seeded random choreography generation for property tests.
//!
//! Programs are drawn from weighted constructs bounded by a depth budget,
//! then optionally repaired into connectedness and finally annotated with
//! fresh indexes. Generation is a pure function of the seed.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::anno::annotate;
use crate::ast::{BinOp, DiocProc, Expr, Index, Role, Value};
use crate::connect::{pairsets_all_intersect, trans_f, trans_i, FrontierSet};

#[derive(Clone, Debug)]
pub struct Weights {
    pub interaction: u32,
    pub assign: u32,
    pub seq: u32,
    pub par: u32,
    pub cond: u32,
    pub while_loop: u32,
    pub scope: u32,
    pub skip: u32,
}

impl Default for Weights {
    fn default() -> Weights {
        Weights {
            interaction: 6,
            assign: 3,
            seq: 6,
            par: 2,
            cond: 2,
            while_loop: 1,
            scope: 2,
            skip: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Nesting budget; composite constructs spend one unit.
    pub max_depth: usize,
    /// Number of roles drawn from the fixed pool `A, B, C, ...`.
    pub roles: usize,
    /// Integer literals are drawn from `0..int_domain`.
    pub int_domain: i64,
    /// Variables are drawn from a pool of this size.
    pub var_domain: usize,
    pub weights: Weights,
    /// Insert bridging actions at disconnected sequence boundaries.
    pub repair: bool,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            max_depth: 5,
            roles: 3,
            int_domain: 10,
            var_domain: 4,
            weights: Weights::default(),
            repair: true,
        }
    }
}

const ROLE_POOL: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
const VAR_POOL: [&str; 6] = ["x", "y", "z", "w", "u", "v"];

struct Gen<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    /// Distinct operation names across the whole program keep the projection
    /// and event machinery honest about which communications pair up.
    next_op: u64,
}

/// Generate one choreography. With repair enabled (and any depth) the result
/// is connected; it is always well annotated.
pub fn gen_dioc(cfg: &GenConfig, seed: u64) -> DiocProc {
    let mut g = Gen { cfg, rng: ChaCha8Rng::seed_from_u64(seed), next_op: 0 };
    let body = g.term(cfg.max_depth);
    let body = if cfg.repair { repair(body, &mut g) } else { body };
    annotate(&body)
}

impl Gen<'_> {
    fn below(&mut self, n: u64) -> u64 {
        self.rng.next_u64() % n.max(1)
    }

    fn role(&mut self) -> Role {
        let i = self.below(self.cfg.roles.min(ROLE_POOL.len()) as u64) as usize;
        Role::new(ROLE_POOL[i])
    }

    fn other_role(&mut self, not: &Role) -> Role {
        if self.cfg.roles < 2 {
            return not.clone();
        }
        loop {
            let r = self.role();
            if &r != not {
                return r;
            }
        }
    }

    fn var(&mut self) -> String {
        let i = self.below(self.cfg.var_domain.min(VAR_POOL.len()) as u64) as usize;
        VAR_POOL[i].to_string()
    }

    fn op(&mut self) -> String {
        self.next_op += 1;
        format!("o{}", self.next_op)
    }

    fn value(&mut self) -> Value {
        match self.below(4) {
            0 => Value::Bool(self.below(2) == 0),
            1 => Value::Str(format!("s{}", self.below(3))),
            _ => Value::Int(self.below(self.cfg.int_domain.max(1) as u64) as i64),
        }
    }

    fn expr(&mut self) -> Expr {
        match self.below(5) {
            0 => Expr::Var(self.var()),
            1 => Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Lit(self.value())),
                Box::new(Expr::Lit(self.value())),
            ),
            _ => Expr::Lit(self.value()),
        }
    }

    fn interaction(&mut self) -> DiocProc {
        let sender = self.role();
        let receiver = self.other_role(&sender);
        DiocProc::Interaction {
            idx: Index(0),
            op: self.op(),
            sender,
            expr: self.expr(),
            receiver,
            var: self.var(),
        }
    }

    fn assign(&mut self) -> DiocProc {
        DiocProc::Assign {
            idx: Index(0),
            role: self.role(),
            var: self.var(),
            expr: self.expr(),
        }
    }

    fn term(&mut self, depth: usize) -> DiocProc {
        let w = self.cfg.weights.clone();
        let composite = if depth == 0 {
            0
        } else {
            w.seq + w.par + w.cond + w.while_loop + w.scope
        };
        let total = w.interaction + w.assign + w.skip + composite;
        let mut pick = self.below(total as u64) as u32;
        let mut take = |weight: u32| {
            if pick < weight {
                true
            } else {
                pick -= weight;
                false
            }
        };
        if take(w.interaction) {
            return self.interaction();
        }
        if take(w.assign) {
            return self.assign();
        }
        if take(w.skip) {
            return DiocProc::Skip;
        }
        if take(w.seq) {
            return DiocProc::seq(self.term(depth - 1), self.term(depth - 1));
        }
        if take(w.par) {
            return DiocProc::par(self.term(depth - 1), self.term(depth - 1));
        }
        if take(w.cond) {
            let role = self.role();
            let else_br =
                if self.below(2) == 0 { DiocProc::Skip } else { self.term(depth - 1) };
            return DiocProc::If {
                idx: Index(0),
                role,
                cond: Expr::Var(self.var()),
                then_br: Box::new(self.term(depth - 1)),
                else_br: Box::new(else_br),
            };
        }
        if take(w.while_loop) {
            // Guarded loops are generated pre-seeded and self-terminating:
            // the guard is set before the loop and cleared at the end of the
            // body, so every run unfolds exactly once.
            let role = self.role();
            let guard = format!("g{}", self.below(3));
            let body = self.term(depth - 1);
            let set = DiocProc::Assign {
                idx: Index(0),
                role: role.clone(),
                var: guard.clone(),
                expr: Expr::Lit(Value::Bool(true)),
            };
            let clear = DiocProc::Assign {
                idx: Index(0),
                role: role.clone(),
                var: guard.clone(),
                expr: Expr::Lit(Value::Bool(false)),
            };
            let w = DiocProc::While {
                idx: Index(0),
                role,
                cond: Expr::Var(guard),
                body: Box::new(DiocProc::seq(body, clear)),
            };
            return DiocProc::seq(set, w);
        }
        // Scope.
        let role = self.role();
        DiocProc::Scope {
            idx: Index(0),
            role,
            body: Box::new(self.term(depth - 1)),
            props: Default::default(),
        }
    }
}

/// Roles present in every pair of the frontier set.
fn common_roles(fs: &FrontierSet) -> Vec<Role> {
    let mut out: Vec<Role> = Vec::new();
    let Some(first) = fs.pairs().first() else { return out };
    let (a, b) = first.sides();
    for r in [a.clone(), b.clone()] {
        if fs.pairs().iter().all(|p| p.contains(&r)) && !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

/// All roles mentioned in the frontier set, sorted.
fn frontier_roles(fs: &FrontierSet) -> Vec<Role> {
    let mut out: Vec<Role> = Vec::new();
    for p in fs.pairs() {
        let (a, b) = p.sides();
        for r in [a, b] {
            if !out.contains(r) {
                out.push(r.clone());
            }
        }
    }
    out.sort();
    out
}

fn covers(fs: &FrontierSet, team: &[&Role]) -> bool {
    fs.pairs().iter().all(|p| team.iter().any(|r| p.contains(r)))
}

/// Make every sequence boundary satisfy the connectedness condition by
/// inserting bridging actions, bottom-up. A single located assignment
/// bridges when one role covers both frontiers; otherwise an interaction
/// between two covering roles does; if no two roles cover (three mutually
/// disjoint located frontiers on a side), the composition degrades to a
/// parallel one, which the sequence condition does not constrain.
fn repair(p: DiocProc, g: &mut Gen<'_>) -> DiocProc {
    match p {
        DiocProc::Seq(a, b) => {
            let a = repair(*a, g);
            let b = repair(*b, g);
            let fa = trans_f(&a);
            let ib = trans_i(&b);
            if pairsets_all_intersect(&fa, &ib) {
                return DiocProc::seq(a, b);
            }
            for r in common_roles(&fa) {
                if ib.pairs().iter().all(|p| p.contains(&r)) {
                    let bridge = DiocProc::Assign {
                        idx: Index(0),
                        role: r,
                        var: "t".into(),
                        expr: Expr::Lit(Value::Int(0)),
                    };
                    return DiocProc::seq(a, DiocProc::seq(bridge, b));
                }
            }
            let candidates = {
                let mut v = frontier_roles(&fa);
                for r in frontier_roles(&ib) {
                    if !v.contains(&r) {
                        v.push(r);
                    }
                }
                v.sort();
                v
            };
            for s in &candidates {
                for t in &candidates {
                    if s < t && covers(&fa, &[s, t]) && covers(&ib, &[s, t]) {
                        let bridge = DiocProc::Interaction {
                            idx: Index(0),
                            op: g.op(),
                            sender: s.clone(),
                            expr: Expr::Lit(Value::Int(0)),
                            receiver: t.clone(),
                            var: "t".into(),
                        };
                        return DiocProc::seq(a, DiocProc::seq(bridge, b));
                    }
                }
            }
            DiocProc::par(a, b)
        }
        DiocProc::Par(a, b) => DiocProc::par(repair(*a, g), repair(*b, g)),
        DiocProc::If { idx, role, cond, then_br, else_br } => DiocProc::If {
            idx,
            role,
            cond,
            then_br: Box::new(repair(*then_br, g)),
            else_br: Box::new(repair(*else_br, g)),
        },
        DiocProc::While { idx, role, cond, body } => {
            DiocProc::While { idx, role, cond, body: Box::new(repair(*body, g)) }
        }
        DiocProc::Scope { idx, role, body, props } => {
            DiocProc::Scope { idx, role, body: Box::new(repair(*body, g)), props }
        }
        leaf => leaf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anno::well_annotated;
    use crate::connect::connected;

    #[test]
    fn depth_zero_yields_a_leaf() {
        let cfg = GenConfig { max_depth: 0, ..GenConfig::default() };
        for seed in 0..50 {
            let p = gen_dioc(&cfg, seed);
            assert!(matches!(
                p,
                DiocProc::Interaction { .. } | DiocProc::Assign { .. } | DiocProc::Skip
            ));
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let cfg = GenConfig::default();
        assert_eq!(gen_dioc(&cfg, 7), gen_dioc(&cfg, 7));
        let mut distinct = 0;
        for seed in 0..20 {
            if gen_dioc(&cfg, seed) != gen_dioc(&cfg, seed + 1) {
                distinct += 1;
            }
        }
        assert!(distinct > 10);
    }

    #[test]
    fn generated_programs_are_well_annotated_and_connected() {
        let cfg = GenConfig::default();
        for seed in 0..500 {
            let p = gen_dioc(&cfg, seed);
            assert!(well_annotated(&p).is_ok(), "seed {seed}");
            if let Err(e) = connected(&p) {
                panic!("seed {seed} disconnected: {e}");
            }
        }
    }

    #[test]
    fn unrepaired_output_can_be_disconnected() {
        let cfg = GenConfig { repair: false, ..GenConfig::default() };
        let broken = (0..500).any(|seed| connected(&gen_dioc(&cfg, seed)).is_err());
        assert!(broken, "repair-off generation never produced a disconnected program");
    }

    #[test]
    fn seed_one_snapshot() {
        use crate::pretty::{pretty_dioc, PrettyMode};
        let cfg = GenConfig { max_depth: 3, roles: 2, ..GenConfig::default() };
        let p = gen_dioc(&cfg, 1);
        assert!(connected(&p).is_ok());
        let text = pretty_dioc(&p, PrettyMode::Display);
        let expect = expect_seed_one();
        assert_eq!(text, expect, "generator drifted:\n{text}");
    }

    fn expect_seed_one() -> String {
        // Pinned output of (seed 1, depth 3, 2 roles); regenerate by printing
        // `pretty_dioc(&gen_dioc(&cfg, 1), PrettyMode::Display)` after any
        // intentional generator change.
        "o1 : B(false) -> A(z)\n".to_string()
    }
}
