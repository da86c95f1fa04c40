//! Workbench for dynamically updatable choreographies.
//!
//! The crate models two layers of the same protocol: a global choreography
//! (DIOC) that describes interactions from a birds-eye view, and a network of
//! per-role processes (DPOC) obtained by projection. Scopes marked in the
//! choreography are the points where code can be swapped at runtime against a
//! repository of updates, at either layer.
//!
//! The library exposes the full toolchain: parsing, annotation, connectedness
//! analysis, projection, both operational semantics, the normalization that
//! folds in-flight coordination back into a projection, event/causality
//! extraction, the well-annotatedness conditions, behavioural equivalence
//! checking, and the deadlock/race/orphan analyses built on top.

pub mod anno;
pub mod ast;
pub mod checkers;
pub mod cli;
pub mod cond;
pub mod connect;
pub mod dioc;
pub mod dpoc;
pub mod equiv;
pub mod eval;
pub mod events;
pub mod gen;
pub mod parse;
pub mod pretty;
pub mod project;
pub mod sched;
pub mod trace;
pub mod upd;

pub use anno::{annotate, body_hash, global_indexes, max_index, well_annotated};
pub use ast::{
    roles, AuxKind, DiocProc, DpocIndex, DpocProc, Expr, GlobalIndex, GlobalState, Index,
    IndexVariant, Label, Network, OperationName, PayloadDigest, Role, RoleState, UpdateEntry,
    UpdateRepo, Value,
};
pub use checkers::{check_deadlock_freedom, check_orphan_freedom, check_race_freedom, Verdict};
pub use cond::{check_minimality, check_wellannotated_dpoc, minimality_witness, Violation};
pub use connect::{connected, pairsets_all_intersect, trans_f, trans_i, FrontierSet, RolePair};
pub use dioc::{enabled_dioc, step_dioc, weak_traces_dioc, DiocStep, DiocSystem, TraceSet};
pub use dpoc::{
    role_step, scheduled_steps_dpoc, system_step, weak_traces_dpoc, DpocStep, DpocSystem,
};
pub use equiv::{equiv_check, EquivResult};
pub use eval::{eval_expr, FunctionEnv};
pub use events::{event_of_offer, events_dioc, events_net, Event, EventKind, EventSystem};
pub use gen::{gen_dioc, GenConfig};
pub use parse::{parse_dioc, parse_dpocnet, parse_fns, parse_updates, DiocProgram};
pub use pretty::{pretty_dioc, pretty_dpoc, pretty_network, PrettyMode};
pub use project::{pi, project};
pub use sched::{parse_script, scheduled_steps_dioc, Decision, Policy, Schedule};
pub use trace::{render_record, weak_records, write_trace};
pub use upd::{clean, compl, norm, upd_normalize};
