//! Test-only support: random module and trace generators plus a rule-replay
//! oracle that re-derives ledger states without touching the analyzer's
//! engine. Dev-dependency of the workspace's test suites; not shipped.

pub mod module_gen;
pub mod replay;
pub mod traces;

pub use module_gen::gen_module;
pub use replay::{replay_trace, ReplayOutcome};
pub use traces::{
    gen_any_trace, gen_cloning_trace, gen_safe_trace, gen_use_after_release_trace, render_trace,
    TraceOp,
};
