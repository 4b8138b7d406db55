//! Commit policies and the STATIC-RW tuner.

mod policy;
mod tune;

pub use policy::{Agent, AgentContext, AgentKind, Policy};
pub use tune::{grid_json, grid_tsv, parse_range, select_best, tune_static_rw, GridPoint, TuneResult};
