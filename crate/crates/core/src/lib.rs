//! Reversible session calculus with monitors.

pub mod congruence;
pub mod properties;
pub mod semantics;
pub mod store;
pub mod surface;
pub mod syntax;
mod wellformed;

pub use congruence::{canonicalize, decompose, equiv, CanonicalForm};
pub use store::Store;
pub use surface::{load_config, parse_config, print};
pub use syntax::{Configuration, Ident, Monitor, Process, Runner, SessionType, Sort, Value};
