//! Basic thread algebra, Maurer machines and strict load/store instruction
//! set architectures, with witness synthesis for data-memory transformations
//! and exact counting bounds.

pub mod apply;
pub mod counting;
pub mod dsl;
pub mod machine;
pub mod sls;
pub mod thread;
pub mod tpfc;

pub use apply::{apply, trace, ApplyError, ApplyResult, Trace, TraceEnd, TraceStep};
pub use dsl::{parse_threads, print_threads, ParseError};
pub use machine::{
    Domain, Interpretation, MachineState, MaurerMachine, MemoryElementId, MemoryLayout, Operation, Region,
};
pub use thread::{ActionId, Node, RecSpec, ThreadGraph, ThreadTerm};
