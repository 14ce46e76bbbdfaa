//! Revision of abstract dialogue plans under global constraints.
//!
//! A plan is parsed from the RRL-subset format ([`rrl`]), expanded into the
//! set of every plan reachable by aggregation and clarification insertion
//! ([`revision`], [`search`]), scored against the TURN and EMPH constraints
//! and arbitrated ([`arbitration`]), and finally rendered as a transcript
//! ([`realizer`]).

pub mod arbitration;
pub mod cli;
pub mod plan;
pub mod realizer;
pub mod revision;
pub mod rrl;
pub mod search;
