//! Simulator for a tree-of-strategies priority construction on loop-bundle
//! digraphs, with a trace verifier and a coding of digraphs into symmetric
//! graphs.

pub mod actions;
pub mod adversary;
pub mod bits;
pub mod cli;
pub mod codings;
pub mod engine;
pub mod generic;
pub mod graph;
pub mod machine;
pub mod replay;
pub mod scenario;
pub mod strategy;
pub mod trace;
pub mod verifier;
