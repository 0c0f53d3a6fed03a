pub mod contact;
pub mod estimators;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod rng;
pub mod structure;
