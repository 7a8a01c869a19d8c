//! Library surface of the mrionet CLI: run configuration, the content-hash
//! cache, stage reports, and the stage implementations. The binary in
//! `main.rs` is a thin argument-parsing wrapper, so integration tests can
//! drive the same code paths directly.

pub mod cache;
pub mod commands;
pub mod config;
pub mod report;
