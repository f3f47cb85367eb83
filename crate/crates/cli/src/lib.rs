//! Library surface of the CLI: problem-file parsing, command drivers and
//! report/CSV plumbing, reused by the binary and its integration tests.

pub mod commands;
pub mod problem;
pub mod report;
pub mod svg;
