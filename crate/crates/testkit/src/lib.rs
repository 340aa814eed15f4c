//! Random instance generators and cross-checking suites shared by the
//! integration tests and the acceptance gate.

pub mod gen;
pub mod laws;
pub mod suites;
