//! A laboratory for search-based software testing.
//!
//! Benchmark programs of controlled size are evolved with grammatical
//! evolution ([`ge_gen`]) in a small integer language ([`sut_lang`]), run by
//! a coverage-instrumenting interpreter ([`exec_cov`]), and tested by a
//! genetic algorithm and a random-testing baseline ([`search`]). The
//! [`harness`] crosses technique, complexity level and coverage criterion in
//! a factorial experiment and summarizes each cell with a Welch t-test
//! ([`stats`]).

pub mod exec_cov;
pub mod ge_gen;
pub mod harness;
pub mod search;
pub mod stats;
pub mod sut_lang;
