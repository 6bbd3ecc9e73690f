//! Config-driven experiment runner: TOML configs and builtin presets in,
//! columnar text files and a checksummed JSON manifest out.

// negated float comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
