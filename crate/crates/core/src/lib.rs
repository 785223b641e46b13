#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod formula;
pub mod rational;
pub mod syntax;
pub mod constraints;
pub mod model;
pub mod semantics;
pub mod principles;
pub mod causality;
pub mod modelgen;
