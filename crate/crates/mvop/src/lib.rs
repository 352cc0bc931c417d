#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asym;
pub mod exact;
pub mod harness;
pub mod matcore;
pub mod quadrature;
pub mod specfun;
pub mod szego;
pub mod weights;
