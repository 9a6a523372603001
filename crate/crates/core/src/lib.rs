#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod connectivity;
pub mod error;
pub mod euler;
pub mod exec;
pub mod geometry;
pub mod harness;
pub mod hybrid;
pub mod lagrange;
pub mod mesh;
pub mod pkd;
pub mod quadrature;
pub mod reference;
pub mod solver;
pub mod sparse;
pub mod tensor;
pub mod time;
