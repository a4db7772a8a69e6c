#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod formats;
pub mod ops;
pub mod pipeline;
