// `!(x > 0.0)` is deliberate: it rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod evalkit;
pub mod expansion;
pub mod kg;
pub mod llm;
pub mod retrieval;
pub mod text;
