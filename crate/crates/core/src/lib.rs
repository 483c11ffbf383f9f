//! Relational programming toolkit: a miniKanren core with complete search,
//! normalization to superhomogeneous form, mode and determinism analysis, and
//! conversion of relations into directed functional procedures.

pub mod bench;
pub mod cli;
pub mod convert;
pub mod corpus;
pub mod goal;
pub mod interp;
pub mod modes;
pub mod normal;
pub mod parse;
pub mod schema;
pub mod stream;
