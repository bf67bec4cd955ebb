//! Satisfiability of unilateral linear tree constraints.

pub mod driver;
pub mod ext;
pub mod interval;
pub mod model;
pub mod normal;
pub mod parse;
pub mod lp;
pub mod reach;
pub mod unfold;
pub mod words;
