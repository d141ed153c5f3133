//! A desk-scale workbench for the sorted answer-set programming language
//! SPARC: parsing, include/subsort preprocessing, sort checking, grounding,
//! stable-model search, query answering, and compilation of display atoms
//! into frame-indexed drawings.

pub mod display;
pub mod ground;
pub mod pipeline;
pub mod preprocess;
pub mod query;
pub mod syntax;
pub mod solve;
pub mod sorts;
pub mod value;
