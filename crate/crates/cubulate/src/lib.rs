//! Computational toolkit for staggered 2-complexes whose vertex spaces are
//! wedges of circles or tori.
//!
//! The pipeline: parse a [`presentation`], decide the word problem with the
//! Dehn algorithm ([`word_problem`]) cross-checked against a bounded
//! enumeration ([`enumerate`]), materialize a [`ball`] of the coned
//! universal cover, trace its [`walls`], build [`horoball`]s, run the
//! [`dual_cube`] construction, and audit van Kampen [`diagrams`].

pub mod ball;
pub mod corpus;
pub mod diagrams;
pub mod dual_cube;
pub mod enumerate;
pub mod fit;
pub mod horoball;
pub mod par;
pub mod presentation;
pub mod walls;
pub mod word;
pub mod word_problem;

pub use presentation::{parse_presentation, StaggeredComplex};
pub use word::{Letter, Path};
