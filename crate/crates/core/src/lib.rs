//! Recognition of free-group automorphisms that come from self-induced
//! interval exchange transformations.
//!
//! The pipeline: detect the singularities of a positive primitive
//! automorphism from its prefix-suffix automaton, read a permutation pair
//! off the forward/backward singularity graphs, then peel elementary Dehn
//! twists off the automorphism with a combinatorial Rauzy induction. On
//! success the interval exchange (pair and Perron lengths) is returned
//! together with the twist decomposition.

pub mod automorphisms;
pub mod boundary;
pub mod cli;
pub mod decision;
pub mod error;
pub mod numeric;
pub mod prefix_suffix;
pub mod rauzy;
pub mod singularity_graphs;
pub mod words;

pub use automorphisms::{ElementaryTwist, Endomorphism, IncidenceMatrix, Placement};
pub use error::{Error, Result};
pub use words::{free_reduce, invert_word, Alphabet, Letter, ReducedWord};
