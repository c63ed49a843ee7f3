//! Exact finite-type analysis of self-similar measures on the line and on the
//! torus.
//!
//! The crate builds, in exact arithmetic over a real algebraic number field,
//! the net-interval refinement structure of an iterated function system with a
//! single contraction ratio, the associated transition matrices, and the loop
//! class decomposition of the resulting diagram.  On top of that it computes
//! certified bounds for the set of local dimensions of the measure, both on
//! the line and for the induced quotient measure on the torus, and specialised
//! closed forms for convolutions of Cantor measures.
//!
//! Modules are layered bottom-up:
//!
//! * [`numberfield`] — arithmetic in Q(ρ), Sturm sequences, Pisot
//!   certification and conjugate-based separation bounds;
//! * [`model`] — measure descriptions (maps, digits, probabilities) and the
//!   text format used to load them;
//! * [`netgen`] — net-interval subdivision, characteristic vectors, the
//!   transition diagram and its truncation-aware closure;
//! * [`spectra`] — nonnegative matrices over the rationals and certified
//!   spectral-radius brackets;
//! * [`classes`] — loop classes (strongly connected diagram components),
//!   essential/maximal classification and positivity certificates;
//! * [`dims`] — local dimension machinery: periodic points, inner and outer
//!   bounds for the dimension set, isolation verdicts;
//! * [`cantor`] — direct constructions for m-fold convolutions of scaled
//!   Cantor measures and the associated comparison tables.

pub mod cantor;
pub mod classes;
pub mod dims;
pub mod model;
pub mod netgen;
pub mod numberfield;
pub mod spectra;

pub use numberfield::{AlgebraicNumber, FieldContext};
