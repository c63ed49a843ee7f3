//! Command-line front end for the `finitetype` library.
//!
//! The binary exposes subcommands for diagram construction, loop-class
//! reports, dimension bounds, single-point local dimensions, convolution
//! comparison tables and Pisot certification.  This library half holds the
//! pipeline so integration tests can drive it directly:
//!
//! * [`doc`] — the machine-readable result document (stable JSON schema);
//! * [`pipeline`] — library calls in, documents out;
//! * [`render`] — deterministic text report rendering;
//! * [`cache`] — content-addressed result cache;
//! * [`artifacts`] — the full artifact bundle and its on-disk layout.

pub mod artifacts;
pub mod cache;
pub mod doc;
pub mod pipeline;
pub mod render;
