//! Numerical laboratory for self-similar measures on dyadic grids.
//!
//! The crate is organised around one measure representation, [`dyadic::TreeMeasure`]:
//! a finite-depth mass assignment on dyadic cells. Everything else builds on it:
//!
//! - [`dyadic`] — cells, tree measures, Shannon entropies, covering counts;
//! - [`exact`] — rational and quadratic-field arithmetic for exact overlap detection;
//! - [`ifs`] — weighted affine IFSs on the line, stopping words, tree-measure
//!   construction, the Δ-calculus and transversality audits;
//! - [`scan`] — parameter sweeps, branch decompositions and dip detection;
//! - [`planar`] — homothety IFSs in the plane, projections, direction scans and
//!   two-scale Assouad estimates;
//! - [`scenery`] — the magnification operator, scenery orbits, the uniform-entropy
//!   statistic and the dyadic-spreading checker;
//! - [`additive`] — exact grid-set sumsets, additive energy, tree regularization,
//!   porosity witnesses and the entropy-increase experiment.
//!
//! All entropies are in bits. Dyadic cells are half-open, `[l/2^k, (l+1)/2^k)`,
//! with boundary points assigned rightward.

#![forbid(unsafe_code)]

pub mod additive;
pub mod dyadic;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod ifs;
pub mod planar;
pub mod scan;
pub mod scenery;

pub use error::{Error, Result};
