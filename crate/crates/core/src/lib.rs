//! Equidistribution of small-height algebraic points around the unit circle.
//!
//! The crate builds finite point sets from exact integer polynomials (or from
//! analytically known conjugate families), measures how they spread radially
//! and angularly, and evaluates the explicit inequalities that control that
//! spread in terms of the mean Weil height of the set.
//!
//! Module map:
//!
//! * [`zpoly`]: exact integer polynomials (cyclotomics, gcd, compositions).
//! * [`rootfind`]: Aberth–Ehrlich root finding with residual radii.
//! * [`heights`]: Mahler measure, mean height `m(S)`, the factor `h(S)` and
//!   the absolute Siegel bound.
//! * [`ensembles`]: weighted families of conjugate point sets.
//! * [`discrepancy`]: annulus/sector counts, radial and angular means, and the
//!   Erdős–Turán check.
//! * [`equidist`]: test-function integrals, sector partitions, cell estimates
//!   and embedding selection.
//! * [`auxpoly`]: lattice search for short integer multiples and the
//!   auxiliary-polynomial angular pipeline.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (default) and plain iterators otherwise.

pub mod auxpoly;
pub mod discrepancy;
pub mod ensembles;
pub mod equidist;
mod error;
pub mod heights;
pub mod par;
pub mod rootfind;
pub mod zpoly;

pub use error::{Error, Result};
pub use num_complex::Complex64;
