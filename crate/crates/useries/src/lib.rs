//! Schedule-driven construction of universal power series.
//!
//! Given a finite schedule of jobs, each demanding that a partial sum of one
//! formal power series approximate a target function on a product compact in
//! ℂᵈ (optionally with polynomial parameter dependence in ℂʳ), this crate
//! builds one coefficient sequence satisfying every job, together with
//! certified sup-norm errors measured on independent boundary grids.
//!
//! The pieces:
//! - [`enumeration`]: bijections k ↦ N_k between ℕ and ℕᵈ, and infinite index
//!   sets from which checkpoint indices λ are drawn.
//! - [`compacta`]: planar compacta (discs, segments, filled polygons) with
//!   connected complement, their products, and boundary sampling.
//! - [`series`]: coefficient sequences, polynomials in (w, z), and partial-sum
//!   evaluation on grids.
//! - [`transforms`]: lower-triangular sequence transforms (identity, Cesàro,
//!   custom rows) with an exact solve for the newest coefficient.
//! - [`approx`]: adaptive least-squares polynomial fitting on product boundary
//!   grids with independent-grid certification.
//! - [`constructor`]: the extension step that satisfies one job by appending
//!   coefficients beyond the frozen prefix, and the fold over a job schedule.
//! - [`config`], [`report`], [`runner`]: the batch front door (JSON config in,
//!   JSON report out, independent re-verification).

pub mod approx;
pub mod compacta;
pub mod config;
pub mod constructor;
pub mod enumeration;
pub mod report;
pub mod runner;
pub mod series;
pub mod transforms;

pub use num_complex::Complex64;
