//! Spectral toolkit for randomized initial data in the periodic cubic
//! Schrödinger equation `i u_t + Δu = ±|u|²u` on boxes approximating `ℝ^d`,
//! `d ∈ 1..=4`.
//!
//! The crate provides, as a library:
//!
//! * a power-of-two spectral grid with an exact unitary propagator
//!   ([`evolve::linear_propagate`]) and a Strang split-step nonlinear solver
//!   ([`evolve::evolve_nls`], [`evolve::evolve_perturbed`]);
//! * unit-cube Wiener window decompositions with exact partition of unity and
//!   a dyadic Littlewood–Paley ladder ([`window::WindowLadder`]);
//! * Lebesgue / Sobolev / modulation / Besov norms and space-time norms of
//!   sampled trajectories ([`norms`]);
//! * reproducible counter-based unit-cube randomization of initial data
//!   ([`random`]);
//! * p-variation norms of step functions, atomic-decomposition upper bounds,
//!   and a discrete dyadic `Y^s` surrogate ([`pvar`]);
//! * Monte Carlo tail estimation with sub-Gaussian fits, Strichartz-constant
//!   and bilinear-refinement scans, and a dilated-randomization pipeline
//!   ([`experiments`]);
//! * a deterministic file-based run harness used by the `randnls` binary
//!   ([`harness`]).
//!
//! Every randomized quantity is keyed by `(seed, lattice point, sample
//! index)` so results are bit-identical for any worker count.
//!
//! The `examples/` directory exercises each capability end to end; start
//! with `cargo run --example partition_of_unity`.

// Validators use `!(x > 0.0)` so that NaN fails the check along with
// out-of-range values; the un-negated forms would accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod harness;
pub mod norms;
pub mod pvar;
pub mod random;
pub mod window;

pub use error::{Error, Result};
pub use evolve::{EvolveParams, Nonlinearity, Trajectory};
pub use field::{Field, Representation};
pub use grid::Grid;
pub use random::{Distribution, RandomizationSpec};
pub use window::{WindowKind, WindowLadder};
