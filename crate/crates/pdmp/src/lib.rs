//! Event-driven simulation of piecewise-deterministic Markov process (PDMP)
//! samplers on piecewise-smooth target densities.
//!
//! The crate simulates three continuous-time, non-reversible samplers — the
//! Bouncy Particle Sampler, the Zig-Zag Process and the Coordinate Sampler —
//! on densities that are smooth inside each region of a finite partition of
//! `R^d` but may jump across flat facets separating the regions. When a
//! trajectory reaches such a facet the velocity is redrawn by a *boundary
//! kernel*; the [`kernels`] module implements the full-flip kernel, a
//! Metropolis–Hastings kernel, and the limiting kernels that arise from
//! smoothing the jump and letting the smoothing width go to zero.
//!
//! Every boundary kernel must leave a specific velocity density invariant
//! (the flux-weighted density of [`kernels::flux_density`]); the [`oracle`]
//! module provides exact and Monte-Carlo machinery for checking that
//! condition, along with closed-form moment references used by the test
//! suites.
//!
//! The guide under `book/` walks through the concepts with runnable
//! examples; its code snippets are compiled as doc-tests of this crate.

pub mod kernels;
mod linalg;
pub mod oracle;
pub mod sampler;
pub mod target;
pub mod velocity;

#[cfg(doctest)]
mod book;

pub use kernels::BoundaryKernel;
pub use sampler::{SamplerKind, SimRng, State, TrajectorySkeleton};
pub use target::{BoundaryPoint, Facet, PiecewiseTarget, Region, RegionId};
pub use velocity::{Basis, VelocitySpace};
