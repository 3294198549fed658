//! Compiles the guide's code snippets as doc-tests.
//!
//! Each chapter of `book/` is attached to an empty module here, so
//! `cargo test --doc` runs every fenced Rust block in the book and the
//! prose can never drift from the API.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/targets.md")]
pub mod targets {}

#[doc = include_str!("../../../book/src/samplers.md")]
pub mod samplers {}

#[doc = include_str!("../../../book/src/boundaries.md")]
pub mod boundaries {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
