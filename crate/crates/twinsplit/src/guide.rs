//! The user guide, compiled as doc-tests.
//!
//! Each module below embeds one chapter of the mdbook under `book/`.
//! Rendering the book and testing the crate exercise the same
//! markdown, so the snippets in the guide cannot rot.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/algorithm.md")]
pub mod algorithm {}

#[doc = include_str!("../../../book/src/surface.md")]
pub mod surface {}

#[doc = include_str!("../../../book/src/power.md")]
pub mod power {}

#[doc = include_str!("../../../book/src/twin.md")]
pub mod twin {}

#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}

#[doc = include_str!("../../../book/src/config.md")]
pub mod config {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
