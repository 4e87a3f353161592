//! Doc-test harness for the guide in `book/`.
//!
//! `mdbook test` cannot resolve external crates, so each chapter is
//! included here as module documentation: `cargo test --doc -p
//! polykin-book` compiles and runs every fenced code block against the
//! real `polykin`, keeping the book and the library in sync. One module
//! per chapter so a failure names its chapter.
//!
//! The chapters are mdbook markdown, so rustdoc's intra-doc-link lint
//! misfires on their bracket notation; doc output of this crate is not
//! the point.
#![allow(rustdoc::broken_intra_doc_links)]

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/phase-space.md")]
pub mod phase_space {}

#[doc = include_str!("../../../book/src/collisions.md")]
pub mod collisions {}

#[doc = include_str!("../../../book/src/integration.md")]
pub mod integration {}

#[doc = include_str!("../../../book/src/functionals.md")]
pub mod functionals {}

#[doc = include_str!("../../../book/src/linearized.md")]
pub mod linearized {}

#[doc = include_str!("../../../book/src/nonlinear.md")]
pub mod nonlinear {}

#[doc = include_str!("../../../book/src/dsmc.md")]
pub mod dsmc {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
