//! Keeps the book honest: every chapter is attached as module documentation,
//! so `cargo test --doc -p book-tests` compiles and runs each of its Rust
//! code blocks against the current library. A book edit that breaks an API
//! fails the build instead of shipping stale snippets.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/bound.md")]
pub mod bound {}

#[doc = include_str!("../../../book/src/special-functions.md")]
pub mod special_functions {}

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}
