//! Runs the guide's code listings as doc-tests; one module per chapter so
//! failures point at their source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/volterra.md")]
pub mod volterra {}

#[doc = include_str!("../../../book/src/q-gradient.md")]
pub mod q_gradient {}

#[doc = include_str!("../../../book/src/theory.md")]
pub mod theory {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
