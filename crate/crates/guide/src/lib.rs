//! The chapters of `book/`, included verbatim so their code blocks run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/hermitian-calculus.md")]
pub mod hermitian_calculus {}

#[doc = include_str!("../../../book/src/layer-cake.md")]
pub mod layer_cake {}

#[doc = include_str!("../../../book/src/measurements.md")]
pub mod measurements {}

#[doc = include_str!("../../../book/src/tilting.md")]
pub mod tilting {}

#[doc = include_str!("../../../book/src/information.md")]
pub mod information {}

#[doc = include_str!("../../../book/src/packing.md")]
pub mod packing {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
