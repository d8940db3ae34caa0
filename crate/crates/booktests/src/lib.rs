//! Book snippets, compiled and run as doctests.
//!
//! One module per chapter, so a failing doctest names its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/numerics.md")]
pub mod numerics {}
#[doc = include_str!("../../../book/src/sphere.md")]
pub mod sphere {}
#[doc = include_str!("../../../book/src/measures.md")]
pub mod measures {}
#[doc = include_str!("../../../book/src/rational-maps.md")]
pub mod rational_maps {}
#[doc = include_str!("../../../book/src/pressure.md")]
pub mod pressure {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/tiles.md")]
pub mod tiles {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
