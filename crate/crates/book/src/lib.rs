//! Runs the guide's code blocks as doc-tests so the book cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/depth.md")]
pub mod depth {}

#[doc = include_str!("../../../book/src/rank-sum.md")]
pub mod rank_sum {}

#[doc = include_str!("../../../book/src/competitors.md")]
pub mod competitors {}

#[doc = include_str!("../../../book/src/power.md")]
pub mod power {}

#[doc = include_str!("../../../book/src/reproduction.md")]
pub mod reproduction {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
