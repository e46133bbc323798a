//! Compiles and runs every listing in the guide under `book/` as a
//! doc-test, one module per chapter so failures point at their chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/oscillators.md")]
pub mod oscillators {}
#[doc = include_str!("../../../book/src/describing-functions.md")]
pub mod describing_functions {}
#[doc = include_str!("../../../book/src/surrogate.md")]
pub mod surrogate {}
#[doc = include_str!("../../../book/src/learning.md")]
pub mod learning {}
#[doc = include_str!("../../../book/src/tuning.md")]
pub mod tuning {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
