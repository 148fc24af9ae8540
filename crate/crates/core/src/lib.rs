//! Numerical toolkit for conformal curves relative to constant-coefficient
//! calibrations.
// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowdown;
pub mod calibration;
pub mod curve;
mod error;
pub mod exterior;
pub mod growth;
pub mod linalg;
pub mod sampling;

pub use error::{Error, Result};

/// Guide chapters, compiled as doctests so the snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/exterior.md")]
    mod exterior {}
    #[doc = include_str!("../../../book/src/comass.md")]
    mod comass {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/growth.md")]
    mod growth {}
    #[doc = include_str!("../../../book/src/blowdown.md")]
    mod blowdown {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
