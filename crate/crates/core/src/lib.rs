pub mod ame;
pub mod analysis;
pub mod cli_io;
pub mod error;
pub mod gaugeforms;
pub mod liealg;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/conventions.md")]
    struct Conventions;
    #[doc = include_str!("../../../book/src/solver.md")]
    struct Solver;
    #[doc = include_str!("../../../book/src/gauge.md")]
    struct Gauge;
    #[doc = include_str!("../../../book/src/nullforms.md")]
    struct NullForms;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
