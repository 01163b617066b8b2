#![no_std]
// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod evolution;
pub mod exec;
pub mod flow;
pub mod kernels;
pub mod kgrid;
pub mod radial;
pub mod reduced;
pub mod diagnostics;
pub mod roots;
pub mod stability;

pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use flow::{BaseFlow, FlowConfig};
pub use kernels::{KernelBuild, KernelTables, TableOptions};
pub use kgrid::KGrid;
pub use radial::{Border, BorderedSolver, RadialGrid};
