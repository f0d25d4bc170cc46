//! Certified capacity brackets for finite-length binary deletion channels,
//! and the bound calculus that turns them into statements about the
//! deletion channel capacity `C(d)` and its behaviour as `d -> 1`.

pub mod bitseq;
pub mod bounds;
mod error;
pub mod exec;
pub mod kernel;
pub mod numeric;
pub mod solver;

pub use crate::bitseq::{canonical_class, subseq_count, subsequence_spectrum, BitString};
pub use crate::error::{Error, Result};
pub use crate::exec::Exec;
pub use crate::kernel::{build_exact_kernel, build_iid_kernel, length_law, ChannelKernel, ChannelModel, OutputAlphabet};
pub use crate::solver::{capacity_bracket, capacity_cn, capacity_cnk, CapacityBracket, SolveOptions, Symmetry};
