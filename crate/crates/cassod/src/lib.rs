//! Cascaded 2×2 dilated convolutions (CASSOD modules) and a functional model
//! of the dilated-convolution hardware that executes them.
//!
//! The crate has four layers:
//!
//! * [`tensor`] — dense tensors, dilated convolution kernels, the 2×2 dilated
//!   convolution, and a brute-force reference convolution used as the oracle
//!   in every equivalence test;
//! * [`cascade`] — CASSOD-A/C/D modules built from two cascaded 2×2 dilated
//!   layers, effective-kernel composition, and weight/MAC/receptive-field
//!   accounting;
//! * [`hwsim`] — the hierarchical Pixel Array simulation plus analytic cycle
//!   and gate-count models for the accelerator;
//! * [`netdesc`] — the `.cassod-net` text format for sequential networks,
//!   lowering of CASSOD layers into explicit cascades, and per-layer cost
//!   analysis.
//!
//! The `cassod` binary exposes the `report`, `run` and `sweep` subcommands on
//! top of these; `examples/` holds one runnable demo per capability.

pub mod cascade;
pub mod cli;
pub mod error;
pub mod hwsim;
pub mod netdesc;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{conv2d_ref, dilated_conv_2x2, KernelSet, Padding, Tensor};
