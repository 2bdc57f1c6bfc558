//! Rough integration and Itô formulas for paths with jumps.
//!
//! Paths are finitely presented on a grid with left limits, values and right
//! limits at every grid time ([`RegulatedPath`]). From such a path the crate
//! builds the canonical reduced rough-path lift, integrates `DF(X)` against it
//! by compensated Riemann sums along nested partitions, and checks the
//! change-of-variables identity with explicit left and right jump corrections.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiation.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ito;
pub mod lift;
pub mod path;
pub mod rrs;
pub mod scalar;
pub mod smoothfn;
pub mod stochgen;
pub mod sweep;
pub mod tensor;

pub use error::{Error, Result};
pub use ito::{
    ito_verify, ito_verify_with, jump_corrections, log_wealth, observable_chain_rule, proof_term_diagnostics,
    proof_terms_on_partition, ItoCase, ItoReport, JumpCorrection, WealthReport,
};
pub use lift::{controlled_from_function, reduced_lift, ControlledPath, ReducedRoughPath};
pub use path::{control, ControlFunction, GridPoint, Jump, PVarWitness, Partition, RegulatedPath, Side};
pub use rrs::{
    compensated_sum, default_schedule, refine_partition, rrs_integrate, sewing_defect, CompensatedSum,
    IntegrateOptions, IntegrationReport, Schedule,
};
pub use scalar::Scalar;
pub use smoothfn::{fd_check, make_exp, make_log_clamped, make_polynomial, parse_function, DomainBox, SmoothFunction};
pub use stochgen::{gen_compound_poisson, gen_fbm, gen_mixed, gen_wealth, GeneratorConfig};
pub use tensor::{pair, rank1_power, sym_project, SymForm, SymTensor, Tensor, TensorBudget, Vector};

pub type PathF64 = RegulatedPath<f64>;
pub type PathF32 = RegulatedPath<f32>;
pub type SymTensorF64 = SymTensor<f64>;
pub type SymFormF64 = SymForm<f64>;
pub type ItoReportF64 = ItoReport<f64>;
pub type IntegrationReportF64 = IntegrationReport<f64>;

/// Crate version, stamped into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
