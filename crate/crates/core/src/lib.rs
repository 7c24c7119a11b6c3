//! Ridge-kernel averaging: atoms, measure-averaged positive definite kernels,
//! conic kernel synthesis, and random-kernel networks whose activations may
//! be indefinite pathwise but are positive definite in mean.
//!
//! The crate is organized around the pipeline
//! `base kernel -> ridge atoms -> parameter measure -> averaged kernel ->
//! random network`, with deterministic quadrature oracles next to every
//! Monte Carlo path and a seed-derivation contract that makes all randomness
//! reproducible and schedule-independent.

// Validation uses `!(x > 0.0)` so NaN fails closed; the suggested
// rewrite would accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeff;
pub mod cover;
pub mod error;
pub mod gram;
pub mod kernel;
pub mod lifted;
pub mod measure;
pub mod network;
pub mod quad;
pub mod random;
pub mod rkhs;
pub mod seed;
pub mod synthesis;

pub use coeff::{l2_distance_quadrature, CoefficientFn, CoordBox};
pub use cover::{
    greedy_eps_net, greedy_packing_lower_bound, tensor_grid, volumetric_covering_bound, EpsNet,
};
pub use error::{CoreError, Result};
pub use gram::{assemble_gram, min_symmetric_eigenvalue, psd_check, GramMatrix, PsdReport};
pub use kernel::{ridge_atom, BaseKernel, RidgeParam, ScaledKernel};
pub use lifted::{
    lifted_gram_quadrature, lifted_kernel_mc, lifted_kernel_mc_with_se, lifted_kernel_quadrature,
    lifted_kernel_quadrature_with_error,
};
pub use measure::{ParamMeasure, WeightedAtom};
pub use network::{
    build_network, evaluate_f_c, evaluate_f_c_grid, FcEval, FeatureMatrix, NetworkModel, Neuron,
    Provenance, TrainReport, MODEL_FORMAT_VERSION,
};
pub use random::{
    empirical_mean_gram, mean_kernel_check, pathwise_indefiniteness_probe, probe_on_points,
    spread_probe_points, IndefinitenessProbe, KernelState, MeanKernelCheck, RandomKernel,
};
pub use rkhs::{rkhs_norm_atomic, rkhs_norm_upper_bound, RkhsNorm};
pub use seed::{derive_child_seed, rng_from_seed, CoreRng, SeedSequence};
pub use synthesis::{
    atom_columns, conic_from_measure, nnls_fit, synthesis_gap_report, ConicKernel, NnlsFit,
    NnlsOptions, SynthesisReport, SynthesisRow, TargetKernel,
};
