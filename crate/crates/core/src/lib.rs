//! Tensor-network toolkit built on dense row-major tensors.
//!
//! - [`tensor`] and [`network`]: dense tensors, grouping/splitting, pairwise and network contraction.
//! - [`svd`], [`tt`], [`mpo`]: truncated SVD, tensor trains and tensor-train operators.
//! - [`layer`]: matrix and dense-layer compression into operator trains.
//! - [`kernel`]: product feature maps applied through operator trains without densifying.
//! - [`optimize`]: imaginary-time-evolution solver for nearest-neighbor discrete problems.

pub mod error;
pub mod kernel;
pub mod layer;
pub mod mpo;
pub mod network;
pub mod optimize;
pub mod svd;
pub mod tensor;
pub mod tt;

pub use error::{Error, Result};
pub use kernel::{
    apply_mpo_to_product, apply_mpo_to_product_capped, product_feature_map, KernelApplication,
    ProductState, SiteKernel,
};
pub use layer::{
    apply_compressed_layer, compress_dataset, compress_layer, matrix_to_mpo, matrix_to_mpo_detailed,
    mpo_to_matrix, vector_to_mps, vector_to_mps_detailed, CompressedLayer, CompressionReport,
    ShapePlan,
};
pub use mpo::{apply_mpo, TensorTrainOperator};
pub use network::{contract_network, ContractionNetwork, Leg};
pub use svd::{truncated_svd, Svd, TruncationMode, TruncationPolicy};
pub use tensor::{contract_pair, DenseTensor, GroupingPlan};
pub use tt::{
    param_count_mpo, param_count_mps, tt_inner, tt_norm, tt_round, tt_svd, tt_svd_detailed,
    tt_to_dense, Decomposition, TensorTrain, DEFAULT_DENSE_CAP,
};
