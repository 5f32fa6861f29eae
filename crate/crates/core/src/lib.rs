//! Bi-Lipschitz embeddings of locally finite metric spaces into a sup-sum
//! of finite-dimensional `l∞` blocks, with exact distortion measurement and
//! inequality-level certification of the construction.
//!
//! The pipeline is: build or load a [`MetricSpace`], rescale it so the
//! basepoint is isolated, pick block operators, [`embed`], then measure with
//! [`distortion`] and certify with [`certify_cases`].

pub mod analysis;
pub mod block;
pub mod error;
pub mod frechet;
pub mod generate;
pub mod glue;
pub mod io;
pub mod metric;
pub mod scalar;

pub use analysis::{
    certify_cases, distortion, envelope_check, moduli, CaseLedger, Check, DistortionReport, EnvelopeReport, InverseCase,
    LipCase, ModuliProfile, PairEntry, PairTable,
};
pub use block::{make_operators, BlockOperator, BlockVector, OperatorMode};
pub use error::{Error, Result};
pub use frechet::{kuratowski, phi, CoordVector, KuratowskiMap};
pub use generate::{generate, Family, Generated};
pub use glue::{assign_shells, boundary_consistency_check, embed, embed_space, Embedding, Shell, ShellAssignment};
pub use metric::{amalgamate, from_graph, geometry_profile, AmalgamSpace, GeometryProfile, Graph, MetricSpace};
pub use scalar::{Arith, Exact, Scalar};
