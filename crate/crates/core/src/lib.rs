//! Legendre wavelet operational-matrix solver for the two-dimensional
//! telegraph equation on the unit square.
//!
//! The numerical core is generic over [`Real`], implemented here for `f32`,
//! `f64` and the extended-precision [`DoubleDouble`]. The benchmark systems
//! at `k = 3` are ill-conditioned enough that `f64` roundoff dominates the
//! discretization error; the harness therefore solves them in
//! double-double by default.
//!
//! ```
//! use wavelet_telegraph::{harness, telegraph, Discretization64, SolverConfig};
//!
//! let problem = harness::example::<f64>(2).unwrap();
//! let disc = Discretization64::uniform(1, 4).unwrap();
//! let report = telegraph::solve(&problem, &disc, &SolverConfig::default()).unwrap();
//! assert!(report.errors.unwrap().linf < 0.1);
//! ```

pub mod basis;
pub mod dd;
pub mod error;
pub mod expr;
pub mod harness;
pub mod krylov;
pub mod matrix;
pub mod opmat;
pub mod scalar;
pub mod telegraph;
pub mod tensor;

pub use basis::{CoeffTensor, QuadratureRule, TensorBasis, WaveletBasis};
pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use krylov::{SolverConfig, SolverError};
pub use matrix::Mat;
pub use opmat::{EmbeddingSet, OperatorSet};
pub use scalar::Real;
pub use telegraph::{Discretization, SolveReport, SylvesterSystem, TelegraphProblem};

pub type Mat64 = Mat<f64>;
pub type MatDD = Mat<DoubleDouble>;
pub type CoeffTensor64 = CoeffTensor<f64>;
pub type Discretization64 = Discretization<f64>;
pub type DiscretizationDD = Discretization<DoubleDouble>;
pub type Problem64 = TelegraphProblem<f64>;
pub type ProblemDD = TelegraphProblem<DoubleDouble>;
