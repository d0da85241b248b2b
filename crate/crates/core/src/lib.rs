//! Localized spectral similarity search.
//!
//! Points are embedded with the leading eigenvectors of the symmetrically normalized
//! Gaussian kernel `A = D^{-1/2} K D^{-1/2}`. For a reference point, the eigenvectors on
//! which it has the largest coordinates (in absolute value) are kept, and every point is
//! scored by correlating its coordinates on those eigenvectors with the reference's.
//!
//! ```
//! use locspec::linalg::DenseMatrix;
//! use locspec::pipeline::{find_similarities, SearchParams};
//! use locspec::kernel::Bandwidth;
//! use locspec::solver::SolverConfig;
//!
//! let x = DenseMatrix::from_rows(&[[0.0], [0.1], [5.0]]).unwrap();
//! let params = SearchParams {
//!     bandwidth: Bandwidth::Fixed(1.0),
//!     k: 2,
//!     solver: SolverConfig::new(3),
//!     ..Default::default()
//! };
//! let out = find_similarities(&x, 0, &params).unwrap();
//! assert_eq!(out.ranking.order, vec![1, 2]);
//! ```

pub mod baselines;
pub mod cli;
pub mod csvio;
pub mod datasets;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod pipeline;
pub mod scoring;
pub mod solver;

pub use error::{Error, Result};
