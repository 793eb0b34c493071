//! Complete sets of `d + 1` mutually unbiased measurements in any finite
//! dimension `d`.
//!
//! The crate builds the measurements from an orthonormal basis of traceless
//! Hermitian operators (the generalized Gell-Mann basis by default), checks
//! their defining trace identities, reconstructs states from their
//! statistics by linear inversion, and evaluates entropic uncertainty
//! quantities.
//!
//! ```
//! use mum_core::{basis, mum};
//!
//! let grid = basis::gellmann_grid(3).unwrap();
//! let f = mum::build_f_operators(&grid).unwrap();
//! let t = mum::t_opt(&f).unwrap();
//! let set = mum::build_mum_from_f(&f, t).unwrap();
//! assert!((set.kappa() - 5.0 / 9.0).abs() < 1e-12);
//! assert!(mum::verify_mum(&set, 1e-10).passed);
//! ```

pub mod basis;
pub mod document;
pub mod eigen;
pub mod error;
pub mod mum;
pub mod operator;
pub mod random;
pub mod tomography;
pub mod uncertainty;

pub use basis::{arrange_grid, gellmann_basis, gellmann_grid, GridMapping, OperatorGrid};
pub use eigen::{hermitian_eigensystem, EigenSystem};
pub use error::{MumError, Result};
pub use mum::{build_f_operators, build_mum, verify_mum, FOperatorSet, MumSet};
pub use operator::{hs_inner, is_psd, ComplexMatrix, DensityMatrix, HermitianOperator};
pub use random::random_state;
