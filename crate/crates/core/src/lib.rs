//! Partial signatures of analytic paths of symmetric forms and Maslov-type indices.

pub mod algebraic;
pub mod error;
pub mod forms;
pub mod indices;
pub mod io;
pub mod lagrangian;
pub mod linalg;
pub mod matpoly;
pub mod matrix;
pub mod morse_sturm;
pub mod poly;
pub mod psig;
pub mod scalar;

pub use error::{Error, Result};
pub use forms::{Inertia, Subspace, SymForm};
pub use matrix::Mat;
pub use scalar::{Rational, Scalar};
