//! Numerical tensor calculus on hypersurfaces of space forms.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod hypersurface;
pub mod jet_matrix;
pub mod jets;
pub mod quadrature;
pub mod space_form;
pub mod tensor_calculus;
pub mod tensors;
pub mod theorem_lab;
pub mod verifier;

pub use error::{Error, Result};
