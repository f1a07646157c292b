//! Classical simulator of a quantum regularized least-squares (data fitting)
//! algorithm for dense Hermitian matrices.
//!
//! The crate models each stage of the quantum routine with exact linear
//! algebra: binary-tree state preparation ([`kp_tree`]), singular value
//! estimation ([`qsve`]), eigenvalue sign recovery through a spectral shift
//! ([`sign`]) and the conditional-rotation pipeline ([`pipeline`]). Every
//! output is checked against the classical ridge-regression optimum from
//! [`problem`].

pub mod analysis;
pub mod error;
pub mod io;
pub mod kp_tree;
pub mod ledger;
pub mod linalg;
pub mod pipeline;
pub mod problem;
pub mod qsve;
pub mod sign;
pub mod sweep;

pub use error::{QdfError, Result};
