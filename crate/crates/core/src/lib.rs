//! Bi-level parameter learning for variational denoising.
//!
//! The lower level reconstructs a signal by minimizing
//! `‖u − u_noisy‖² + R_λ(u)` for a regularizer family `R_λ`; the upper level
//! picks `λ` from the *closed* parameter range by comparing reconstructions
//! with clean training data. At the edges of the range the family is replaced
//! by its Mosco limit, so boundary parameters correspond to structurally
//! different models (no regularization, constants only, total variation,
//! Lipschitz regularization, local gradient energy, ...).
//!
//! Module map:
//!
//! * [`grid`]: uniform cell-centred grids, signals, quadrature and seminorms.
//! * [`regularizers`]: the five regularizer families and their edge models.
//! * [`solvers`]: lower-level solvers (closed forms, exact 1D TV, Lipschitz,
//!   Polyak subgradient, multi-start gradient descent).
//! * [`spectral`]: the spectral fractional Laplacian family in closed form.
//! * [`bilevel`]: the extended upper-level functional, learning and
//!   data-condition checks.
//! * [`mosco`]: numerical diagnostics along parameter sequences.
//! * [`io`]: signal files, run configuration, reports and CLI commands.

pub mod bilevel;
pub mod error;
pub mod grid;
pub mod io;
pub mod mosco;
pub mod numerics;
pub mod regularizers;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Domain, Grid, GridSignal, TrainingSet};
pub use regularizers::{ExtendedParam, FamilySpec};
