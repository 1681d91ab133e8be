//! Collaborative kernel regression over shared public inputs.
//!
//! The library simulates a federation of parties that each hold a private
//! regression dataset and cooperate by exchanging *predictions on a common
//! set of unlabeled public inputs* instead of models or raw data. The main
//! protocol alternates local kernel gradient descent with a server-side
//! consensus step that projects the averaged predictions back onto the span
//! of the public inputs. Centralized and divide-and-conquer baselines, the
//! synthetic tasks used to benchmark them, and the feature-kernel
//! distillation math (HSIC/CKA) live alongside the protocol.
//!
//! Modules:
//!
//! - [`kernel`]: kernels, Gram matrices, kernel expansions, minimum-norm
//!   interpolation and projection onto a public span.
//! - [`solvers`]: single-machine regressors (gradient descent, ridge,
//!   Nyström ridge) that the protocols compose.
//! - [`protocol`]: multi-party orchestration and its closed-form recurrence
//!   oracle, plus the divide-and-conquer baselines.
//! - [`datagen`]: synthetic tasks, tilted public-input sampling, and the
//!   non-iid partitioner.
//! - [`distill`]: feature kernels, empirical HSIC/CKA, the CKA gradient for
//!   kernel matching, and HSIC-based learning-rate scaling.
//! - [`bench`]: seeded experiment sweeps, log-log slope fits, and spectral
//!   diagnostics.

pub mod bench;
pub mod config;
pub mod data;
pub mod datagen;
pub mod distill;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod protocol;
pub mod rng;
pub mod solvers;

pub use data::PartyDataset;
pub use error::{Error, Result};
pub use kernel::{KernelSpec, RkhsFunction};
