//! Finite-alphabet probability toolkit.

mod dist;
mod kernel;
mod bounds;
mod measures;
mod text;

pub use dist::{Alphabet, FiniteDist, MASS_TOL};
pub use kernel::Kernel;
pub use bounds::{check_pinsker_csiszar, csiszar_upper_bound, kernel_tv_gap, marginal_tv_gap, PinskerCsiszarReport};
pub use measures::{binary_entropy, entropy, joint_entropy, kl_divergence, mutual_information, total_variation};

pub(crate) use measures::{entropy_of_pmf, h2, tv_slices};
