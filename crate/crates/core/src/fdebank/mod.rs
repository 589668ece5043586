//! Fractionally-spaced FDE bank: branch extraction, per-branch LS channel
//! estimation and MMSE frequency-domain equalization.

mod branches;
mod dft;
mod fde;
mod ls;

pub use branches::{split_branches, BranchSet};
pub use dft::UnitaryDft;
pub use fde::{fde_equalize, EqualizedBranch, FdeFilter};
pub use ls::{data_matrix, ls_estimate, ls_estimate_with, Boundary, SymbolRateCsi};
