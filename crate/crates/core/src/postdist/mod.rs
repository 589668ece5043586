//! Symbol-rate nonlinear post-distortion trained on slow-time data: a GPR
//! ensemble with BLUE fusion, a single-hidden-layer network trained by
//! Levenberg-Marquardt, a third-order Volterra baseline and the memoryless
//! per-point correction table.

mod dump;
mod gpr;
mod mm;
mod nn;
mod regressor;
mod volterra;

pub use dump::{ModelDump, TrainingMeta, DUMP_FORMAT, DUMP_VERSION};
pub use gpr::{blue_fuse, gpr_fit, GprConfig, GprHyper, GprSegmentModel, BlueEnsemble, Prediction};
pub use mm::{mm_correct, mm_fit, MmTable, MIN_POINT_HITS};
pub use nn::{activation, nn_train, NnConfig, NnModel, TrainReport};
pub use regressor::{build_regressor, regressor_matrix, valid_memory, RegressorWindow, MAX_MEMORY};
pub use volterra::{volterra_fit, VolterraModel, VolterraTerms};

use serde::{Deserialize, Serialize};

use crate::signal::C64;

/// A trained soft-output post-distorter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PostdistModel {
    Gpr(BlueEnsemble),
    Nn(NnModel),
    Volterra(VolterraModel),
}

impl PostdistModel {
    pub fn memory(&self) -> usize {
        match self {
            PostdistModel::Gpr(m) => m.memory(),
            PostdistModel::Nn(m) => m.memory,
            PostdistModel::Volterra(m) => m.memory,
        }
    }

    /// Soft symbols for every position of an equalized block, windows
    /// wrapping cyclically.
    pub fn apply_block(&self, z: &[C64]) -> Vec<C64> {
        match self {
            PostdistModel::Gpr(m) => m.predict_block(z),
            PostdistModel::Nn(m) => m.apply_block(z),
            PostdistModel::Volterra(m) => m.apply_block(z),
        }
    }
}

impl PostdistModel {
    pub(crate) fn validate(&self) -> crate::error::Result<()> {
        match self {
            PostdistModel::Gpr(m) => m.validate(),
            PostdistModel::Nn(m) => m.validate(),
            PostdistModel::Volterra(m) => m.validate(),
        }
    }
}
