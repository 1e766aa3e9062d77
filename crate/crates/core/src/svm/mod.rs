//! Kernel SVM classifiers.

mod io;
mod kernel;
mod ovo;
mod smo;

pub use io::{load_model, model_from_kv, model_to_kv, save_model};
pub use kernel::Kernel;
pub use ovo::{accuracy_score, train, train_binary, BinaryModel, MulticlassModel};
pub use smo::{gram_matrix, solve_dual, DualSolution, SvmParams, DEFAULT_GAMMA};
