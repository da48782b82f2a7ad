//! Surrogate-assisted circuit sizing: sample a labeled dataset, train the
//! parameter-to-metric network, adapt it to post-layout data with linear
//! transfer learning, and search the parameter space for spec-satisfying
//! designs with parallel multi-start gradient descent.

pub mod dataset;
pub mod mlp;
pub mod search;
pub mod transfer;

pub use dataset::{sample_dataset, Dataset};
pub use mlp::{train_mlp, Activation, Gradients, MlpModel, TrainConfig, TrainReport};
pub use search::{search_params, Candidate, Regressor, SearchConfig, SearchOutcome, TargetSpec};
pub use transfer::{transfer_train, TransferModel};
