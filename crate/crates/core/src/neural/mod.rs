//! Small dense-network engine: layers, the two-tower multiply merge, losses,
//! Adam and an early-stopping training loop.

pub mod adam;
pub mod gradcheck;
pub mod loss;
pub mod matrix;
pub mod net;
pub mod train;

pub use adam::{AdamConfig, AdamState};
pub use loss::{weighted_bce_term, Loss, Targets};
pub use matrix::Matrix;
pub use net::{
    merge_multiply, sigmoid, Activation, DenseNet, ForwardCache, Grads, Inputs, LayerShape, Model, TwoTowerNet,
};
pub use train::{
    dataset_loss, train, EarlyStopping, EpochRecord, StopDecision, TargetData, TrainConfig, TrainSet, TrainTrace,
};
