//! Small dense/convolutional classifiers for signal detection, trained from
//! scratch with Adam on categorical cross-entropy.

pub mod detect;
pub mod io;
pub mod layer;
pub mod model;
pub mod train;

pub use detect::{evaluate, extract_error_profile, DetectionReport, DetectionSnrs, SnrPoint};
pub use layer::{Activation, Layer};
pub use model::{build_cnn, build_fnn, expected_param_count, softmax, Architecture, NetworkModel};
pub use train::{train, Adam, TrainConfig, TrainReport};
