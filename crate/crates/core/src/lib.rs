//! Semi-blind uplink/downlink decoupling: dual-band channel synthesis,
//! mmWave-derived class labels, kernel SVM classification from sub-6 GHz
//! measurements, a fixed-threshold baseline and the windowed evaluation
//! protocol.

pub mod baseline;
pub mod channel;
pub mod config;
pub mod dataset;
mod error;
pub mod evaluation;
pub mod kv;
pub mod labeling;
pub mod linalg;
pub mod numfmt;
pub mod pca;
pub mod preprocess;
pub mod rng;
pub mod sample;
pub mod svm;

pub use baseline::{
    baseline_dsr, estimate_offsets, threshold_classify, BandOffsets, BaselineReport,
};
pub use channel::{synth_dataset, ClusterGeometry, PropagationParams, SynthConfig, TrackSpec};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use evaluation::{run_dsr_sweep, run_kernel_comparison, EvalConfig, Sweep, SweepPoint};
pub use labeling::{label_dataset, label_sample, DecouplingClass, Thresholds};
pub use pca::{pca_fit, PcaModel};
pub use preprocess::{FeatureMatrix, Scaler};
pub use sample::{Band, BandReport, MeasurementSample, Point, NUM_APS, NUM_FEATURES};
pub use svm::{Kernel, MulticlassModel, SvmParams};
