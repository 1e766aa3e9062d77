//! Dual-band (2.6 GHz / 28 GHz) measurement synthesis over a five-AP cluster.
//!
//! UE tracks are linear or circular walks. Along a track every AP link carries
//! a LOS state drawn from the urban-macro LOS probability and correlated along
//! the walk, log-normal shadowing correlated the same way, and per-step
//! Rician K-factors drawn from band- and LOS-conditioned normal laws. RSRP is
//! a closed-form link budget over an urban-macro style path-loss model.

mod propagation;
mod synth;
mod track;

pub use propagation::{
    los_probability, los_state, normal_cdf, path_loss_db, rsrp_dbm, BandParams, PropagationParams,
};
pub use synth::{sample_measurement, synth_dataset, ChannelState, ClusterGeometry, SynthConfig};
pub use track::{make_track, TrackShape, TrackSpec};
