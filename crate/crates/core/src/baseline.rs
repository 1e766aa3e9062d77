//! Blind fixed-threshold decoupling from 2.6 GHz measurements.
//!
//! Offsets are means of `28 GHz - 2.6 GHz`, so the mmWave thresholds
//! translate to the sub-6 domain as `k_th - k_offset` and `p_th - p_offset`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evaluation::{confusion_matrix, window_scores, EvalConfig, SweepPoint};
use crate::labeling::{DecouplingClass, Thresholds};
use crate::sample::{BandReport, MeasurementSample, NUM_APS};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandOffsets {
    pub k_offset_db: f64,
    pub p_offset_db: f64,
}

impl BandOffsets {
    pub const ZERO: BandOffsets = BandOffsets {
        k_offset_db: 0.0,
        p_offset_db: 0.0,
    };
}

/// Mean over samples and access points of the 28 GHz minus 2.6 GHz values.
pub fn estimate_offsets(samples: &[MeasurementSample]) -> Result<BandOffsets> {
    if samples.is_empty() {
        return Err(Error::param(
            "cannot estimate offsets from an empty dataset",
        ));
    }
    let mut k = 0.0;
    let mut p = 0.0;
    for s in samples {
        for a in 0..NUM_APS {
            k += s.mmwave.k_factor_db[a] - s.sub6.k_factor_db[a];
            p += s.mmwave.rsrp_dbm[a] - s.sub6.rsrp_dbm[a];
        }
    }
    let n = (samples.len() * NUM_APS) as f64;
    let off = BandOffsets {
        k_offset_db: k / n,
        p_offset_db: p / n,
    };
    if !(off.k_offset_db.is_finite() && off.p_offset_db.is_finite()) {
        return Err(Error::data("offsets are not finite"));
    }
    Ok(off)
}

pub fn threshold_classify(
    sub6: &BandReport,
    th: &Thresholds,
    off: &BandOffsets,
) -> DecouplingClass {
    DecouplingClass::from_flags(
        sub6.max_k_factor() > th.k_th_db - off.k_offset_db,
        sub6.max_rsrp() > th.p_th_dbm - off.p_offset_db,
    )
}

pub fn baseline_predictions(
    samples: &[MeasurementSample],
    th: &Thresholds,
    off: &BandOffsets,
) -> Vec<DecouplingClass> {
    samples
        .par_iter()
        .map(|s| threshold_classify(&s.sub6, th, off))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineReport {
    pub offsets: BandOffsets,
    /// Windowed score on the test rows; `n_train` is the training pool size.
    pub point: SweepPoint,
    /// `confusion[true - 1][predicted - 1]` over the test rows.
    pub confusion: [[usize; 4]; 4],
}

fn labels_of(samples: &[MeasurementSample]) -> Result<Vec<DecouplingClass>> {
    samples
        .iter()
        .map(|s| {
            s.label
                .ok_or_else(|| Error::param(format!("sample {} has no label", s.sample_id)))
        })
        .collect()
}

/// Scores the threshold rule with given offsets on the test rows of `cfg`.
pub fn baseline_dsr_with(
    samples: &[MeasurementSample],
    th: &Thresholds,
    off: &BandOffsets,
    cfg: &EvalConfig,
) -> Result<BaselineReport> {
    cfg.validate()?;
    th.validate()?;
    if samples.len() != cfg.n_total {
        return Err(Error::param(format!(
            "dataset has {} rows, configuration expects {}",
            samples.len(),
            cfg.n_total
        )));
    }
    let test = &samples[cfg.n_train_pool..];
    let truth = labels_of(test)?;
    let predicted = baseline_predictions(test, th, off);
    let scores = window_scores(&truth, &predicted, cfg.window_l)?;
    Ok(BaselineReport {
        offsets: *off,
        point: SweepPoint::from_scores(cfg.n_train_pool, &scores, cfg.as_valid_threshold, true)?,
        confusion: confusion_matrix(&truth, &predicted)?,
    })
}

/// Estimates offsets over the whole labeled dataset, then scores the test rows.
pub fn baseline_dsr(
    samples: &[MeasurementSample],
    th: &Thresholds,
    cfg: &EvalConfig,
) -> Result<BaselineReport> {
    labels_of(samples)?;
    let off = estimate_offsets(samples)?;
    baseline_dsr_with(samples, th, &off, cfg)
}
