//! Decoupling classes and the mmWave-driven labeling rule.
//!
//! A sample is labeled from its 28 GHz report: `L` holds when the best
//! K-factor exceeds `k_th` (a LOS AP is available for the uplink) and `H`
//! when the best RSRP exceeds `p_th` (the downlink can be served at 28 GHz).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sample::{Band, BandReport, MeasurementSample, NUM_APS};

/// Uplink/downlink band assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecouplingClass {
    /// UL and DL at 2.6 GHz.
    Class1,
    /// UL at 28 GHz with a LOS AP, DL at 2.6 GHz.
    Class2,
    /// UL and DL at 28 GHz.
    Class3,
    /// UL at 2.6 GHz, DL at 28 GHz.
    Class4,
}

impl DecouplingClass {
    pub const ALL: [DecouplingClass; 4] = [
        DecouplingClass::Class1,
        DecouplingClass::Class2,
        DecouplingClass::Class3,
        DecouplingClass::Class4,
    ];

    /// Decision table over the (LOS available, 28 GHz power sufficient) flags.
    pub fn from_flags(los_ok: bool, power_ok: bool) -> Self {
        match (los_ok, power_ok) {
            (false, false) => DecouplingClass::Class1,
            (true, false) => DecouplingClass::Class2,
            (true, true) => DecouplingClass::Class3,
            (false, true) => DecouplingClass::Class4,
        }
    }

    /// Class number, 1 to 4.
    pub fn number(self) -> u8 {
        match self {
            DecouplingClass::Class1 => 1,
            DecouplingClass::Class2 => 2,
            DecouplingClass::Class3 => 3,
            DecouplingClass::Class4 => 4,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(DecouplingClass::Class1),
            2 => Ok(DecouplingClass::Class2),
            3 => Ok(DecouplingClass::Class3),
            4 => Ok(DecouplingClass::Class4),
            _ => Err(Error::data(format!("class number must be 1-4, got {n}"))),
        }
    }

    pub fn uplink_band(self) -> Band {
        match self {
            DecouplingClass::Class2 | DecouplingClass::Class3 => Band::MmWave,
            DecouplingClass::Class1 | DecouplingClass::Class4 => Band::Sub6,
        }
    }

    pub fn downlink_band(self) -> Band {
        match self {
            DecouplingClass::Class3 | DecouplingClass::Class4 => Band::MmWave,
            DecouplingClass::Class1 | DecouplingClass::Class2 => Band::Sub6,
        }
    }
}

impl fmt::Display for DecouplingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for DecouplingClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::data(format!("invalid class label {s:?}")))?;
        Self::from_number(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub k_th_db: f64,
    pub p_th_dbm: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            k_th_db: 3.0,
            p_th_dbm: -115.0,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if self.k_th_db.is_finite() && self.p_th_dbm.is_finite() {
            Ok(())
        } else {
            Err(Error::param("thresholds must be finite"))
        }
    }
}

/// Applies the decision table to one band report (strict comparisons).
pub fn classify_report(report: &BandReport, th: &Thresholds) -> DecouplingClass {
    DecouplingClass::from_flags(
        report.max_k_factor() > th.k_th_db,
        report.max_rsrp() > th.p_th_dbm,
    )
}

/// Label of a sample, read from its 28 GHz measurements.
pub fn label_sample(sample: &MeasurementSample, th: &Thresholds) -> DecouplingClass {
    classify_report(&sample.mmwave, th)
}

/// Labels every sample in place order.
pub fn label_dataset(
    mut samples: Vec<MeasurementSample>,
    th: &Thresholds,
) -> Vec<MeasurementSample> {
    for s in &mut samples {
        s.label = Some(label_sample(s, th));
    }
    samples
}

/// Per-class counts, indexed by `class.number() - 1`.
pub fn class_histogram<'a>(labels: impl IntoIterator<Item = &'a DecouplingClass>) -> [usize; 4] {
    let mut hist = [0; 4];
    for c in labels {
        hist[usize::from(c.number() - 1)] += 1;
    }
    hist
}

/// Target APs chosen by the UE inside a decided class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TargetSelection {
    pub uplink_ap: usize,
    pub uplink_band: Band,
    pub downlink_ap: usize,
    pub downlink_band: Band,
}

fn argmax(values: &[f64; NUM_APS]) -> usize {
    // first maximum wins
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Uplink AP = best K-factor at the uplink band, downlink AP = best RSRP at
/// the downlink band. AP indices are 0-based; ties go to the lowest index.
pub fn select_target_aps(sample: &MeasurementSample, class: DecouplingClass) -> TargetSelection {
    let uplink_band = class.uplink_band();
    let downlink_band = class.downlink_band();
    TargetSelection {
        uplink_ap: argmax(&sample.band(uplink_band).k_factor_db),
        uplink_band,
        downlink_ap: argmax(&sample.band(downlink_band).rsrp_dbm),
        downlink_band,
    }
}
