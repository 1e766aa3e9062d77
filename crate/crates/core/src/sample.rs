//! Measurement records shared by every stage of the pipeline.

use crate::labeling::DecouplingClass;

/// Number of access points in the cluster.
pub const NUM_APS: usize = 5;

/// Number of classifier features: 5 K-factors then 5 RSRPs, both at 2.6 GHz.
pub const NUM_FEATURES: usize = 2 * NUM_APS;

/// Planar coordinate in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Carrier band of a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Band {
    /// 2.6 GHz.
    Sub6,
    /// 28 GHz.
    MmWave,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Sub6 => "2.6 GHz",
            Band::MmWave => "28 GHz",
        }
    }
}

/// Per-AP measurements at one band.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BandReport {
    pub k_factor_db: [f64; NUM_APS],
    pub rsrp_dbm: [f64; NUM_APS],
}

impl BandReport {
    pub fn max_k_factor(&self) -> f64 {
        self.k_factor_db
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_rsrp(&self) -> f64 {
        self.rsrp_dbm
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.k_factor_db
            .iter()
            .chain(self.rsrp_dbm.iter())
            .all(|v| v.is_finite())
    }
}

/// One time step of a UE track: dual-band report towards the five APs.
///
/// Both bands observe the same LOS state, so the flags are stored once. They
/// are only known for freshly synthesized samples; the CSV interchange format
/// does not carry them.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSample {
    pub sample_id: u64,
    pub track_id: u32,
    pub position: Point,
    pub sub6: BandReport,
    pub mmwave: BandReport,
    pub los: Option<[bool; NUM_APS]>,
    pub label: Option<DecouplingClass>,
}

impl MeasurementSample {
    pub fn band(&self, band: Band) -> &BandReport {
        match band {
            Band::Sub6 => &self.sub6,
            Band::MmWave => &self.mmwave,
        }
    }

    /// The classifier input: 2.6 GHz K-factors followed by 2.6 GHz RSRPs.
    pub fn features(&self) -> [f64; NUM_FEATURES] {
        let mut out = [0.0; NUM_FEATURES];
        out[..NUM_APS].copy_from_slice(&self.sub6.k_factor_db);
        out[NUM_APS..].copy_from_slice(&self.sub6.rsrp_dbm);
        out
    }
}
