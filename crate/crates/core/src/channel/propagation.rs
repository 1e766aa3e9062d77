use rand::Rng;

use crate::error::{Error, Result};
use crate::sample::{Band, Point};

/// Link-budget and small-scale parameters of one carrier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandParams {
    pub carrier_ghz: f64,
    pub tx_power_dbm: f64,
    /// Net array gain of the AP at this band.
    pub antenna_gain_db: f64,
    /// Fixed loss between total transmit power and the per-resource-element
    /// reference signal power, plus aggregate implementation losses.
    pub rsrp_offset_db: f64,
    /// Additional loss applied to NLOS links on top of the NLOS path loss.
    pub nlos_excess_loss_db: f64,
    pub shadowing_std_db: f64,
    pub k_los_mean_db: f64,
    pub k_los_std_db: f64,
    pub k_nlos_mean_db: f64,
    pub k_nlos_std_db: f64,
}

impl BandParams {
    pub fn validate(&self, band: Band) -> Result<()> {
        let name = band.name();
        let finite = [
            self.tx_power_dbm,
            self.antenna_gain_db,
            self.rsrp_offset_db,
            self.nlos_excess_loss_db,
            self.k_los_mean_db,
            self.k_nlos_mean_db,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::param(format!(
                "{name}: link budget values must be finite"
            )));
        }
        if !(self.carrier_ghz > 0.0 && self.carrier_ghz.is_finite()) {
            return Err(Error::param(format!(
                "{name}: carrier frequency must be > 0"
            )));
        }
        for (what, std) in [
            ("shadowing std", self.shadowing_std_db),
            ("LOS K-factor std", self.k_los_std_db),
            ("NLOS K-factor std", self.k_nlos_std_db),
        ] {
            if !(std >= 0.0 && std.is_finite()) {
                return Err(Error::param(format!(
                    "{name}: {what} must be >= 0, got {std}"
                )));
            }
        }
        Ok(())
    }

    /// K-factor law for the given LOS state as (mean, std) in dB.
    pub fn k_law(&self, los: bool) -> (f64, f64) {
        if los {
            (self.k_los_mean_db, self.k_los_std_db)
        } else {
            (self.k_nlos_mean_db, self.k_nlos_std_db)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationParams {
    pub sub6: BandParams,
    pub mmwave: BandParams,
    /// Decorrelation distance of the LOS state along a track.
    pub los_correlation_m: f64,
    /// Decorrelation distance of shadowing while the link is LOS.
    pub shadow_correlation_los_m: f64,
    /// Decorrelation distance of shadowing while the link is NLOS.
    pub shadow_correlation_nlos_m: f64,
    /// Correlation between the 2.6 GHz and 28 GHz K-factor fluctuations of a
    /// link at one instant.
    pub k_cross_band_correlation: f64,
}

impl PropagationParams {
    pub fn band(&self, band: Band) -> &BandParams {
        match band {
            Band::Sub6 => &self.sub6,
            Band::MmWave => &self.mmwave,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sub6.validate(Band::Sub6)?;
        self.mmwave.validate(Band::MmWave)?;
        for (what, d) in [
            ("LOS correlation distance", self.los_correlation_m),
            (
                "LOS shadowing correlation distance",
                self.shadow_correlation_los_m,
            ),
            (
                "NLOS shadowing correlation distance",
                self.shadow_correlation_nlos_m,
            ),
        ] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::param(format!("{what} must be > 0, got {d}")));
            }
        }
        if !(-1.0..=1.0).contains(&self.k_cross_band_correlation) {
            return Err(Error::param(
                "K-factor cross-band correlation must lie in [-1, 1]",
            ));
        }
        Ok(())
    }
}

impl Default for PropagationParams {
    /// Calibrated defaults: the dataset-level mean of K28 - K26 lands near
    /// +5 dB and the mean of P28 - P26 near -23.2 dB.
    fn default() -> Self {
        PropagationParams {
            sub6: BandParams {
                carrier_ghz: 2.6,
                tx_power_dbm: 43.0,
                antenna_gain_db: 9.0,
                rsrp_offset_db: 71.7,
                nlos_excess_loss_db: 0.0,
                shadowing_std_db: 2.0,
                k_los_mean_db: 9.0,
                k_los_std_db: 3.5,
                k_nlos_mean_db: -14.0,
                k_nlos_std_db: 3.0,
            },
            mmwave: BandParams {
                carrier_ghz: 28.0,
                tx_power_dbm: 43.0,
                antenna_gain_db: 27.0,
                rsrp_offset_db: 80.0,
                nlos_excess_loss_db: 15.0,
                shadowing_std_db: 2.0,
                k_los_mean_db: 14.0,
                k_los_std_db: 4.0,
                k_nlos_mean_db: -9.0,
                k_nlos_std_db: 3.0,
            },
            los_correlation_m: 50.0,
            shadow_correlation_los_m: 37.0,
            shadow_correlation_nlos_m: 50.0,
            k_cross_band_correlation: 0.8,
        }
    }
}

/// Urban-macro LOS probability for a horizontal distance in meters.
pub fn los_probability(d2d: f64) -> f64 {
    if d2d <= 18.0 {
        1.0
    } else {
        18.0 / d2d + (-d2d / 63.0).exp() * (1.0 - 18.0 / d2d)
    }
}

/// Independent Bernoulli LOS draw for one UE/AP pair.
pub fn los_state<R: Rng + ?Sized>(ue: Point, ap: Point, rng: &mut R) -> bool {
    let p = los_probability(ue.distance(ap));
    p >= 1.0 || rng.random::<f64>() < p
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Path loss in dB at 3-D distance `d3d` (m).
pub fn path_loss_db(band: &BandParams, d3d: f64, los: bool, ue_height_m: f64) -> Result<f64> {
    if d3d.is_nan() || d3d < 1.0 {
        return Err(Error::param(format!(
            "path loss needs d3D >= 1 m, got {d3d}"
        )));
    }
    let freq_term = 20.0 * band.carrier_ghz.log10();
    let pl = if los {
        28.0 + 22.0 * d3d.log10() + freq_term
    } else {
        13.54 + 39.08 * d3d.log10() + freq_term - 0.6 * (ue_height_m - 1.5)
    };
    Ok(pl)
}

/// RSRP in dBm for a given path loss, LOS state and shadowing realization.
pub fn rsrp_dbm(band: &BandParams, path_loss_db: f64, los: bool, shadowing_db: f64) -> f64 {
    let excess = if los { 0.0 } else { band.nlos_excess_loss_db };
    band.tx_power_dbm + band.antenna_gain_db
        - band.rsrp_offset_db
        - path_loss_db
        - excess
        - shadowing_db
}
