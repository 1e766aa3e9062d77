use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::propagation::{los_probability, normal_cdf, path_loss_db, rsrp_dbm, PropagationParams};
use super::track::{make_track, TrackSpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::sample::{BandReport, MeasurementSample, Point, NUM_APS};

/// AP placement of the cluster.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGeometry {
    ap_positions: [Point; NUM_APS],
    ap_height_m: f64,
    ue_height_m: f64,
}

impl ClusterGeometry {
    pub fn new(ap_positions: [Point; NUM_APS], ap_height_m: f64, ue_height_m: f64) -> Result<Self> {
        if !(ue_height_m > 0.0 && ap_height_m > ue_height_m && ap_height_m.is_finite()) {
            return Err(Error::param(format!(
                "need ap_height > ue_height > 0, got ap {ap_height_m} m, ue {ue_height_m} m"
            )));
        }
        if ap_positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("AP positions must be finite"));
        }
        for i in 0..NUM_APS {
            for j in i + 1..NUM_APS {
                if ap_positions[i] == ap_positions[j] {
                    return Err(Error::param(format!(
                        "APs {} and {} share a position",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(ClusterGeometry {
            ap_positions,
            ap_height_m,
            ue_height_m,
        })
    }

    /// APs evenly spaced on a ring around the origin, the first one due north.
    pub fn ring(radius_m: f64, ap_height_m: f64, ue_height_m: f64) -> Result<Self> {
        if !(radius_m > 0.0 && radius_m.is_finite()) {
            return Err(Error::param(format!(
                "ring radius must be > 0, got {radius_m}"
            )));
        }
        let positions = std::array::from_fn(|i| {
            let angle =
                std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * i as f64 / NUM_APS as f64;
            Point::new(radius_m * angle.cos(), radius_m * angle.sin())
        });
        Self::new(positions, ap_height_m, ue_height_m)
    }

    pub fn ap_positions(&self) -> &[Point; NUM_APS] {
        &self.ap_positions
    }

    pub fn ap_height_m(&self) -> f64 {
        self.ap_height_m
    }

    pub fn ue_height_m(&self) -> f64 {
        self.ue_height_m
    }

    /// Horizontal distance from `ue` to AP `ap`.
    pub fn distance_2d(&self, ue: Point, ap: usize) -> f64 {
        ue.distance(self.ap_positions[ap])
    }

    pub fn distance_3d(&self, ue: Point, ap: usize) -> f64 {
        self.distance_2d(ue, ap)
            .hypot(self.ap_height_m - self.ue_height_m)
    }
}

impl Default for ClusterGeometry {
    fn default() -> Self {
        ClusterGeometry::ring(200.0, 25.0, 1.5).expect("default geometry is valid")
    }
}

/// Everything needed to synthesize a dataset apart from the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub geometry: ClusterGeometry,
    pub tracks: Vec<TrackSpec>,
    pub params: PropagationParams,
    /// Expected total sample count across all tracks.
    pub n_total: usize,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.tracks.is_empty() {
            return Err(Error::param("at least one track is required"));
        }
        for (i, t) in self.tracks.iter().enumerate() {
            t.validate()
                .map_err(|e| Error::param(format!("track {}: {e}", i + 1)))?;
        }
        let total: usize = self.tracks.iter().map(|t| t.n_samples).sum();
        if total != self.n_total {
            return Err(Error::param(format!(
                "tracks provide {total} samples but the dataset size is {}",
                self.n_total
            )));
        }
        Ok(())
    }
}

impl Default for SynthConfig {
    /// A pedestrian circling the cluster centre at 150 m radius, reporting
    /// every 10 s, for 3800 reports.
    fn default() -> Self {
        let mut track = TrackSpec::circular(Point::new(0.0, 0.0), 150.0, 3800);
        track.sample_interval_s = 10.0;
        SynthConfig {
            geometry: ClusterGeometry::default(),
            tracks: vec![track],
            params: PropagationParams::default(),
            n_total: 3800,
        }
    }
}

/// Latent Gaussian processes driving the correlated LOS state and shadowing
/// of each AP link along one track.
#[derive(Clone, Debug, Default)]
pub struct ChannelState {
    los_latent: [f64; NUM_APS],
    shadow_latent: [f64; NUM_APS],
    last_position: Option<Point>,
}

impl ChannelState {
    pub fn new() -> Self {
        Self::default()
    }
}

fn ar1<R: Rng + ?Sized>(value: f64, step_m: f64, correlation_m: f64, rng: &mut R) -> f64 {
    let rho = (-step_m / correlation_m).exp();
    let innovation: f64 = rng.sample(StandardNormal);
    rho * value + (1.0 - rho * rho).sqrt() * innovation
}

/// Draws the next dual-band report of a track at position `ue`.
///
/// The first call on a fresh [`ChannelState`] draws the latent processes from
/// their stationary law; later calls advance them by the distance walked
/// since the previous call. The returned sample has id 0, track 0 and no label.
pub fn sample_measurement<R: Rng + ?Sized>(
    ue: Point,
    geometry: &ClusterGeometry,
    params: &PropagationParams,
    state: &mut ChannelState,
    rng: &mut R,
) -> MeasurementSample {
    let step = state.last_position.map(|p| p.distance(ue));
    let mut los = [false; NUM_APS];
    let mut sub6 = BandReport::default();
    let mut mmwave = BandReport::default();
    let rho_k = params.k_cross_band_correlation;

    for ap in 0..NUM_APS {
        state.los_latent[ap] = match step {
            None => rng.sample(StandardNormal),
            Some(s) => ar1(state.los_latent[ap], s, params.los_correlation_m, rng),
        };
        let p_los = los_probability(geometry.distance_2d(ue, ap));
        los[ap] = p_los >= 1.0 || normal_cdf(state.los_latent[ap]) < p_los;

        let shadow_corr = if los[ap] {
            params.shadow_correlation_los_m
        } else {
            params.shadow_correlation_nlos_m
        };
        state.shadow_latent[ap] = match step {
            None => rng.sample(StandardNormal),
            Some(s) => ar1(state.shadow_latent[ap], s, shadow_corr, rng),
        };

        let z_sub6: f64 = rng.sample(StandardNormal);
        let e: f64 = rng.sample(StandardNormal);
        let z_mmwave = rho_k * z_sub6 + (1.0 - rho_k * rho_k).sqrt() * e;

        let d3d = geometry.distance_3d(ue, ap);
        for (report, band, z) in [
            (&mut sub6, &params.sub6, z_sub6),
            (&mut mmwave, &params.mmwave, z_mmwave),
        ] {
            let (k_mean, k_std) = band.k_law(los[ap]);
            report.k_factor_db[ap] = k_mean + k_std * z;
            // d3d >= ap_height - ue_height > 0; geometry keeps it above 1 m
            let pl = path_loss_db(band, d3d.max(1.0), los[ap], geometry.ue_height_m())
                .expect("distance clamped to >= 1 m");
            let shadowing = band.shadowing_std_db * state.shadow_latent[ap];
            report.rsrp_dbm[ap] = rsrp_dbm(band, pl, los[ap], shadowing);
        }
    }
    state.last_position = Some(ue);

    MeasurementSample {
        sample_id: 0,
        track_id: 0,
        position: ue,
        sub6,
        mmwave,
        los: Some(los),
        label: None,
    }
}

/// Synthesizes the unlabeled dataset, ordered by track then time.
///
/// Each track draws from its own random stream (index = track id), so the
/// result is a pure function of `(config, seed)`.
pub fn synth_dataset(config: &SynthConfig, seed: u64) -> Result<Vec<MeasurementSample>> {
    config.validate()?;
    let per_track: Vec<Vec<MeasurementSample>> = config
        .tracks
        .par_iter()
        .enumerate()
        .map(|(track_id, spec)| {
            let mut rng = rng::stream(seed, rng::SYNTH, track_id as u64);
            let mut state = ChannelState::new();
            make_track(spec).map(|points| {
                points
                    .into_iter()
                    .map(|ue| {
                        let mut s = sample_measurement(
                            ue,
                            &config.geometry,
                            &config.params,
                            &mut state,
                            &mut rng,
                        );
                        s.track_id = track_id as u32;
                        s
                    })
                    .collect()
            })
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<MeasurementSample> = per_track.into_iter().flatten().collect();
    for (id, s) in out.iter_mut().enumerate() {
        s.sample_id = id as u64;
    }
    Ok(out)
}
