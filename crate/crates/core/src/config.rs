//! Run configuration read from flat `key = value` files.
//!
//! Every key is optional and overrides the built-in default. Tracks are
//! replaced as a whole when `tracks` is given.
//!
//! ```text
//! seed = 42
//! n_total = 3800
//! geometry.ap1 = 0, 200
//! band28.rsrp_offset_db = 80
//! tracks = 1
//! track.1.shape = circular
//! track.1.radius_m = 150
//! svm.kernel = rbf
//! eval.window_l = 50
//! ```

use crate::channel::{BandParams, ClusterGeometry, SynthConfig, TrackShape, TrackSpec};
use crate::error::{Error, Result};
use crate::evaluation::EvalConfig;
use crate::kv::KvMap;
use crate::labeling::Thresholds;
use crate::numfmt::{format_f64, format_list};
use crate::sample::{Point, NUM_APS};
use crate::svm::{Kernel, SvmParams, DEFAULT_GAMMA};

#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunConfig {
    pub seed: u64,
    pub synth: SynthConfig,
    pub thresholds: Thresholds,
    pub svm: SvmParams,
    /// `n_total` and `seed` mirror the fields above.
    pub eval: EvalConfig,
}

const BAND_FIELDS: [&str; 10] = [
    "carrier_ghz",
    "tx_power_dbm",
    "antenna_gain_db",
    "rsrp_offset_db",
    "nlos_excess_loss_db",
    "shadowing_std_db",
    "k_los_mean_db",
    "k_los_std_db",
    "k_nlos_mean_db",
    "k_nlos_std_db",
];

fn band_slot<'a>(b: &'a mut BandParams, field: &str) -> &'a mut f64 {
    match field {
        "carrier_ghz" => &mut b.carrier_ghz,
        "tx_power_dbm" => &mut b.tx_power_dbm,
        "antenna_gain_db" => &mut b.antenna_gain_db,
        "rsrp_offset_db" => &mut b.rsrp_offset_db,
        "nlos_excess_loss_db" => &mut b.nlos_excess_loss_db,
        "shadowing_std_db" => &mut b.shadowing_std_db,
        "k_los_mean_db" => &mut b.k_los_mean_db,
        "k_los_std_db" => &mut b.k_los_std_db,
        "k_nlos_mean_db" => &mut b.k_nlos_mean_db,
        "k_nlos_std_db" => &mut b.k_nlos_std_db,
        _ => unreachable!("field list is fixed"),
    }
}

fn point(kv: &KvMap, key: &str) -> Result<Option<Point>> {
    match kv.get_f64_list(key)? {
        None => Ok(None),
        Some(v) if v.len() == 2 => Ok(Some(Point::new(v[0], v[1]))),
        Some(v) => Err(Error::data(format!(
            "key {key:?}: expected `x, y`, got {} values",
            v.len()
        ))),
    }
}

fn read_tracks(kv: &KvMap) -> Result<Vec<TrackSpec>> {
    let count: usize = kv.require("tracks")?;
    let mut tracks = Vec::with_capacity(count);
    for i in 1..=count {
        let p = format!("track.{i}");
        let origin = point(kv, &format!("{p}.origin"))?.unwrap_or(Point::new(0.0, 0.0));
        let n: usize = kv.require(&format!("{p}.n_samples"))?;
        let shape: String = kv.require(&format!("{p}.shape"))?;
        let mut spec = match shape.as_str() {
            "linear" => {
                let dir = kv.require_f64_list(&format!("{p}.direction"), 2)?;
                TrackSpec::linear(origin, (dir[0], dir[1]), n)
            }
            "circular" => {
                let mut spec =
                    TrackSpec::circular(origin, kv.require(&format!("{p}.radius_m"))?, n);
                if let TrackShape::Circular {
                    start_angle_rad, ..
                } = &mut spec.shape
                {
                    kv.update(&format!("{p}.start_angle_rad"), start_angle_rad)?;
                }
                spec
            }
            other => return Err(Error::data(format!("{p}.shape: unknown shape {other:?}"))),
        };
        kv.update(&format!("{p}.speed_mps"), &mut spec.speed_mps)?;
        kv.update(
            &format!("{p}.sample_interval_s"),
            &mut spec.sample_interval_s,
        )?;
        tracks.push(spec);
    }
    Ok(tracks)
}

fn is_known_key(key: &str, n_tracks: usize) -> bool {
    const FIXED: [&str; 22] = [
        "seed",
        "n_total",
        "geometry.ap_height_m",
        "geometry.ue_height_m",
        "channel.los_correlation_m",
        "channel.shadow_correlation_los_m",
        "channel.shadow_correlation_nlos_m",
        "channel.k_cross_band_correlation",
        "labeling.k_th_db",
        "labeling.p_th_dbm",
        "svm.kernel",
        "svm.c",
        "svm.gamma",
        "svm.tol",
        "svm.max_iter_factor",
        "eval.n_train_pool",
        "eval.size_start",
        "eval.size_step",
        "eval.window_l",
        "eval.as_valid_threshold",
        "tracks",
        "geometry.ring_radius_m",
    ];
    if FIXED.contains(&key) {
        return true;
    }
    if let Some(rest) = key.strip_prefix("geometry.ap") {
        return rest
            .parse::<usize>()
            .is_ok_and(|a| (1..=NUM_APS).contains(&a));
    }
    if let Some(field) = key
        .strip_prefix("band26.")
        .or_else(|| key.strip_prefix("band28."))
    {
        return BAND_FIELDS.contains(&field);
    }
    if let Some(rest) = key.strip_prefix("track.") {
        if let Some((idx, field)) = rest.split_once('.') {
            return idx
                .parse::<usize>()
                .is_ok_and(|i| (1..=n_tracks).contains(&i))
                && [
                    "shape",
                    "origin",
                    "direction",
                    "radius_m",
                    "start_angle_rad",
                    "speed_mps",
                    "sample_interval_s",
                    "n_samples",
                ]
                .contains(&field);
        }
    }
    false
}

impl RunConfig {
    /// Defaults overridden by the entries of `kv`; unknown keys are rejected.
    pub fn from_kv(kv: &KvMap) -> Result<Self> {
        let n_tracks: usize = kv.get_parsed("tracks")?.unwrap_or(0);
        if let Some(bad) = kv.keys().find(|k| !is_known_key(k, n_tracks)) {
            return Err(Error::data(format!("unknown configuration key {bad:?}")));
        }
        let mut cfg = RunConfig::default();
        kv.update("seed", &mut cfg.seed)?;
        kv.update("n_total", &mut cfg.synth.n_total)?;

        let geom = &cfg.synth.geometry;
        let mut ap_h = geom.ap_height_m();
        let mut ue_h = geom.ue_height_m();
        kv.update("geometry.ap_height_m", &mut ap_h)?;
        kv.update("geometry.ue_height_m", &mut ue_h)?;
        let mut aps = *geom.ap_positions();
        if let Some(r) = kv.get_parsed::<f64>("geometry.ring_radius_m")? {
            aps = *ClusterGeometry::ring(r, ap_h, ue_h)?.ap_positions();
        }
        for (a, slot) in aps.iter_mut().enumerate() {
            if let Some(p) = point(kv, &format!("geometry.ap{}", a + 1))? {
                *slot = p;
            }
        }
        cfg.synth.geometry = ClusterGeometry::new(aps, ap_h, ue_h)?;

        let params = &mut cfg.synth.params;
        for (prefix, band) in [("band26", &mut params.sub6), ("band28", &mut params.mmwave)] {
            for field in BAND_FIELDS {
                kv.update(&format!("{prefix}.{field}"), band_slot(band, field))?;
            }
        }
        kv.update("channel.los_correlation_m", &mut params.los_correlation_m)?;
        kv.update(
            "channel.shadow_correlation_los_m",
            &mut params.shadow_correlation_los_m,
        )?;
        kv.update(
            "channel.shadow_correlation_nlos_m",
            &mut params.shadow_correlation_nlos_m,
        )?;
        kv.update(
            "channel.k_cross_band_correlation",
            &mut params.k_cross_band_correlation,
        )?;
        if kv.contains("tracks") {
            cfg.synth.tracks = read_tracks(kv)?;
        } else if kv.contains("n_total") && cfg.synth.tracks.len() == 1 {
            cfg.synth.tracks[0].n_samples = cfg.synth.n_total;
        }

        kv.update("labeling.k_th_db", &mut cfg.thresholds.k_th_db)?;
        kv.update("labeling.p_th_dbm", &mut cfg.thresholds.p_th_dbm)?;

        let mut gamma = match cfg.svm.kernel {
            Kernel::Rbf { gamma } => gamma,
            Kernel::Linear => DEFAULT_GAMMA,
        };
        kv.update("svm.gamma", &mut gamma)?;
        let kernel: String = kv.get_parsed("svm.kernel")?.unwrap_or_else(|| "rbf".into());
        cfg.svm.kernel = parse_kernel(&kernel, gamma)?;
        kv.update("svm.c", &mut cfg.svm.c)?;
        kv.update("svm.tol", &mut cfg.svm.tol)?;
        kv.update("svm.max_iter_factor", &mut cfg.svm.max_iter_factor)?;

        kv.update("eval.n_train_pool", &mut cfg.eval.n_train_pool)?;
        kv.update("eval.size_start", &mut cfg.eval.size_start)?;
        kv.update("eval.size_step", &mut cfg.eval.size_step)?;
        kv.update("eval.window_l", &mut cfg.eval.window_l)?;
        kv.update("eval.as_valid_threshold", &mut cfg.eval.as_valid_threshold)?;
        cfg.sync();
        Ok(cfg)
    }

    /// Copies the shared fields into `eval`.
    pub fn sync(&mut self) {
        self.eval.n_total = self.synth.n_total;
        self.eval.seed = self.seed;
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.thresholds.validate()?;
        self.svm.validate()?;
        self.eval.validate()
    }

    /// Every setting as text that [`RunConfig::from_kv`] reads back unchanged.
    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::new();
        kv.insert("seed", self.seed);
        kv.insert("n_total", self.synth.n_total);
        let g = &self.synth.geometry;
        kv.insert("geometry.ap_height_m", format_f64(g.ap_height_m()));
        kv.insert("geometry.ue_height_m", format_f64(g.ue_height_m()));
        for (a, p) in g.ap_positions().iter().enumerate() {
            kv.insert(format!("geometry.ap{}", a + 1), format_list(&[p.x, p.y]));
        }
        let mut params = self.synth.params;
        for (prefix, band) in [("band26", &mut params.sub6), ("band28", &mut params.mmwave)] {
            for field in BAND_FIELDS {
                kv.insert(
                    format!("{prefix}.{field}"),
                    format_f64(*band_slot(band, field)),
                );
            }
        }
        kv.insert(
            "channel.los_correlation_m",
            format_f64(params.los_correlation_m),
        );
        kv.insert(
            "channel.shadow_correlation_los_m",
            format_f64(params.shadow_correlation_los_m),
        );
        kv.insert(
            "channel.shadow_correlation_nlos_m",
            format_f64(params.shadow_correlation_nlos_m),
        );
        kv.insert(
            "channel.k_cross_band_correlation",
            format_f64(params.k_cross_band_correlation),
        );
        kv.insert("tracks", self.synth.tracks.len());
        for (i, t) in self.synth.tracks.iter().enumerate() {
            let p = format!("track.{}", i + 1);
            kv.insert(
                format!("{p}.origin"),
                format_list(&[t.origin.x, t.origin.y]),
            );
            kv.insert(format!("{p}.n_samples"), t.n_samples);
            kv.insert(format!("{p}.speed_mps"), format_f64(t.speed_mps));
            kv.insert(
                format!("{p}.sample_interval_s"),
                format_f64(t.sample_interval_s),
            );
            match t.shape {
                TrackShape::Linear { direction } => {
                    kv.insert(format!("{p}.shape"), "linear");
                    kv.insert(
                        format!("{p}.direction"),
                        format_list(&[direction.0, direction.1]),
                    );
                }
                TrackShape::Circular {
                    radius,
                    start_angle_rad,
                } => {
                    kv.insert(format!("{p}.shape"), "circular");
                    kv.insert(format!("{p}.radius_m"), format_f64(radius));
                    kv.insert(format!("{p}.start_angle_rad"), format_f64(start_angle_rad));
                }
            }
        }
        kv.insert("labeling.k_th_db", format_f64(self.thresholds.k_th_db));
        kv.insert("labeling.p_th_dbm", format_f64(self.thresholds.p_th_dbm));
        kv.insert("svm.kernel", self.svm.kernel.name());
        if let Kernel::Rbf { gamma } = self.svm.kernel {
            kv.insert("svm.gamma", format_f64(gamma));
        }
        kv.insert("svm.c", format_f64(self.svm.c));
        kv.insert("svm.tol", format_f64(self.svm.tol));
        kv.insert("svm.max_iter_factor", self.svm.max_iter_factor);
        kv.insert("eval.n_train_pool", self.eval.n_train_pool);
        kv.insert("eval.size_start", self.eval.size_start);
        kv.insert("eval.size_step", self.eval.size_step);
        kv.insert("eval.window_l", self.eval.window_l);
        kv.insert(
            "eval.as_valid_threshold",
            format_f64(self.eval.as_valid_threshold),
        );
        kv
    }
}

/// `rbf` or `linear`; `gamma` is ignored for the linear kernel.
pub fn parse_kernel(name: &str, gamma: f64) -> Result<Kernel> {
    match name {
        "rbf" => Ok(Kernel::Rbf { gamma }),
        "linear" => Ok(Kernel::Linear),
        other => Err(Error::param(format!(
            "unknown kernel {other:?} (expected rbf or linear)"
        ))),
    }
}
