use crate::error::{Error, Result};
use crate::sample::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrackShape {
    /// Straight walk from the origin along `direction` (normalized internally).
    Linear { direction: (f64, f64) },
    /// Counter-clockwise walk on the circle of `radius` centred at the origin,
    /// starting at `start_angle_rad`.
    Circular { radius: f64, start_angle_rad: f64 },
}

/// A UE walk sampled at a fixed reporting interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackSpec {
    pub shape: TrackShape,
    /// First position of a linear track, centre of a circular one.
    pub origin: Point,
    pub speed_mps: f64,
    pub sample_interval_s: f64,
    pub n_samples: usize,
}

impl TrackSpec {
    pub fn linear(origin: Point, direction: (f64, f64), n_samples: usize) -> Self {
        TrackSpec {
            shape: TrackShape::Linear { direction },
            origin,
            speed_mps: 1.0,
            sample_interval_s: 1.0,
            n_samples,
        }
    }

    pub fn circular(centre: Point, radius: f64, n_samples: usize) -> Self {
        TrackSpec {
            shape: TrackShape::Circular {
                radius,
                start_angle_rad: 0.0,
            },
            origin: centre,
            speed_mps: 1.0,
            sample_interval_s: 1.0,
            n_samples,
        }
    }

    /// Distance walked between two consecutive samples (arc length on circles).
    pub fn step_m(&self) -> f64 {
        self.speed_mps * self.sample_interval_s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed_mps > 0.0 && self.speed_mps.is_finite()) {
            return Err(Error::param(format!(
                "track speed must be > 0, got {}",
                self.speed_mps
            )));
        }
        if !(self.sample_interval_s > 0.0 && self.sample_interval_s.is_finite()) {
            return Err(Error::param(format!(
                "track sample interval must be > 0, got {}",
                self.sample_interval_s
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::param("track must have at least one sample"));
        }
        if !self.origin.is_finite() {
            return Err(Error::param("track origin must be finite"));
        }
        match self.shape {
            TrackShape::Linear {
                direction: (dx, dy),
            } => {
                let norm = dx.hypot(dy);
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::param(
                        "linear track direction must be a nonzero finite vector",
                    ));
                }
            }
            TrackShape::Circular {
                radius,
                start_angle_rad,
            } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::param(format!(
                        "circular track radius must be > 0, got {radius}"
                    )));
                }
                if !start_angle_rad.is_finite() {
                    return Err(Error::param("circular track start angle must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Positions of the UE at each reporting instant.
pub fn make_track(spec: &TrackSpec) -> Result<Vec<Point>> {
    spec.validate()?;
    let step = spec.step_m();
    let points = match spec.shape {
        TrackShape::Linear {
            direction: (dx, dy),
        } => {
            let norm = dx.hypot(dy);
            let (ux, uy) = (dx / norm, dy / norm);
            (0..spec.n_samples)
                .map(|k| {
                    let s = k as f64 * step;
                    Point::new(spec.origin.x + s * ux, spec.origin.y + s * uy)
                })
                .collect()
        }
        TrackShape::Circular {
            radius,
            start_angle_rad,
        } => (0..spec.n_samples)
            .map(|k| {
                let angle = start_angle_rad + k as f64 * step / radius;
                Point::new(
                    spec.origin.x + radius * angle.cos(),
                    spec.origin.y + radius * angle.sin(),
                )
            })
            .collect(),
    };
    Ok(points)
}
