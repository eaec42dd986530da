//! Orbit-height and slant-range estimation from an angle track, using the
//! circular-orbit constraint `v^2 R = GM`.

use crate::aoa::AoATrack;
use crate::error::{Error, Result};
use crate::geodesy::{
    ecef_to_eci, enu_to_ecef_offset, geodetic_to_ecef, los_enu, observer_sphere, slant_range_from_height, EarthModel,
    EcefVector, GeodeticPosition,
};

/// Relative spread below which the objective is considered flat.
pub const FLAT_OBJECTIVE_SPREAD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightSearchConfig {
    pub h_min: f64,
    pub h_max: f64,
    pub step: f64,
}

impl Default for HeightSearchConfig {
    fn default() -> Self {
        Self { h_min: 300e3, h_max: 2000e3, step: 2e3 }
    }
}

impl HeightSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_min < self.h_max) || !(self.step > 0.0) || !(self.h_min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "height grid [{}, {}] step {} is not a valid search range",
                self.h_min, self.h_max, self.step
            )));
        }
        Ok(())
    }

    /// Grid heights, `h_min` first, never exceeding `h_max`.
    pub fn heights(&self) -> Vec<f64> {
        let n = ((self.h_max - self.h_min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.h_min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeEstimate {
    pub h_star: f64,
    /// `|v^2 (Re + h) - GM|` at `h_star`, m^3/s^2.
    pub residual: f64,
    /// Slant range at each valid sample of the track, m.
    pub r_track: Vec<f64>,
}

/// Slant range from `station` to a satellite at `height` above the mean
/// sphere, seen at elevation `el`.
pub fn slant_range(el: f64, height: f64, station: &GeodeticPosition, earth: &EarthModel) -> f64 {
    slant_range_from_height(el, height - station.alt(), &observer_sphere(earth, station.alt()))
}

/// ECEF positions along the valid samples of `track` for a satellite at
/// height `h`.
pub fn track_to_ecef(track: &AoATrack, station: &GeodeticPosition, h: f64, earth: &EarthModel) -> Vec<EcefVector> {
    let gs = geodetic_to_ecef(station, earth);
    track
        .valid_samples()
        .map(|(_, az, el)| gs + enu_to_ecef_offset(&los_enu(az, el), station) * slant_range(el, h, station, earth))
        .collect()
}

/// Mean inertial speed along the track, from central differences over
/// consecutive valid samples.
pub fn mean_speed(track: &AoATrack, station: &GeodeticPosition, h: f64, earth: &EarthModel) -> Result<f64> {
    let times: Vec<f64> = track.valid_samples().map(|s| s.0).collect();
    if times.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: times.len() });
    }
    let eci: Vec<_> =
        track_to_ecef(track, station, h, earth).iter().zip(&times).map(|(p, &t)| ecef_to_eci(p, t, earth)).collect();
    let n = eci.len();
    let total: f64 = (1..n - 1).map(|i| ((eci[i + 1] - eci[i - 1]) * (1.0 / (times[i + 1] - times[i - 1]))).norm()).sum();
    Ok(total / (n - 2) as f64)
}

pub fn gravimetric_residual(track: &AoATrack, station: &GeodeticPosition, h: f64, earth: &EarthModel) -> Result<f64> {
    let v = mean_speed(track, station, h, earth)?;
    Ok(orbit_residual(v, h, earth))
}

/// `|v^2 (Re + h) - GM|`.
pub fn orbit_residual(v: f64, h: f64, earth: &EarthModel) -> f64 {
    (v * v * (earth.radius + h) - earth.gm).abs()
}

/// Residual at every grid height, in grid order.
pub fn residual_profile(
    track: &AoATrack,
    station: &GeodeticPosition,
    cfg: &HeightSearchConfig,
    earth: &EarthModel,
) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let hs = cfg.heights();
    let vals = crate::par::map_slice(&hs, |&h| gravimetric_residual(track, station, h, earth));
    hs.into_iter().zip(vals).map(|(h, r)| r.map(|r| (h, r))).collect()
}

/// Grid search for the height minimizing the gravimetric residual. Ties go to
/// the smaller height.
pub fn estimate_height(
    track: &AoATrack,
    station: &GeodeticPosition,
    cfg: &HeightSearchConfig,
    earth: &EarthModel,
) -> Result<RangeEstimate> {
    let profile = residual_profile(track, station, cfg, earth)?;
    let (mut best, mut lo, mut hi) = (0, f64::INFINITY, f64::NEG_INFINITY);
    for (i, &(_, r)) in profile.iter().enumerate() {
        if r < profile[best].1 {
            best = i;
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if !(hi > 0.0) || (hi - lo) / hi < FLAT_OBJECTIVE_SPREAD {
        return Err(Error::FlatObjective((hi - lo) / hi.max(f64::MIN_POSITIVE)));
    }
    let (h_star, residual) = profile[best];
    let r_track = track.valid_samples().map(|(_, _, el)| slant_range(el, h_star, station, earth)).collect();
    Ok(RangeEstimate { h_star, residual, r_track })
}
