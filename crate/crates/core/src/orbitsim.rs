//! Circular-orbit pass generator. Produces the ground-truth satellite states
//! and geometry every estimator is checked against.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Result};
use crate::geodesy::{
    az_el, ecef_offset_to_enu, ecef_to_eci, eci_to_ecef, geodetic_to_ecef, EarthModel, EcefVector, EciVector,
    GeodeticPosition, SPEED_OF_LIGHT,
};

pub const MIN_LEO_HEIGHT: f64 = 200e3;
pub const MAX_LEO_HEIGHT: f64 = 2000e3;

/// Circular orbit. Angles in radians, `epoch` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSpec {
    pub height: f64,
    pub inclination: f64,
    pub raan: f64,
    /// Argument of latitude at `epoch`.
    pub anomaly0: f64,
    pub epoch: f64,
}

impl OrbitSpec {
    pub fn new(height: f64, inclination: f64, raan: f64, anomaly0: f64, epoch: f64) -> Result<Self> {
        let s = Self { height, inclination, raan, anomaly0, epoch };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_LEO_HEIGHT..=MAX_LEO_HEIGHT).contains(&self.height) {
            return Err(Error::InvalidInput(format!("orbit height {} m outside the LEO range", self.height)));
        }
        if ![self.inclination, self.raan, self.anomaly0, self.epoch].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("orbit angles must be finite".into()));
        }
        Ok(())
    }

    pub fn radius(&self, earth: &EarthModel) -> f64 {
        earth.radius + self.height
    }

    /// Mean motion sqrt(GM / R^3), rad/s.
    pub fn mean_motion(&self, earth: &EarthModel) -> f64 {
        (earth.gm / self.radius(earth).powi(3)).sqrt()
    }

    pub fn period(&self, earth: &EarthModel) -> f64 {
        TAU / self.mean_motion(earth)
    }

    /// ECI position and velocity at `t`.
    pub fn state(&self, t: f64, earth: &EarthModel) -> (EciVector, EciVector) {
        let r = self.radius(earth);
        let n = self.mean_motion(earth);
        let u = self.anomaly0 + n * (t - self.epoch);
        let (su, cu) = u.sin_cos();
        let (so, co) = self.raan.sin_cos();
        let (si, ci) = self.inclination.sin_cos();
        let pos = EciVector::new(co * cu - so * su * ci, so * cu + co * su * ci, su * si) * r;
        let vel = EciVector::new(-co * su - so * cu * ci, -so * su + co * cu * ci, cu * si) * (r * n);
        (pos, vel)
    }

    /// Circular orbit at `height` whose sub-satellite point is `target` at
    /// time `t`. `ascending` picks the northbound crossing.
    pub fn through_point(
        target: &GeodeticPosition,
        t: f64,
        height: f64,
        inclination: f64,
        ascending: bool,
        earth: &EarthModel,
    ) -> Result<Self> {
        let p = ecef_to_eci(&geodetic_to_ecef(target, earth), t, earth).unit();
        let si = inclination.sin();
        let s = p.z / si;
        if !(s.abs() <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "latitude {:.3} deg unreachable at inclination {:.3} deg",
                target.lat().to_degrees(),
                inclination.to_degrees()
            )));
        }
        let u = if ascending { s.asin() } else { std::f64::consts::PI - s.asin() };
        let alpha = p.y.atan2(p.x);
        let raan = alpha - (inclination.cos() * u.sin()).atan2(u.cos());
        let spec = Self { height, inclination, raan, anomaly0: u, epoch: t };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn propagate_circular(spec: &OrbitSpec, times: &[f64], earth: &EarthModel) -> Vec<EciVector> {
    times.iter().map(|&t| spec.state(t, earth).0).collect()
}

/// Sampling of one observed pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassConfig {
    pub dt: f64,
    pub duration: f64,
    pub elevation_mask: f64,
}

impl Default for PassConfig {
    fn default() -> Self {
        Self { dt: 0.007, duration: 15.0, elevation_mask: 30f64.to_radians() }
    }
}

/// Ground-truth geometry of one pass as seen from a station.
#[derive(Debug, Clone, PartialEq)]
pub struct PassTruth {
    pub times: Vec<f64>,
    pub sat_eci: Vec<EciVector>,
    pub sat_ecef: Vec<EcefVector>,
    pub az: Vec<f64>,
    pub el: Vec<f64>,
    pub range: Vec<f64>,
    pub range_rate: Vec<f64>,
    /// Time of peak elevation (may fall between samples).
    pub t_peak: f64,
    pub peak_elevation: f64,
}

impl PassTruth {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Instantaneous geometry of a satellite relative to a station.
#[derive(Debug, Clone, Copy)]
pub struct LookAngles {
    pub eci: EciVector,
    pub ecef: EcefVector,
    pub az: f64,
    pub el: f64,
    pub range: f64,
    pub range_rate: f64,
}

pub fn look(spec: &OrbitSpec, station: &GeodeticPosition, t: f64, earth: &EarthModel) -> LookAngles {
    let (pos, vel) = spec.state(t, earth);
    let ecef = eci_to_ecef(&pos, t, earth);
    // d/dt of the rotated position: rotated ECI velocity minus omega x r
    let omega = earth.rotation_rate;
    let v_ecef = eci_to_ecef(&vel, t, earth) - EcefVector::new(-omega * ecef.y, omega * ecef.x, 0.0);
    let d = ecef - geodetic_to_ecef(station, earth);
    let range = d.norm();
    let (az, el) = az_el(&ecef_offset_to_enu(&d, station));
    LookAngles { eci: pos, ecef, az, el, range, range_rate: d.dot(&v_ecef) / range }
}

/// Finds the highest-elevation instant within `[t_lo, t_hi]`.
pub fn find_peak(spec: &OrbitSpec, station: &GeodeticPosition, t_lo: f64, t_hi: f64, earth: &EarthModel) -> (f64, f64) {
    let el = |t: f64| look(spec, station, t, earth).el;
    let step = 2.0;
    let mut best = (t_lo, el(t_lo));
    let mut t = t_lo;
    while t <= t_hi {
        let e = el(t);
        if e > best.1 {
            best = (t, e);
        }
        t += step;
    }
    // golden-section refinement around the coarse maximum
    let (mut a, mut b) = ((best.0 - step).max(t_lo), (best.0 + step).min(t_hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (el(c), el(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = el(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = el(d);
        }
    }
    let tp = 0.5 * (a + b);
    (tp, el(tp))
}

/// Samples a pass window of `cfg.duration` centered on the peak elevation
/// found within `[t_lo, t_hi]`, keeping the contiguous run of samples above
/// the elevation mask.
pub fn observe_pass_between(
    spec: &OrbitSpec,
    station: &GeodeticPosition,
    cfg: &PassConfig,
    t_lo: f64,
    t_hi: f64,
    earth: &EarthModel,
) -> Result<PassTruth> {
    if !(cfg.dt > 0.0 && cfg.duration > 0.0) {
        return Err(Error::InvalidInput(format!("pass dt {} and duration {} must be positive", cfg.dt, cfg.duration)));
    }
    let (t_peak, peak) = find_peak(spec, station, t_lo, t_hi, earth);
    if peak <= cfg.elevation_mask {
        return Err(Error::NoPassFound { peak_deg: peak.to_degrees(), mask_deg: cfg.elevation_mask.to_degrees() });
    }
    let half = (0.5 * cfg.duration / cfg.dt).round() as i64;
    let samples: Vec<(f64, LookAngles)> = (-half..=half)
        .map(|m| {
            let t = t_peak + m as f64 * cfg.dt;
            (t, look(spec, station, t, earth))
        })
        .collect();
    let center = half as usize;
    let above = |i: usize| samples[i].1.el > cfg.elevation_mask;
    let mut lo = center;
    while lo > 0 && above(lo - 1) {
        lo -= 1;
    }
    let mut hi = center;
    while hi + 1 < samples.len() && above(hi + 1) {
        hi += 1;
    }
    if hi - lo + 1 < 3 {
        return Err(Error::NoPassFound { peak_deg: peak.to_degrees(), mask_deg: cfg.elevation_mask.to_degrees() });
    }
    let kept = &samples[lo..=hi];
    Ok(PassTruth {
        times: kept.iter().map(|s| s.0).collect(),
        sat_eci: kept.iter().map(|s| s.1.eci).collect(),
        sat_ecef: kept.iter().map(|s| s.1.ecef).collect(),
        az: kept.iter().map(|s| s.1.az).collect(),
        el: kept.iter().map(|s| s.1.el).collect(),
        range: kept.iter().map(|s| s.1.range).collect(),
        range_rate: kept.iter().map(|s| s.1.range_rate).collect(),
        t_peak,
        peak_elevation: peak,
    })
}

/// Pass over one orbital period starting at the orbit epoch.
pub fn observe_pass(spec: &OrbitSpec, station: &GeodeticPosition, cfg: &PassConfig, earth: &EarthModel) -> Result<PassTruth> {
    observe_pass_between(spec, station, cfg, spec.epoch, spec.epoch + spec.period(earth), earth)
}

/// Doppler shift `-fc / c * range_rate` at every truth sample.
pub fn true_doppler(truth: &PassTruth, fc: f64) -> Vec<f64> {
    truth.range_rate.iter().map(|&rr| -fc / SPEED_OF_LIGHT * rr).collect()
}

/// Central angle between the sub-satellite point and the station at which a
/// satellite at `height` appears at elevation `el`.
pub fn central_angle_for_elevation(el: f64, height: f64, earth: &EarthModel) -> f64 {
    let ratio = earth.radius / (earth.radius + height);
    (ratio * el.cos()).acos() - el
}

/// Point at angular distance `angle` from `from` along initial bearing
/// `bearing` (from north towards east) on the sphere.
pub fn destination(from: &GeodeticPosition, bearing: f64, angle: f64) -> Result<GeodeticPosition> {
    let (slat, clat) = from.lat().sin_cos();
    let (sa, ca) = angle.sin_cos();
    let lat = (slat * ca + clat * sa * bearing.cos()).clamp(-1.0, 1.0).asin();
    let lon = from.lon() + (bearing.sin() * sa * clat).atan2(ca - slat * lat.sin());
    GeodeticPosition::new(lat.clamp(-FRAC_PI_2, FRAC_PI_2), lon, 0.0)
}

/// Orbit whose pass over `station` peaks near `peak_el` at about time `t`.
/// The ground track is first routed through the station, then shifted
/// sideways (to the `right` of the track or not) by the central angle that
/// yields `peak_el`.
pub fn orbit_for_pass(
    station: &GeodeticPosition,
    t: f64,
    height: f64,
    inclination: f64,
    ascending: bool,
    peak_el: f64,
    right: bool,
    earth: &EarthModel,
) -> Result<OrbitSpec> {
    let ground = GeodeticPosition::new(station.lat(), station.lon(), 0.0)?;
    let through = OrbitSpec::through_point(&ground, t, height, inclination, ascending, earth)?;
    let l = look(&through, &ground, t, earth);
    let l2 = look(&through, &ground, t + 1.0, earth);
    let heading = crate::geodesy::az_el(&ecef_offset_to_enu(&(l2.ecef - l.ecef), &ground)).0;
    let beta = central_angle_for_elevation(peak_el, height, earth);
    let side = if right { FRAC_PI_2 } else { -FRAC_PI_2 };
    let target = destination(&ground, heading + side, beta)?;
    OrbitSpec::through_point(&target, t, height, inclination, ascending, earth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::slant_range_from_height;

    fn earth() -> EarthModel {
        EarthModel::default()
    }

    #[test]
    fn circular_speed_and_radius() {
        let e = earth();
        let spec = OrbitSpec::new(550e3, 53f64.to_radians(), 0.3, 1.0, 0.0).unwrap();
        // independent: sqrt(GM / R) with R = 6921 km
        let v = (3.986004418e14f64 / 6_921_000.0).sqrt();
        assert!((v / 1e3 - 7.589).abs() < 1e-3, "{v}");
        for t in [0.0, 100.0, 1234.5, -50.0] {
            let (p, vel) = spec.state(t, &e);
            assert!((p.norm() - 6_921_000.0).abs() < 1e-6);
            assert!((vel.norm() - v).abs() < 1e-6);
            // position and velocity stay perpendicular on a circle
            assert!(p.dot(&vel).abs() < 1e-3 * p.norm());
            let residual = vel.norm().powi(2) * p.norm() - e.gm;
            assert!(residual.abs() < 1e-9 * e.gm);
        }
    }

    #[test]
    fn full_period_returns() {
        let e = earth();
        let spec = OrbitSpec::new(800e3, 1.2, 2.0, 0.5, 10.0).unwrap();
        let p = propagate_circular(&spec, &[10.0, 10.0 + spec.period(&e)], &e);
        assert!((p[0] - p[1]).norm() < 1e-3);
    }

    #[test]
    fn velocity_matches_finite_difference() {
        let e = earth();
        let spec = OrbitSpec::new(600e3, 1.0, 0.2, 0.1, 0.0).unwrap();
        let h = 1e-3;
        let (_, v) = spec.state(5.0, &e);
        let fd = (spec.state(5.0 + h, &e).0 - spec.state(5.0 - h, &e).0) * (0.5 / h);
        assert!((fd - v).norm() < 1e-3);
    }

    #[test]
    fn rejects_non_leo() {
        assert!(OrbitSpec::new(100e3, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(OrbitSpec::new(3000e3, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn overhead_pass_geometry() {
        let e = earth();
        let gs = GeodeticPosition::from_degrees(40.1, -88.2, 0.0).unwrap();
        let spec = OrbitSpec::through_point(&gs, 100.0, 550e3, 53f64.to_radians(), true, &e).unwrap();
        let l = look(&spec, &gs, 100.0, &e);
        assert!((l.el.to_degrees() - 90.0).abs() < 1e-6);
        assert!((l.range - slant_range_from_height(FRAC_PI_2, 550e3, &e)).abs() < 1e-3);
        let truth = observe_pass_between(&spec, &gs, &PassConfig::default(), 0.0, 200.0, &e).unwrap();
        assert!(truth.peak_elevation.to_degrees() > 89.99);
        // closest approach: range rate vanishes at the sample nearest the peak
        let mid = truth.times.iter().enumerate().min_by(|a, b| (a.1 - truth.t_peak).abs().total_cmp(&(b.1 - truth.t_peak).abs())).unwrap().0;
        assert!(truth.range_rate[mid].abs() < 1.0 + 7600.0 * 0.0035);
        for i in 0..truth.len() {
            if truth.times[i] < truth.t_peak - 0.01 {
                assert!(truth.range_rate[i] < 0.0);
            }
            if truth.times[i] > truth.t_peak + 0.01 {
                assert!(truth.range_rate[i] > 0.0);
            }
        }
    }

    #[test]
    fn range_rate_is_derivative_of_range() {
        let e = earth();
        let gs = GeodeticPosition::from_degrees(10.0, 20.0, 300.0).unwrap();
        let spec = orbit_for_pass(&gs, 50.0, 700e3, 70f64.to_radians(), false, 60f64.to_radians(), true, &e).unwrap();
        let h = 1e-3;
        for t in [40.0, 50.0, 55.0] {
            let fd = (look(&spec, &gs, t + h, &e).range - look(&spec, &gs, t - h, &e).range) / (2.0 * h);
            assert!((fd - look(&spec, &gs, t, &e).range_rate).abs() < 1e-3);
        }
    }

    #[test]
    fn requested_peak_elevation_is_close() {
        let e = earth();
        let gs = GeodeticPosition::from_degrees(40.1, -88.2, 200.0).unwrap();
        for (peak, asc, right) in [(45.0, true, true), (70.0, false, true), (85.0, true, false)] {
            let spec = orbit_for_pass(&gs, 0.0, 550e3, 53f64.to_radians(), asc, f64::to_radians(peak), right, &e).unwrap();
            let truth = observe_pass_between(&spec, &gs, &PassConfig::default(), -300.0, 300.0, &e).unwrap();
            assert!((truth.peak_elevation.to_degrees() - peak).abs() < 1.5, "{} vs {peak}", truth.peak_elevation.to_degrees());
            assert!(truth.t_peak.abs() < 30.0);
        }
    }

    #[test]
    fn doppler_sign_and_scale() {
        let e = earth();
        let gs = GeodeticPosition::from_degrees(40.1, -88.2, 0.0).unwrap();
        let spec = orbit_for_pass(&gs, 0.0, 550e3, 53f64.to_radians(), true, 60f64.to_radians(), true, &e).unwrap();
        let truth = observe_pass_between(&spec, &gs, &PassConfig::default(), -300.0, 300.0, &e).unwrap();
        let fd = true_doppler(&truth, 11.325e9);
        for i in 0..truth.len() {
            if truth.range_rate[i] < 0.0 {
                assert!(fd[i] > 0.0);
            } else if truth.range_rate[i] > 0.0 {
                assert!(fd[i] < 0.0);
            }
        }
        // -fc/c * rr for rr = -7000 m/s
        let one = PassTruth { range_rate: vec![-7000.0, 0.0], ..truth.clone() };
        let d = true_doppler(&one, 11.325e9);
        assert!((d[0] - 11.325e9 * 7000.0 / 299_792_458.0).abs() < 1e-6, "{}", d[0]);
        assert!((d[0] - 264_430.0).abs() < 5.0);
        assert_eq!(d[1], 0.0);
        // zero crossing coincides with the peak-elevation time
        let cross = (1..fd.len()).find(|&i| fd[i - 1] > 0.0 && fd[i] <= 0.0).unwrap();
        assert!((truth.times[cross] - truth.t_peak).abs() <= PassConfig::default().dt + 0.05);
    }

    #[test]
    fn no_pass_when_mask_too_high() {
        let e = earth();
        let gs = GeodeticPosition::from_degrees(40.1, -88.2, 0.0).unwrap();
        let spec = orbit_for_pass(&gs, 0.0, 550e3, 53f64.to_radians(), true, 35f64.to_radians(), true, &e).unwrap();
        let cfg = PassConfig { elevation_mask: 60f64.to_radians(), ..Default::default() };
        assert!(matches!(observe_pass_between(&spec, &gs, &cfg, -300.0, 300.0, &e), Err(Error::NoPassFound { .. })));
    }
}
