//! Lobe disambiguation by Doppler rate. Each candidate track implies a range
//! history and hence a Doppler-rate profile; the candidate whose profile best
//! matches the measured one wins. Constant frequency offsets drop out of the
//! rate, so uncalibrated oscillators do not matter.

use crate::aoa::AoATrack;
use crate::error::{Error, Result};
use crate::geodesy::{
    az_el, ecef_offset_to_enu, ecef_to_eci, eci_to_ecef, geodetic_to_ecef, EarthModel, EcefVector, EciVector, GeodeticPosition, SPEED_OF_LIGHT,
};
use crate::poly::{self, Polynomial};
use crate::ranging::track_to_ecef;

pub const DOPPLER_FIT_DEGREE: usize = 3;
pub const MIN_FIT_SAMPLES: usize = 8;
/// Fitted samples must cover at least this fraction of the window.
const LOSS_POINTS: usize = 256;
pub const MIN_FIT_SPAN: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsarConfig {
    /// Candidates peaking below this elevation are discarded, rad.
    pub min_peak_elevation: f64,
    /// Largest allowed gap between candidate and measured peak times, s.
    pub timing_tolerance: f64,
    /// Timing tolerance used when the measured rate minimum is clamped to a
    /// window edge, s.
    pub clamped_timing_tolerance: f64,
    /// Slack on both filters for the cheap gate applied to smoothed tracks
    /// before ranging: elevation (rad) and time (s).
    pub gate_elevation_margin: f64,
    pub gate_time_margin: f64,
    /// Half-width and step of the local height refinement used when scoring
    /// a candidate, m. A zero span scores at the ranging height only.
    pub refine_span: f64,
    pub refine_step: f64,
}

impl Default for DsarConfig {
    fn default() -> Self {
        Self {
            min_peak_elevation: 30f64.to_radians(),
            timing_tolerance: 2.0,
            clamped_timing_tolerance: 4.0,
            gate_elevation_margin: 5f64.to_radians(),
            gate_time_margin: 3.0,
            refine_span: 6e3,
            refine_step: 0.5e3,
        }
    }
}

impl DsarConfig {
    fn tolerance(&self, measured: &DopplerFit) -> f64 {
        if measured.clamped {
            self.clamped_timing_tolerance
        } else {
            self.timing_tolerance
        }
    }
}

/// Cubic fit of a Doppler series and its analytic derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct DopplerFit {
    pub poly: Polynomial,
    pub rate: Polynomial,
    /// Time of the most negative Doppler rate within the window.
    pub t_maxel: f64,
    /// `t_maxel` sits on a window edge rather than at the rate minimum.
    pub clamped: bool,
    /// Timestamps of the samples used in the fit.
    pub times: Vec<f64>,
}

impl DopplerFit {
    pub fn rate_at(&self, t: f64) -> f64 {
        self.rate.eval(t)
    }
}

/// Least-squares cubic fit over samples that are `valid` and finite.
pub fn fit_doppler(times: &[f64], doppler: &[f64], valid: &[bool]) -> Result<DopplerFit> {
    let (t, y): (Vec<f64>, Vec<f64>) = (0..times.len())
        .filter(|&i| valid[i] && doppler[i].is_finite())
        .map(|i| (times[i], doppler[i]))
        .unzip();
    if t.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, got: t.len() });
    }
    let window = (times[0], times[times.len() - 1]);
    let span = t[t.len() - 1] - t[0];
    if span < MIN_FIT_SPAN * (window.1 - window.0) {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, got: t.len() });
    }
    let p = poly::fit(&t, &y, DOPPLER_FIT_DEGREE)?;
    let rate = p.derivative();
    let (t_maxel, clamped) = rate_minimum(&rate, window);
    Ok(DopplerFit { poly: p, rate, t_maxel, clamped, times: t })
}

/// Minimum of a quadratic over `[lo, hi]`, and whether it is on an edge.
fn rate_minimum(rate: &Polynomial, (lo, hi): (f64, f64)) -> (f64, bool) {
    let c = rate.raw_coeffs();
    let a2 = c.get(2).copied().unwrap_or(0.0);
    let a1 = c.get(1).copied().unwrap_or(0.0);
    if a2 > 0.0 {
        let v = rate.center - a1 / (2.0 * a2);
        if v >= lo && v <= hi {
            return (v, false);
        }
    }
    if rate.eval(lo) <= rate.eval(hi) {
        (lo, true)
    } else {
        (hi, true)
    }
}

/// Circular orbit arc in the inertial frame: radius, angular rate, and an
/// orthonormal pair spanning the orbit plane, `u` pointing at the satellite
/// at `t_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularArc {
    pub u: EciVector,
    pub w: EciVector,
    pub radius: f64,
    pub rate: f64,
    pub t_ref: f64,
}

impl CircularArc {
    pub fn position(&self, t: f64) -> EciVector {
        let (s, c) = (self.rate * (t - self.t_ref)).sin_cos();
        (self.u * c + self.w * s) * self.radius
    }

    pub fn velocity(&self, t: f64) -> EciVector {
        let (s, c) = (self.rate * (t - self.t_ref)).sin_cos();
        (self.w * c - self.u * s) * (self.radius * self.rate)
    }

    /// Range rate seen from a fixed site on the rotating Earth.
    pub fn range_rate(&self, t: f64, site: &EcefVector, earth: &EarthModel) -> f64 {
        let p = eci_to_ecef(&self.position(t), t, earth);
        let omega = earth.rotation_rate;
        let v = eci_to_ecef(&self.velocity(t), t, earth) - EcefVector::new(-omega * p.y, omega * p.x, 0.0);
        let d = p - *site;
        d.dot(&v) / d.norm()
    }
}

/// Least-squares circular orbit of radius `Re + h` through the ECI points
/// of a candidate track. The arc is linear in a cos/sin basis at the known
/// orbital rate; the fitted plane is then made orthonormal.
pub fn fit_circular_arc(track: &AoATrack, station: &GeodeticPosition, h: f64, earth: &EarthModel) -> Result<CircularArc> {
    let times: Vec<f64> = track.valid_samples().map(|s| s.0).collect();
    if times.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: times.len() });
    }
    let radius = earth.radius + h;
    let rate = (earth.gm / radius.powi(3)).sqrt();
    let t_ref = 0.5 * (times[0] + times[times.len() - 1]);
    let pts = track_to_ecef(track, station, h, earth);
    let (mut scc, mut scs, mut sss) = (0.0, 0.0, 0.0);
    let (mut bc, mut bs) = (EciVector::zero(), EciVector::zero());
    for (p, &t) in pts.iter().zip(&times) {
        let (s, c) = (rate * (t - t_ref)).sin_cos();
        let q = ecef_to_eci(p, t, earth);
        scc += c * c;
        scs += c * s;
        sss += s * s;
        bc += q * c;
        bs += q * s;
    }
    let det = scc * sss - scs * scs;
    if !(det.abs() > 1e-12 * scc * sss) {
        return Err(Error::InsufficientSamples { needed: 3, got: times.len() });
    }
    let a = (bc * sss - bs * scs) * (1.0 / det);
    let b = (bs * scc - bc * scs) * (1.0 / det);
    let u = a.unit();
    let w = (b - u * b.dot(&u)).unit();
    if !(u.is_finite() && w.is_finite()) {
        return Err(Error::InvalidInput("degenerate candidate trajectory".into()));
    }
    Ok(CircularArc { u, w, radius, rate, t_ref })
}

/// Doppler implied by a candidate track at height `h`, `-fc/c` times the
/// range rate of the circular arc fitted to the track, at every track time.
pub fn candidate_doppler(
    track: &AoATrack,
    station: &GeodeticPosition,
    h: f64,
    fc: f64,
    earth: &EarthModel,
) -> Result<Vec<f64>> {
    let arc = fit_circular_arc(track, station, h, earth)?;
    let site = geodetic_to_ecef(station, earth);
    Ok(track.times.iter().map(|&t| -fc / SPEED_OF_LIGHT * arc.range_rate(t, &site, earth)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateScore {
    pub ambiguity: (usize, usize),
    /// Sum of squared rate differences over measured timestamps, (Hz/s)^2.
    /// Infinite for candidates removed by a filter.
    pub loss: f64,
    pub passed_elevation_filter: bool,
    pub passed_timing_filter: bool,
}

impl CandidateScore {
    pub fn survived(&self) -> bool {
        self.passed_elevation_filter && self.passed_timing_filter
    }
}

/// Cheap gate applied before ranging, with the configured slack on both
/// filters. Peak elevation comes from the smoothed track; peak time from an
/// arc fitted at a rough height `h`, since a noisy track's own maximum
/// wanders by many seconds on flat high-orbit passes.
pub fn gate(
    track: &AoATrack,
    station: &GeodeticPosition,
    h: f64,
    measured: &DopplerFit,
    cfg: &DsarConfig,
    earth: &EarthModel,
) -> bool {
    let Some((_, el_peak)) = track.peak() else {
        return false;
    };
    if el_peak < cfg.min_peak_elevation - cfg.gate_elevation_margin {
        return false;
    }
    candidate_geometry(track, station, h, earth)
        .is_ok_and(|g| (g.t_peak - measured.t_maxel).abs() <= cfg.tolerance(measured) + cfg.gate_time_margin)
}

/// Orbit arc of a candidate and the peak of the elevation it implies over
/// the track times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateGeometry {
    pub arc: CircularArc,
    pub t_peak: f64,
    pub peak_elevation: f64,
}

pub fn candidate_geometry(track: &AoATrack, station: &GeodeticPosition, h: f64, earth: &EarthModel) -> Result<CandidateGeometry> {
    let arc = fit_circular_arc(track, station, h, earth)?;
    let site = geodetic_to_ecef(station, earth);
    let (mut t_peak, mut peak_elevation) = (f64::NAN, f64::NEG_INFINITY);
    for &t in &track.times {
        let d = eci_to_ecef(&arc.position(t), t, earth) - site;
        let el = az_el(&ecef_offset_to_enu(&d, station)).1;
        if el > peak_elevation {
            (t_peak, peak_elevation) = (t, el);
        }
    }
    Ok(CandidateGeometry { arc, t_peak, peak_elevation })
}

/// Elevation and timing filters on a candidate's geometry.
pub fn filters(geom: &CandidateGeometry, measured: &DopplerFit, cfg: &DsarConfig) -> (bool, bool) {
    (geom.peak_elevation >= cfg.min_peak_elevation, (geom.t_peak - measured.t_maxel).abs() <= cfg.tolerance(measured))
}

fn arc_loss(
    arc: &CircularArc,
    track: &AoATrack,
    site: &EcefVector,
    fc: f64,
    measured: &DopplerFit,
    earth: &EarthModel,
) -> Result<f64> {
    // The model Doppler is smooth, so a few hundred samples pin its cubic.
    let stride = track.times.len().div_ceil(LOSS_POINTS).max(1);
    let times: Vec<f64> = track.times.iter().step_by(stride).copied().collect();
    let valid: Vec<bool> = track.valid.iter().step_by(stride).copied().collect();
    let d: Vec<f64> = times.iter().map(|&t| -fc / SPEED_OF_LIGHT * arc.range_rate(t, site, earth)).collect();
    let fit = fit_doppler(&times, &d, &valid)?;
    Ok(measured.times.iter().map(|&t| (fit.rate_at(t) - measured.rate_at(t)).powi(2)).sum())
}

/// Rate-profile mismatch between a candidate at height `h` and the measured
/// fit, summed over the measured timestamps.
pub fn candidate_loss(
    track: &AoATrack,
    station: &GeodeticPosition,
    h: f64,
    fc: f64,
    measured: &DopplerFit,
    earth: &EarthModel,
) -> Result<f64> {
    let arc = fit_circular_arc(track, station, h, earth)?;
    arc_loss(&arc, track, &geodetic_to_ecef(station, earth), fc, measured, earth)
}

/// Smallest loss over heights within `cfg.refine_span` of `h`, and the
/// height attaining it (ties to the lower height).
pub fn refined_loss(
    track: &AoATrack,
    station: &GeodeticPosition,
    h: f64,
    fc: f64,
    measured: &DopplerFit,
    cfg: &DsarConfig,
    earth: &EarthModel,
) -> Result<(f64, f64)> {
    let steps = if cfg.refine_step > 0.0 { (cfg.refine_span / cfg.refine_step).floor() as i64 } else { 0 };
    let mut best = (f64::INFINITY, h);
    for m in -steps..=steps {
        let hh = h + m as f64 * cfg.refine_step;
        if hh <= station.alt() {
            continue;
        }
        let loss = candidate_loss(track, station, hh, fc, measured, earth)?;
        if loss < best.0 {
            best = (loss, hh);
        }
    }
    Ok(best)
}

/// Filters and scores one candidate at height `h`. Returns the score and,
/// for survivors, the height used for the loss.
pub fn score_candidate(
    track: &AoATrack,
    station: &GeodeticPosition,
    h: f64,
    fc: f64,
    measured: &DopplerFit,
    cfg: &DsarConfig,
    earth: &EarthModel,
) -> (CandidateScore, Option<f64>) {
    let mut score =
        CandidateScore { ambiguity: track.ambiguity, loss: f64::INFINITY, passed_elevation_filter: false, passed_timing_filter: false };
    let Ok(geom) = candidate_geometry(track, station, h, earth) else {
        return (score, None);
    };
    (score.passed_elevation_filter, score.passed_timing_filter) = filters(&geom, measured, cfg);
    if !score.survived() {
        return (score, None);
    }
    match refined_loss(track, station, h, fc, measured, cfg, earth) {
        Ok((loss, hh)) => {
            score.loss = loss;
            (score, Some(hh))
        }
        Err(_) => (score, None),
    }
}

/// Input for [`select_candidate`]: a smoothed candidate track and its height.
#[derive(Debug, Clone)]
pub struct RangedCandidate {
    pub track: AoATrack,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub winner: usize,
    pub scores: Vec<CandidateScore>,
    pub survivors: usize,
}

/// Filters candidates and returns the survivor with the smallest loss.
/// Ties go to the earlier candidate, so callers ordering by lobe index get
/// the smaller `(i, j)`.
pub fn select_candidate(
    candidates: &[RangedCandidate],
    station: &GeodeticPosition,
    measured: &DopplerFit,
    fc: f64,
    cfg: &DsarConfig,
    earth: &EarthModel,
) -> Result<Selection> {
    let scores: Vec<CandidateScore> =
        crate::par::map_slice(candidates, |c| score_candidate(&c.track, station, c.h, fc, measured, cfg, earth).0);
    pick(scores)
}

/// Winner among already-scored candidates.
pub fn pick(scores: Vec<CandidateScore>) -> Result<Selection> {
    let survivors = scores.iter().filter(|s| s.survived()).count();
    let winner = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.survived() && s.loss.is_finite())
        .fold(None::<(usize, f64)>, |best, (i, s)| match best {
            Some((_, l)) if l <= s.loss => best,
            _ => Some((i, s.loss)),
        });
    match winner {
        Some((w, _)) => Ok(Selection { winner: w, scores, survivors }),
        None => Err(Error::NoSurvivingCandidate { evaluated: scores.len() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbitsim::{observe_pass_between, orbit_for_pass, true_doppler, PassConfig, PassTruth};
    use proptest::prelude::*;

    const FC: f64 = 11.325e9;

    fn station() -> GeodeticPosition {
        GeodeticPosition::from_degrees(40.1, -88.2, 0.0).unwrap()
    }

    fn pass(peak: f64, right: bool) -> PassTruth {
        let e = EarthModel::default();
        let spec = orbit_for_pass(&station(), 0.0, 550e3, 53f64.to_radians(), true, peak.to_radians(), right, &e).unwrap();
        observe_pass_between(&spec, &station(), &PassConfig { dt: 0.05, ..Default::default() }, -400.0, 400.0, &e).unwrap()
    }

    fn track(truth: &PassTruth, az: Vec<f64>, el: Vec<f64>) -> AoATrack {
        AoATrack { times: truth.times.clone(), az, el, valid: vec![true; truth.len()], ambiguity: (1, 1) }
    }

    #[test]
    fn exact_cubic_and_offset_invariance() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.3 - 7.0).collect();
        let y: Vec<f64> = t.iter().map(|&x| 3.0 - 2.0 * x + 0.5 * x * x + 0.1 * x * x * x).collect();
        let valid = vec![true; t.len()];
        let f = fit_doppler(&t, &y, &valid).unwrap();
        for (&x, &v) in t.iter().zip(&y) {
            assert!((f.poly.eval(x) - v).abs() < 1e-6);
        }
        // rate 0.3 x^2 + x - 2 has its vertex at -1/0.6
        assert!((f.t_maxel + 1.0 / 0.6).abs() < 1e-9);
        assert!(!f.clamped);
        let shifted: Vec<f64> = y.iter().map(|v| v + 50e3).collect();
        let g = fit_doppler(&t, &shifted, &valid).unwrap();
        for &x in &t {
            assert!((f.rate_at(x) - g.rate_at(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn fit_preconditions() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y = vec![1.0; 100];
        let mut valid = vec![false; 100];
        for v in valid.iter_mut().take(7) {
            *v = true;
        }
        assert!(matches!(fit_doppler(&t, &y, &valid), Err(Error::InsufficientSamples { .. })));
        // enough samples but clustered in 20% of the window
        for v in valid.iter_mut().take(20) {
            *v = true;
        }
        assert!(matches!(fit_doppler(&t, &y, &valid), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn measured_peak_time_matches_truth() {
        for peak in [40.0, 65.0, 88.0] {
            let truth = pass(peak, true);
            let d = true_doppler(&truth, FC);
            let f = fit_doppler(&truth.times, &d, &vec![true; d.len()]).unwrap();
            assert!((f.t_maxel - truth.t_peak).abs() < 0.5, "peak {peak}: {} vs {}", f.t_maxel, truth.t_peak);
        }
    }

    #[test]
    fn candidate_doppler_follows_truth_and_scales_with_fc() {
        let e = EarthModel::default();
        let truth = pass(60.0, true);
        let tr = track(&truth, truth.az.clone(), truth.el.clone());
        let d = candidate_doppler(&tr, &station(), 550e3, FC, &e).unwrap();
        let td = true_doppler(&truth, FC);
        let p2p = td.iter().cloned().fold(f64::MIN, f64::max) - td.iter().cloned().fold(f64::MAX, f64::min);
        let rms = (d.iter().zip(&td).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / d.len() as f64).sqrt();
        assert!(rms < 0.05 * p2p, "rms {rms} p2p {p2p}");
        let d2 = candidate_doppler(&tr, &station(), 550e3, 2.0 * FC, &e).unwrap();
        for (a, b) in d.iter().zip(&d2) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn truth_beats_mirror_lobe() {
        let e = EarthModel::default();
        let truth = pass(60.0, true);
        let d = true_doppler(&truth, FC);
        let measured = fit_doppler(&truth.times, &d, &vec![true; d.len()]).unwrap();
        let good = track(&truth, truth.az.clone(), truth.el.clone());
        // mirror: same azimuth history, elevation pulled towards the horizon
        let mirror = track(&truth, truth.az.iter().map(|a| a + std::f64::consts::PI).collect(), truth.el.iter().map(|x| x * 0.8).collect());
        let lg = candidate_loss(&good, &station(), 550e3, FC, &measured, &e).unwrap();
        let lm = candidate_loss(&mirror, &station(), 550e3, FC, &measured, &e).unwrap();
        assert!(lg < lm, "{lg} vs {lm}");
        let cands = vec![RangedCandidate { track: mirror, h: 550e3 }, RangedCandidate { track: good, h: 550e3 }];
        let sel = select_candidate(&cands, &station(), &measured, FC, &DsarConfig::default(), &e).unwrap();
        assert_eq!(sel.winner, 1);
    }

    #[test]
    fn filters_and_single_survivor() {
        let e = EarthModel::default();
        let truth = pass(60.0, true);
        let d = true_doppler(&truth, FC);
        let measured = fit_doppler(&truth.times, &d, &vec![true; d.len()]).unwrap();
        let low = track(&truth, truth.az.clone(), vec![0.3; truth.len()]);
        // the same pass arriving a third of the window later
        let shift = |v: &[f64]| {
            let mut v = v.to_vec();
            v.rotate_right(truth.len() / 3);
            v
        };
        let late = track(&truth, shift(&truth.az), shift(&truth.el));
        let noisy: Vec<f64> = truth.el.iter().enumerate().map(|(i, e)| e + 0.01 * (i as f64).sin()).collect();
        let ok = track(&truth, truth.az.clone(), noisy);
        let cands = vec![
            RangedCandidate { track: low.clone(), h: 550e3 },
            RangedCandidate { track: late.clone(), h: 550e3 },
            RangedCandidate { track: ok, h: 550e3 },
        ];
        let sel = select_candidate(&cands, &station(), &measured, FC, &DsarConfig::default(), &e).unwrap();
        assert_eq!(sel.winner, 2);
        assert_eq!(sel.survivors, 1);
        assert!(!sel.scores[0].passed_elevation_filter);
        assert!(!sel.scores[1].passed_timing_filter);
        let none = vec![RangedCandidate { track: low, h: 550e3 }];
        assert!(matches!(
            select_candidate(&none, &station(), &measured, FC, &DsarConfig::default(), &e),
            Err(Error::NoSurvivingCandidate { evaluated: 1 })
        ));
    }

    #[test]
    fn arc_peak_matches_truth() {
        let e = EarthModel::default();
        for (peak, right) in [(35.0, true), (62.0, false), (87.0, true)] {
            let truth = pass(peak, right);
            let tr = track(&truth, truth.az.clone(), truth.el.clone());
            let g = candidate_geometry(&tr, &station(), 550e3, &e).unwrap();
            assert!((g.t_peak - truth.t_peak).abs() <= 0.05, "{peak}: {} vs {}", g.t_peak, truth.t_peak);
            assert!((g.peak_elevation - truth.peak_elevation).abs() < 1e-3);
            let d = true_doppler(&truth, FC);
            let measured = fit_doppler(&truth.times, &d, &vec![true; d.len()]).unwrap();
            assert!(gate(&tr, &station(), 700e3, &measured, &DsarConfig::default(), &e));
        }
    }

    #[test]
    fn refinement_never_raises_loss() {
        let e = EarthModel::default();
        let truth = pass(50.0, false);
        let d = true_doppler(&truth, FC);
        let measured = fit_doppler(&truth.times, &d, &vec![true; d.len()]).unwrap();
        let tr = track(&truth, truth.az.clone(), truth.el.clone());
        let cfg = DsarConfig::default();
        let at = candidate_loss(&tr, &station(), 556e3, FC, &measured, &e).unwrap();
        let (best, h) = refined_loss(&tr, &station(), 556e3, FC, &measured, &cfg, &e).unwrap();
        assert!(best <= at);
        assert!((h - 550e3).abs() <= 1e3, "{h}");
        let off = DsarConfig { refine_span: 0.0, ..cfg };
        assert_eq!(refined_loss(&tr, &station(), 556e3, FC, &measured, &off, &e).unwrap(), (at, 556e3));
    }

    #[test]
    fn ties_go_to_first() {
        let s = |i, loss| CandidateScore { ambiguity: (i, 1), loss, passed_elevation_filter: true, passed_timing_filter: true };
        let sel = pick(vec![s(1, 2.0), s(2, 1.0), s(3, 1.0)]).unwrap();
        assert_eq!(sel.winner, 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn offset_leaves_rates_unchanged(offset in -100e3f64..100e3) {
            let truth = pass(55.0, false);
            let d = true_doppler(&truth, FC);
            let valid = vec![true; d.len()];
            let a = fit_doppler(&truth.times, &d, &valid).unwrap();
            let shifted: Vec<f64> = d.iter().map(|v| v + offset).collect();
            let b = fit_doppler(&truth.times, &shifted, &valid).unwrap();
            for &t in &a.times {
                prop_assert!((a.rate_at(t) - b.rate_at(t)).abs() < 1e-6 * a.rate_at(t).abs().max(1.0));
            }
            prop_assert!((a.t_maxel - b.t_maxel).abs() < 1e-6);
        }
    }
}
