//! End-to-end localization of one pass: calibration, lobe candidates,
//! per-candidate ranging, Doppler-rate selection and trajectory output.

pub mod evaluate;
pub mod obsfile;
pub mod report;
pub mod scenario;
pub mod truthfile;

use std::f64::consts::PI;

use crate::aoa::{candidate_set, forward_phase, lobe_shifts, unwrap_observables, ArrayGeometry, LobeCandidate};
use crate::dsar::{fit_doppler, gate, pick, score_candidate, CandidateScore, DsarConfig, Selection};
use crate::error::{Error, Result};
use crate::geodesy::{enu_to_ecef_offset, geodetic_to_ecef, los_enu, wrap_pi, EarthModel, EcefVector, GeodeticPosition};
use crate::orbitsim::PassTruth;
use crate::ranging::{estimate_height, slant_range, HeightSearchConfig};
use crate::signalproc::PassObservables;

/// Receiver site: where it is, how the array is turned, and its geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStation {
    pub position: GeodeticPosition,
    /// Geometry including the array yaw.
    pub array: ArrayGeometry,
}

impl GroundStation {
    pub fn new(position: GeodeticPosition, array: ArrayGeometry) -> Self {
        Self { position, array }
    }

    pub fn yaw(&self) -> f64 {
        self.array.yaw()
    }
}

/// Constant receive-chain phase offsets, rad, in (-pi, pi].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOffsets {
    pub dphi01_offset: f64,
    pub dphi12_offset: f64,
    pub estimated_from: String,
}

impl CalibrationOffsets {
    pub fn zero() -> Self {
        Self { dphi01_offset: 0.0, dphi12_offset: 0.0, estimated_from: "none".into() }
    }
}

/// Circular mean of angles, rad.
pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut c, mut n) = (0.0, 0.0, 0usize);
    for a in angles {
        s += a.sin();
        c += a.cos();
        n += 1;
    }
    (n > 0 && (s != 0.0 || c != 0.0)).then(|| wrap_pi(s.atan2(c)))
}

/// Phase offsets of `obs` relative to the forward model of a known pass.
/// Truth phases are interpolated to the observation times; samples outside
/// the truth window are skipped.
pub fn calibrate(known: &PassTruth, obs: &PassObservables, gs: &GroundStation, label: &str) -> Result<CalibrationOffsets> {
    const MIN_OVERLAP: usize = 3;
    if known.len() < 2 {
        return Err(Error::InsufficientOverlap(0));
    }
    let fwd: Vec<(f64, f64)> = known.az.iter().zip(&known.el).map(|(&a, &e)| forward_phase(a, e, &gs.array)).collect();
    let (mut d01, mut d12) = (Vec::new(), Vec::new());
    let (t_lo, t_hi) = (known.times[0], known.times[known.len() - 1]);
    for i in 0..obs.len() {
        let t = obs.times[i];
        if !obs.valid[i] || t < t_lo || t > t_hi {
            continue;
        }
        let k = known.times.partition_point(|&x| x <= t).clamp(1, known.len() - 1);
        let w = (t - known.times[k - 1]) / (known.times[k] - known.times[k - 1]);
        // interpolate along the shorter arc so wrapped phases blend correctly
        let blend = |a: f64, b: f64| a + w * wrap_pi(b - a);
        d01.push(wrap_pi(obs.dphi01[i] - blend(fwd[k - 1].0, fwd[k].0)));
        d12.push(wrap_pi(obs.dphi12[i] - blend(fwd[k - 1].1, fwd[k].1)));
    }
    if d01.len() < MIN_OVERLAP {
        return Err(Error::InsufficientOverlap(d01.len()));
    }
    let m01 = circular_mean(d01.iter().copied()).ok_or(Error::InsufficientOverlap(d01.len()))?;
    let m12 = circular_mean(d12.iter().copied()).ok_or(Error::InsufficientOverlap(d12.len()))?;
    Ok(CalibrationOffsets { dphi01_offset: m01, dphi12_offset: m12, estimated_from: label.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeConfig {
    pub fc: f64,
    pub height_search: HeightSearchConfig,
    pub dsar: DsarConfig,
    /// Degree of the polynomial smoothing applied to phase tracks before
    /// differentiation.
    pub smoothing_degree: usize,
    /// Approximate number of samples kept for ranging.
    pub ranging_points: usize,
    pub earth: EarthModel,
}

impl Default for LocalizeConfig {
    fn default() -> Self {
        Self {
            fc: 11.325e9,
            height_search: HeightSearchConfig::default(),
            dsar: DsarConfig::default(),
            smoothing_degree: 3,
            ranging_points: 150,
            earth: EarthModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDiagnostic {
    pub score: CandidateScore,
    /// Estimated height for candidates that reached ranging, m.
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult {
    pub winner: (usize, usize),
    /// Valid samples of the winning track.
    pub times: Vec<f64>,
    pub az: Vec<f64>,
    pub el: Vec<f64>,
    pub h_star: f64,
    pub r_track: Vec<f64>,
    pub trajectory: Vec<EcefVector>,
    pub residual: f64,
    pub survivors: usize,
    pub candidates: Vec<CandidateDiagnostic>,
}

fn rank_candidate(
    c: &LobeCandidate,
    measured: &crate::dsar::DopplerFit,
    gs: &GroundStation,
    cfg: &LocalizeConfig,
    stride: usize,
    unambiguous: bool,
) -> (CandidateScore, Option<(f64, f64)>) {
    let rejected =
        CandidateScore { ambiguity: c.ambiguity, loss: f64::INFINITY, passed_elevation_filter: false, passed_timing_filter: false };
    let coarse = c.smooth.decimated(stride);
    // A tenfold coarser height grid is enough to place the arc for gating.
    let rough = HeightSearchConfig { step: cfg.height_search.step * 10.0, ..cfg.height_search };
    let Ok(h_rough) = estimate_height(&coarse, &gs.position, &rough, &cfg.earth) else {
        return (rejected, None);
    };
    if !unambiguous && !gate(&coarse, &gs.position, h_rough.h_star, measured, &cfg.dsar, &cfg.earth) {
        return (rejected, None);
    }
    let Ok(est) = estimate_height(&coarse, &gs.position, &cfg.height_search, &cfg.earth) else {
        return (rejected, None);
    };
    let (score, h) = score_candidate(&c.raw, &gs.position, est.h_star, cfg.fc, measured, &cfg.dsar, &cfg.earth);
    let keep = h.is_some() || unambiguous;
    (score, keep.then_some((est.h_star, est.residual)))
}

/// Localizes one pass. `obs` carries raw (uncalibrated) phases; `cal` is
/// removed first.
pub fn localize(
    obs: &PassObservables,
    gs: &GroundStation,
    cal: &CalibrationOffsets,
    cfg: &LocalizeConfig,
) -> Result<LocalizationResult> {
    obs.validate()?;
    let mut o = obs.clone();
    o.remove_phase_offsets(cal.dphi01_offset, cal.dphi12_offset);
    let measured = fit_doppler(&o.times, &o.doppler, &o.valid)?;
    let cands = candidate_set(&o, &gs.array, cfg.smoothing_degree)?;
    let stride = (o.valid_count() / cfg.ranging_points.max(3)).max(1);
    // With a single lobe there is nothing to disambiguate, and the filters
    // could only discard the answer.
    let unambiguous = cands.len() == 1;
    let ranked = crate::par::map_slice(&cands, |c| rank_candidate(c, &measured, gs, cfg, stride, unambiguous));
    let scores: Vec<CandidateScore> = ranked.iter().map(|r| r.0).collect();
    let sel = match ranked.as_slice() {
        [(_, Some(_))] => Selection { winner: 0, survivors: 1, scores },
        _ => pick(scores)?,
    };
    let win = &cands[sel.winner];
    let (h_star, residual) = ranked[sel.winner].1.expect("survivors carry a height");
    let raw = win.raw.compacted();
    let r_track: Vec<f64> = raw.el.iter().map(|&e| slant_range(e, h_star, &gs.position, &cfg.earth)).collect();
    let gs_ecef = geodetic_to_ecef(&gs.position, &cfg.earth);
    let trajectory = raw
        .az
        .iter()
        .zip(&raw.el)
        .zip(&r_track)
        .map(|((&a, &e), &r)| gs_ecef + enu_to_ecef_offset(&los_enu(a, e), &gs.position) * r)
        .collect();
    Ok(LocalizationResult {
        winner: win.ambiguity,
        times: raw.times,
        az: raw.az,
        el: raw.el,
        h_star,
        r_track,
        trajectory,
        residual,
        survivors: sel.survivors,
        candidates: sel
            .scores
            .iter()
            .zip(&ranked)
            .map(|(s, r)| CandidateDiagnostic { score: *s, h: r.1.map(|x| x.0) })
            .collect(),
    })
}

/// Lobe index whose shifts carry the calibrated observables onto the
/// noiseless phases of the true direction at the track anchor (the first
/// valid sample). `truth_at` maps a time to the true (azimuth, elevation).
pub fn true_lobe(
    obs: &PassObservables,
    cal: &CalibrationOffsets,
    truth_at: impl Fn(f64) -> (f64, f64),
    array: &ArrayGeometry,
) -> Option<(usize, usize)> {
    let mut o = obs.clone();
    o.remove_phase_offsets(cal.dphi01_offset, cal.dphi12_offset);
    let p = unwrap_observables(&o).ok()?;
    let a = p.anchor;
    let (az, el) = truth_at(p.times[a]);
    let (t01, t12) = forward_phase(az, el, array);
    let find = |w: f64, target: f64| {
        lobe_shifts(w, array.k()).iter().position(|s| (w + s - target).abs() < PI).map(|i| i + 1)
    };
    Some((find(p.dphi01[a], t01)?, find(p.dphi12[a], t12)?))
}

/// Angle between two pointing directions given as (azimuth, elevation), deg.
pub fn angle_error_3d(est: (f64, f64), truth: (f64, f64)) -> f64 {
    let a = los_enu(est.0, est.1);
    let b = los_enu(truth.0, truth.1);
    // atan2 form stays accurate for tiny angles where acos loses precision
    a.cross(&b).norm().atan2(a.dot(&b)).to_degrees()
}

/// Absolute azimuth difference, deg, in [0, 180].
pub fn azimuth_error(est: f64, truth: f64) -> f64 {
    wrap_pi(est - truth).abs().to_degrees()
}
