//! Angle of arrival from the L-array phase differences, and grating-lobe
//! candidate enumeration for sparse spacings.
//!
//! Array convention: RX1 sits at the origin, RX0-RX1 and RX1-RX2 are the two
//! orthogonal baselines, each of length `d`. In the array frame the far-field
//! phase differences of a source at azimuth `psi` / elevation `theta` are
//!
//! ```text
//! dphi01 = -(2 pi d / lambda) cos(theta) sin(psi)
//! dphi12 = -(2 pi d / lambda) cos(theta) cos(psi)
//! ```
//!
//! and the array frame is rotated by `yaw` relative to north.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geodesy::{wrap_pi, wrap_two_pi};
use crate::poly;
use crate::signalproc::PassObservables;

/// Tolerance on the arccos argument before a phase pair is rejected.
pub const ELEVATION_EPS: f64 = 1e-9;

/// Fraction of present samples a candidate track must keep valid.
pub const MIN_TRACK_VALIDITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    spacing: f64,
    wavelength: f64,
    yaw: f64,
    k: usize,
}

impl ArrayGeometry {
    /// `spacing` and `wavelength` in meters; `2 * spacing / wavelength` must be
    /// a positive integer.
    pub fn new(spacing: f64, wavelength: f64, yaw: f64) -> Result<Self> {
        if !(spacing > 0.0 && wavelength > 0.0) || !yaw.is_finite() {
            return Err(Error::InvalidInput(format!(
                "array spacing {spacing} and wavelength {wavelength} must be positive, yaw finite"
            )));
        }
        let ratio = 2.0 * spacing / wavelength;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-6 * k {
            return Err(Error::InvalidInput(format!(
                "spacing must be a whole number of half wavelengths (2d/lambda = {ratio})"
            )));
        }
        Ok(Self { spacing, wavelength, yaw, k: k as usize })
    }

    /// Array with `d = k * lambda / 2`.
    pub fn sparse(k: usize, wavelength: f64, yaw: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        Self::new(k as f64 * wavelength / 2.0, wavelength, yaw)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn yaw(&self) -> f64 {
        self.yaw
    }
    /// Number of one-dimensional ambiguities, `2d / lambda`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn with_yaw(self, yaw: f64) -> Self {
        Self { yaw, ..self }
    }

    /// Same wavelength and yaw, spacing `k * lambda / 2`.
    pub fn with_k(self, k: usize) -> Result<Self> {
        Self::sparse(k, self.wavelength, self.yaw)
    }

    /// `2 pi d / lambda`: phase span per unit direction cosine.
    pub fn phase_scale(&self) -> f64 {
        TAU * self.spacing / self.wavelength
    }
}

/// Unwrapped phase differences a source at (`az`, `el`) produces on `array`.
pub fn forward_phase(az: f64, el: f64, array: &ArrayGeometry) -> (f64, f64) {
    let psi = az - array.yaw;
    let a = -array.phase_scale() * el.cos();
    (a * psi.sin(), a * psi.cos())
}

/// Azimuth (north-referenced, [0, 2pi)) and elevation for one phase pair.
pub fn aoa_from_phase(dphi01: f64, dphi12: f64, array: &ArrayGeometry) -> Result<(f64, f64)> {
    let arg = dphi01.hypot(dphi12) / array.phase_scale();
    if !(arg <= 1.0 + ELEVATION_EPS) {
        return Err(Error::InvalidElevation(arg));
    }
    let el = arg.min(1.0).acos();
    let psi = if dphi01 == 0.0 && dphi12 == 0.0 { 0.0 } else { (-dphi01).atan2(-dphi12) };
    Ok((wrap_two_pi(psi + array.yaw), el))
}

/// One grating-lobe hypothesis for a single phase pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCandidate {
    /// Ambiguity indices, each in `1..=k`.
    pub i: usize,
    pub j: usize,
    pub dphi01: f64,
    pub dphi12: f64,
}

/// The `k` whole-cycle shifts `2 pi n` that bring a wrapped phase `w` onto
/// every physically reachable value in `[-k pi, k pi]`, in increasing order.
pub fn lobe_shifts(w: f64, k: usize) -> Vec<f64> {
    let kf = k as f64;
    let n_min = ((-kf * PI - w) / TAU).ceil();
    (0..k).map(|m| TAU * (n_min + m as f64)).collect()
}

/// All `k^2` unwrapped phase pairs consistent with the wrapped measurements.
pub fn enumerate_candidates(dphi01: f64, dphi12: f64, array: &ArrayGeometry) -> Vec<PhaseCandidate> {
    let k = array.k();
    let s01 = lobe_shifts(dphi01, k);
    let s12 = lobe_shifts(dphi12, k);
    let mut out = Vec::with_capacity(k * k);
    for (i, a) in s01.iter().enumerate() {
        for (j, b) in s12.iter().enumerate() {
            out.push(PhaseCandidate { i: i + 1, j: j + 1, dphi01: dphi01 + a, dphi12: dphi12 + b });
        }
    }
    out
}

/// Azimuth/elevation track of one lobe hypothesis. Samples that are missing
/// or geometrically infeasible carry `valid = false` and NaN angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AoATrack {
    pub times: Vec<f64>,
    pub az: Vec<f64>,
    pub el: Vec<f64>,
    pub valid: Vec<bool>,
    pub ambiguity: (usize, usize),
}

impl AoATrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Iterator over `(t, az, el)` of valid samples.
    pub fn valid_samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.len()).filter(|&i| self.valid[i]).map(move |i| (self.times[i], self.az[i], self.el[i]))
    }

    /// Valid samples only, as a dense track.
    pub fn compacted(&self) -> AoATrack {
        let mut out = AoATrack {
            times: Vec::new(),
            az: Vec::new(),
            el: Vec::new(),
            valid: Vec::new(),
            ambiguity: self.ambiguity,
        };
        for (t, a, e) in self.valid_samples() {
            out.times.push(t);
            out.az.push(a);
            out.el.push(e);
            out.valid.push(true);
        }
        out
    }

    /// Every `stride`-th valid sample.
    pub fn decimated(&self, stride: usize) -> AoATrack {
        let c = self.compacted();
        let keep = |v: &Vec<f64>| v.iter().step_by(stride.max(1)).copied().collect::<Vec<_>>();
        AoATrack {
            times: keep(&c.times),
            az: keep(&c.az),
            el: keep(&c.el),
            valid: vec![true; c.times.iter().step_by(stride.max(1)).count()],
            ambiguity: c.ambiguity,
        }
    }

    /// Maximum elevation over valid samples and the time it occurs.
    pub fn peak(&self) -> Option<(f64, f64)> {
        self.valid_samples().fold(None, |best, (t, _, e)| match best {
            Some((_, be)) if be >= e => best,
            _ => Some((t, e)),
        })
    }
}

/// Phase differences unwrapped along time. Missing samples are skipped
/// when unwrapping and stay marked absent.
#[derive(Debug, Clone, PartialEq)]
pub struct UnwrappedPhases {
    pub times: Vec<f64>,
    pub dphi01: Vec<f64>,
    pub dphi12: Vec<f64>,
    pub present: Vec<bool>,
    /// Index of the first present sample; its values are still wrapped.
    pub anchor: usize,
}

pub fn unwrap_observables(obs: &PassObservables) -> Result<UnwrappedPhases> {
    let anchor = obs.valid.iter().position(|&v| v).ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    let unwrap = |w: &[f64]| {
        let mut out = vec![f64::NAN; w.len()];
        let mut prev_w = w[anchor];
        let mut acc = w[anchor];
        for idx in anchor..w.len() {
            if !obs.valid[idx] {
                continue;
            }
            acc += wrap_pi(w[idx] - prev_w);
            prev_w = w[idx];
            out[idx] = acc;
        }
        out
    };
    Ok(UnwrappedPhases {
        times: obs.times.clone(),
        dphi01: unwrap(&obs.dphi01),
        dphi12: unwrap(&obs.dphi12),
        present: obs.valid.clone(),
        anchor,
    })
}

/// Least-squares polynomial smoothing of both unwrapped phase series.
pub fn smooth_phases(p: &UnwrappedPhases, degree: usize) -> Result<UnwrappedPhases> {
    let idx: Vec<usize> = (0..p.times.len()).filter(|&i| p.present[i]).collect();
    let t: Vec<f64> = idx.iter().map(|&i| p.times[i]).collect();
    let smooth = |y: &[f64]| -> Result<Vec<f64>> {
        let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let poly = poly::fit(&t, &ys, degree)?;
        Ok((0..p.times.len()).map(|i| if p.present[i] { poly.eval(p.times[i]) } else { f64::NAN }).collect())
    };
    Ok(UnwrappedPhases {
        times: p.times.clone(),
        dphi01: smooth(&p.dphi01)?,
        dphi12: smooth(&p.dphi12)?,
        present: p.present.clone(),
        anchor: p.anchor,
    })
}

/// Evaluates the AoA track for the lobe obtained by adding `shift01` /
/// `shift12` to the unwrapped phases.
pub fn lobe_track(
    phases: &UnwrappedPhases,
    shift01: f64,
    shift12: f64,
    ambiguity: (usize, usize),
    array: &ArrayGeometry,
) -> AoATrack {
    let n = phases.times.len();
    let mut az = vec![f64::NAN; n];
    let mut el = vec![f64::NAN; n];
    let mut valid = vec![false; n];
    for i in 0..n {
        if !phases.present[i] {
            continue;
        }
        if let Ok((a, e)) = aoa_from_phase(phases.dphi01[i] + shift01, phases.dphi12[i] + shift12, array) {
            az[i] = a;
            el[i] = e;
            valid[i] = true;
        }
    }
    AoATrack { times: phases.times.clone(), az, el, valid, ambiguity }
}

fn validity_ok(track: &AoATrack, present: usize) -> bool {
    present > 0 && track.valid_count() as f64 >= MIN_TRACK_VALIDITY * present as f64
}

/// One lobe with its raw (per-sample) and smoothed angle tracks.
#[derive(Debug, Clone)]
pub struct LobeCandidate {
    pub ambiguity: (usize, usize),
    pub shift01: f64,
    pub shift12: f64,
    pub raw: AoATrack,
    pub smooth: AoATrack,
}

/// All `k^2` candidate tracks for a pass, lobes enumerated at the first
/// present sample; tracks with fewer than half their samples valid are
/// dropped.
pub fn candidate_tracks(obs: &PassObservables, array: &ArrayGeometry) -> Vec<AoATrack> {
    let Ok(phases) = unwrap_observables(obs) else {
        return Vec::new();
    };
    let present = phases.present.iter().filter(|&&p| p).count();
    lobe_grid(&phases, array)
        .into_iter()
        .map(|(ij, s01, s12)| lobe_track(&phases, s01, s12, ij, array))
        .filter(|t| validity_ok(t, present))
        .collect()
}

/// Candidate tracks with polynomial-smoothed companions for dynamics
/// (ranging, Doppler prediction). The validity filter uses the raw tracks.
pub fn candidate_set(obs: &PassObservables, array: &ArrayGeometry, smoothing_degree: usize) -> Result<Vec<LobeCandidate>> {
    let phases = unwrap_observables(obs)?;
    let smoothed = smooth_phases(&phases, smoothing_degree)?;
    let present = phases.present.iter().filter(|&&p| p).count();
    let grid = lobe_grid(&phases, array);
    let out = crate::par::map_slice(&grid, |&(ij, s01, s12)| {
        let raw = lobe_track(&phases, s01, s12, ij, array);
        if !validity_ok(&raw, present) {
            return None;
        }
        let smooth = lobe_track(&smoothed, s01, s12, ij, array);
        Some(LobeCandidate { ambiguity: ij, shift01: s01, shift12: s12, raw, smooth })
    });
    Ok(out.into_iter().flatten().collect())
}

fn lobe_grid(phases: &UnwrappedPhases, array: &ArrayGeometry) -> Vec<((usize, usize), f64, f64)> {
    let a = phases.anchor;
    let s01 = lobe_shifts(phases.dphi01[a], array.k());
    let s12 = lobe_shifts(phases.dphi12[a], array.k());
    let mut grid = Vec::with_capacity(s01.len() * s12.len());
    for (i, &x) in s01.iter().enumerate() {
        for (j, &y) in s12.iter().enumerate() {
            grid.push(((i + 1, j + 1), x, y));
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LAMBDA: f64 = 299_792_458.0 / 11.325e9;

    fn ang_diff(a: f64, b: f64) -> f64 {
        wrap_pi(a - b).abs()
    }

    #[test]
    fn zenith_and_zero_phase() {
        let arr = ArrayGeometry::sparse(10, LAMBDA, 0.0).unwrap();
        let (az, el) = aoa_from_phase(0.0, 0.0, &arr).unwrap();
        assert_eq!(az, 0.0);
        assert!((el - PI / 2.0).abs() < 1e-15);
        let (az, _) = aoa_from_phase(-0.0, -0.0, &arr).unwrap();
        assert_eq!(az, 0.0);
    }

    #[test]
    fn half_wavelength_example() {
        let arr = ArrayGeometry::sparse(1, LAMBDA, 0.0).unwrap();
        let (p01, p12) = forward_phase(90f64.to_radians(), 60f64.to_radians(), &arr);
        assert!((p01 + PI / 2.0).abs() < 1e-12);
        assert!(p12.abs() < 1e-12);
        let (az, el) = aoa_from_phase(p01, p12, &arr).unwrap();
        assert!((az - 90f64.to_radians()).abs() < 1e-9);
        assert!((el - 60f64.to_radians()).abs() < 1e-9);
    }

    #[test]
    fn infeasible_pair() {
        let arr = ArrayGeometry::sparse(1, LAMBDA, 0.0).unwrap();
        assert!(matches!(aoa_from_phase(3.0, 1.0, &arr), Err(Error::InvalidElevation(_))));
        // exactly on the boundary is accepted
        assert!(aoa_from_phase(PI, 0.0, &arr).is_ok());
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::new(0.013, LAMBDA, 0.0).is_err());
        assert!(ArrayGeometry::new(-1.0, LAMBDA, 0.0).is_err());
        assert!(ArrayGeometry::sparse(0, LAMBDA, 0.0).is_err());
        let a = ArrayGeometry::new(5.0 * LAMBDA, LAMBDA, 0.0).unwrap();
        assert_eq!(a.k(), 10);
    }

    #[test]
    fn candidate_counts() {
        let arr = ArrayGeometry::sparse(10, LAMBDA, 0.0).unwrap();
        assert_eq!(enumerate_candidates(0.3, -2.0, &arr).len(), 100);
        let one = ArrayGeometry::sparse(1, LAMBDA, 0.0).unwrap();
        let c = enumerate_candidates(0.3, -2.0, &one);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].dphi01, c[0].dphi12), (0.3, -2.0));
    }

    #[test]
    fn shifts_cover_reachable_interval() {
        for k in 1..=21 {
            for w in [-PI + 1e-12, -1.0, -1e-9, 0.0, 1e-9, 1.0, PI] {
                let s = lobe_shifts(w, k);
                assert_eq!(s.len(), k);
                // brute force: every reachable unwrapped value w + 2 pi n within [-k pi, k pi]
                let kf = k as f64;
                for n in -(k as i64) - 2..=(k as i64) + 2 {
                    let x = w + TAU * n as f64;
                    if x.abs() < kf * PI - 1e-9 {
                        assert!(s.iter().any(|sh| (sh - TAU * n as f64).abs() < 1e-9), "k={k} w={w} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn all_invalid_observables_yield_no_tracks() {
        let arr = ArrayGeometry::sparse(1, LAMBDA, 0.0).unwrap();
        let n = 20;
        let obs = PassObservables {
            times: (0..n).map(|i| i as f64 * 0.01).collect(),
            dphi01: vec![3.0; n],
            dphi12: vec![3.0; n],
            doppler: vec![0.0; n],
            snr: vec![30.0; n],
            valid: vec![true; n],
        };
        assert!(candidate_tracks(&obs, &arr).is_empty());
    }

    #[test]
    fn wide_aperture_is_more_precise() {
        use rand::{Rng, SeedableRng};
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.08).unwrap();
        let median_err = |k: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let arr = ArrayGeometry::sparse(k, LAMBDA, 0.0).unwrap();
            let mut errs: Vec<f64> = (0..2000)
                .map(|_| {
                    let az = rng.random_range(0.0..TAU);
                    let el = rng.random_range(35f64.to_radians()..85f64.to_radians());
                    let (a, b) = forward_phase(az, el, &arr);
                    let (a, b) = (a + noise.sample(rng), b + noise.sample(rng));
                    // correct lobe: noise added to the unwrapped truth
                    match aoa_from_phase(a, b, &arr) {
                        Ok((_, e)) => (e - el).abs(),
                        Err(_) => PI,
                    }
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            errs[errs.len() / 2]
        };
        let wide = median_err(10, &mut rng);
        let narrow = median_err(1, &mut rng);
        assert!(wide < narrow, "wide {wide} narrow {narrow}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn forward_inverse_round_trip(az in 1e-3..(TAU - 1e-3), el in 5f64.to_radians()..89f64.to_radians(),
                                      k in 1usize..=20, yaw in -PI..PI) {
            let arr = ArrayGeometry::sparse(k, LAMBDA, yaw).unwrap();
            let (p01, p12) = forward_phase(az, el, &arr);
            let (a, e) = aoa_from_phase(p01, p12, &arr).unwrap();
            prop_assert!(ang_diff(a, az) < 1e-9);
            prop_assert!((e - el).abs() < 1e-9);
        }

        #[test]
        fn true_lobe_always_enumerated(az in 0.0..TAU, el in 0.0..(PI / 2.0), kidx in 0usize..3) {
            let k = [2usize, 4, 10][kidx];
            let arr = ArrayGeometry::sparse(k, LAMBDA, 0.0).unwrap();
            let (p01, p12) = forward_phase(az, el, &arr);
            let cands = enumerate_candidates(wrap_pi(p01), wrap_pi(p12), &arr);
            prop_assert_eq!(cands.len(), k * k);
            let hit = cands.iter().any(|c| (c.dphi01 - p01).abs() < 1e-9 && (c.dphi12 - p12).abs() < 1e-9);
            prop_assert!(hit);
        }

        #[test]
        fn yaw_equivariance(az in 0.0..TAU, el in 0.1..1.5f64, yaw in -PI..PI) {
            let arr0 = ArrayGeometry::sparse(4, LAMBDA, 0.0).unwrap();
            let arr = arr0.with_yaw(yaw);
            // the same array-frame phases, read with a rotated array
            let (p01, p12) = forward_phase(az, el, &arr0);
            let (a0, _) = aoa_from_phase(p01, p12, &arr0).unwrap();
            let (a, _) = aoa_from_phase(p01, p12, &arr).unwrap();
            prop_assert!(ang_diff(a - yaw, a0) < 1e-9);
        }
    }
}
