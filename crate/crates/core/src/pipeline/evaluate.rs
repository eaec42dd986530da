//! Monte Carlo evaluation over randomized passes.
//!
//! Pass 0 of every run is the calibration pass: its truth is treated as
//! known, it sets the phase offsets for the run, and it is not scored.
//! Each pass draws from its own ChaCha stream, so results do not depend on
//! thread count, and every arm sees the same noise realization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{Mode, Observables, Scenario};
use super::{angle_error_3d, azimuth_error, calibrate, localize, true_lobe, CalibrationOffsets, GroundStation, LocalizationResult};
use crate::error::{Error, Result};
use crate::geodesy::EarthModel;
use crate::orbitsim::{look, observe_pass_between, orbit_for_pass, OrbitSpec, PassTruth};
use crate::signalproc::{
    frontend, observe_direct, synthesize_capture, CaptureConfig, DetectConfig, IqCapture, PassObservables, StftConfig,
};

/// Stream reserved for run-level draws.
const RUN_STREAM: u64 = u64::MAX;

/// One processing configuration applied to every pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Arm {
    pub label: String,
    pub k: usize,
    /// Yaw the localizer assumes minus the true yaw, rad.
    pub yaw_error: f64,
}

pub fn arms(sc: &Scenario) -> Vec<Arm> {
    let arm = |label: String, k, yaw_error| Arm { label, k, yaw_error };
    let k = sc.array.k;
    match sc.mode {
        Mode::Sparse => vec![arm(format!("sparse-k{k}"), k, 0.0)],
        Mode::Baseline => vec![arm(format!("sparse-k{k}"), k, 0.0), arm("baseline-k1".into(), 1, 0.0)],
        Mode::Sweep => sc.sweep.k.iter().map(|&k| arm(format!("sweep-k{k}"), k, 0.0)).collect(),
        Mode::YawOffset => {
            let off = sc.yaw_offset.offset_deg;
            vec![arm(format!("yaw+0-k{k}"), k, 0.0), arm(format!("yaw{off:+}-k{k}"), k, off.to_radians())]
        }
    }
}

/// Geometry of one simulated pass plus the generator state for its noise.
#[derive(Debug, Clone)]
pub struct SimulatedPass {
    pub index: usize,
    pub spec: OrbitSpec,
    pub truth: PassTruth,
    pub inclination: f64,
    pub doppler_offset: f64,
    noise_rng: ChaCha8Rng,
}

fn pass_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Receive-chain phase offsets for a run.
pub fn run_phase_offsets(sc: &Scenario) -> [f64; 2] {
    let mut rng = pass_rng(sc.seed, RUN_STREAM);
    let [lo, hi] = sc.noise.phase_offset_rad;
    [rng.random_range(lo..=hi), rng.random_range(lo..=hi)]
}

pub fn simulate_pass(sc: &Scenario, index: usize, earth: &EarthModel) -> Result<SimulatedPass> {
    let mut rng = pass_rng(sc.seed, index as u64);
    let o = &sc.orbit;
    let h = o.heights_km[rng.random_range(0..o.heights_km.len())] * 1e3;
    let inclination = o.inclinations_deg[rng.random_range(0..o.inclinations_deg.len())].to_radians();
    let ascending: bool = rng.random();
    let right: bool = rng.random();
    let peak = rng.random_range(o.peak_elevation_deg[0]..=o.peak_elevation_deg[1]).to_radians();
    let [dlo, dhi] = sc.noise.doppler_offset_hz;
    let doppler_offset = rng.random_range(dlo..=dhi);
    let gs = sc.station(sc.array.k)?;
    let spec = orbit_for_pass(&gs.position, 0.0, h, inclination, ascending, peak, right, earth)
        .map_err(|e| Error::config("orbit", format!("pass {index}: {e}")))?;
    // the requested peak sits near t = 0; a few minutes either side covers it
    let truth = observe_pass_between(&spec, &gs.position, &sc.pass_config(), -300.0, 300.0, earth)?;
    Ok(SimulatedPass { index, spec, truth, inclination, doppler_offset, noise_rng: rng })
}

/// Observables of a pass as seen by an array of spacing `k` with the true
/// yaw. Arms of one pass draw identical noise.
pub fn pass_observables(sc: &Scenario, pass: &SimulatedPass, k: usize, phase_offsets: [f64; 2]) -> Result<PassObservables> {
    match sc.observables {
        Observables::Direct => {
            let gs = sc.station(k)?;
            let noise = sc.noise_spec(phase_offsets);
            observe_direct(&pass.truth, &gs.array, &noise, sc.array.fc_hz, pass.doppler_offset, &mut pass.noise_rng.clone())
        }
        Observables::Iq => {
            let cap = pass_capture(sc, pass, k, phase_offsets, None)?;
            frontend(&cap, &StftConfig::default(), &DetectConfig::default())
        }
    }
}

/// IQ capture of a pass, optionally cut to `max_duration` seconds.
pub fn pass_capture(
    sc: &Scenario,
    pass: &SimulatedPass,
    k: usize,
    phase_offsets: [f64; 2],
    max_duration: Option<f64>,
) -> Result<IqCapture> {
    let gs = sc.station(k)?;
    let noise = sc.noise_spec(phase_offsets);
    let cfg = CaptureConfig { max_duration, ..Default::default() };
    synthesize_capture(&pass.truth, &gs.array, &noise, sc.array.fc_hz, pass.doppler_offset, &cfg, &mut pass.noise_rng.clone())
}

/// Station as the localizer believes it to be for an arm.
pub fn assumed_station(sc: &Scenario, arm: &Arm) -> Result<GroundStation> {
    let gs = sc.station(arm.k)?;
    Ok(GroundStation::new(gs.position, gs.array.with_yaw(gs.yaw() + arm.yaw_error)))
}

/// Per-pass medians over the winning track, against the truth evaluated at
/// the track times. Angles in degrees, distances in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassErrors {
    pub err3d: f64,
    pub az: f64,
    pub el: f64,
    pub range: f64,
    pub position: f64,
    pub height: f64,
}

impl PassErrors {
    /// Charged to a pass that produced no estimate.
    pub const FAILED: PassErrors =
        PassErrors { err3d: 180.0, az: 180.0, el: 180.0, range: f64::INFINITY, position: f64::INFINITY, height: f64::INFINITY };
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn pass_errors(r: &LocalizationResult, spec: &OrbitSpec, gs: &GroundStation, earth: &EarthModel) -> PassErrors {
    let truth: Vec<_> = r.times.iter().map(|&t| look(spec, &gs.position, t, earth)).collect();
    let col = |f: &dyn Fn(usize) -> f64| median((0..truth.len()).map(f).collect());
    PassErrors {
        err3d: col(&|i| angle_error_3d((r.az[i], r.el[i]), (truth[i].az, truth[i].el))),
        az: col(&|i| azimuth_error(r.az[i], truth[i].az)),
        el: col(&|i| (r.el[i] - truth[i].el).abs().to_degrees()),
        range: col(&|i| (r.r_track[i] - truth[i].range).abs() / 1e3),
        position: col(&|i| (r.trajectory[i] - truth[i].ecef).norm() / 1e3),
        height: (r.h_star - spec.height).abs() / 1e3,
    }
}

/// One row of the per-pass table.
#[derive(Debug, Clone, PartialEq)]
pub struct PassRecord {
    pub arm: String,
    pub pass: usize,
    pub k: usize,
    pub h_true_km: f64,
    pub inclination_deg: f64,
    pub peak_elevation_deg: f64,
    /// `ok` or the error category.
    pub status: String,
    pub winner: Option<(usize, usize)>,
    pub true_lobe: Option<(usize, usize)>,
    pub survivors: usize,
    pub h_star_km: Option<f64>,
    pub errors: PassErrors,
}

impl PassRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn lobe_correct(&self) -> bool {
        self.winner.is_some() && self.winner == self.true_lobe
    }
}

/// 5th, 50th and 95th percentiles (nearest rank).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percentiles {
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
}

impl Percentiles {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Self { p5: f64::NAN, p50: f64::NAN, p95: f64::NAN };
        }
        v.sort_by(f64::total_cmp);
        let at = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        Self { p5: at(0.05), p50: at(0.5), p95: at(0.95) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub arm: Arm,
    pub calibration: CalibrationOffsets,
    pub passes: usize,
    pub failures: usize,
    pub lobe_correct: usize,
    pub mean_survivors: f64,
    pub err3d: Percentiles,
    pub az: Percentiles,
    pub el: Percentiles,
    pub range: Percentiles,
    pub position: Percentiles,
    pub height: Percentiles,
}

impl ArmSummary {
    fn new(arm: Arm, calibration: CalibrationOffsets, records: &[&PassRecord]) -> Self {
        let pick = |f: fn(&PassErrors) -> f64| Percentiles::of(records.iter().map(|r| f(&r.errors)));
        let ok: Vec<_> = records.iter().filter(|r| r.ok()).collect();
        Self {
            arm,
            calibration,
            passes: records.len(),
            failures: records.len() - ok.len(),
            lobe_correct: records.iter().filter(|r| r.lobe_correct()).count(),
            mean_survivors: if ok.is_empty() { 0.0 } else { ok.iter().map(|r| r.survivors as f64).sum::<f64>() / ok.len() as f64 },
            err3d: pick(|e| e.err3d),
            az: pick(|e| e.az),
            el: pick(|e| e.el),
            range: pick(|e| e.range),
            position: pick(|e| e.position),
            height: pick(|e| e.height),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub scenario: Scenario,
    pub phase_offsets: [f64; 2],
    pub arms: Vec<ArmSummary>,
    /// Ordered by arm, then pass.
    pub records: Vec<PassRecord>,
}

fn score_pass(
    sc: &Scenario,
    pass: &SimulatedPass,
    arm: &Arm,
    cal: &CalibrationOffsets,
    offsets: [f64; 2],
    earth: &EarthModel,
) -> Result<PassRecord> {
    let gs = assumed_station(sc, arm)?;
    let truth_gs = sc.station(arm.k)?;
    let obs = pass_observables(sc, pass, arm.k, offsets)?;
    let mut rec = PassRecord {
        arm: arm.label.clone(),
        pass: pass.index,
        k: arm.k,
        h_true_km: pass.spec.height / 1e3,
        inclination_deg: pass.inclination.to_degrees(),
        peak_elevation_deg: pass.truth.peak_elevation.to_degrees(),
        status: "ok".into(),
        winner: None,
        true_lobe: None,
        survivors: 0,
        h_star_km: None,
        errors: PassErrors::FAILED,
    };
    let truth_at = |t: f64| {
        let l = look(&pass.spec, &truth_gs.position, t, earth);
        (l.az, l.el)
    };
    rec.true_lobe = true_lobe(&obs, cal, truth_at, &truth_gs.array);
    match localize(&obs, &gs, cal, &sc.localize_config()) {
        Ok(r) => {
            rec.winner = Some(r.winner);
            rec.survivors = r.survivors;
            rec.h_star_km = Some(r.h_star / 1e3);
            rec.errors = pass_errors(&r, &pass.spec, &truth_gs, earth);
        }
        Err(e) => rec.status = e.category().to_string(),
    }
    Ok(rec)
}

/// Runs every arm of the scenario over the calibration pass and
/// `sc.passes` scored passes.
pub fn evaluate(sc: &Scenario) -> Result<Evaluation> {
    sc.validate()?;
    let earth = sc.localize_config().earth;
    let offsets = run_phase_offsets(sc);
    let arms = arms(sc);

    let cal_pass = simulate_pass(sc, 0, &earth)?;
    let mut cals = Vec::with_capacity(arms.len());
    for arm in &arms {
        let obs = pass_observables(sc, &cal_pass, arm.k, offsets)?;
        cals.push(calibrate(&cal_pass.truth, &obs, &assumed_station(sc, arm)?, "pass 0")?);
    }

    let work = |p: usize| -> Result<Vec<PassRecord>> {
        let pass = simulate_pass(sc, p, &earth)?;
        arms.iter().zip(&cals).map(|(arm, cal)| score_pass(sc, &pass, arm, cal, offsets, &earth)).collect()
    };
    let per_pass: Vec<Result<Vec<PassRecord>>> = match sc.observables {
        Observables::Direct => crate::par::map_range(sc.passes, |i| work(i + 1)),
        // IQ captures are hundreds of MB each; one at a time
        Observables::Iq => (1..=sc.passes).map(work).collect(),
    };
    let mut by_pass = Vec::with_capacity(per_pass.len());
    for r in per_pass {
        by_pass.push(r?);
    }
    let mut records = Vec::with_capacity(arms.len() * sc.passes);
    let mut summaries = Vec::with_capacity(arms.len());
    for (a, (arm, cal)) in arms.into_iter().zip(cals).enumerate() {
        let start = records.len();
        records.extend(by_pass.iter().map(|recs| recs[a].clone()));
        let mine: Vec<&PassRecord> = records[start..].iter().collect();
        summaries.push(ArmSummary::new(arm, cal, &mine));
    }
    Ok(Evaluation { scenario: sc.clone(), phase_offsets: offsets, arms: summaries, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> Scenario {
        let mut sc = Scenario { passes: 6, mode, ..Default::default() };
        sc.sweep.k = vec![2, 6];
        sc
    }

    #[test]
    fn percentiles_nearest_rank() {
        let p = Percentiles::of((0..=100).map(f64::from));
        assert_eq!((p.p5, p.p50, p.p95), (5.0, 50.0, 95.0));
        let q = Percentiles::of([3.0, f64::INFINITY, 1.0]);
        assert_eq!((q.p5, q.p50, q.p95), (1.0, 3.0, f64::INFINITY));
        assert!(Percentiles::of(std::iter::empty()).p50.is_nan());
    }

    #[test]
    fn arms_per_mode() {
        let labels = |m| arms(&small(m)).into_iter().map(|a| a.label).collect::<Vec<_>>();
        assert_eq!(labels(Mode::Sparse), ["sparse-k10"]);
        assert_eq!(labels(Mode::Baseline), ["sparse-k10", "baseline-k1"]);
        assert_eq!(labels(Mode::Sweep), ["sweep-k2", "sweep-k6"]);
        assert_eq!(labels(Mode::YawOffset), ["yaw+0-k10", "yaw+10-k10"]);
    }

    #[test]
    fn passes_are_reproducible_and_independent_of_order() {
        let sc = small(Mode::Sparse);
        let e = EarthModel::default();
        let a = simulate_pass(&sc, 3, &e).unwrap();
        let _ = simulate_pass(&sc, 2, &e).unwrap();
        let b = simulate_pass(&sc, 3, &e).unwrap();
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.doppler_offset, b.doppler_offset);
        let oa = pass_observables(&sc, &a, 10, [0.1, 0.2]).unwrap();
        let ob = pass_observables(&sc, &b, 10, [0.1, 0.2]).unwrap();
        assert_eq!(oa, ob);
    }

    #[test]
    fn baseline_arm_sees_the_same_noise() {
        let mut sc = small(Mode::Baseline);
        sc.noise.doppler_quantize_hz = 0.0;
        let e = EarthModel::default();
        let p = simulate_pass(&sc, 1, &e).unwrap();
        let sparse = pass_observables(&sc, &p, 10, [0.0; 2]).unwrap();
        let base = pass_observables(&sc, &p, 1, [0.0; 2]).unwrap();
        assert_eq!(sparse.doppler, base.doppler);
        // phase noise is identical, so the phase residuals against truth match
        let gs10 = sc.station(10).unwrap();
        let gs1 = sc.station(1).unwrap();
        for i in (0..p.truth.len()).step_by(97) {
            let f10 = crate::aoa::forward_phase(p.truth.az[i], p.truth.el[i], &gs10.array);
            let f1 = crate::aoa::forward_phase(p.truth.az[i], p.truth.el[i], &gs1.array);
            let r10 = crate::geodesy::wrap_pi(sparse.dphi01[i] - f10.0);
            let r1 = crate::geodesy::wrap_pi(base.dphi01[i] - f1.0);
            assert!((r10 - r1).abs() < 1e-9);
        }
    }

    #[test]
    fn evaluation_is_deterministic_and_ordered() {
        let sc = small(Mode::Baseline);
        let a = evaluate(&sc).unwrap();
        let b = evaluate(&sc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 12);
        assert_eq!(a.records.iter().map(|r| r.pass).collect::<Vec<_>>(), [1, 2, 3, 4, 5, 6, 1, 2, 3, 4, 5, 6]);
        let sparse = &a.arms[0];
        assert_eq!(sparse.passes, 6);
        assert!(sparse.err3d.p50 < 1.0, "{:?}", sparse.err3d);
    }

    #[test]
    fn report_winners_match_standalone_localize() {
        let sc = small(Mode::Sparse);
        let ev = evaluate(&sc).unwrap();
        let e = EarthModel::default();
        let cal = &ev.arms[0].calibration;
        let gs = sc.station(10).unwrap();
        for rec in ev.records.iter().take(3) {
            let p = simulate_pass(&sc, rec.pass, &e).unwrap();
            let obs = pass_observables(&sc, &p, 10, ev.phase_offsets).unwrap();
            let r = localize(&obs, &gs, cal, &sc.localize_config()).ok();
            assert_eq!(r.map(|r| r.winner), rec.winner);
        }
    }
}
