use leoloc::geodesy::EarthModel;
use leoloc::pipeline::evaluate::{pass_capture, pass_errors, pass_observables, run_phase_offsets, simulate_pass};
use leoloc::pipeline::obsfile::{read_pass, write_pass, PassFile};
use leoloc::pipeline::scenario::{Observables, Scenario};
use leoloc::pipeline::truthfile::{read_truth, write_truth};
use leoloc::pipeline::{calibrate, localize, true_lobe};
use leoloc::signalproc::iqfile::{read_iq, write_iq};
use leoloc::signalproc::{frontend, DetectConfig, StftConfig};

fn small(passes: usize) -> Scenario {
    Scenario { passes, seed: 11, ..Default::default() }
}

#[test]
fn noisy_passes_localize_through_files() {
    let sc = small(4);
    let earth = EarthModel::default();
    let gs = sc.station(sc.array.k).unwrap();
    let offsets = run_phase_offsets(&sc);
    let cfg = sc.localize_config();

    // calibration goes through the truth and observation file formats
    let cal_pass = simulate_pass(&sc, 0, &earth).unwrap();
    let mut buf = Vec::new();
    write_truth(&mut buf, &cal_pass.truth).unwrap();
    let cal_truth = read_truth(buf.as_slice()).unwrap();
    let cal_obs = pass_observables(&sc, &cal_pass, sc.array.k, offsets).unwrap();
    let cal = calibrate(&cal_truth, &cal_obs, &gs, "pass 0").unwrap();

    let mut correct = 0;
    for p in 1..=sc.passes {
        let pass = simulate_pass(&sc, p, &earth).unwrap();
        let obs = pass_observables(&sc, &pass, sc.array.k, offsets).unwrap();
        let mut buf = Vec::new();
        write_pass(&mut buf, &PassFile { station: gs, fc: sc.array.fc_hz, dt: sc.pass.dt_s, obs: obs.clone() }).unwrap();
        let pf = read_pass(buf.as_slice()).unwrap();
        let r = localize(&pf.obs, &pf.station, &cal, &cfg).unwrap();
        let lobe = true_lobe(&obs, &cal, |t| {
            let l = leoloc::orbitsim::look(&pass.spec, &gs.position, t, &earth);
            (l.az, l.el)
        }, &gs.array);
        if Some(r.winner) == lobe {
            correct += 1;
            let e = pass_errors(&r, &pass.spec, &gs, &earth);
            assert!(e.err3d < 1.0, "pass {p}: 3D error {} deg", e.err3d);
            assert!((r.h_star - pass.spec.height).abs() < 20e3, "pass {p}: h* {} vs {}", r.h_star, pass.spec.height);
        }
    }
    assert!(correct >= 3, "{correct}/4 lobes correct");
}

#[test]
fn iq_capture_survives_file_and_front_end() {
    let sc = Scenario { observables: Observables::Iq, ..small(1) };
    let earth = EarthModel::default();
    let pass = simulate_pass(&sc, 1, &earth).unwrap();
    let cap = pass_capture(&sc, &pass, sc.array.k, [0.0; 2], Some(0.5)).unwrap();
    let mut buf = Vec::new();
    write_iq(&mut buf, &cap).unwrap();
    let back = read_iq(buf.as_slice()).unwrap();
    assert_eq!(back, cap);
    let obs = frontend(&back, &StftConfig::default(), &DetectConfig::default()).unwrap();
    assert!(obs.valid_count() * 10 >= obs.len() * 9, "{} of {} frames detected", obs.valid_count(), obs.len());
}
