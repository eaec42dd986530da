//! Scenario file: what to simulate and how to score it.
//!
//! Every field has a default, so an empty file is a valid scenario. Unknown
//! keys are rejected. Errors name the offending field path, for example
//! `noise.phase_std_rad`.

use serde::Deserialize;

use super::{GroundStation, LocalizeConfig};
use crate::aoa::ArrayGeometry;
use crate::dsar::DsarConfig;
use crate::error::{Error, Result};
use crate::geodesy::{EarthModel, GeodeticPosition, SPEED_OF_LIGHT};
use crate::orbitsim::{PassConfig, MAX_LEO_HEIGHT, MIN_LEO_HEIGHT};
use crate::ranging::HeightSearchConfig;
use crate::signalproc::NoiseSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One arm at the configured spacing.
    Sparse,
    /// The configured spacing plus a half-wavelength arm fed the same noise.
    Baseline,
    /// One arm per spacing in `sweep.k`.
    Sweep,
    /// Correct yaw against a yaw misreported by `yaw_offset.offset_deg`.
    YawOffset,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Sparse => "sparse",
            Mode::Baseline => "baseline",
            Mode::Sweep => "sweep",
            Mode::YawOffset => "yaw-offset",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observables {
    /// Phases and Doppler synthesized at the frame times.
    Direct,
    /// IQ capture pushed through the STFT front end. Slow and memory hungry.
    Iq,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    /// Scored passes. One extra calibration pass is simulated first.
    pub passes: usize,
    pub mode: Mode,
    pub observables: Observables,
    pub station: StationSection,
    pub array: ArraySection,
    pub orbit: OrbitSection,
    pub pass: PassSection,
    pub noise: NoiseSection,
    pub search: SearchSection,
    pub processing: ProcessingSection,
    pub sweep: SweepSection,
    pub yaw_offset: YawOffsetSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationSection {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    /// Spacing in half wavelengths.
    pub k: usize,
    pub fc_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSection {
    pub heights_km: Vec<f64>,
    pub inclinations_deg: Vec<f64>,
    /// Peak elevations are drawn uniformly from `[lo, hi]`.
    pub peak_elevation_deg: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassSection {
    pub dt_s: f64,
    pub duration_s: f64,
    pub elevation_mask_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub phase_std_rad: f64,
    /// Per-sample SNR of each IQ channel; also written to direct observables.
    pub snr_db: f64,
    /// Receive-chain phase offsets, drawn once per run from `[lo, hi]`.
    pub phase_offset_rad: [f64; 2],
    /// Carrier offset, drawn per pass from `[lo, hi]`.
    pub doppler_offset_hz: [f64; 2],
    pub doppler_std_hz: f64,
    /// Bin width for direct Doppler; 0 leaves it unquantized.
    pub doppler_quantize_hz: f64,
    pub dropout: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub h_min_km: f64,
    pub h_max_km: f64,
    pub step_km: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessingSection {
    pub smoothing_degree: usize,
    pub ranging_points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub k: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YawOffsetSection {
    pub offset_deg: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: 1,
            passes: 200,
            mode: Mode::Sparse,
            observables: Observables::Direct,
            station: StationSection::default(),
            array: ArraySection::default(),
            orbit: OrbitSection::default(),
            pass: PassSection::default(),
            noise: NoiseSection::default(),
            search: SearchSection::default(),
            processing: ProcessingSection::default(),
            sweep: SweepSection::default(),
            yaw_offset: YawOffsetSection::default(),
        }
    }
}

impl Default for StationSection {
    fn default() -> Self {
        Self { lat_deg: 40.1, lon_deg: -88.2, alt_m: 220.0, yaw_deg: 0.0 }
    }
}

impl Default for ArraySection {
    fn default() -> Self {
        Self { k: 10, fc_hz: 11.325e9 }
    }
}

impl Default for OrbitSection {
    fn default() -> Self {
        Self { heights_km: vec![400.0, 550.0, 800.0, 1200.0], inclinations_deg: vec![53.0, 70.0, 97.0], peak_elevation_deg: [35.0, 89.5] }
    }
}

impl Default for PassSection {
    fn default() -> Self {
        Self { dt_s: 0.007, duration_s: 15.0, elevation_mask_deg: 30.0 }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            phase_std_rad: 0.08,
            snr_db: 20.0,
            phase_offset_rad: [-std::f64::consts::PI, std::f64::consts::PI],
            doppler_offset_hz: [-50e3, 50e3],
            doppler_std_hz: 10.0,
            doppler_quantize_hz: 2e6 / 28_000.0,
            dropout: 0.0,
        }
    }
}

impl Default for SearchSection {
    fn default() -> Self {
        Self { h_min_km: 300.0, h_max_km: 2000.0, step_km: 2.0 }
    }
}

impl Default for ProcessingSection {
    fn default() -> Self {
        Self { smoothing_degree: 3, ranging_points: 150 }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { k: vec![4, 6, 10, 14, 20] }
    }
}

impl Default for YawOffsetSection {
    fn default() -> Self {
        Self { offset_deg: 10.0 }
    }
}

fn ensure(ok: bool, path: &str, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message()))
    }
}

fn ensure_range(r: [f64; 2], path: &str) -> Result<()> {
    ensure(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1], path, || format!("expected [lo, hi] with lo <= hi, got {r:?}"))
}

impl Scenario {
    /// Parses and validates a scenario. Syntax and type errors carry the
    /// field path and the line.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| Error::config("", toml_message(text, &e)))?;
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::config(if path == "." { String::new() } else { path }, toml_message(text, &inner))
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.passes >= 1, "passes", || "at least one scored pass is required".into())?;
        let s = &self.station;
        ensure((-90.0..=90.0).contains(&s.lat_deg), "station.lat_deg", || format!("{} is outside [-90, 90]", s.lat_deg))?;
        ensure(s.lon_deg > -180.0 && s.lon_deg <= 180.0, "station.lon_deg", || format!("{} is outside (-180, 180]", s.lon_deg))?;
        ensure(s.alt_m >= 0.0 && s.alt_m < 1e4, "station.alt_m", || format!("{} is outside [0, 10000)", s.alt_m))?;
        ensure(s.yaw_deg.is_finite(), "station.yaw_deg", || "must be finite".into())?;
        ensure(self.array.k >= 1, "array.k", || "spacing must be at least one half wavelength".into())?;
        ensure(self.array.fc_hz > 0.0 && self.array.fc_hz.is_finite(), "array.fc_hz", || "must be positive".into())?;

        let o = &self.orbit;
        ensure(!o.heights_km.is_empty(), "orbit.heights_km", || "must not be empty".into())?;
        for (i, h) in o.heights_km.iter().enumerate() {
            let ok = (MIN_LEO_HEIGHT..=MAX_LEO_HEIGHT).contains(&(h * 1e3));
            ensure(ok, &format!("orbit.heights_km[{i}]"), || format!("{h} km is outside the LEO band [200, 2000] km"))?;
        }
        ensure(!o.inclinations_deg.is_empty(), "orbit.inclinations_deg", || "must not be empty".into())?;
        for (i, inc) in o.inclinations_deg.iter().enumerate() {
            // the ground track must reach the station's latitude
            let reach = if *inc <= 90.0 { *inc } else { 180.0 - inc };
            ensure((0.0..=180.0).contains(inc), &format!("orbit.inclinations_deg[{i}]"), || format!("{inc} is outside [0, 180]"))?;
            ensure(reach > s.lat_deg.abs() + 1.0, &format!("orbit.inclinations_deg[{i}]"), || {
                format!("{inc} deg never passes overhead of latitude {}", s.lat_deg)
            })?;
        }
        ensure_range(o.peak_elevation_deg, "orbit.peak_elevation_deg")?;
        let [lo, hi] = o.peak_elevation_deg;
        ensure(lo > self.pass.elevation_mask_deg && hi < 90.0, "orbit.peak_elevation_deg", || {
            format!("must lie within ({}, 90) deg", self.pass.elevation_mask_deg)
        })?;

        let p = &self.pass;
        ensure(p.dt_s > 0.0, "pass.dt_s", || "must be positive".into())?;
        ensure(p.duration_s >= 10.0 * p.dt_s, "pass.duration_s", || "must span at least ten samples".into())?;
        ensure((0.0..90.0).contains(&p.elevation_mask_deg), "pass.elevation_mask_deg", || "must be in [0, 90)".into())?;

        let n = &self.noise;
        ensure(n.phase_std_rad >= 0.0 && n.phase_std_rad.is_finite(), "noise.phase_std_rad", || "must be non-negative".into())?;
        ensure(n.snr_db.is_finite(), "noise.snr_db", || "must be finite".into())?;
        ensure_range(n.phase_offset_rad, "noise.phase_offset_rad")?;
        ensure_range(n.doppler_offset_hz, "noise.doppler_offset_hz")?;
        ensure(n.doppler_std_hz >= 0.0, "noise.doppler_std_hz", || "must be non-negative".into())?;
        ensure(n.doppler_quantize_hz >= 0.0, "noise.doppler_quantize_hz", || "must be non-negative".into())?;
        ensure((0.0..0.5).contains(&n.dropout), "noise.dropout", || "must be in [0, 0.5)".into())?;

        let g = &self.search;
        ensure(g.step_km > 0.0, "search.step_km", || "must be positive".into())?;
        ensure(g.h_min_km > 0.0 && g.h_min_km < g.h_max_km, "search.h_max_km", || "must exceed search.h_min_km > 0".into())?;

        ensure(self.processing.ranging_points >= 3, "processing.ranging_points", || "must be at least 3".into())?;
        ensure((1..=9).contains(&self.processing.smoothing_degree), "processing.smoothing_degree", || "must be in [1, 9]".into())?;
        if self.mode == Mode::Sweep {
            ensure(!self.sweep.k.is_empty(), "sweep.k", || "must not be empty".into())?;
            for (i, k) in self.sweep.k.iter().enumerate() {
                ensure(*k >= 1, &format!("sweep.k[{i}]"), || "must be at least 1".into())?;
            }
        }
        ensure(self.yaw_offset.offset_deg.is_finite(), "yaw_offset.offset_deg", || "must be finite".into())?;
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.array.fc_hz
    }

    /// Station with a sparse array of spacing `k` and the true yaw.
    pub fn station(&self, k: usize) -> Result<GroundStation> {
        let s = &self.station;
        let pos = GeodeticPosition::from_degrees(s.lat_deg, s.lon_deg, s.alt_m)?;
        Ok(GroundStation::new(pos, ArrayGeometry::sparse(k, self.wavelength(), s.yaw_deg.to_radians())?))
    }

    pub fn pass_config(&self) -> PassConfig {
        PassConfig { dt: self.pass.dt_s, duration: self.pass.duration_s, elevation_mask: self.pass.elevation_mask_deg.to_radians() }
    }

    /// Noise for one run; phase offsets are supplied by the caller.
    pub fn noise_spec(&self, phase_offsets: [f64; 2]) -> NoiseSpec {
        let n = &self.noise;
        NoiseSpec {
            phase_std: n.phase_std_rad,
            snr_db: Some(n.snr_db),
            phase_offsets,
            doppler_std: n.doppler_std_hz,
            doppler_bin: (n.doppler_quantize_hz > 0.0).then_some(n.doppler_quantize_hz),
            dropout: n.dropout,
        }
    }

    pub fn localize_config(&self) -> LocalizeConfig {
        LocalizeConfig {
            fc: self.array.fc_hz,
            height_search: HeightSearchConfig {
                h_min: self.search.h_min_km * 1e3,
                h_max: self.search.h_max_km * 1e3,
                step: self.search.step_km * 1e3,
            },
            dsar: DsarConfig::default(),
            smoothing_degree: self.processing.smoothing_degree,
            ranging_points: self.processing.ranging_points,
            earth: EarthModel::default(),
        }
    }
}

/// Deserializer message with the line number when the error has a span.
fn toml_message(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim_end().to_string();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("{msg} (line {line})")
        }
        None => msg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_path(text: &str) -> String {
        match Scenario::from_toml(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(Scenario::from_toml("").unwrap(), Scenario::default());
    }

    #[test]
    fn full_file_parses() {
        let sc = Scenario::from_toml(
            r#"
seed = 9
passes = 12
mode = "yaw-offset"
observables = "iq"
[station]
lat_deg = -33.9
lon_deg = 151.2
alt_m = 40
[array]
k = 6
[orbit]
heights_km = [550]
inclinations_deg = [53, 97.6]
peak_elevation_deg = [40, 80]
[noise]
phase_std_rad = 0.05
doppler_quantize_hz = 0
[sweep]
k = [2, 4]
[yaw_offset]
offset_deg = -5
"#,
        )
        .unwrap();
        assert_eq!((sc.seed, sc.passes, sc.mode, sc.observables), (9, 12, Mode::YawOffset, Observables::Iq));
        assert_eq!(sc.array.k, 6);
        assert_eq!(sc.orbit.inclinations_deg, vec![53.0, 97.6]);
        assert_eq!(sc.noise_spec([0.0; 2]).doppler_bin, None);
        assert_eq!(sc.yaw_offset.offset_deg, -5.0);
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(config_path("[noise]\nphase_std_rad = \"big\"\n"), "noise.phase_std_rad");
        assert_eq!(config_path("[noise]\nphase_std_rad = -1.0\n"), "noise.phase_std_rad");
        assert_eq!(config_path("[orbit]\nheights_km = [550, 5000]\n"), "orbit.heights_km[1]");
        assert_eq!(config_path("[station]\nlat_deg = 95\n"), "station.lat_deg");
        assert_eq!(config_path("mode = \"dense\"\n"), "mode");
        assert!(config_path("[array]\nspacing = 3\n").starts_with("array"));
        assert_eq!(config_path("[orbit]\ninclinations_deg = [30]\n"), "orbit.inclinations_deg[0]");
        assert_eq!(config_path("mode = \"sweep\"\n[sweep]\nk = []\n"), "sweep.k");
    }

    #[test]
    fn syntax_errors_report_the_line() {
        match Scenario::from_toml("seed = 1\n[noise\n") {
            Err(Error::Config { message, .. }) => assert!(message.contains("line 2"), "{message}"),
            other => panic!("{other:?}"),
        }
    }
}
