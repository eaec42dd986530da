use num_complex::Complex32;

use super::stft::{FrameLayout, Spectrogram, StftConfig};
use super::{IqCapture, PassObservables};
use crate::error::{Error, Result};
use crate::geodesy::wrap_pi;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    /// A bin qualifies when its power exceeds this many dB above the mean
    /// bin power of the frame, on every channel.
    pub snr_threshold_db: f64,
    /// Minimum fraction of frames that must carry a detection.
    pub min_detect_fraction: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self { snr_threshold_db: 10.0, min_detect_fraction: 0.2 }
    }
}

/// Peak search on one frame of the three channels. Returns
/// `(bin, dphi01, dphi12, snr_db)` when a qualifying bin exists.
fn detect_frame(rows: [&[Complex32]; 3], threshold: f64) -> Option<(usize, f64, f64, f64)> {
    let nbins = rows[0].len();
    let means: Vec<f64> =
        rows.iter().map(|r| r.iter().map(|z| z.norm_sqr() as f64).sum::<f64>() / nbins as f64).collect();
    if means.iter().any(|&m| !(m > 0.0)) {
        return None;
    }
    let score = |b: usize| -> f64 { rows.iter().zip(&means).map(|(r, m)| r[b].norm_sqr() as f64 / m).sum() };
    let best = (0..nbins).max_by(|&a, &b| score(a).total_cmp(&score(b)))?;
    let ratios: Vec<f64> = rows.iter().zip(&means).map(|(r, m)| r[best].norm_sqr() as f64 / m).collect();
    if ratios.iter().any(|&q| !(q > threshold)) {
        return None;
    }
    let arg = |z: Complex32| (z.im as f64).atan2(z.re as f64);
    let (a0, a1, a2) = (arg(rows[0][best]), arg(rows[1][best]), arg(rows[2][best]));
    let snr = 10.0 * ratios.iter().copied().fold(f64::INFINITY, f64::min).log10();
    Some((best, wrap_pi(a0 - a1), wrap_pi(a1 - a2), snr))
}

fn require_detections(obs: &PassObservables, cfg: &DetectConfig) -> Result<()> {
    let total = obs.len();
    let qualifying = obs.valid_count();
    if total == 0 || (qualifying as f64) < cfg.min_detect_fraction * total as f64 || qualifying == 0 {
        return Err(Error::NoBeaconDetected { qualifying, total });
    }
    Ok(())
}

/// Per frame, picks the strongest bin that clears the threshold on all three
/// channels and records its frequency as Doppler and the channel phase
/// differences at that bin. Frames without a qualifying bin are missing.
pub fn detect_and_track(
    spec0: &Spectrogram,
    spec1: &Spectrogram,
    spec2: &Spectrogram,
    cfg: &DetectConfig,
) -> Result<PassObservables> {
    let n = spec0.times.len();
    if spec1.times.len() != n || spec2.times.len() != n || spec0.freqs.len() != spec1.freqs.len() || spec0.freqs.len() != spec2.freqs.len() {
        return Err(Error::InvalidInput("spectrograms are not aligned".into()));
    }
    let threshold = 10f64.powf(cfg.snr_threshold_db / 10.0);
    let mut obs = PassObservables::with_capacity(n);
    for f in 0..n {
        let t = spec0.times[f];
        match detect_frame([&spec0.values[f], &spec1.values[f], &spec2.values[f]], threshold) {
            Some((b, d01, d12, snr)) => obs.push(t, d01, d12, spec0.freqs[b], snr),
            None => obs.push_missing(t),
        }
    }
    require_detections(&obs, cfg)?;
    Ok(obs)
}

/// STFT plus detection over a capture, one frame at a time. Equivalent to
/// running [`super::stft`] on each channel and then [`detect_and_track`],
/// without holding whole spectrograms in memory.
pub fn frontend(capture: &IqCapture, stft_cfg: &StftConfig, cfg: &DetectConfig) -> Result<PassObservables> {
    let layout = FrameLayout::new(capture.len(), capture.sample_rate, stft_cfg)?;
    let threshold = 10f64.powf(cfg.snr_threshold_db / 10.0);
    let frames = crate::par::map_range(layout.count, |f| {
        let mut bufs: [Vec<Complex32>; 3] = Default::default();
        for (buf, ch) in bufs.iter_mut().zip(&capture.channels) {
            layout.transform(ch, f, buf);
        }
        let t = layout.time(f, capture.t0, capture.sample_rate);
        (t, detect_frame([&bufs[0], &bufs[1], &bufs[2]], threshold))
    });
    let mut obs = PassObservables::with_capacity(frames.len());
    for (t, det) in frames {
        match det {
            Some((b, d01, d12, snr)) => obs.push(t, d01, d12, layout.freqs[b], snr),
            None => obs.push_missing(t),
        }
    }
    require_detections(&obs, cfg)?;
    Ok(obs)
}
