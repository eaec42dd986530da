//! Synthetic beacon captures and the STFT front-end that turns three-channel
//! IQ into per-frame phase differences and Doppler.

mod detect;
pub mod iqfile;
mod stft;

pub use detect::{detect_and_track, frontend, DetectConfig};
pub use stft::{stft, Spectrogram, StftConfig};

use num_complex::Complex32;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::aoa::{forward_phase, ArrayGeometry};
use crate::error::{Error, Result};
use crate::geodesy::wrap_pi;
use crate::orbitsim::{true_doppler, PassTruth};

/// Three-channel complex baseband capture (RX0, RX1, RX2).
#[derive(Debug, Clone, PartialEq)]
pub struct IqCapture {
    pub sample_rate: f64,
    /// Assumed center frequency, Hz.
    pub fc: f64,
    /// Time of the first sample, s.
    pub t0: f64,
    pub channels: [Vec<Complex32>; 3],
}

impl IqCapture {
    pub fn new(sample_rate: f64, fc: f64, t0: f64, channels: [Vec<Complex32>; 3]) -> Result<Self> {
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidInput(format!("sample rate {sample_rate} must be positive")));
        }
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidInput("IQ channels differ in length".into()));
        }
        Ok(Self { sample_rate, fc, t0, channels })
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-frame observables of one pass. Missing frames have `valid = false` and
/// NaN measurement fields.
#[derive(Debug, Clone, PartialEq)]
pub struct PassObservables {
    pub times: Vec<f64>,
    /// Wrapped to (-pi, pi].
    pub dphi01: Vec<f64>,
    pub dphi12: Vec<f64>,
    /// Measured Doppler including the unknown constant offset, Hz.
    pub doppler: Vec<f64>,
    pub snr: Vec<f64>,
    pub valid: Vec<bool>,
}

impl PassObservables {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            dphi01: Vec::with_capacity(n),
            dphi12: Vec::with_capacity(n),
            doppler: Vec::with_capacity(n),
            snr: Vec::with_capacity(n),
            valid: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn push(&mut self, t: f64, dphi01: f64, dphi12: f64, doppler: f64, snr: f64) {
        self.times.push(t);
        self.dphi01.push(dphi01);
        self.dphi12.push(dphi12);
        self.doppler.push(doppler);
        self.snr.push(snr);
        self.valid.push(true);
    }

    pub fn push_missing(&mut self, t: f64) {
        self.times.push(t);
        self.dphi01.push(f64::NAN);
        self.dphi12.push(f64::NAN);
        self.doppler.push(f64::NAN);
        self.snr.push(f64::NAN);
        self.valid.push(false);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if [self.dphi01.len(), self.dphi12.len(), self.doppler.len(), self.snr.len(), self.valid.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::InvalidInput("observable columns differ in length".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("observable times must be strictly increasing".into()));
        }
        for i in 0..n {
            if self.valid[i] && !(self.dphi01[i].is_finite() && self.dphi12[i].is_finite() && self.doppler[i].is_finite()) {
                return Err(Error::InvalidInput(format!("valid sample {i} has non-finite values")));
            }
        }
        Ok(())
    }

    /// Adds a constant to every present Doppler sample.
    pub fn shift_doppler(&mut self, offset: f64) {
        for (d, &v) in self.doppler.iter_mut().zip(&self.valid) {
            if v {
                *d += offset;
            }
        }
    }

    /// Subtracts constant phase offsets, rewrapping the result.
    pub fn remove_phase_offsets(&mut self, off01: f64, off12: f64) {
        for i in 0..self.len() {
            if self.valid[i] {
                self.dphi01[i] = wrap_pi(self.dphi01[i] - off01);
                self.dphi12[i] = wrap_pi(self.dphi12[i] - off12);
            }
        }
    }
}

/// Measurement impairments for synthetic observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation of the zero-mean noise on each phase difference, rad.
    pub phase_std: f64,
    /// Per-sample carrier-to-noise ratio of each IQ channel, dB; `None` is noiseless.
    pub snr_db: Option<f64>,
    /// Constant receive-chain offsets added to (dphi01, dphi12), rad.
    pub phase_offsets: [f64; 2],
    /// Gaussian jitter on directly synthesized Doppler, Hz.
    pub doppler_std: f64,
    /// Quantize directly synthesized Doppler to this bin width, Hz.
    pub doppler_bin: Option<f64>,
    /// Probability that a directly synthesized frame is missing.
    pub dropout: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { phase_std: 0.0, snr_db: None, phase_offsets: [0.0; 2], doppler_std: 0.0, doppler_bin: None, dropout: 0.0 }
    }
}

/// Capture parameters for IQ synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureConfig {
    pub sample_rate: f64,
    /// Length over which channel phase noise stays constant, s. Matching the
    /// STFT hop makes the noise seen per frame have `phase_std` per baseline.
    pub phase_noise_segment: f64,
    /// Upper bound on the synthesized duration, s.
    pub max_duration: Option<f64>,
}

impl Default for CaptureConfig {
    fn default() -> Self {
        Self { sample_rate: 2e6, phase_noise_segment: 0.007, max_duration: None }
    }
}

fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t <= times[0] {
        return values[0];
    }
    if t >= times[n - 1] {
        return values[n - 1];
    }
    let idx = times.partition_point(|&x| x <= t).clamp(1, n - 1);
    let (t0, t1) = (times[idx - 1], times[idx]);
    let w = (t - t0) / (t1 - t0);
    values[idx - 1] * (1.0 - w) + values[idx] * w
}

/// Synthesizes the three receive channels for a pass: a single complex tone
/// at true Doppler plus `offset`, inter-channel phases from the far-field
/// model plus configured offsets and noise, and additive white noise.
pub fn synthesize_capture<R: Rng + ?Sized>(
    truth: &PassTruth,
    array: &ArrayGeometry,
    noise: &NoiseSpec,
    fc: f64,
    offset: f64,
    cfg: &CaptureConfig,
    rng: &mut R,
) -> Result<IqCapture> {
    if truth.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: truth.len() });
    }
    let fs = cfg.sample_rate;
    let t_start = truth.times[0];
    let mut duration = truth.times[truth.len() - 1] - t_start;
    if let Some(max) = cfg.max_duration {
        duration = duration.min(max);
    }
    let n = (duration * fs).floor() as usize;
    let doppler = true_doppler(truth, fc);
    let (p01, p12): (Vec<f64>, Vec<f64>) =
        truth.az.iter().zip(&truth.el).map(|(&a, &e)| forward_phase(a, e, array)).unzip();

    let seg_len = ((cfg.phase_noise_segment * fs).round() as usize).max(1);
    let seg_count = n.div_ceil(seg_len) + 1;
    let phase_noise: Vec<[f64; 3]> = if noise.phase_std > 0.0 {
        let dist = Normal::new(0.0, noise.phase_std).map_err(|e| Error::InvalidInput(e.to_string()))?;
        (0..seg_count).map(|_| [dist.sample(rng), dist.sample(rng), dist.sample(rng)]).collect()
    } else {
        vec![[0.0; 3]; seg_count]
    };
    let awgn_sigma = noise.snr_db.map(|snr| (0.5 / 10f64.powf(snr / 10.0)).sqrt());

    let mut channels: [Vec<Complex32>; 3] = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut carrier = 0.0f64;
    let dt = 1.0 / fs;
    for idx in 0..n {
        let t = t_start + idx as f64 * dt;
        let f = interp(&truth.times, &doppler, t) + offset;
        let a01 = interp(&truth.times, &p01, t) + noise.phase_offsets[0];
        let a12 = interp(&truth.times, &p12, t) + noise.phase_offsets[1];
        let eta = phase_noise[idx / seg_len];
        // arg X0 - arg X1 = a01, arg X1 - arg X2 = a12
        let phases = [carrier + a01 + eta[0], carrier + eta[1], carrier - a12 + eta[2]];
        for (ch, ph) in channels.iter_mut().zip(phases) {
            let (s, c) = ph.sin_cos();
            let mut z = Complex32::new(c as f32, s as f32);
            if let Some(sigma) = awgn_sigma {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                z += Complex32::new((sigma * re) as f32, (sigma * im) as f32);
            }
            ch.push(z);
        }
        carrier = (carrier + std::f64::consts::TAU * f * dt) % std::f64::consts::TAU;
    }
    IqCapture::new(fs, fc, t_start, channels)
}

/// Synthesizes observables directly at the truth sample times, bypassing the
/// IQ and STFT stages: forward-model phase differences with offsets and
/// noise, and true Doppler plus `offset` with optional jitter, bin
/// quantization and dropout.
pub fn observe_direct<R: Rng + ?Sized>(
    truth: &PassTruth,
    array: &ArrayGeometry,
    noise: &NoiseSpec,
    fc: f64,
    offset: f64,
    rng: &mut R,
) -> Result<PassObservables> {
    let doppler = true_doppler(truth, fc);
    // per-channel noise so each difference carries phase_std
    let chan = Normal::new(0.0, noise.phase_std / std::f64::consts::SQRT_2).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let jitter = Normal::new(0.0, noise.doppler_std).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let snr = noise.snr_db.unwrap_or(f64::INFINITY);
    let mut obs = PassObservables::with_capacity(truth.len());
    for i in 0..truth.len() {
        let (a, b) = forward_phase(truth.az[i], truth.el[i], array);
        let (e0, e1, e2) = if noise.phase_std > 0.0 {
            (chan.sample(rng), chan.sample(rng), chan.sample(rng))
        } else {
            (0.0, 0.0, 0.0)
        };
        let mut f = doppler[i] + offset;
        if noise.doppler_std > 0.0 {
            f += jitter.sample(rng);
        }
        if let Some(bin) = noise.doppler_bin {
            f = (f / bin).round() * bin;
        }
        let dropped = noise.dropout > 0.0 && rng.random::<f64>() < noise.dropout;
        if dropped {
            obs.push_missing(truth.times[i]);
        } else {
            obs.push(
                truth.times[i],
                wrap_pi(a + noise.phase_offsets[0] + e0 - e1),
                wrap_pi(b + noise.phase_offsets[1] + e1 - e2),
                f,
                snr,
            );
        }
    }
    Ok(obs)
}
