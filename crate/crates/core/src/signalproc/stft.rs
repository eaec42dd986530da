use std::sync::Arc;

use num_complex::Complex32;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    /// Window length, s.
    pub window: f64,
    /// Fractional overlap between consecutive windows, in [0, 1).
    pub overlap: f64,
    /// Apply a Hann taper (otherwise rectangular).
    pub hann: bool,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { window: 0.014, overlap: 0.5, hann: true }
    }
}

/// Complex short-time spectrum, frames by frequency bins. Bins are ordered
/// from `-fs/2` upward.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// Center time of each frame, s.
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    pub values: Vec<Vec<Complex32>>,
}

impl Spectrogram {
    pub fn bin_width(&self) -> f64 {
        if self.freqs.len() > 1 {
            self.freqs[1] - self.freqs[0]
        } else {
            0.0
        }
    }
}

/// Frame layout shared by the batch and streaming front-ends.
pub(crate) struct FrameLayout {
    pub len: usize,
    pub hop: usize,
    pub count: usize,
    pub window: Vec<f32>,
    pub freqs: Vec<f64>,
    fft: Arc<dyn Fft<f32>>,
}

impl FrameLayout {
    pub fn new(samples: usize, sample_rate: f64, cfg: &StftConfig) -> Result<Self> {
        if !(cfg.window > 0.0) || !(0.0..1.0).contains(&cfg.overlap) {
            return Err(Error::InvalidInput(format!("bad STFT window {} / overlap {}", cfg.window, cfg.overlap)));
        }
        let len = (cfg.window * sample_rate).round() as usize;
        if len < 2 {
            return Err(Error::InvalidInput("STFT window shorter than two samples".into()));
        }
        if samples < len {
            return Err(Error::InsufficientSamples { needed: len, got: samples });
        }
        let hop = (((1.0 - cfg.overlap) * len as f64).round() as usize).max(1);
        let count = (samples - len) / hop + 1;
        let window = if cfg.hann {
            // symmetric Hann
            (0..len)
                .map(|i| {
                    let x = std::f64::consts::TAU * i as f64 / (len - 1) as f64;
                    (0.5 - 0.5 * x.cos()) as f32
                })
                .collect()
        } else {
            vec![1.0; len]
        };
        let half = len / 2;
        let freqs = (0..len).map(|b| (b as f64 - half as f64) * sample_rate / len as f64).collect();
        let fft = FftPlanner::new().plan_fft_forward(len);
        Ok(Self { len, hop, count, window, freqs, fft })
    }

    /// Frame center time.
    pub fn time(&self, frame: usize, t0: f64, sample_rate: f64) -> f64 {
        t0 + (frame * self.hop) as f64 / sample_rate + (self.len - 1) as f64 / (2.0 * sample_rate)
    }

    /// Windowed, fft-shifted spectrum of one frame written into `buf`.
    pub fn transform(&self, channel: &[Complex32], frame: usize, buf: &mut Vec<Complex32>) {
        let start = frame * self.hop;
        buf.clear();
        buf.extend(channel[start..start + self.len].iter().zip(&self.window).map(|(z, &w)| z * w));
        self.fft.process(buf);
        buf.rotate_left(self.len - self.len / 2);
    }
}

/// Short-time Fourier transform of one channel.
pub fn stft(channel: &[Complex32], sample_rate: f64, t0: f64, cfg: &StftConfig) -> Result<Spectrogram> {
    let layout = FrameLayout::new(channel.len(), sample_rate, cfg)?;
    let mut values = Vec::with_capacity(layout.count);
    let mut times = Vec::with_capacity(layout.count);
    let mut buf = Vec::with_capacity(layout.len);
    for f in 0..layout.count {
        layout.transform(channel, f, &mut buf);
        values.push(buf.clone());
        times.push(layout.time(f, t0, sample_rate));
    }
    Ok(Spectrogram { times, freqs: layout.freqs.clone(), values })
}
