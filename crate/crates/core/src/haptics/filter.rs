//! Second-order IIR sections and the vibrotactile band-limit filter.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{HapticError, SampleBuffer};

/// Normalized biquad coefficients (`a0 == 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Bilinear-transform low-pass (RBJ cookbook form).
    pub fn lowpass(cutoff_hz: f64, sample_rate_hz: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / sample_rate_hz;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b0: (1.0 - cos) / 2.0 / a0,
            b1: (1.0 - cos) / a0,
            b2: (1.0 - cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    pub fn highpass(cutoff_hz: f64, sample_rate_hz: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / sample_rate_hz;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        Self {
            b0: (1.0 + cos) / 2.0 / a0,
            b1: -(1.0 + cos) / a0,
            b2: (1.0 + cos) / 2.0 / a0,
            a1: -2.0 * cos / a0,
            a2: (1.0 - alpha) / a0,
        }
    }

    /// Magnitude of the frequency response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        let (s1, c1) = w.sin_cos();
        let (s2, c2) = (2.0 * w).sin_cos();
        let num_re = self.b0 + self.b1 * c1 + self.b2 * c2;
        let num_im = -(self.b1 * s1 + self.b2 * s2);
        let den_re = 1.0 + self.a1 * c1 + self.a2 * c2;
        let den_im = -(self.a1 * s1 + self.a2 * s2);
        ((num_re * num_re + num_im * num_im) / (den_re * den_re + den_im * den_im)).sqrt()
    }

    /// Filters `samples` in place from a zeroed state (transposed direct form II).
    pub fn process(&self, samples: &mut [f64]) {
        let (mut z1, mut z2) = (0.0, 0.0);
        for x in samples.iter_mut() {
            let input = *x;
            let y = self.b0 * input + z1;
            z1 = self.b1 * input - self.a1 * y + z2;
            z2 = self.b2 * input - self.a2 * y;
            *x = y;
        }
    }
}

/// 4th-order Butterworth band-pass built from a high-pass and a low-pass section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPass {
    pub highpass: Biquad,
    pub lowpass: Biquad,
}

impl BandPass {
    pub fn new(low_hz: f64, high_hz: f64, sample_rate_hz: f64) -> Result<Self, HapticError> {
        let nyquist = sample_rate_hz / 2.0;
        let valid = low_hz.is_finite() && high_hz.is_finite() && 0.0 < low_hz && low_hz < high_hz && high_hz < nyquist;
        if !valid {
            return Err(HapticError::BandSpec {
                low_hz,
                high_hz,
                sample_rate_hz,
            });
        }
        Ok(Self {
            highpass: Biquad::highpass(low_hz, sample_rate_hz, FRAC_1_SQRT_2),
            lowpass: Biquad::lowpass(high_hz, sample_rate_hz, FRAC_1_SQRT_2),
        })
    }

    pub fn magnitude(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        self.highpass.magnitude(freq_hz, sample_rate_hz) * self.lowpass.magnitude(freq_hz, sample_rate_hz)
    }

    pub fn process(&self, samples: &mut [f64]) {
        self.highpass.process(samples);
        self.lowpass.process(samples);
    }
}

/// Restricts a buffer to `[low_hz, high_hz]`. Output length equals input length.
pub fn band_limit(buffer: &SampleBuffer, low_hz: f64, high_hz: f64) -> Result<SampleBuffer, HapticError> {
    let filter = BandPass::new(low_hz, high_hz, buffer.sample_rate_hz as f64)?;
    let mut samples = buffer.samples.clone();
    filter.process(&mut samples);
    Ok(SampleBuffer {
        sample_rate_hz: buffer.sample_rate_hz,
        samples,
    })
}
