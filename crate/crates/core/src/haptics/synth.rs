use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::filter::{band_limit, BandPass};
use super::{
    HapticError, PatternId, SampleBuffer, DEFAULT_DURATION_S, MIN_SAMPLE_RATE_HZ, VIBRATION_BAND_HIGH_HZ,
    VIBRATION_BAND_LOW_HZ,
};

/// Peak amplitude after normalization.
pub const NORMALIZED_PEAK: f64 = 0.9;

// Raised-cosine onset applied to each burst, seconds.
const BURST_ATTACK_S: f64 = 0.002;

/// Waveform family and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    /// Band-limited noise under a sinusoidal amplitude envelope.
    NoiseAm {
        band_low_hz: f64,
        band_high_hz: f64,
        am_hz: f64,
        am_depth: f64,
    },
    /// Exponentially decaying sine bursts repeated at a fixed rate.
    Bursts {
        carrier_hz: f64,
        tau_s: f64,
        repeat_hz: f64,
    },
    /// Linear frequency sweep with a rise/fall envelope plus a low noise bed.
    Sweep {
        start_hz: f64,
        end_hz: f64,
        sweep_s: f64,
        noise_level: f64,
        noise_low_hz: f64,
        noise_high_hz: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HapticPattern {
    pub id: PatternId,
    pub display_name: String,
    pub recipe: Recipe,
    pub duration_s: f64,
}

fn in_band(what: &'static str, value: f64) -> Result<(), HapticError> {
    if value > VIBRATION_BAND_LOW_HZ && value < VIBRATION_BAND_HIGH_HZ {
        Ok(())
    } else {
        Err(HapticError::BandViolation { what, value })
    }
}

fn positive(name: &str, value: f64) -> Result<(), HapticError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(HapticError::InvalidParameter {
            name: name.to_string(),
            value,
        })
    }
}

fn unit(name: &str, value: f64) -> Result<(), HapticError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(HapticError::InvalidParameter {
            name: name.to_string(),
            value,
        })
    }
}

impl Recipe {
    fn validate(&self) -> Result<(), HapticError> {
        match *self {
            Recipe::NoiseAm {
                band_low_hz,
                band_high_hz,
                am_hz,
                am_depth,
            } => {
                in_band("band_low_hz", band_low_hz)?;
                in_band("band_high_hz", band_high_hz)?;
                if band_low_hz >= band_high_hz {
                    return Err(HapticError::InvalidParameter {
                        name: "band_high_hz".into(),
                        value: band_high_hz,
                    });
                }
                positive("am_hz", am_hz)?;
                unit("am_depth", am_depth)
            }
            Recipe::Bursts {
                carrier_hz,
                tau_s,
                repeat_hz,
            } => {
                in_band("carrier_hz", carrier_hz)?;
                positive("tau_s", tau_s)?;
                positive("repeat_hz", repeat_hz)
            }
            Recipe::Sweep {
                start_hz,
                end_hz,
                sweep_s,
                noise_level,
                noise_low_hz,
                noise_high_hz,
            } => {
                in_band("start_hz", start_hz)?;
                in_band("end_hz", end_hz)?;
                in_band("noise_low_hz", noise_low_hz)?;
                in_band("noise_high_hz", noise_high_hz)?;
                if noise_low_hz >= noise_high_hz {
                    return Err(HapticError::InvalidParameter {
                        name: "noise_high_hz".into(),
                        value: noise_high_hz,
                    });
                }
                positive("sweep_s", sweep_s)?;
                unit("noise_level", noise_level)
            }
        }
    }

    fn param_mut(&mut self, name: &str) -> Option<&mut f64> {
        match self {
            Recipe::NoiseAm {
                band_low_hz,
                band_high_hz,
                am_hz,
                am_depth,
            } => match name {
                "band_low_hz" => Some(band_low_hz),
                "band_high_hz" => Some(band_high_hz),
                "am_hz" => Some(am_hz),
                "am_depth" => Some(am_depth),
                _ => None,
            },
            Recipe::Bursts {
                carrier_hz,
                tau_s,
                repeat_hz,
            } => match name {
                "carrier_hz" => Some(carrier_hz),
                "tau_s" => Some(tau_s),
                "repeat_hz" => Some(repeat_hz),
                _ => None,
            },
            Recipe::Sweep {
                start_hz,
                end_hz,
                sweep_s,
                noise_level,
                noise_low_hz,
                noise_high_hz,
            } => match name {
                "start_hz" => Some(start_hz),
                "end_hz" => Some(end_hz),
                "sweep_s" => Some(sweep_s),
                "noise_level" => Some(noise_level),
                "noise_low_hz" => Some(noise_low_hz),
                "noise_high_hz" => Some(noise_high_hz),
                _ => None,
            },
        }
    }
}

impl HapticPattern {
    pub fn new(id: PatternId, recipe: Recipe, duration_s: f64) -> Result<Self, HapticError> {
        positive("duration_s", duration_s)?;
        recipe.validate()?;
        Ok(Self {
            id,
            display_name: id.display_name().to_string(),
            recipe,
            duration_s,
        })
    }

    /// The shipped recipe for `id`.
    pub fn builtin(id: PatternId) -> Self {
        let recipe = match id {
            PatternId::WC => Recipe::NoiseAm {
                band_low_hz: 50.0,
                band_high_hz: 600.0,
                am_hz: 8.0,
                am_depth: 0.8,
            },
            PatternId::GT => Recipe::Bursts {
                carrier_hz: 900.0,
                tau_s: 0.030,
                repeat_hz: 2.0,
            },
            PatternId::WS => Recipe::Bursts {
                carrier_hz: 200.0,
                tau_s: 0.050,
                repeat_hz: 1.5,
            },
            PatternId::FR => Recipe::NoiseAm {
                band_low_hz: 100.0,
                band_high_hz: 400.0,
                am_hz: 1.0,
                am_depth: 0.5,
            },
            PatternId::MW => Recipe::Sweep {
                start_hz: 200.0,
                end_hz: 800.0,
                sweep_s: 1.5,
                noise_level: 0.15,
                noise_low_hz: 100.0,
                noise_high_hz: 700.0,
            },
        };
        Self::new(id, recipe, DEFAULT_DURATION_S).expect("builtin recipes are valid")
    }

    /// Returns a copy with one named parameter replaced, revalidated.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, HapticError> {
        let mut next = self.clone();
        if name == "duration_s" {
            next.duration_s = value;
        } else {
            let slot = next
                .recipe
                .param_mut(name)
                .ok_or_else(|| HapticError::InvalidParameter {
                    name: name.to_string(),
                    value,
                })?;
            *slot = value;
        }
        Self::new(next.id, next.recipe, next.duration_s)
    }

    pub fn sample_count(&self, sample_rate_hz: u32) -> usize {
        (self.duration_s * sample_rate_hz as f64).round() as usize
    }
}

fn shaped_noise(n: usize, rate: f64, low: f64, high: f64, seed: u64) -> Result<Vec<f64>, HapticError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    // two passes give an 8th-order skirt so almost nothing leaks past the final band limit
    let shaping = BandPass::new(low, high, rate)?;
    shaping.process(&mut noise);
    shaping.process(&mut noise);
    Ok(noise)
}

fn render_raw(pattern: &HapticPattern, rate: f64, n: usize) -> Result<Vec<f64>, HapticError> {
    let seed = pattern.id.noise_seed();
    Ok(match pattern.recipe {
        Recipe::NoiseAm {
            band_low_hz,
            band_high_hz,
            am_hz,
            am_depth,
        } => {
            let noise = shaped_noise(n, rate, band_low_hz, band_high_hz, seed)?;
            noise
                .into_iter()
                .enumerate()
                .map(|(i, x)| {
                    let t = i as f64 / rate;
                    let env = 1.0 - am_depth * 0.5 * (1.0 - (2.0 * PI * am_hz * t).sin());
                    x * env
                })
                .collect()
        }
        Recipe::Bursts {
            carrier_hz,
            tau_s,
            repeat_hz,
        } => {
            let period = 1.0 / repeat_hz;
            (0..n)
                .map(|i| {
                    let t = i as f64 / rate;
                    let local = t - (t / period).floor() * period;
                    let attack = if local < BURST_ATTACK_S {
                        0.5 * (1.0 - (PI * local / BURST_ATTACK_S).cos())
                    } else {
                        1.0
                    };
                    attack * (-local / tau_s).exp() * (2.0 * PI * carrier_hz * local).sin()
                })
                .collect()
        }
        Recipe::Sweep {
            start_hz,
            end_hz,
            sweep_s,
            noise_level,
            noise_low_hz,
            noise_high_hz,
        } => {
            let noise = shaped_noise(n, rate, noise_low_hz, noise_high_hz, seed)?;
            let noise_peak = noise.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
            let mut phase = 0.0f64;
            (0..n)
                .map(|i| {
                    let t = i as f64 / rate;
                    if t >= sweep_s {
                        return 0.0;
                    }
                    let freq = start_hz + (end_hz - start_hz) * t / sweep_s;
                    let env = (PI * t / sweep_s).sin().powi(2);
                    let tone = phase.sin();
                    phase += 2.0 * PI * freq / rate;
                    env * ((1.0 - noise_level) * tone + noise_level * noise[i] / noise_peak)
                })
                .collect()
        }
    })
}

/// Renders `pattern`, band-limits it to 1-1000 Hz and normalizes the peak to 0.9.
pub fn synthesize(pattern: &HapticPattern, sample_rate_hz: u32) -> Result<SampleBuffer, HapticError> {
    if sample_rate_hz < MIN_SAMPLE_RATE_HZ {
        return Err(HapticError::SampleRate(sample_rate_hz));
    }
    pattern.recipe.validate()?;
    let rate = sample_rate_hz as f64;
    let n = pattern.sample_count(sample_rate_hz);
    let raw = SampleBuffer {
        sample_rate_hz,
        samples: render_raw(pattern, rate, n)?,
    };
    let mut out = band_limit(&raw, VIBRATION_BAND_LOW_HZ, VIBRATION_BAND_HIGH_HZ)?;
    let peak = out.peak();
    if peak > 0.0 {
        let gain = NORMALIZED_PEAK / peak;
        out.samples.iter_mut().for_each(|s| *s *= gain);
    }
    Ok(out)
}
