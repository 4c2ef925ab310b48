use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{HapticError, SampleBuffer};

const FULL_SCALE: f64 = 32767.0;

/// Writes a mono 16-bit PCM WAV; each sample is quantized as `round(s * 32767)`.
pub fn export_wav(buffer: &SampleBuffer, path: impl AsRef<Path>) -> Result<(), HapticError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec)?;
    {
        let mut samples = writer.get_i16_writer(buffer.samples.len() as u32);
        for &s in &buffer.samples {
            samples.write_sample((s.clamp(-1.0, 1.0) * FULL_SCALE).round() as i16);
        }
        samples.flush()?;
    }
    writer.finalize()?;
    Ok(())
}

/// Reads a mono 16-bit WAV back into `[-1, 1]` samples.
pub fn import_wav(path: impl AsRef<Path>) -> Result<SampleBuffer, HapticError> {
    let reader = WavReader::open(path)?;
    let spec = reader.spec();
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / FULL_SCALE))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampleBuffer {
        sample_rate_hz: spec.sample_rate,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_size_matches_riff_arithmetic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let buf = SampleBuffer {
            sample_rate_hz: 48_000,
            samples: vec![0.25; 96_000],
        };
        export_wav(&buf, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 44 + 192_000);
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 36 + 192_000);
        assert_eq!(&bytes[8..16], b"WAVEfmt ");
        assert_eq!(u16::from_le_bytes([bytes[20], bytes[21]]), 1, "PCM format tag");
        assert_eq!(&bytes[36..40], b"data");
        assert_eq!(u32::from_le_bytes(bytes[40..44].try_into().unwrap()), 192_000);
        // round(0.25 * 32767) = 8192
        assert_eq!(i16::from_le_bytes([bytes[44], bytes[45]]), 8192);
    }

    #[test]
    fn empty_buffer_has_zero_data_chunk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.wav");
        export_wav(
            &SampleBuffer {
                sample_rate_hz: 8000,
                samples: vec![],
            },
            &path,
        )
        .unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 44);
        assert_eq!(u32::from_le_bytes(bytes[40..44].try_into().unwrap()), 0);
        assert!(import_wav(&path).unwrap().samples.is_empty());
    }

    #[test]
    fn reimport_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.wav");
        let buf = SampleBuffer {
            sample_rate_hz: 8000,
            samples: (0..500).map(|i| ((i as f64) * 0.37).sin() * 0.9).collect(),
        };
        export_wav(&buf, &path).unwrap();
        let back = import_wav(&path).unwrap();
        assert_eq!(back.sample_rate_hz, 8000);
        for (a, b) in buf.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() <= 1.0 / 32767.0);
        }
    }
}
