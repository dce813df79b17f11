//! WAV input and output. Rendered impulse responses are written as 32-bit
//! float, the only format that survives a round trip without requantizing
//! the renderer's output. Reading accepts 32-bit float and 16-bit integer
//! files so external dry signals work too.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

pub struct WavData {
    pub sample_rate_hz: f64,
    /// One vector per channel, deinterleaved.
    pub channels: Vec<Vec<f64>>,
}

impl WavData {
    pub fn num_samples(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }
}

pub fn write_f32(
    path: &Path,
    sample_rate_hz: f64,
    channels: &[Vec<f64>],
) -> Result<(), hound::Error> {
    let spec = WavSpec {
        channels: channels.len() as u16,
        sample_rate: sample_rate_hz as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec)?;
    let frames = channels.first().map_or(0, Vec::len);
    for frame in 0..frames {
        for channel in channels {
            writer.write_sample(channel[frame] as f32)?;
        }
    }
    writer.finalize()
}

pub fn read(path: &Path) -> Result<WavData, hound::Error> {
    let mut reader = WavReader::open(path)?;
    let spec = reader.spec();
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()?,
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<Result<_, _>>()?,
        _ => return Err(hound::Error::Unsupported),
    };
    let n = spec.channels as usize;
    let frames = interleaved.len() / n;
    let mut channels = vec![Vec::with_capacity(frames); n];
    for (i, sample) in interleaved.into_iter().enumerate() {
        channels[i % n].push(sample);
    }
    Ok(WavData {
        sample_rate_hz: f64::from(spec.sample_rate),
        channels,
    })
}
