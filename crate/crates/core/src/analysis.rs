//! Measurements over impulse responses and designed filters.
//!
//! Everything here is a verification instrument: decay curves and times,
//! normalized echo density, and frequency responses. The render loop never
//! calls into this module, so tests can use it as an independent check on
//! the engine output.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::io::{self, Write};

use crate::apc::{AllPassStage, ApcSpec};
use crate::decomposition::SecondOrderFilter;
use crate::{Error, Result};

/// erfc(1 / sqrt(2)): the outlier fraction of a Gaussian beyond one
/// standard deviation, which normalizes echo density to 1 for noise.
const GAUSSIAN_TAIL_FRACTION: f64 = 0.317_310_507_862_914_1;

/// Anything with a complex frequency response on the unit circle.
pub trait FrequencyResponse {
    /// Response at normalized angular frequency omega in [0, pi].
    fn response_at(&self, omega: f64) -> Complex64;
}

impl FrequencyResponse for SecondOrderFilter {
    fn response_at(&self, omega: f64) -> Complex64 {
        SecondOrderFilter::response_at(self, omega)
    }
}

impl FrequencyResponse for AllPassStage {
    fn response_at(&self, omega: f64) -> Complex64 {
        let z_tau = Complex64::from_polar(1.0, -omega * self.delay_samples as f64);
        (self.gain + z_tau) / (1.0 + self.gain * z_tau)
    }
}

impl FrequencyResponse for ApcSpec {
    fn response_at(&self, omega: f64) -> Complex64 {
        self.stages.iter().fold(Complex64::new(1.0, 0.0), |acc, s| {
            acc * s.response_at(omega)
        })
    }
}

/// Magnitude response in dB on a uniform grid of `grid_size` frequencies
/// from 0 to Nyquist inclusive. A zero response yields -inf entries.
pub fn magnitude_response<T: FrequencyResponse + ?Sized>(system: &T, grid_size: usize) -> Vec<f64> {
    assert!(grid_size >= 2, "need at least the endpoints");
    (0..grid_size)
        .map(|k| {
            let omega = PI * k as f64 / (grid_size - 1) as f64;
            20.0 * system.response_at(omega).norm().log10()
        })
        .collect()
}

/// Group delay in samples between neighbouring grid frequencies, from the
/// finite difference of the unwrapped phase; the result has one entry less
/// than `grid_size`. The grid must be dense enough that the phase moves
/// less than pi between neighbours (grid_size greater than the largest
/// delay in samples).
pub fn group_delay_response<T: FrequencyResponse + ?Sized>(
    system: &T,
    grid_size: usize,
) -> Vec<f64> {
    assert!(grid_size >= 2, "need at least the endpoints");
    let step = PI / (grid_size - 1) as f64;
    let mut phases: Vec<f64> = (0..grid_size)
        .map(|k| system.response_at(step * k as f64).arg())
        .collect();
    unwrap_phase(&mut phases);
    phases.windows(2).map(|w| -(w[1] - w[0]) / step).collect()
}

fn unwrap_phase(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        phases[i] = phases[i - 1] + d;
    }
}

/// Schroeder energy decay curve in dB: at each sample, the energy still to
/// come, relative to the total. Monotone non-increasing by construction;
/// samples after the last energy are -inf. Fails on an all-zero input.
pub fn schroeder_edc(ir: &[f64]) -> Result<Vec<f64>> {
    let mut tail_energy = vec![0.0; ir.len()];
    let mut acc = 0.0;
    for (i, &x) in ir.iter().enumerate().rev() {
        acc += x * x;
        tail_energy[i] = acc;
    }
    let total = acc;
    if total <= 0.0 {
        return Err(Error::SilentInput);
    }
    Ok(tail_energy
        .iter()
        .map(|&e| 10.0 * (e / total).log10())
        .collect())
}

/// Decay time from the -5 to -35 dB span of an energy decay curve: a least
/// squares line through that span, extrapolated to -60 dB. Fails when the
/// curve never reaches -35 dB or the span is degenerate.
pub fn t60_from_edc(edc_db: &[f64], sample_rate_hz: f64) -> Result<f64> {
    let start = edc_db.iter().position(|&v| v <= -5.0);
    let end = edc_db.iter().position(|&v| v <= -35.0);
    let (start, end) = match (start, end) {
        (Some(s), Some(e)) if e > s => (s, e),
        _ => return Err(Error::InsufficientDecayRange),
    };
    // Fit only the finite part; a curve can fall straight to -inf when the
    // signal simply stops, and those samples carry no slope information.
    let points: Vec<(f64, f64)> = (start..=end)
        .filter(|&i| edc_db[i].is_finite())
        .map(|i| (i as f64 / sample_rate_hz, edc_db[i]))
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientDecayRange);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::InsufficientDecayRange);
    }
    let slope = (n * sxy - sx * sy) / denom;
    if slope >= 0.0 {
        return Err(Error::InsufficientDecayRange);
    }
    Ok(-60.0 / slope)
}

/// Normalized echo density profile: per window position, the fraction of
/// samples outside one windowed standard deviation, scaled so Gaussian
/// noise sits at 1.0. Entries are (window center time in seconds, value).
/// Windows step by an eighth of their length; signals shorter than one
/// window produce an empty profile.
pub fn normalized_echo_density(ir: &[f64], sample_rate_hz: f64, window_ms: f64) -> Vec<(f64, f64)> {
    let w = ((window_ms / 1000.0) * sample_rate_hz).round() as usize;
    if w < 2 || ir.len() < w {
        return Vec::new();
    }
    let hop = (w / 8).max(1);
    let mut profile = Vec::new();
    let mut start = 0;
    while start + w <= ir.len() {
        let window = &ir[start..start + w];
        let mean: f64 = window.iter().sum::<f64>() / w as f64;
        let var: f64 = window.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / w as f64;
        let sd = var.sqrt();
        let outliers = window.iter().filter(|&&x| x.abs() > sd).count();
        let ned = (outliers as f64 / w as f64) / GAUSSIAN_TAIL_FRACTION;
        let center = (start + w / 2) as f64 / sample_rate_hz;
        profile.push((center, ned));
        start += hop;
    }
    profile
}

/// The bundle of measurements the command line exports.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisMetrics {
    pub sample_rate_hz: f64,
    /// Energy decay curve in dB, one entry per sample.
    pub edc_db: Vec<f64>,
    /// Decay time from the -5..-35 dB fit; None when the curve never gets
    /// that far down.
    pub t60_seconds: Option<f64>,
    /// Echo density profile over 20 ms windows.
    pub echo_density: Vec<(f64, f64)>,
    /// Magnitude spectrum of the signal, (frequency in Hz, dB), log-spaced
    /// across the audio band.
    pub spectrum: Vec<(f64, f64)>,
    /// Mean group delay of the signal in samples.
    pub mean_group_delay_samples: f64,
}

/// Runs every measurement over one impulse response.
pub fn compute_metrics(ir: &[f64], sample_rate_hz: f64) -> Result<AnalysisMetrics> {
    let edc_db = schroeder_edc(ir)?;
    let t60_seconds = match t60_from_edc(&edc_db, sample_rate_hz) {
        Ok(t) => Some(t),
        Err(Error::InsufficientDecayRange) => None,
        Err(e) => return Err(e),
    };
    let echo_density = normalized_echo_density(ir, sample_rate_hz, 20.0);
    let spectrum = log_spectrum(ir, sample_rate_hz, 256);
    let mean_group_delay_samples = mean_group_delay(ir);
    Ok(AnalysisMetrics {
        sample_rate_hz,
        edc_db,
        t60_seconds,
        echo_density,
        spectrum,
        mean_group_delay_samples,
    })
}

/// Magnitude of the signal's transfer function at `points` log-spaced
/// frequencies between 20 Hz and 0.45 fs, evaluated directly.
fn log_spectrum(ir: &[f64], sample_rate_hz: f64, points: usize) -> Vec<(f64, f64)> {
    let lo: f64 = 20.0;
    let hi: f64 = 0.45 * sample_rate_hz;
    if hi <= lo || ir.is_empty() {
        return Vec::new();
    }
    (0..points)
        .map(|i| {
            let f = lo * (hi / lo).powf(i as f64 / (points - 1) as f64);
            let omega = 2.0 * PI * f / sample_rate_hz;
            // Horner-style rotation: sum x[n] e^{-j omega n}.
            let step = Complex64::from_polar(1.0, -omega);
            let mut rot = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for &x in ir {
                acc += rot * x;
                rot *= step;
            }
            (f, 20.0 * acc.norm().log10())
        })
        .collect()
}

/// Mean group delay in samples via the unwrapped FFT phase: the average of
/// -dphi/domega over [0, pi] telescopes to (phi(0) - phi(pi)) / pi.
fn mean_group_delay(ir: &[f64]) -> f64 {
    if ir.is_empty() {
        return 0.0;
    }
    // Oversample the spectrum four times so the phase never wraps by more
    // than pi between bins even when the energy sits at the very end.
    let n = (4 * ir.len()).next_power_of_two();
    let mut buf: Vec<Complex64> = ir.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mut phases: Vec<f64> = buf[..n / 2 + 1].iter().map(|c| c.arg()).collect();
    unwrap_phase(&mut phases);
    (phases[0] - phases[n / 2]) / PI
}

/// Writes metrics as CSV with the fixed header `metric,time_or_freq,value`.
/// Times are seconds, frequencies Hz, always with a `.` decimal separator.
/// The decay curve is thinned to roughly millisecond steps to keep files
/// reviewable; infinite dB values print as `-inf`.
pub fn write_metrics_csv<W: Write>(metrics: &AnalysisMetrics, out: &mut W) -> io::Result<()> {
    writeln!(out, "metric,time_or_freq,value")?;
    let edc_step = ((metrics.sample_rate_hz / 1000.0).round() as usize).max(1);
    for (i, v) in metrics.edc_db.iter().enumerate().step_by(edc_step) {
        writeln!(out, "edc_db,{},{}", i as f64 / metrics.sample_rate_hz, v)?;
    }
    if let Some(t60) = metrics.t60_seconds {
        writeln!(out, "t60_seconds,0,{t60}")?;
    }
    for (t, v) in &metrics.echo_density {
        writeln!(out, "echo_density,{t},{v}")?;
    }
    for (f, v) in &metrics.spectrum {
        writeln!(out, "spectrum_db,{f},{v}")?;
    }
    writeln!(
        out,
        "mean_group_delay_samples,0,{}",
        metrics.mean_group_delay_samples
    )?;
    Ok(())
}
