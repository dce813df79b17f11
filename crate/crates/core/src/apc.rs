//! All-pass cascades that smear reflection energy in time.
//!
//! Two parameterizations share one four-stage structure built from the
//! recursive section y[n] = g x[n] + x[n - tau] - g y[n - tau]. Stage
//! delays fall geometrically by the ratio eta = pi between neighbours, so
//! the echoes of different stages never lock onto a common grid.
//!
//! The surface cascade models the short decay a scattering wall adds after
//! each reflection. All four gains are 1/sqrt(2), which makes the Schroeder
//! decay time of a stage proportional to its delay; the longest stage is
//! sized so its decay time equals the requested T_s and the shorter stages
//! only densify the early part.
//!
//! The object cascade models scattering by room contents on one specific
//! path. Its total group delay is gamma = zeta * pathLength / c, split
//! across the stages by the same ratio, and its gains taper so the impulse
//! response envelope rises before it decays.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::model::RoomGeometry;
use crate::{Error, Result};

/// Stage count of every non-bypass cascade.
pub const APC_STAGES: usize = 4;

/// Delay ratio eta between successive stages.
pub const DELAY_RATIO: f64 = PI;

/// One recursive all-pass section y[n] = g x[n] + x[n - tau] - g y[n - tau].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllPassStage {
    /// Feedforward/feedback gain g, |g| < 1.
    pub gain: f64,
    /// Delay tau in samples, at least 1.
    pub delay_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApcKind {
    SurfaceDecay,
    ObjectGamma,
    /// No stages; processing returns the input unchanged.
    Bypass,
}

/// A designed cascade: exactly [`APC_STAGES`] stages, or none for a bypass.
#[derive(Debug, Clone, PartialEq)]
pub struct ApcSpec {
    pub kind: ApcKind,
    pub stages: Vec<AllPassStage>,
}

impl ApcSpec {
    pub fn bypass() -> Self {
        ApcSpec {
            kind: ApcKind::Bypass,
            stages: Vec::new(),
        }
    }

    pub fn is_bypass(&self) -> bool {
        self.stages.is_empty()
    }
}

/// Input to the surface cascade designer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceScatterParams {
    /// Target decay time T_s in seconds.
    pub local_decay_time: f64,
}

/// Runs one stage over `input`, returning a signal of the same length.
pub fn allpass_process(stage: &AllPassStage, input: &[f64]) -> Vec<f64> {
    let mut buf = input.to_vec();
    run_stage(stage, &mut buf);
    buf
}

fn run_stage(stage: &AllPassStage, buf: &mut [f64]) {
    let g = stage.gain;
    let tau = stage.delay_samples;
    assert!(
        tau >= 1,
        "all-pass stage needs a delay of at least one sample"
    );
    assert!(g.abs() < 1.0, "all-pass stage gain must satisfy |g| < 1");
    let mut x_hist = vec![0.0; tau];
    let mut y_hist = vec![0.0; tau];
    let mut pos = 0;
    for sample in buf.iter_mut() {
        let x = *sample;
        let y = g * x + x_hist[pos] - g * y_hist[pos];
        x_hist[pos] = x;
        y_hist[pos] = y;
        *sample = y;
        pos += 1;
        if pos == tau {
            pos = 0;
        }
    }
}

/// Local decay time T_s a scattering surface contributes: the round trip to
/// the average wall, scaled by the calibration factor `scale` (kappa). A
/// zero scale yields zero; callers substitute a bypass cascade for that.
pub fn estimate_local_decay_time(geometry: &RoomGeometry, scale: f64, speed_of_sound: f64) -> f64 {
    scale * 2.0 * geometry.mean_wall_distance / speed_of_sound
}

/// Designs the time-invariant surface cascade for decay time T_s.
///
/// The longest stage gets tau_s = T_s log10(sqrt(2)) / 3 seconds, which is
/// the delay whose Schroeder decay time T60 = 3 tau / log10(1/g) equals T_s
/// at gain 1/sqrt(2). Shorter stages divide that delay by eta repeatedly.
/// Fails when tau_s rounds below one sample at this rate.
pub fn design_surface_apc(params: &SurfaceScatterParams, sample_rate_hz: f64) -> Result<ApcSpec> {
    let tau_s = params.local_decay_time * SQRT_2.log10() / 3.0;
    let base = tau_s * sample_rate_hz;
    if base.round() < 1.0 {
        return Err(Error::DecayTimeTooShort {
            seconds: params.local_decay_time,
            sample_rate_hz,
        });
    }
    let stages = (0..APC_STAGES)
        .map(|i| AllPassStage {
            gain: FRAC_1_SQRT_2,
            delay_samples: round_delay(base / DELAY_RATIO.powi(i as i32)),
        })
        .collect();
    Ok(ApcSpec {
        kind: ApcKind::SurfaceDecay,
        stages,
    })
}

/// Total group delay gamma of the object cascade for one path, in seconds.
pub fn object_group_delay(path_length: f64, zeta: f64, speed_of_sound: f64) -> f64 {
    zeta * path_length / speed_of_sound
}

/// Stage delays of the object cascade, shortest first. Exposed separately
/// because the render loop keys its design cache on this vector.
pub fn object_delays(
    path_length: f64,
    zeta: f64,
    speed_of_sound: f64,
    sample_rate_hz: f64,
) -> [usize; APC_STAGES] {
    let gamma = object_group_delay(path_length, zeta, speed_of_sound);
    // Splitting gamma as tau_0 * (eta^-3 + eta^-2 + eta^-1 + 1) makes the
    // stage delays sum to gamma exactly before rounding.
    let normalizer: f64 = (0..APC_STAGES).map(|k| DELAY_RATIO.powi(-(k as i32))).sum();
    let tau_0 = gamma / normalizer;
    let mut delays = [0; APC_STAGES];
    for (i, d) in delays.iter_mut().enumerate() {
        let exponent = i as i32 - (APC_STAGES as i32 - 1);
        *d = round_delay(tau_0 * sample_rate_hz * DELAY_RATIO.powi(exponent));
    }
    delays
}

/// Stage gains of the object cascade, matching [`object_delays`] order.
/// The taper sqrt(2)^(-1, -1, -2, -3) onto increasing delays produces the
/// rise-then-fall envelope; a flat 1/sqrt(2) would decay from sample one.
pub fn object_gains() -> [f64; APC_STAGES] {
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.5, 0.5 * FRAC_1_SQRT_2]
}

/// Designs the per-path object cascade. `zeta == 0` yields a bypass.
pub fn design_object_apc(
    path_length: f64,
    zeta: f64,
    speed_of_sound: f64,
    sample_rate_hz: f64,
) -> ApcSpec {
    if zeta == 0.0 {
        return ApcSpec::bypass();
    }
    let delays = object_delays(path_length, zeta, speed_of_sound, sample_rate_hz);
    let stages = object_gains()
        .iter()
        .zip(delays)
        .map(|(&gain, delay_samples)| AllPassStage {
            gain,
            delay_samples,
        })
        .collect();
    ApcSpec {
        kind: ApcKind::ObjectGamma,
        stages,
    }
}

fn round_delay(value: f64) -> usize {
    (value.round() as usize).max(1)
}

/// Runs the whole cascade over `input` plus `tail_samples` of ring-out.
pub fn apc_process(spec: &ApcSpec, input: &[f64], tail_samples: usize) -> Vec<f64> {
    let mut buf = Vec::with_capacity(input.len() + tail_samples);
    buf.extend_from_slice(input);
    buf.resize(input.len() + tail_samples, 0.0);
    for stage in &spec.stages {
        run_stage(stage, &mut buf);
    }
    buf
}

/// Average group delay of the cascade in samples. Each stage contributes
/// its delay exactly (averaged over frequency), so the cascade total is the
/// plain sum; a bypass contributes zero.
pub fn average_group_delay(spec: &ApcSpec) -> f64 {
    spec.stages.iter().map(|s| s.delay_samples as f64).sum()
}
