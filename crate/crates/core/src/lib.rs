//! Offline room impulse response rendering for shoebox rooms.
//!
//! The renderer enumerates image sources up to a configurable reflection
//! order, splits each reflection into a specular and a diffuse part with a
//! power-complementary filter pair, smears both parts in time with short
//! all-pass cascades, and hands the diffuse energy to a feedback delay
//! network whose output channels sit on fixed directions around the
//! receiver. The result is a mono or multichannel impulse response plus the
//! resolved design parameters that produced it.
//!
//! Modules follow the signal path:
//!
//! - [`model`]: scene description, validation, derived room geometry
//! - [`ism`]: image source enumeration and per-reflection taps
//! - [`decomposition`]: specular/diffuse filter pairs per wall
//! - [`apc`]: all-pass cascades for surface and object scattering
//! - [`fdn`]: the late-field delay network and its spatial output set
//! - [`engine`]: the render loop that ties the above together
//! - [`analysis`]: decay, echo density, and response measurements

pub mod analysis;
pub mod apc;
pub mod decomposition;
pub mod engine;
pub mod fdn;
pub mod ism;
pub mod model;

/// Errors reported by scene validation, filter design, and analysis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scene field violates its range or containment invariant. `field`
    /// is the JSON path of the offending value.
    #[error("invalid scene: {field}: {reason}")]
    InvalidScene { field: String, reason: String },

    /// The requested surface decay time rounds to less than one sample.
    #[error("surface decay time {seconds} s is too short to realize at {sample_rate_hz} Hz")]
    DecayTimeTooShort { seconds: f64, sample_rate_hz: f64 },

    /// A wall crossover frequency falls outside the open interval
    /// (0, sampleRate / 2).
    #[error("crossover frequency {crossover_hz} Hz is outside (0, {} Hz)", sample_rate_hz / 2.0)]
    CrossoverOutOfRange {
        crossover_hz: f64,
        sample_rate_hz: f64,
    },

    /// The room is too small to host the requested number of distinct
    /// delay-line lengths.
    #[error(
        "mean free path of {line_samples:.1} samples cannot host {lines} distinct delay lines"
    )]
    RoomTooSmall { line_samples: f64, lines: usize },

    /// Mean absorption outside (0, 1) has no finite Eyring decay time.
    #[error("mean absorption {mean_absorption} is outside (0, 1), no finite decay target exists")]
    AbsorptionOutOfRange { mean_absorption: f64 },

    /// The configured impulse response is shorter than the latest
    /// reflection it would need to hold.
    #[error(
        "impulse response length {configured_seconds} s ends before the latest reflection at {required_seconds} s"
    )]
    IrTooShort {
        required_seconds: f64,
        configured_seconds: f64,
    },

    /// An analysis input carried no energy at all.
    #[error("input signal is all zero")]
    SilentInput,

    /// The energy decay curve never reaches the -35 dB point needed for a
    /// decay time fit.
    #[error("insufficient decay range: energy decay never reaches -35 dB")]
    InsufficientDecayRange,

    /// Convolution inputs were recorded at different sample rates.
    #[error("sample rate mismatch: impulse response {ir_hz} Hz, dry signal {dry_hz} Hz")]
    SampleRateMismatch { ir_hz: f64, dry_hz: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
