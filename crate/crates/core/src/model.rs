//! Scene description, validation, and derived room geometry.
//!
//! A scene couples a shoebox room (dimensions plus six wall materials) with
//! source and receiver positions, the geometric deviation `zeta`, and the
//! render configuration. Deserialization is strict (unknown keys are
//! rejected) but performs no range checking; [`validate_scene`] is the
//! single place where invariants are enforced, so errors can name the exact
//! field that failed.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Version of the scene schema this build reads and writes.
pub const SCENE_SCHEMA_VERSION: u32 = 1;

/// Default speed of sound in m/s (dry air near 20 degrees C).
pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;

/// Wall labels in storage order: the negative wall of each axis first, so
/// wall `2 * axis + 1` is the wall at coordinate `dimensions[axis]`.
pub const WALL_NAMES: [&str; 6] = ["-x", "+x", "-y", "+y", "-z", "+z"];

/// Acoustic description of one wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct WallMaterial {
    /// Broadband energy absorption coefficient in [0, 1].
    pub absorption: f64,
    /// Scattering coefficient delta in [0, 1]: the fraction of reflected
    /// energy that leaves the specular path at high frequencies.
    pub scattering: f64,
    /// Crossover frequency of the specular/diffuse split in Hz.
    pub crossover_hz: f64,
}

/// Shoebox room: one corner at the origin, the opposite corner at
/// `dimensions`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    /// Edge lengths [Lx, Ly, Lz] in meters.
    pub dimensions: [f64; 3],
    /// Wall materials in [`WALL_NAMES`] order.
    pub walls: [WallMaterial; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    /// Sum all spatial channels into one.
    #[default]
    Mono,
    /// One channel per virtual reverberation source direction.
    Vrs,
}

/// Render parameters independent of the room itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct RenderConfig {
    pub sample_rate_hz: f64,
    /// Highest image source reflection order to enumerate.
    pub ism_order: u32,
    /// Delay line count, which is also the spatial channel count.
    pub fdn_lines: usize,
    pub ir_length_seconds: f64,
    /// Calibration factor kappa for the surface scattering decay time.
    /// Zero disables surface smearing entirely.
    pub surface_decay_scale: f64,
    pub output_mode: OutputMode,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            sample_rate_hz: 44100.0,
            ism_order: 3,
            fdn_lines: 12,
            ir_length_seconds: 2.0,
            surface_decay_scale: 1.0,
            output_mode: OutputMode::Mono,
        }
    }
}

/// A complete render input: room, endpoints, scattering, configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct Scene {
    pub schema_version: u32,
    pub room: Room,
    #[serde(rename = "source")]
    pub source_pos: [f64; 3],
    #[serde(rename = "receiver")]
    pub receiver_pos: [f64; 3],
    /// Geometric deviation zeta in [0, 1]: how strongly room contents
    /// scatter each reflection path. Zero means empty room.
    #[serde(rename = "zeta")]
    pub geometric_deviation: f64,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound: f64,
    #[serde(default)]
    pub config: RenderConfig,
}

fn default_speed_of_sound() -> f64 {
    DEFAULT_SPEED_OF_SOUND
}

impl Scene {
    /// Order-stable fingerprint over every field, so renders can record
    /// exactly which input produced them.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(self.schema_version as u64);
        for d in self.room.dimensions {
            h.write_f64(d);
        }
        for w in self.room.walls {
            h.write_f64(w.absorption);
            h.write_f64(w.scattering);
            h.write_f64(w.crossover_hz);
        }
        for v in self.source_pos {
            h.write_f64(v);
        }
        for v in self.receiver_pos {
            h.write_f64(v);
        }
        h.write_f64(self.geometric_deviation);
        h.write_f64(self.speed_of_sound);
        h.write_f64(self.config.sample_rate_hz);
        h.write_u64(self.config.ism_order as u64);
        h.write_u64(self.config.fdn_lines as u64);
        h.write_f64(self.config.ir_length_seconds);
        h.write_f64(self.config.surface_decay_scale);
        h.write_u64(match self.config.output_mode {
            OutputMode::Mono => 0,
            OutputMode::Vrs => 1,
        });
        h.finish()
    }
}

/// 64-bit FNV-1a, enough for a change-detection fingerprint.
struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn write_f64(&mut self, v: f64) {
        self.write_u64(v.to_bits());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Checks every scene invariant and returns the scene unchanged. The first
/// violated invariant wins; its error names the JSON path of the field.
pub fn validate_scene(scene: Scene) -> Result<Scene> {
    fn fail<T>(field: &str, reason: String) -> Result<T> {
        Err(Error::InvalidScene {
            field: field.to_string(),
            reason,
        })
    }

    if scene.schema_version != SCENE_SCHEMA_VERSION {
        return fail(
            "schemaVersion",
            format!(
                "unsupported version {} (this build reads version {})",
                scene.schema_version, SCENE_SCHEMA_VERSION
            ),
        );
    }

    for (axis, &d) in scene.room.dimensions.iter().enumerate() {
        if !d.is_finite() || d <= 0.0 {
            return fail(
                &format!("room.dimensions[{axis}]"),
                format!("must be a positive length in meters, got {d}"),
            );
        }
    }

    if !scene.speed_of_sound.is_finite() || scene.speed_of_sound <= 0.0 {
        return fail(
            "speedOfSound",
            format!("must be positive, got {}", scene.speed_of_sound),
        );
    }

    let cfg = &scene.config;
    if !cfg.sample_rate_hz.is_finite() || cfg.sample_rate_hz <= 0.0 {
        return fail(
            "config.sampleRateHz",
            format!("must be positive, got {}", cfg.sample_rate_hz),
        );
    }
    if !cfg.ir_length_seconds.is_finite() || cfg.ir_length_seconds <= 0.0 {
        return fail(
            "config.irLengthSeconds",
            format!("must be positive, got {}", cfg.ir_length_seconds),
        );
    }
    if cfg.fdn_lines < 6 {
        return fail(
            "config.fdnLines",
            format!(
                "need at least 6 delay lines so every wall can own an output direction, got {}",
                cfg.fdn_lines
            ),
        );
    }
    if !cfg.surface_decay_scale.is_finite() || cfg.surface_decay_scale < 0.0 {
        return fail(
            "config.surfaceDecayScale",
            format!("must be zero or positive, got {}", cfg.surface_decay_scale),
        );
    }

    for (w, mat) in scene.room.walls.iter().enumerate() {
        let name = WALL_NAMES[w];
        if !mat.absorption.is_finite() || !(0.0..=1.0).contains(&mat.absorption) {
            return fail(
                &format!("room.walls[{w}].absorption"),
                format!(
                    "absorption out of range [0, 1] on wall {name}, got {}",
                    mat.absorption
                ),
            );
        }
        if !mat.scattering.is_finite() || !(0.0..=1.0).contains(&mat.scattering) {
            return fail(
                &format!("room.walls[{w}].scattering"),
                format!(
                    "scattering out of range [0, 1] on wall {name}, got {}",
                    mat.scattering
                ),
            );
        }
        let nyquist = cfg.sample_rate_hz / 2.0;
        if !mat.crossover_hz.is_finite() || mat.crossover_hz <= 0.0 || mat.crossover_hz >= nyquist {
            return fail(
                &format!("room.walls[{w}].crossoverHz"),
                format!(
                    "crossover must lie strictly between 0 and {nyquist} Hz on wall {name}, got {}",
                    mat.crossover_hz
                ),
            );
        }
    }

    for (label, pos) in [
        ("source", scene.source_pos),
        ("receiver", scene.receiver_pos),
    ] {
        // The axis index reads two parallel arrays at once.
        #[allow(clippy::needless_range_loop)]
        for axis in 0..3 {
            let l = scene.room.dimensions[axis];
            let v = pos[axis];
            if !v.is_finite() || v <= 0.0 || v >= l {
                return fail(
                    label,
                    format!("{label} outside room: coordinate {axis} is {v}, room spans (0, {l})"),
                );
            }
        }
    }

    if !scene.geometric_deviation.is_finite() || !(0.0..=1.0).contains(&scene.geometric_deviation) {
        return fail(
            "zeta",
            format!(
                "geometric deviation out of range [0, 1], got {}",
                scene.geometric_deviation
            ),
        );
    }

    Ok(scene)
}

/// Room statistics every designer downstream needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RoomGeometry {
    /// Volume in m^3.
    pub volume: f64,
    /// Total inner surface area in m^2.
    pub surface_area: f64,
    /// Mean free path 4V/S in meters.
    pub mean_free_path: f64,
    /// Mean perpendicular distance from the receiver to the six walls.
    pub mean_wall_distance: f64,
}

pub fn derive_geometry(room: &Room, receiver_pos: [f64; 3]) -> RoomGeometry {
    let [lx, ly, lz] = room.dimensions;
    let volume = lx * ly * lz;
    let surface_area = 2.0 * (lx * ly + lx * lz + ly * lz);
    // Perpendicular distances to all six walls. Opposite walls always sum
    // to the edge length, so the mean is (Lx + Ly + Lz) / 6 regardless of
    // where the receiver stands; keeping the sum explicit documents why.
    let [x, y, z] = receiver_pos;
    let mean_wall_distance = (x + (lx - x) + y + (ly - y) + z + (lz - z)) / 6.0;
    RoomGeometry {
        volume,
        surface_area,
        mean_free_path: 4.0 * volume / surface_area,
        mean_wall_distance,
    }
}

/// Area of each wall in [`WALL_NAMES`] order.
pub fn wall_areas(room: &Room) -> [f64; 6] {
    let [lx, ly, lz] = room.dimensions;
    [ly * lz, ly * lz, lx * lz, lx * lz, lx * ly, lx * ly]
}
