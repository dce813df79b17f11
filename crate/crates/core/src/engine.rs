//! The render loop: from a validated scene to an impulse response.
//!
//! Rendering walks the image source list once. Every reflection becomes a
//! gain-scaled impulse at its arrival time, then splits in two. The
//! specular part runs through one specular shelving filter per wall hit
//! and lands on the output channel whose direction best matches the
//! image's bearing. The diffuse part runs through the specular filters of
//! all but the last-hit wall, that wall's diffuse filter, and the shared
//! surface all-pass cascade, then feeds the delay network inputs owned by
//! the last-hit wall, power-split across them. When the scene has contents
//! (zeta > 0) a per-path object cascade smears both parts first.
//!
//! The delay network runs once over the full length after all taps are
//! accumulated, so its recirculation sees every injection at the exact
//! sample it arrived.

use std::collections::HashMap;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::apc::{self, ApcSpec, SurfaceScatterParams};
use crate::decomposition::{self, DecompositionPair};
use crate::fdn::{self, VrsSet};
use crate::ism::{self, IsTap};
use crate::model::{derive_geometry, validate_scene, wall_areas, OutputMode, Scene};
use crate::{Error, Result};

/// Knobs that change how a render runs without changing what it renders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Worker threads for the per-tap stage. One thread is the bit-exact
    /// reference path; more threads keep determinism per thread count but
    /// may differ from the single-threaded result in the last ulp because
    /// partial sums merge in chunks.
    pub threads: usize,
    /// Disable to render as if every path had zeta = 0 while leaving the
    /// rest of the pipeline untouched. This is a measurement aid for
    /// isolating the object cascade's contribution, not a user switch.
    pub object_apc_enabled: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            threads: 1,
            object_apc_enabled: true,
        }
    }
}

/// Resolved design parameters and counters from one render, enough to
/// reproduce and audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderMetadata {
    pub scene_digest: u64,
    pub tap_count: usize,
    pub max_tap_delay_samples: usize,
    pub ir_length_samples: usize,
    /// Surface cascade decay time T_s in seconds (zero means bypass).
    pub surface_decay_seconds: f64,
    pub surface_delays: Vec<usize>,
    pub eyring_t60_seconds: f64,
    pub fdn_line_delays: Vec<usize>,
    pub fdn_line_gains: Vec<f64>,
    pub gamma_seconds_min: f64,
    pub gamma_seconds_mean: f64,
    pub gamma_seconds_max: f64,
    pub object_apc_cache_hits: usize,
    pub object_apc_cache_misses: usize,
    pub threads: usize,
    pub object_apc_enabled: bool,
}

/// A rendered impulse response plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub sample_rate_hz: f64,
    /// One channel per output direction, or a single folded channel when
    /// the scene asked for mono.
    pub channels: Vec<Vec<f64>>,
    pub metadata: RenderMetadata,
}

impl ImpulseResponse {
    pub fn num_samples(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    /// Sum of all channels; returns the lone channel unchanged for mono.
    pub fn mono_mix(&self) -> Vec<f64> {
        let len = self.num_samples();
        let mut mix = vec![0.0; len];
        for channel in &self.channels {
            for (m, v) in mix.iter_mut().zip(channel) {
                *m += v;
            }
        }
        mix
    }
}

/// The two per-tap signal parts, pre accumulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TapBranches {
    pub specular: Vec<f64>,
    pub diffuse: Vec<f64>,
}

/// Runs one tap's filter chains over `input` (usually the gain-scaled
/// impulse, but any probe works). Both outputs match the input length; the
/// diffuse part still needs the 1/sqrt(k) split before injection.
pub fn decompose_tap(
    wall_hits: &[usize],
    last_wall: usize,
    pairs: &[DecompositionPair; 6],
    object: &ApcSpec,
    surface: &ApcSpec,
    input: &[f64],
) -> TapBranches {
    debug_assert!(
        wall_hits.contains(&last_wall),
        "the last-hit wall must be one of the wall hits"
    );
    let base = apc::apc_process(object, input, 0);

    let mut specular = base.clone();
    for &w in wall_hits {
        decomposition::filter_apply_in_place(&pairs[w].specular, &mut specular);
    }

    // The final bounce diffuses; the earlier ones have already filtered
    // the energy specularly by the time it reaches that wall.
    let mut diffuse = base;
    let mut last_consumed = false;
    for &w in wall_hits {
        if w == last_wall && !last_consumed {
            last_consumed = true;
            continue;
        }
        decomposition::filter_apply_in_place(&pairs[w].specular, &mut diffuse);
    }
    decomposition::filter_apply_in_place(&pairs[last_wall].diffuse, &mut diffuse);
    let diffuse = apc::apc_process(surface, &diffuse, 0);

    TapBranches { specular, diffuse }
}

/// One render worker's contribution: direct-path channels, network feed
/// channels, and object-cascade cache hit and miss counts.
type WorkerOutput = (Vec<Vec<f64>>, Vec<Vec<f64>>, usize, usize);

pub fn render(scene: &Scene) -> Result<ImpulseResponse> {
    render_with_options(scene, &RenderOptions::default())
}

pub fn render_with_options(scene: &Scene, options: &RenderOptions) -> Result<ImpulseResponse> {
    let scene = validate_scene(scene.clone())?;
    let cfg = scene.config;
    let fs = cfg.sample_rate_hz;
    let geometry = derive_geometry(&scene.room, scene.receiver_pos);
    let ir_len = (cfg.ir_length_seconds * fs).round() as usize;

    let sources = ism::generate_image_sources(&scene, cfg.ism_order);
    let taps: Vec<IsTap> = sources
        .into_iter()
        .map(|s| ism::make_tap(s, &scene))
        .collect();
    let latest = taps.iter().map(|t| t.delay_samples).max().unwrap_or(0);
    if latest >= ir_len {
        return Err(Error::IrTooShort {
            required_seconds: (latest + 1) as f64 / fs,
            configured_seconds: cfg.ir_length_seconds,
        });
    }

    let vrs = fdn::build_vrs_set(&scene, cfg.fdn_lines);

    let surface_decay =
        apc::estimate_local_decay_time(&geometry, cfg.surface_decay_scale, scene.speed_of_sound);
    let surface = if surface_decay > 0.0 {
        apc::design_surface_apc(
            &SurfaceScatterParams {
                local_decay_time: surface_decay,
            },
            fs,
        )?
    } else {
        ApcSpec::bypass()
    };

    let mut pairs = Vec::with_capacity(6);
    for wall in &scene.room.walls {
        pairs.push(decomposition::design_decomposition_pair(
            wall.scattering,
            wall.crossover_hz,
            fs,
        )?);
    }
    let pairs: [DecompositionPair; 6] = pairs.try_into().expect("exactly six walls");

    let eyring = fdn::eyring_t60(&geometry, &scene.room.walls, &wall_areas(&scene.room))?;
    let fdn_spec = fdn::design_fdn(&geometry, eyring, fs, scene.speed_of_sound, cfg.fdn_lines)?;

    let n = cfg.fdn_lines;
    let mut channels = vec![vec![0.0; ir_len]; n];
    let mut fdn_inputs = vec![vec![0.0; ir_len]; n];
    let cache_hits;
    let cache_misses;

    let workers = options.threads.max(1).min(taps.len().max(1));
    if workers == 1 {
        let counts = process_taps(
            &taps,
            &scene,
            &pairs,
            &surface,
            &vrs,
            options.object_apc_enabled,
            &mut channels,
            &mut fdn_inputs,
        );
        cache_hits = counts.0;
        cache_misses = counts.1;
    } else {
        // Fixed contiguous chunks merged in chunk order: the output is a
        // pure function of scene and thread count.
        let chunk = taps.len().div_ceil(workers);
        let parts: Vec<WorkerOutput> = std::thread::scope(|scope| {
            let handles: Vec<_> = taps
                .chunks(chunk)
                .map(|part| {
                    let scene = &scene;
                    let pairs = &pairs;
                    let surface = &surface;
                    let vrs = &vrs;
                    scope.spawn(move || {
                        let mut ch = vec![vec![0.0; ir_len]; n];
                        let mut fi = vec![vec![0.0; ir_len]; n];
                        let (h, m) = process_taps(
                            part,
                            scene,
                            pairs,
                            surface,
                            vrs,
                            options.object_apc_enabled,
                            &mut ch,
                            &mut fi,
                        );
                        (ch, fi, h, m)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("render worker panicked"))
                .collect()
        });
        let mut hits = 0;
        let mut misses = 0;
        for (ch, fi, h, m) in parts {
            for (dst, src) in channels.iter_mut().zip(ch) {
                for (a, b) in dst.iter_mut().zip(src) {
                    *a += b;
                }
            }
            for (dst, src) in fdn_inputs.iter_mut().zip(fi) {
                for (a, b) in dst.iter_mut().zip(src) {
                    *a += b;
                }
            }
            hits += h;
            misses += m;
        }
        cache_hits = hits;
        cache_misses = misses;
    }

    let fdn_out = fdn::fdn_process(&fdn_spec, &fdn_inputs);
    for (channel, tail) in channels.iter_mut().zip(&fdn_out) {
        for (a, b) in channel.iter_mut().zip(tail) {
            *a += b;
        }
    }

    let zeta = scene.geometric_deviation;
    let mut gamma_min = f64::INFINITY;
    let mut gamma_max = 0.0f64;
    let mut gamma_sum = 0.0;
    let mut gamma_count = 0usize;
    if zeta > 0.0 {
        for tap in taps.iter().filter(|t| t.source.order > 0) {
            let gamma = apc::object_group_delay(tap.source.path_length, zeta, scene.speed_of_sound);
            gamma_min = gamma_min.min(gamma);
            gamma_max = gamma_max.max(gamma);
            gamma_sum += gamma;
            gamma_count += 1;
        }
    }
    if gamma_count == 0 {
        gamma_min = 0.0;
    }

    let metadata = RenderMetadata {
        scene_digest: scene.digest(),
        tap_count: taps.len(),
        max_tap_delay_samples: latest,
        ir_length_samples: ir_len,
        surface_decay_seconds: surface_decay,
        surface_delays: surface.stages.iter().map(|s| s.delay_samples).collect(),
        eyring_t60_seconds: eyring,
        fdn_line_delays: fdn_spec.line_delays.clone(),
        fdn_line_gains: fdn_spec.line_gains.clone(),
        gamma_seconds_min: gamma_min,
        gamma_seconds_mean: if gamma_count == 0 {
            0.0
        } else {
            gamma_sum / gamma_count as f64
        },
        gamma_seconds_max: gamma_max,
        object_apc_cache_hits: cache_hits,
        object_apc_cache_misses: cache_misses,
        threads: workers,
        object_apc_enabled: options.object_apc_enabled,
    };

    let channels = match cfg.output_mode {
        OutputMode::Vrs => channels,
        OutputMode::Mono => {
            let mut mix = vec![0.0; ir_len];
            for channel in &channels {
                for (m, v) in mix.iter_mut().zip(channel) {
                    *m += v;
                }
            }
            vec![mix]
        }
    };

    Ok(ImpulseResponse {
        sample_rate_hz: fs,
        channels,
        metadata,
    })
}

/// Accumulates a slice of taps into the channel and network-input buffers.
/// Returns the object cascade design cache counters (hits, misses).
#[allow(clippy::too_many_arguments)]
fn process_taps(
    taps: &[IsTap],
    scene: &Scene,
    pairs: &[DecompositionPair; 6],
    surface: &ApcSpec,
    vrs: &VrsSet,
    object_enabled: bool,
    channels: &mut [Vec<f64>],
    fdn_inputs: &mut [Vec<f64>],
) -> (usize, usize) {
    let ir_len = channels[0].len();
    let zeta = scene.geometric_deviation;
    let fs = scene.config.sample_rate_hz;
    let c = scene.speed_of_sound;
    // Many taps quantize to the same stage delays, and equal delays mean
    // an identical cascade, so the design is cached on the delay vector.
    let mut cache: HashMap<[usize; apc::APC_STAGES], ApcSpec> = HashMap::new();
    let mut hits = 0;
    let mut misses = 0;
    let mut input = Vec::new();

    for tap in taps {
        let delay = tap.delay_samples;
        let toward = [
            tap.source.position[0] - scene.receiver_pos[0],
            tap.source.position[1] - scene.receiver_pos[1],
            tap.source.position[2] - scene.receiver_pos[2],
        ];

        let Some(last_wall) = ism::last_hit_wall(&tap.source, scene.receiver_pos) else {
            // Direct sound: one clean impulse on the nearest channel.
            channels[fdn::nearest_channel(vrs, toward)][delay] += tap.linear_gain;
            continue;
        };

        let object = if !object_enabled || zeta == 0.0 {
            ApcSpec::bypass()
        } else {
            let key = apc::object_delays(tap.source.path_length, zeta, c, fs);
            match cache.get(&key) {
                Some(spec) => {
                    hits += 1;
                    spec.clone()
                }
                None => {
                    misses += 1;
                    let spec = apc::design_object_apc(tap.source.path_length, zeta, c, fs);
                    cache.insert(key, spec.clone());
                    spec
                }
            }
        };

        input.clear();
        input.resize(ir_len - delay, 0.0);
        input[0] = tap.linear_gain;
        let branches = decompose_tap(
            &tap.source.wall_hits,
            last_wall,
            pairs,
            &object,
            surface,
            &input,
        );

        let channel = fdn::nearest_channel(vrs, toward);
        for (a, b) in channels[channel][delay..]
            .iter_mut()
            .zip(&branches.specular)
        {
            *a += b;
        }

        // A non-scattering wall has an exactly zero diffuse filter; its
        // injection would add zeros, so skip the work.
        if !pairs[last_wall].diffuse.is_zero() {
            let lines = &vrs.wall_assignment[last_wall];
            let split = 1.0 / (lines.len() as f64).sqrt();
            for &line in lines {
                for (a, b) in fdn_inputs[line][delay..].iter_mut().zip(&branches.diffuse) {
                    *a += b * split;
                }
            }
        }
    }
    (hits, misses)
}

/// Convolves a dry signal with every channel of the impulse response.
/// Output channels have length `dry.len() + ir.num_samples() - 1`.
pub fn convolve(
    ir: &ImpulseResponse,
    dry: &[f64],
    dry_sample_rate_hz: f64,
) -> Result<Vec<Vec<f64>>> {
    convolve_channels(&ir.channels, ir.sample_rate_hz, dry, dry_sample_rate_hz)
}

/// [`convolve`] for bare channel data, e.g. an impulse response loaded
/// from disk rather than freshly rendered.
pub fn convolve_channels(
    channels: &[Vec<f64>],
    ir_sample_rate_hz: f64,
    dry: &[f64],
    dry_sample_rate_hz: f64,
) -> Result<Vec<Vec<f64>>> {
    if dry_sample_rate_hz != ir_sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            ir_hz: ir_sample_rate_hz,
            dry_hz: dry_sample_rate_hz,
        });
    }
    let ir_len = channels.first().map_or(0, Vec::len);
    if dry.is_empty() || ir_len == 0 {
        return Ok(channels.iter().map(|_| Vec::new()).collect());
    }
    let out_len = ir_len + dry.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let mut dry_spectrum: Vec<Complex64> = dry.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    dry_spectrum.resize(size, Complex64::new(0.0, 0.0));
    forward.process(&mut dry_spectrum);

    let scale = 1.0 / size as f64;
    let mut outputs = Vec::with_capacity(channels.len());
    for channel in channels {
        let mut buf: Vec<Complex64> = channel.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(size, Complex64::new(0.0, 0.0));
        forward.process(&mut buf);
        for (a, b) in buf.iter_mut().zip(&dry_spectrum) {
            *a *= b;
        }
        inverse.process(&mut buf);
        outputs.push(buf[..out_len].iter().map(|c| c.re * scale).collect());
    }
    Ok(outputs)
}
