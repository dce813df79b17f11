//! The late-field feedback delay network and its spatial output set.
//!
//! The network is a classic unitary-feedback design: N delay lines, a
//! Householder feedback matrix, and one attenuation per line chosen so a
//! full pass through a line costs exactly the decibels that the target
//! decay time prescribes for that line's length. Line lengths are distinct
//! primes spread around the room's mean free path, so recirculating echoes
//! never share a period.
//!
//! Each delay line doubles as one output channel, anchored to a fixed
//! direction around the receiver (a virtual reverberation source). Walls
//! partition the directions by which wall a ray from the receiver hits
//! first; the render loop injects each reflection's diffuse energy into
//! the lines owned by the wall that produced it, which keeps a coarse
//! spatial imprint on the late field.

use serde::{Deserialize, Serialize};

use crate::model::{RoomGeometry, Scene, WallMaterial};
use crate::{Error, Result};

/// A designed delay network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FdnSpec {
    /// Delay line lengths in samples, pairwise distinct primes.
    pub line_delays: Vec<usize>,
    /// Row-major N x N orthogonal feedback matrix.
    pub feedback_matrix: Vec<f64>,
    /// Per-line broadband attenuation applied once per pass.
    pub line_gains: Vec<f64>,
    /// Per-line one-pole lowpass coefficient in [0, 1); zero disables the
    /// extra high-frequency damping and keeps the loop spectrally flat.
    pub hf_damping: Vec<f64>,
}

impl FdnSpec {
    pub fn lines(&self) -> usize {
        self.line_delays.len()
    }
}

/// Output directions around the receiver and their owning walls.
#[derive(Debug, Clone, PartialEq)]
pub struct VrsSet {
    /// Unit direction per delay line, receiver-relative.
    pub directions: Vec<[f64; 3]>,
    /// For each wall, the delay lines whose direction hits it first.
    pub wall_assignment: [Vec<usize>; 6],
}

impl VrsSet {
    /// The wall that owns a given line.
    pub fn wall_of(&self, line: usize) -> usize {
        for (wall, lines) in self.wall_assignment.iter().enumerate() {
            if lines.contains(&line) {
                return wall;
            }
        }
        unreachable!("every line is assigned to exactly one wall");
    }
}

/// Broadband Eyring decay time of the room. Fails when the area-weighted
/// mean absorption leaves (0, 1), where no finite positive time exists.
pub fn eyring_t60(
    geometry: &RoomGeometry,
    walls: &[WallMaterial; 6],
    areas: &[f64; 6],
) -> Result<f64> {
    let mean_absorption = walls
        .iter()
        .zip(areas)
        .map(|(w, a)| w.absorption * a)
        .sum::<f64>()
        / geometry.surface_area;
    if mean_absorption <= 0.0 || mean_absorption >= 1.0 {
        return Err(Error::AbsorptionOutOfRange { mean_absorption });
    }
    Ok(0.161 * geometry.volume / (-geometry.surface_area * (1.0 - mean_absorption).ln()))
}

/// Designs the delay network for a room and a target decay time.
///
/// Line lengths start from values log-spaced across [0.7, 1.3] times the
/// mean free path (in samples) and snap to the nearest unused prime inside
/// that real-valued interval. Gains follow from the lengths: a signal
/// taking `tau` samples per pass must lose 60 dB over `target_t60`
/// seconds, so each pass costs gain 10^(-3 tau / (fs t60)). The result has
/// no high-frequency damping; layer it on with [`with_hf_damping`] when a
/// duller tail is wanted.
pub fn design_fdn(
    geometry: &RoomGeometry,
    target_t60: f64,
    sample_rate_hz: f64,
    speed_of_sound: f64,
    lines: usize,
) -> Result<FdnSpec> {
    assert!(lines >= 2, "a delay network needs at least two lines");
    assert!(
        target_t60.is_finite() && target_t60 > 0.0,
        "target decay time must be positive and finite"
    );
    let mean_free_samples = geometry.mean_free_path * sample_rate_hz / speed_of_sound;
    if mean_free_samples < lines as f64 {
        return Err(Error::RoomTooSmall {
            line_samples: mean_free_samples,
            lines,
        });
    }
    let lo = 0.7 * mean_free_samples;
    let hi = 1.3 * mean_free_samples;
    let mut line_delays = Vec::with_capacity(lines);
    for m in 0..lines {
        let target = lo * (hi / lo).powf(m as f64 / (lines - 1) as f64);
        let delay = nearest_free_prime(target, lo, hi, &line_delays)
            // A room can be so small that [lo, hi] holds fewer primes than
            // lines; continue on primes above the interval rather than
            // fail, keeping lengths pairwise coprime.
            .unwrap_or_else(|| next_free_prime_above(hi, &line_delays));
        line_delays.push(delay);
    }
    line_delays.sort_unstable();

    let line_gains = line_delays
        .iter()
        .map(|&tau| 10f64.powf(-3.0 * tau as f64 / (sample_rate_hz * target_t60)))
        .collect();

    Ok(FdnSpec {
        feedback_matrix: householder_matrix(lines),
        hf_damping: vec![0.0; lines],
        line_delays,
        line_gains,
    })
}

/// Row-major Householder reflection I - (2/N) * ones, orthogonal and
/// maximally mixing for its cost.
fn householder_matrix(n: usize) -> Vec<f64> {
    let c = 2.0 / n as f64;
    let mut q = vec![-c; n * n];
    for i in 0..n {
        q[i * n + i] += 1.0;
    }
    q
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Nearest prime to `target` inside the real interval [lo, hi] that is not
/// already taken. Candidates at equal distance prefer the smaller prime.
fn nearest_free_prime(target: f64, lo: f64, hi: f64, taken: &[usize]) -> Option<usize> {
    let center = target.round() as i64;
    for offset in 0..=((hi - lo).ceil() as i64 + 1) {
        for candidate in [center - offset, center + offset] {
            if candidate < 2 {
                continue;
            }
            let c = candidate as f64;
            if c < lo || c > hi {
                continue;
            }
            let candidate = candidate as usize;
            if is_prime(candidate) && !taken.contains(&candidate) {
                return Some(candidate);
            }
        }
    }
    None
}

fn next_free_prime_above(hi: f64, taken: &[usize]) -> usize {
    let mut candidate = hi.ceil().max(2.0) as usize;
    loop {
        if is_prime(candidate) && !taken.contains(&candidate) {
            return candidate;
        }
        candidate += 1;
    }
}

/// Adds per-line high-frequency damping on top of a flat design: each
/// line's one-pole coefficient is solved so the loop attenuation at
/// `halve_at_hz` doubles in decibels, which halves the decay time there
/// while leaving low frequencies near the broadband target.
pub fn with_hf_damping(mut spec: FdnSpec, sample_rate_hz: f64, halve_at_hz: f64) -> FdnSpec {
    let omega = 2.0 * std::f64::consts::PI * halve_at_hz / sample_rate_hz;
    let cos_w = omega.cos();
    for (k, &g) in spec.hf_damping.iter_mut().zip(&spec.line_gains) {
        // Solve |(1 - k) / (1 - k e^{-jw})| = g for k in [0, 1): the pass
        // then costs g twice (once from the gain, once from the filter) at
        // the halving frequency.
        if g >= 1.0 {
            *k = 0.0;
            continue;
        }
        let beta = (1.0 - g * g * cos_w) / (1.0 - g * g);
        *k = beta - (beta * beta - 1.0).max(0.0).sqrt();
    }
    spec
}

/// Builds the output direction set for `n` lines and assigns each
/// direction to the wall it hits first along a ray from the receiver.
///
/// Twelve lines use the icosahedron vertices, which give the most even
/// twelve-way coverage of the sphere; other counts fall back to a
/// Fibonacci spiral. Any wall left without a direction steals, from a wall
/// that has at least two, the direction pointing most directly at it.
pub fn build_vrs_set(scene: &Scene, n: usize) -> VrsSet {
    let directions = if n == 12 {
        icosahedron_directions()
    } else {
        fibonacci_sphere(n)
    };
    let dims = scene.room.dimensions;
    let receiver = scene.receiver_pos;

    let mut wall_assignment: [Vec<usize>; 6] = Default::default();
    for (i, dir) in directions.iter().enumerate() {
        wall_assignment[first_wall_hit(receiver, *dir, dims)].push(i);
    }

    // Rescue pass: every wall must own at least one line so diffuse energy
    // from that wall has somewhere to go.
    for wall in 0..6 {
        if !wall_assignment[wall].is_empty() {
            continue;
        }
        let axis = wall / 2;
        let toward = if wall % 2 == 0 { -1.0 } else { 1.0 };
        let mut best: Option<(usize, usize, f64)> = None;
        for (donor, lines) in wall_assignment.iter().enumerate() {
            if lines.len() < 2 {
                continue;
            }
            for &line in lines {
                let score = directions[line][axis] * toward;
                let better = match best {
                    None => true,
                    Some((_, _, s)) => score > s,
                };
                if better {
                    best = Some((donor, line, score));
                }
            }
        }
        let (donor, line, _) = best.expect("with n >= 6 some wall can donate a line");
        wall_assignment[donor].retain(|&l| l != line);
        wall_assignment[wall].push(line);
    }

    VrsSet {
        directions,
        wall_assignment,
    }
}

/// Index of the direction most aligned with `toward` (not necessarily a
/// unit vector). Ties and the degenerate zero vector resolve to the lowest
/// index, keeping the choice deterministic.
pub fn nearest_channel(vrs: &VrsSet, toward: [f64; 3]) -> usize {
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, d) in vrs.directions.iter().enumerate() {
        let dot = d[0] * toward[0] + d[1] * toward[1] + d[2] * toward[2];
        if dot > best_dot {
            best = i;
            best_dot = dot;
        }
    }
    best
}

fn icosahedron_directions() -> Vec<[f64; 3]> {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let a = 1.0 / norm;
    let b = phi / norm;
    vec![
        [0.0, a, b],
        [0.0, a, -b],
        [0.0, -a, b],
        [0.0, -a, -b],
        [a, b, 0.0],
        [a, -b, 0.0],
        [-a, b, 0.0],
        [-a, -b, 0.0],
        [b, 0.0, a],
        [-b, 0.0, a],
        [b, 0.0, -a],
        [-b, 0.0, -a],
    ]
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let theta = golden_angle * i as f64;
            [r * theta.cos(), r * theta.sin(), z]
        })
        .collect()
}

/// First wall a ray from `origin` along `dir` hits inside a box of size
/// `dims`. Axis components that are exactly zero never hit their walls.
fn first_wall_hit(origin: [f64; 3], dir: [f64; 3], dims: [f64; 3]) -> usize {
    let mut best_t = f64::INFINITY;
    let mut best_wall = 0;
    for axis in 0..3 {
        let (t, wall) = if dir[axis] > 0.0 {
            ((dims[axis] - origin[axis]) / dir[axis], axis * 2 + 1)
        } else if dir[axis] < 0.0 {
            (origin[axis] / -dir[axis], axis * 2)
        } else {
            continue;
        };
        if t < best_t {
            best_t = t;
            best_wall = wall;
        }
    }
    best_wall
}

/// Runs the network over per-line input signals (all the same length) and
/// returns the per-line outputs. Each sample: read the line heads, emit
/// them, damp, scale, mix through the feedback matrix, add the external
/// inputs, write back.
pub fn fdn_process(spec: &FdnSpec, inputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = spec.lines();
    assert_eq!(inputs.len(), n, "one input signal per delay line");
    let len = inputs.first().map_or(0, Vec::len);
    assert!(
        inputs.iter().all(|i| i.len() == len),
        "input signals must share one length"
    );

    let mut lines: Vec<Vec<f64>> = spec.line_delays.iter().map(|&d| vec![0.0; d]).collect();
    let mut heads = vec![0usize; n];
    let mut damp_state = vec![0.0; n];
    let mut outputs = vec![vec![0.0; len]; n];
    let mut read = vec![0.0; n];
    let mut mixed = vec![0.0; n];

    for t in 0..len {
        for m in 0..n {
            let s = lines[m][heads[m]];
            outputs[m][t] = s;
            // One-pole lowpass y = (1 - k) x + k y_prev, unity at DC.
            let k = spec.hf_damping[m];
            let damped = if k == 0.0 {
                s
            } else {
                let y = (1.0 - k) * s + k * damp_state[m];
                damp_state[m] = y;
                y
            };
            read[m] = spec.line_gains[m] * damped;
        }
        for (i, row) in spec.feedback_matrix.chunks_exact(n).enumerate() {
            let mut acc = 0.0;
            for (q, r) in row.iter().zip(&read) {
                acc += q * r;
            }
            mixed[i] = acc + inputs[i][t];
        }
        for m in 0..n {
            lines[m][heads[m]] = mixed[m];
            heads[m] += 1;
            if heads[m] == spec.line_delays[m] {
                heads[m] = 0;
            }
        }
    }
    outputs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis;
    use crate::model::testing::reference_scene;
    use crate::model::{derive_geometry, wall_areas};
    use proptest::prelude::*;

    const FS: f64 = 44100.0;

    fn reference_fdn(t60: f64) -> FdnSpec {
        let scene = reference_scene();
        let g = derive_geometry(&scene.room, scene.receiver_pos);
        design_fdn(&g, t60, FS, scene.speed_of_sound, 12).unwrap()
    }

    #[test]
    fn eyring_time_of_the_reference_room() {
        let scene = reference_scene();
        let g = derive_geometry(&scene.room, scene.receiver_pos);
        let t = eyring_t60(&g, &scene.room.walls, &wall_areas(&scene.room)).unwrap();
        let expected = 0.161 * 60.0 / (94.0 * -(0.7f64.ln()));
        assert!((t - expected).abs() < 1e-12);
        assert!((t - 0.288).abs() < 5e-4);
    }

    #[test]
    fn eyring_rejects_totally_dead_or_open_rooms() {
        let scene = reference_scene();
        let g = derive_geometry(&scene.room, scene.receiver_pos);
        let mut walls = scene.room.walls;
        for w in &mut walls {
            w.absorption = 0.0;
        }
        assert!(matches!(
            eyring_t60(&g, &walls, &wall_areas(&scene.room)),
            Err(crate::Error::AbsorptionOutOfRange { .. })
        ));
        for w in &mut walls {
            w.absorption = 1.0;
        }
        assert!(eyring_t60(&g, &walls, &wall_areas(&scene.room)).is_err());
    }

    #[test]
    fn designed_delays_are_the_frozen_primes() {
        let spec = reference_fdn(0.5);
        assert_eq!(
            spec.line_delays,
            vec![233, 241, 257, 271, 283, 307, 317, 337, 359, 379, 401, 421]
        );
    }

    #[test]
    fn designed_delays_stay_inside_the_window_and_coprime() {
        let spec = reference_fdn(0.5);
        let scene = reference_scene();
        let g = derive_geometry(&scene.room, scene.receiver_pos);
        let mean_free = g.mean_free_path * FS / scene.speed_of_sound;
        for &d in &spec.line_delays {
            assert!(d as f64 >= 0.7 * mean_free && d as f64 <= 1.3 * mean_free);
        }
        for i in 0..spec.line_delays.len() {
            for j in i + 1..spec.line_delays.len() {
                let (mut a, mut b) = (spec.line_delays[i], spec.line_delays[j]);
                while b != 0 {
                    (a, b) = (b, a % b);
                }
                assert_eq!(a, 1, "line lengths must be pairwise coprime");
            }
        }
    }

    #[test]
    fn line_gains_follow_the_per_pass_rule() {
        let spec = reference_fdn(0.5);
        for (&tau, &g) in spec.line_delays.iter().zip(&spec.line_gains) {
            let expected = 10f64.powf(-3.0 * tau as f64 / (FS * 0.5));
            assert_eq!(g, expected);
            assert!(g < 1.0);
        }
        // Spot values pinned by hand: 10^(-984/22050) for a 328-sample
        // line at T60 = 0.5 s, and the same line at the reference room's
        // Eyring time of 0.288122 s.
        let probe = 10f64.powf(-3.0 * 328.0 / (FS * 0.5));
        assert!((probe - 0.902348).abs() < 1e-6, "probe gain {probe}");
        let eyring_probe = 10f64.powf(-3.0 * 328.0 / (FS * 0.288122));
        assert!(
            (eyring_probe - 0.836676).abs() < 1e-5,
            "eyring probe gain {eyring_probe}"
        );
    }

    #[test]
    fn feedback_matrix_is_orthogonal() {
        let spec = reference_fdn(0.5);
        let n = spec.lines();
        let q = &spec.feedback_matrix;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| q[i * n + k] * q[j * n + k]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12, "row {i} . row {j} = {dot}");
            }
        }
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let spec = reference_fdn(0.5);
        let inputs = vec![vec![0.0; 1000]; 12];
        let out = fdn_process(&spec, &inputs);
        assert!(out.iter().all(|ch| ch.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn unit_gains_recirculate_without_loss() {
        let mut spec = reference_fdn(0.5);
        spec.line_gains = vec![1.0; 12];
        let len = 44100;
        let mut inputs = vec![vec![0.0; len]; 12];
        inputs[0][0] = 1.0;
        let out = fdn_process(&spec, &inputs);
        let window = |a: usize, b: usize| -> f64 {
            out.iter()
                .map(|ch| ch[a..b].iter().map(|v| v * v).sum::<f64>())
                .sum()
        };
        let early = window(2000, 12000);
        let late = window(len - 10000, len);
        assert!(
            (late / early - 1.0).abs() < 0.1,
            "lossless network must not decay: early {early}, late {late}"
        );
    }

    #[test]
    fn impulse_decays_at_the_designed_rate() {
        let t60 = 0.5;
        let spec = reference_fdn(t60);
        let len = (1.2 * t60 * FS) as usize;
        let mut inputs = vec![vec![0.0; len]; 12];
        inputs[0][0] = 1.0;
        let out = fdn_process(&spec, &inputs);
        let mono: Vec<f64> = (0..len).map(|t| out.iter().map(|ch| ch[t]).sum()).collect();
        let edc = analysis::schroeder_edc(&mono).unwrap();
        let measured = analysis::t60_from_edc(&edc, FS).unwrap();
        assert!(
            (measured - t60).abs() / t60 < 0.1,
            "measured T60 {measured} vs target {t60}"
        );
    }

    #[test]
    fn tail_falls_below_minus_100_db_within_two_t60() {
        let t60 = 0.3;
        let spec = reference_fdn(t60);
        let len = (2.0 * t60 * FS) as usize;
        let mut inputs = vec![vec![0.0; len]; 12];
        inputs[0][0] = 1.0;
        let out = fdn_process(&spec, &inputs);
        let peak = out
            .iter()
            .flat_map(|ch| ch.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        let tail_peak = out
            .iter()
            .map(|ch| ch[len - 100..].iter().fold(0.0f64, |m, &v| m.max(v.abs())))
            .fold(0.0f64, f64::max);
        assert!(
            tail_peak < peak * 1e-5,
            "tail {tail_peak} vs peak {peak} is louder than -100 dB"
        );
    }

    #[test]
    fn echo_density_grows_toward_the_tail() {
        let spec = reference_fdn(0.8);
        let len = 12000;
        let mut inputs = vec![vec![0.0; len]; 12];
        inputs[0][0] = 1.0;
        let out = fdn_process(&spec, &inputs);
        let mono: Vec<f64> = (0..len).map(|t| out.iter().map(|ch| ch[t]).sum()).collect();
        let profile = analysis::normalized_echo_density(&mono, FS, 20.0);
        assert!(profile.len() >= 4);
        for w in profile.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 0.05,
                "echo density fell early in the tail: {} -> {}",
                w[0].1,
                w[1].1
            );
        }
        let first = profile.first().unwrap().1;
        let last = profile.last().unwrap().1;
        assert!(last > first, "echo density must grow ({first} -> {last})");
    }

    #[test]
    fn hf_damping_coefficients_solve_the_halving_equation() {
        let spec = with_hf_damping(reference_fdn(0.5), FS, 10000.0);
        let omega = 2.0 * std::f64::consts::PI * 10000.0 / FS;
        for (&k, &g) in spec.hf_damping.iter().zip(&spec.line_gains) {
            assert!((0.0..1.0).contains(&k));
            let num = 1.0 - k;
            let den = ((1.0 - k * omega.cos()).powi(2) + (k * omega.sin()).powi(2)).sqrt();
            assert!(
                (num / den - g).abs() < 1e-9,
                "one-pole magnitude at 10 kHz must equal the line gain"
            );
        }
    }

    #[test]
    fn small_room_line_count_error() {
        let scene = reference_scene();
        let mut tiny = scene.room;
        tiny.dimensions = [0.03, 0.03, 0.03];
        let g = derive_geometry(&tiny, [0.015, 0.015, 0.015]);
        assert!(matches!(
            design_fdn(&g, 0.3, FS, 343.0, 12),
            Err(crate::Error::RoomTooSmall { .. })
        ));
    }

    #[test]
    fn icosahedron_set_covers_a_centered_cube_evenly() {
        let mut scene = reference_scene();
        scene.room.dimensions = [2.0, 2.0, 2.0];
        scene.receiver_pos = [1.0, 1.0, 1.0];
        scene.source_pos = [0.5, 0.5, 0.5];
        let vrs = build_vrs_set(&scene, 12);
        for (wall, lines) in vrs.wall_assignment.iter().enumerate() {
            assert_eq!(lines.len(), 2, "wall {wall} of a centered cube");
        }
    }

    #[test]
    fn near_wall_receiver_piles_directions_on_that_wall() {
        let mut scene = reference_scene();
        scene.receiver_pos = [3.9, 2.5, 1.5];
        let vrs = build_vrs_set(&scene, 12);
        // Four icosahedron vertices have a strictly positive x component,
        // and from this receiver all of them hit +x first.
        assert!(
            vrs.wall_assignment[1].len() >= 4,
            "+x owns {} lines",
            vrs.wall_assignment[1].len()
        );
        for wall in 0..6 {
            assert!(!vrs.wall_assignment[wall].is_empty());
        }
    }

    #[test]
    fn directions_are_unit_vectors() {
        let scene = reference_scene();
        for n in [12usize, 8, 16, 24] {
            let mut cfg_scene = scene.clone();
            cfg_scene.config.fdn_lines = n;
            let vrs = build_vrs_set(&cfg_scene, n);
            assert_eq!(vrs.directions.len(), n);
            for d in &vrs.directions {
                let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                assert!((len - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nearest_channel_picks_the_aligned_direction() {
        let scene = reference_scene();
        let vrs = build_vrs_set(&scene, 12);
        for (i, d) in vrs.directions.iter().enumerate() {
            assert_eq!(nearest_channel(&vrs, *d), i);
        }
    }

    proptest! {
        #[test]
        fn assignment_is_a_partition_and_no_wall_starves(
            rx in 0.05f64..0.95,
            ry in 0.05f64..0.95,
            rz in 0.05f64..0.95,
            n in prop::sample::select(vec![6usize, 8, 12, 16, 24]),
        ) {
            let mut scene = reference_scene();
            scene.config.fdn_lines = n;
            let dims = scene.room.dimensions;
            scene.receiver_pos = [rx * dims[0], ry * dims[1], rz * dims[2]];
            let vrs = build_vrs_set(&scene, n);
            let mut seen = vec![false; n];
            for lines in &vrs.wall_assignment {
                prop_assert!(!lines.is_empty(), "a wall ended up with no direction");
                for &l in lines {
                    prop_assert!(!seen[l], "direction assigned twice");
                    seen[l] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s), "every direction must be assigned");
        }

        #[test]
        fn designed_networks_always_get_distinct_prime_delays(
            t60 in 0.1f64..3.0,
            scale in 0.5f64..4.0,
        ) {
            let mut scene = reference_scene();
            scene.room.dimensions = [4.0 * scale, 5.0 * scale, 3.0 * scale];
            let g = derive_geometry(&scene.room, [1.0, 1.0, 1.0]);
            let spec = design_fdn(&g, t60, FS, 343.0, 12).unwrap();
            let mut sorted = spec.line_delays.clone();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), 12);
            for &d in &spec.line_delays {
                prop_assert!(is_prime(d));
            }
        }
    }
}
