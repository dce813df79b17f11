//! Image source enumeration for shoebox rooms.
//!
//! Mirroring the source across the six walls, and the mirrors again across
//! the walls, generates the familiar lattice of image sources indexed by
//! one integer per axis. The index encodes everything about a path: its
//! reflection order is the sum of absolute indices, and the number of hits
//! on each wall follows from the index alone, so no rays are traced.

use crate::model::{Room, Scene};

/// One image source, i.e. one specular reflection path.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSource {
    pub position: [f64; 3],
    /// Total reflection count of the path.
    pub order: u32,
    /// Mirror lattice index per axis.
    pub lattice_index: [i32; 3],
    /// Wall indices this path reflects off, grouped per axis rather than
    /// in travel order. Gains and filter products only need the multiset.
    pub wall_hits: Vec<usize>,
    /// Distance from the image position to the receiver in meters.
    pub path_length: f64,
}

/// An image source resolved against the sample clock: where its impulse
/// lands and how strong it arrives.
#[derive(Debug, Clone, PartialEq)]
pub struct IsTap {
    pub delay_samples: usize,
    pub linear_gain: f64,
    pub source: ImageSource,
}

/// Position of the image with the given lattice index. Even indices
/// translate the source itself, odd indices translate its mirror.
pub fn image_position(room: &Room, source_pos: [f64; 3], lattice_index: [i32; 3]) -> [f64; 3] {
    let mut pos = [0.0; 3];
    for axis in 0..3 {
        let l = room.dimensions[axis];
        let s = source_pos[axis];
        let m = lattice_index[axis];
        pos[axis] = if m % 2 == 0 {
            m as f64 * l + s
        } else {
            m as f64 * l + (l - s)
        };
    }
    pos
}

/// Appends the wall hits a single axis index implies. An index p crosses
/// its axis |p| times, alternating between the two walls; the counts
/// reduce to |floor(p/2)| hits on the negative wall and |ceil(p/2)| on the
/// positive wall.
fn push_axis_wall_hits(axis: usize, index: i32, hits: &mut Vec<usize>) {
    let negative = index.div_euclid(2).unsigned_abs() as usize;
    let positive = (index + 1).div_euclid(2).unsigned_abs() as usize;
    for _ in 0..negative {
        hits.push(axis * 2);
    }
    for _ in 0..positive {
        hits.push(axis * 2 + 1);
    }
}

/// Enumerates every image source with order up to `max_order`, the direct
/// path included as order zero. The order of the returned list is fixed
/// (lexicographic in the lattice index), which downstream accumulation
/// relies on for reproducible output.
pub fn generate_image_sources(scene: &Scene, max_order: u32) -> Vec<ImageSource> {
    let n = max_order as i32;
    let mut sources = Vec::new();
    for p in -n..=n {
        let q_span = n - p.abs();
        for q in -q_span..=q_span {
            let r_span = q_span - q.abs();
            for r in -r_span..=r_span {
                let lattice_index = [p, q, r];
                let order = (p.abs() + q.abs() + r.abs()) as u32;
                let position = image_position(&scene.room, scene.source_pos, lattice_index);
                let mut wall_hits = Vec::with_capacity(order as usize);
                push_axis_wall_hits(0, p, &mut wall_hits);
                push_axis_wall_hits(1, q, &mut wall_hits);
                push_axis_wall_hits(2, r, &mut wall_hits);
                sources.push(ImageSource {
                    position,
                    order,
                    lattice_index,
                    wall_hits,
                    path_length: distance(position, scene.receiver_pos),
                });
            }
        }
    }
    sources
}

/// Resolves an image source to a tap: delay from travel time at the scene
/// sample rate, gain from spherical spreading (clamped inside 1 m) times
/// one amplitude reflection factor sqrt(1 - absorption) per wall hit.
pub fn make_tap(source: ImageSource, scene: &Scene) -> IsTap {
    let delay =
        (source.path_length * scene.config.sample_rate_hz / scene.speed_of_sound).round() as usize;
    let mut gain = 1.0 / source.path_length.max(1.0);
    for &w in &source.wall_hits {
        gain *= (1.0 - scene.room.walls[w].absorption).sqrt();
    }
    IsTap {
        delay_samples: delay,
        linear_gain: gain,
        source,
    }
}

/// The wall a path reflects off last before reaching the receiver: the
/// axis with the largest |lattice index| hosts the final bounce, and the
/// index sign picks which of its two walls. Ties between axes go to the
/// axis along which the image lies farthest from the receiver, then to the
/// lowest axis. The direct path has no last wall.
pub fn last_hit_wall(source: &ImageSource, receiver_pos: [f64; 3]) -> Option<usize> {
    if source.order == 0 {
        return None;
    }
    let mut best_axis = None;
    let mut best_count = 0u32;
    let mut best_span = f64::NEG_INFINITY;
    // The axis index reads three parallel arrays at once.
    #[allow(clippy::needless_range_loop)]
    for axis in 0..3 {
        let count = source.lattice_index[axis].unsigned_abs();
        if count == 0 {
            continue;
        }
        let span = (source.position[axis] - receiver_pos[axis]).abs();
        if count > best_count || (count == best_count && span > best_span) {
            best_axis = Some(axis);
            best_count = count;
            best_span = span;
        }
    }
    let axis = best_axis.expect("order > 0 means some axis index is nonzero");
    Some(axis * 2 + usize::from(source.lattice_index[axis] > 0))
}

pub(crate) fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}
