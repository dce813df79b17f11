//! Power-complementary specular/diffuse filter pairs.
//!
//! Each wall splits reflected energy between a specular path and a diffuse
//! path. The split is frequency dependent: below the crossover f_c the wall
//! reflects specularly, above it a fraction delta of the energy scatters.
//! The target powers are
//!
//! ```text
//! |H_diffuse(f)|^2  = delta * (f / f_c)^4 / (1 + (f / f_c)^4)
//! |H_specular(f)|^2 = 1 - |H_diffuse(f)|^2
//! ```
//!
//! Both filters are realized as one biquad each. The diffuse filter is a
//! second order Butterworth high-pass scaled by sqrt(delta); its squared
//! magnitude hits the first target identically. The specular filter keeps
//! the same Butterworth denominator and gets the unique numerator that is
//! minimum phase and power-complementary to it: with A = sqrt(1 - delta)
//! the analog numerator is A s^2 + sqrt(2 A) s + 1. Squaring shows
//! |spec|^2 + |diff|^2 = 1 exactly, so complementarity holds by
//! construction instead of by fit, and both filters warp identically
//! through the bilinear transform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::{Error, Result};

/// One biquad in direct form, normalized so `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderFilter {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl SecondOrderFilter {
    /// The unit filter: output equals input bit for bit.
    pub fn identity() -> Self {
        SecondOrderFilter {
            b: [1.0, 0.0, 0.0],
            a: [1.0, 0.0, 0.0],
        }
    }

    /// The zero filter: output is all zeros.
    pub fn zero() -> Self {
        SecondOrderFilter {
            b: [0.0, 0.0, 0.0],
            a: [1.0, 0.0, 0.0],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.b == [1.0, 0.0, 0.0] && self.a == [1.0, 0.0, 0.0]
    }

    pub fn is_zero(&self) -> bool {
        self.b == [0.0; 3]
    }

    /// Complex response at normalized angular frequency omega in [0, pi].
    pub fn response_at(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        let num = self.b[0] + self.b[1] * z1 + self.b[2] * z2;
        let den = self.a[0] + self.a[1] * z1 + self.a[2] * z2;
        num / den
    }

    /// Largest pole magnitude; stable filters stay below 1.
    pub fn pole_radius(&self) -> f64 {
        quadratic_root_radius(self.a[0], self.a[1], self.a[2])
    }

    /// Largest zero magnitude; minimum phase filters stay at or below 1.
    pub fn zero_radius(&self) -> f64 {
        quadratic_root_radius(self.b[0], self.b[1], self.b[2])
    }
}

/// Largest root magnitude, in the z plane, of the sequence-domain
/// polynomial c0 + c1 z^-1 + c2 z^-2, i.e. of c0 z^2 + c1 z + c2.
fn quadratic_root_radius(c0: f64, c1: f64, c2: f64) -> f64 {
    if c0 == 0.0 {
        // Degenerate first coefficient: at most one root at -c2/c1.
        if c1 == 0.0 {
            return 0.0;
        }
        return (c2 / c1).abs();
    }
    let disc = Complex64::new(c1 * c1 - 4.0 * c0 * c2, 0.0).sqrt();
    let r1 = (-c1 + disc.re) / (2.0 * c0);
    let r2 = (-c1 - disc.re) / (2.0 * c0);
    if disc.im == 0.0 {
        r1.abs().max(r2.abs())
    } else {
        // Complex pair, both at the same radius sqrt(c2 / c0).
        (c2 / c0).abs().sqrt()
    }
}

/// The designed pair for one wall, with the inputs that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecompositionPair {
    pub specular: SecondOrderFilter,
    pub diffuse: SecondOrderFilter,
    pub delta: f64,
    pub crossover_hz: f64,
}

/// Target power split at one physical frequency: (specular, diffuse).
pub fn decomposition_targets(delta: f64, crossover_hz: f64, freq_hz: f64) -> (f64, f64) {
    let r4 = (freq_hz / crossover_hz).powi(4);
    let diffuse = delta * r4 / (1.0 + r4);
    (1.0 - diffuse, diffuse)
}

/// Designs the specular/diffuse pair for one wall.
///
/// `delta == 0` returns the exact identity/zero pair so that a
/// non-scattering wall costs nothing and stays sample-exact.
pub fn design_decomposition_pair(
    delta: f64,
    crossover_hz: f64,
    sample_rate_hz: f64,
) -> Result<DecompositionPair> {
    assert!(
        (0.0..=1.0).contains(&delta),
        "scattering coefficient must lie in [0, 1], got {delta}"
    );
    if !crossover_hz.is_finite() || crossover_hz <= 0.0 || crossover_hz >= sample_rate_hz / 2.0 {
        return Err(Error::CrossoverOutOfRange {
            crossover_hz,
            sample_rate_hz,
        });
    }
    if delta == 0.0 {
        return Ok(DecompositionPair {
            specular: SecondOrderFilter::identity(),
            diffuse: SecondOrderFilter::zero(),
            delta,
            crossover_hz,
        });
    }

    // Prewarp so the analog crossover lands exactly on f_c after the
    // bilinear transform.
    let k = 1.0 / (PI * crossover_hz / sample_rate_hz).tan();
    let a_hf = (1.0 - delta).sqrt();
    let b_mid = (2.0 * a_hf).sqrt();
    Ok(DecompositionPair {
        specular: bilinear_over_butterworth(a_hf, b_mid, 1.0, k),
        diffuse: bilinear_over_butterworth(delta.sqrt(), 0.0, 0.0, k),
        delta,
        crossover_hz,
    })
}

/// Maps the analog filter (n2 s^2 + n1 s + n0) / (s^2 + sqrt(2) s + 1)
/// through the bilinear transform s = K (1 - z^-1) / (1 + z^-1).
fn bilinear_over_butterworth(n2: f64, n1: f64, n0: f64, k: f64) -> SecondOrderFilter {
    let k2 = k * k;
    let a0 = k2 + SQRT_2 * k + 1.0;
    SecondOrderFilter {
        b: [
            (n2 * k2 + n1 * k + n0) / a0,
            2.0 * (n0 - n2 * k2) / a0,
            (n2 * k2 - n1 * k + n0) / a0,
        ],
        a: [1.0, 2.0 * (1.0 - k2) / a0, (k2 - SQRT_2 * k + 1.0) / a0],
    }
}

/// Runs the biquad over `input` (direct form II transposed).
pub fn filter_apply(filter: &SecondOrderFilter, input: &[f64]) -> Vec<f64> {
    let mut buf = input.to_vec();
    filter_apply_in_place(filter, &mut buf);
    buf
}

/// In-place variant used by the render loop to chain filters without
/// reallocating per stage.
pub fn filter_apply_in_place(filter: &SecondOrderFilter, buf: &mut [f64]) {
    let [b0, b1, b2] = filter.b;
    let [_, a1, a2] = filter.a;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for sample in buf.iter_mut() {
        let x = *sample;
        let y = b0 * x + s1;
        s1 = b1 * x - a1 * y + s2;
        s2 = b2 * x - a2 * y;
        *sample = y;
    }
}
