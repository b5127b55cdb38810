//! Normalization, cosine similarity, and Shannon entropy.
//!
//! Storage is 32-bit; every reduction accumulates in 64-bit. The exact
//! accumulation order below is part of the crate's score contract: the
//! retrieval index and the brute-force reference scan must produce
//! bit-identical scores, so both sides pin the same arithmetic.

use super::CoreError;

/// Norm below which a vector is treated as zero and passed through unchanged.
pub const ZERO_NORM_EPS: f64 = 1e-12;

/// Dot product of two equal-length f32 slices with eight f64 accumulator
/// lanes combined pairwise.
///
/// The lane structure breaks the serial addition chain (so the loop
/// vectorizes) while keeping the result independent of chunking decisions
/// made by callers. Callers must pass equal lengths.
pub fn dot_f64(a: &[f32], b: &[f32]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let base = c * 8;
        for lane in 0..8 {
            acc[lane] += f64::from(a[base + lane]) * f64::from(b[base + lane]);
        }
    }
    let tail = chunks * 8;
    for (lane, i) in (tail..a.len()).enumerate() {
        acc[lane] += f64::from(a[i]) * f64::from(b[i]);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

/// L2 norm of an f32 slice, accumulated in f64.
pub fn l2_norm(v: &[f32]) -> f64 {
    dot_f64(v, v).sqrt()
}

/// Returns `v / ‖v‖₂`, or `v` unchanged when the norm is below
/// [`ZERO_NORM_EPS`].
///
/// Division is performed as `v[i] as f64 * (1/‖v‖)` and rounded back to f32,
/// so repeated normalization is stable.
pub fn l2_normalize(v: &[f32]) -> Result<Vec<f32>, CoreError> {
    if v.is_empty() {
        return Err(CoreError::InvalidVector("empty vector".into()));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(CoreError::InvalidVector(format!(
            "non-finite entry at index {i}"
        )));
    }
    let norm = l2_norm(v);
    if norm < ZERO_NORM_EPS {
        return Ok(v.to_vec());
    }
    let inv = 1.0 / norm;
    Ok(v.iter().map(|&x| (f64::from(x) * inv) as f32).collect())
}

/// Cosine similarity of two vectors, clamped to `[-1, 1]`.
///
/// Both inputs are L2-normalized first; a zero vector yields similarity 0
/// against everything.
pub fn cosine_sim(a: &[f32], b: &[f32]) -> Result<f64, CoreError> {
    if a.len() != b.len() {
        return Err(CoreError::DimMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let an = l2_normalize(a)?;
    let bn = l2_normalize(b)?;
    Ok(dot_f64(&an, &bn).clamp(-1.0, 1.0))
}

/// Shannon entropy of a probability vector in nats, with `0·ln 0 := 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64, CoreError> {
    let mut sum = 0.0f64;
    for (i, &x) in p.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(CoreError::InvalidDistribution(format!(
                "entry {i} is {x}"
            )));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > 1e-5 {
        return Err(CoreError::InvalidDistribution(format!(
            "probabilities sum to {sum}"
        )));
    }
    let mut h = 0.0f64;
    for &x in p {
        if x > 0.0 {
            h -= x * x.ln();
        }
    }
    // Tiny negative residue can appear for near-one-hot inputs.
    Ok(h.max(0.0))
}
