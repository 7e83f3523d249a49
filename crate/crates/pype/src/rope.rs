//! Rotary position attention kernel.
//!
//! A query or key vector of even dimension `D` is treated as `D/2`
//! two-dimensional pairs in interleaved layout: pair `d` (0-based) is
//! the components `(v[2d], v[2d+1])`. Encoding position `m` rotates pair
//! `d` by the angle `m * theta_d`, where the per-pair frequencies
//!
//! ```text
//! theta_d = base^(-2d / D),  d = 0 .. D/2 - 1
//! ```
//!
//! fall geometrically from `theta_0 = 1` toward `base^(2/D - 1)`. Fast
//! pairs resolve nearby positions; slow pairs keep long spans separable.
//!
//! The attention score between query `q` at position `m` and key `k` at
//! position `n` is the dot product of the two rotated vectors. Because
//! each pair's rotations compose by angle addition, that score depends
//! on the positions only through `m - n`: shifting both positions by any
//! common offset leaves every score unchanged, which is the property the
//! grid schemes in this crate lean on when they reuse one position index
//! for a whole ring of tokens.

use crate::error::{Error, Result};

// ──────────────────────── Configuration ─────────────────────────

/// Rotary parameters for one attention head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotaryConfig {
    /// Head dimension `D`. Must be even and positive.
    pub dim: usize,
    /// Frequency base `b`. Must exceed 1; 10000 is the conventional
    /// choice and the default used across this crate.
    pub base: f64,
}

pub const DEFAULT_BASE: f64 = 10000.0;

impl RotaryConfig {
    pub fn new(dim: usize, base: f64) -> Result<RotaryConfig> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::invalid(format!(
                "rotary dimension must be even and positive, got {dim}"
            )));
        }
        if !(base > 1.0) {
            return Err(Error::invalid(format!(
                "rotary base must exceed 1, got {base}"
            )));
        }
        Ok(RotaryConfig { dim, base })
    }

    /// `new(dim, 10000.0)`.
    pub fn with_default_base(dim: usize) -> Result<RotaryConfig> {
        RotaryConfig::new(dim, DEFAULT_BASE)
    }
}

/// Per-pair frequencies `theta_0 .. theta_{D/2-1}`, strictly decreasing
/// from exactly 1.
pub fn rotary_frequencies(config: &RotaryConfig) -> Vec<f64> {
    let half = config.dim / 2;
    (0..half)
        .map(|d| config.base.powf(-2.0 * d as f64 / config.dim as f64))
        .collect()
}

// ────────────────────────── Rotation ────────────────────────────

/// Rotate `v` to position `pos`: pair `d` turns by `pos * theta_d`.
/// Positions may be negative; `rotate(v, -m)` inverts `rotate(v, m)`.
///
/// Errors when `v` does not have exactly `config.dim` components.
pub fn rotate(v: &[f64], pos: i64, config: &RotaryConfig) -> Result<Vec<f64>> {
    if v.len() != config.dim {
        return Err(Error::mismatch(format!(
            "vector has {} components, rotary config expects {}",
            v.len(),
            config.dim
        )));
    }
    let mut out = Vec::with_capacity(config.dim);
    for d in 0..config.dim / 2 {
        let theta = config.base.powf(-2.0 * d as f64 / config.dim as f64);
        let (sin, cos) = (pos as f64 * theta).sin_cos();
        let x = v[2 * d];
        let y = v[2 * d + 1];
        out.push(x * cos - y * sin);
        out.push(x * sin + y * cos);
    }
    Ok(out)
}

/// Attention score `rotate(q, m) . rotate(k, n)`. Depends on `m` and `n`
/// only through `m - n`.
///
/// Errors when either vector disagrees with `config.dim`.
pub fn attention_score(q: &[f64], k: &[f64], m: i64, n: i64, config: &RotaryConfig) -> Result<f64> {
    let rq = rotate(q, m, config)?;
    let rk = rotate(k, n, config)?;
    Ok(rq.iter().zip(rk.iter()).map(|(a, b)| a * b).sum())
}

// ──────────────────────── Masked softmax ────────────────────────

/// One full attention row: scaled rotary scores against every key,
/// masked softmax over the allowed ones.
///
/// Masked entries are exactly `0.0`, not merely small; the allowed
/// entries are computed with the usual max-subtraction so large scores
/// cannot overflow, and they sum to 1 up to rounding.
///
/// Errors when the keys, key positions, and mask row disagree in length,
/// when any vector disagrees with `config.dim`, or when every key is
/// masked (there is nothing to normalize over).
pub fn attention_row(
    q: &[f64],
    keys: &[Vec<f64>],
    q_pos: i64,
    key_positions: &[i64],
    mask_row: &[bool],
    config: &RotaryConfig,
    scale: f64,
) -> Result<Vec<f64>> {
    if keys.len() != key_positions.len() || keys.len() != mask_row.len() {
        return Err(Error::mismatch(format!(
            "{} keys, {} key positions, {} mask slots",
            keys.len(),
            key_positions.len(),
            mask_row.len()
        )));
    }
    let rq = rotate(q, q_pos, config)?;

    let mut scores = vec![0.0f64; keys.len()];
    let mut max_score = f64::NEG_INFINITY;
    for (b, key) in keys.iter().enumerate() {
        if !mask_row[b] {
            continue;
        }
        let rk = rotate(key, key_positions[b], config)?;
        let s = scale * rq.iter().zip(rk.iter()).map(|(a, c)| a * c).sum::<f64>();
        scores[b] = s;
        if s > max_score {
            max_score = s;
        }
    }
    if max_score == f64::NEG_INFINITY {
        return Err(Error::FullyMaskedRow);
    }

    let mut total = 0.0;
    let mut out = vec![0.0f64; keys.len()];
    for (b, slot) in out.iter_mut().enumerate() {
        if mask_row[b] {
            let e = (scores[b] - max_score).exp();
            *slot = e;
            total += e;
        }
    }
    for slot in out.iter_mut() {
        *slot /= total;
    }
    Ok(out)
}

// ──────────────────────────── Tests ─────────────────────────────
