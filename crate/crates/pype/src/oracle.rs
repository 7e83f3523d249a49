//! Brute-force reference implementations.
//!
//! Everything here exists to be compared against the fast paths, both by
//! the test suite and by `pype check`. The implementations are written
//! from the definitions: the grid oracle runs the literal per-ring
//! overwrite loop cell by cell, the attention oracle materializes full
//! rotation matrices, and the softmax oracle exponentiates without the
//! usual max-subtraction. None of them call into, or share arithmetic
//! helpers with, the modules they check; keep it that way, or the
//! cross-checks stop meaning anything.

use crate::decoder::DecoderState;
use crate::error::{Error, Result};
use crate::grid::{EncodingScheme, PositionGrid};
use crate::matrix::Matrix;

/// Reference grid construction.
///
/// Ring-based schemes start from an all-ones matrix and run the literal
/// descent loop: for `p = 1..=p_max` overwrite the subrectangle
/// `[p, H-p) x [p, W-p)` with `p`. That loop leaves a cell of ring depth
/// `d >= 1` holding `d` while boundary cells hold 1, so one final pass
/// applies the boundary convention this crate uses everywhere: interior
/// cells are shifted up by one, capped at `p_max`, making the outermost
/// ring index 1 and ring `d` index `d + 1`. The cap itself is clamped to
/// the rectangle's complete-ring count, the same contract as the fast
/// path, written out independently here.
pub fn grid_oracle(
    scheme: EncodingScheme,
    height: usize,
    width: usize,
    p_max: usize,
) -> Result<PositionGrid> {
    if height == 0 || width == 0 {
        return Err(Error::invalid(format!(
            "grid dimensions must be positive, got {height}x{width}"
        )));
    }
    if p_max < 1 {
        return Err(Error::invalid("p_max must be at least 1"));
    }

    let mut cells = vec![1usize; height * width];
    match scheme {
        EncodingScheme::RasterScan => {
            let mut next = 1;
            for i in 0..height {
                for j in 0..width {
                    cells[i * width + j] = next;
                    next += 1;
                }
            }
        }
        EncodingScheme::AllOne => {
            // already all ones
        }
        EncodingScheme::Concentric | EncodingScheme::PyramidDescent { .. } => {
            let shorter = if height < width { height } else { width };
            let mut cap = shorter / 2;
            if cap < 1 {
                cap = 1;
            }
            if p_max < cap {
                cap = p_max;
            }
            for p in 1..=cap {
                for i in 0..height {
                    for j in 0..width {
                        if i >= p && i + p < height && j >= p && j + p < width {
                            cells[i * width + j] = p;
                        }
                    }
                }
            }
            for i in 0..height {
                for j in 0..width {
                    let interior = i > 0 && j > 0 && i + 1 < height && j + 1 < width;
                    if interior {
                        let bumped = cells[i * width + j] + 1;
                        cells[i * width + j] = if bumped > cap { cap } else { bumped };
                    }
                }
            }
        }
    }
    Ok(PositionGrid::from_raw(height, width, cells))
}

/// Reference rotary attention score: materialize the full `D x D`
/// rotation matrices for positions `m` and `n`, apply them by dense
/// matrix-vector products, and take the dot product of the results.
///
/// Errors when the vectors differ in length or the length is odd or zero.
pub fn attention_oracle(q: &[f64], k: &[f64], m: i64, n: i64, base: f64) -> Result<f64> {
    if q.len() != k.len() {
        return Err(Error::mismatch(format!(
            "query length {} vs key length {}",
            q.len(),
            k.len()
        )));
    }
    let dim = q.len();
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::invalid(format!(
            "rotary dimension must be even and positive, got {dim}"
        )));
    }
    let rq = dense_rotation(dim, m, base).apply(q);
    let rk = dense_rotation(dim, n, base).apply(k);
    Ok(rq.iter().zip(rk.iter()).map(|(a, b)| a * b).sum())
}

struct DenseMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (row, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for col in 0..self.dim {
                acc += self.entries[row * self.dim + col] * v[col];
            }
            *slot = acc;
        }
        out
    }
}

/// Block-diagonal rotation matrix for position `pos`: pair `d` (0-based)
/// occupies rows and columns `2d, 2d+1` and rotates by `pos * theta_d`
/// with `theta_d = base^(-2d / dim)`.
fn dense_rotation(dim: usize, pos: i64, base: f64) -> DenseMatrix {
    let mut entries = vec![0.0; dim * dim];
    for pair in 0..dim / 2 {
        let theta = base.powf(-2.0 * pair as f64 / dim as f64);
        let angle = pos as f64 * theta;
        let (sin, cos) = angle.sin_cos();
        let r = 2 * pair;
        let c = 2 * pair;
        entries[r * dim + c] = cos;
        entries[r * dim + c + 1] = -sin;
        entries[(r + 1) * dim + c] = sin;
        entries[(r + 1) * dim + c + 1] = cos;
    }
    DenseMatrix { dim, entries }
}

/// Reference masked softmax: exponentiate allowed scores directly (no
/// max-subtraction) and normalize; masked slots are exactly zero.
///
/// Errors when the lengths disagree or every slot is masked.
pub fn softmax_oracle(scores: &[f64], allowed: &[bool]) -> Result<Vec<f64>> {
    if scores.len() != allowed.len() {
        return Err(Error::mismatch(format!(
            "{} scores vs {} mask slots",
            scores.len(),
            allowed.len()
        )));
    }
    let mut total = 0.0;
    let mut out = vec![0.0; scores.len()];
    for (slot, (&s, &a)) in out.iter_mut().zip(scores.iter().zip(allowed.iter())) {
        if a {
            let e = s.exp();
            *slot = e;
            total += e;
        }
    }
    if total == 0.0 {
        return Err(Error::FullyMaskedRow);
    }
    for slot in out.iter_mut() {
        *slot /= total;
    }
    Ok(out)
}

/// Reference decoder: a plain causal text transformer over the same
/// weights, with sequential positions `0..n-1` and a lower-triangular
/// mask, written here from scratch. No grids, no layouts, no shared
/// attention kernel; rotary application, normalization, and softmax are
/// all reimplemented inline. A raster-scan run of the real decoder must
/// reproduce this path, because raster positions are exactly sequential
/// and its mask is exactly lower-triangular.
///
/// Returns the logits and the per-layer, per-head attention matrices in
/// the same layer-major, head-major order the real decoder records.
pub fn reference_forward(
    state: &DecoderState,
    token_ids: &[usize],
) -> Result<(Matrix, Vec<Matrix>)> {
    let cfg = &state.config;
    let n = token_ids.len();
    if n == 0 {
        return Err(Error::invalid("reference decoder needs at least one token"));
    }
    if let Some(&bad) = token_ids.iter().find(|&&t| t >= cfg.vocab_size) {
        return Err(Error::invalid(format!(
            "token id {bad} outside vocabulary of {}",
            cfg.vocab_size
        )));
    }
    let d = cfg.model_dim;
    let hd = cfg.model_dim / cfg.num_heads;
    let scale = 1.0 / (hd as f64).sqrt();

    let norm = |x: &[f64], gain: &[f64]| -> Vec<f64> {
        let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        let inv = 1.0 / (ms + 1e-5).sqrt();
        x.iter().zip(gain).map(|(v, g)| v * g * inv).collect()
    };
    let matvec = |x: &[f64], w: &Matrix| -> Vec<f64> {
        let mut out = vec![0.0; w.cols()];
        for c in 0..w.cols() {
            let mut acc = 0.0;
            for (r, &xv) in x.iter().enumerate() {
                acc += xv * w.get(r, c);
            }
            out[c] = acc;
        }
        out
    };
    // In-place rotary application at a sequential position.
    let rotary = |v: &mut [f64], pos: usize| {
        for pair in 0..v.len() / 2 {
            let theta = cfg.rotary_base.powf(-2.0 * pair as f64 / v.len() as f64);
            let angle = pos as f64 * theta;
            let (sin, cos) = angle.sin_cos();
            let x = v[2 * pair];
            let y = v[2 * pair + 1];
            v[2 * pair] = x * cos - y * sin;
            v[2 * pair + 1] = x * sin + y * cos;
        }
    };

    let mut x: Vec<Vec<f64>> = token_ids
        .iter()
        .map(|&t| state.embedding.row(t).to_vec())
        .collect();
    let mut all_probs = Vec::with_capacity(cfg.num_layers * cfg.num_heads);

    for lw in &state.layers {
        let normed: Vec<Vec<f64>> = x.iter().map(|r| norm(r, &lw.attn_norm_gain)).collect();
        let mut qs: Vec<Vec<f64>> = normed.iter().map(|r| matvec(r, &lw.wq)).collect();
        let mut ks: Vec<Vec<f64>> = normed.iter().map(|r| matvec(r, &lw.wk)).collect();
        let vs: Vec<Vec<f64>> = normed.iter().map(|r| matvec(r, &lw.wv)).collect();
        for (slot, (q, k)) in qs.iter_mut().zip(ks.iter_mut()).enumerate() {
            for head in 0..cfg.num_heads {
                rotary(&mut q[head * hd..(head + 1) * hd], slot);
                rotary(&mut k[head * hd..(head + 1) * hd], slot);
            }
        }

        let mut attn = vec![vec![0.0f64; d]; n];
        for head in 0..cfg.num_heads {
            let lo = head * hd;
            let hi = lo + hd;
            let mut probs = Matrix::zeros(n, n);
            for a in 0..n {
                // Causal row: keys 0..=a, naive exp-normalize.
                let mut weights = vec![0.0f64; a + 1];
                let mut total = 0.0;
                for (b, w) in weights.iter_mut().enumerate() {
                    let s: f64 = qs[a][lo..hi]
                        .iter()
                        .zip(ks[b][lo..hi].iter())
                        .map(|(u, v)| u * v)
                        .sum();
                    *w = (scale * s).exp();
                    total += *w;
                }
                for (b, w) in weights.iter().enumerate() {
                    let p = w / total;
                    probs.set(a, b, p);
                    for c in lo..hi {
                        attn[a][c] += p * vs[b][c];
                    }
                }
            }
            all_probs.push(probs);
        }

        for (row, a) in x.iter_mut().zip(attn.iter()) {
            let o = matvec(a, &lw.wo);
            for (slot, ov) in row.iter_mut().zip(o.iter()) {
                *slot += ov;
            }
        }
        for row in x.iter_mut() {
            let n2 = norm(row, &lw.ffn_norm_gain);
            let mut up = matvec(&n2, &lw.w_up);
            for u in up.iter_mut() {
                *u = *u / (1.0 + (-*u).exp());
            }
            let down = matvec(&up, &lw.w_down);
            for (slot, dv) in row.iter_mut().zip(down.iter()) {
                *slot += dv;
            }
        }
    }

    let mut logits = Matrix::zeros(n, cfg.vocab_size);
    for (a, row) in x.iter().enumerate() {
        let nf = norm(row, &state.final_norm_gain);
        for t in 0..cfg.vocab_size {
            let e = state.embedding.row(t);
            logits.set(a, t, nf.iter().zip(e.iter()).map(|(u, v)| u * v).sum());
        }
    }
    Ok((logits, all_probs))
}
