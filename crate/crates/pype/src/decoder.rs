//! Desk-scale causal decoder with swappable visual position encoding.
//!
//! The model is a standard pre-norm transformer run entirely in `f64`:
//! RMS normalization, multi-head rotary attention, a gated feed-forward
//! with 4x expansion, residual connections, and logits tied to the
//! embedding table. Weights are random; nothing here is trained. The
//! point is to watch how attention mass moves through a randomly
//! initialized network when only the position encoding changes, so
//! `forward` recomputes positions and masks from the scheme at every
//! layer and captures every attention row it produces.
//!
//! Weight initialization draws from [`SplitMix64`](crate::rng) seeded
//! with `config.seed`: every projection and embedding entry is uniform
//! in `[-0.02, 0.02)`, drawn in file order (see below), while all norm
//! gains start at exactly 1. Identical configs produce bit-identical
//! states.
//!
//! ## Weight file format
//!
//! [`DecoderState::save_weights`] writes, all little-endian:
//!
//! ```text
//! magic   4 bytes  "PYPE"
//! version u32      1
//! dims    4 x u32  num_layers, num_heads, model_dim, vocab_size
//! tensors f64...   row-major, in order:
//!     embedding                (vocab_size x model_dim)
//!     per layer 1..=num_layers:
//!         attn_norm_gain       (model_dim)
//!         wq, wk, wv, wo       (model_dim x model_dim each)
//!         ffn_norm_gain        (model_dim)
//!         w_up                 (model_dim x 4*model_dim)
//!         w_down               (4*model_dim x model_dim)
//!     final_norm_gain          (model_dim)
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{grid_for_layer, DescentSchedule, EncodingScheme};
use crate::layout::{
    assign_positions, assign_positions_anchored, build_mask, SequenceLayout,
};
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::rope::{attention_row, RotaryConfig, DEFAULT_BASE};

pub const RMS_EPS: f64 = 1e-5;
pub const WEIGHT_MAGIC: &[u8; 4] = b"PYPE";
pub const WEIGHT_VERSION: u32 = 1;
const INIT_RANGE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub num_layers: usize,
    pub num_heads: usize,
    pub model_dim: usize,
    pub vocab_size: usize,
    pub seed: u64,
    pub scheme: EncodingScheme,
    pub rotary_base: f64,
    /// When set, instruction tokens keep the positions they had under
    /// the first layer's grid for the whole run, instead of following
    /// the shrinking visual maximum of a descent schedule.
    pub fixed_instruction_positions: bool,
}

impl DecoderConfig {
    pub fn new(
        num_layers: usize,
        num_heads: usize,
        model_dim: usize,
        vocab_size: usize,
        seed: u64,
        scheme: EncodingScheme,
    ) -> DecoderConfig {
        DecoderConfig {
            num_layers,
            num_heads,
            model_dim,
            vocab_size,
            seed,
            scheme,
            rotary_base: DEFAULT_BASE,
            fixed_instruction_positions: false,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.model_dim / self.num_heads
    }

    fn validate(&self) -> Result<()> {
        if self.num_layers < 1 {
            return Err(Error::invalid("decoder needs at least one layer"));
        }
        if self.num_heads < 1 {
            return Err(Error::invalid("decoder needs at least one head"));
        }
        if self.model_dim == 0 || self.model_dim % self.num_heads != 0 {
            return Err(Error::invalid(format!(
                "model dim {} not divisible by {} heads",
                self.model_dim, self.num_heads
            )));
        }
        let hd = self.model_dim / self.num_heads;
        if hd % 2 != 0 {
            return Err(Error::invalid(format!(
                "head dim {hd} must be even for rotary pairs"
            )));
        }
        if self.vocab_size < 2 {
            return Err(Error::invalid("vocabulary needs at least two tokens"));
        }
        if !(self.rotary_base > 1.0) {
            return Err(Error::invalid("rotary base must exceed 1"));
        }
        if let EncodingScheme::PyramidDescent { descent_interval } = self.scheme {
            if descent_interval < 1 {
                return Err(Error::invalid("descent interval must be at least 1"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub attn_norm_gain: Vec<f64>,
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
    pub ffn_norm_gain: Vec<f64>,
    pub w_up: Matrix,
    pub w_down: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub config: DecoderConfig,
    pub embedding: Matrix,
    pub layers: Vec<LayerWeights>,
    pub final_norm_gain: Vec<f64>,
}

/// Attention probabilities of one head at one layer, `probs[query][key]`.
/// `layer` and `head` are both 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionRecord {
    pub layer: usize,
    pub head: usize,
    pub probs: Matrix,
}

fn draw_matrix(gen: &mut SplitMix64, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| gen.uniform(-INIT_RANGE, INIT_RANGE))
        .collect();
    Matrix::from_data(rows, cols, data)
}

/// Build a decoder with seeded random weights. Identical configs yield
/// bit-identical states.
pub fn init_decoder(config: DecoderConfig) -> Result<DecoderState> {
    config.validate()?;
    let d = config.model_dim;
    let mut gen = SplitMix64::new(config.seed);
    let embedding = draw_matrix(&mut gen, config.vocab_size, d);
    let mut layers = Vec::with_capacity(config.num_layers);
    for _ in 0..config.num_layers {
        layers.push(LayerWeights {
            attn_norm_gain: vec![1.0; d],
            wq: draw_matrix(&mut gen, d, d),
            wk: draw_matrix(&mut gen, d, d),
            wv: draw_matrix(&mut gen, d, d),
            wo: draw_matrix(&mut gen, d, d),
            ffn_norm_gain: vec![1.0; d],
            w_up: draw_matrix(&mut gen, d, 4 * d),
            w_down: draw_matrix(&mut gen, 4 * d, d),
        });
    }
    Ok(DecoderState {
        config,
        embedding,
        layers,
        final_norm_gain: vec![1.0; d],
    })
}

/// `x * gain / sqrt(mean(x^2) + eps)`, the pre-norm used everywhere here.
pub fn rms_norm(x: &[f64], gain: &[f64], eps: f64) -> Vec<f64> {
    let mean_sq = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    let inv = 1.0 / (mean_sq + eps).sqrt();
    x.iter().zip(gain.iter()).map(|(v, g)| v * g * inv).collect()
}

/// Row vector times matrix: `out[c] = sum_r x[r] * w[r][c]`.
fn linear(x: &[f64], w: &Matrix) -> Vec<f64> {
    debug_assert_eq!(x.len(), w.rows());
    let mut out = vec![0.0; w.cols()];
    for (r, &xv) in x.iter().enumerate() {
        let row = w.row(r);
        for (c, slot) in out.iter_mut().enumerate() {
            *slot += xv * row[c];
        }
    }
    out
}

fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

/// Run the decoder over one sequence.
///
/// Returns the logits (`total_len x vocab_size`) and one
/// [`AttentionRecord`] per layer and head in layer-major, head-major
/// order. Positions and masks are rebuilt per layer from
/// `config.scheme` and `schedule`, so a pyramid run really does change
/// its attention structure as it deepens.
pub fn forward(
    state: &DecoderState,
    token_ids: &[usize],
    layout: &SequenceLayout,
    schedule: &DescentSchedule,
) -> Result<(Matrix, Vec<AttentionRecord>)> {
    let cfg = &state.config;
    let n = layout.total_len();
    if token_ids.len() != n {
        return Err(Error::mismatch(format!(
            "{} token ids for a layout of {} slots",
            token_ids.len(),
            n
        )));
    }
    if let Some(&bad) = token_ids.iter().find(|&&t| t >= cfg.vocab_size) {
        return Err(Error::invalid(format!(
            "token id {bad} outside vocabulary of {}",
            cfg.vocab_size
        )));
    }
    if schedule.num_layers != cfg.num_layers {
        return Err(Error::mismatch(format!(
            "schedule covers {} layers, decoder has {}",
            schedule.num_layers, cfg.num_layers
        )));
    }
    let height = layout.grid.height();
    let width = layout.grid.width();
    let d = cfg.model_dim;
    let hd = cfg.head_dim();
    let rotary = RotaryConfig::new(hd, cfg.rotary_base)?;
    let scale = 1.0 / (hd as f64).sqrt();
    let anchor = if cfg.fixed_instruction_positions {
        Some(grid_for_layer(cfg.scheme, height, width, schedule, 1)?.max_index())
    } else {
        None
    };

    let mut x: Vec<Vec<f64>> = token_ids
        .iter()
        .map(|&t| state.embedding.row(t).to_vec())
        .collect();
    let mut records = Vec::with_capacity(cfg.num_layers * cfg.num_heads);

    for (l, lw) in state.layers.iter().enumerate() {
        let layer = l + 1;
        let grid = grid_for_layer(cfg.scheme, height, width, schedule, layer)?;
        let lay = layout.with_grid(grid);
        let positions = match anchor {
            Some(base) => assign_positions_anchored(&lay, base)?,
            None => assign_positions(&lay),
        };
        let mask = build_mask(&lay, &positions)?;
        let pos: Vec<i64> = positions.as_slice().iter().map(|&p| p as i64).collect();

        let normed: Vec<Vec<f64>> = x
            .iter()
            .map(|row| rms_norm(row, &lw.attn_norm_gain, RMS_EPS))
            .collect();
        let qs: Vec<Vec<f64>> = normed.iter().map(|r| linear(r, &lw.wq)).collect();
        let ks: Vec<Vec<f64>> = normed.iter().map(|r| linear(r, &lw.wk)).collect();
        let vs: Vec<Vec<f64>> = normed.iter().map(|r| linear(r, &lw.wv)).collect();

        let mut attn_concat = vec![vec![0.0f64; d]; n];
        for head in 0..cfg.num_heads {
            let lo = head * hd;
            let hi = lo + hd;
            let head_keys: Vec<Vec<f64>> = ks.iter().map(|k| k[lo..hi].to_vec()).collect();
            let mut probs = Matrix::zeros(n, n);
            for a in 0..n {
                let row = attention_row(
                    &qs[a][lo..hi],
                    &head_keys,
                    pos[a],
                    &pos,
                    mask.row(a),
                    &rotary,
                    scale,
                )?;
                for (b, &p) in row.iter().enumerate() {
                    let v = &vs[b][lo..hi];
                    for c in 0..hd {
                        attn_concat[a][lo + c] += p * v[c];
                    }
                }
                probs.row_mut(a).copy_from_slice(&row);
            }
            records.push(AttentionRecord {
                layer,
                head: head + 1,
                probs,
            });
        }

        for (row, concat) in x.iter_mut().zip(attn_concat.iter()) {
            let o = linear(concat, &lw.wo);
            for (slot, ov) in row.iter_mut().zip(o.iter()) {
                *slot += ov;
            }
        }

        for row in x.iter_mut() {
            let n2 = rms_norm(row, &lw.ffn_norm_gain, RMS_EPS);
            let mut up = linear(&n2, &lw.w_up);
            for u in up.iter_mut() {
                *u = silu(*u);
            }
            let down = linear(&up, &lw.w_down);
            for (slot, dv) in row.iter_mut().zip(down.iter()) {
                *slot += dv;
            }
        }
    }

    let mut logits = Matrix::zeros(n, cfg.vocab_size);
    for (a, row) in x.iter().enumerate() {
        let nf = rms_norm(row, &state.final_norm_gain, RMS_EPS);
        for t in 0..cfg.vocab_size {
            let e = state.embedding.row(t);
            logits.set(a, t, nf.iter().zip(e.iter()).map(|(u, v)| u * v).sum());
        }
    }
    Ok((logits, records))
}

/// Head-averaged attention of the last instruction token onto the
/// visual cells, one `H x W` map per layer, in layer order.
///
/// Errors when the layout has no instruction tokens, when `records` is
/// empty, or when record shapes do not match the layout.
pub fn visual_to_instruction_attention(
    records: &[AttentionRecord],
    layout: &SequenceLayout,
) -> Result<Vec<Matrix>> {
    if layout.instruction_len == 0 {
        return Err(Error::invalid(
            "layout has no instruction tokens to read attention from",
        ));
    }
    if records.is_empty() {
        return Err(Error::invalid("no attention records supplied"));
    }
    let n = layout.total_len();
    let query = n - 1;
    let h = layout.grid.height();
    let w = layout.grid.width();
    let num_layers = records.iter().map(|r| r.layer).max().unwrap();
    let mut maps = Vec::with_capacity(num_layers);
    for layer in 1..=num_layers {
        let heads: Vec<&AttentionRecord> =
            records.iter().filter(|r| r.layer == layer).collect();
        if heads.is_empty() {
            return Err(Error::invalid(format!("no records for layer {layer}")));
        }
        let mut map = Matrix::zeros(h, w);
        for rec in &heads {
            if rec.probs.rows() != n || rec.probs.cols() != n {
                return Err(Error::mismatch(format!(
                    "record for layer {} head {} is {}x{}, layout wants {n}x{n}",
                    rec.layer,
                    rec.head,
                    rec.probs.rows(),
                    rec.probs.cols()
                )));
            }
            let row = rec.probs.row(query);
            for (cell, slot) in layout.visual_slots().enumerate() {
                let (i, j) = (cell / w, cell % w);
                map.set(i, j, map.get(i, j) + row[slot]);
            }
        }
        let scale = 1.0 / heads.len() as f64;
        for i in 0..h {
            for j in 0..w {
                map.set(i, j, map.get(i, j) * scale);
            }
        }
        maps.push(map);
    }
    Ok(maps)
}

// ─── Weight file I/O ───

fn push_f64s(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

impl DecoderState {
    /// Write the state in the flat binary format documented at module
    /// level.
    pub fn save_weights(&self, path: &Path) -> Result<()> {
        let cfg = &self.config;
        let mut buf = Vec::new();
        buf.extend_from_slice(WEIGHT_MAGIC);
        buf.extend_from_slice(&WEIGHT_VERSION.to_le_bytes());
        for dim in [
            cfg.num_layers as u32,
            cfg.num_heads as u32,
            cfg.model_dim as u32,
            cfg.vocab_size as u32,
        ] {
            buf.extend_from_slice(&dim.to_le_bytes());
        }
        push_f64s(&mut buf, self.embedding.data());
        for lw in &self.layers {
            push_f64s(&mut buf, &lw.attn_norm_gain);
            push_f64s(&mut buf, lw.wq.data());
            push_f64s(&mut buf, lw.wk.data());
            push_f64s(&mut buf, lw.wv.data());
            push_f64s(&mut buf, lw.wo.data());
            push_f64s(&mut buf, &lw.ffn_norm_gain);
            push_f64s(&mut buf, lw.w_up.data());
            push_f64s(&mut buf, lw.w_down.data());
        }
        push_f64s(&mut buf, &self.final_norm_gain);
        let mut file = fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    /// Read a state saved by [`DecoderState::save_weights`]. The file
    /// stores dimensions and tensors only; the scheme is supplied by the
    /// caller, the rotary base defaults to 10000, instruction positions
    /// follow the per-layer grid, and the seed field is set to 0 (it
    /// only ever mattered at initialization). Adjust the returned
    /// `config` afterwards if the run needs different settings.
    pub fn load_weights(path: &Path, scheme: EncodingScheme) -> Result<DecoderState> {
        let name = path.display().to_string();
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cursor = 0usize;

        let mut take = |len: usize| -> Result<&[u8]> {
            if cursor + len > bytes.len() {
                return Err(Error::WeightFormat {
                    file: name.clone(),
                    message: format!(
                        "truncated: wanted {} bytes at offset {cursor}, file has {}",
                        len,
                        bytes.len()
                    ),
                });
            }
            let s = &bytes[cursor..cursor + len];
            cursor += len;
            Ok(s)
        };

        let magic = take(4)?;
        if magic != WEIGHT_MAGIC {
            return Err(Error::WeightFormat {
                file: name,
                message: format!("bad magic {magic:?}"),
            });
        }
        let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
        if version != WEIGHT_VERSION {
            return Err(Error::WeightFormat {
                file: name,
                message: format!("unsupported version {version}"),
            });
        }
        let mut dims = [0u32; 4];
        for d in dims.iter_mut() {
            *d = u32::from_le_bytes(take(4)?.try_into().unwrap());
        }
        let [num_layers, num_heads, model_dim, vocab_size] = dims.map(|d| d as usize);

        let mut take_f64s = |count: usize| -> Result<Vec<f64>> {
            let raw = take(count * 8)?;
            Ok(raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };

        let embedding = Matrix::from_data(vocab_size, model_dim, take_f64s(vocab_size * model_dim)?);
        let mut layers = Vec::with_capacity(num_layers);
        for _ in 0..num_layers {
            layers.push(LayerWeights {
                attn_norm_gain: take_f64s(model_dim)?,
                wq: Matrix::from_data(model_dim, model_dim, take_f64s(model_dim * model_dim)?),
                wk: Matrix::from_data(model_dim, model_dim, take_f64s(model_dim * model_dim)?),
                wv: Matrix::from_data(model_dim, model_dim, take_f64s(model_dim * model_dim)?),
                wo: Matrix::from_data(model_dim, model_dim, take_f64s(model_dim * model_dim)?),
                ffn_norm_gain: take_f64s(model_dim)?,
                w_up: Matrix::from_data(model_dim, 4 * model_dim, take_f64s(4 * model_dim * model_dim)?),
                w_down: Matrix::from_data(4 * model_dim, model_dim, take_f64s(4 * model_dim * model_dim)?),
            });
        }
        let final_norm_gain = take_f64s(model_dim)?;
        if cursor != bytes.len() {
            return Err(Error::WeightFormat {
                file: name,
                message: format!("{} trailing bytes after tensors", bytes.len() - cursor),
            });
        }

        let config = DecoderConfig::new(num_layers, num_heads, model_dim, vocab_size, 0, scheme);
        config.validate().map_err(|e| Error::WeightFormat {
            file: path.display().to_string(),
            message: format!("stored dimensions are invalid: {e}"),
        })?;
        Ok(DecoderState {
            config,
            embedding,
            layers,
            final_norm_gain,
        })
    }
}
