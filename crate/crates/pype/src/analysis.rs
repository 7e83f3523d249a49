//! Attention-flow metrics and artifact rendering.
//!
//! The questions this module answers about a captured run: how
//! concentrated is the attention a layer pays to the image, how spread
//! out is it, and do a few cells soak up far more than their share
//! (anchor cells)? All metrics are computed on head-averaged attention
//! restricted to visual keys.
//!
//! Anchor detection is a deliberate stand-in: a cell counts as an
//! anchor when the attention it receives, averaged over every query in
//! the layer, exceeds `threshold_multiple` times the uniform share
//! `1 / num_keys`. There is no standard quantitative criterion for
//! anchor tokens; treat the count as a rough indicator, not a
//! measurement.

use std::fs;
use std::path::Path;

use crate::decoder::AttentionRecord;
use crate::error::{Error, Result};
use crate::layout::SequenceLayout;
use crate::matrix::Matrix;

pub const DEFAULT_TOP_K: usize = 5;
pub const DEFAULT_ANCHOR_MULTIPLE: f64 = 5.0;

/// Sum of the `k` largest entries of a probability vector.
///
/// `dist` is expected to be a distribution (entries nonnegative, summing
/// to 1); the value is then the mass held by the top `k` entries.
/// Errors when `k` is 0 or exceeds the vector length.
pub fn topk_mass(dist: &[f64], k: usize) -> Result<f64> {
    if k < 1 || k > dist.len() {
        return Err(Error::invalid(format!(
            "k = {k} outside 1..={}",
            dist.len()
        )));
    }
    let mut sorted = dist.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("attention values are never NaN"));
    Ok(sorted[..k].iter().sum())
}

/// Shannon entropy `-sum p ln p` in nats, with `0 ln 0 = 0`. Uniform
/// over `n` entries gives `ln n`; a one-hot vector gives 0.
pub fn attention_entropy(dist: &[f64]) -> f64 {
    dist.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Number of keys whose mean received attention exceeds
/// `threshold_multiple` times the uniform share `1 / len`. The stand-in
/// anchor detector described at module level; `threshold_multiple`
/// should exceed 1 for the count to mean anything.
pub fn anchor_count(column_means: &[f64], threshold_multiple: f64) -> usize {
    if column_means.is_empty() {
        return 0;
    }
    let threshold = threshold_multiple / column_means.len() as f64;
    column_means.iter().filter(|&&v| v > threshold).count()
}

/// Per-layer summary of attention over the visual cells.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorMetrics {
    pub layer: usize,
    pub topk_mass: f64,
    pub entropy: f64,
    pub anchor_count: usize,
}

/// Metrics for one layer's head-averaged attention matrix.
///
/// The received-attention profile of the visual keys (their column
/// means over all queries) is the raw input for anchors; normalized to
/// sum 1 it is the distribution whose top-k mass and entropy are
/// reported. `k` larger than the visual cell count is clamped down.
///
/// Errors when the matrix shape disagrees with the layout or the layout
/// has no visual cells.
pub fn metrics_for_layer(
    avg_probs: &Matrix,
    layout: &SequenceLayout,
    layer: usize,
    k: usize,
    threshold_multiple: f64,
) -> Result<AnchorMetrics> {
    let n = layout.total_len();
    if avg_probs.rows() != n || avg_probs.cols() != n {
        return Err(Error::mismatch(format!(
            "attention matrix is {}x{}, layout wants {n}x{n}",
            avg_probs.rows(),
            avg_probs.cols()
        )));
    }
    let visual: Vec<usize> = layout.visual_slots().collect();
    if visual.is_empty() {
        return Err(Error::invalid("layout has no visual cells to analyze"));
    }
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }

    let mut col_means = vec![0.0f64; visual.len()];
    for q in 0..n {
        let row = avg_probs.row(q);
        for (slot, &col) in col_means.iter_mut().zip(visual.iter()) {
            *slot += row[col];
        }
    }
    for slot in col_means.iter_mut() {
        *slot /= n as f64;
    }

    let total: f64 = col_means.iter().sum();
    // Every visual query attends to itself, so the received total is
    // positive for any mask this crate builds.
    if total <= 0.0 {
        return Err(Error::invalid("visual keys received no attention at all"));
    }
    let received: Vec<f64> = col_means.iter().map(|v| v / total).collect();

    Ok(AnchorMetrics {
        layer,
        topk_mass: topk_mass(&received, k.min(received.len()))?,
        entropy: attention_entropy(&received),
        anchor_count: anchor_count(&col_means, threshold_multiple),
    })
}

/// Head-average the records of each layer and reduce them with
/// [`metrics_for_layer`]. Records must cover layers 1..=L contiguously,
/// as produced by the decoder.
pub fn layer_report(
    records: &[AttentionRecord],
    layout: &SequenceLayout,
    k: usize,
    threshold_multiple: f64,
) -> Result<Vec<AnchorMetrics>> {
    if records.is_empty() {
        return Err(Error::invalid("no attention records to report on"));
    }
    let num_layers = records.iter().map(|r| r.layer).max().unwrap();
    let mut report = Vec::with_capacity(num_layers);
    for layer in 1..=num_layers {
        let avg = average_heads(records, layer)?;
        report.push(metrics_for_layer(
            &avg,
            layout,
            layer,
            k,
            threshold_multiple,
        )?);
    }
    Ok(report)
}

/// Mean of the per-head probability matrices captured at `layer`.
pub fn average_heads(records: &[AttentionRecord], layer: usize) -> Result<Matrix> {
    let heads: Vec<&AttentionRecord> = records.iter().filter(|r| r.layer == layer).collect();
    if heads.is_empty() {
        return Err(Error::invalid(format!("no records for layer {layer}")));
    }
    let n = heads[0].probs.rows();
    let mut avg = Matrix::zeros(n, heads[0].probs.cols());
    for rec in &heads {
        if rec.probs.rows() != avg.rows() || rec.probs.cols() != avg.cols() {
            return Err(Error::mismatch(format!(
                "layer {layer} heads disagree in shape"
            )));
        }
        for r in 0..avg.rows() {
            for c in 0..avg.cols() {
                avg.set(r, c, avg.get(r, c) + rec.probs.get(r, c));
            }
        }
    }
    let scale = 1.0 / heads.len() as f64;
    for r in 0..avg.rows() {
        for c in 0..avg.cols() {
            avg.set(r, c, avg.get(r, c) * scale);
        }
    }
    Ok(avg)
}

// ─── Report CSV ───

/// CSV with header `layer,topk_mass,entropy,anchor_count`; the real
/// values carry exactly 6 decimal places.
pub fn metrics_to_csv(metrics: &[AnchorMetrics]) -> String {
    let mut out = String::from("layer,topk_mass,entropy,anchor_count\n");
    for m in metrics {
        out.push_str(&format!(
            "{},{:.6},{:.6},{}\n",
            m.layer, m.topk_mass, m.entropy, m.anchor_count
        ));
    }
    out
}

/// Parse the CSV form written by [`metrics_to_csv`].
pub fn parse_metrics_csv(text: &str, source: &str) -> Result<Vec<AnchorMetrics>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "layer,topk_mass,entropy,anchor_count")) => {}
        Some((_, other)) => {
            return Err(Error::parse(
                source,
                1,
                format!("unexpected header {other:?}"),
            ))
        }
        None => return Err(Error::parse(source, 0, "empty metrics file")),
    }
    let mut metrics = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                source,
                idx + 1,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let parse_err =
            |what: &str| Error::parse(source, idx + 1, format!("bad {what} {:?}", fields));
        metrics.push(AnchorMetrics {
            layer: fields[0].parse().map_err(|_| parse_err("layer"))?,
            topk_mass: fields[1].parse().map_err(|_| parse_err("topk_mass"))?,
            entropy: fields[2].parse().map_err(|_| parse_err("entropy"))?,
            anchor_count: fields[3].parse().map_err(|_| parse_err("anchor_count"))?,
        });
    }
    Ok(metrics)
}

// ─── Heatmaps ───

/// Plain-text PGM (`P2`) rendering of a nonnegative matrix: gray
/// `round(255 * v / max)`, one image row per line. An all-zero matrix
/// renders all black. Negative entries are clamped to 0 before scaling.
pub fn pgm_string(matrix: &Matrix) -> String {
    let max = matrix.max_value().max(0.0);
    let mut out = format!("P2\n{} {}\n255\n", matrix.cols(), matrix.rows());
    for r in 0..matrix.rows() {
        let grays: Vec<String> = matrix
            .row(r)
            .iter()
            .map(|&v| {
                let gray = if max > 0.0 {
                    (255.0 * v.max(0.0) / max).round() as u32
                } else {
                    0
                };
                gray.to_string()
            })
            .collect();
        out.push_str(&grays.join(" "));
        out.push('\n');
    }
    out
}

/// Write [`pgm_string`] to `path`.
pub fn render_heatmap(matrix: &Matrix, path: &Path) -> Result<()> {
    fs::write(path, pgm_string(matrix))?;
    Ok(())
}

/// Parse a `P2` PGM produced by [`pgm_string`] back into a matrix of
/// gray levels. Re-rendering the result is byte-identical, because the
/// maximum gray maps to 255 again.
pub fn parse_pgm(text: &str, source: &str) -> Result<Matrix> {
    let mut tokens = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace() {
            tokens.push((idx + 1, tok));
        }
    }
    if tokens.is_empty() || tokens[0].1 != "P2" {
        return Err(Error::parse(source, 1, "not a plain-text P2 PGM"));
    }
    if tokens.len() < 4 {
        return Err(Error::parse(source, 1, "truncated PGM header"));
    }
    let number = |(line, tok): (usize, &str)| -> Result<usize> {
        tok.parse()
            .map_err(|_| Error::parse(source, line, format!("bad number {tok:?}")))
    };
    let cols = number(tokens[1])?;
    let rows = number(tokens[2])?;
    let maxval = number(tokens[3])?;
    if maxval != 255 {
        return Err(Error::parse(
            source,
            tokens[3].0,
            format!("expected max gray 255, got {maxval}"),
        ));
    }
    let pixels = &tokens[4..];
    if pixels.len() != rows * cols {
        return Err(Error::parse(
            source,
            tokens.last().unwrap().0,
            format!("expected {} pixels, got {}", rows * cols, pixels.len()),
        ));
    }
    let mut m = Matrix::zeros(rows, cols);
    for (cell, &tok) in pixels.iter().enumerate() {
        let gray = number(tok)?;
        if gray > 255 {
            return Err(Error::parse(source, tok.0, format!("gray {gray} over 255")));
        }
        m.set(cell / cols, cell % cols, gray as f64);
    }
    Ok(m)
}
