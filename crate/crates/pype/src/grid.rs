//! Position-index grids for visual tokens.
//!
//! A vision-language sequence gives every visual token a position index
//! used by the rotary kernel. The index layout is what distinguishes the
//! four schemes here:
//!
//! * [`EncodingScheme::RasterScan`] numbers cells row by row, `1..=H*W`,
//!   the way a plain text decoder would.
//! * [`EncodingScheme::Concentric`] numbers cells by ring, starting at 1
//!   on the outermost ring and growing toward the center, so that every
//!   cell of a ring shares one index.
//! * [`EncodingScheme::AllOne`] gives every cell index 1, making all
//!   visual tokens positionally interchangeable.
//! * [`EncodingScheme::PyramidDescent`] is the concentric layout whose
//!   maximum ring index shrinks every `descent_interval` layers, so deep
//!   layers see a flatter and flatter grid until it reaches all-ones.
//!
//! Ring indices are 1-based: the outermost ring is index 1, and a cap
//! `p_max` merges every ring at or beyond the cap into one plateau. The
//! cap never exceeds `max(1, min(H, W) / 2)`, the number of complete
//! rings that fit in the rectangle; a larger requested cap is clamped so
//! grids never carry indices that no complete ring could own.

use std::fmt;

use crate::error::{Error, Result};

// ─────────────────────────── Schemes ────────────────────────────

/// Position-index layout for the visual part of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingScheme {
    /// Row-major enumeration, `1..=H*W`.
    RasterScan,
    /// Ring-based indices, outermost ring 1, fixed across layers.
    Concentric,
    /// Every cell index 1.
    AllOne,
    /// Ring-based indices whose cap descends every `descent_interval`
    /// layers. `descent_interval` must be at least 1.
    PyramidDescent { descent_interval: usize },
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodingScheme::RasterScan => write!(f, "raster"),
            EncodingScheme::Concentric => write!(f, "concentric"),
            EncodingScheme::AllOne => write!(f, "allone"),
            EncodingScheme::PyramidDescent { descent_interval } => {
                write!(f, "pyramid(t={descent_interval})")
            }
        }
    }
}

// ──────────────────────────── Grids ─────────────────────────────

/// An `H x W` matrix of 1-based position indices for visual cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionGrid {
    height: usize,
    width: usize,
    indices: Vec<usize>,
}

impl PositionGrid {
    /// Assemble a grid from raw row-major indices. Only data plumbing:
    /// callers are responsible for the index values themselves.
    pub(crate) fn from_raw(height: usize, width: usize, indices: Vec<usize>) -> PositionGrid {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        assert_eq!(indices.len(), height * width, "index count mismatch");
        PositionGrid {
            height,
            width,
            indices,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cell_count(&self) -> usize {
        self.height * self.width
    }

    /// Index at row `i`, column `j`. Panics on out-of-range coordinates;
    /// use [`ring_depth`] for checked coordinate validation.
    pub fn index(&self, i: usize, j: usize) -> usize {
        assert!(i < self.height && j < self.width, "cell out of range");
        self.indices[i * self.width + j]
    }

    /// Row-major view of all indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Largest index present in the grid. Grids are never empty, so this
    /// is always at least 1.
    pub fn max_index(&self) -> usize {
        *self.indices.iter().max().expect("grid is never empty")
    }

    /// Serialize as CSV: one line per grid row, comma-separated decimal
    /// integers, every line newline-terminated, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.height {
            let row: Vec<String> = (0..self.width)
                .map(|j| self.indices[i * self.width + j].to_string())
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse the CSV form produced by [`PositionGrid::to_csv`]. `source`
    /// names the input in error messages (a file path, or a label like
    /// `"<stdin>"`).
    pub fn parse_csv(text: &str, source: &str) -> Result<PositionGrid> {
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for field in line.split(',') {
                let v: usize = field.trim().parse().map_err(|_| {
                    Error::parse(source, lineno + 1, format!("bad index {field:?}"))
                })?;
                if v < 1 {
                    return Err(Error::parse(source, lineno + 1, "index 0 is not valid"));
                }
                row.push(v);
            }
            rows.push(row);
        }
        let height = rows.len();
        if height == 0 {
            return Err(Error::parse(source, 0, "empty grid"));
        }
        let width = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::parse(
                    source,
                    i + 1,
                    format!("row has {} fields, expected {width}", row.len()),
                ));
            }
        }
        Ok(PositionGrid {
            height,
            width,
            indices: rows.into_iter().flatten().collect(),
        })
    }
}

/// Distance from cell `(i, j)` to the nearest grid edge:
/// `min(i, j, H-1-i, W-1-j)`. Boundary cells have depth 0.
///
/// Errors when the cell lies outside the `H x W` rectangle.
pub fn ring_depth(i: usize, j: usize, height: usize, width: usize) -> Result<usize> {
    if height == 0 || width == 0 {
        return Err(Error::invalid(format!(
            "grid dimensions must be positive, got {height}x{width}"
        )));
    }
    if i >= height || j >= width {
        return Err(Error::invalid(format!(
            "cell ({i}, {j}) outside {height}x{width} grid"
        )));
    }
    #[cfg(not(feature = "ring-depth-mutation"))]
    let depth = i.min(j).min(height - 1 - i).min(width - 1 - j);
    // Deliberately buggy variant for self-check validation: dropping the
    // -1 from the bottom/right distances misclassifies those edges.
    #[cfg(feature = "ring-depth-mutation")]
    let depth = i.min(j).min(height - i).min(width - j);
    Ok(depth)
}

/// Number of complete rings in an `H x W` rectangle, floored at 1. This
/// is the largest cap a grid can honor.
fn ring_cap(height: usize, width: usize) -> usize {
    (height.min(width) / 2).max(1)
}

/// Build the position-index grid for one scheme.
///
/// `p_max` caps ring indices for [`EncodingScheme::Concentric`] and
/// [`EncodingScheme::PyramidDescent`]; rings at depth `p_max - 1` or
/// deeper all carry index `p_max`. The cap is clamped to the rectangle's
/// complete-ring count `max(1, min(H, W) / 2)`, so degenerate rectangles
/// (one or two cells across) silently collapse to all-ones. Raster-scan
/// and all-one grids ignore the cap apart from the `p_max >= 1` check.
pub fn build_grid(
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
    if let EncodingScheme::PyramidDescent { descent_interval } = scheme {
        if descent_interval < 1 {
            return Err(Error::invalid("descent interval must be at least 1"));
        }
    }

    let mut indices = vec![0usize; height * width];
    match scheme {
        EncodingScheme::RasterScan => {
            for (cell, slot) in indices.iter_mut().enumerate() {
                *slot = cell + 1;
            }
        }
        EncodingScheme::AllOne => {
            indices.fill(1);
        }
        EncodingScheme::Concentric | EncodingScheme::PyramidDescent { .. } => {
            let cap = p_max.min(ring_cap(height, width));
            for i in 0..height {
                for j in 0..width {
                    let depth = ring_depth(i, j, height, width)?;
                    indices[i * width + j] = (depth + 1).min(cap);
                }
            }
        }
    }
    Ok(PositionGrid {
        height,
        width,
        indices,
    })
}

// ─────────────────────── Descent schedules ──────────────────────

/// Per-layer ring-index caps for a pyramid-descent run.
///
/// The cap starts at `floor(H / 2)` and drops by one at the start of
/// every layer whose 1-based number is a multiple of `descent_interval`,
/// never falling below 1. Static schemes read only `initial_p_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentSchedule {
    pub num_layers: usize,
    pub descent_interval: usize,
    pub initial_p_max: usize,
    pub per_layer_p_max: Vec<usize>,
}

impl DescentSchedule {
    /// Cap in effect at 1-based `layer`.
    pub fn p_max_for_layer(&self, layer: usize) -> Result<usize> {
        if layer < 1 || layer > self.num_layers {
            return Err(Error::invalid(format!(
                "layer {layer} outside 1..={}",
                self.num_layers
            )));
        }
        Ok(self.per_layer_p_max[layer - 1])
    }

    /// Comma-separated trace of the per-layer caps, e.g. `3,2,2,1,1,1`.
    pub fn trace_csv(&self) -> String {
        self.per_layer_p_max
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Compute the cap schedule for `num_layers` layers with descent
/// interval `descent_interval` on a grid `height` rows tall.
///
/// The decrement is applied at the start of a layer, so layer `i`
/// records the cap after any decrement for `i`. `height` must be at
/// least 2 so the initial cap `floor(height / 2)` is at least 1.
pub fn build_schedule(
    num_layers: usize,
    descent_interval: usize,
    height: usize,
) -> Result<DescentSchedule> {
    if num_layers < 1 {
        return Err(Error::invalid("schedule needs at least one layer"));
    }
    if descent_interval < 1 {
        return Err(Error::invalid("descent interval must be at least 1"));
    }
    if height < 2 {
        return Err(Error::invalid(
            "schedule needs grid height of at least 2 rows",
        ));
    }
    let initial_p_max = height / 2;
    let mut current = initial_p_max;
    let mut per_layer_p_max = Vec::with_capacity(num_layers);
    for layer in 1..=num_layers {
        if layer % descent_interval == 0 && current > 1 {
            current -= 1;
        }
        per_layer_p_max.push(current);
    }
    Ok(DescentSchedule {
        num_layers,
        descent_interval,
        initial_p_max,
        per_layer_p_max,
    })
}

/// Grid seen by 1-based `layer` of a run.
///
/// Pyramid descent reads the layer's cap from the schedule. The other
/// schemes are static: concentric always uses the schedule's initial
/// cap, raster-scan and all-one ignore caps entirely, so every layer of
/// a static scheme gets an identical grid.
pub fn grid_for_layer(
    scheme: EncodingScheme,
    height: usize,
    width: usize,
    schedule: &DescentSchedule,
    layer: usize,
) -> Result<PositionGrid> {
    if layer < 1 || layer > schedule.num_layers {
        return Err(Error::invalid(format!(
            "layer {layer} outside 1..={}",
            schedule.num_layers
        )));
    }
    match scheme {
        EncodingScheme::RasterScan | EncodingScheme::AllOne => build_grid(scheme, height, width, 1),
        EncodingScheme::Concentric => build_grid(scheme, height, width, schedule.initial_p_max),
        EncodingScheme::PyramidDescent { .. } => build_grid(
            scheme,
            height,
            width,
            schedule.per_layer_p_max[layer - 1],
        ),
    }
}

// ──────────────────────────── Tests ─────────────────────────────
