//! Sequence layout: where tokens sit, which position index each one
//! carries, and who may attend to whom.
//!
//! A sequence is three contiguous segments in this order: `prefix_len`
//! text tokens (system prompt), one visual token per grid cell in
//! row-major cell order, then `instruction_len` text tokens (user
//! question). Text tokens get ordinary sequential positions; visual
//! tokens get positions from the grid's ring or raster indices, so
//! several visual tokens may share one position. Instruction positions
//! continue from the largest visual index, which under pyramid descent
//! shrinks as layers flatten the grid; [`assign_positions_anchored`]
//! pins the instruction offset instead, for runs that want instruction
//! positions fixed across layers while the visual grid descends.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::grid::PositionGrid;

/// Segment lengths plus the visual grid for one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceLayout {
    pub prefix_len: usize,
    pub grid: PositionGrid,
    pub instruction_len: usize,
}

impl SequenceLayout {
    pub fn new(prefix_len: usize, grid: PositionGrid, instruction_len: usize) -> SequenceLayout {
        SequenceLayout {
            prefix_len,
            grid,
            instruction_len,
        }
    }

    pub fn total_len(&self) -> usize {
        self.prefix_len + self.grid.cell_count() + self.instruction_len
    }

    pub fn visual_len(&self) -> usize {
        self.grid.cell_count()
    }

    pub fn prefix_slots(&self) -> Range<usize> {
        0..self.prefix_len
    }

    pub fn visual_slots(&self) -> Range<usize> {
        self.prefix_len..self.prefix_len + self.grid.cell_count()
    }

    pub fn instruction_slots(&self) -> Range<usize> {
        self.prefix_len + self.grid.cell_count()..self.total_len()
    }

    /// Sequence slot of the visual token at grid cell `(i, j)`.
    pub fn visual_slot(&self, i: usize, j: usize) -> usize {
        assert!(i < self.grid.height() && j < self.grid.width());
        self.prefix_len + i * self.grid.width() + j
    }

    /// Same segment lengths over a different grid. Used by the decoder,
    /// which swaps in a fresh grid at every layer of a descent run.
    pub fn with_grid(&self, grid: PositionGrid) -> SequenceLayout {
        SequenceLayout {
            prefix_len: self.prefix_len,
            grid,
            instruction_len: self.instruction_len,
        }
    }
}

/// One position index per sequence slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsolutePositions {
    values: Vec<usize>,
}

impl AbsolutePositions {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, slot: usize) -> usize {
        self.values[slot]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.values
    }

    /// Single CSV line, comma-separated, newline-terminated.
    pub fn to_csv_line(&self) -> String {
        let mut line = self
            .values
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",");
        line.push('\n');
        line
    }
}

/// Position index for every slot of `layout`.
///
/// Prefix token `k` sits at position `k`. The visual token at cell
/// `(i, j)` sits at `prefix_len + grid[i][j] - 1`, so the outermost ring
/// (index 1) continues directly from the prefix. Instruction token `k`
/// sits at `prefix_len + max_grid_index + k`, one past the deepest
/// visual position.
pub fn assign_positions(layout: &SequenceLayout) -> AbsolutePositions {
    assign_positions_anchored(layout, layout.grid.max_index())
        .expect("grid max index is always a valid anchor")
}

/// Like [`assign_positions`], but instruction positions continue from a
/// caller-chosen `instruction_base` instead of the grid's own maximum
/// index. Passing the first layer's maximum keeps instruction positions
/// identical across the layers of a descent run.
///
/// Errors when `instruction_base` is smaller than the grid's maximum
/// index, which would let instruction positions collide with visual ones.
pub fn assign_positions_anchored(
    layout: &SequenceLayout,
    instruction_base: usize,
) -> Result<AbsolutePositions> {
    let max_index = layout.grid.max_index();
    if instruction_base < max_index {
        return Err(Error::invalid(format!(
            "instruction base {instruction_base} below grid max index {max_index}"
        )));
    }
    let mut values = Vec::with_capacity(layout.total_len());
    for k in 0..layout.prefix_len {
        values.push(k);
    }
    for i in 0..layout.grid.height() {
        for j in 0..layout.grid.width() {
            values.push(layout.prefix_len + layout.grid.index(i, j) - 1);
        }
    }
    for k in 0..layout.instruction_len {
        values.push(layout.prefix_len + instruction_base + k);
    }
    Ok(AbsolutePositions { values })
}

/// Boolean attention mask, `allowed[query][key]`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionMask {
    size: usize,
    allowed: Vec<bool>,
}

impl AttentionMask {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn allowed(&self, query: usize, key: usize) -> bool {
        self.allowed[query * self.size + key]
    }

    pub fn row(&self, query: usize) -> &[bool] {
        &self.allowed[query * self.size..(query + 1) * self.size]
    }

    /// CSV form: one line per query row, fields `1` (allowed) or `0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for q in 0..self.size {
            let row: Vec<&str> = self.row(q).iter().map(|&a| if a { "1" } else { "0" }).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Build the attention mask for one layer.
///
/// Within the prefix and visual segments a query sees exactly the keys
/// whose position index does not exceed its own, so equal-index tokens
/// (same ring) see each other mutually and a deeper ring sees shallower
/// ones but not vice versa. Visual and instruction queries additionally
/// see every prefix token, and instruction queries see all prefix and
/// visual keys plus instruction keys up to their own sequence slot.
/// Instruction keys are invisible to prefix and visual queries.
///
/// Errors when `positions` does not cover `layout` slot for slot.
pub fn build_mask(layout: &SequenceLayout, positions: &AbsolutePositions) -> Result<AttentionMask> {
    let n = layout.total_len();
    if positions.len() != n {
        return Err(Error::mismatch(format!(
            "{} positions for a layout of {} slots",
            positions.len(),
            n
        )));
    }
    let visual = layout.visual_slots();
    let instruction = layout.instruction_slots();
    let mut allowed = vec![false; n * n];
    for a in 0..n {
        for b in 0..n {
            let allow = if instruction.contains(&b) {
                instruction.contains(&a) && b <= a
            } else if instruction.contains(&a) {
                true
            } else if visual.contains(&a) && b < layout.prefix_len {
                true
            } else {
                positions.get(b) <= positions.get(a)
            };
            allowed[a * n + b] = allow;
        }
    }
    Ok(AttentionMask { size: n, allowed })
}

/// Check a mask against position indices: every query must see itself,
/// and no query may see a key carrying a larger position index. Returns
/// `false` (never panics, never errors) on any violation, including a
/// mask/positions size disagreement.
pub fn validate_mask(mask: &AttentionMask, positions: &AbsolutePositions) -> bool {
    let n = mask.size();
    if positions.len() != n {
        return false;
    }
    for a in 0..n {
        if !mask.allowed(a, a) {
            return false;
        }
        for b in 0..n {
            if mask.allowed(a, b) && positions.get(b) > positions.get(a) {
                return false;
            }
        }
    }
    true
}
