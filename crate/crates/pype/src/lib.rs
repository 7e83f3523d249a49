//! Positional-encoding laboratory for visual token sequences.
//!
//! A text-image-instruction sequence gets its positions from a
//! per-cell index grid over the image: raster order, concentric rings,
//! a single shared index, or rings whose cap shrinks layer by layer
//! ([`grid`]). Positions drive both the rotary attention kernel
//! ([`rope`]) and the causal mask ([`layout`]). A seeded random-weight
//! decoder ([`decoder`]) runs whole sequences under any scheme and
//! records every attention row, [`analysis`] reduces those records to
//! concentration metrics and heatmaps, and [`oracle`] plus
//! [`selfcheck`] cross-validate the fast paths against independent
//! brute-force references. The `pype` binary ([`cli`]) exposes all of
//! it; the `examples/` directory walks each capability end to end.
//!
//! Everything is deterministic: one [`SplitMix64`] seed fixes weights,
//! tokens, and therefore every artifact byte.

pub mod analysis;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod grid;
pub mod layout;
pub mod matrix;
pub mod oracle;
pub mod rng;
pub mod rope;
pub mod selfcheck;

pub use analysis::{
    anchor_count, attention_entropy, average_heads, layer_report, metrics_for_layer,
    metrics_to_csv, parse_metrics_csv, parse_pgm, pgm_string, render_heatmap, topk_mass,
    AnchorMetrics,
};
pub use decoder::{
    forward, init_decoder, rms_norm, visual_to_instruction_attention, AttentionRecord,
    DecoderConfig, DecoderState,
};
pub use error::{Error, Result};
pub use grid::{
    build_grid, build_schedule, grid_for_layer, ring_depth, DescentSchedule, EncodingScheme,
    PositionGrid,
};
pub use layout::{
    assign_positions, assign_positions_anchored, build_mask, validate_mask, AbsolutePositions,
    AttentionMask, SequenceLayout,
};
pub use matrix::Matrix;
pub use rng::SplitMix64;
pub use rope::{attention_row, attention_score, rotary_frequencies, rotate, RotaryConfig};
pub use selfcheck::{check_attention, check_grids, check_schedules, run_all, CheckReport};
