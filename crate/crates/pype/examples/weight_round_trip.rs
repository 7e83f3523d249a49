//! Save a decoder's weights to the binary container and load them back:
//! the reloaded model produces bit-identical logits.
//!
//! Run with: cargo run --example weight_round_trip

use pype::{
    assign_positions, build_mask, build_schedule, forward, grid_for_layer, init_decoder,
    DecoderConfig, DecoderState, EncodingScheme, SequenceLayout,
};

fn main() -> pype::Result<()> {
    let scheme = EncodingScheme::Concentric;
    let config = DecoderConfig::new(2, 2, 16, 32, 77, scheme);
    let state = init_decoder(config)?;

    let path = std::env::temp_dir().join("pype-roundtrip.bin");
    state.save_weights(&path)?;
    let size = std::fs::metadata(&path)?.len();
    println!("saved {} bytes to {}", size, path.display());

    let reloaded = DecoderState::load_weights(&path, scheme)?;

    let schedule = build_schedule(2, 1, 3)?;
    let grid = grid_for_layer(scheme, 3, 3, &schedule, 1)?;
    let layout = SequenceLayout::new(2, grid, 1);
    let tokens: Vec<usize> = (0..layout.total_len()).map(|t| (t * 5) % 32).collect();

    let (original, _) = forward(&state, &tokens, &layout, &schedule)?;
    let (restored, _) = forward(&reloaded, &tokens, &layout, &schedule)?;

    let identical = original.to_csv() == restored.to_csv();
    println!("reloaded logits bit-identical: {identical}");

    // The layout machinery round-trips through CSV the same way.
    let positions = assign_positions(&layout);
    let mask = build_mask(&layout, &positions)?;
    println!(
        "positions line: {}",
        positions.to_csv_line().trim_end()
    );
    println!("mask rows: {}", mask.to_csv().lines().count());

    std::fs::remove_file(&path)?;
    Ok(())
}
