//! Run the seeded random-weight decoder under two encoding schemes and
//! compare how attention flows from the image to the instruction token,
//! writing heatmaps and a metrics table for each run.
//!
//! Run with: cargo run --example decoder_attention_flow

use pype::{
    build_schedule, forward, grid_for_layer, init_decoder, layer_report, metrics_to_csv,
    render_heatmap, visual_to_instruction_attention, DecoderConfig, EncodingScheme,
    SequenceLayout, SplitMix64,
};

fn main() -> pype::Result<()> {
    let out = std::env::temp_dir().join("pype-attention-flow");
    std::fs::create_dir_all(&out)?;

    let (layers, height, width) = (4, 4, 4);
    let schemes = [
        EncodingScheme::RasterScan,
        EncodingScheme::PyramidDescent {
            descent_interval: 1,
        },
    ];

    for scheme in schemes {
        let config = DecoderConfig::new(layers, 2, 16, 64, 9, scheme);
        let state = init_decoder(config)?;
        let schedule = build_schedule(layers, 1, height)?;
        let grid = grid_for_layer(scheme, height, width, &schedule, 1)?;
        let layout = SequenceLayout::new(2, grid, 1);

        // Same seeded tokens for both schemes, so the weights and the
        // input match and only the position encoding differs.
        let mut rng = SplitMix64::new(123);
        let tokens: Vec<usize> = (0..layout.total_len())
            .map(|_| rng.below(64) as usize)
            .collect();

        let (_logits, records) = forward(&state, &tokens, &layout, &schedule)?;

        println!("=== {scheme} ===");
        let metrics = layer_report(&records, &layout, 5, 5.0)?;
        print!("{}", metrics_to_csv(&metrics));

        // How much of the instruction token's attention lands on each
        // image cell, one grayscale map per layer.
        let maps = visual_to_instruction_attention(&records, &layout)?;
        for (idx, map) in maps.iter().enumerate() {
            let name = format!("{scheme}-layer-{:02}.pgm", idx + 1);
            let path = out.join(name.replace(['(', ')', '='], "-"));
            render_heatmap(map, &path)?;
            println!("wrote {}", path.display());
        }
        println!();
    }
    println!("view the PGM files with any image viewer, or just cat them");
    Ok(())
}
