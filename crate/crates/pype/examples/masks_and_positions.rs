//! Assemble a full sequence (text prefix, image, instruction), assign
//! absolute positions, and build the attention mask those positions
//! induce.
//!
//! Run with: cargo run --example masks_and_positions

use pype::{
    assign_positions, build_grid, build_mask, validate_mask, EncodingScheme, SequenceLayout,
};

fn main() -> pype::Result<()> {
    // Three prefix tokens, a 2x2 image, two instruction tokens.
    for scheme in [EncodingScheme::AllOne, EncodingScheme::Concentric] {
        let grid = build_grid(scheme, 2, 2, 1)?;
        let layout = SequenceLayout::new(3, grid, 2);
        let positions = assign_positions(&layout);
        let mask = build_mask(&layout, &positions)?;

        println!("scheme {scheme}, {} slots", layout.total_len());
        println!("positions: {}", positions.to_csv_line().trim_end());
        println!("mask (query rows, key columns):");
        print!("{}", mask.to_csv());
        println!(
            "validates: {}\n",
            validate_mask(&mask, &positions)
        );
    }

    // Under all-one encoding every visual cell shares one position, so
    // the whole image attends to itself bidirectionally; instruction
    // tokens stay causal among themselves but see the entire image.
    let grid = build_grid(EncodingScheme::AllOne, 2, 2, 1)?;
    let layout = SequenceLayout::new(3, grid, 2);
    let mask = build_mask(&layout, &assign_positions(&layout))?;
    let (first_visual, last_visual) = (layout.visual_slot(0, 0), layout.visual_slot(1, 1));
    println!(
        "first visual cell sees the last one: {}",
        mask.allowed(first_visual, last_visual)
    );
    let instruction = layout.instruction_slots().next().unwrap();
    println!(
        "instruction token sees every image cell: {}",
        layout
            .visual_slots()
            .all(|v| mask.allowed(instruction, v))
    );
    Ok(())
}
