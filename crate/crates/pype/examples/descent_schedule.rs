//! Show how the per-layer ring cap falls as a pyramid run deepens, and
//! how the descent interval controls the speed of that fall.
//!
//! Run with: cargo run --example descent_schedule

use pype::{build_schedule, grid_for_layer, EncodingScheme};

fn main() -> pype::Result<()> {
    // A 6-layer run on a 6-row image, stepping down every 2 layers.
    let schedule = build_schedule(6, 2, 6)?;
    println!(
        "6 layers, interval 2, height 6: caps {}",
        schedule.trace_csv()
    );

    // The cap shapes the grid each layer sees: once it reaches 1 every
    // visual cell shares position 1 and the image becomes one block.
    let scheme = EncodingScheme::PyramidDescent {
        descent_interval: 2,
    };
    for layer in [1, 2, 6] {
        let grid = grid_for_layer(scheme, 6, 6, &schedule, layer)?;
        println!("\nlayer {layer} grid (cap {}):", schedule.p_max_for_layer(layer)?);
        print!("{}", grid.to_csv());
    }

    // Interval sweep on a deeper stack: smaller intervals collapse the
    // pyramid sooner; a huge interval never descends at all.
    println!("\n32 layers on a 24-row image, one trace per interval:");
    for interval in [1, 2, 3, 4, 999] {
        let schedule = build_schedule(32, interval, 24)?;
        println!("t={interval:<3} {}", schedule.trace_csv());
    }
    Ok(())
}
