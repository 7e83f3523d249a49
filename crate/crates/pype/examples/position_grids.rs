//! Print the four position-encoding schemes side by side on one image.
//!
//! Run with: cargo run --example position_grids

use pype::{build_grid, EncodingScheme};

fn main() -> pype::Result<()> {
    let (height, width) = (5, 6);
    let schemes = [
        EncodingScheme::RasterScan,
        EncodingScheme::Concentric,
        EncodingScheme::AllOne,
        EncodingScheme::PyramidDescent {
            descent_interval: 2,
        },
    ];

    println!("position indices on a {height}x{width} patch grid\n");
    for scheme in schemes {
        let grid = build_grid(scheme, height, width, 2)?;
        println!("{scheme} (max index {}):", grid.max_index());
        print!("{}", grid.to_csv());
        println!();
    }

    // The concentric index of a cell is one more than its ring depth,
    // capped: the border is ring 1, the next frame ring 2, and so on.
    let grid = build_grid(EncodingScheme::Concentric, height, width, 2)?;
    println!("cell (0,0) sits on ring {}", grid.index(0, 0));
    println!("cell (2,3) sits on ring {}", grid.index(2, 3));
    Ok(())
}
