//! Rotary position encoding from the ground up: per-pair frequencies,
//! the shift-invariance that makes scores depend only on relative
//! offset, and the long-range decay of attention with distance.
//!
//! Run with: cargo run --example rotary_attention

use pype::{attention_score, rotary_frequencies, rotate, RotaryConfig, SplitMix64};

fn main() -> pype::Result<()> {
    let config = RotaryConfig::with_default_base(8)?;
    println!("per-pair frequencies for dim 8, base 10000:");
    for (d, theta) in rotary_frequencies(&config).iter().enumerate() {
        println!("  pair {d}: {theta:.6}");
    }

    // Rotation preserves length, so queries and keys keep their norms.
    let v = vec![0.3, -0.7, 1.1, 0.2, -0.4, 0.9, 0.05, -1.3];
    let rotated = rotate(&v, 1234, &config)?;
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    println!("\n|v| = {:.12}, |rotate(v, 1234)| = {:.12}", norm(&v), norm(&rotated));

    // Only the offset m - n matters: shifting both positions by any
    // amount leaves the score unchanged.
    let q = vec![0.2, 0.5, -0.3, 0.8, 0.1, -0.6, 0.4, -0.2];
    let k = vec![-0.1, 0.3, 0.7, -0.5, 0.2, 0.6, -0.4, 0.9];
    let base_score = attention_score(&q, &k, 7, 3, &config)?;
    println!("\nscore at positions (7, 3):      {base_score:.12}");
    for shift in [10, 1000, -500] {
        let shifted = attention_score(&q, &k, 7 + shift, 3 + shift, &config)?;
        println!("score at (7{shift:+}, 3{shift:+}): {shifted:.12}");
    }

    // Averaged over random unit vectors, the score magnitude falls off
    // as the query-key distance grows.
    let config = RotaryConfig::with_default_base(64)?;
    let mut rng = SplitMix64::new(42);
    let unit = |rng: &mut SplitMix64| -> Vec<f64> {
        let v: Vec<f64> = (0..64).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / n).collect()
    };
    println!("\nmean |score| between random unit vectors vs distance (dim 64):");
    for distance in [0i64, 16, 64, 256, 1024] {
        let mut total = 0.0;
        for _ in 0..200 {
            let q = unit(&mut rng);
            let k = unit(&mut rng);
            total += attention_score(&q, &k, distance, 0, &config)?.abs();
        }
        println!("  distance {distance:>5}: {:.4}", total / 200.0);
    }
    Ok(())
}
