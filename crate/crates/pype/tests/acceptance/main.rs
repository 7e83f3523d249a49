//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line (visible with `--nocapture`) after its assertions hold.
//! Tolerances are relative with a floor of 1, i.e. `|a - b| <=
//! tol * max(|a|, |b|, 1)`, unless a criterion states otherwise.


use std::path::Path;
use std::process::Command;

use pype::oracle::{attention_oracle, grid_oracle, reference_forward};
use pype::{
    assign_positions, attention_entropy, attention_score, build_grid, build_mask, build_schedule,
    forward, grid_for_layer, init_decoder, metrics_for_layer, metrics_to_csv, parse_metrics_csv,
    parse_pgm, pgm_string, rotate, topk_mass, validate_mask, DecoderConfig, EncodingScheme,
    Matrix, RotaryConfig, SequenceLayout, SplitMix64,
};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn pass(line: &str) {
    println!("{line}");
}

fn ring_cap(height: usize, width: usize) -> usize {
    (height.min(width) / 2).max(1)
}

fn random_vec(rng: &mut SplitMix64, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

/// Standard normal via Box-Muller, for direction-uniform unit vectors.
fn gaussian(rng: &mut SplitMix64) -> f64 {
    let u1 = rng.next_f64().max(1e-300);
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_unit(rng: &mut SplitMix64, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

#[test]
fn criterion_01_grids_match_the_bruteforce_oracle() {
    let schemes = [
        EncodingScheme::RasterScan,
        EncodingScheme::Concentric,
        EncodingScheme::AllOne,
        EncodingScheme::PyramidDescent {
            descent_interval: 1,
        },
    ];
    let mut cases = 0;
    for scheme in schemes {
        for height in 2..=16 {
            for width in 2..=16 {
                // Every cap the grid can express, plus one past the
                // clamp so both paths must agree on clamping too.
                for p_max in 1..=ring_cap(height, width) + 2 {
                    let fast = build_grid(scheme, height, width, p_max).unwrap();
                    let slow = grid_oracle(scheme, height, width, p_max).unwrap();
                    assert_eq!(
                        fast.indices(),
                        slow.indices(),
                        "{scheme} {height}x{width} p_max {p_max}"
                    );
                    cases += 1;
                }
            }
        }
    }
    pass(&format!(
        "criterion 01 PASS: build_grid == grid_oracle on {cases} cases"
    ));
}

#[test]
fn criterion_02_pyramid_cap_one_is_the_all_one_grid() {
    for height in 1..=16 {
        for width in 1..=16 {
            let pyramid = build_grid(
                EncodingScheme::PyramidDescent {
                    descent_interval: 1,
                },
                height,
                width,
                1,
            )
            .unwrap();
            let allone = build_grid(EncodingScheme::AllOne, height, width, 1).unwrap();
            assert_eq!(pyramid.indices(), allone.indices(), "{height}x{width}");
        }
    }
    pass("criterion 02 PASS: pyramid at cap 1 equals the all-one grid on every size up to 16x16");
}

#[test]
fn criterion_03_schedule_traces_are_frozen() {
    let schedule = build_schedule(6, 2, 6).unwrap();
    assert_eq!(schedule.per_layer_p_max, vec![3, 2, 2, 1, 1, 1]);

    let deep = build_schedule(32, 2, 24).unwrap();
    assert_eq!(deep.initial_p_max, 12);
    assert_eq!(deep.per_layer_p_max[0], 12);
    assert_eq!(deep.per_layer_p_max[21], 1, "cap must reach 1 by layer 22");
    assert!(
        deep.per_layer_p_max[21..].iter().all(|&c| c == 1),
        "cap stays 1 once it gets there"
    );
    pass("criterion 03 PASS: schedule traces (6,2,6) -> 3,2,2,1,1,1 and (32,2,24) reaches 1 at layer 22");
}

#[test]
fn criterion_04_scores_are_shift_invariant() {
    let dims = [2usize, 8, 64];
    let mut rng = SplitMix64::new(0xACC_0004);
    for case in 0..10_000usize {
        let dim = dims[case % dims.len()];
        let config = RotaryConfig::with_default_base(dim).unwrap();
        let q = random_vec(&mut rng, dim);
        let k = random_vec(&mut rng, dim);
        let m = rng.below(4097) as i64 - 2048;
        let n = rng.below(4097) as i64 - 2048;
        let s = rng.below(4097) as i64 - 2048;
        let base = attention_score(&q, &k, m, n, &config).unwrap();
        let shifted = attention_score(&q, &k, m + s, n + s, &config).unwrap();
        assert!(
            close(base, shifted, 1e-9),
            "dim {dim} m {m} n {n} s {s}: {base} vs {shifted}"
        );
    }
    pass("criterion 04 PASS: 10000 scores unchanged by position shifts within 1e-9");
}

#[test]
fn criterion_05_rotation_preserves_norms_and_composes() {
    let dims = [2usize, 8, 64];
    let mut rng = SplitMix64::new(0xACC_0005);
    for case in 0..10_000usize {
        let dim = dims[case % dims.len()];
        let config = RotaryConfig::with_default_base(dim).unwrap();
        let v = random_vec(&mut rng, dim);
        let m = rng.below(4097) as i64 - 2048;
        let n = rng.below(4097) as i64 - 2048;

        let rotated = rotate(&v, m, &config).unwrap();
        let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(
            close(norm(&v), norm(&rotated), 1e-12),
            "norm broke at dim {dim} m {m}"
        );

        let twice = rotate(&rotated, n, &config).unwrap();
        let direct = rotate(&v, m + n, &config).unwrap();
        for d in 0..dim {
            assert!(
                close(twice[d], direct[d], 1e-9),
                "composition broke at dim {dim} ({m}, {n}) lane {d}"
            );
        }
    }
    pass("criterion 05 PASS: 10000 rotations norm-preserving within 1e-12 and additive within 1e-9");
}

#[test]
fn criterion_06_scores_decay_with_distance() {
    let dim = 64;
    let config = RotaryConfig::with_default_base(dim).unwrap();
    let mut rng = SplitMix64::new(0xACC_0006);
    let distances = [0i64, 16, 64, 256, 1024];
    let mut means = Vec::new();
    for &distance in &distances {
        let mut total = 0.0;
        for _ in 0..1000 {
            let q = random_unit(&mut rng, dim);
            total += attention_score(&q, &q, distance, 0, &config)
                .unwrap()
                .abs();
        }
        means.push(total / 1000.0);
    }
    for pair in means.windows(2) {
        assert!(
            pair[1] <= pair[0],
            "mean |score| rose along {distances:?}: {means:?}"
        );
    }
    pass(&format!(
        "criterion 06 PASS: mean |score| non-increasing over distances {distances:?}: {means:?}"
    ));
}

#[test]
fn criterion_07_kernel_matches_the_dense_rotation_oracle() {
    let dims = [2usize, 4, 8, 16, 32, 64];
    let mut rng = SplitMix64::new(0xACC_0007);
    for case in 0..1000usize {
        let dim = dims[case % dims.len()];
        let config = RotaryConfig::with_default_base(dim).unwrap();
        let q = random_vec(&mut rng, dim);
        let k = random_vec(&mut rng, dim);
        let m = rng.below(4097) as i64 - 2048;
        let n = rng.below(4097) as i64 - 2048;
        let fast = attention_score(&q, &k, m, n, &config).unwrap();
        let slow = attention_oracle(&q, &k, m, n, config.base).unwrap();
        assert!(
            close(fast, slow, 1e-9),
            "dim {dim} ({m},{n}): {fast} vs {slow}"
        );
    }
    pass("criterion 07 PASS: kernel agrees with the dense rotation oracle on 1000 cases within 1e-9");
}

#[test]
fn criterion_08_masks_validate_raster_is_triangular_descent_only_opens() {
    let schemes = [
        EncodingScheme::RasterScan,
        EncodingScheme::Concentric,
        EncodingScheme::AllOne,
        EncodingScheme::PyramidDescent {
            descent_interval: 2,
        },
    ];
    let mut rng = SplitMix64::new(0xACC_0008);

    // 500 random layouts: every constructed mask validates.
    for case in 0..500usize {
        let scheme = schemes[case % schemes.len()];
        let height = 1 + rng.below(8) as usize;
        let width = 1 + rng.below(8) as usize;
        let p_max = 1 + rng.below(4) as usize;
        let prefix = rng.below(6) as usize;
        let instruction = rng.below(5) as usize;
        let grid = build_grid(scheme, height, width, p_max).unwrap();
        let layout = SequenceLayout::new(prefix, grid, instruction);
        let positions = assign_positions(&layout);
        let mask = build_mask(&layout, &positions).unwrap();
        assert!(
            validate_mask(&mask, &positions),
            "case {case}: {scheme} {height}x{width} prefix {prefix} instr {instruction}"
        );
    }

    // Raster-scan positions are strictly increasing, so the mask is
    // exactly lower-triangular.
    for case in 0..10usize {
        let height = 1 + rng.below(6) as usize;
        let width = 1 + rng.below(6) as usize;
        let prefix = rng.below(5) as usize;
        let instruction = rng.below(4) as usize;
        let grid = build_grid(EncodingScheme::RasterScan, height, width, 1).unwrap();
        let layout = SequenceLayout::new(prefix, grid, instruction);
        let positions = assign_positions(&layout);
        let mask = build_mask(&layout, &positions).unwrap();
        let n = layout.total_len();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(
                    mask.allowed(a, b),
                    b <= a,
                    "case {case}: raster mask not triangular at ({a},{b})"
                );
            }
        }
    }

    // As the pyramid cap falls, attention only opens up: every pair a
    // layer allows stays allowed in the next layer.
    for case in 0..100usize {
        let layers = 2 + rng.below(7) as usize;
        let interval = 1 + rng.below(3) as usize;
        let height = 2 + rng.below(7) as usize;
        let width = 2 + rng.below(7) as usize;
        let prefix = rng.below(4) as usize;
        let instruction = rng.below(4) as usize;
        let scheme = EncodingScheme::PyramidDescent {
            descent_interval: interval,
        };
        let schedule = build_schedule(layers, interval, height).unwrap();
        let masks: Vec<_> = (1..=layers)
            .map(|layer| {
                let grid = grid_for_layer(scheme, height, width, &schedule, layer).unwrap();
                let layout = SequenceLayout::new(prefix, grid, instruction);
                let positions = assign_positions(&layout);
                build_mask(&layout, &positions).unwrap()
            })
            .collect();
        for layer in 0..layers - 1 {
            let n = masks[layer].size();
            for a in 0..n {
                for b in 0..n {
                    assert!(
                        !masks[layer].allowed(a, b) || masks[layer + 1].allowed(a, b),
                        "case {case}: layer {} closed a pair layer {} had open ({a},{b})",
                        layer + 2,
                        layer + 1
                    );
                }
            }
        }
    }
    pass("criterion 08 PASS: 500 masks validate, raster is lower-triangular, descent only opens attention");
}

/// Random decoder shape within the acceptance envelope: up to 4 layers,
/// 4 heads, model dim 64, 22 tokens.
fn random_shape(rng: &mut SplitMix64) -> (usize, usize, usize, usize, usize, usize, usize, usize) {
    let layers = 1 + rng.below(4) as usize;
    let heads = 1 + rng.below(4) as usize;
    let head_dim = [2usize, 4, 8, 16][rng.below(4) as usize];
    let model_dim = heads * head_dim;
    let vocab = 5 + rng.below(28) as usize;
    let height = 2 + rng.below(3) as usize;
    let width = 2 + rng.below(3) as usize;
    let prefix = rng.below(4) as usize;
    (layers, heads, model_dim, vocab, height, width, prefix, rng.below(4) as usize)
}

fn random_tokens(rng: &mut SplitMix64, len: usize, vocab: usize) -> Vec<usize> {
    (0..len).map(|_| rng.below(vocab as u64) as usize).collect()
}

#[test]
fn criterion_09_raster_decoder_matches_the_sequential_reference() {
    let mut rng = SplitMix64::new(0xACC_0009);
    for case in 0..50usize {
        let (layers, heads, model_dim, vocab, height, width, prefix, instruction) =
            random_shape(&mut rng);
        let seed = rng.next_u64();
        let config = DecoderConfig::new(
            layers,
            heads,
            model_dim,
            vocab,
            seed,
            EncodingScheme::RasterScan,
        );
        let state = init_decoder(config).unwrap();
        let grid = build_grid(config.scheme, height, width, 1).unwrap();
        let layout = SequenceLayout::new(prefix, grid, instruction);
        let schedule = build_schedule(layers, 1, height).unwrap();
        let tokens = random_tokens(&mut rng, layout.total_len(), vocab);

        let (fast_logits, fast_records) = forward(&state, &tokens, &layout, &schedule).unwrap();
        let (ref_logits, ref_probs) = reference_forward(&state, &tokens).unwrap();

        let n = layout.total_len();
        for a in 0..n {
            for t in 0..vocab {
                assert!(
                    close(fast_logits.get(a, t), ref_logits.get(a, t), 1e-9),
                    "case {case} logit ({a},{t})"
                );
            }
        }
        assert_eq!(fast_records.len(), ref_probs.len());
        for (rec, reference) in fast_records.iter().zip(ref_probs.iter()) {
            for a in 0..n {
                for b in 0..n {
                    assert!(
                        (rec.probs.get(a, b) - reference.get(a, b)).abs() <= 1e-9,
                        "case {case} layer {} head {} prob ({a},{b})",
                        rec.layer,
                        rec.head
                    );
                }
            }
        }
    }
    pass("criterion 09 PASS: raster forward matches the sequential reference on 50 configurations within 1e-9");
}

#[test]
fn criterion_10_pyramid_above_the_layer_count_is_concentric() {
    let mut rng = SplitMix64::new(0xACC_0010);
    for case in 0..20usize {
        let (layers, heads, model_dim, vocab, height, width, prefix, instruction) =
            random_shape(&mut rng);
        // The cap first drops at layer `interval`, so any interval
        // beyond the layer count never descends.
        let interval = layers + 1 + rng.below(5) as usize;
        let seed = rng.next_u64();

        let run = |scheme: EncodingScheme| {
            let config = DecoderConfig::new(layers, heads, model_dim, vocab, seed, scheme);
            let state = init_decoder(config).unwrap();
            let schedule = build_schedule(layers, interval, height).unwrap();
            let grid = grid_for_layer(scheme, height, width, &schedule, 1).unwrap();
            let layout = SequenceLayout::new(prefix, grid, instruction);
            let mut tokens_rng = SplitMix64::new(seed);
            let tokens = random_tokens(&mut tokens_rng, layout.total_len(), vocab);
            forward(&state, &tokens, &layout, &schedule).unwrap()
        };

        let (pyramid_logits, pyramid_records) = run(EncodingScheme::PyramidDescent {
            descent_interval: interval,
        });
        let (conc_logits, conc_records) = run(EncodingScheme::Concentric);

        for a in 0..pyramid_logits.rows() {
            for t in 0..vocab {
                assert!(
                    close(pyramid_logits.get(a, t), conc_logits.get(a, t), 1e-9),
                    "case {case} logit ({a},{t})"
                );
            }
        }
        for (p, c) in pyramid_records.iter().zip(conc_records.iter()) {
            for a in 0..p.probs.rows() {
                for b in 0..p.probs.cols() {
                    assert!(
                        (p.probs.get(a, b) - c.probs.get(a, b)).abs() <= 1e-9,
                        "case {case} layer {} head {} prob ({a},{b})",
                        p.layer,
                        p.head
                    );
                }
            }
        }
    }
    pass("criterion 10 PASS: pyramid with interval beyond the layer count reproduces concentric on 20 configurations");
}

#[test]
fn criterion_11_all_one_attention_is_exchangeable() {
    let mut rng = SplitMix64::new(0xACC_0011);
    for case in 0..20usize {
        let (layers, heads, model_dim, vocab, height, width, prefix, _) = random_shape(&mut rng);
        let instruction = 1 + rng.below(3) as usize;
        let seed = rng.next_u64();
        let config =
            DecoderConfig::new(layers, heads, model_dim, vocab, seed, EncodingScheme::AllOne);
        let state = init_decoder(config).unwrap();
        let grid = build_grid(config.scheme, height, width, 1).unwrap();
        let layout = SequenceLayout::new(prefix, grid, instruction);
        let schedule = build_schedule(layers, 1, height).unwrap();

        let mut tokens = random_tokens(&mut rng, layout.total_len(), vocab);
        let visual: Vec<usize> = layout.visual_slots().collect();
        let u = visual[rng.below(visual.len() as u64) as usize];
        let v = visual[rng.below(visual.len() as u64) as usize];
        if u == v {
            continue;
        }
        // Make the swap observable.
        tokens[u] = 1 % vocab;
        tokens[v] = 2 % vocab;
        let mut swapped = tokens.clone();
        swapped.swap(u, v);

        let (_, records) = forward(&state, &tokens, &layout, &schedule).unwrap();
        let (_, records_swapped) = forward(&state, &swapped, &layout, &schedule).unwrap();

        for (rec, rec_swapped) in records.iter().zip(records_swapped.iter()) {
            for a in layout.instruction_slots() {
                for b in 0..layout.total_len() {
                    let expected = if b == u {
                        rec.probs.get(a, v)
                    } else if b == v {
                        rec.probs.get(a, u)
                    } else {
                        rec.probs.get(a, b)
                    };
                    assert!(
                        (rec_swapped.probs.get(a, b) - expected).abs() <= 1e-9,
                        "case {case} layer {} head {} query {a} key {b}",
                        rec.layer,
                        rec.head
                    );
                }
            }
        }
    }
    pass("criterion 11 PASS: swapping two visual tokens under all-one swaps their received attention on 20 configurations");
}

#[test]
fn criterion_12_attention_rows_are_distributions_with_masked_zeros() {
    let schemes = [
        EncodingScheme::RasterScan,
        EncodingScheme::Concentric,
        EncodingScheme::AllOne,
        EncodingScheme::PyramidDescent {
            descent_interval: 2,
        },
    ];
    let mut rng = SplitMix64::new(0xACC_0012);
    let mut rows_checked = 0usize;
    for case in 0..12usize {
        let scheme = schemes[case % schemes.len()];
        let (layers, heads, model_dim, vocab, height, width, prefix, instruction) =
            random_shape(&mut rng);
        let config = DecoderConfig::new(layers, heads, model_dim, vocab, rng.next_u64(), scheme);
        let state = init_decoder(config).unwrap();
        let schedule = build_schedule(layers, 2, height).unwrap();
        let grid = grid_for_layer(scheme, height, width, &schedule, 1).unwrap();
        let layout = SequenceLayout::new(prefix, grid, instruction);
        let tokens = random_tokens(&mut rng, layout.total_len(), vocab);
        let (_, records) = forward(&state, &tokens, &layout, &schedule).unwrap();

        for rec in &records {
            // Rebuild the mask the decoder used at this record's layer.
            let grid = grid_for_layer(scheme, height, width, &schedule, rec.layer).unwrap();
            let layer_layout = layout.with_grid(grid);
            let positions = assign_positions(&layer_layout);
            let mask = build_mask(&layer_layout, &positions).unwrap();
            for a in 0..layout.total_len() {
                let mut sum = 0.0;
                for b in 0..layout.total_len() {
                    let p = rec.probs.get(a, b);
                    if !mask.allowed(a, b) {
                        assert_eq!(p, 0.0, "case {case} masked ({a},{b}) leaked");
                    }
                    sum += p;
                }
                assert!(
                    (sum - 1.0).abs() <= 1e-6,
                    "case {case} layer {} head {} row {a} sums to {sum}",
                    rec.layer,
                    rec.head
                );
                rows_checked += 1;
            }
        }
    }
    pass(&format!(
        "criterion 12 PASS: {rows_checked} attention rows sum to 1 within 1e-6 with exact zeros off-mask"
    ));
}

#[test]
fn criterion_14_analysis_metrics_and_heatmaps_hold_their_contracts() {
    // Uniform received attention: top-k mass is exactly k/N and entropy
    // is ln N.
    let uniform = vec![1.0 / 16.0; 16];
    assert!((topk_mass(&uniform, 5).unwrap() - 5.0 / 16.0).abs() < 1e-15);
    assert!((attention_entropy(&uniform) - 16.0f64.ln()).abs() <= 1e-9);

    // Planted anchors are counted exactly.
    let grid = build_grid(EncodingScheme::Concentric, 5, 5, 2).unwrap();
    let layout = SequenceLayout::new(0, grid, 1);
    let n = layout.total_len();
    let planted = [layout.visual_slot(1, 1), layout.visual_slot(3, 2)];
    let mut probs = Matrix::zeros(n, n);
    for q in 0..n {
        for &p in &planted {
            probs.set(q, p, 0.45);
        }
        for v in layout.visual_slots() {
            if !planted.contains(&v) {
                probs.set(q, v, 0.1 / 23.0);
            }
        }
    }
    let metrics = metrics_for_layer(&probs, &layout, 1, 2, 5.0).unwrap();
    assert_eq!(metrics.anchor_count, planted.len());
    assert!((metrics.topk_mass - 0.9).abs() <= 1e-9);

    // Metrics survive their CSV form.
    let csv = metrics_to_csv(&[metrics.clone()]);
    let back = parse_metrics_csv(&csv, "<acceptance>").unwrap();
    assert_eq!(metrics_to_csv(&back), csv);

    // Heatmaps hit the documented gray levels and round-trip exactly.
    let corners = Matrix::from_data(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
    assert_eq!(pgm_string(&corners), "P2\n2 2\n255\n0 255\n255 0\n");
    let quarters = Matrix::from_data(2, 2, vec![0.25, 0.5, 0.75, 1.0]);
    assert_eq!(pgm_string(&quarters), "P2\n2 2\n255\n64 128\n191 255\n");
    let ramp = Matrix::from_data(3, 4, (0..12).map(|i| i as f64 / 11.0).collect());
    let pgm = pgm_string(&ramp);
    let grays = parse_pgm(&pgm, "<acceptance>").unwrap();
    assert_eq!(pgm_string(&grays), pgm);

    pass("criterion 14 PASS: uniform/planted metrics exact, CSV and PGM forms round-trip");
}

#[test]
fn criterion_15_cli_is_deterministic_and_the_self_check_catches_mutations() {
    let bin = env!("CARGO_BIN_EXE_pype");

    // Identical invocations produce byte-identical artifacts.
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let status = Command::new(bin)
            .args([
                "simulate",
                "--seed",
                "11",
                "--scheme",
                "pyramid",
                "--height",
                "4",
                "--width",
                "4",
                "--layers",
                "3",
                "--outdir",
            ])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut names: Vec<String> = std::fs::read_dir(dir_a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"logits.csv".to_string()));
    assert!(names.contains(&"attention_layer_03.csv".to_string()));
    assert!(names.contains(&"v2i_layer_01.pgm".to_string()));
    for name in &names {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    // A clean build passes its own check.
    let output = Command::new(bin).arg("check").output().unwrap();
    assert!(output.status.success(), "clean check must exit 0");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("grids: PASS"), "stdout was: {stdout}");

    // The same check run against a build with the documented ring-depth
    // off-by-one must fail. The nested build gets its own target dir so
    // it cannot deadlock with the outer test build.
    let workspace = Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap();
    let output = Command::new(env!("CARGO"))
        .current_dir(workspace)
        .env("CARGO_TARGET_DIR", workspace.join("target/mutation-fixture"))
        .args([
            "run",
            "--quiet",
            "-p",
            "pype",
            "--features",
            "ring-depth-mutation",
            "--",
            "check",
        ])
        .output()
        .unwrap();
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(
        output.status.code(),
        Some(1),
        "mutated check must exit 1; stdout: {stdout}, stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(stdout.contains("grids: FAIL"), "stdout was: {stdout}");

    pass("criterion 15 PASS: simulate is byte-deterministic, check exits 0 clean and 1 under the ring-depth mutation");
}
