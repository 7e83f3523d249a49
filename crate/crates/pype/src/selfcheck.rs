//! Built-in cross-validation sweeps.
//!
//! Each check replays a slice of the crate against the independent
//! reference implementations in [`crate::oracle`] (or against invariants
//! stated from first principles) and reports the first disagreement.
//! The `check` CLI subcommand runs all of them; a failure there means a
//! fast path and its reference have drifted apart.

use crate::error::Result;
use crate::grid::{build_grid, build_schedule, EncodingScheme};
use crate::oracle::{attention_oracle, grid_oracle};
use crate::rng::SplitMix64;
use crate::rope::{attention_score, RotaryConfig};

/// Outcome of one sweep: how many cases ran, whether all agreed, and a
/// description of the first failing case if any did not.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub passed: bool,
    pub first_failure: Option<String>,
}

impl CheckReport {
    fn pass(name: &'static str, cases: usize) -> Self {
        CheckReport {
            name,
            cases,
            passed: true,
            first_failure: None,
        }
    }

    fn fail(name: &'static str, cases: usize, detail: String) -> Self {
        CheckReport {
            name,
            cases,
            passed: false,
            first_failure: Some(detail),
        }
    }

    /// One-line form, e.g. `grids: PASS (4032 cases)` or
    /// `grids: FAIL (17 cases): <first failing case>`.
    pub fn summary_line(&self) -> String {
        if self.passed {
            format!("{}: PASS ({} cases)", self.name, self.cases)
        } else {
            format!(
                "{}: FAIL ({} cases): {}",
                self.name,
                self.cases,
                self.first_failure.as_deref().unwrap_or("unknown failure")
            )
        }
    }
}

/// Compare [`build_grid`] against [`grid_oracle`] cell by cell for every
/// scheme over all grids up to 12x12 and caps 1..=7.
pub fn check_grids() -> CheckReport {
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
        for height in 1..=12 {
            for width in 1..=12 {
                for p_max in 1..=7 {
                    cases += 1;
                    let fast = match build_grid(scheme, height, width, p_max) {
                        Ok(g) => g,
                        Err(e) => {
                            return CheckReport::fail(
                                "grids",
                                cases,
                                format!("{scheme} {height}x{width} p_max {p_max}: build failed: {e}"),
                            )
                        }
                    };
                    let slow = match grid_oracle(scheme, height, width, p_max) {
                        Ok(g) => g,
                        Err(e) => {
                            return CheckReport::fail(
                                "grids",
                                cases,
                                format!("{scheme} {height}x{width} p_max {p_max}: oracle failed: {e}"),
                            )
                        }
                    };
                    for i in 0..height {
                        for j in 0..width {
                            if fast.index(i, j) != slow.index(i, j) {
                                return CheckReport::fail(
                                    "grids",
                                    cases,
                                    format!(
                                        "{scheme} {height}x{width} p_max {p_max}: cell ({i},{j}) got {} want {}",
                                        fast.index(i, j),
                                        slow.index(i, j)
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    CheckReport::pass("grids", cases)
}

/// Compare the paired-rotation attention score against the dense
/// rotation-matrix oracle on 1000 seeded random cases across dimensions
/// 2..=64 and positions up to +-2048.
pub fn check_attention() -> CheckReport {
    let dims = [2usize, 4, 8, 16, 32, 64];
    let mut rng = SplitMix64::new(0x5E1F_C4EC);
    for case in 0..1000usize {
        let dim = dims[case % dims.len()];
        let config = match RotaryConfig::with_default_base(dim) {
            Ok(c) => c,
            Err(e) => return CheckReport::fail("attention", case, format!("dim {dim}: {e}")),
        };
        let q: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let k: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let m = rng.below(4097) as i64 - 2048;
        let n = rng.below(4097) as i64 - 2048;
        let run = |r: Result<f64>, what: &str| -> std::result::Result<f64, CheckReport> {
            r.map_err(|e| CheckReport::fail("attention", case, format!("{what}: {e}")))
        };
        let fast = match run(attention_score(&q, &k, m, n, &config), "score") {
            Ok(v) => v,
            Err(rep) => return rep,
        };
        let slow = match run(attention_oracle(&q, &k, m, n, config.base), "oracle") {
            Ok(v) => v,
            Err(rep) => return rep,
        };
        let tol = 1e-9 * fast.abs().max(slow.abs()).max(1.0);
        if (fast - slow).abs() > tol {
            return CheckReport::fail(
                "attention",
                case + 1,
                format!("dim {dim} positions ({m},{n}): got {fast} want {slow}"),
            );
        }
    }
    CheckReport::pass("attention", 1000)
}

/// Verify descent schedules from first principles over a sweep of layer
/// counts, intervals, and grid heights: caps start at `height / 2`, never
/// rise, never drop below 1, fall by at most 1 per layer, and change only
/// at layers that are multiples of the interval.
pub fn check_schedules() -> CheckReport {
    let mut cases = 0;
    for num_layers in 1..=40 {
        for interval in [1usize, 2, 3, 4, 7, 100] {
            for height in 2..=16 {
                cases += 1;
                let schedule = match build_schedule(num_layers, interval, height) {
                    Ok(s) => s,
                    Err(e) => {
                        return CheckReport::fail(
                            "schedules",
                            cases,
                            format!("layers {num_layers} t {interval} h {height}: {e}"),
                        )
                    }
                };
                let caps = &schedule.per_layer_p_max;
                let initial = height / 2;
                let fail = |msg: String| -> CheckReport {
                    CheckReport::fail(
                        "schedules",
                        cases,
                        format!("layers {num_layers} t {interval} h {height}: {msg}"),
                    )
                };
                if schedule.initial_p_max != initial {
                    return fail(format!(
                        "initial cap {} want {initial}",
                        schedule.initial_p_max
                    ));
                }
                if caps.len() != num_layers {
                    return fail(format!("{} caps for {num_layers} layers", caps.len()));
                }
                let mut previous = initial;
                for (idx, &cap) in caps.iter().enumerate() {
                    let layer = idx + 1;
                    let expect = if layer % interval == 0 && previous > 1 {
                        previous - 1
                    } else {
                        previous
                    };
                    if cap != expect {
                        return fail(format!("layer {layer} cap {cap} want {expect}"));
                    }
                    if cap < 1 || cap > previous || previous - cap > 1 {
                        return fail(format!("layer {layer} cap {cap} after {previous}"));
                    }
                    if schedule.p_max_for_layer(layer).ok() != Some(cap) {
                        return fail(format!("p_max_for_layer({layer}) disagrees with trace"));
                    }
                    previous = cap;
                }
            }
        }
    }
    CheckReport::pass("schedules", cases)
}

/// Run every sweep and collect the reports in a fixed order.
pub fn run_all() -> Vec<CheckReport> {
    vec![check_grids(), check_attention(), check_schedules()]
}
