//! Command-line front end.
//!
//! Five subcommands cover the crate's surface: `grid` prints a layer's
//! position grid, `mask` prints positions and the attention mask for a
//! full sequence layout, `simulate` runs the random-weight decoder and
//! writes its artifacts to a directory, `analyze` reduces those
//! artifacts to per-layer attention metrics, and `check` replays the
//! built-in cross-validation sweeps.
//!
//! Flag resolution: an explicit command-line flag wins; otherwise the
//! `--config` file is consulted (line-oriented `key = value`, keys named
//! after the long flags, `#` comments); otherwise the built-in default
//! applies. The seed alone has one extra step: the `PYPE_SEED`
//! environment variable overrides the built-in default but loses to an
//! explicit flag or config entry.
//!
//! Exit codes: 0 success, 1 failed check or broken input files, 2 usage
//! error (bad flags or inconsistent dimensions).

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{average_heads, metrics_for_layer, metrics_to_csv, render_heatmap};
use crate::decoder::{forward, init_decoder, visual_to_instruction_attention, DecoderConfig};
use crate::error::{Error, Result};
use crate::grid::{build_grid, build_schedule, grid_for_layer, EncodingScheme};
use crate::layout::{assign_positions, build_mask, validate_mask, SequenceLayout};
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::selfcheck::run_all;

/// Salt that separates the random-token stream from the weight stream
/// when both derive from the same user-facing seed.
const TOKEN_STREAM_SALT: u64 = 0x746F_6B65_6E73;

#[derive(Parser, Debug)]
#[command(
    name = "pype",
    version,
    about = "Position grids, attention masks, and a seeded decoder for studying visual position encodings"
)]
pub struct Cli {
    /// Defaults file consulted for flags not given explicitly
    /// (lines of `key = value`, keys named after the long flags).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print one layer's position grid as CSV.
    Grid(GridArgs),
    /// Print absolute positions and the attention mask for a layout.
    Mask(MaskArgs),
    /// Run the seeded random-weight decoder and write its artifacts.
    Simulate(SimulateArgs),
    /// Reduce simulate artifacts to per-layer attention metrics.
    Analyze(AnalyzeArgs),
    /// Cross-validate the fast paths against the built-in references.
    Check,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Encoding scheme: raster, concentric, allone, or pyramid
    /// [default: concentric].
    #[arg(long)]
    scheme: Option<String>,
    /// Grid rows [default: 3].
    #[arg(long)]
    height: Option<usize>,
    /// Grid columns [default: 3].
    #[arg(long)]
    width: Option<usize>,
    /// Number of decoder layers the schedule spans [default: 1].
    #[arg(long)]
    layers: Option<usize>,
    /// Layers between descent steps [default: 1].
    #[arg(long)]
    interval: Option<usize>,
    /// 1-based layer whose grid to print [default: 1].
    #[arg(long)]
    layer: Option<usize>,
    /// Write the grid CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Also print the per-layer cap schedule, e.g. `3,2,2,1,1,1`.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
pub struct MaskArgs {
    /// Encoding scheme: raster, concentric, allone, or pyramid
    /// [default: concentric].
    #[arg(long)]
    scheme: Option<String>,
    /// Grid rows [default: 3].
    #[arg(long)]
    height: Option<usize>,
    /// Grid columns [default: 3].
    #[arg(long)]
    width: Option<usize>,
    /// Number of decoder layers the schedule spans [default: 1].
    #[arg(long)]
    layers: Option<usize>,
    /// Layers between descent steps [default: 1].
    #[arg(long)]
    interval: Option<usize>,
    /// 1-based layer whose grid shapes the mask [default: 1].
    #[arg(long)]
    layer: Option<usize>,
    /// Text tokens before the image [default: 2].
    #[arg(long)]
    prefix_len: Option<usize>,
    /// Instruction tokens after the image [default: 1].
    #[arg(long)]
    instruction_len: Option<usize>,
    /// Write positions and mask here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Re-check the mask against the positions; exit 1 if it fails.
    #[arg(long)]
    validate: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// RNG seed for weights and random tokens [default: PYPE_SEED or 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Decoder layers [default: 2].
    #[arg(long)]
    layers: Option<usize>,
    /// Attention heads [default: 2].
    #[arg(long)]
    heads: Option<usize>,
    /// Model width; must split evenly into heads of even size
    /// [default: 16].
    #[arg(long)]
    model_dim: Option<usize>,
    /// Vocabulary size [default: 64].
    #[arg(long)]
    vocab: Option<usize>,
    /// Encoding scheme: raster, concentric, allone, or pyramid
    /// [default: concentric].
    #[arg(long)]
    scheme: Option<String>,
    /// Grid rows [default: 3].
    #[arg(long)]
    height: Option<usize>,
    /// Grid columns [default: 3].
    #[arg(long)]
    width: Option<usize>,
    /// Layers between descent steps [default: 1].
    #[arg(long)]
    interval: Option<usize>,
    /// Text tokens before the image [default: 2].
    #[arg(long)]
    prefix_len: Option<usize>,
    /// Instruction tokens after the image [default: 1].
    #[arg(long)]
    instruction_len: Option<usize>,
    /// Comma-separated token ids, one per sequence slot.
    #[arg(long, value_name = "IDS")]
    tokens: Option<String>,
    /// Draw this many seeded random token ids; must equal the
    /// layout's total length. Omitting both token flags draws exactly
    /// that many.
    #[arg(long, value_name = "N")]
    random_tokens: Option<usize>,
    /// Directory for the output files (created if missing).
    #[arg(long, value_name = "DIR")]
    outdir: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Directory written by `simulate`.
    #[arg(long, value_name = "DIR")]
    attn_dir: PathBuf,
    /// Top-k bucket for received-attention mass [default: 5].
    #[arg(long)]
    k: Option<usize>,
    /// Anchor threshold as a multiple of the uniform share
    /// [default: 5].
    #[arg(long)]
    threshold: Option<f64>,
    /// Write the metrics CSV here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Execute a parsed command line and return the process exit code.
/// Errors are printed to stderr here so the binary stays a one-liner.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) | Error::DimensionMismatch(_) => 2,
                _ => 1,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let config = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Grid(args) => cmd_grid(args, &config),
        Command::Mask(args) => cmd_mask(args, &config),
        Command::Simulate(args) => cmd_simulate(args, &config),
        Command::Analyze(args) => cmd_analyze(args, &config),
        Command::Check => cmd_check(),
    }
}

// ─── Flag resolution ───

/// Parsed `--config` file: a flat key-value map. Unknown keys are kept
/// but never read, so one file can serve several subcommands.
struct ConfigFile {
    values: HashMap<String, String>,
    source: String,
}

impl ConfigFile {
    fn empty() -> ConfigFile {
        ConfigFile {
            values: HashMap::new(),
            source: String::new(),
        }
    }

    fn load(path: Option<&Path>) -> Result<ConfigFile> {
        let Some(path) = path else {
            return Ok(ConfigFile::empty());
        };
        let text = fs::read_to_string(path)?;
        ConfigFile::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, source: &str) -> Result<ConfigFile> {
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    source,
                    idx + 1,
                    format!("expected `key = value`, got {line:?}"),
                ));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigFile {
            values,
            source: source.to_string(),
        })
    }

    fn lookup<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::invalid(format!(
                    "config {}: bad value {raw:?} for key {key:?}",
                    self.source
                ))
            }),
        }
    }
}

/// Explicit flag, else config entry, else fallback.
fn resolve<T: FromStr>(explicit: Option<T>, config: &ConfigFile, key: &str, fallback: T) -> Result<T> {
    if let Some(v) = explicit {
        return Ok(v);
    }
    Ok(config.lookup(key)?.unwrap_or(fallback))
}

/// Seed resolution: flag, else config `seed`, else `PYPE_SEED`, else 0.
fn resolve_seed(explicit: Option<u64>, config: &ConfigFile) -> Result<u64> {
    if let Some(seed) = explicit {
        return Ok(seed);
    }
    if let Some(seed) = config.lookup("seed")? {
        return Ok(seed);
    }
    match std::env::var("PYPE_SEED") {
        Ok(raw) => raw
            .parse()
            .map_err(|_| Error::invalid(format!("PYPE_SEED has non-integer value {raw:?}"))),
        Err(_) => Ok(0),
    }
}

fn parse_scheme(name: &str, descent_interval: usize) -> Result<EncodingScheme> {
    match name {
        "raster" => Ok(EncodingScheme::RasterScan),
        "concentric" => Ok(EncodingScheme::Concentric),
        "allone" => Ok(EncodingScheme::AllOne),
        "pyramid" => Ok(EncodingScheme::PyramidDescent { descent_interval }),
        other => Err(Error::invalid(format!(
            "unknown scheme {other:?}; expected raster, concentric, allone, or pyramid"
        ))),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ─── Subcommands ───

/// Shared grid-flag resolution for `grid` and `mask`: returns the
/// chosen layer's grid, printing the cap schedule first when asked.
fn resolved_grid(
    scheme: Option<String>,
    height: Option<usize>,
    width: Option<usize>,
    layers: Option<usize>,
    interval: Option<usize>,
    layer: Option<usize>,
    trace: bool,
    config: &ConfigFile,
) -> Result<crate::grid::PositionGrid> {
    let scheme_name = resolve(scheme, config, "scheme", "concentric".to_string())?;
    let height = resolve(height, config, "height", 3)?;
    let width = resolve(width, config, "width", 3)?;
    let layers = resolve(layers, config, "layers", 1)?;
    let interval = resolve(interval, config, "interval", 1)?;
    let layer = resolve(layer, config, "layer", 1)?;
    let scheme = parse_scheme(&scheme_name, interval)?;

    if height >= 2 {
        let schedule = build_schedule(layers, interval, height)?;
        if trace {
            println!("{}", schedule.trace_csv());
        }
        grid_for_layer(scheme, height, width, &schedule, layer)
    } else {
        // Single-row grids have no schedule (every ring cap clamps to
        // 1), so serve them directly and keep the layer bound honest.
        if trace {
            return Err(Error::invalid("--trace needs a grid height of at least 2"));
        }
        if layer < 1 || layer > layers {
            return Err(Error::invalid(format!("layer {layer} outside 1..={layers}")));
        }
        build_grid(scheme, height, width, 1)
    }
}

fn cmd_grid(args: GridArgs, config: &ConfigFile) -> Result<i32> {
    let grid = resolved_grid(
        args.scheme,
        args.height,
        args.width,
        args.layers,
        args.interval,
        args.layer,
        args.trace,
        config,
    )?;
    write_or_print(args.out.as_deref(), &grid.to_csv())?;
    Ok(0)
}

fn cmd_mask(args: MaskArgs, config: &ConfigFile) -> Result<i32> {
    let prefix_len = resolve(args.prefix_len, config, "prefix-len", 2)?;
    let instruction_len = resolve(args.instruction_len, config, "instruction-len", 1)?;
    let grid = resolved_grid(
        args.scheme,
        args.height,
        args.width,
        args.layers,
        args.interval,
        args.layer,
        false,
        config,
    )?;
    let layout = SequenceLayout::new(prefix_len, grid, instruction_len);
    let positions = assign_positions(&layout);
    let mask = build_mask(&layout, &positions)?;

    let mut text = positions.to_csv_line();
    text.push_str(&mask.to_csv());
    write_or_print(args.out.as_deref(), &text)?;

    if args.validate && !validate_mask(&mask, &positions) {
        eprintln!("mask INVALID: an allowed pair breaks position causality");
        return Ok(1);
    }
    if args.validate {
        eprintln!("mask validates against its positions");
    }
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs, config: &ConfigFile) -> Result<i32> {
    let seed = resolve_seed(args.seed, config)?;
    let layers = resolve(args.layers, config, "layers", 2)?;
    let heads = resolve(args.heads, config, "heads", 2)?;
    let model_dim = resolve(args.model_dim, config, "model-dim", 16)?;
    let vocab = resolve(args.vocab, config, "vocab", 64)?;
    let scheme_name = resolve(args.scheme, config, "scheme", "concentric".to_string())?;
    let height = resolve(args.height, config, "height", 3)?;
    let width = resolve(args.width, config, "width", 3)?;
    let interval = resolve(args.interval, config, "interval", 1)?;
    let prefix_len = resolve(args.prefix_len, config, "prefix-len", 2)?;
    let instruction_len = resolve(args.instruction_len, config, "instruction-len", 1)?;
    let scheme = parse_scheme(&scheme_name, interval)?;

    let schedule = build_schedule(layers, interval, height)?;
    let grid = grid_for_layer(scheme, height, width, &schedule, 1)?;
    let layout = SequenceLayout::new(prefix_len, grid, instruction_len);

    let tokens = match (&args.tokens, args.random_tokens) {
        (Some(_), Some(_)) => {
            return Err(Error::invalid(
                "--tokens and --random-tokens are mutually exclusive",
            ))
        }
        (Some(text), None) => parse_token_list(text)?,
        (None, n) => {
            let want = layout.total_len();
            let n = n.unwrap_or(want);
            if n != want {
                return Err(Error::invalid(format!(
                    "--random-tokens {n} but the layout has {want} slots"
                )));
            }
            let mut rng = SplitMix64::new(seed ^ TOKEN_STREAM_SALT);
            (0..n).map(|_| rng.below(vocab as u64) as usize).collect()
        }
    };

    let decoder_config = DecoderConfig::new(layers, heads, model_dim, vocab, seed, scheme);
    let state = init_decoder(decoder_config)?;
    let (logits, records) = forward(&state, &tokens, &layout, &schedule)?;

    fs::create_dir_all(&args.outdir)?;
    let file = |name: String| args.outdir.join(name);
    fs::write(file("logits.csv".into()), logits.to_csv())?;
    for layer in 1..=layers {
        let avg = average_heads(&records, layer)?;
        fs::write(file(format!("attention_layer_{layer:02}.csv")), avg.to_csv())?;
    }
    if instruction_len >= 1 {
        let maps = visual_to_instruction_attention(&records, &layout)?;
        for (idx, map) in maps.iter().enumerate() {
            render_heatmap(map, &file(format!("v2i_layer_{:02}.pgm", idx + 1)))?;
        }
    }
    fs::write(
        file("layout.csv".into()),
        format!(
            "prefix_len,height,width,instruction_len\n{},{},{},{}\n",
            prefix_len,
            layout.grid.height(),
            layout.grid.width(),
            instruction_len
        ),
    )?;

    println!(
        "simulated {layers} layers x {heads} heads over {} tokens; artifacts in {}",
        tokens.len(),
        args.outdir.display()
    );
    Ok(0)
}

fn parse_token_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad token id {t:?} in --tokens")))
        })
        .collect()
}

fn cmd_analyze(args: AnalyzeArgs, config: &ConfigFile) -> Result<i32> {
    let k = resolve(args.k, config, "k", 5)?;
    let threshold = resolve(args.threshold, config, "threshold", 5.0)?;

    let layout = read_layout_csv(&args.attn_dir)?;
    let mut metrics = Vec::new();
    for layer in 1.. {
        let path = args.attn_dir.join(format!("attention_layer_{layer:02}.csv"));
        if !path.exists() {
            break;
        }
        let name = path.display().to_string();
        let avg = Matrix::parse_csv(&fs::read_to_string(&path)?, &name)?;
        metrics.push(metrics_for_layer(&avg, &layout, layer, k, threshold)?);
    }
    if metrics.is_empty() {
        return Err(Error::parse(
            &args.attn_dir.display().to_string(),
            0,
            "no attention_layer_NN.csv files found",
        ));
    }
    write_or_print(args.out.as_deref(), &metrics_to_csv(&metrics))?;
    Ok(0)
}

/// Read back the `layout.csv` a simulate run wrote. Only the slot
/// counts matter for analysis, so the grid is rebuilt as all-ones.
fn read_layout_csv(dir: &Path) -> Result<SequenceLayout> {
    let path = dir.join("layout.csv");
    let name = path.display().to_string();
    let text = fs::read_to_string(&path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("prefix_len,height,width,instruction_len") => {}
        other => {
            return Err(Error::parse(
                &name,
                1,
                format!("unexpected layout header {other:?}"),
            ))
        }
    }
    let row = lines
        .next()
        .ok_or_else(|| Error::parse(&name, 2, "missing layout row"))?;
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            &name,
            2,
            format!("expected 4 fields, got {}", fields.len()),
        ));
    }
    let number = |field: &str| -> Result<usize> {
        field
            .parse()
            .map_err(|_| Error::parse(&name, 2, format!("bad number {field:?}")))
    };
    let (prefix_len, height, width, instruction_len) = (
        number(fields[0])?,
        number(fields[1])?,
        number(fields[2])?,
        number(fields[3])?,
    );
    let grid = build_grid(EncodingScheme::AllOne, height, width, 1)?;
    Ok(SequenceLayout::new(prefix_len, grid, instruction_len))
}

fn cmd_check() -> Result<i32> {
    let reports = run_all();
    for report in &reports {
        println!("{}", report.summary_line());
    }
    if reports.iter().all(|r| r.passed) {
        Ok(0)
    } else {
        Ok(1)
    }
}
