//! `ccl` — connected components labeling toolkit CLI.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ccl_bench::bench::{bench, BenchImage, BenchOptions};
use ccl_bench::output::{encode_labels, LabelFormat};
use ccl_bench::report::{csv_report, markdown_report, speedup_report};
use ccl_bench::verify::{canonicalize, equivalent};
use ccl_core::{
    flood_fill_oracle, generate, read_pgm, write_pgm, AlgoId, BlockConfig, ExecMode, GenParams,
    Image, OrderPolicy, Pattern,
};

#[derive(Parser)]
#[command(
    name = "ccl",
    version,
    about = "Connected components labeling over 2D images: an optimized \
             block union-find pipeline, three comparison algorithms, a \
             sequential oracle, and a benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic test image as binary PGM.
    Gen(GenArgs),
    /// Label an image and write the label map.
    Label(LabelArgs),
    /// Run algorithms on one image and check each against the oracle.
    Verify(VerifyArgs),
    /// Time algorithms over images and sizes and emit a report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// noise, stripes, checkerboard, uniform, spiral, or plasma.
    #[arg(long)]
    pattern: Pattern,
    /// Image size as WxH.
    #[arg(long, value_parser = parse_dims)]
    size: (u32, u32),
    /// Noise: probability that a cell is foreground.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Stripes: width of one stripe in columns.
    #[arg(long, default_value_t = 4)]
    stripe_period: u32,
    /// Uniform: the constant pixel value.
    #[arg(long, default_value_t = 0)]
    fill_value: u8,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output PGM path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LabelArgs {
    /// Input image (binary PGM).
    #[arg(long)]
    input: PathBuf,
    /// Threshold the input first: pixel >= T becomes 255, else 0.
    #[arg(long)]
    binarize: Option<u8>,
    #[arg(long)]
    algo: AlgoId,
    /// Thread-block dimensions as WxH. Defaults to 32x16, or 512x1 for
    /// line-uf.
    #[arg(long, value_parser = parse_block)]
    block: Option<BlockConfig>,
    /// sequential, shuffled:SEED, parallel, or parallel:WORKERS.
    #[arg(long, default_value = "parallel", value_parser = parse_order)]
    order: OrderPolicy,
    /// Enable the engine's structural audits (slower).
    #[arg(long)]
    checked: bool,
    /// Where to write the label map.
    #[arg(long)]
    out_labels: PathBuf,
    /// raw-u32le, csv, or pgm-recolor.
    #[arg(long, default_value = "raw-u32le")]
    out_format: LabelFormat,
}

#[derive(Args)]
struct VerifyArgs {
    /// Input image (binary PGM).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    binarize: Option<u8>,
    /// Comma-separated algorithms to check.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "label-equivalence,conventional-uf,line-uf,optimized-uf"
    )]
    algos: Vec<AlgoId>,
    #[arg(long, value_parser = parse_block)]
    block: Option<BlockConfig>,
    #[arg(long, default_value = "parallel", value_parser = parse_order)]
    order: OrderPolicy,
    #[arg(long)]
    checked: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated images: PGM paths or generator specs such as
    /// noise:0.5:1, plasma:1, stripes:4, checkerboard, uniform:0, spiral.
    /// Generated bases are 512x512 and are resampled to each size.
    #[arg(long, value_delimiter = ',')]
    images: Vec<String>,
    /// Comma-separated square sizes (side lengths).
    #[arg(long, value_delimiter = ',', default_value = "512")]
    sizes: Vec<u32>,
    #[arg(long, default_value_t = 20)]
    runs: u32,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "label-equivalence,conventional-uf,line-uf,optimized-uf"
    )]
    algos: Vec<AlgoId>,
    /// Block dimensions for the 2D-block algorithms (line-uf always uses
    /// 512x1).
    #[arg(long, value_parser = parse_block)]
    block: Option<BlockConfig>,
    #[arg(long, default_value = "parallel", value_parser = parse_order)]
    order: OrderPolicy,
    /// Threshold applied to every base image before labeling.
    #[arg(long)]
    binarize: Option<u8>,
    /// md or csv.
    #[arg(long, default_value = "md")]
    format: ReportFormat,
    #[arg(long)]
    checked: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ReportFormat {
    Markdown,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!(
                "unknown report format {other:?} (expected md or csv)"
            )),
        }
    }
}

fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w
        .trim()
        .parse::<u32>()
        .map_err(|e| format!("bad width: {e}"))?;
    let h = h
        .trim()
        .parse::<u32>()
        .map_err(|e| format!("bad height: {e}"))?;
    Ok((w, h))
}

fn parse_block(s: &str) -> Result<BlockConfig, String> {
    let (bx, by) = parse_dims(s)?;
    BlockConfig::new(bx, by).map_err(|e| e.to_string())
}

fn parse_order(s: &str) -> Result<OrderPolicy, String> {
    if s == "sequential" {
        return Ok(OrderPolicy::Sequential);
    }
    if s == "parallel" {
        return Ok(OrderPolicy::Parallel { workers: 0 });
    }
    if let Some(rest) = s.strip_prefix("shuffled:") {
        let seed = rest.parse::<u64>().map_err(|e| format!("bad seed: {e}"))?;
        return Ok(OrderPolicy::Shuffled(seed));
    }
    if let Some(rest) = s.strip_prefix("parallel:") {
        let workers = rest
            .parse::<usize>()
            .map_err(|e| format!("bad worker count: {e}"))?;
        return Ok(OrderPolicy::Parallel { workers });
    }
    Err(format!(
        "unknown order policy {s:?} (expected sequential, shuffled:SEED, parallel, or parallel:WORKERS)"
    ))
}

fn mode_of(checked: bool) -> ExecMode {
    if checked {
        ExecMode::Checked
    } else {
        ExecMode::Fast
    }
}

fn load_pgm(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    read_pgm(&bytes).with_context(|| format!("cannot parse {}", path.display()))
}

/// Resolve the 2D and line block configs for one algorithm run.
fn resolve_blocks(algo: AlgoId, block: Option<BlockConfig>) -> Result<(BlockConfig, BlockConfig)> {
    let cfg = block.unwrap_or_else(BlockConfig::default_2d);
    let cfg_line = match algo {
        AlgoId::LineUf => {
            let line = block.unwrap_or_else(BlockConfig::default_line);
            if line.by() != 1 {
                bail!("line-uf requires a block height of 1, got {line}");
            }
            line
        }
        _ => BlockConfig::default_line(),
    };
    Ok((cfg, cfg_line))
}

/// Parse one `--images` entry: an existing PGM path (resampled to each
/// size) or a generator spec (generated natively at each size).
fn resolve_image(spec: &str, binarize: Option<u8>) -> Result<BenchImage> {
    let name = spec.replace(':', "-");
    let path = Path::new(spec);
    let mut image = if path.is_file() {
        BenchImage::from_base(name, load_pgm(path)?)
    } else {
        let mut parts = spec.split(':');
        let head = parts.next().unwrap_or_default();
        let pattern: Pattern = head
            .parse()
            .map_err(|e| anyhow::anyhow!("image {spec:?} is neither a file nor a pattern: {e}"))?;
        let mut params = GenParams::default();
        let mut seed = 1u64;
        match pattern {
            Pattern::Noise => {
                if let Some(d) = parts.next() {
                    params.density = d.parse().context("bad noise density")?;
                }
                if let Some(s) = parts.next() {
                    seed = s.parse().context("bad seed")?;
                }
            }
            Pattern::Plasma => {
                if let Some(s) = parts.next() {
                    seed = s.parse().context("bad seed")?;
                }
            }
            Pattern::Stripes => {
                if let Some(p) = parts.next() {
                    params.stripe_period = p.parse().context("bad stripe period")?;
                }
            }
            Pattern::Uniform => {
                if let Some(v) = parts.next() {
                    params.fill_value = v.parse().context("bad fill value")?;
                }
            }
            Pattern::Checkerboard | Pattern::Spiral => {}
        }
        if let Some(extra) = parts.next() {
            bail!("unexpected trailing {extra:?} in image spec {spec:?}");
        }
        BenchImage::from_pattern(name, pattern, params, seed)
    };
    if let Some(t) = binarize {
        image = image.binarized(t);
    }
    Ok(image)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let params = GenParams {
        density: args.density,
        stripe_period: args.stripe_period,
        fill_value: args.fill_value,
    };
    let img = generate(args.pattern, args.size.0, args.size.1, &params, args.seed)?;
    std::fs::write(&args.out, write_pgm(&img))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(())
}

fn cmd_label(args: LabelArgs) -> Result<()> {
    let mut img = load_pgm(&args.input)?;
    if let Some(t) = args.binarize {
        img = img.binarize(t);
    }
    let (cfg, cfg_line) = resolve_blocks(args.algo, args.block)?;
    let labels = args
        .algo
        .run(&img, cfg, cfg_line, args.order, mode_of(args.checked));
    let bytes = encode_labels(&labels, args.out_format)?;
    std::fs::write(&args.out_labels, bytes)
        .with_context(|| format!("cannot write {}", args.out_labels.display()))?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let mut img = load_pgm(&args.input)?;
    if let Some(t) = args.binarize {
        img = img.binarize(t);
    }
    let oracle = flood_fill_oracle(&img);
    let oracle_partition = canonicalize(&oracle);
    let mut failures = 0usize;
    for &algo in &args.algos {
        let (cfg, cfg_line) = resolve_blocks(algo, args.block)?;
        let labels = algo.run(&img, cfg, cfg_line, args.order, mode_of(args.checked));
        if equivalent(&labels, &oracle)? {
            println!("{algo}: ok ({} components)", oracle_partition.components());
        } else {
            let partition = canonicalize(&labels);
            let cell = oracle_partition
                .first_difference(&partition)
                .expect("inequivalent maps must differ somewhere");
            println!(
                "{algo}: MISMATCH at cell {cell} (x={}, y={})",
                cell as u32 % img.width(),
                cell as u32 / img.width()
            );
            failures += 1;
        }
    }
    if failures > 0 {
        bail!("{failures} algorithm(s) disagree with the oracle");
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.images.is_empty() {
        bail!("no images given");
    }
    for &algo in &args.algos {
        // Surface line-uf config problems before any long run.
        resolve_blocks(algo, args.block)?;
    }
    let images = args
        .images
        .iter()
        .map(|spec| resolve_image(spec, args.binarize))
        .collect::<Result<Vec<_>>>()?;
    let opts = BenchOptions {
        runs: args.runs,
        cfg: args.block.unwrap_or_else(BlockConfig::default_2d),
        cfg_line: BlockConfig::default_line(),
        order: args.order,
        mode: mode_of(args.checked),
    };
    let records = bench(&args.algos, &images, &args.sizes, &opts)?;
    let report = match args.format {
        ReportFormat::Markdown => {
            let mut text = markdown_report(&records);
            text.push('\n');
            text.push_str(&speedup_report(&records));
            text
        }
        ReportFormat::Csv => csv_report(&records)?,
    };
    match &args.out {
        Some(path) => std::fs::write(path, report)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{report}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Label(args) => cmd_label(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    }
}
