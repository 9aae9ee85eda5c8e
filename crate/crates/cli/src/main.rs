use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use wmc::codec::{decode_sequence, encode_sequence_detailed, CodecConfig, EncodedStream};
use wmc::eval::{psnr, rd_sweep, to_csv, MotionMethod, PEAK};
use wmc::inband_shift::{apply_inband_shift, dyadic_approx, spatial_reference_shift, ShiftSpec};
use wmc::video_io::{load_frames, read_pgm, save_frame, SequenceSource};
use wmc::wavelet::{analyze_level, synthesize_level};
use wmc::Frame;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

/// In-band motion-compensated wavelet video codec.
#[derive(Parser, Debug)]
#[command(name = "wmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a Y4M, raw YUV 4:2:0 or PGM sequence into a WMC1 stream.
    Encode(EncodeArgs),
    /// Decode a WMC1 stream into numbered PGM frames.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory, created if missing.
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Shift a PGM image in the wavelet domain and compare against the
    /// upsampling oracle.
    Shift {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        dx: f64,
        #[arg(long, allow_negative_numbers = true)]
        dy: f64,
        #[arg(long = "out")]
        output: PathBuf,
        /// Shifts are rounded to multiples of 2^-precision pixels.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=10))]
        precision: u32,
    },
    /// Rate-distortion sweep over thresholds, written as CSV.
    RdSweep(SweepArgs),
    /// PSNR between two images or sequences.
    Psnr {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        dims: DimsArgs,
    },
}

#[derive(Args, Debug)]
struct DimsArgs {
    /// Frame width for raw .yuv input.
    #[arg(long, requires = "height")]
    width: Option<usize>,
    /// Frame height for raw .yuv input.
    #[arg(long, requires = "width")]
    height: Option<usize>,
}

impl DimsArgs {
    fn get(&self) -> Option<(usize, usize)> {
        self.width.zip(self.height)
    }
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Input sequence: .y4m, .yuv (with --width/--height), .pgm or a directory of .pgm files.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    dims: DimsArgs,
    /// Read at most this many frames.
    #[arg(long)]
    frames: Option<usize>,
}

impl SourceArgs {
    fn load(&self) -> anyhow::Result<Vec<Frame>> {
        let src = SequenceSource::detect(&self.input, self.dims.get())?;
        let frames = load_frames(&src, self.frames)
            .with_context(|| format!("reading {}", self.input.display()))?;
        if frames.is_empty() {
            bail!("{} holds no frames", self.input.display());
        }
        Ok(frames)
    }
}

#[derive(Args, Debug)]
struct CodecArgs {
    /// Motion block edge in subband samples.
    #[arg(long, default_value_t = 8, value_parser = parse_block)]
    block: usize,
    /// Motion precision h: 0 full-pel, 1 half, 2 quarter, 3 eighth.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=3))]
    precision: u32,
    /// Search range in pixels.
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u32).range(1..=255))]
    range: u32,
    /// Extra decompositions of the error frame's approximation.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=8))]
    extra_levels: u32,
}

impl CodecArgs {
    fn config(&self, threshold: f64) -> CodecConfig {
        CodecConfig {
            block_size: self.block,
            precision: self.precision,
            search_range: self.range,
            threshold,
            extra_levels: self.extra_levels,
        }
    }
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long = "out")]
    output: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
    /// Hard threshold on coefficient magnitude.
    #[arg(long, default_value_t = 0.0, value_parser = parse_threshold)]
    threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Baseline {
    Band2band,
    None,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1.., value_parser = parse_threshold)]
    thresholds: Vec<f64>,
    /// Also sweep the whole-sample band-to-band search.
    #[arg(long, value_enum, default_value_t = Baseline::None)]
    baseline: Baseline,
    #[arg(long)]
    csv: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
}

fn parse_block(s: &str) -> Result<usize, String> {
    match s {
        "8" => Ok(8),
        "16" => Ok(16),
        _ => Err(format!("block size must be 8 or 16, got {s}")),
    }
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(format!("threshold must be a finite number >= 0, got {s:?}")),
    }
}

fn fmt_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.3}")
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn encode(args: &EncodeArgs) -> anyhow::Result<()> {
    let frames = args.source.load()?;
    let cfg = args.codec.config(args.threshold);
    let enc = encode_sequence_detailed(&frames, &cfg)?;
    let bytes = enc.stream.to_bytes();
    fs::write(&args.output, &bytes)
        .with_context(|| format!("writing {}", args.output.display()))?;
    let (w, h) = frames[0].dims();
    let scores: Vec<f64> = frames
        .iter()
        .zip(&enc.reconstruction)
        .map(|(a, b)| psnr(a, b, PEAK))
        .collect::<Result<_, _>>()?;
    let saturated: usize = enc.gops.iter().map(|g| g.saturated).sum();
    println!(
        "{} frames {w}x{h}, {} bytes, {:.4} bpp, mean PSNR {} dB",
        frames.len(),
        bytes.len(),
        bytes.len() as f64 * 8.0 / (w * h) as f64,
        fmt_db(mean(&scores))
    );
    if saturated > 0 {
        eprintln!("warning: {saturated} coefficients saturated the 16-bit range");
    }
    Ok(())
}

fn decode(input: &Path, output: &Path) -> anyhow::Result<()> {
    let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let frames = decode_sequence(&EncodedStream::from_bytes(&bytes)?)?;
    fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;
    let mut clamped = 0;
    for (i, f) in frames.iter().enumerate() {
        clamped += save_frame(f, &output.join(format!("frame_{i:04}.pgm")))?;
    }
    println!("{} frames written to {}", frames.len(), output.display());
    if clamped > 0 {
        eprintln!("warning: {clamped} samples clamped to [0, 255]");
    }
    Ok(())
}

fn shift(input: &Path, dx: f64, dy: f64, output: &Path, precision: u32) -> anyhow::Result<()> {
    if !(dx.is_finite() && dy.is_finite()) {
        bail!("shift must be finite");
    }
    let frame = read_pgm(input)?;
    let (sx, sy) = (dyadic_approx(dx, precision), dyadic_approx(dy, precision));
    let spec = ShiftSpec::from_pixels(dx, dy, precision);
    let shifted = apply_inband_shift(&analyze_level(&frame)?, &spec)?;
    let oracle = spatial_reference_shift(&frame, sx, sy)?;
    let clamped = save_frame(&synthesize_level(&shifted)?, output)?;
    let (cx, cy) = spec.circular();
    println!(
        "shift ({}, {}) px: circular ({cx}, {cy}) samples, residual ({}, {}) px; max |in-band - oracle| = {:.3e}",
        sx.value(),
        sy.value(),
        spec.x.residual.value(),
        spec.y.residual.value(),
        shifted.max_abs_diff(&oracle)
    );
    if clamped > 0 {
        eprintln!("warning: {clamped} samples clamped to [0, 255]");
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let frames = args.source.load()?;
    let cfg = args.codec.config(0.0);
    let mut points = rd_sweep(&frames, &cfg, &args.thresholds, MotionMethod::InBand)?;
    if args.baseline == Baseline::Band2band {
        points.extend(rd_sweep(
            &frames,
            &cfg,
            &args.thresholds,
            MotionMethod::BandToBand,
        )?);
    }
    fs::write(&args.csv, to_csv(&points))
        .with_context(|| format!("writing {}", args.csv.display()))?;
    for p in &points {
        println!(
            "{:>9} T={:<6} {:>9.4} bpp {:>9} dB",
            p.method.name(),
            p.threshold,
            p.bpp,
            fmt_db(p.psnr_mean)
        );
    }
    Ok(())
}

fn load_any(path: &Path, dims: Option<(usize, usize)>) -> anyhow::Result<Vec<Frame>> {
    let src = SequenceSource::detect(path, dims)?;
    load_frames(&src, None).with_context(|| format!("reading {}", path.display()))
}

fn compare(a: &Path, b: &Path, dims: Option<(usize, usize)>) -> anyhow::Result<()> {
    let (fa, fb) = (load_any(a, dims)?, load_any(b, dims)?);
    if fa.len() != fb.len() || fa.is_empty() {
        bail!(
            "frame counts differ or are zero: {} vs {}",
            fa.len(),
            fb.len()
        );
    }
    let scores: Vec<f64> = fa
        .iter()
        .zip(&fb)
        .map(|(x, y)| psnr(x, y, PEAK))
        .collect::<Result<_, _>>()?;
    if scores.len() == 1 {
        println!("{}", fmt_db(scores[0]));
    } else {
        let mut out = String::new();
        for (i, s) in scores.iter().enumerate() {
            let _ = writeln!(out, "frame {i}: {} dB", fmt_db(*s));
        }
        println!("{out}mean: {} dB", fmt_db(mean(&scores)));
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Encode(args) => encode(&args),
        Command::Decode { input, output } => decode(&input, &output),
        Command::Shift {
            input,
            dx,
            dy,
            output,
            precision,
        } => shift(&input, dx, dy, &output, precision),
        Command::RdSweep(args) => sweep(&args),
        Command::Psnr { a, b, dims } => compare(&a, &b, dims.get()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
