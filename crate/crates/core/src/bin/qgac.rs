//! Command-line front end: codec utilities, corpus building, evaluation,
//! analyses, smoke training and checkpoint interpolation.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qgac::error::{Error, Result};
use qgac::harness::{
    equivalent_quality, evaluate_dataset, extract_patches, frequency_saturation, improvement_curve, list_images, load_patch_pairs,
    read_image, read_records_csv, smoke_train, with_threads, write_curve_csv, write_image, write_records_csv, write_report,
    FrequencyGrouping, PatchSpec, RunConfig, TrainConfig,
};
use qgac::jpeg::{decode_jpeg_coefficients, decode_jpeg_pixels, encode_jpeg, parse_jpeg, EncodeOptions, QuantRounding, Subsampling};
use qgac::metrics::MetricsConvention;
use qgac::model::{interpolate_params, restore_image, ModelCheckpoint};

#[derive(Parser)]
#[command(name = "qgac", version, about = "JPEG codec and quantization-guided artifact correction toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JPEG quality, or a comma-separated list where several are accepted.
    #[arg(long, global = true, value_delimiter = ',')]
    quality: Vec<u8>,
    /// Chroma subsampling: 420 or 444.
    #[arg(long, global = true)]
    subsampling: Option<Subsampling>,
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// standard, luma, studio-luma or per-channel; comma-separated.
    #[arg(long = "metrics-convention", global = true, value_delimiter = ',')]
    metrics_convention: Vec<MetricsConvention>,
    /// TOML run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a PNG/PPM/BMP image.
    Encode {
        input: PathBuf,
        output: PathBuf,
        /// truncate (default) or nearest.
        #[arg(long, default_value = "truncate")]
        rounding: QuantRounding,
    },
    /// Decode a JPEG to PNG; with --checkpoint the output is restored.
    Decode { input: PathBuf, output: PathBuf },
    /// Print markers, frame layout and quantization tables.
    Inspect { input: PathBuf },
    /// Cut a patch corpus: originals plus one JPEG per quality.
    Patches {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        patch_size: usize,
        #[arg(long, default_value_t = 30)]
        per_image: usize,
    },
    /// Score compressed (and restored) images; writes a records CSV.
    Eval {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<String>,
    },
    /// Per-quality PSNR gain of restored over JPEG from a records CSV.
    Curve {
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equivalent-quality scan for restored images.
    Eqq {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fraction of nonzero coefficients per frequency group.
    Freq {
        /// JPEG files are read as is; lossless images are compressed first.
        inputs: Vec<PathBuf>,
        /// diagonal (15 groups) or coefficient (64).
        #[arg(long, default_value = "diagonal")]
        grouping: FrequencyGrouping,
        /// Saturation of the restored coefficients instead (needs --checkpoint).
        #[arg(long)]
        restored: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the toy network on a patch corpus.
    SmokeTrain {
        patches: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        steps: u64,
        #[arg(long, default_value_t = 8)]
        batch: usize,
        /// Per-step loss curve CSV.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Blend two checkpoints: (1 − alpha)·a + alpha·b.
    Interp {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summary tables and plots from a records CSV.
    Report {
        records: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Global {
    /// Config file values overridden by explicit flags.
    fn run_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if !self.quality.is_empty() {
            c.qualities = self.quality.clone();
        }
        if let Some(s) = self.subsampling {
            c.subsampling = s;
        }
        if self.checkpoint.is_some() {
            c.checkpoint = self.checkpoint.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.threads.is_some() {
            c.threads = self.threads.filter(|&t| t > 0);
        }
        if !self.metrics_convention.is_empty() {
            c.conventions = self.metrics_convention.clone();
        }
        c.validate()?;
        Ok(c)
    }

    fn single_quality(&self, c: &RunConfig, default: u8) -> Result<u8> {
        match self.quality.as_slice() {
            [] if self.config.is_none() => Ok(default),
            [] => match c.qualities.as_slice() {
                [q] => Ok(*q),
                _ => Ok(default),
            },
            [q] => Ok(*q),
            many => Err(Error::Config(format!("this command takes one --quality, got {many:?}"))),
        }
    }

    fn checkpoint(&self, c: &RunConfig) -> Result<Option<ModelCheckpoint>> {
        c.checkpoint.as_deref().map(ModelCheckpoint::load).transpose()
    }
}

/// Writes to `path`, or stdout when none is given.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn is_jpeg(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("jpg" | "jpeg")
    )
}

/// Expands directories into their image files, keeps files as given.
fn expand(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            out.extend(list_images(p)?);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no input images".into()));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let cfg = g.run_config()?;
    with_threads(cfg.threads, || dispatch(g, &cfg, cli.command))?
}

fn dispatch(g: &Global, cfg: &RunConfig, command: Command) -> Result<()> {
    match command {
        Command::Encode { input, output, rounding } => {
            let q = g.single_quality(cfg, 75)?;
            let img = read_image(&input)?;
            let bytes = encode_jpeg(&img, &EncodeOptions::new(q, cfg.subsampling).with_rounding(rounding))?;
            std::fs::write(&output, &bytes)?;
            eprintln!("{} -> {} ({} bytes, q{q}, {})", input.display(), output.display(), bytes.len(), cfg.subsampling);
        }
        Command::Decode { input, output } => {
            let data = std::fs::read(&input)?;
            let img = match g.checkpoint(cfg)? {
                Some(ckpt) => restore_image(&data, &ckpt)?,
                None => decode_jpeg_pixels(&data)?,
            };
            write_image(&output, &img)?;
        }
        Command::Inspect { input } => inspect(&std::fs::read(&input)?)?,
        Command::Patches {
            inputs,
            out,
            patch_size,
            per_image,
        } => {
            let spec = PatchSpec {
                patch_size,
                patches_per_image: per_image,
                qualities: cfg.qualities.clone(),
                seed: cfg.seed,
                subsampling: cfg.subsampling,
            };
            let m = extract_patches(&expand(&inputs)?, &out, &spec)?;
            println!(
                "{} originals, {} jpegs, {} skipped images -> {}",
                m.count("original"),
                m.count("jpeg"),
                m.count("skipped"),
                out.display()
            );
        }
        Command::Eval { inputs, out, dataset } => {
            let mut c = cfg.clone();
            if !inputs.is_empty() {
                c.input_dirs = inputs;
            }
            if dataset.is_some() {
                c.dataset = dataset;
            }
            let run = evaluate_dataset(&c)?;
            let path = out.unwrap_or_else(|| c.output_dir.join("eval.csv"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            write_records_csv(&path, &run)?;
            eprintln!("{} rows, {} failures -> {}", run.records.len(), run.failures.len(), path.display());
        }
        Command::Curve { records, out } => {
            let records = read_records_csv(&records)?;
            let convention = cfg.conventions[0];
            let curve = improvement_curve(&records, convention);
            match out {
                Some(p) => write_curve_csv(&p, &curve)?,
                None => {
                    println!("quality,delta_psnr");
                    for (q, d) in curve {
                        println!("{q},{d:.6}");
                    }
                }
            }
        }
        Command::Eqq { inputs, out } => {
            let start = g.single_quality(cfg, 10)?;
            let ckpt = g
                .checkpoint(cfg)?
                .ok_or_else(|| Error::Config("eqq needs --checkpoint".into()))?;
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["image", "start_quality", "target_ssim", "quality", "bytes_saved"])?;
            for path in expand(&inputs)? {
                let original = read_image(&path)?;
                let jpeg = encode_jpeg(&original, &EncodeOptions::new(start, cfg.subsampling))?;
                let r = equivalent_quality(&original, &restore_image(&jpeg, &ckpt)?, start, cfg.subsampling)?;
                let none = || "none".to_string();
                w.write_record([
                    qgac::harness::image_id(&path),
                    start.to_string(),
                    format!("{:.6}", r.target_ssim),
                    r.quality.map_or_else(none, |q| q.to_string()),
                    r.bytes_saved.map_or_else(none, |b| b.to_string()),
                ])?;
            }
            w.flush()?;
        }
        Command::Freq {
            inputs,
            grouping,
            restored,
            out,
        } => {
            let q = g.single_quality(cfg, 10)?;
            let ckpt = if restored {
                Some(g.checkpoint(cfg)?.ok_or_else(|| Error::Config("--restored needs --checkpoint".into()))?)
            } else {
                None
            };
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            let mut header = vec!["image".to_string(), "channel".to_string()];
            header.extend((0..grouping.groups()).map(|k| format!("g{k}")));
            w.write_record(&header)?;
            for path in expand(&inputs)? {
                let data = if is_jpeg(&path) {
                    std::fs::read(&path)?
                } else {
                    encode_jpeg(&read_image(&path)?, &EncodeOptions::new(q, cfg.subsampling))?
                };
                let (mut coeffs, _) = decode_jpeg_coefficients(&data)?;
                if let Some(ckpt) = &ckpt {
                    coeffs = qgac::model::restore_coefficients(&coeffs, ckpt)?;
                }
                let planes = [Some(&coeffs.y), coeffs.cb.as_ref(), coeffs.cr.as_ref()];
                for (name, plane) in ["y", "cb", "cr"].iter().zip(planes) {
                    if let Some(plane) = plane {
                        let mut row = vec![qgac::harness::image_id(&path), name.to_string()];
                        row.extend(frequency_saturation(plane, grouping).iter().map(|p| format!("{p:.6}")));
                        w.write_record(&row)?;
                    }
                }
            }
            w.flush()?;
        }
        Command::SmokeTrain {
            patches,
            out,
            steps,
            batch,
            log,
        } => {
            let q = g.single_quality(cfg, 10)?;
            let pairs = load_patch_pairs(&patches, q)?;
            let mut tc = TrainConfig::smoke(steps, cfg.seed);
            tc.batch = batch;
            let outcome = smoke_train(&pairs, &tc)?;
            outcome.checkpoint.save(&out)?;
            if let Some(p) = log {
                outcome.write_log_csv(&p)?;
            }
            println!("luma loss {:.6} -> {:.6}", outcome.y_initial, outcome.y_final);
            if let (Some(a), Some(b)) = (outcome.color_initial, outcome.color_final) {
                println!("chroma loss {a:.6} -> {b:.6}");
            }
        }
        Command::Interp { a, b, alpha, out } => {
            let blended = interpolate_params(&ModelCheckpoint::load(&a)?, &ModelCheckpoint::load(&b)?, alpha)?;
            blended.save(&out)?;
        }
        Command::Report { records, out } => {
            std::fs::create_dir_all(&out)?;
            for f in write_report(&read_records_csv(&records)?, &out)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn inspect(data: &[u8]) -> Result<()> {
    let parsed = parse_jpeg(data)?;
    println!("markers:");
    for m in &parsed.markers {
        println!("  {:>8}  {:<5} length {}", m.offset, m.name, m.length);
    }
    let img = &parsed.image;
    let planes = img.components();
    println!(
        "frame: {}x{}, {} component(s), {}",
        img.width,
        img.height,
        planes.len(),
        if planes.len() == 1 { "grayscale".to_string() } else { img.subsampling.to_string() }
    );
    for (i, p) in planes.iter().enumerate() {
        println!("  component {i}: {}x{} blocks", p.block_cols, p.block_rows);
    }
    for (id, t) in parsed.quant_tables.iter().enumerate() {
        if let Some(t) = t {
            println!("quantization table {id} (row-major):");
            for row in t.chunks(8) {
                println!("  {}", row.iter().map(|v| format!("{v:>3}")).collect::<Vec<_>>().join(" "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
