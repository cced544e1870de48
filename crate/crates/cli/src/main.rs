use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use plotgrid::metrics::evaluate;
use plotgrid::overlay::render_overlay;
use plotgrid::pipeline::{self, RunConfig};
use plotgrid::plotio::{self, read_plots};
use plotgrid::raster::{load_image, save_mask, save_rgb_png};
use plotgrid::synthgen::{generate, SynthConfig};

#[derive(Parser)]
#[command(name = "plotgrid", version, about = "Extract plot boundaries from grid-planted field images")]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a TOML config.
    Extract {
        config: PathBuf,
        /// Overrides `input.path`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Overrides `output.dir`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Also write overlay.png.
        #[arg(long)]
        overlay: bool,
    },
    /// Score extracted plots against ground truth by (row, range).
    Evaluate {
        plots: PathBuf,
        truth: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Generate a synthetic field mask with its ground-truth plots.
    Synth {
        /// TOML synth config; defaults to the built-in 20x5 example field.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        empty_fraction: Option<f64>,
        #[arg(long)]
        jitter: Option<usize>,
        #[arg(long, value_enum, default_value_t = MaskFormat::Png)]
        format: MaskFormat,
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Draw plot rectangles over an image.
    RenderOverlay {
        image: PathBuf,
        plots: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Draw the source-image rectangles instead of ROI-local ones.
        #[arg(long)]
        source: bool,
    },
    /// Write energy profiles and comb functions as CSV.
    DumpProfiles {
        config: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MaskFormat {
    Png,
    Pgm,
}

/// Loads a run config, resolving relative input and output paths against
/// the config file's directory.
fn load_config(config: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(config)?;
    let dir = config.parent().unwrap_or(Path::new(""));
    cfg.input.path = dir.join(&cfg.input.path);
    cfg.output.dir = dir.join(&cfg.output.dir);
    Ok(cfg)
}

fn extract(config: &Path, input: Option<PathBuf>, output_dir: Option<PathBuf>, overlay: bool) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(p) = input {
        cfg.input.path = p;
    }
    if let Some(d) = output_dir {
        cfg.output.dir = d;
    }
    cfg.output.overlay |= overlay;
    let out = pipeline::run(&cfg)?;
    for t in &out.report.timings {
        log::info!("{:<10} {:>9.1} ms", t.stage, t.millis);
    }
    let flagged = out.report.flagged_plots.len();
    println!("{} plots written to {}", out.records.len(), cfg.output.dir.display());
    if flagged > 0 {
        println!("{flagged} plots flagged; see report.json");
    }
    Ok(())
}

fn run_evaluate(plots: &Path, truth: &Path, json: bool) -> Result<()> {
    let report = evaluate(&read_plots(plots)?, &read_plots(truth)?)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    println!("plots       {}", report.plots);
    println!("mean IoU    {:.4}", report.mean_iou);
    println!("IoU < 0.5   {}", report.below_half);
    for (i, n) in report.deciles.iter().enumerate() {
        println!("[{:.1}, {:.1}{} {n}", i as f64 / 10.0, (i + 1) as f64 / 10.0, if i == 9 { "]" } else { ")" });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn synth(
    config: Option<PathBuf>,
    seed: Option<u64>,
    empty_fraction: Option<f64>,
    jitter: Option<usize>,
    format: MaskFormat,
    output_dir: &Path,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => anyhow::Error::new(plotgrid::Error::FileNotFound(p.clone())),
                _ => anyhow::Error::new(e).context(format!("reading {}", p.display())),
            })?;
            SynthConfig::from_toml(&text)?
        }
        None => SynthConfig::example_field(seed.unwrap_or(0)),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(f) = empty_fraction {
        cfg.empty_plot_fraction = f;
    }
    if let Some(j) = jitter {
        cfg.germination_jitter = j;
    }
    let field = generate(&cfg)?;
    std::fs::create_dir_all(output_dir).with_context(|| format!("creating {}", output_dir.display()))?;
    let mask_name = match format {
        MaskFormat::Png => "mask.png",
        MaskFormat::Pgm => "mask.pgm",
    };
    save_mask(output_dir.join(mask_name), &field.mask)?;
    plotio::write_text(output_dir.join("truth.json"), &plotio::to_json(&field.truth.plots))?;
    plotio::write_text(output_dir.join("truth.csv"), &plotio::to_csv(&field.truth.plots))?;
    plotio::write_text(output_dir.join("synth.toml"), &cfg.to_toml())?;
    let s = cfg.spec;
    let extract_cfg = format!(
        "[input]\npath = \"{mask_name}\"\nkind = \"mask\"\n\n\
         [planter]\nc_rows = {}\nd_crop = {}\nd_row = {}\nd_gap = {}\nd_ran_gap = {}\n\n\
         [field]\nrows = {}\nranges = {}\n\n[output]\ndir = \"out\"\n",
        s.c_rows, s.d_crop, s.d_row, s.d_gap, s.d_ran_gap, cfg.m_rows, cfg.n_ranges
    );
    plotio::write_text(output_dir.join("extract.toml"), &extract_cfg)?;
    println!("{}x{} field with {} plots written to {}", cfg.width, cfg.height, field.truth.plots.len(), output_dir.display());
    Ok(())
}

fn overlay(image: &Path, plots: &Path, output: &Path, source: bool) -> Result<()> {
    let base = load_image(image)?;
    let records = read_plots(plots)?;
    save_rgb_png(output, &render_overlay(&base, &records, source))?;
    Ok(())
}

fn dump(config: &Path, output_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    for p in pipeline::dump_profiles(&cfg, output_dir)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Extract { config, input, output_dir, overlay: o } => extract(&config, input, output_dir, o),
        Command::Evaluate { plots, truth, json } => run_evaluate(&plots, &truth, json),
        Command::Synth { config, seed, empty_fraction, jitter, format, output_dir } => {
            synth(config, seed, empty_fraction, jitter, format, &output_dir)
        }
        Command::RenderOverlay { image, plots, output, source } => overlay(&image, &plots, &output, source),
        Command::DumpProfiles { config, output_dir } => dump(&config, &output_dir),
    }
}

/// 1 for bad input or configuration, 2 for failures while processing.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<plotgrid::Error>() {
        Some(e) if e.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
