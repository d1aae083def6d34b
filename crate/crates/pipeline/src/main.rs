use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use shadowkit::evalkit::{select_counterpart, warp_homography_into, Correspondence};
use shadowkit::imgcore::io;
use shadowkit::olat::{LightRig, OlatScan, WeightVector};
use shadowkit_pipeline::fixtures::{write_fixtures, FixtureSpec};
use shadowkit_pipeline::mirrors::{mirror_one, save_any};
use shadowkit_pipeline::{
    gen_facial, gen_foreign, gen_mirrors, metrics, report, ImageSet, PipelineConfig, PipelineError,
};

#[derive(Parser)]
#[command(
    name = "shadowkit",
    version,
    about = "Shadow dataset generation and evaluation"
)]
struct Cli {
    /// TOML configuration; defaults apply to keys it omits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    no_sv: bool,
    #[arg(long)]
    no_ss: bool,
    #[arg(long)]
    no_color: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Composite foreign shadows onto the face corpus.
    SynthForeign(Overrides),
    /// Render harsh/soft pairs from OLAT scans.
    SynthFacial(Overrides),
    /// Mirror one image, or every harsh input of a facial dataset.
    Mirror {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, requires_all = ["landmarks", "out"])]
        image: Option<PathBuf>,
        #[arg(long)]
        landmarks: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the asymmetry map here.
        #[arg(long)]
        diff: Option<PathBuf>,
        #[arg(long)]
        k_sigma: Option<usize>,
    },
    /// Relight a scan with a JSON weight vector indexed by rig light.
    Relight {
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        rig: Option<PathBuf>,
    },
    /// Align a shadowed image to candidate frames and pick the closest.
    Align {
        #[arg(long)]
        shadow: PathBuf,
        #[arg(long = "candidate", required = true)]
        candidates: Vec<PathBuf>,
        /// JSON list, one entry per candidate, of `[[x, y], [x', y']]` pairs.
        #[arg(long)]
        points: PathBuf,
        /// Where to write the shadowed image aligned to the chosen frame.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against ground truth (`DIR` or `DIR:FILE`).
    Metrics {
        #[arg(long)]
        pred: String,
        #[arg(long)]
        truth: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Tabulate mean metrics for several prediction sets.
    Report {
        #[arg(long)]
        truth: String,
        /// `NAME=DIR[:FILE]`, repeatable.
        #[arg(long = "variant", required = true)]
        variants: Vec<String>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write a synthetic corpus and a config that uses it.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        faces: usize,
        #[arg(long, default_value_t = 2)]
        scans: usize,
        #[arg(long, default_value_t = 64)]
        scan_size: usize,
    },
}

fn load_config(path: Option<&Path>, o: &Overrides) -> Result<PipelineConfig, PipelineError> {
    let mut c = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = o.seed {
        c.seed = v;
    }
    if let Some(v) = o.count {
        c.count = v;
    }
    if let Some(v) = &o.output {
        c.output = v.clone();
    }
    if o.workers.is_some() {
        c.workers = o.workers;
    }
    c.no_sv |= o.no_sv;
    c.no_ss |= o.no_ss;
    c.no_color |= o.no_color;
    Ok(c)
}

fn print_summary(s: &shadowkit_pipeline::RunSummary) {
    println!(
        "{}: {} written, {} skipped",
        s.manifest.display(),
        s.written,
        s.skipped.len()
    );
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::SynthForeign(o) => print_summary(&gen_foreign(&load_config(cfg, &o)?)?),
        Command::SynthFacial(o) => print_summary(&gen_facial(&load_config(cfg, &o)?)?),
        Command::Mirror {
            overrides,
            image,
            landmarks,
            out,
            diff,
            k_sigma,
        } => {
            let mut c = load_config(cfg, &overrides)?;
            if let Some(k) = k_sigma {
                c.k_sigma = k;
            }
            match image {
                Some(image) => mirror_one(
                    &image,
                    landmarks.as_deref().expect("required by clap"),
                    out.as_deref().expect("required by clap"),
                    diff.as_deref(),
                    c.k_sigma,
                )?,
                None => print_summary(&gen_mirrors(&c)?),
            }
        }
        Command::Relight {
            scan,
            weights,
            out,
            rig,
        } => {
            let scan = OlatScan::load_dir(&scan)?;
            if let Some(rig) = rig {
                scan.check_rig(&LightRig::load(&rig)?)?;
            }
            let text = std::fs::read_to_string(&weights)
                .with_context(|| format!("reading {}", weights.display()))?;
            let w: WeightVector = serde_json::from_str(&text)
                .map_err(|e| PipelineError::Input(format!("{}: {e}", weights.display())))?;
            save_any(&scan.relight(&w)?, &out)?;
        }
        Command::Align {
            shadow,
            candidates,
            points,
            out,
        } => {
            let shadow_img = io::load_image(&shadow)?;
            let frames = candidates
                .iter()
                .map(io::load_image)
                .collect::<Result<Vec<_>, _>>()?;
            let text = std::fs::read_to_string(&points)
                .with_context(|| format!("reading {}", points.display()))?;
            let pairs: Vec<Vec<Correspondence>> = serde_json::from_str(&text)
                .map_err(|e| PipelineError::Input(format!("{}: {e}", points.display())))?;
            let choice = select_counterpart(&shadow_img, &frames, &pairs)?;
            if let Some(out) = out {
                let best = &frames[choice.index];
                let aligned = warp_homography_into(
                    &shadow_img,
                    &choice.fits[choice.index].homography,
                    best.width(),
                    best.height(),
                )?;
                save_any(&aligned, &out)?;
            }
            println!("{}", serde_json::to_string_pretty(&choice)?);
        }
        Command::Metrics { pred, truth, json } => {
            let s = metrics(&ImageSet::parse(&pred)?, &ImageSet::parse(&truth)?)?;
            println!(
                "n={} PSNR={:.3} SSIM={:.4} L1={:.5}",
                s.count, s.mean.psnr, s.mean.ssim, s.mean.l1
            );
            if let Some(path) = json {
                write_text(&path, &serde_json::to_string_pretty(&s)?)?;
            }
        }
        Command::Report {
            truth,
            variants,
            json,
        } => {
            let truth = ImageSet::parse(&truth)?;
            let mut sets = Vec::with_capacity(variants.len());
            for v in &variants {
                let Some((name, spec)) = v.split_once('=') else {
                    return Err(
                        PipelineError::Config(format!("variant `{v}` is not NAME=SPEC")).into(),
                    );
                };
                sets.push((name.to_owned(), ImageSet::parse(spec)?));
            }
            let table = report(&truth, &sets)?;
            print!("{}", table.to_text());
            if let Some(path) = json {
                write_text(&path, &serde_json::to_string_pretty(&table)?)?;
            }
        }
        Command::Fixtures {
            out,
            seed,
            faces,
            scans,
            scan_size,
        } => {
            if faces == 0 || scans == 0 {
                bail!(PipelineError::Config(
                    "fixtures need at least one face and one scan".into()
                ));
            }
            let spec = FixtureSpec {
                seed,
                faces,
                scans,
                scan_size,
                ..FixtureSpec::default()
            };
            write_fixtures(&out, &spec)?;
            println!("fixtures written to {}", out.display());
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(p) = e.downcast_ref::<PipelineError>() {
        p.exit_code()
    } else if e.downcast_ref::<shadowkit::Error>().is_some() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
