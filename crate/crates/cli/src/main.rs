//! `tpb`: render a transient film from a scene file.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, ValueEnum};

use tpb_core::film::{heaviside_transform, read_film, write_film, write_frames, FrameFormat};
use tpb_core::integrator::{self, is_beam_mode, IterationObserver, MseTracker, RenderOptions, Silent};
use tpb_core::progressive::write_convergence_csv;
use tpb_core::scene::{Emission, Scene};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrameKind {
    Pfm,
    Ppm,
}

#[derive(Debug, Parser)]
#[command(name = "tpb", version, about = "Progressive transient photon beams renderer")]
struct Args {
    /// Scene description file.
    #[arg(long)]
    scene: PathBuf,
    /// Output film file.
    #[arg(long)]
    out: PathBuf,
    /// Integrator: beams1d, beams2d, reference or steady.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    iterations: Option<u64>,
    /// Photon walks per iteration.
    #[arg(long)]
    photons: Option<u64>,
    /// Samples per pixel (reference mode only).
    #[arg(long)]
    spp: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Exclude the time from the first medium vertex to the camera.
    #[arg(long)]
    unwarp: bool,
    /// Convert the impulse response into a step response.
    #[arg(long)]
    heaviside: bool,
    /// Reference film for convergence measurement.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Pixels used for the error, as `x1,y1;x2,y2`.
    #[arg(long)]
    mse_pixels: Option<String>,
    /// Write `n,R,T,mse` per iteration.
    #[arg(long)]
    convergence_csv: Option<PathBuf>,
    /// Write one image per time bin into this directory.
    #[arg(long)]
    frames_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    exposure: f64,
    #[arg(long, value_enum, default_value_t = FrameKind::Pfm)]
    frame_format: FrameKind,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

struct Usage(String);

fn parse_pixels(text: &str, width: u32, height: u32) -> Result<Vec<usize>, Usage> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (x, y) = p
                .split_once(',')
                .ok_or_else(|| Usage(format!("pixel `{p}` is not of the form x,y")))?;
            let x: u32 = x.trim().parse().map_err(|_| Usage(format!("bad pixel x `{x}`")))?;
            let y: u32 = y.trim().parse().map_err(|_| Usage(format!("bad pixel y `{y}`")))?;
            if x >= width || y >= height {
                return Err(Usage(format!("pixel ({x}, {y}) outside the {width}x{height} film")));
            }
            Ok(y as usize * width as usize + x as usize)
        })
        .collect()
}

/// Checks that need no file access.
fn check_flags(args: &Args) -> Result<(), Usage> {
    if let Some(mode) = &args.mode {
        if !integrator::registry().contains(mode) {
            return Err(Usage(format!(
                "unknown mode `{mode}` (available: {})",
                integrator::registry().names().join(", ")
            )));
        }
        if args.spp.is_some() && is_beam_mode(mode) {
            return Err(Usage(format!("--spp only applies to reference mode, not `{mode}`")));
        }
    }
    if args.convergence_csv.is_some() && args.reference.is_none() {
        return Err(Usage("--convergence-csv needs --reference".into()));
    }
    if args.mse_pixels.is_some() && args.reference.is_none() {
        return Err(Usage("--mse-pixels needs --reference".into()));
    }
    if !(args.exposure.is_finite() && args.exposure >= 0.0) {
        return Err(Usage("--exposure must be a non-negative number".into()));
    }
    Ok(())
}

fn run(args: Args) -> anyhow::Result<()> {
    let scene = Scene::load(&args.scene).with_context(|| format!("loading {}", args.scene.display()))?;
    let mut options = RenderOptions::from_scene(&scene);
    if let Some(m) = &args.mode {
        options.mode = m.clone();
    }
    if args.spp.is_some() && is_beam_mode(&options.mode) {
        bail!("--spp only applies to reference mode, not `{}`", options.mode);
    }
    if let Some(v) = args.iterations {
        options.iterations = v;
    }
    if let Some(v) = args.photons {
        options.photons = v;
    }
    if let Some(v) = args.spp {
        options.spp = v;
    }
    if let Some(v) = args.seed {
        options.seed = v;
    }
    options.unwarp |= args.unwarp;

    let heaviside = args.heaviside || scene.lights.iter().all(|l| l.emission == Emission::Heaviside);
    if !heaviside && scene.lights.iter().any(|l| l.emission == Emission::Heaviside) {
        bail!("lights mix delta and heaviside emission; render them separately");
    }

    let integrator = integrator::registry().create(&options.mode)?;
    let mut tracker = match &args.reference {
        Some(path) => {
            let reference = read_film(path).with_context(|| format!("reading reference {}", path.display()))?;
            let pixels = match &args.mse_pixels {
                Some(text) => parse_pixels(text, scene.camera.width, scene.camera.height).map_err(|u| anyhow!(u.0))?,
                None => (0..scene.camera.pixel_count()).collect(),
            };
            Some(MseTracker::new(reference, pixels))
        }
        None => None,
    };
    let observer: &mut dyn IterationObserver = match tracker.as_mut() {
        Some(t) => t,
        None => &mut Silent,
    };
    log::info!("rendering with {}", integrator.name());
    let mut film = integrator.render(&scene, &options, observer)?;
    if heaviside {
        film = heaviside_transform(&film);
    }
    write_film(&film, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if let (Some(path), Some(t)) = (&args.convergence_csv, &tracker) {
        write_convergence_csv(&t.rows, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(dir) = &args.frames_dir {
        let format = match args.frame_format {
            FrameKind::Pfm => FrameFormat::Pfm,
            FrameKind::Ppm => FrameFormat::Ppm,
        };
        write_frames(&film, dir, args.exposure, format)
            .with_context(|| format!("writing frames to {}", dir.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(Usage(msg)) = check_flags(&args) {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
