//! Rendering strategies selectable by name.
//!
//! | name        | method                                                  |
//! |-------------|---------------------------------------------------------|
//! | `beams1d`   | progressive 1D beams with a shrinking temporal kernel   |
//! | `beams2d`   | 2D beams, fixed radius, time histogram                  |
//! | `reference` | path tracer with next-event estimation                  |
//! | `steady`    | progressive 1D beams with time discarded (one bin)      |

use thiserror::Error;

use crate::film::{FilmError, TransientFilm};
use crate::kernels::{self, TemporalKernel};
use crate::photon::WalkConfig;
use crate::progressive::{mse, run_iteration, ConvergenceRow, ProgressError, ProgressiveConfig, ProgressiveState};
use crate::reference::{render_reference, ReferenceConfig};
use crate::registry::{Registry, UnknownStrategy};
use crate::render::{film_for, GatherMode, GatherSettings};
use crate::scene::Scene;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    Unknown(#[from] UnknownStrategy),
    #[error(transparent)]
    Progress(#[from] ProgressError),
    #[error(transparent)]
    Film(#[from] FilmError),
    #[error("invalid option: {0}")]
    Invalid(String),
}

/// Everything an integrator needs besides the scene.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub mode: String,
    pub iterations: u64,
    pub photons: u64,
    pub spp: u64,
    pub seed: u64,
    pub unwarp: bool,
    pub alpha: f64,
    pub beta_t: f64,
    /// First-iteration beam radius [m].
    pub radius: f64,
    /// First-iteration temporal half-width [s].
    pub time_bandwidth: f64,
    pub kernel: String,
    pub max_vertices: u32,
    pub rr_depth: u32,
    pub max_bounces: u32,
    /// Render only these pixel indices; the rest of the film stays zero.
    pub pixels: Option<Vec<usize>>,
}

impl RenderOptions {
    /// Options from the scene's integrator block, with automatic bandwidths resolved.
    pub fn from_scene(scene: &Scene) -> Self {
        let it = &scene.integrator;
        let defaults = ProgressiveConfig::for_scene(scene);
        Self {
            mode: it.mode.clone(),
            iterations: it.iterations as u64,
            photons: it.photons,
            spp: it.spp as u64,
            seed: it.seed,
            unwarp: it.unwarp,
            alpha: it.alpha,
            beta_t: it.beta_t,
            radius: it.radius.unwrap_or(defaults.radius),
            time_bandwidth: it.time_bandwidth.map_or(defaults.time_bandwidth, |ns| ns * 1e-9),
            kernel: it.kernel.clone(),
            max_vertices: it.max_vertices,
            rr_depth: it.rr_depth,
            max_bounces: it.max_bounces,
            pixels: None,
        }
    }

    pub fn progressive(&self) -> ProgressiveConfig {
        ProgressiveConfig {
            alpha: self.alpha,
            beta_t: self.beta_t,
            radius: self.radius,
            time_bandwidth: self.time_bandwidth,
            iterations: self.iterations,
            seed: self.seed,
            walk: WalkConfig {
                max_vertices: self.max_vertices,
                rr_start: self.rr_depth,
                photons: self.photons,
            },
        }
    }

    fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::Invalid(m.to_string()));
        if self.iterations == 0 {
            return bad("iterations must be >= 1");
        }
        if self.photons == 0 {
            return bad("photons must be >= 1");
        }
        if self.spp == 0 {
            return bad("spp must be >= 1");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.beta_t) {
            return bad("beta_t must lie in [0, 1]");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius must be positive");
        }
        if !(self.time_bandwidth > 0.0 && self.time_bandwidth.is_finite()) {
            return bad("time bandwidth must be positive");
        }
        if self.max_vertices < 2 {
            return bad("max_vertices must be >= 2");
        }
        Ok(())
    }
}

/// Progress report handed to observers after each accumulated iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationReport {
    pub n: u64,
    /// Bandwidths used by iteration `n`.
    pub radius: f64,
    pub time_bandwidth: f64,
}

pub trait IterationObserver {
    /// Called with the running estimate after iteration `report.n`.
    fn on_iteration(&mut self, report: &IterationReport, estimate: &TransientFilm) -> Result<(), RenderError>;
}

/// Observer that does nothing.
pub struct Silent;

impl IterationObserver for Silent {
    fn on_iteration(&mut self, _: &IterationReport, _: &TransientFilm) -> Result<(), RenderError> {
        Ok(())
    }
}

/// Records the mean squared error of each running estimate against a reference film.
pub struct MseTracker {
    pub reference: TransientFilm,
    pub pixels: Vec<usize>,
    pub rows: Vec<ConvergenceRow>,
}

impl MseTracker {
    pub fn new(reference: TransientFilm, pixels: Vec<usize>) -> Self {
        Self {
            reference,
            pixels,
            rows: Vec::new(),
        }
    }
}

impl IterationObserver for MseTracker {
    fn on_iteration(&mut self, report: &IterationReport, estimate: &TransientFilm) -> Result<(), RenderError> {
        self.rows.push(ConvergenceRow {
            n: report.n,
            radius: report.radius,
            time_bandwidth: report.time_bandwidth,
            mse: mse(estimate, &self.reference, &self.pixels)?,
        });
        Ok(())
    }
}

pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;
    fn render(
        &self,
        scene: &Scene,
        options: &RenderOptions,
        observer: &mut dyn IterationObserver,
    ) -> Result<TransientFilm, RenderError>;
}

fn progressive_loop<'k>(
    scene: &Scene,
    options: &RenderOptions,
    observer: &mut dyn IterationObserver,
    shrink: bool,
    mode: impl Fn(f64) -> GatherMode<'k>,
) -> Result<TransientFilm, RenderError> {
    options.validate()?;
    let config = options.progressive();
    let mut state = ProgressiveState::new(&config, film_for(scene, &mode(config.time_bandwidth)));
    for j in 1..=config.iterations {
        let settings = GatherSettings {
            mode: mode(state.time_bandwidth),
            unwarp: options.unwarp,
            max_bounces: options.max_bounces,
        };
        let (film, stats) = run_iteration(scene, &config, &settings, j, state.radius, options.pixels.as_deref())?;
        log::debug!(
            "iteration {j}: {} beams, {} intersections",
            stats.walk.beams,
            stats.gather.intersections
        );
        state.accumulate(&film)?;
        observer.on_iteration(
            &IterationReport {
                n: j,
                radius: state.radius,
                time_bandwidth: state.time_bandwidth,
            },
            &state.film,
        )?;
        if shrink {
            state.shrink(config.alpha, config.beta_t);
        }
    }
    Ok(state.film)
}

/// Progressive 1D beams with temporal kernel density estimation.
pub struct Beams1D;

impl Integrator for Beams1D {
    fn name(&self) -> &'static str {
        "beams1d"
    }

    fn render(
        &self,
        scene: &Scene,
        options: &RenderOptions,
        observer: &mut dyn IterationObserver,
    ) -> Result<TransientFilm, RenderError> {
        let kernel: Box<dyn TemporalKernel> = kernels::registry().create(&options.kernel)?;
        let kernel = kernel.as_ref();
        progressive_loop(scene, options, observer, true, |bandwidth| GatherMode::Kernel1D {
            kernel,
            bandwidth,
        })
    }
}

/// 2D beams at a fixed radius with the time histogram footprint; iterations are averaged.
pub struct Beams2D;

impl Integrator for Beams2D {
    fn name(&self) -> &'static str {
        "beams2d"
    }

    fn render(
        &self,
        scene: &Scene,
        options: &RenderOptions,
        observer: &mut dyn IterationObserver,
    ) -> Result<TransientFilm, RenderError> {
        progressive_loop(scene, options, observer, false, |_| GatherMode::Histogram2D)
    }
}

/// Steady-state 1D beams: same walks and radii as `beams1d`, without time.
pub struct Steady;

impl Integrator for Steady {
    fn name(&self) -> &'static str {
        "steady"
    }

    fn render(
        &self,
        scene: &Scene,
        options: &RenderOptions,
        observer: &mut dyn IterationObserver,
    ) -> Result<TransientFilm, RenderError> {
        progressive_loop(scene, options, observer, true, |_| GatherMode::Steady1D)
    }
}

/// Path-traced reference.
pub struct Reference;

impl Integrator for Reference {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn render(
        &self,
        scene: &Scene,
        options: &RenderOptions,
        observer: &mut dyn IterationObserver,
    ) -> Result<TransientFilm, RenderError> {
        options.validate()?;
        let config = ReferenceConfig {
            spp: options.spp,
            max_bounces: options.max_bounces,
            seed: options.seed,
            unwarp: options.unwarp,
            pixels: options.pixels.clone(),
        };
        let (film, stats) = render_reference(scene, &config);
        if stats.dropped > 0 {
            log::warn!("{} non-finite path contributions dropped", stats.dropped);
        }
        observer.on_iteration(
            &IterationReport {
                n: 1,
                radius: 0.0,
                time_bandwidth: 0.0,
            },
            &film,
        )?;
        Ok(film)
    }
}

pub const DEFAULT_MODE: &str = "beams1d";

/// All built-in integrators.
pub fn registry() -> Registry<dyn Integrator> {
    let mut r: Registry<dyn Integrator> = Registry::new("integrator");
    r.register("beams1d", || Box::new(Beams1D));
    r.register("beams2d", || Box::new(Beams2D));
    r.register("reference", || Box::new(Reference));
    r.register("steady", || Box::new(Steady));
    r
}

/// Whether `mode` names a photon-beam integrator (as opposed to the path tracer).
pub fn is_beam_mode(mode: &str) -> bool {
    mode != "reference"
}
