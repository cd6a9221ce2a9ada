//! Progressive loop: per-iteration photon tracing and gathering with
//! shrinking spatial and temporal bandwidths, averaged into a running mean.
//!
//! After iteration `j` both bandwidths shrink by `((j + α) / (j + 1))^β`,
//! with exponent `β_R = 1 - β_T` for the radius and `β_T` for time. The
//! product telescopes to `(j·α·B(α, j))^{-β}`, where `B` is the Beta
//! function, which gives the bandwidths of any iteration directly.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::beam_map::BeamMap;
use crate::estimators::EstimatorError;
use crate::film::{FilmError, TransientFilm};
use crate::photon::{trace_photons, WalkConfig, WalkStats};
use crate::render::{gather, GatherSettings, GatherStats};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgressiveConfig {
    pub alpha: f64,
    pub beta_t: f64,
    /// Beam radius of the first iteration [m].
    pub radius: f64,
    /// Temporal kernel half-width of the first iteration [s].
    pub time_bandwidth: f64,
    pub iterations: u64,
    pub seed: u64,
    pub walk: WalkConfig,
}

impl ProgressiveConfig {
    /// Spatial exponent; always `1 - beta_t`.
    pub fn beta_r(&self) -> f64 {
        1.0 - self.beta_t
    }

    /// Defaults: `α = 2/3`, `β_T = 1/2`, radius 1% of the scene diagonal and
    /// a temporal half-width of four bins.
    pub fn for_scene(scene: &Scene) -> Self {
        Self {
            alpha: 2.0 / 3.0,
            beta_t: 0.5,
            radius: 0.01 * scene.bounds.diagonal().length(),
            time_bandwidth: 4.0 * scene.time.bin_width(),
            iterations: 64,
            seed: 0,
            walk: WalkConfig::default(),
        }
    }
}

/// Ratios `(R_{j+1}/R_j, T_{j+1}/T_j)` applied after iteration `j >= 1`.
pub fn bandwidth_ratios(j: u64, alpha: f64, beta_t: f64) -> (f64, f64) {
    let base = (j as f64 + alpha) / (j as f64 + 1.0);
    (base.powf(1.0 - beta_t), base.powf(beta_t))
}

/// `j·α·B(α, j)`, the inverse of the cumulative shrink product up to iteration `j`.
pub fn shrink_base(j: u64, alpha: f64) -> f64 {
    let j = j as f64;
    let ln_beta = libm::lgamma(alpha) + libm::lgamma(j) - libm::lgamma(alpha + j);
    (j.ln() + alpha.ln() + ln_beta).exp()
}

/// Bandwidths `(R_j, T_j)` of iteration `j >= 1` in closed form.
pub fn bandwidths_closed_form(j: u64, config: &ProgressiveConfig) -> (f64, f64) {
    let base = shrink_base(j, config.alpha);
    (
        config.radius * base.powf(-config.beta_r()),
        config.time_bandwidth * base.powf(-config.beta_t),
    )
}

#[derive(Debug, Error)]
pub enum ProgressError {
    #[error(transparent)]
    Film(#[from] FilmError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("iteration {0} produced a non-finite film")]
    NonFinite(u64),
    #[error("slope fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("slope fit needs positive errors, got {0} at n = {1}")]
    NonPositive(f64, f64),
    #[error("slope fit needs strictly increasing n")]
    NotIncreasing,
}

/// Running state: iteration counter, current bandwidths and mean film.
#[derive(Debug, Clone)]
pub struct ProgressiveState {
    /// Number of iterations accumulated so far.
    pub iteration: u64,
    /// Bandwidths for the next iteration.
    pub radius: f64,
    pub time_bandwidth: f64,
    pub film: TransientFilm,
}

impl ProgressiveState {
    pub fn new(config: &ProgressiveConfig, film: TransientFilm) -> Self {
        Self {
            iteration: 0,
            radius: config.radius,
            time_bandwidth: config.time_bandwidth,
            film,
        }
    }

    /// Fold in the film of the next iteration: `mean_n = mean_{n-1}·(n-1)/n + film/n`.
    pub fn accumulate(&mut self, film: &TransientFilm) -> Result<(), FilmError> {
        let n = (self.iteration + 1) as f64;
        self.film.blend((n - 1.0) / n, film, 1.0 / n)?;
        self.iteration += 1;
        Ok(())
    }

    /// Shrink the bandwidths after the iteration just accumulated.
    pub fn shrink(&mut self, alpha: f64, beta_t: f64) {
        let (r, t) = bandwidth_ratios(self.iteration, alpha, beta_t);
        self.radius *= r;
        self.time_bandwidth *= t;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationStats {
    pub walk: WalkStats,
    pub gather: GatherStats,
}

/// Trace, build the beam map and gather for iteration `j` (1-based).
pub fn run_iteration(
    scene: &Scene,
    config: &ProgressiveConfig,
    settings: &GatherSettings,
    j: u64,
    radius: f64,
    pixels: Option<&[usize]>,
) -> Result<(TransientFilm, IterationStats), ProgressError> {
    let (beams, walk) = trace_photons(scene, &config.walk, config.seed, j, radius);
    let map = BeamMap::build(beams);
    let (film, gather) = gather(scene, &map, settings, config.seed, j, pixels)?;
    if !film.is_finite() {
        return Err(ProgressError::NonFinite(j));
    }
    Ok((film, IterationStats { walk, gather }))
}

/// Least-squares slope of `ln(mse)` against `ln(n)`.
pub fn fit_amse_slope(series: &[(f64, f64)]) -> Result<f64, ProgressError> {
    if series.len() < 4 {
        return Err(ProgressError::TooFewPoints(series.len()));
    }
    for w in series.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(ProgressError::NotIncreasing);
        }
    }
    if let Some(&(n, e)) = series.iter().find(|p| !(p.1 > 0.0)) {
        return Err(ProgressError::NonPositive(e, n));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, e)| (n.ln(), e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Mean squared error over the listed pixels, every bin and channel.
pub fn mse(film: &TransientFilm, reference: &TransientFilm, pixels: &[usize]) -> Result<f64, FilmError> {
    film.same_shape(reference)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for &p in pixels {
        for (a, b) in film.profile(p).iter().zip(reference.profile(p)) {
            sum += (a - b) * (a - b);
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// One line of the convergence log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    /// Radius used by iteration `n` [m].
    pub radius: f64,
    /// Temporal half-width used by iteration `n` [s].
    pub time_bandwidth: f64,
    pub mse: f64,
}

/// Write `n,R,T,mse` rows; `T` is written in nanoseconds.
pub fn write_convergence_csv(rows: &[ConvergenceRow], path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "n,R,T,mse")?;
    for r in rows {
        writeln!(out, "{},{:e},{:e},{:e}", r.n, r.radius, r.time_bandwidth * 1e9, r.mse)?;
    }
    out.flush()
}
