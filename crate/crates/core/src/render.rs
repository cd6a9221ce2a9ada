//! Camera pass: gather photon beams along camera paths into a film.

use rayon::prelude::*;

use crate::beam_map::{BeamMap, RayQuery};
use crate::estimators::{estimate_beam_1d, estimate_beam_2d, EstimatorError};
use crate::film::TransientFilm;
use crate::kernels::{BoxKernel, TemporalKernel};
use crate::rng::{domain, stream};
use crate::scene::{Scene, TimeRange};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy)]
pub enum GatherMode<'k> {
    /// 1D spatial blur with a temporal kernel of half-width `bandwidth` [s].
    Kernel1D {
        kernel: &'k dyn TemporalKernel,
        bandwidth: f64,
    },
    /// 2D spatial blur with an even spread over each footprint's arrival times.
    Histogram2D,
    /// 1D spatial blur with time discarded; the film has a single bin.
    Steady1D,
}

#[derive(Debug, Clone, Copy)]
pub struct GatherSettings<'k> {
    pub mode: GatherMode<'k>,
    /// Drop the time spent between the first medium point and the camera.
    pub unwarp: bool,
    pub max_bounces: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GatherStats {
    pub segments: u64,
    pub intersections: u64,
    /// 1D estimates skipped for near-parallel pairs or off-segment closest approach.
    pub skipped: u64,
}

impl GatherStats {
    fn merge(self, o: GatherStats) -> GatherStats {
        GatherStats {
            segments: self.segments + o.segments,
            intersections: self.intersections + o.intersections,
            skipped: self.skipped + o.skipped,
        }
    }
}

/// Film shape the gather pass produces for `mode`.
pub fn film_for(scene: &Scene, mode: &GatherMode) -> TransientFilm {
    let time = match mode {
        GatherMode::Steady1D => TimeRange { bins: 1, ..scene.time },
        _ => scene.time,
    };
    TransientFilm::new(scene.camera.width, scene.camera.height, time)
}

/// Render one camera sample per pixel against `map`. When `pixels` is given,
/// only those pixel indices are rendered and all others stay zero.
pub fn gather(
    scene: &Scene,
    map: &BeamMap,
    settings: &GatherSettings,
    seed: u64,
    iteration: u64,
    pixels: Option<&[usize]>,
) -> Result<(TransientFilm, GatherStats), EstimatorError> {
    let mut film = film_for(scene, &settings.mode);
    let per_pixel = film.bins() * 3;
    let time = film.time;
    let width = scene.camera.width as usize;
    let mask = pixels.map(|p| {
        let mut m = vec![false; film.pixel_count()];
        for &i in p {
            if i < m.len() {
                m[i] = true;
            }
        }
        m
    });
    let results: Vec<Result<(Spectrum, GatherStats), EstimatorError>> = film
        .data_mut()
        .par_chunks_mut(per_pixel)
        .enumerate()
        .map(|(pixel, bins)| {
            if mask.as_ref().is_some_and(|m| !m[pixel]) {
                return Ok((Spectrum::ZERO, GatherStats::default()));
            }
            let mut out = crate::film::PixelBins {
                bins,
                time,
                overflow: Spectrum::ZERO,
            };
            let mut rng = stream(seed ^ domain::CAMERA, iteration, pixel as u64);
            let stats = gather_pixel(
                scene,
                map,
                settings,
                (pixel % width) as u32,
                (pixel / width) as u32,
                &mut rng,
                &mut out,
            )?;
            Ok((out.overflow, stats))
        })
        .collect();
    let mut stats = GatherStats::default();
    for r in results {
        let (o, s) = r?;
        film.overflow += o;
        stats = stats.merge(s);
    }
    Ok((film, stats))
}

fn gather_pixel(
    scene: &Scene,
    map: &BeamMap,
    settings: &GatherSettings,
    px: u32,
    py: u32,
    rng: &mut crate::rng::RngStream,
    out: &mut crate::film::PixelBins,
) -> Result<GatherStats, EstimatorError> {
    let mut stats = GatherStats::default();
    let mut failure = None;
    for seg in scene.camera_path(px, py, rng, settings.max_bounces) {
        stats.segments += 1;
        let medium = scene.medium(seg.region);
        // the gather point is the first medium vertex of the camera path, so
        // unwarping drops the whole camera leg
        let query = RayQuery {
            origin: seg.origin,
            direction: seg.direction,
            length: seg.length,
            start_time: if settings.unwarp { 0.0 } else { seg.start_time },
            eta: if settings.unwarp { 0.0 } else { medium.ior() },
        };
        map.for_each_intersection(&query, |beam, isect| {
            if beam.region != seg.region || failure.is_some() {
                return;
            }
            stats.intersections += 1;
            match settings.mode {
                GatherMode::Kernel1D { kernel, bandwidth } => {
                    match estimate_beam_1d(isect, beam, medium, kernel, bandwidth) {
                        Some(mut s) => {
                            s.value *= seg.weight;
                            out.splat(&s);
                        }
                        None => stats.skipped += 1,
                    }
                }
                GatherMode::Histogram2D => match estimate_beam_2d(isect, beam, medium) {
                    Ok(mut s) => {
                        s.value *= seg.weight;
                        out.splat(&s);
                    }
                    Err(e) => failure = Some(e),
                },
                GatherMode::Steady1D => match estimate_beam_1d(isect, beam, medium, &BoxKernel, 1.0) {
                    Some(s) => out.add_to_bin(0, s.value * seg.weight),
                    None => stats.skipped += 1,
                },
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(stats)
}
