//! Transient volumetric path tracer used as ground truth, plus analytic
//! arrival-time helpers.
//!
//! Camera paths sample free flights analogically and connect every medium
//! vertex to each point light. Contributions land in the film as points in
//! time; there is no spatial or temporal smoothing. Diffuse surfaces are
//! black, so only light scattered by media reaches the film.

use rand::Rng;
use rayon::prelude::*;

use crate::film::{PixelBins, TransientFilm};
use crate::math::Vec3;
use crate::media::{sample_free_flight, FreeFlight, SPEED_OF_LIGHT};
use crate::rng::{domain, stream};
use crate::scene::{Scene, SurfaceEvent};
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceConfig {
    pub spp: u64,
    /// Maximum number of medium scattering vertices per camera path.
    pub max_bounces: u32,
    pub seed: u64,
    pub unwarp: bool,
    /// Render only these pixel indices.
    pub pixels: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReferenceStats {
    pub paths: u64,
    /// Contributions dropped for being non-finite.
    pub dropped: u64,
}

/// Render the scene's film range with `config.spp` paths per pixel.
pub fn render_reference(scene: &Scene, config: &ReferenceConfig) -> (TransientFilm, ReferenceStats) {
    let mut film = TransientFilm::new(scene.camera.width, scene.camera.height, scene.time);
    let per_pixel = film.bins() * 3;
    let time = film.time;
    let width = scene.camera.width as usize;
    let mut mask = None;
    if let Some(p) = &config.pixels {
        let mut m = vec![false; film.pixel_count()];
        for &i in p {
            if i < m.len() {
                m[i] = true;
            }
        }
        mask = Some(m);
    }
    let results: Vec<(Spectrum, ReferenceStats)> = film
        .data_mut()
        .par_chunks_mut(per_pixel)
        .enumerate()
        .map(|(pixel, bins)| {
            let mut stats = ReferenceStats::default();
            if mask.as_ref().is_some_and(|m| !m[pixel]) {
                return (Spectrum::ZERO, stats);
            }
            let mut out = PixelBins {
                bins,
                time,
                overflow: Spectrum::ZERO,
            };
            let (px, py) = ((pixel % width) as u32, (pixel / width) as u32);
            let scale = 1.0 / config.spp as f64;
            for s in 0..config.spp {
                let mut rng = stream(seed_for(config.seed, pixel), s, 0);
                trace_path(scene, config, px, py, scale, &mut rng, &mut out, &mut stats);
            }
            (out.overflow, stats)
        })
        .collect();
    let mut stats = ReferenceStats::default();
    for (o, s) in results {
        film.overflow += o;
        stats.paths += s.paths;
        stats.dropped += s.dropped;
    }
    (film, stats)
}

fn seed_for(seed: u64, pixel: usize) -> u64 {
    crate::rng::stream_key(seed ^ domain::REFERENCE, pixel as u64, u64::MAX)
}

#[allow(clippy::too_many_arguments)]
fn trace_path<R: Rng + ?Sized>(
    scene: &Scene,
    config: &ReferenceConfig,
    px: u32,
    py: u32,
    scale: f64,
    rng: &mut R,
    out: &mut PixelBins,
    stats: &mut ReferenceStats,
) {
    stats.paths += 1;
    let mut dir = scene
        .camera
        .direction(px as f64 + rng.random::<f64>(), py as f64 + rng.random::<f64>());
    let mut origin = scene.camera.position;
    let mut region = scene.region_at(origin);
    let mut throughput = Spectrum::splat(scale);
    let mut time = 0.0;
    let mut medium_vertices = 0u32;
    let mut surface_events = 0u32;

    loop {
        let (length, hit) = scene.segment(origin, dir, region);
        let medium = *scene.medium(region);
        if let FreeFlight::Interaction { distance, .. } = sample_free_flight(&medium, rng) {
            if distance < length {
                let p = origin + dir * distance;
                time += medium.ior() * distance / SPEED_OF_LIGHT;
                if config.unwarp && medium_vertices == 0 {
                    time = 0.0;
                }
                medium_vertices += 1;
                throughput *= medium.albedo();
                for light in &scene.lights {
                    let Some((transmittance, light_time)) = scene.shadow_path(p, region, light.position) else {
                        continue;
                    };
                    let to_light = light.position - p;
                    let d2 = to_light.length_squared();
                    let cos = to_light.dot(dir) / d2.sqrt();
                    let value = throughput * light.intensity * (medium.phase.eval_unchecked(cos) * transmittance / d2);
                    if value.is_finite() {
                        out.add_point(time + light_time, value);
                    } else {
                        stats.dropped += 1;
                    }
                }
                if medium_vertices >= config.max_bounces || throughput.is_black() {
                    return;
                }
                if medium_vertices >= 8 {
                    let q = (throughput.max_component() / scale).clamp(0.05, 1.0);
                    if rng.random::<f64>() >= q {
                        return;
                    }
                    throughput = throughput / q;
                }
                dir = medium.phase.sample_direction(dir, rng).0;
                origin = p;
                continue;
            }
        }
        let Some(hit) = hit else { return };
        time += medium.ior() * hit.t / SPEED_OF_LIGHT;
        origin += dir * hit.t;
        surface_events += 1;
        if surface_events > 256 {
            return;
        }
        match scene.surface_event(&hit, origin, dir, region, rng.random()) {
            SurfaceEvent::Absorbed => return,
            SurfaceEvent::Continue {
                direction,
                region: next,
                weight,
                radiance_scale,
            } => {
                throughput = throughput * weight * radiance_scale;
                dir = direction;
                region = next;
            }
        }
    }
}

/// Earliest single-scattering arrival along the camera ray `dir`: the
/// smallest path time from the light to a point of the ray's first medium
/// segment and on to the camera. Assumes a homogeneous medium, straight light
/// paths and the scene's first light. `None` if the ray never enters a medium.
pub fn first_arrival_along(scene: &Scene, dir: Vec3, unwarp: bool) -> Option<f64> {
    let light = scene.lights.first()?.position;
    let seg = first_medium_segment(scene, dir)?;
    let eta = scene.medium(seg.1).ior();
    let (start, seg_dir, length, camera_time) = seg.0;
    if unwarp {
        // closest point of the segment to the light
        let s = (light - start).dot(seg_dir).clamp(0.0, length);
        Some(eta * (start + seg_dir * s - light).length() / SPEED_OF_LIGHT)
    } else {
        // s + |x(s) - light| never decreases along the ray, so the entry point wins
        Some(camera_time + eta * (start - light).length() / SPEED_OF_LIGHT)
    }
}

fn first_medium_segment(scene: &Scene, dir: Vec3) -> Option<((Vec3, Vec3, f64, f64), usize)> {
    let mut origin = scene.camera.position;
    let mut dir = dir;
    let mut region = scene.region_at(origin);
    let mut time = 0.0;
    for _ in 0..64 {
        let (length, hit) = scene.segment(origin, dir, region);
        let medium = scene.medium(region);
        if medium.is_participating() {
            return Some(((origin, dir, length, time), region));
        }
        let hit = hit?;
        time += medium.ior() * hit.t / SPEED_OF_LIGHT;
        origin += dir * hit.t;
        match scene.surface_event(&hit, origin, dir, region, 1.0) {
            SurfaceEvent::Absorbed => return None,
            SurfaceEvent::Continue {
                direction, region: r, ..
            } => {
                dir = direction;
                region = r;
            }
        }
    }
    None
}

/// Earliest single-scattering arrival over the footprint of pixel `(px, py)`,
/// minimised over a 9×9 grid of film positions covering the pixel.
pub fn first_arrival_time(scene: &Scene, px: u32, py: u32, unwarp: bool) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..9 {
        for j in 0..9 {
            let dir = scene
                .camera
                .direction(px as f64 + i as f64 / 8.0, py as f64 + j as f64 / 8.0);
            if let Some(t) = first_arrival_along(scene, dir, unwarp) {
                best = Some(best.map_or(t, |b: f64| b.min(t)));
            }
        }
    }
    best
}
