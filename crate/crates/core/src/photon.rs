//! Photon emission and time-stamped random walks producing photon beams.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::math::{Ray, Vec3};
use crate::media::{sample_free_flight, FreeFlight, SPEED_OF_LIGHT};
use crate::rng::{domain, stream};
use crate::scene::{PointLight, Scene, SurfaceEvent};
use crate::spectrum::Spectrum;

/// A stored segment of a light path inside a participating medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBeam {
    pub origin: Vec3,
    pub direction: Vec3,
    /// Extent to the next surface or medium bound [m].
    pub length: f64,
    /// Power carried by the beam [W]; already divided by the photon count.
    pub flux: Spectrum,
    /// Path time at `origin` [s].
    pub start_time: f64,
    /// Blur radius [m].
    pub radius: f64,
    /// Medium region the beam lies in.
    pub region: usize,
    /// Index of refraction of that region.
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    /// Maximum number of path vertices, counting the light. 2 keeps single scattering only.
    pub max_vertices: u32,
    /// First scattering vertex at which Russian roulette replaces albedo weighting.
    /// 1 makes every scattering event analog.
    pub rr_start: u32,
    /// Photon walks per iteration.
    pub photons: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            max_vertices: 64,
            rr_start: 4,
            photons: 10_000,
        }
    }
}

/// Counters gathered while tracing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkStats {
    pub walks: u64,
    pub beams: u64,
    pub scatter_events: u64,
    /// Walks dropped because of a non-finite flux or position.
    pub aborted: u64,
}

impl WalkStats {
    fn merge(self, o: WalkStats) -> WalkStats {
        WalkStats {
            walks: self.walks + o.walks,
            beams: self.beams + o.beams,
            scatter_events: self.scatter_events + o.scatter_events,
            aborted: self.aborted + o.aborted,
        }
    }
}

/// Uniform direction on the unit sphere.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z = 1.0 - 2.0 * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Emit one of `photons` photons from a point light. Intensity is per
/// steradian, so the flux is `4π·I / photons`.
pub fn emit_photon<R: Rng + ?Sized>(light: &PointLight, photons: u64, rng: &mut R) -> (Ray, Spectrum) {
    let dir = uniform_sphere(rng);
    let pdf = 1.0 / (4.0 * PI);
    let flux = light.intensity / (photons as f64 * pdf);
    (Ray::new(light.position, dir, 0.0), flux)
}

/// Trace one photon random walk. Beams are appended to `out`.
pub fn trace_photon_walk<R: Rng + ?Sized>(
    scene: &Scene,
    config: &WalkConfig,
    rng: &mut R,
    radius: f64,
    out: &mut Vec<PhotonBeam>,
    stats: &mut WalkStats,
) {
    stats.walks += 1;
    if scene.lights.is_empty() {
        return;
    }
    let n_lights = scene.lights.len();
    let light = &scene.lights[if n_lights == 1 {
        0
    } else {
        rng.random_range(0..n_lights)
    }];
    let (ray, flux) = emit_photon(light, config.photons, rng);
    let mut flux = flux * n_lights as f64;
    let mut origin = ray.origin;
    let mut dir = ray.direction;
    let mut time = ray.start_time;
    let mut region = scene.region_at(origin);
    let mut vertices = 1u32;
    let first = out.len();

    // generous cap; the vertex limit ends any realistic walk much earlier
    for _ in 0..100_000 {
        if vertices >= config.max_vertices {
            return;
        }
        let (length, hit) = scene.segment(origin, dir, region);
        let medium = *scene.medium(region);
        if medium.is_participating() && length.is_finite() && length > 0.0 {
            if !(flux.is_finite() && origin.is_finite() && time.is_finite()) {
                out.truncate(first);
                stats.aborted += 1;
                return;
            }
            out.push(PhotonBeam {
                origin,
                direction: dir,
                length,
                flux,
                start_time: time,
                radius,
                region,
                eta: medium.ior(),
            });
            stats.beams += 1;
            if let FreeFlight::Interaction { distance, .. } = sample_free_flight(&medium, rng) {
                if distance < length {
                    vertices += 1;
                    stats.scatter_events += 1;
                    let albedo = medium.albedo();
                    if vertices > config.rr_start {
                        let survive = albedo.min(1.0);
                        if rng.random::<f64>() >= survive {
                            return;
                        }
                        flux *= albedo / survive;
                    } else {
                        flux *= albedo;
                    }
                    if flux.is_black() {
                        return;
                    }
                    origin += dir * distance;
                    time += medium.ior() * distance / SPEED_OF_LIGHT;
                    dir = medium.phase.sample_direction(dir, rng).0;
                    continue;
                }
            }
        }
        let Some(hit) = hit else { return };
        origin += dir * hit.t;
        time += medium.ior() * hit.t / SPEED_OF_LIGHT;
        let specular = scene.surfaces[hit.surface].kind != crate::scene::SurfaceKind::MediumBoundary;
        match scene.surface_event(&hit, origin, dir, region, rng.random()) {
            SurfaceEvent::Absorbed => return,
            SurfaceEvent::Continue {
                direction,
                region: next,
                weight,
                ..
            } => {
                if specular {
                    vertices += 1;
                }
                flux *= weight;
                dir = direction;
                region = next;
                if flux.is_black() {
                    return;
                }
            }
        }
    }
}

/// Trace `config.photons` walks for one iteration. The result is
/// independent of the rayon pool size.
pub fn trace_photons(
    scene: &Scene,
    config: &WalkConfig,
    seed: u64,
    iteration: u64,
    radius: f64,
) -> (Vec<PhotonBeam>, WalkStats) {
    let chunks: Vec<(Vec<PhotonBeam>, WalkStats)> = (0..config.photons)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed ^ domain::PHOTONS, iteration, i);
            let mut beams = Vec::new();
            let mut stats = WalkStats::default();
            trace_photon_walk(scene, config, &mut rng, radius, &mut beams, &mut stats);
            (beams, stats)
        })
        .collect();
    let mut stats = WalkStats::default();
    let mut beams = Vec::with_capacity(chunks.iter().map(|c| c.0.len()).sum());
    for (b, s) in chunks {
        beams.extend(b);
        stats = stats.merge(s);
    }
    if stats.aborted > 0 {
        log::warn!("{} photon walks aborted on non-finite values", stats.aborted);
    }
    (beams, stats)
}
