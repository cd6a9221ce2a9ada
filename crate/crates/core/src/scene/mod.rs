//! Runtime scene: camera, film range, media regions, surfaces and lights.
//!
//! Space is partitioned into regions. Region 0 is the global medium (or
//! vacuum); every closed medium bound and every closed dielectric surface
//! adds one region. A point belongs to the smallest closed region that
//! contains it, so nesting works without any ordering rules.

pub mod description;

use std::path::Path;

use rand::Rng;
use thiserror::Error;

pub use description::{parse_scene, serialize_scene, ParseError, ParseErrors, SceneDescription};
use description::{EmissionDesc, IntegratorDesc, MaterialDesc, MediumBound, ShapeDesc};

use crate::geometry::{Shape, TriangleMesh};
use crate::math::{Aabb, Vec3};
use crate::media::{MediaError, Medium, PhaseFunction, SPEED_OF_LIGHT};
use crate::spectrum::Spectrum;

/// Offset used to step off a surface after an intersection [m].
pub const RAY_EPSILON: f64 = 1e-7;

/// Segments through an unbounded medium are cut at this optical depth; the
/// remaining transmittance is below 1e-13.
pub const MAX_OPTICAL_DEPTH: f64 = 30.0;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{0}")]
    Parse(#[from] ParseErrors),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("mesh {path}: {message}")]
    Mesh { path: String, message: String },
    #[error(transparent)]
    Media(#[from] MediaError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    /// Terminates light and camera paths.
    Diffuse(Spectrum),
    Mirror(Spectrum),
    Dielectric {
        eta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    Material(Material),
    /// Invisible bound of a medium; light passes straight through.
    MediumBoundary,
}

#[derive(Debug, Clone)]
pub struct Surface {
    pub shape: Shape,
    pub kind: SurfaceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emission {
    /// Pulse at t = 0.
    DiracDelta,
    /// Switched on at t = 0; produced from the impulse response by integration.
    Heaviside,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLight {
    pub position: Vec3,
    /// Radiant intensity [W/sr].
    pub intensity: Spectrum,
    pub emission: Emission,
}

/// Pinhole camera. Pixel (0, 0) is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub tan_half_fov: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    pub fn new(position: Vec3, look_at: Vec3, up: Vec3, fov_degrees: f64, width: u32, height: u32) -> Self {
        let forward = (look_at - position).normalized();
        let right = forward.cross(up).normalized();
        let up = right.cross(forward);
        Self {
            position,
            forward,
            right,
            up,
            tan_half_fov: (0.5 * fov_degrees.to_radians()).tan(),
            width,
            height,
        }
    }

    /// Direction through the film position `(px + u, py + v)` with `u, v` in [0, 1).
    pub fn direction(&self, px: f64, py: f64) -> Vec3 {
        let aspect = self.width as f64 / self.height as f64;
        let x = (2.0 * px / self.width as f64 - 1.0) * self.tan_half_fov * aspect;
        let y = (1.0 - 2.0 * py / self.height as f64) * self.tan_half_fov;
        (self.forward + self.right * x + self.up * y).normalized()
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Time axis of the film, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRange {
    pub t_min: f64,
    pub t_max: f64,
    pub bins: usize,
}

impl TimeRange {
    pub fn bin_width(&self) -> f64 {
        (self.t_max - self.t_min) / self.bins as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    /// Geometric normal, outward for closed shapes.
    pub normal: Vec3,
    pub surface: usize,
}

/// Outcome of a path meeting a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceEvent {
    /// Continue with a new direction in `region`. `weight` multiplies flux;
    /// `radiance_scale` additionally applies to camera-side radiance.
    Continue {
        direction: Vec3,
        region: usize,
        weight: Spectrum,
        radiance_scale: f64,
    },
    Absorbed,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub camera: Camera,
    pub time: TimeRange,
    /// Region 0 is the global medium or vacuum.
    pub regions: Vec<Medium>,
    pub surfaces: Vec<Surface>,
    pub lights: Vec<PointLight>,
    pub integrator: IntegratorDesc,
    pub bounds: Aabb,
    // (surface index, region index, volume) of every region-defining shape
    region_shapes: Vec<(usize, usize, f64)>,
}

fn v(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn build_shape(desc: &ShapeDesc, base: &Path) -> Result<Shape, SceneError> {
    Ok(match desc {
        ShapeDesc::Sphere { center, radius } => Shape::Sphere {
            center: v(*center),
            radius: *radius,
        },
        ShapeDesc::Cuboid { min, max } => Shape::Cuboid {
            min: v(*min),
            max: v(*max),
        },
        ShapeDesc::Plane { point, normal } => Shape::Plane {
            point: v(*point),
            normal: v(*normal).normalized(),
        },
        ShapeDesc::Mesh { path } => {
            let full = base.join(path);
            let text = std::fs::read_to_string(&full).map_err(|source| SceneError::Io {
                path: full.display().to_string(),
                source,
            })?;
            Shape::Mesh(TriangleMesh::from_obj(&text).map_err(|message| SceneError::Mesh {
                path: full.display().to_string(),
                message,
            })?)
        }
    })
}

fn volume(shape: &Shape) -> f64 {
    match shape {
        Shape::Sphere { radius, .. } => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
        Shape::Cuboid { min, max } => {
            let d = *max - *min;
            d.x * d.y * d.z
        }
        _ => f64::INFINITY,
    }
}

/// Unpolarized Fresnel reflectance for light going from `eta_i` to `eta_t`.
pub fn fresnel_dielectric(cos_i: f64, eta_i: f64, eta_t: f64) -> f64 {
    let cos_i = cos_i.clamp(0.0, 1.0);
    let sin2_t = (eta_i / eta_t).powi(2) * (1.0 - cos_i * cos_i);
    if sin2_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    let r_par = (eta_t * cos_i - eta_i * cos_t) / (eta_t * cos_i + eta_i * cos_t);
    let r_perp = (eta_i * cos_i - eta_t * cos_t) / (eta_i * cos_i + eta_t * cos_t);
    0.5 * (r_par * r_par + r_perp * r_perp)
}

impl Scene {
    /// Load and validate a scene file; mesh paths resolve relative to its directory.
    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let desc = parse_scene(&text)?;
        Scene::from_description(&desc, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_description(desc: &SceneDescription, base: &Path) -> Result<Scene, SceneError> {
        let c = &desc.camera;
        let camera = Camera::new(
            v(c.position),
            v(c.look_at),
            v(c.up),
            c.fov,
            c.resolution.0,
            c.resolution.1,
        );
        let time = TimeRange {
            t_min: desc.film.t_min_ns * 1e-9,
            t_max: desc.film.t_max_ns * 1e-9,
            bins: desc.film.bins as usize,
        };

        let mut regions = vec![Medium::vacuum()];
        let mut surfaces = Vec::new();
        let mut region_shapes = Vec::new();
        let mut bounds = Aabb::EMPTY.grow(camera.position);

        for m in &desc.media {
            let phase = if m.g == 0.0 {
                PhaseFunction::Isotropic
            } else {
                PhaseFunction::henyey_greenstein(m.g)?
            };
            let medium = Medium::new(m.sigma_a, m.sigma_s, phase, m.eta)?;
            match &m.bound {
                MediumBound::Global => regions[0] = medium,
                MediumBound::Shape(s) => {
                    let shape = build_shape(s, base)?;
                    bounds = bounds.union(shape.bounds().unwrap_or(Aabb::EMPTY));
                    region_shapes.push((surfaces.len(), regions.len(), volume(&shape)));
                    regions.push(medium);
                    surfaces.push(Surface {
                        shape,
                        kind: SurfaceKind::MediumBoundary,
                    });
                }
            }
        }
        for s in &desc.surfaces {
            let shape = build_shape(&s.shape, base)?;
            if let Some(b) = shape.bounds() {
                bounds = bounds.union(b);
            }
            let material = match s.material {
                MaterialDesc::Diffuse(a) => Material::Diffuse(Spectrum(a)),
                MaterialDesc::Mirror(a) => Material::Mirror(Spectrum(a)),
                MaterialDesc::Dielectric(eta) => {
                    // a medium with the same bound already owns this volume
                    let shared = region_shapes.iter().any(|&(i, _, _)| shape_eq(&surfaces[i], &shape));
                    if !shared {
                        region_shapes.push((surfaces.len(), regions.len(), volume(&shape)));
                        regions.push(Medium::clear(eta)?);
                    }
                    Material::Dielectric { eta }
                }
            };
            surfaces.push(Surface {
                shape,
                kind: SurfaceKind::Material(material),
            });
        }
        let lights: Vec<PointLight> = desc
            .lights
            .iter()
            .map(|l| PointLight {
                position: v(l.position),
                intensity: Spectrum(l.power),
                emission: match l.emission {
                    EmissionDesc::Delta => Emission::DiracDelta,
                    EmissionDesc::Heaviside => Emission::Heaviside,
                },
            })
            .collect();
        for l in &lights {
            bounds = bounds.grow(l.position);
        }
        if bounds.diagonal().length() < 1e-6 {
            bounds = bounds.inflate(0.5);
        }
        // stable tie-break: medium-owned shapes were pushed first
        region_shapes.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)));

        Ok(Scene {
            camera,
            time,
            regions,
            surfaces,
            lights,
            integrator: desc.integrator.clone(),
            bounds,
            region_shapes,
        })
    }

    /// Region index of the smallest closed region containing `p`.
    pub fn region_at(&self, p: Vec3) -> usize {
        self.region_shapes
            .iter()
            .find(|&&(s, _, _)| self.surfaces[s].shape.contains(p))
            .map_or(0, |&(_, r, _)| r)
    }

    pub fn medium(&self, region: usize) -> &Medium {
        &self.regions[region]
    }

    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        for (i, s) in self.surfaces.iter().enumerate() {
            if let Some(h) = s.shape.intersect(origin, dir, RAY_EPSILON, limit) {
                limit = h.t;
                best = Some(Hit {
                    t: h.t,
                    normal: h.normal,
                    surface: i,
                });
            }
        }
        best
    }

    /// Distance until the path leaves `region` along `dir`, and the surface hit there.
    /// Unbounded segments through a participating medium are cut at
    /// [`MAX_OPTICAL_DEPTH`]; in a clear region they stay infinite.
    pub fn segment(&self, origin: Vec3, dir: Vec3, region: usize) -> (f64, Option<Hit>) {
        match self.intersect(origin, dir, f64::INFINITY) {
            Some(h) => (h.t, Some(h)),
            None => {
                let st = self.regions[region].sigma_t();
                if st > 0.0 {
                    (MAX_OPTICAL_DEPTH / st, None)
                } else {
                    (f64::INFINITY, None)
                }
            }
        }
    }

    /// Resolve what happens when a path in `region` travelling along `dir` meets `hit` at `p`.
    /// `u` is a uniform number used for the Fresnel choice.
    pub fn surface_event(&self, hit: &Hit, p: Vec3, dir: Vec3, region: usize, u: f64) -> SurfaceEvent {
        let pass = |d: Vec3| SurfaceEvent::Continue {
            direction: d,
            region: self.region_at(p + d * RAY_EPSILON),
            weight: Spectrum::ONE,
            radiance_scale: 1.0,
        };
        match self.surfaces[hit.surface].kind {
            SurfaceKind::MediumBoundary => pass(dir),
            SurfaceKind::Material(Material::Diffuse(_)) => SurfaceEvent::Absorbed,
            SurfaceKind::Material(Material::Mirror(r)) => {
                let d = dir.reflect(hit.normal).normalized();
                SurfaceEvent::Continue {
                    direction: d,
                    region: self.region_at(p + d * RAY_EPSILON),
                    weight: r,
                    radiance_scale: 1.0,
                }
            }
            SurfaceKind::Material(Material::Dielectric { .. }) => {
                let mut n = hit.normal;
                let mut cos_i = -dir.dot(n);
                if cos_i < 0.0 {
                    n = -n;
                    cos_i = -cos_i;
                }
                let other = self.region_at(p - n * RAY_EPSILON);
                let eta_i = self.regions[region].ior();
                let eta_t = self.regions[other].ior();
                if eta_i == eta_t {
                    return pass(dir);
                }
                let f = fresnel_dielectric(cos_i, eta_i, eta_t);
                if u < f {
                    let d = dir.reflect(n).normalized();
                    return SurfaceEvent::Continue {
                        direction: d,
                        region,
                        weight: Spectrum::ONE,
                        radiance_scale: 1.0,
                    };
                }
                let eta = eta_i / eta_t;
                let sin2_t = eta * eta * (1.0 - cos_i * cos_i);
                let cos_t = (1.0 - sin2_t).max(0.0).sqrt();
                let d = (dir * eta + n * (eta * cos_i - cos_t)).normalized();
                SurfaceEvent::Continue {
                    direction: d,
                    region: other,
                    weight: Spectrum::ONE,
                    radiance_scale: eta * eta,
                }
            }
        }
    }

    /// Transmittance and time of flight from `from` (inside `region`) to `to`
    /// along the straight line. Only medium bounds are crossed; any material
    /// surface blocks the connection.
    pub fn shadow_path(&self, from: Vec3, region: usize, to: Vec3) -> Option<(f64, f64)> {
        let mut p = from;
        let mut region = region;
        let mut optical = 0.0f64;
        let mut time = 0.0;
        loop {
            let delta = to - p;
            let dist = delta.length();
            if dist <= RAY_EPSILON {
                return Some(((-optical).exp(), time));
            }
            let dir = delta / dist;
            let m = &self.regions[region];
            match self.intersect(p, dir, dist) {
                None => {
                    optical += m.sigma_t() * dist;
                    time += m.ior() * dist / SPEED_OF_LIGHT;
                    return Some(((-optical).exp(), time));
                }
                Some(h) => {
                    if self.surfaces[h.surface].kind != SurfaceKind::MediumBoundary {
                        return None;
                    }
                    optical += m.sigma_t() * h.t;
                    time += m.ior() * h.t / SPEED_OF_LIGHT;
                    p += dir * h.t;
                    region = self.region_at(p + dir * RAY_EPSILON);
                }
            }
        }
    }

    /// Time of flight along a straight line of length `distance` from `origin`,
    /// transmitting through every surface without bending. Each piece is
    /// charged at the index of refraction of the region it lies in.
    pub fn straight_path_time(&self, origin: Vec3, dir: Vec3, distance: f64) -> f64 {
        let mut travelled = 0.0;
        let mut time = 0.0;
        let mut p = origin;
        let mut region = self.region_at(origin + dir * RAY_EPSILON);
        while travelled < distance {
            let remaining = distance - travelled;
            let step = self.intersect(p, dir, remaining).map_or(remaining, |h| h.t);
            time += self.regions[region].ior() * step / SPEED_OF_LIGHT;
            travelled += step;
            p = origin + dir * travelled;
            region = self.region_at(p + dir * RAY_EPSILON);
        }
        time
    }

    /// Trace the deterministic part of a camera path through pixel `(px, py)`
    /// (with sub-pixel offsets drawn from `rng`): straight through medium bounds,
    /// specular at mirrors and dielectrics, stopping at diffuse surfaces.
    pub fn camera_path<R: Rng + ?Sized>(&self, px: u32, py: u32, rng: &mut R, max_bounces: u32) -> Vec<CameraSegment> {
        let u: f64 = rng.random();
        let w: f64 = rng.random();
        let mut dir = self.camera.direction(px as f64 + u, py as f64 + w);
        let mut origin = self.camera.position;
        let mut region = self.region_at(origin);
        let mut weight = Spectrum::ONE;
        let mut time = 0.0;
        let mut segments = Vec::new();
        for _ in 0..=max_bounces {
            let (length, hit) = self.segment(origin, dir, region);
            let medium = &self.regions[region];
            if medium.is_participating() && length.is_finite() {
                segments.push(CameraSegment {
                    origin,
                    direction: dir,
                    length,
                    region,
                    weight,
                    start_time: time,
                });
            }
            let Some(hit) = hit else { break };
            time += medium.ior() * length / SPEED_OF_LIGHT;
            weight *= (-medium.sigma_t() * length).exp();
            let p = origin + dir * hit.t;
            match self.surface_event(&hit, p, dir, region, rng.random()) {
                SurfaceEvent::Absorbed => break,
                SurfaceEvent::Continue {
                    direction,
                    region: next,
                    weight: w,
                    radiance_scale,
                } => {
                    weight = weight * w * radiance_scale;
                    dir = direction;
                    region = next;
                    origin = p;
                }
            }
            if weight.is_black() {
                break;
            }
        }
        segments
    }
}

fn shape_eq(s: &Surface, shape: &Shape) -> bool {
    &s.shape == shape
}

/// One straight piece of a camera path inside a participating medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSegment {
    pub origin: Vec3,
    pub direction: Vec3,
    pub length: f64,
    pub region: usize,
    /// Product of surface weights and transmittance from the camera to `origin`.
    pub weight: Spectrum,
    /// Time of flight from `origin` to the camera [s].
    pub start_time: f64,
}
