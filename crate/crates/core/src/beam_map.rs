//! Ray/beam intersection geometry and a bounding-volume hierarchy over beams.
//!
//! A beam of radius `R` blurs its flux over the infinite cylinder of radius
//! `R` around its line, restricted to the beam's parameter range (no end
//! caps). A camera ray intersects a beam when a non-empty piece of the ray
//! segment lies inside that region.

use crate::math::{Aabb, Vec3};
use crate::media::SPEED_OF_LIGHT;
use crate::photon::PhotonBeam;

/// Below this `sin(theta)` the ray and beam count as parallel.
pub const DEGENERATE_SIN: f64 = 1e-6;

/// A camera ray segment as seen by the beam query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayQuery {
    pub origin: Vec3,
    pub direction: Vec3,
    pub length: f64,
    /// Path time already spent between this origin and the camera [s].
    pub start_time: f64,
    /// Index of refraction charged along the ray; 0 drops the ray's travel time.
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayBeamIntersection {
    pub beam: usize,
    pub s_r_minus: f64,
    pub s_r_plus: f64,
    pub s_b_minus: f64,
    pub s_b_plus: f64,
    /// Closest approach on the ray, clamped into `[s_r_minus, s_r_plus]`.
    pub s_r: f64,
    /// Beam parameter of the point on the beam line abreast of `s_r`.
    pub s_b: f64,
    /// Scattering angle between the beam direction and the direction towards the camera.
    pub theta_b: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    /// Distance between the ray and beam lines.
    pub line_distance: f64,
    /// Beam parameter at `s_r_minus`.
    pub s_b_at_entry: f64,
    /// The unclamped closest approach lies inside both segments.
    pub closest_in_segments: bool,
    /// `sin(theta) < DEGENERATE_SIN`.
    pub degenerate: bool,
    pub t_minus: f64,
    pub t_plus: f64,
    pub t_center: f64,
}

/// Exact intersection of a ray segment with a beam's blur cylinder.
pub fn intersect_beam(query: &RayQuery, beam: &PhotonBeam, id: usize) -> Option<RayBeamIntersection> {
    let d = query.direction;
    let w = beam.direction;
    let k = d.dot(w);
    let delta = query.origin - beam.origin;
    let sb0 = delta.dot(w);
    let w0 = delta - w * sb0;
    let d_perp = d - w * k;
    let a = d_perp.length_squared();
    let b = w0.dot(d_perp);
    let c = w0.length_squared();
    let r2 = beam.radius * beam.radius;

    let (mut lo, mut hi, center) = if a < 1e-24 {
        if c >= r2 {
            return None;
        }
        (f64::NEG_INFINITY, f64::INFINITY, None)
    } else {
        let disc = b * b - a * (c - r2);
        if disc <= 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        ((-b - sq) / a, (-b + sq) / a, Some(-b / a))
    };
    lo = lo.max(0.0);
    hi = hi.min(query.length);
    if k != 0.0 {
        let e0 = -sb0 / k;
        let e1 = (beam.length - sb0) / k;
        lo = lo.max(e0.min(e1));
        hi = hi.min(e0.max(e1));
    } else if !(0.0..=beam.length).contains(&sb0) {
        return None;
    }
    if !(lo < hi) {
        return None;
    }

    let sb = |s: f64| (sb0 + k * s).clamp(0.0, beam.length);
    let (sb_lo, sb_hi) = (sb(lo), sb(hi));
    let sin_theta = a.sqrt().min(1.0);
    let cos_theta = (-k).clamp(-1.0, 1.0);
    let (s_r, closest_in_segments) = match center {
        Some(s) => (s.clamp(lo, hi), s >= lo && s <= hi),
        None => (lo, false),
    };
    let line_distance = match center {
        Some(_) => (c - b * b / a).max(0.0).sqrt(),
        None => c.sqrt(),
    };
    let time = |s: f64| beam.start_time + query.start_time + (query.eta * s + beam.eta * sb(s)) / SPEED_OF_LIGHT;
    let (t0, t1) = (time(lo), time(hi));
    Some(RayBeamIntersection {
        beam: id,
        s_r_minus: lo,
        s_r_plus: hi,
        s_b_minus: sb_lo.min(sb_hi),
        s_b_plus: sb_lo.max(sb_hi),
        s_r,
        s_b: sb(s_r),
        theta_b: cos_theta.acos(),
        cos_theta,
        sin_theta,
        line_distance,
        s_b_at_entry: sb_lo,
        closest_in_segments,
        degenerate: sin_theta < DEGENERATE_SIN,
        t_minus: t0.min(t1),
        t_plus: t0.max(t1),
        t_center: time(s_r).clamp(t0.min(t1), t0.max(t1)),
    })
}

fn beam_bounds(b: &PhotonBeam) -> Aabb {
    Aabb::from_points(b.origin, b.origin + b.direction * b.length).inflate(b.radius)
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: first index into `order`; interior: index of the left child.
    start: u32,
    /// Leaf size; 0 marks an interior node.
    count: u32,
    right: u32,
}

const LEAF_SIZE: usize = 4;
const SAH_BINS: usize = 16;

/// Beams plus a surface-area-heuristic BVH over their inflated bounds.
#[derive(Debug, Clone, Default)]
pub struct BeamMap {
    beams: Vec<PhotonBeam>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl BeamMap {
    pub fn build(beams: Vec<PhotonBeam>) -> BeamMap {
        let bounds: Vec<Aabb> = beams.iter().map(beam_bounds).collect();
        let centroids: Vec<Vec3> = bounds.iter().map(|b| b.centroid()).collect();
        let mut order: Vec<u32> = (0..beams.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * beams.len() / LEAF_SIZE + 1);
        if !beams.is_empty() {
            build_node(&bounds, &centroids, &mut order, 0, beams.len(), &mut nodes);
        }
        BeamMap { beams, order, nodes }
    }

    pub fn beams(&self) -> &[PhotonBeam] {
        &self.beams
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    /// Visit every intersection of the query with a beam, in a fixed traversal order.
    pub fn for_each_intersection(&self, query: &RayQuery, mut f: impl FnMut(&PhotonBeam, &RayBeamIntersection)) {
        if self.nodes.is_empty() || !(query.length > 0.0) {
            return;
        }
        let inv = Vec3::new(
            1.0 / query.direction.x,
            1.0 / query.direction.y,
            1.0 / query.direction.z,
        );
        let mut stack = vec![0u32];
        while let Some(index) = stack.pop() {
            let node = &self.nodes[index as usize];
            if node.bounds.hit_range(query.origin, inv, 0.0, query.length).is_none() {
                continue;
            }
            if node.count > 0 {
                let range = node.start as usize..(node.start + node.count) as usize;
                for &i in &self.order[range] {
                    let beam = &self.beams[i as usize];
                    if let Some(hit) = intersect_beam(query, beam, i as usize) {
                        f(beam, &hit);
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.start);
            }
        }
    }

    /// All intersections, sorted by beam index.
    pub fn intersect_ray(&self, query: &RayQuery) -> Vec<RayBeamIntersection> {
        let mut out = Vec::new();
        self.for_each_intersection(query, |_, h| out.push(*h));
        out.sort_by_key(|h| h.beam);
        out
    }

    /// Reference query testing every beam.
    pub fn intersect_ray_brute_force(&self, query: &RayQuery) -> Vec<RayBeamIntersection> {
        self.beams
            .iter()
            .enumerate()
            .filter_map(|(i, b)| intersect_beam(query, b, i))
            .collect()
    }
}

fn build_node(
    bounds: &[Aabb],
    centroids: &[Vec3],
    order: &mut [u32],
    offset: usize,
    count: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let slice = &mut order[offset..offset + count];
    let node_bounds = slice.iter().fold(Aabb::EMPTY, |acc, &i| acc.union(bounds[i as usize]));
    let index = nodes.len() as u32;
    nodes.push(Node {
        bounds: node_bounds,
        start: offset as u32,
        count: count as u32,
        right: 0,
    });
    if count <= LEAF_SIZE {
        return index;
    }
    let cb = slice
        .iter()
        .fold(Aabb::EMPTY, |acc, &i| acc.grow(centroids[i as usize]));
    let extent = cb.diagonal();
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = if extent[axis] <= 0.0 {
        count / 2
    } else {
        // binned SAH along the widest centroid axis
        let scale = SAH_BINS as f64 / extent[axis];
        let bin_of = |i: u32| (((centroids[i as usize][axis] - cb.min[axis]) * scale) as usize).min(SAH_BINS - 1);
        let mut bin_count = [0usize; SAH_BINS];
        let mut bin_bounds = [Aabb::EMPTY; SAH_BINS];
        for &i in slice.iter() {
            let b = bin_of(i);
            bin_count[b] += 1;
            bin_bounds[b] = bin_bounds[b].union(bounds[i as usize]);
        }
        let mut right_area = [0.0; SAH_BINS];
        let mut acc = Aabb::EMPTY;
        let mut acc_n = 0;
        let mut right_n = [0usize; SAH_BINS];
        for b in (1..SAH_BINS).rev() {
            acc = acc.union(bin_bounds[b]);
            acc_n += bin_count[b];
            right_area[b] = acc.surface_area();
            right_n[b] = acc_n;
        }
        let mut best = (f64::INFINITY, 0);
        let mut left = Aabb::EMPTY;
        let mut left_n = 0;
        for b in 1..SAH_BINS {
            left = left.union(bin_bounds[b - 1]);
            left_n += bin_count[b - 1];
            if left_n == 0 || right_n[b] == 0 {
                continue;
            }
            let cost = left.surface_area() * left_n as f64 + right_area[b] * right_n[b] as f64;
            if cost < best.0 {
                best = (cost, b);
            }
        }
        if best.0.is_finite() {
            // stable partition keeps the layout independent of anything but input order
            let (mut lhs, mut rhs): (Vec<u32>, Vec<u32>) = slice.iter().partition(|&&i| bin_of(i) < best.1);
            let n = lhs.len();
            lhs.append(&mut rhs);
            slice.copy_from_slice(&lhs);
            n
        } else {
            slice.sort_by(|&a, &b| {
                centroids[a as usize][axis]
                    .total_cmp(&centroids[b as usize][axis])
                    .then(a.cmp(&b))
            });
            count / 2
        }
    };
    let left = build_node(bounds, centroids, order, offset, mid, nodes);
    let right = build_node(bounds, centroids, order, offset + mid, count - mid, nodes);
    let node = &mut nodes[index as usize];
    node.count = 0;
    node.start = left;
    node.right = right;
    index
}
