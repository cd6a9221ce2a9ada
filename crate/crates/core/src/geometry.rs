//! Analytic shapes and ray intersection.

use crate::math::{Aabb, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    /// Axis-aligned box.
    Cuboid {
        min: Vec3,
        max: Vec3,
    },
    /// Infinite plane through `point`.
    Plane {
        point: Vec3,
        normal: Vec3,
    },
    Mesh(TriangleMesh),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub triangles: Vec<[Vec3; 3]>,
    pub bounds: Aabb,
}

impl TriangleMesh {
    pub fn new(triangles: Vec<[Vec3; 3]>) -> Self {
        let bounds = triangles
            .iter()
            .flat_map(|t| t.iter())
            .fold(Aabb::EMPTY, |b, &p| b.grow(p));
        Self { triangles, bounds }
    }

    /// Parse the vertex and face records of a Wavefront OBJ file. Polygons are fanned.
    pub fn from_obj(text: &str) -> Result<Self, String> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let c: Vec<f64> = it
                        .take(3)
                        .map(|s| s.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| format!("line {}: {e}", lineno + 1))?;
                    if c.len() != 3 {
                        return Err(format!("line {}: vertex needs 3 coordinates", lineno + 1));
                    }
                    vertices.push(Vec3::new(c[0], c[1], c[2]));
                }
                Some("f") => {
                    let idx: Vec<usize> = it
                        .map(|s| {
                            let first = s.split('/').next().unwrap_or("");
                            let i: i64 = first.parse().map_err(|e| format!("line {}: {e}", lineno + 1))?;
                            let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                            if resolved < 0 || resolved as usize >= vertices.len() {
                                return Err(format!("line {}: vertex index {i} out of range", lineno + 1));
                            }
                            Ok(resolved as usize)
                        })
                        .collect::<Result<_, _>>()?;
                    if idx.len() < 3 {
                        return Err(format!("line {}: face needs at least 3 vertices", lineno + 1));
                    }
                    for k in 1..idx.len() - 1 {
                        triangles.push([vertices[idx[0]], vertices[idx[k]], vertices[idx[k + 1]]]);
                    }
                }
                _ => {}
            }
        }
        if triangles.is_empty() {
            return Err("mesh contains no faces".into());
        }
        Ok(Self::new(triangles))
    }
}

/// Nearest intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeHit {
    pub t: f64,
    /// Geometric normal, outward for closed shapes.
    pub normal: Vec3,
}

impl Shape {
    /// Only spheres and boxes enclose a volume.
    pub fn is_closed(&self) -> bool {
        matches!(self, Shape::Sphere { .. } | Shape::Cuboid { .. })
    }

    pub fn contains(&self, p: Vec3) -> bool {
        match self {
            Shape::Sphere { center, radius } => (p - *center).length_squared() < radius * radius,
            Shape::Cuboid { min, max } => {
                p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y && p.z > min.z && p.z < max.z
            }
            _ => false,
        }
    }

    pub fn bounds(&self) -> Option<Aabb> {
        match self {
            Shape::Sphere { center, radius } => Some(Aabb::new(
                *center - Vec3::splat(*radius),
                *center + Vec3::splat(*radius),
            )),
            Shape::Cuboid { min, max } => Some(Aabb::new(*min, *max)),
            Shape::Plane { .. } => None,
            Shape::Mesh(m) => Some(m.bounds),
        }
    }

    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<ShapeHit> {
        match self {
            Shape::Sphere { center, radius } => {
                let oc = origin - *center;
                let b = oc.dot(dir);
                let c = oc.length_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                // numerically stable root pair
                let q = if b > 0.0 { -b - sq } else { -b + sq };
                let (mut t0, mut t1) = if q != 0.0 { (c / q, q) } else { (-b, -b) };
                if t0 > t1 {
                    std::mem::swap(&mut t0, &mut t1);
                }
                let t = if t0 > t_min && t0 < t_max {
                    t0
                } else if t1 > t_min && t1 < t_max {
                    t1
                } else {
                    return None;
                };
                let normal = (origin + dir * t - *center) / *radius;
                Some(ShapeHit { t, normal })
            }
            Shape::Cuboid { min, max } => {
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let mut near_axis = 0;
                let mut far_axis = 0;
                for axis in 0..3 {
                    let o = origin[axis];
                    let d = dir[axis];
                    if d == 0.0 {
                        if o < min[axis] || o > max[axis] {
                            return None;
                        }
                        continue;
                    }
                    let inv = 1.0 / d;
                    let mut a = (min[axis] - o) * inv;
                    let mut b = (max[axis] - o) * inv;
                    if a > b {
                        std::mem::swap(&mut a, &mut b);
                    }
                    if a > t_near {
                        t_near = a;
                        near_axis = axis;
                    }
                    if b < t_far {
                        t_far = b;
                        far_axis = axis;
                    }
                }
                if t_near > t_far {
                    return None;
                }
                let (t, axis) = if t_near > t_min && t_near < t_max {
                    (t_near, near_axis)
                } else if t_far > t_min && t_far < t_max {
                    (t_far, far_axis)
                } else {
                    return None;
                };
                let p = origin[axis] + dir[axis] * t;
                let mid = 0.5 * (min[axis] + max[axis]);
                let mut n = [0.0; 3];
                n[axis] = if p > mid { 1.0 } else { -1.0 };
                Some(ShapeHit {
                    t,
                    normal: Vec3::new(n[0], n[1], n[2]),
                })
            }
            Shape::Plane { point, normal } => {
                let denom = normal.dot(dir);
                if denom.abs() < 1e-300 {
                    return None;
                }
                let t = (*point - origin).dot(*normal) / denom;
                (t > t_min && t < t_max).then_some(ShapeHit { t, normal: *normal })
            }
            Shape::Mesh(mesh) => {
                let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
                mesh.bounds.inflate(1e-9).hit_range(origin, inv, t_min, t_max)?;
                let mut best: Option<ShapeHit> = None;
                let mut limit = t_max;
                for tri in &mesh.triangles {
                    if let Some(t) = intersect_triangle(origin, dir, tri, t_min, limit) {
                        limit = t;
                        let n = (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalized();
                        best = Some(ShapeHit { t, normal: n });
                    }
                }
                best
            }
        }
    }
}

/// Möller-Trumbore ray/triangle test.
fn intersect_triangle(origin: Vec3, dir: Vec3, tri: &[Vec3; 3], t_min: f64, t_max: f64) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = dir.dot(q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    (t > t_min && t < t_max).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_hit_from_outside_and_inside() {
        let s = Shape::Sphere {
            center: Vec3::ZERO,
            radius: 1.0,
        };
        let d = Vec3::new(0.0, 0.0, 1.0);
        let h = s.intersect(Vec3::new(0.0, 0.0, -3.0), d, 1e-9, f64::INFINITY).unwrap();
        assert!((h.t - 2.0).abs() < 1e-12);
        assert!((h.normal.z + 1.0).abs() < 1e-12);
        let h = s.intersect(Vec3::ZERO, d, 1e-9, f64::INFINITY).unwrap();
        assert!((h.t - 1.0).abs() < 1e-12);
        assert!(s.contains(Vec3::new(0.1, 0.2, 0.3)));
    }

    #[test]
    fn cuboid_hit_normals() {
        let b = Shape::Cuboid {
            min: Vec3::splat(-1.0),
            max: Vec3::splat(1.0),
        };
        let h = b
            .intersect(Vec3::new(0.2, 0.1, -5.0), Vec3::new(0.0, 0.0, 1.0), 1e-9, f64::INFINITY)
            .unwrap();
        assert!((h.t - 4.0).abs() < 1e-12);
        assert_eq!(h.normal, Vec3::new(0.0, 0.0, -1.0));
        let h = b
            .intersect(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), 1e-9, f64::INFINITY)
            .unwrap();
        assert_eq!(h.normal, Vec3::new(1.0, 0.0, 0.0));
        assert!(b
            .intersect(Vec3::new(3.0, 0.0, -5.0), Vec3::new(0.0, 0.0, 1.0), 1e-9, 1e9)
            .is_none());
    }

    #[test]
    fn obj_mesh_parses_and_intersects() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let m = TriangleMesh::from_obj(obj).unwrap();
        assert_eq!(m.triangles.len(), 2);
        let s = Shape::Mesh(m);
        let h = s
            .intersect(Vec3::new(0.25, 0.5, -1.0), Vec3::new(0.0, 0.0, 1.0), 1e-9, 10.0)
            .unwrap();
        assert!((h.t - 1.0).abs() < 1e-12);
        assert!(TriangleMesh::from_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }
}
