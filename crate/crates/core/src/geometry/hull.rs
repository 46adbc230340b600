use std::collections::HashSet;

use nalgebra::Isometry3;
use thiserror::Error;

use super::{Aabb, Point, Vec3};

/// Separation margin below which hulls are considered touching.
pub const HULL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum HullError {
    #[error("convex hull needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("point set is flat or degenerate; no 3D hull exists")]
    Degenerate,
}

/// Oriented plane `normal . x = offset`, normal pointing out of the hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, p: &Point) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    pub vertices: Vec<Point>,
    pub faces: Vec<Plane>,
    /// Triangulated faces, indexing `vertices`.
    pub triangles: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
    edge_dirs: Vec<Vec3>,
}

impl ConvexHull {
    /// Incremental hull. Rejects flat or degenerate input.
    pub fn from_points(points: &[Point]) -> Result<Self, HullError> {
        if points.len() < 4 {
            return Err(HullError::TooFewPoints(points.len()));
        }
        let scale = Aabb::from_points(points).unwrap().longest_side().max(1e-12);
        let eps = 1e-10 * scale;

        let i0 = (0..points.len()).min_by(|&a, &b| points[a].x.partial_cmp(&points[b].x).unwrap()).unwrap();
        let i1 = argmax(points, |p| (p - points[i0]).norm());
        let dir = (points[i1] - points[i0]).normalize();
        let i2 = argmax(points, |p| {
            let v = p - points[i0];
            (v - dir * v.dot(&dir)).norm()
        });
        let n = (points[i1] - points[i0]).cross(&(points[i2] - points[i0]));
        if n.norm() <= eps * scale {
            return Err(HullError::Degenerate);
        }
        let n = n.normalize();
        let i3 = argmax(points, |p| (p - points[i0]).dot(&n).abs());
        if (points[i3] - points[i0]).dot(&n).abs() <= eps * 10.0 {
            return Err(HullError::Degenerate);
        }

        let interior = Point::from((points[i0].coords + points[i1].coords + points[i2].coords + points[i3].coords) / 4.0);
        let mut faces: Vec<Option<([usize; 3], Plane)>> = Vec::new();
        let make = |v: [usize; 3]| -> Option<([usize; 3], Plane)> {
            let normal = (points[v[1]] - points[v[0]]).cross(&(points[v[2]] - points[v[0]]));
            let len = normal.norm();
            if len <= 1e-300 {
                return None;
            }
            let normal = normal / len;
            Some((v, Plane { normal, offset: normal.dot(&points[v[0]].coords) }))
        };
        for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
            let (v, plane) = make(tri).ok_or(HullError::Degenerate)?;
            if plane.signed_distance(&interior) > 0.0 {
                faces.push(make([v[0], v[2], v[1]]));
            } else {
                faces.push(Some((v, plane)));
            }
        }

        for (pi, p) in points.iter().enumerate() {
            if [i0, i1, i2, i3].contains(&pi) {
                continue;
            }
            let visible: Vec<usize> = faces
                .iter()
                .enumerate()
                .filter_map(|(f, face)| face.as_ref().filter(|(_, pl)| pl.signed_distance(p) > eps).map(|_| f))
                .collect();
            if visible.is_empty() {
                continue;
            }
            let mut directed: HashSet<(usize, usize)> = HashSet::new();
            for &f in &visible {
                let (v, _) = faces[f].unwrap();
                for e in 0..3 {
                    directed.insert((v[e], v[(e + 1) % 3]));
                }
            }
            let horizon: Vec<(usize, usize)> = visible
                .iter()
                .flat_map(|&f| {
                    let (v, _) = faces[f].unwrap();
                    (0..3).map(move |e| (v[e], v[(e + 1) % 3]))
                })
                .filter(|&(a, b)| !directed.contains(&(b, a)))
                .collect();
            for &f in &visible {
                faces[f] = None;
            }
            for (a, b) in horizon {
                faces.push(make([a, b, pi]));
            }
        }

        let faces: Vec<([usize; 3], Plane)> = faces.into_iter().flatten().collect();
        let mut remap = vec![usize::MAX; points.len()];
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(faces.len());
        for (v, _) in &faces {
            let mut t = [0usize; 3];
            for k in 0..3 {
                if remap[v[k]] == usize::MAX {
                    remap[v[k]] = vertices.len();
                    vertices.push(points[v[k]]);
                }
                t[k] = remap[v[k]];
            }
            triangles.push(t);
        }
        let planes = faces.iter().map(|(_, p)| *p).collect();
        Ok(Self::assemble(vertices, planes, triangles))
    }

    fn assemble(vertices: Vec<Point>, faces: Vec<Plane>, triangles: Vec<[usize; 3]>) -> Self {
        let normals = dedup_directions(faces.iter().map(|f| f.normal));
        let edge_dirs = dedup_directions(triangles.iter().flat_map(|t| {
            let vs = &vertices;
            (0..3).filter_map(move |e| {
                let d = vs[t[(e + 1) % 3]] - vs[t[e]];
                (d.norm() > 1e-12).then(|| d.normalize())
            })
        }));
        Self { vertices, faces, triangles, normals, edge_dirs }
    }

    /// Rigidly moved copy.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        let vertices: Vec<Point> = self.vertices.iter().map(|v| iso * v).collect();
        let faces = self
            .faces
            .iter()
            .map(|f| {
                let normal = iso.rotation * f.normal;
                Plane { normal, offset: f.offset + normal.dot(&iso.translation.vector) }
            })
            .collect();
        Self {
            vertices,
            faces,
            triangles: self.triangles.clone(),
            normals: self.normals.iter().map(|n| iso.rotation * n).collect(),
            edge_dirs: self.edge_dirs.iter().map(|d| iso.rotation * d).collect(),
        }
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.faces.iter().all(|f| f.signed_distance(p) <= tol)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices).unwrap()
    }

    fn project(&self, axis: &Vec3) -> (f64, f64) {
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let d = axis.dot(&v.coords);
            (lo.min(d), hi.max(d))
        })
    }
}

fn argmax(points: &[Point], f: impl Fn(&Point) -> f64) -> usize {
    (0..points.len()).max_by(|&a, &b| f(&points[a]).partial_cmp(&f(&points[b])).unwrap()).unwrap()
}

/// Unit directions with parallel and anti-parallel duplicates removed.
fn dedup_directions(dirs: impl Iterator<Item = Vec3>) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    for d in dirs {
        if !out.iter().any(|o| o.cross(&d).norm() < 1e-9) {
            out.push(d);
        }
    }
    out
}

/// True iff a plane strictly separates the hulls (gap above the tolerance).
/// Separating-axis test over face normals and edge-edge cross products.
pub fn convex_hulls_disjoint(a: &ConvexHull, b: &ConvexHull) -> bool {
    let separated = |axis: &Vec3| {
        let (alo, ahi) = a.project(axis);
        let (blo, bhi) = b.project(axis);
        ahi < blo - HULL_TOLERANCE || bhi < alo - HULL_TOLERANCE
    };
    if a.normals.iter().chain(b.normals.iter()).any(separated) {
        return true;
    }
    for ea in &a.edge_dirs {
        for eb in &b.edge_dirs {
            let c = ea.cross(eb);
            let len = c.norm();
            if len > 1e-9 && separated(&(c / len)) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Mesh;
    use nalgebra::{Translation3, UnitQuaternion};

    fn cube_hull(lo: [f64; 3], hi: [f64; 3]) -> ConvexHull {
        ConvexHull::from_points(&Mesh::cuboid(&Aabb::from_corners(lo, hi)).vertices).unwrap()
    }

    #[test]
    fn cube_hull_has_all_corners() {
        let h = cube_hull([0.0; 3], [1.0; 3]);
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.triangles.len(), 12);
        for v in &h.vertices {
            for f in &h.faces {
                assert!(f.signed_distance(v) <= 1e-9);
            }
        }
    }

    #[test]
    fn flat_points_rejected() {
        let pts = [Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0), Point::new(1.0, 1.0, 0.0)];
        assert_eq!(ConvexHull::from_points(&pts).unwrap_err(), HullError::Degenerate);
    }

    #[test]
    fn separated_and_identical() {
        let a = cube_hull([0.0; 3], [1.0; 3]);
        let b = cube_hull([4.0, 0.0, 0.0], [5.0, 1.0, 1.0]);
        assert!(convex_hulls_disjoint(&a, &b));
        assert!(!convex_hulls_disjoint(&a, &a));
    }

    #[test]
    fn touching_is_not_disjoint() {
        let a = cube_hull([0.0; 3], [1.0; 3]);
        let b = cube_hull([1.0, 0.0, 0.0], [2.0, 1.0, 1.0]);
        assert!(!convex_hulls_disjoint(&a, &b));
    }

    #[test]
    fn edge_edge_separation_needs_cross_axes() {
        // Two cubes rotated 45 degrees about different axes, edges facing.
        let a = cube_hull([-0.5; 3], [0.5; 3]).transformed(&Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_4),
        ));
        let iso = Isometry3::from_parts(
            Translation3::new(1.45, 0.0, 0.0),
            UnitQuaternion::from_euler_angles(std::f64::consts::FRAC_PI_4, 0.0, 0.0),
        );
        let b = cube_hull([-0.5; 3], [0.5; 3]).transformed(&iso);
        assert!(convex_hulls_disjoint(&a, &b));
        assert!(convex_hulls_disjoint(&b, &a));
    }

    #[test]
    fn hull_of_interior_points_ignores_them() {
        let mut pts = Mesh::cuboid(&Aabb::from_corners([0.0; 3], [2.0; 3])).vertices;
        pts.push(Point::new(1.0, 1.0, 1.0));
        pts.push(Point::new(1.0, 1.0, 2.0)); // on a face
        let h = ConvexHull::from_points(&pts).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert!(pts.iter().all(|p| h.contains(p, 1e-9)));
    }
}
