//! Grid-sampled signed distance fields.
//!
//! Magnitudes come from exact point-to-triangle distances (accelerated by a
//! BVH); signs from ray parity along three near-axis scanlines with majority
//! voting. Queries interpolate trilinearly inside the grid and fall back to
//! a conservative positive bound outside it.

use super::bvh::TriangleBvh;
use super::{Aabb, Mesh, MeshError, Point, Vec3};
use crate::exec::{map_indices, Exec};

pub const DEFAULT_SDF_RESOLUTION: usize = 64;
const MARGIN_CELLS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    pub origin: Point,
    pub spacing: f64,
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl SdfGrid {
    /// Builds the field with `resolution` cells along the mesh's longest
    /// bounding-box axis.
    pub fn build(mesh: &Mesh, resolution: usize) -> Result<Self, MeshError> {
        Self::build_with(mesh, resolution, Exec::Parallel)
    }

    pub fn build_with(mesh: &Mesh, resolution: usize, exec: Exec) -> Result<Self, MeshError> {
        mesh.check_watertight()?;
        let resolution = resolution.max(2);
        let bounds = mesh.aabb();
        let spacing = bounds.longest_side() / resolution as f64;
        let origin = bounds.min - Vec3::repeat(spacing * MARGIN_CELLS as f64);
        let ext = bounds.extent();
        let mut dims = [0usize; 3];
        for i in 0..3 {
            dims[i] = (ext[i] / spacing).ceil() as usize + 1 + 2 * MARGIN_CELLS;
        }
        let grid = SdfGrid { origin, spacing, dims, values: Vec::new() };
        let bvh = TriangleBvh::new(mesh);
        let tris: Vec<[Point; 3]> = (0..mesh.triangles.len()).map(|t| mesh.triangle(t)).collect();

        // Inside votes per sample, one pass per ray axis.
        let mut votes = vec![0u8; dims[0] * dims[1] * dims[2]];
        for axis in 0..3 {
            let u = (axis + 1) % 3;
            let v = (axis + 2) % 3;
            let lines = map_indices(exec, dims[u] * dims[v], |line| {
                let (iu, iv) = (line % dims[u], line / dims[u]);
                // Irrational offsets keep scanlines off mesh edges and vertices.
                let pu = origin[u] + iu as f64 * spacing + spacing * 1.234_567e-4;
                let pv = origin[v] + iv as f64 * spacing + spacing * 2.718_281e-4;
                let mut hits = line_crossings(&tris, axis, pu, pv);
                hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
                (0..dims[axis])
                    .map(|ia| {
                        let c = origin[axis] + ia as f64 * spacing;
                        let after = hits.len() - hits.partition_point(|&h| h <= c);
                        after % 2 == 1
                    })
                    .collect::<Vec<bool>>()
            });
            for (line, inside) in lines.into_iter().enumerate() {
                let (iu, iv) = (line % dims[u], line / dims[u]);
                for (ia, is_in) in inside.into_iter().enumerate() {
                    if is_in {
                        let mut ijk = [0usize; 3];
                        ijk[axis] = ia;
                        ijk[u] = iu;
                        ijk[v] = iv;
                        votes[grid.index(ijk)] += 1;
                    }
                }
            }
        }

        let plane = dims[0] * dims[1];
        let slabs = map_indices(exec, dims[2], |k| {
            let mut out = Vec::with_capacity(plane);
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let p = grid.sample_point([i, j, k]);
                    let d = bvh.distance(&p);
                    let inside = votes[grid.index([i, j, k])] >= 2;
                    out.push(if inside { -d } else { d });
                }
            }
            out
        });
        let values = slabs.into_iter().flatten().collect();
        Ok(SdfGrid { values, ..grid })
    }

    #[inline]
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    pub fn sample_point(&self, ijk: [usize; 3]) -> Point {
        self.origin + Vec3::new(ijk[0] as f64, ijk[1] as f64, ijk[2] as f64) * self.spacing
    }

    pub fn sample(&self, ijk: [usize; 3]) -> f64 {
        self.values[self.index(ijk)]
    }

    pub fn bounds(&self) -> Aabb {
        let max = self.sample_point([self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1]);
        Aabb { min: self.origin, max }
    }

    /// Signed distance at an arbitrary point. Total: points outside the grid
    /// get the boundary value plus their distance to the grid box.
    pub fn query(&self, p: &Point) -> f64 {
        let b = self.bounds();
        let outside = b.distance_to(p);
        let q = if outside > 0.0 { b.clamp(p) } else { *p };
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for i in 0..3 {
            let x = (q[i] - self.origin[i]) / self.spacing;
            let cell = (x.floor().max(0.0) as usize).min(self.dims[i] - 2);
            base[i] = cell;
            frac[i] = (x - cell as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            for i in 0..3 {
                w *= if o[i] == 1 { frac[i] } else { 1.0 - frac[i] };
            }
            if w != 0.0 {
                acc += w * self.sample([base[0] + o[0], base[1] + o[1], base[2] + o[2]]);
            }
        }
        if outside > 0.0 {
            acc.max(0.0) + outside
        } else {
            acc
        }
    }
}

/// Coordinates along `axis` where the line `(u, v) = (pu, pv)` crosses a
/// triangle.
fn line_crossings(tris: &[[Point; 3]], axis: usize, pu: f64, pv: f64) -> Vec<f64> {
    let u = (axis + 1) % 3;
    let v = (axis + 2) % 3;
    let mut hits = Vec::new();
    for t in tris {
        let (a, b, c) = (&t[0], &t[1], &t[2]);
        let lo_u = a[u].min(b[u]).min(c[u]);
        let hi_u = a[u].max(b[u]).max(c[u]);
        let lo_v = a[v].min(b[v]).min(c[v]);
        let hi_v = a[v].max(b[v]).max(c[v]);
        if pu < lo_u || pu > hi_u || pv < lo_v || pv > hi_v {
            continue;
        }
        let area = (b[u] - a[u]) * (c[v] - a[v]) - (c[u] - a[u]) * (b[v] - a[v]);
        if area.abs() < 1e-18 {
            continue;
        }
        let w0 = ((b[u] - pu) * (c[v] - pv) - (c[u] - pu) * (b[v] - pv)) / area;
        let w1 = ((c[u] - pu) * (a[v] - pv) - (a[u] - pu) * (c[v] - pv)) / area;
        let w2 = 1.0 - w0 - w1;
        if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
            continue;
        }
        hits.push(w0 * a[axis] + w1 * b[axis] + w2 * c[axis]);
    }
    hits
}

/// Exact Euclidean distance from `p` to a triangle (closest-point regions).
pub fn point_triangle_distance(p: &Point, tri: &[Point; 3]) -> f64 {
    let (a, b, c) = (tri[0], tri[1], tri[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (p - (a + ab * t)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (p - (a + ac * t)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * t)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}
