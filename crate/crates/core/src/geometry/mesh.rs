use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Aabb, Point, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("triangle {tri} references vertex {index} but mesh has {count} vertices")]
    IndexOutOfRange { tri: usize, index: u32, count: usize },
    #[error("mesh has {0} vertices; at least 4 are needed for a solid")]
    TooFewVertices(usize),
    #[error("mesh is not watertight: edge ({a}, {b}) is used {forward} times forward and {backward} times backward")]
    OpenEdge { a: u32, b: u32, forward: usize, backward: usize },
    #[error("mesh has degenerate triangle {0}")]
    DegenerateTriangle(usize),
}

/// Triangle mesh in part-local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<Point>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i as usize >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange { tri: t, index: i, count: vertices.len() });
                }
            }
        }
        Ok(Self { vertices, triangles })
    }

    /// Closed box mesh with outward-facing triangles.
    pub fn cuboid(b: &Aabb) -> Self {
        Self::union_of_boxes(std::slice::from_ref(b))
    }

    /// Watertight boundary of the union of axis-aligned boxes.
    ///
    /// The union is voxelized on the rectilinear grid spanned by every box
    /// breakpoint, and only faces between filled and empty cells are emitted,
    /// so shared walls disappear and no T-junctions occur.
    pub fn union_of_boxes(boxes: &[Aabb]) -> Self {
        Self::boxes_minus(boxes, &[])
    }

    /// Boundary of the union of `add` with every box of `cut` removed.
    pub fn boxes_minus(add: &[Aabb], cut: &[Aabb]) -> Self {
        let mut coords: [Vec<f64>; 3] = Default::default();
        for b in add.iter().chain(cut) {
            for (axis, c) in coords.iter_mut().enumerate() {
                c.push(b.min[axis]);
                c.push(b.max[axis]);
            }
        }
        for c in coords.iter_mut() {
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            c.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        }
        let n = [coords[0].len() - 1, coords[1].len() - 1, coords[2].len() - 1];
        let filled = |i: isize, j: isize, k: isize| -> bool {
            if i < 0 || j < 0 || k < 0 || i >= n[0] as isize || j >= n[1] as isize || k >= n[2] as isize {
                return false;
            }
            let c = Point::new(
                0.5 * (coords[0][i as usize] + coords[0][i as usize + 1]),
                0.5 * (coords[1][j as usize] + coords[1][j as usize + 1]),
                0.5 * (coords[2][k as usize] + coords[2][k as usize + 1]),
            );
            add.iter().any(|b| b.contains(&c)) && !cut.iter().any(|b| b.contains(&c))
        };

        let mut index: HashMap<[usize; 3], u32> = HashMap::new();
        let mut vertices = Vec::new();
        let mut vid = |g: [usize; 3], vertices: &mut Vec<Point>| -> u32 {
            *index.entry(g).or_insert_with(|| {
                vertices.push(Point::new(coords[0][g[0]], coords[1][g[1]], coords[2][g[2]]));
                (vertices.len() - 1) as u32
            })
        };
        let mut triangles = Vec::new();
        for i in 0..n[0] {
            for j in 0..n[1] {
                for k in 0..n[2] {
                    if !filled(i as isize, j as isize, k as isize) {
                        continue;
                    }
                    let cell = [i, j, k];
                    for axis in 0..3 {
                        for side in [0usize, 1] {
                            let mut nb = [i as isize, j as isize, k as isize];
                            nb[axis] += if side == 1 { 1 } else { -1 };
                            if filled(nb[0], nb[1], nb[2]) {
                                continue;
                            }
                            // Quad on the face plane, wound counter-clockwise seen from outside.
                            let u = (axis + 1) % 3;
                            let v = (axis + 2) % 3;
                            let corner = |du: usize, dv: usize| {
                                let mut g = cell;
                                g[axis] += side;
                                g[u] += du;
                                g[v] += dv;
                                g
                            };
                            let q = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                            let ids: Vec<u32> = q.iter().map(|g| vid(*g, &mut vertices)).collect();
                            if side == 1 {
                                triangles.push([ids[0], ids[1], ids[2]]);
                                triangles.push([ids[0], ids[2], ids[3]]);
                            } else {
                                triangles.push([ids[0], ids[2], ids[1]]);
                                triangles.push([ids[0], ids[3], ids[2]]);
                            }
                        }
                    }
                }
            }
        }
        Self { vertices, triangles }
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices).unwrap_or(Aabb { min: Point::origin(), max: Point::origin() })
    }

    pub fn triangle(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    /// Every directed edge must be matched by its reverse, which holds exactly
    /// for closed, consistently oriented surfaces.
    pub fn check_watertight(&self) -> Result<(), MeshError> {
        if self.vertices.len() < 4 {
            return Err(MeshError::TooFewVertices(self.vertices.len()));
        }
        let mut counts: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = self.triangle(t);
            if (b - a).cross(&(c - a)).norm() <= 1e-14 {
                return Err(MeshError::DegenerateTriangle(t));
            }
            for e in 0..3 {
                let (p, q) = (tri[e], tri[(e + 1) % 3]);
                if p < q {
                    counts.entry((p, q)).or_default().0 += 1;
                } else {
                    counts.entry((q, p)).or_default().1 += 1;
                }
            }
        }
        for ((a, b), (forward, backward)) in counts {
            if forward != backward {
                return Err(MeshError::OpenEdge { a, b, forward, backward });
            }
        }
        Ok(())
    }

    /// Enclosed volume (positive for outward orientation).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .enumerate()
            .map(|(t, _)| {
                let [a, b, c] = self.triangle(t);
                a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
            })
            .sum()
    }

    /// Unique undirected edges.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// Vertices plus evenly spaced points on every edge longer than
    /// `max_segment`, so no sampled segment exceeds that length.
    pub fn surface_samples(&self, max_segment: f64) -> Vec<Point> {
        let mut out = self.vertices.clone();
        for (a, b) in self.edges() {
            let pa = self.vertices[a as usize];
            let pb = self.vertices[b as usize];
            let len = (pb - pa).norm();
            if len > max_segment {
                let pieces = (len / max_segment).ceil() as usize;
                for s in 1..pieces {
                    out.push(pa + (pb - pa) * (s as f64 / pieces as f64));
                }
            }
        }
        out
    }

    /// Applies `v -> scale * v + offset` to every vertex.
    pub fn scaled_translated(&self, scale: f64, offset: &Vec3) -> Mesh {
        Mesh { vertices: self.vertices.iter().map(|v| Point::from(v.coords * scale + offset)).collect(), triangles: self.triangles.clone() }
    }

    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Mesh {
        Mesh { vertices: self.vertices.iter().map(f).collect(), triangles: self.triangles.clone() }
    }
}
