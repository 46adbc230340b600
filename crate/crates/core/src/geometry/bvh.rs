//! Bounding volume hierarchy over mesh triangles for nearest-surface queries.

use super::sdf::point_triangle_distance;
use super::{Aabb, Mesh, Point};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TriangleBvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    tris: Vec<[Point; 3]>,
}

impl TriangleBvh {
    pub fn new(mesh: &Mesh) -> Self {
        let tris: Vec<[Point; 3]> = (0..mesh.triangles.len()).map(|t| mesh.triangle(t)).collect();
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build(&tris, &mut order, 0, tris.len(), &mut nodes);
        }
        Self { nodes, order, tris }
    }

    /// Unsigned distance from `p` to the closest triangle.
    pub fn distance(&self, p: &Point) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds().distance_to(p) >= best {
                continue;
            }
            match node {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[*start..*end] {
                        let d = point_triangle_distance(p, &self.tris[t]);
                        if d < best {
                            best = d;
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[*left].bounds().distance_to(p);
                    let dr = self.nodes[*right].bounds().distance_to(p);
                    // nearer child popped first
                    if dl < dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best
    }
}

fn build(tris: &[[Point; 3]], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let bounds = Aabb::from_points(order[start..end].iter().flat_map(|&t| tris[t].iter())).unwrap();
    let idx = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start, end });
        return idx;
    }
    nodes.push(Node::Leaf { bounds, start, end });
    let axis = bounds.extent().imax();
    let centroid = |t: usize| (tris[t][0][axis] + tris[t][1][axis] + tris[t][2][axis]) / 3.0;
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |a, b| centroid(*a).partial_cmp(&centroid(*b)).unwrap());
    let left = build(tris, order, start, mid, nodes);
    let right = build(tris, order, mid, end, nodes);
    nodes[idx] = Node::Inner { bounds, left, right };
    idx
}
