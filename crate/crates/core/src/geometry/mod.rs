//! Collision primitives: meshes, bounding boxes, signed distance grids and
//! convex hulls.

mod aabb;
mod bvh;
mod hull;
mod mesh;
mod sdf;

pub use aabb::Aabb;
pub use hull::{convex_hulls_disjoint, ConvexHull, HullError, Plane, HULL_TOLERANCE};
pub use mesh::{Mesh, MeshError};
pub use sdf::{point_triangle_distance, SdfGrid, DEFAULT_SDF_RESOLUTION};

pub type Point = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
