use thiserror::Error;

use crate::exec::{map_slice, Exec};
use crate::geometry::{Aabb, ConvexHull, HullError, Mesh, MeshError, Point, SdfGrid, DEFAULT_SDF_RESOLUTION};
use crate::simulation::{max_penetration, pair_penetration, WorldState};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("assembly has no parts")]
    Empty,
    #[error("part {part}: {source}")]
    Mesh { part: String, source: MeshError },
    #[error("part {part}: {source}")]
    Hull { part: String, source: HullError },
    #[error("parts {a} and {b} penetrate by {depth:.4} in the initial state")]
    InitialPenetration { a: String, b: String, depth: f64 },
}

/// One rigid part. Geometry is stored in its initial world placement, so
/// the identity pose is the assembled configuration.
#[derive(Debug, Clone)]
pub struct Part {
    pub id: String,
    pub mesh: Mesh,
    pub sdf: SdfGrid,
    pub hull: ConvexHull,
    pub aabb: Aabb,
    /// Surface points probed against other parts' SDFs.
    pub samples: Vec<Point>,
}

impl Part {
    pub fn new(id: impl Into<String>, mesh: Mesh, sdf_resolution: usize, exec: Exec) -> Result<Self, ProblemError> {
        let id = id.into();
        let sdf = SdfGrid::build_with(&mesh, sdf_resolution, exec).map_err(|source| ProblemError::Mesh { part: id.clone(), source })?;
        let hull = ConvexHull::from_points(&mesh.vertices).map_err(|source| ProblemError::Hull { part: id.clone(), source })?;
        let samples = mesh.surface_samples(2.0 * sdf.spacing);
        Ok(Part { aabb: mesh.aabb(), id, mesh, sdf, hull, samples })
    }
}

#[derive(Debug, Clone)]
pub struct AssemblyProblem {
    pub name: String,
    pub parts: Vec<Part>,
    pub sdf_resolution: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub sdf_resolution: usize,
    pub exec: Exec,
    pub penetration_threshold: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { sdf_resolution: DEFAULT_SDF_RESOLUTION, exec: Exec::default(), penetration_threshold: 0.01 }
    }
}

impl AssemblyProblem {
    /// Builds SDFs and hulls for every part and rejects initially
    /// penetrating assemblies.
    pub fn new(name: impl Into<String>, meshes: Vec<(String, Mesh)>, opts: &BuildOptions) -> Result<Self, ProblemError> {
        let problem = Self::new_unaudited(name, meshes, opts)?;
        problem.audit(opts.penetration_threshold)?;
        Ok(problem)
    }

    /// Like [`AssemblyProblem::new`] but accepts overlapping parts.
    pub fn new_unaudited(name: impl Into<String>, meshes: Vec<(String, Mesh)>, opts: &BuildOptions) -> Result<Self, ProblemError> {
        if meshes.is_empty() {
            return Err(ProblemError::Empty);
        }
        // Parts are built in parallel; each SDF build then runs sequentially.
        let parts = map_slice(opts.exec, &meshes, |(id, mesh)| Part::new(id.clone(), mesh.clone(), opts.sdf_resolution, Exec::Sequential));
        Ok(AssemblyProblem { name: name.into(), parts: parts.into_iter().collect::<Result<_, _>>()?, sdf_resolution: opts.sdf_resolution })
    }

    fn audit(&self, threshold: f64) -> Result<(), ProblemError> {
        let s0 = self.initial_state();
        let all = self.all_parts();
        if max_penetration(self, &s0, &all) <= threshold {
            return Ok(());
        }
        for &a in &all {
            for &b in &all[a + 1..] {
                let depth = pair_penetration(self, a, &s0.poses[a], b, &s0.poses[b]);
                if depth > threshold {
                    return Err(ProblemError::InitialPenetration { a: self.parts[a].id.clone(), b: self.parts[b].id.clone(), depth });
                }
            }
        }
        Ok(())
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn all_parts(&self) -> Vec<usize> {
        (0..self.parts.len()).collect()
    }

    pub fn initial_state(&self) -> WorldState {
        WorldState::initial(self.parts.len())
    }

    pub fn part_index(&self, id: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.id == id)
    }

    /// Coarsest SDF spacing over all parts.
    pub fn max_sdf_spacing(&self) -> f64 {
        self.parts.iter().map(|p| p.sdf.spacing).fold(0.0, f64::max)
    }

    pub fn bounds(&self) -> Aabb {
        self.parts.iter().map(|p| p.aabb).reduce(|a, b| a.union(&b)).unwrap()
    }
}
