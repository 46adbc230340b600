use thiserror::Error;

use crate::geometry::{Aabb, Mesh, Vec3};
use crate::problem::{AssemblyProblem, BuildOptions, ProblemError};

/// Edge length of the working cube.
pub const WORKSPACE_SIZE: f64 = 10.0;

#[derive(Debug, Error, PartialEq)]
pub enum NormalizeError {
    #[error("assembly has zero extent")]
    ZeroExtent,
}

/// `x -> scale * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeTransform {
    pub scale: f64,
    pub offset: Vec3,
}

impl NormalizeTransform {
    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.offset == Vec3::zeros()
    }
}

/// Transform bringing `bounds` into the working cube. Assemblies that
/// already fit are left untouched; others are scaled down (never up) and
/// centered.
pub fn normalize_transform(bounds: &Aabb) -> Result<NormalizeTransform, NormalizeError> {
    let longest = bounds.longest_side();
    if longest.is_nan() || longest <= 0.0 {
        return Err(NormalizeError::ZeroExtent);
    }
    let cube = Aabb::from_corners([0.0; 3], [WORKSPACE_SIZE; 3]);
    if cube.contains_box(bounds) {
        return Ok(NormalizeTransform { scale: 1.0, offset: Vec3::zeros() });
    }
    let scale = (WORKSPACE_SIZE / longest).min(1.0);
    let offset = Vec3::repeat(WORKSPACE_SIZE / 2.0) - bounds.center().coords * scale;
    Ok(NormalizeTransform { scale, offset })
}

pub fn normalize_meshes(meshes: &mut [(String, Mesh)]) -> Result<NormalizeTransform, NormalizeError> {
    let bounds = meshes.iter().map(|(_, m)| m.aabb()).reduce(|a, b| a.union(&b)).ok_or(NormalizeError::ZeroExtent)?;
    let t = normalize_transform(&bounds)?;
    if !t.is_identity() {
        for (_, m) in meshes.iter_mut() {
            *m = m.scaled_translated(t.scale, &t.offset);
        }
    }
    Ok(t)
}

#[derive(Debug, Error)]
pub enum NormalizeProblemError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Normalized copy of a problem with SDFs and hulls rebuilt.
pub fn normalize_scale(
    problem: &AssemblyProblem,
    opts: &BuildOptions,
) -> Result<(AssemblyProblem, NormalizeTransform), NormalizeProblemError> {
    let mut meshes: Vec<(String, Mesh)> = problem.parts.iter().map(|p| (p.id.clone(), p.mesh.clone())).collect();
    let t = normalize_meshes(&mut meshes)?;
    if t.is_identity() {
        return Ok((problem.clone(), t));
    }
    Ok((AssemblyProblem::new_unaudited(problem.name.clone(), meshes, opts)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_assembly_scaled_by_tenth() {
        let t = normalize_transform(&Aabb::from_corners([0.0; 3], [100.0, 50.0, 20.0])).unwrap();
        assert!((t.scale - 0.1).abs() < 1e-15);
        let mut m = vec![("a".to_string(), Mesh::cuboid(&Aabb::from_corners([0.0; 3], [100.0, 50.0, 20.0])))];
        normalize_meshes(&mut m).unwrap();
        let b = m[0].1.aabb();
        assert!((b.center() - crate::geometry::Point::new(5.0, 5.0, 5.0)).norm() < 1e-12);
    }

    #[test]
    fn fitting_assembly_is_untouched() {
        let t = normalize_transform(&Aabb::from_corners([1.0; 3], [3.0; 3])).unwrap();
        assert!(t.is_identity());
    }

    #[test]
    fn idempotent() {
        let mut m = vec![("a".to_string(), Mesh::cuboid(&Aabb::from_corners([-40.0, 0.0, 3.0], [15.0, 2.0, 9.0])))];
        normalize_meshes(&mut m).unwrap();
        let once = m.clone();
        assert!(normalize_meshes(&mut m).unwrap().is_identity());
        assert_eq!(m, once);
    }

    #[test]
    fn zero_extent_rejected() {
        let p = crate::geometry::Point::new(1.0, 1.0, 1.0);
        assert_eq!(normalize_transform(&Aabb::new(p, p)).unwrap_err(), NormalizeError::ZeroExtent);
    }
}
