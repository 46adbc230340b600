use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::normalize::{normalize_meshes, NormalizeError};
use super::obj::{parse_obj, write_obj, ObjError};
use super::synthetic::SyntheticAssembly;
use crate::geometry::Mesh;
use crate::problem::{AssemblyProblem, BuildOptions, ProblemError};
use crate::simulation::Pose;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartEntry {
    pub id: String,
    /// OBJ file, relative to the manifest's directory.
    pub mesh: PathBuf,
    /// Placement of the mesh in the assembled state.
    #[serde(default)]
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemManifest {
    pub version: u32,
    pub name: String,
    pub parts: Vec<PartEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_solvable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_required: Option<bool>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("unsupported manifest version {0}")]
    Version(u32),
    #[error("duplicate part id {0:?}")]
    DuplicateId(String),
    #[error("part {part}: mesh file {path} not found")]
    MissingMesh { part: String, path: PathBuf },
    #[error("part {part}: {path}: {source}")]
    Obj { part: String, path: PathBuf, source: ObjError },
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub fn read_manifest(path: &Path) -> Result<ProblemManifest, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    let m: ProblemManifest = serde_json::from_str(&text).map_err(|source| LoadError::Json { path: path.into(), source })?;
    if m.version != FORMAT_VERSION {
        return Err(LoadError::Version(m.version));
    }
    let mut seen = std::collections::HashSet::new();
    for p in &m.parts {
        if !seen.insert(p.id.as_str()) {
            return Err(LoadError::DuplicateId(p.id.clone()));
        }
    }
    Ok(m)
}

/// Meshes of a manifest, posed into the assembled configuration.
pub fn load_meshes(manifest: &ProblemManifest, dir: &Path) -> Result<Vec<(String, Mesh)>, LoadError> {
    manifest
        .parts
        .iter()
        .map(|p| {
            let path = dir.join(&p.mesh);
            let text = fs::read_to_string(&path).map_err(|source| match source.kind() {
                std::io::ErrorKind::NotFound => LoadError::MissingMesh { part: p.id.clone(), path: path.clone() },
                _ => LoadError::Io { path: path.clone(), source },
            })?;
            let mesh = parse_obj(&text).map_err(|source| LoadError::Obj { part: p.id.clone(), path: path.clone(), source })?;
            Ok((p.id.clone(), mesh.map_vertices(|v| p.pose.apply(v))))
        })
        .collect()
}

/// Reads, poses, normalizes and audits a problem.
pub fn load_problem(path: &Path, opts: &BuildOptions) -> Result<AssemblyProblem, LoadError> {
    let manifest = read_manifest(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut meshes = load_meshes(&manifest, dir)?;
    normalize_meshes(&mut meshes)?;
    Ok(AssemblyProblem::new(manifest.name, meshes, opts)?)
}

/// Writes `<dir>/<name>.json` plus one OBJ per part; returns the manifest path.
pub fn write_problem(dir: &Path, name: &str, parts: &[(String, Mesh)], extra: ManifestHints) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (id, mesh) in parts {
        let file = PathBuf::from(format!("{name}.{id}.obj"));
        fs::write(dir.join(&file), write_obj(mesh))?;
        entries.push(PartEntry { id: id.clone(), mesh: file, pose: Pose::identity() });
    }
    let manifest = ProblemManifest {
        version: FORMAT_VERSION,
        name: name.to_string(),
        parts: entries,
        expected_solvable: extra.expected_solvable,
        expected_order: extra.expected_order,
        rotation_required: extra.rotation_required,
    };
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)? + "\n")?;
    Ok(path)
}

#[derive(Debug, Clone, Default)]
pub struct ManifestHints {
    pub expected_solvable: Option<bool>,
    pub expected_order: Option<Vec<String>>,
    pub rotation_required: Option<bool>,
}

pub fn write_synthetic(dir: &Path, asm: &SyntheticAssembly) -> std::io::Result<PathBuf> {
    let hints = ManifestHints {
        expected_solvable: Some(true),
        expected_order: Some(asm.expected_order.clone()),
        rotation_required: Some(asm.rotation_required),
    };
    write_problem(dir, &asm.name, &asm.parts, hints)
}
