pub mod export;
pub mod manifest;
pub mod normalize;
pub mod obj;
pub mod synthetic;

pub use export::{deterministic_csv, metrics_csv, write_json, PlanFile, PlanMetrics, RunRecord, PLAN_FORMAT_VERSION};
pub use manifest::{load_problem, read_manifest, write_problem, write_synthetic, LoadError, ManifestHints, PartEntry, ProblemManifest};
pub use normalize::{normalize_meshes, normalize_scale, NormalizeTransform};
pub use obj::{parse_obj, write_obj, ObjError};
pub use synthetic::{generate, Family, SynthError, SyntheticAssembly};
