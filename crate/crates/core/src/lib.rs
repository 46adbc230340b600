pub mod bench;
pub mod dbg;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod planner;
pub mod problem;
pub mod simulation;

pub use problem::{AssemblyProblem, BuildOptions, Part, ProblemError};
pub use simulation::{Action, Axis, MotionKind, MotionPath, Pose, SimConfig, SimOutcome, WorldState};
