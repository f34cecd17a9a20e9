//! Grid-based reachability with symmetry: cell reachtubes, caches, the
//! NS/SC/SV methods, fixed points and safety verification.

mod cache;
mod cover;
mod dump;
mod engine;
mod tube;
mod verify;

pub use cache::{ModeKey, SafetyCache, TubeCache};
pub use dump::{metrics_text, write_reachtube_csv};
pub use engine::{
    check_fixed_point, compute_reachset, mode_reach, overapprox_error, overapprox_error_volumes, transform_back,
    DictEntry, Horizon, Method, Metrics, ModeReach, PerModeDict, Provenance, ReachConfig, ReachRun, Segment,
    SegmentSource, TransformedSegment,
};
pub use tube::{cell_reachtube, CellTube, Reachtube, TubeRef, TubeSegment};
pub(crate) use verify::tube_meets;
pub use verify::{sym_safety, unbounded_verif, Verdict, VerifyOutcome};
