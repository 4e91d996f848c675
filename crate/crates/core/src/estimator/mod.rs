//! Model-selection estimator over candidate DPPs.
//!
//! Candidates are built from η-separated nets on the unit spheres of user-supplied
//! subspace models, mapped to orthonormal tuples by the polar factor and paired with
//! points of a λ-grid. Selection runs a robust test between every pair of candidates
//! and keeps the one whose strongest winning opponent is closest in Hellinger distance.

pub mod bound;
pub mod candidates;
pub mod net;
pub mod selection;

pub use bound::{oracle_bound, OracleBound, OracleForm};
pub use candidates::{
    build_candidates, build_candidates_from_nets, nearest_orthonormal, Candidate, CandidateFamily,
    CandidateIndex, Caps, LambdaGrid, Truncation,
};
pub use net::{
    local_pool, sphere_approx, sphere_net, sphere_net_from_pool, CVec, SphereNet, SubspaceModel,
};
pub use selection::{select, select_tables, test_statistic, SelectionResult};
