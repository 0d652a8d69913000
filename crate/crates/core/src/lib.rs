//! Bounds on the private-key capacity region of a three-terminal source
//! `(X, Y, Z)`, where X shares one key with Y (concealed from Z) and another
//! with Z (concealed from Y), plus exact evaluation of small deterministic
//! key-agreement protocols.
//!
//! | module | contents |
//! |--------|----------|
//! | [`dist`] | joint pmfs, entropy, conditional mutual information |
//! | [`stats`] | minimal sufficient statistics, maximal common function, deterministic correlation |
//! | [`aux`] | maximization of I(U ; X) over admissible auxiliary variables |
//! | [`region`] | outer, inner and exact rate regions; 2-D geometry |
//! | [`protocol`] | exact evaluation of fixed-blocklength protocols |
//! | [`io`] | distribution, protocol and report file formats |
//!
//! All rates are in bits per source symbol.

pub mod aux;
pub mod dist;
pub mod error;
pub mod exec;
pub mod gen;
pub mod io;
pub mod protocol;
pub mod region;
pub mod stats;

pub use aux::{
    dominance_oracle, double_markov_residual, max_aux_info_outer, max_aux_info_thm3, AuxChannel,
    SolverReport, Thm3Options,
};
pub use dist::{JointPmf, VariableGroup};
pub use error::{Error, Result};
pub use exec::Exec;
pub use protocol::{check_eps_pk, evaluate_protocol, rate_point, EnumOptions, EvaluationReport, ProtocolSpec};
pub use region::{
    analyze, exact_region, gap_metrics, hull, inner_region, outer_region, AnalysisOptions, RateRegion,
    RegionReport,
};
pub use stats::{
    is_deterministically_correlated, maximal_common_function, minimal_sufficient_statistic,
    sample_feasible_aux, CommonFunction, Statistic,
};
