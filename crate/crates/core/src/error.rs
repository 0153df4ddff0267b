use num_complex::Complex64;
use thiserror::Error;

use crate::blend::BlendResult;
use crate::driver::StageReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DomainDegenerate(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("labyrinth does not fit: 2/N = {two_over_n} is not below the annulus width {width}")]
    LabyrinthFit { two_over_n: f64, width: f64 },

    #[error("Weierstrass representation: {0}")]
    Representation(String),

    #[error("immersion not well defined: component {component} has period {period} over the generator cycle")]
    WellDefinedness { component: usize, period: f64 },

    #[error("branch point: induced metric vanishes at node {node} (z = {z})")]
    BranchPoint { node: usize, z: Complex64 },

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("metric bound violated at node {node}: ratio {ratio} <= 1")]
    BoundViolated { node: usize, ratio: f64 },

    #[error("flux matching along arc failed after {iterations} iterations (residual {residual:e})")]
    FluxMatching { iterations: usize, residual: f64 },

    #[error("approximation budget exceeded: achieved {achieved:e} > requested {requested:e} at degree {degree}")]
    ApproximationBudget {
        achieved: f64,
        requested: f64,
        degree: usize,
        best: Box<BlendResult>,
    },

    #[error("period solver diverged after {iterations} iterations (residual {residual:e})")]
    PeriodSolver { iterations: usize, residual: f64 },

    #[error("no path from source to target set")]
    Connectivity,

    #[error("stage {stage} failed: {reason}")]
    StageFailure {
        stage: usize,
        reason: String,
        report: Box<StageReport>,
        partial: Vec<StageReport>,
    },

    #[error("nonvanishing violated at stage {stage}: min |phi3/dz| = {min_phi3:e}")]
    NonvanishingViolation { stage: usize, min_phi3: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("export: {0}")]
    Export(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
