use thiserror::Error;

/// Errors produced by the capacity solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root-finding bracket does not contain a sign change.
    #[error("bracket error: f({lo}) = {f_lo}, f({hi}) = {f_hi} have the same sign")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// An iterative method hit its iteration cap or could not meet its tolerance.
    #[error("convergence error after {iterations} iterations: {detail}")]
    Convergence { iterations: usize, detail: String },

    /// A regime-specific solver was called outside its regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// The noise model is invalid (non-commuting blocks, nonstationary AR, ...).
    #[error("model error: {0}")]
    Model(String),

    /// The one-mode energy threshold is infinite (noise-free p quadrature).
    #[error("divergent threshold: gp = 0 with gq = {gq}")]
    DivergentThreshold { gq: f64 },

    /// A nested solver failed to locate its root.
    #[error("solver error: {0}")]
    Solver(String),

    /// The requested total energy is below the vacuum floor.
    #[error("infeasible energy: lambda = {lambda} is below the vacuum floor {floor}")]
    InfeasibleEnergy { lambda: f64, floor: f64 },

    /// Problem too large for the requested method.
    #[error("size error: {0}")]
    Size(String),

    /// Inputs for which the requested quantity is undefined.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

impl CapacityError {
    /// Short machine-readable tag for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            CapacityError::Domain(_) => "domain",
            CapacityError::Bracket { .. } => "bracket",
            CapacityError::Convergence { .. } => "convergence",
            CapacityError::Regime(_) => "regime",
            CapacityError::Model(_) => "model",
            CapacityError::DivergentThreshold { .. } => "divergent_threshold",
            CapacityError::Solver(_) => "solver",
            CapacityError::InfeasibleEnergy { .. } => "infeasible_energy",
            CapacityError::Size(_) => "size",
            CapacityError::DegenerateInput(_) => "degenerate_input",
        }
    }

    /// True for failures of an iterative method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CapacityError::Bracket { .. } | CapacityError::Convergence { .. } | CapacityError::Solver(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, CapacityError>;
