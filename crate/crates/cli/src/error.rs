use dp2::emden::EmdenError;
use dp2::grid::GridError;
use dp2::pdesolver::SolverError;
use dp2::profile::ProfileError;
use dp2::residual::ResidualError;
use dp2::riccati::RiccatiError;
use dp2::selfsim::SelfSimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn invalid(key: &str, message: impl ToString) -> Self {
        CliError::Invalid { key: key.to_owned(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } | CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::VerifyFailed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<EmdenError> for CliError {
    fn from(e: EmdenError) -> Self {
        let key = match &e {
            EmdenError::NonPositiveA0(_) => "a0",
            EmdenError::InvalidMu(_) => "mu",
            EmdenError::NonFinite { name, .. } => name,
            EmdenError::NonPositiveHorizon(_) => "s_max",
            EmdenError::BadTolerance(_) => "tol",
            EmdenError::UnsupportedKappa(_) => "kappa",
            EmdenError::StepCollapse { .. } => return CliError::Numerical(e.to_string()),
            EmdenError::NoTouchdown | EmdenError::OutsideTrajectory { .. } => return CliError::Config(e.to_string()),
        };
        CliError::invalid(key, e)
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::NegativeAlpha(_) => CliError::invalid("alpha", e),
            ProfileError::NonPositiveBeta(_) => CliError::invalid("xi", e),
            ProfileError::OutsideInterior { .. } => CliError::Config(e.to_string()),
        }
    }
}

/// `time_key` names the option that supplied the evaluation time.
pub fn selfsim_error(e: SelfSimError, time_key: &str) -> CliError {
    let key = match &e {
        SelfSimError::NonPositiveK2(_) => "k2",
        SelfSimError::NonFinite { name, .. } => name,
        SelfSimError::InvalidBranch { .. } | SelfSimError::WrongBranch => "k3",
        SelfSimError::NegativeDensity { .. } => "alpha",
        SelfSimError::BeyondBlowup { .. } | SelfSimError::HorizonExceeded { .. } | SelfSimError::NegativeTime(_) => {
            time_key
        }
        SelfSimError::LimitCheckFailed(_) => return CliError::Numerical(e.to_string()),
        SelfSimError::Profile(p) => return p.clone().into(),
        SelfSimError::Emden(m) => return m.clone().into(),
    };
    CliError::invalid(key, e)
}

pub fn residual_error(e: ResidualError, time_key: &str) -> CliError {
    let key = match &e {
        ResidualError::HorizonExceeded { .. } => time_key,
        ResidualError::InsufficientGrids(_) | ResidualError::NonUniformRefinement | ResidualError::BadStep { .. } => {
            "hs"
        }
        ResidualError::EmptyRegion => "band",
    };
    CliError::invalid(key, e)
}

/// `bound_key` names the option that supplied the bound `M`.
pub fn riccati_error(e: RiccatiError, bound_key: &str) -> CliError {
    let key = match &e {
        RiccatiError::InvalidBound(_) => bound_key,
        RiccatiError::InvalidSlope(_) => "v0",
        RiccatiError::BadStep(_) => "dt",
        RiccatiError::EmptyHistory => return CliError::Config(e.to_string()),
    };
    CliError::invalid(key, e)
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Grid(g) => {
                let key = match g {
                    GridError::BadSize(_) => "n",
                    GridError::BadLength(_) => "length",
                    GridError::LengthMismatch { .. } | GridError::NonFinite(_) => "u0",
                };
                CliError::invalid(key, g)
            }
            SolverError::NonFinite { .. } | SolverError::StepTooLarge { .. } => CliError::Numerical(e.to_string()),
            SolverError::NotOdd(_) => CliError::invalid("u0", e),
            SolverError::BadSetting { name, .. } => CliError::invalid(name, e),
            SolverError::Riccati(r) => riccati_error(r, "m_est"),
        }
    }
}
