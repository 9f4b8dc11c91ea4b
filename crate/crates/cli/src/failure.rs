//! Exit-code classification: 1 runtime or model error, 2 missing input,
//! 3 validation error.

use dvpp::scenario::ScenarioError;
use dvpp::sim::SimError;

pub const RUNTIME: u8 = 1;
pub const MISSING_INPUT: u8 = 2;
pub const VALIDATION: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self::new(RUNTIME, error)
    }

    pub fn validation(error: impl Into<anyhow::Error>) -> Self {
        Self::new(VALIDATION, error)
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::NotFound { .. } => MISSING_INPUT,
            ScenarioError::Io { .. } => RUNTIME,
            ScenarioError::Parse { .. } | ScenarioError::Validation { .. } => VALIDATION,
        };
        Self::new(code, e)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::InvalidConfig(_) | SimError::InvalidEvent { .. } => VALIDATION,
            _ => RUNTIME,
        };
        Self::new(code, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::runtime(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn scenario_errors_map_to_contract_codes() {
        let missing = ScenarioError::NotFound { path: PathBuf::from("x.toml") };
        assert_eq!(Failure::from(missing).code, MISSING_INPUT);
        let bad = ScenarioError::Validation { origin: "x".into(), line: 3, msg: "m".into() };
        assert_eq!(Failure::from(bad).code, VALIDATION);
    }

    #[test]
    fn sim_errors_map_to_contract_codes() {
        assert_eq!(Failure::from(SimError::InvalidConfig("dt".into())).code, VALIDATION);
        assert_eq!(Failure::from(SimError::NoDisturbance).code, RUNTIME);
    }
}
