use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use msp_core::baselines::{SolverConfig, SolverKind};
use msp_core::Error;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    /// Headcounts under the basic constraints, then attendance and rosters.
    Exp1,
    /// Rotating positions.
    Exp2,
    /// A compound constraint expression.
    Exp3,
    /// Emergency withdrawal before the attendance stage.
    Exp4,
    /// Two objectives.
    Exp5,
    /// Roster generation at several horizons.
    TablegenTiming,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Exp1,
        ExperimentId::Exp2,
        ExperimentId::Exp3,
        ExperimentId::Exp4,
        ExperimentId::Exp5,
        ExperimentId::TablegenTiming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Exp1 => "exp1",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
            ExperimentId::Exp4 => "exp4",
            ExperimentId::Exp5 => "exp5",
            ExperimentId::TablegenTiming => "tablegen_timing",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> msp_core::Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSetup {
    pub positions: usize,
    pub people: usize,
    pub days: usize,
}

const BASIC: &str = "k1&k2&k3&k4&k5&k6";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub instance: PathBuf,
    pub constraints: String,
    /// Constraints for the attendance and roster stages; `constraints`
    /// when unset.
    pub stage_constraints: Option<String>,
    pub objectives: Vec<String>,
    pub solvers: Vec<SolverKind>,
    pub trials: usize,
    pub seed_base: u64,
    pub config: SolverConfig,
    /// Horizons for roster timing.
    pub horizons: Vec<usize>,
    pub rotation: RotationSetup,
}

impl ExperimentSpec {
    /// Default setup of each experiment on the instance at `instance`.
    pub fn preset(id: ExperimentId, instance: impl Into<PathBuf>) -> Self {
        let mut spec = ExperimentSpec {
            id,
            instance: instance.into(),
            constraints: BASIC.into(),
            stage_constraints: None,
            objectives: vec!["total_time".into()],
            solvers: vec![SolverKind::Ea],
            trials: 10,
            seed_base: 0,
            config: SolverConfig::default(),
            horizons: vec![7, 30],
            rotation: RotationSetup {
                positions: 3,
                people: 5,
                days: 5,
            },
        };
        match id {
            ExperimentId::Exp1 => {
                spec.solvers = SolverKind::ALL.to_vec();
                spec.trials = 30;
            }
            ExperimentId::Exp2 => spec.constraints = format!("{BASIC}&o1"),
            ExperimentId::Exp3 => spec.constraints = "k1&k2&!k5|k3".into(),
            ExperimentId::Exp4 => {
                spec.constraints = format!("{BASIC}&y1");
                // withdrawn staff no longer count toward time and salary floors
                spec.stage_constraints = Some("k1&k2&k5&k6".into());
            }
            ExperimentId::Exp5 => {
                spec.objectives = vec!["headcount:b+c+e".into(), "total_time".into()];
                spec.solvers.clear();
            }
            ExperimentId::TablegenTiming => spec.trials = 20,
        }
        spec
    }

    pub fn validate(&self) -> msp_core::Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("an experiment needs at least one trial".into()));
        }
        if self.objectives.is_empty() {
            return Err(Error::Config("an experiment needs an objective".into()));
        }
        if self.id == ExperimentId::TablegenTiming && self.horizons.is_empty() {
            return Err(Error::Config("roster timing needs at least one horizon".into()));
        }
        Ok(())
    }

    pub fn seed(&self, trial: usize) -> u64 {
        self.seed_base.wrapping_add(trial as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
        assert!("exp9".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn zero_trials_rejected() {
        let mut s = ExperimentSpec::preset(ExperimentId::Exp3, "x.toml");
        assert!(s.validate().is_ok());
        s.trials = 0;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }
}
