//! Comparison solvers for the headcount problem, behind one interface so
//! the bench harness and the CLI can swap them freely.

mod ip;
mod pso;
mod sa;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ip::{ip_solve, ip_solve_capped, IpResult, NODE_CAP};
pub use pso::{pso_integer, pso_minimize, pso_step, PSOConfig, Particle, PsoOutcome, StepParams};
pub use sa::{sa_accept, sa_landscape, sa_minimize, SAConfig, SaOutcome};

use crate::constraints::ConstraintExpr;
use crate::domain::{HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};
use crate::evolution::{run_ea, EAConfig, Encoding, HeadcountLandscape, PenaltyConfig, RunTrace};
use crate::objectives::ObjectiveBundle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverKind {
    /// Evolution with integer genes.
    #[serde(rename = "ea")]
    Ea,
    /// Evolution with binary genes.
    #[serde(rename = "ea-bg")]
    EaBinary,
    #[serde(rename = "ip")]
    Ip,
    #[serde(rename = "pso")]
    Pso,
    #[serde(rename = "sa")]
    Sa,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] = [
        SolverKind::Ea,
        SolverKind::EaBinary,
        SolverKind::Ip,
        SolverKind::Pso,
        SolverKind::Sa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ea => "ea",
            SolverKind::EaBinary => "ea-bg",
            SolverKind::Ip => "ip",
            SolverKind::Pso => "pso",
            SolverKind::Sa => "sa",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}` (expected ea, ea-bg, ip, pso or sa)")))
    }
}

/// Settings for every solver; each run reads only its own part. The seed
/// given to [`solve`] overrides the per-solver seeds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub ea: EAConfig,
    pub pso: PSOConfig,
    pub sa: SAConfig,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub solver: SolverKind,
    pub best: HeadcountVector,
    /// Objective in its own direction.
    pub value: f64,
    pub trace: RunTrace,
}

pub fn solve(
    kind: SolverKind,
    inst: &ProblemInstance,
    bundle: &ObjectiveBundle,
    expr: &ConstraintExpr,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<Solution> {
    let objective = bundle.sole()?;
    let (best, value, trace) = match kind {
        SolverKind::Ea | SolverKind::EaBinary => {
            let ea = EAConfig {
                seed,
                encoding: if kind == SolverKind::Ea {
                    Encoding::Integer
                } else {
                    Encoding::Binary
                },
                ..cfg.ea.clone()
            };
            let r = run_ea(inst, bundle, expr, &ea)?;
            (r.best, r.value, r.trace)
        }
        SolverKind::Ip => {
            let r = ip_solve(inst, bundle, expr)?;
            (r.best, r.value, r.trace)
        }
        SolverKind::Pso => {
            let land = HeadcountLandscape::new(inst, objective, expr, PenaltyConfig::default())?;
            let (v, e, trace) = pso_integer(&land, &PSOConfig { seed, ..cfg.pso.clone() })?;
            (HeadcountLandscape::headcount(&v), objective.denormalize(e.objective), trace)
        }
        SolverKind::Sa => {
            let land = HeadcountLandscape::new(inst, objective, expr, PenaltyConfig::default())?;
            let (v, e, trace) = sa_landscape(&land, &SAConfig { seed, ..cfg.sa.clone() })?;
            (HeadcountLandscape::headcount(&v), objective.denormalize(e.objective), trace)
        }
    };
    Ok(Solution {
        solver: kind,
        best,
        value,
        trace,
    })
}
