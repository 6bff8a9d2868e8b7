use serde::{Deserialize, Serialize};

use super::genome::{GeneSpace, Genome};
use crate::constraints::{barrier_expr, violation_expr, Atom, ConstraintExpr, Measures};
use crate::domain::{HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};
use crate::objectives::{Objective, ObjectiveBundle};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyMethod {
    #[default]
    External,
    Internal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub method: PenaltyMethod,
    pub coefficient: f64,
    pub barrier_coefficient: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            method: PenaltyMethod::External,
            coefficient: 1e4,
            barrier_coefficient: 1.0,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.coefficient > 0.0 && self.coefficient.is_finite()) {
            return Err(Error::Config(format!("penalty coefficient {} must be positive", self.coefficient)));
        }
        if !(self.barrier_coefficient > 0.0 && self.barrier_coefficient.is_finite()) {
            return Err(Error::Config(format!(
                "barrier coefficient {} must be positive",
                self.barrier_coefficient
            )));
        }
        Ok(())
    }

    /// Penalized fitness, lower is better. `barrier` is only called by the
    /// internal method on feasible points.
    pub fn apply(&self, objective: f64, violation: f64, barrier: impl FnOnce() -> Result<f64>) -> Result<f64> {
        match self.method {
            PenaltyMethod::External => Ok(objective + self.coefficient * violation * violation),
            PenaltyMethod::Internal if violation > 0.0 => Ok(f64::INFINITY),
            PenaltyMethod::Internal => Ok(objective + self.barrier_coefficient * barrier()?),
        }
    }

    /// Rejects expressions the barrier cannot be built for: anything but a
    /// conjunction of atoms, and atoms whose bounds collapse to an equality.
    pub fn check_expr(&self, expr: &ConstraintExpr, inst: &ProblemInstance) -> Result<()> {
        if self.method != PenaltyMethod::Internal {
            return Ok(());
        }
        let atoms = match expr {
            ConstraintExpr::Atom(a) => vec![*a],
            ConstraintExpr::And(cs) if cs.iter().all(|c| matches!(c, ConstraintExpr::Atom(_))) => expr.atoms(),
            _ => {
                return Err(Error::Config(
                    "internal penalty needs a conjunction of inequality atoms; use the external method".into(),
                ))
            }
        };
        for a in atoms {
            let equality = match a {
                Atom::K3 => inst.jobs.iter().find(|j| j.work_time_bounds.0 == j.work_time_bounds.1).map(|j| j.code.clone()),
                Atom::K4 => (inst.salary_bounds.0 == inst.salary_bounds.1).then(|| "salary".to_string()),
                Atom::Y2 => inst.jobs.iter().find(|j| j.headcount_min == j.headcount_max).map(|j| j.code.clone()),
                _ => None,
            };
            if let Some(what) = equality {
                return Err(Error::Config(format!(
                    "internal penalty cannot handle the equality constraint {a} on `{what}`"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    /// Objective in minimization form.
    pub objective: f64,
    pub violation: f64,
    pub fitness: f64,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

/// A box of integer variables with a penalized objective over it.
pub trait Landscape: Sync {
    fn space(&self) -> &GeneSpace;
    fn evaluate(&self, values: &[i64]) -> Result<Evaluation>;
}

/// Headcount search: one variable per job, judged under full attendance.
pub struct HeadcountLandscape<'a> {
    inst: &'a ProblemInstance,
    objective: &'a Objective,
    expr: &'a ConstraintExpr,
    penalty: PenaltyConfig,
    space: GeneSpace,
}

impl<'a> HeadcountLandscape<'a> {
    pub fn new(
        inst: &'a ProblemInstance,
        objective: &'a Objective,
        expr: &'a ConstraintExpr,
        penalty: PenaltyConfig,
    ) -> Result<Self> {
        inst.validate()?;
        expr.check(inst)?;
        objective.check(inst)?;
        penalty.validate()?;
        penalty.check_expr(expr, inst)?;
        Ok(HeadcountLandscape {
            inst,
            objective,
            expr,
            penalty,
            space: GeneSpace::for_headcounts(inst)?,
        })
    }

    pub fn headcount(values: &[i64]) -> HeadcountVector {
        HeadcountVector(values.iter().map(|&v| v as u32).collect())
    }

    pub fn measures(&self, values: &[i64]) -> Result<Measures> {
        Measures::full_attendance(&Self::headcount(values), self.inst)
    }
}

impl Landscape for HeadcountLandscape<'_> {
    fn space(&self) -> &GeneSpace {
        &self.space
    }

    fn evaluate(&self, values: &[i64]) -> Result<Evaluation> {
        let m = self.measures(values)?;
        let objective = self.objective.normalized(&m);
        let violation = violation_expr(self.expr, &m, self.inst)?;
        let fitness = self.penalty.apply(objective, violation, || barrier_expr(self.expr, &m, self.inst))?;
        Ok(Evaluation {
            objective,
            violation,
            fitness,
        })
    }
}

/// Penalized fitness of one headcount genome.
pub fn fitness(
    g: &Genome,
    bundle: &ObjectiveBundle,
    expr: &ConstraintExpr,
    inst: &ProblemInstance,
    penalty: &PenaltyConfig,
) -> Result<f64> {
    let objective = bundle.sole()?;
    let land = HeadcountLandscape::new(inst, objective, expr, *penalty)?;
    land.space().check_genome(g)?;
    Ok(land.evaluate(&land.space().decode(g))?.fitness)
}
