//! Atomic scheduling constraints and their boolean combinations.
//!
//! Each atom has a boolean reading and a nonnegative violation degree that is
//! zero exactly when the atom holds. Expressions combine atoms with `And`,
//! `Or` and `Not`; their violation is the sum over conjuncts, the minimum
//! over disjuncts, and for a negation a unit violation when the negated
//! expression holds.

mod emergency;
mod measures;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use emergency::{apply_emergency, sample_emergency_days};
pub use measures::Measures;
pub use parser::parse_constraint_string;

use crate::domain::{AttendanceTensor, HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    /// Nobody works outside their own job.
    K1,
    /// Every job has an attendee every day.
    K2,
    /// Each job's total working time lies within its bounds.
    K3,
    /// Total salary lies within the salary bounds.
    K4,
    /// Total staff does not exceed the cap.
    K5,
    /// Nobody rests more days than the rest cap.
    K6,
    /// Emergency withdrawal leaves every drawn-from job at its minimum.
    Y1,
    /// Every job's headcount lies within its bounds.
    Y2,
    /// Shift structure: day-consistent slots in single-shift mode, at least
    /// one shift per employee and day in multi-shift mode.
    O1,
    /// Cooperative task can be staffed from its job subset.
    O2,
}

impl Atom {
    pub const ALL: [Atom; 10] = [
        Atom::K1,
        Atom::K2,
        Atom::K3,
        Atom::K4,
        Atom::K5,
        Atom::K6,
        Atom::Y1,
        Atom::Y2,
        Atom::O1,
        Atom::O2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Atom::K1 => "k1",
            Atom::K2 => "k2",
            Atom::K3 => "k3",
            Atom::K4 => "k4",
            Atom::K5 => "k5",
            Atom::K6 => "k6",
            Atom::Y1 => "y1",
            Atom::Y2 => "y2",
            Atom::O1 => "o1",
            Atom::O2 => "o2",
        }
    }

    pub fn from_name(name: &str) -> Option<Atom> {
        Atom::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(name))
    }

    /// K1 and O1 describe the shape of the roster rather than a quantity.
    pub fn is_structural(self) -> bool {
        matches!(self, Atom::K1 | Atom::O1)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintExpr {
    Atom(Atom),
    And(Vec<ConstraintExpr>),
    Or(Vec<ConstraintExpr>),
    Not(Box<ConstraintExpr>),
}

impl ConstraintExpr {
    pub fn and(children: Vec<ConstraintExpr>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::Structural("`and` needs at least two operands".into()));
        }
        Ok(ConstraintExpr::And(children))
    }

    pub fn or(children: Vec<ConstraintExpr>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::Structural("`or` needs at least two operands".into()));
        }
        Ok(ConstraintExpr::Or(children))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: ConstraintExpr) -> Self {
        ConstraintExpr::Not(Box::new(child))
    }

    /// Conjunction of the given atoms; a single atom stays bare.
    pub fn all_of(atoms: &[Atom]) -> Result<Self> {
        match atoms {
            [] => Err(Error::Structural("empty conjunction".into())),
            [a] => Ok(ConstraintExpr::Atom(*a)),
            _ => Ok(ConstraintExpr::And(atoms.iter().map(|&a| ConstraintExpr::Atom(a)).collect())),
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            ConstraintExpr::Atom(a) => out.push(*a),
            ConstraintExpr::And(cs) | ConstraintExpr::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
            ConstraintExpr::Not(c) => c.collect_atoms(out),
        }
    }

    /// Checks arities and that the instance carries the data every atom needs.
    pub fn check(&self, inst: &ProblemInstance) -> Result<()> {
        match self {
            ConstraintExpr::Atom(a) => check_atom(*a, inst),
            ConstraintExpr::And(cs) | ConstraintExpr::Or(cs) => {
                if cs.len() < 2 {
                    return Err(Error::Structural("`and`/`or` needs at least two operands".into()));
                }
                cs.iter().try_for_each(|c| c.check(inst))
            }
            ConstraintExpr::Not(c) => c.check(inst),
        }
    }

    /// Flattens directly nested `And`/`Or` nodes of the same kind.
    pub fn normalize(self) -> Self {
        match self {
            ConstraintExpr::And(cs) => ConstraintExpr::And(flatten(cs, true)),
            ConstraintExpr::Or(cs) => ConstraintExpr::Or(flatten(cs, false)),
            ConstraintExpr::Not(c) => ConstraintExpr::Not(Box::new(c.normalize())),
            atom => atom,
        }
    }
}

fn flatten(children: Vec<ConstraintExpr>, conj: bool) -> Vec<ConstraintExpr> {
    let mut out = Vec::with_capacity(children.len());
    for c in children.into_iter().map(ConstraintExpr::normalize) {
        match c {
            ConstraintExpr::And(inner) if conj => out.extend(inner),
            ConstraintExpr::Or(inner) if !conj => out.extend(inner),
            other => out.push(other),
        }
    }
    out
}

impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintExpr::Atom(a) => write!(f, "{a}"),
            ConstraintExpr::Not(c) => match c.as_ref() {
                ConstraintExpr::Atom(_) | ConstraintExpr::Not(_) => write!(f, "!{c}"),
                _ => write!(f, "!({c})"),
            },
            ConstraintExpr::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("&")?;
                    }
                    match c {
                        ConstraintExpr::Or(_) | ConstraintExpr::And(_) => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
            ConstraintExpr::Or(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    match c {
                        ConstraintExpr::Or(_) => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

impl std::str::FromStr for ConstraintExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_constraint_string(s)
    }
}

fn check_atom(atom: Atom, inst: &ProblemInstance) -> Result<()> {
    match atom {
        Atom::Y1 => {
            let spec = inst
                .emergency
                .as_ref()
                .ok_or_else(|| Error::Config("atom y1 needs an emergency section in the instance".into()))?;
            inst.resolve_jobs(&spec.jobs).map(|_| ())
        }
        Atom::O2 => {
            let spec = inst
                .cooperation
                .as_ref()
                .ok_or_else(|| Error::Config("atom o2 needs a cooperation section in the instance".into()))?;
            inst.resolve_jobs(&spec.jobs).map(|_| ())
        }
        _ => Ok(()),
    }
}

/// Distance of `v` from the closed interval `[lo, hi]`.
fn interval_distance(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if v < lo {
        lo - v
    } else if v > hi {
        v - hi
    } else {
        0.0
    }
}

/// Staff the listed jobs can release while each stays at its minimum.
fn releasable(inst: &ProblemInstance, hc: &HeadcountVector, codes: &[String]) -> Result<u32> {
    Ok(inst
        .resolve_jobs(codes)?
        .into_iter()
        .map(|j| hc.0[j].saturating_sub(inst.jobs[j].headcount_min))
        .sum())
}

pub fn violation_atom(atom: Atom, m: &Measures, inst: &ProblemInstance) -> Result<f64> {
    let hc = &m.headcount;
    Ok(match atom {
        Atom::K1 => m.multi_duty as f64,
        Atom::K2 => m.vacancies as f64,
        Atom::K3 => inst
            .jobs
            .iter()
            .zip(&m.job_time)
            .map(|(job, &t)| interval_distance(t, job.work_time_bounds))
            .sum(),
        Atom::K4 => interval_distance(m.salary(inst), inst.salary_bounds),
        Atom::K5 => hc.total().saturating_sub(inst.max_total_staff) as f64,
        Atom::K6 => m.rest_days.iter().map(|&r| r.saturating_sub(inst.rest_cap) as f64).sum(),
        Atom::Y1 => {
            check_atom(atom, inst)?;
            let spec = inst.emergency.as_ref().expect("checked");
            spec.alpha.saturating_sub(releasable(inst, hc, &spec.jobs)?) as f64
        }
        Atom::Y2 => inst
            .jobs
            .iter()
            .zip(hc.counts())
            .map(|(job, &n)| interval_distance(n as f64, (job.headcount_min as f64, job.headcount_max as f64)))
            .sum(),
        Atom::O1 => m.shift_breaks as f64,
        Atom::O2 => {
            check_atom(atom, inst)?;
            let spec = inst.cooperation.as_ref().expect("checked");
            spec.alpha.saturating_sub(releasable(inst, hc, &spec.jobs)?) as f64
        }
    })
}

pub fn eval_atom(atom: Atom, m: &Measures, inst: &ProblemInstance) -> Result<bool> {
    Ok(violation_atom(atom, m, inst)? == 0.0)
}

/// [`eval_atom`] straight from a roster tensor.
pub fn eval_atom_on(atom: Atom, tensor: &AttendanceTensor, hc: &HeadcountVector, inst: &ProblemInstance) -> Result<bool> {
    eval_atom(atom, &Measures::from_tensor(tensor, hc, inst)?, inst)
}

pub fn eval_expr(e: &ConstraintExpr, m: &Measures, inst: &ProblemInstance) -> Result<bool> {
    Ok(match e {
        ConstraintExpr::Atom(a) => eval_atom(*a, m, inst)?,
        ConstraintExpr::And(cs) => {
            let mut all = true;
            for c in cs {
                all &= eval_expr(c, m, inst)?;
            }
            all
        }
        ConstraintExpr::Or(cs) => {
            let mut any = false;
            for c in cs {
                any |= eval_expr(c, m, inst)?;
            }
            any
        }
        ConstraintExpr::Not(c) => !eval_expr(c, m, inst)?,
    })
}

pub fn violation_expr(e: &ConstraintExpr, m: &Measures, inst: &ProblemInstance) -> Result<f64> {
    Ok(match e {
        ConstraintExpr::Atom(a) => violation_atom(*a, m, inst)?,
        ConstraintExpr::And(cs) => {
            let mut sum = 0.0;
            for c in cs {
                sum += violation_expr(c, m, inst)?;
            }
            sum
        }
        ConstraintExpr::Or(cs) => {
            let mut min = f64::INFINITY;
            for c in cs {
                min = min.min(violation_expr(c, m, inst)?);
            }
            min
        }
        ConstraintExpr::Not(c) => {
            if eval_expr(c, m, inst)? {
                1.0
            } else {
                0.0
            }
        }
    })
}

/// Sum of `1 / (1 + margin)` over the scalar inequalities behind a satisfied
/// atom, where margin is the slack to the nearest bound. Violated atoms give
/// `+inf`. Structural atoms have no interior and contribute 0 when satisfied.
pub fn barrier_atom(atom: Atom, m: &Measures, inst: &ProblemInstance) -> Result<f64> {
    let inv = |margin: f64| 1.0 / (1.0 + margin);
    let range = |v: f64, (lo, hi): (f64, f64), what: &str| -> Result<f64> {
        if lo == hi {
            return Err(Error::Config(format!(
                "internal penalty cannot handle the equality constraint {what} = {lo}"
            )));
        }
        Ok(inv(v - lo) + inv(hi - v))
    };
    if violation_atom(atom, m, inst)? > 0.0 {
        return Ok(f64::INFINITY);
    }
    let hc = &m.headcount;
    Ok(match atom {
        Atom::K1 | Atom::O1 => 0.0,
        Atom::K2 => inv(m.min_coverage as f64 - 1.0),
        Atom::K3 => {
            let mut sum = 0.0;
            for (job, &t) in inst.jobs.iter().zip(&m.job_time) {
                sum += range(t, job.work_time_bounds, &format!("work time of `{}`", job.code))?;
            }
            sum
        }
        Atom::K4 => range(m.salary(inst), inst.salary_bounds, "salary")?,
        Atom::K5 => inv(inst.max_total_staff as f64 - hc.total() as f64),
        Atom::K6 => m.rest_days.iter().map(|&r| inv(inst.rest_cap as f64 - r as f64)).sum(),
        Atom::Y1 | Atom::O2 => {
            let (alpha, codes) = if atom == Atom::Y1 {
                let s = inst.emergency.as_ref().expect("violation_atom checked");
                (s.alpha, &s.jobs)
            } else {
                let s = inst.cooperation.as_ref().expect("violation_atom checked");
                (s.alpha, &s.jobs)
            };
            inv(releasable(inst, hc, codes)? as f64 - alpha as f64)
        }
        Atom::Y2 => {
            let mut sum = 0.0;
            for (job, &n) in inst.jobs.iter().zip(hc.counts()) {
                sum += range(
                    n as f64,
                    (job.headcount_min as f64, job.headcount_max as f64),
                    &format!("headcount of `{}`", job.code),
                )?;
            }
            sum
        }
    })
}

/// Barrier of a conjunction of atoms. Disjunctions and negations have no
/// interior to grow a barrier from and are rejected.
pub fn barrier_expr(e: &ConstraintExpr, m: &Measures, inst: &ProblemInstance) -> Result<f64> {
    match e {
        ConstraintExpr::Atom(a) => barrier_atom(*a, m, inst),
        ConstraintExpr::And(cs) => {
            let mut sum = 0.0;
            for c in cs {
                sum += barrier_expr(c, m, inst)?;
            }
            Ok(sum)
        }
        ConstraintExpr::Or(_) | ConstraintExpr::Not(_) => Err(Error::Config(
            "internal penalty needs a conjunction of inequality atoms; use the external method".into(),
        )),
    }
}
