//! Objective functions and bundles.
//!
//! Every objective reads a [`Measures`] value. Bundles with one objective go
//! to the single-objective solvers, bundles with two or more to the Pareto
//! search. Maximized objectives are handled as minimization of the negated
//! value.

use std::fmt;
use std::sync::Arc;

use crate::constraints::Measures;
use crate::domain::{daily_work_hours, AttendanceTensor, HeadcountVector, ProblemInstance, SHIFTS_PER_DAY};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone)]
pub struct CustomObjective {
    pub name: String,
    pub func: Arc<dyn Fn(&Measures) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomObjective({})", self.name)
    }
}

#[derive(Clone, Debug)]
pub enum ObjectiveKind {
    TotalTime,
    /// Day-level salary: attended employee-days times the job's daily wage.
    Salary,
    /// Shift-level salary: attended shifts times that shift's wage.
    MultiShiftSalary,
    /// Sum of the headcounts of the listed jobs.
    Headcount(Vec<usize>),
    Custom(CustomObjective),
}

#[derive(Clone, Debug)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub direction: Direction,
}

impl Objective {
    pub fn minimize(kind: ObjectiveKind) -> Self {
        Objective {
            kind,
            direction: Direction::Minimize,
        }
    }

    pub fn maximize(kind: ObjectiveKind) -> Self {
        Objective {
            kind,
            direction: Direction::Maximize,
        }
    }

    pub fn custom(name: &str, direction: Direction, func: impl Fn(&Measures) -> f64 + Send + Sync + 'static) -> Self {
        Objective {
            kind: ObjectiveKind::Custom(CustomObjective {
                name: name.to_string(),
                func: Arc::new(func),
            }),
            direction,
        }
    }

    /// Parses `total_time`, `salary`, `salary_ms` or `headcount:a+c+e`,
    /// optionally prefixed with `min:` or `max:`.
    pub fn parse(token: &str, inst: &ProblemInstance) -> Result<Objective> {
        let (direction, body) = if let Some(rest) = token.strip_prefix("max:") {
            (Direction::Maximize, rest)
        } else {
            (Direction::Minimize, token.strip_prefix("min:").unwrap_or(token))
        };
        let kind = match body {
            "total_time" => ObjectiveKind::TotalTime,
            "salary" => ObjectiveKind::Salary,
            "salary_ms" => ObjectiveKind::MultiShiftSalary,
            _ => {
                let Some(codes) = body.strip_prefix("headcount:") else {
                    return Err(Error::Config(format!("unknown objective `{token}`")));
                };
                let codes: Vec<String> = codes.split('+').map(|c| c.trim().to_string()).collect();
                if codes.iter().any(|c| c.is_empty()) {
                    return Err(Error::Config(format!("empty job code in `{token}`")));
                }
                ObjectiveKind::Headcount(inst.resolve_jobs(&codes)?)
            }
        };
        Ok(Objective { kind, direction })
    }

    /// Token form, with headcount jobs named by their codes in `inst`.
    pub fn label(&self, inst: &ProblemInstance) -> String {
        let body = match &self.kind {
            ObjectiveKind::TotalTime => "total_time".to_string(),
            ObjectiveKind::Salary => "salary".to_string(),
            ObjectiveKind::MultiShiftSalary => "salary_ms".to_string(),
            ObjectiveKind::Headcount(idx) => format!(
                "headcount:{}",
                idx.iter()
                    .map(|&i| inst.jobs.get(i).map_or_else(|| i.to_string(), |j| j.code.clone()))
                    .collect::<Vec<_>>()
                    .join("+")
            ),
            ObjectiveKind::Custom(c) => c.name.clone(),
        };
        match self.direction {
            Direction::Minimize => body,
            Direction::Maximize => format!("max:{body}"),
        }
    }

    pub fn check(&self, inst: &ProblemInstance) -> Result<()> {
        if let ObjectiveKind::Headcount(idx) = &self.kind {
            if let Some(bad) = idx.iter().find(|&&i| i >= inst.job_count()) {
                return Err(Error::Config(format!("headcount objective names job index {bad}")));
            }
        }
        Ok(())
    }

    pub fn value(&self, m: &Measures) -> f64 {
        match &self.kind {
            ObjectiveKind::TotalTime => m.total_time,
            ObjectiveKind::Salary => m.day_salary,
            ObjectiveKind::MultiShiftSalary => m.shift_salary,
            ObjectiveKind::Headcount(idx) => headcount_subset(&m.headcount, idx) as f64,
            ObjectiveKind::Custom(c) => (c.func)(m),
        }
    }

    /// Value in minimization form.
    pub fn normalized(&self, m: &Measures) -> f64 {
        match self.direction {
            Direction::Minimize => self.value(m),
            Direction::Maximize => -self.value(m),
        }
    }

    /// Undo [`Objective::normalized`].
    pub fn denormalize(&self, v: f64) -> f64 {
        match self.direction {
            Direction::Minimize => v,
            Direction::Maximize => -v,
        }
    }

    /// Built-in objectives never decrease when a headcount grows under full
    /// attendance (hours and wages are nonnegative).
    pub fn monotone_in_headcount(&self) -> bool {
        !matches!(self.kind, ObjectiveKind::Custom(_))
    }
}

#[derive(Clone, Debug)]
pub struct ObjectiveBundle(Vec<Objective>);

impl ObjectiveBundle {
    pub fn new(objectives: Vec<Objective>) -> Result<Self> {
        if objectives.is_empty() {
            return Err(Error::Config("an objective bundle needs at least one objective".into()));
        }
        Ok(ObjectiveBundle(objectives))
    }

    pub fn single(objective: Objective) -> Self {
        ObjectiveBundle(vec![objective])
    }

    pub fn parse(tokens: &[String], inst: &ProblemInstance) -> Result<Self> {
        Self::new(tokens.iter().map(|t| Objective::parse(t, inst)).collect::<Result<_>>()?)
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_single(&self) -> bool {
        self.0.len() == 1
    }

    pub fn check(&self, inst: &ProblemInstance) -> Result<()> {
        self.0.iter().try_for_each(|o| o.check(inst))
    }

    /// The lone objective of a single-objective bundle.
    pub fn sole(&self) -> Result<&Objective> {
        match self.0.as_slice() {
            [o] => Ok(o),
            _ => Err(Error::Config(format!(
                "single-objective solver given {} objectives",
                self.0.len()
            ))),
        }
    }

    pub fn normalized(&self, m: &Measures) -> Vec<f64> {
        self.0.iter().map(|o| o.normalized(m)).collect()
    }
}

/// Hours worked by job `job` counted per attended day at the job's daily hours.
pub fn f1_job_time(tensor: &AttendanceTensor, job: usize, inst: &ProblemInstance) -> Result<f64> {
    tensor.check_against(inst)?;
    let hours = daily_work_hours(&inst.jobs[job]);
    let mut days_worked = 0usize;
    for e in 0..tensor.staff() {
        for d in 0..tensor.days() {
            if (0..SHIFTS_PER_DAY).any(|s| tensor.get(e, d * SHIFTS_PER_DAY + s, job)) {
                days_worked += 1;
            }
        }
    }
    Ok(days_worked as f64 * hours)
}

/// Salary over the horizon when everyone attends every day.
pub fn f2_total_salary(hc: &HeadcountVector, inst: &ProblemInstance) -> f64 {
    inst.horizon_days as f64
        * inst
            .jobs
            .iter()
            .zip(hc.counts())
            .map(|(job, &n)| n as f64 * job.daily_wage())
            .sum::<f64>()
}

/// Salary paid per attended shift.
pub fn f3_multishift_salary(tensor: &AttendanceTensor, inst: &ProblemInstance) -> Result<f64> {
    tensor.check_against(inst)?;
    let mut total = 0.0;
    for e in 0..tensor.staff() {
        for s in 0..tensor.slots() {
            for (j, job) in inst.jobs.iter().enumerate() {
                if tensor.get(e, s, j) {
                    total += job.wage_per_shift[s % SHIFTS_PER_DAY];
                }
            }
        }
    }
    Ok(total)
}

pub fn headcount_subset(hc: &HeadcountVector, indices: &[usize]) -> u32 {
    indices.iter().map(|&i| hc.0[i]).sum()
}

/// Upper headcount of `job` as its share of the staff cap, proportional to
/// its minimum, rounded down.
pub fn headcount_upper_bound(inst: &ProblemInstance, job: usize) -> Result<u32> {
    let denom: u64 = inst.jobs.iter().map(|j| j.headcount_min as u64).sum();
    if denom == 0 {
        return Err(Error::Config(
            "cannot derive headcount upper bounds: all headcount minimums are zero".into(),
        ));
    }
    Ok((inst.jobs[job].headcount_min as u64 * inst.max_total_staff as u64 / denom) as u32)
}
