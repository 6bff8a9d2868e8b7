//! Randomized roster generation.
//!
//! Each day, members are drawn uniformly at random and kept when a
//! [`SuitablePolicy`] admits them, until the day's need is met. Counters of
//! assignments per member run across the whole horizon, so a capped policy
//! spreads work evenly. Rotations assign positions cyclically instead.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{daily_work_hours, AttendanceTensor, HeadcountVector, ProblemInstance, Shift, StaffLayout, SHIFTS_PER_DAY};
use crate::error::{Error, Result};

/// Draws per slot before a day is declared unfillable.
pub const MAX_RETRIES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// The whole day.
    Day,
    Shift(Shift),
    /// A numbered post in a rotation.
    Position(usize),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Day => write!(f, "DAY"),
            Slot::Shift(s) => write!(f, "{}", s.label()),
            Slot::Position(p) => write!(f, "P{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub day: usize,
    pub slot: Slot,
    pub job: usize,
    pub employee: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScheduleTable {
    pub days: usize,
    pub assignments: Vec<Assignment>,
}

impl ScheduleTable {
    /// Assignment count per employee id, indexed up to the largest id.
    pub fn loads(&self) -> Vec<usize> {
        let n = self.assignments.iter().map(|a| a.employee + 1).max().unwrap_or(0);
        let mut loads = vec![0; n];
        for a in &self.assignments {
            loads[a.employee] += 1;
        }
        loads
    }

    pub fn on_day(&self, day: usize) -> impl Iterator<Item = &Assignment> {
        self.assignments.iter().filter(move |a| a.day == day)
    }

    /// Concatenates tables, ordered by day then job. Within a (day, job)
    /// pair the original pick order is kept, which [`replay`] relies on.
    pub fn merge(tables: impl IntoIterator<Item = ScheduleTable>) -> ScheduleTable {
        let mut out = ScheduleTable::default();
        for t in tables {
            out.days = out.days.max(t.days);
            out.assignments.extend(t.assignments);
        }
        out.assignments.sort_by_key(|a| (a.day, a.job));
        out
    }

    /// Header `day,slot,job,employee`. Jobs are written by code when an
    /// instance is given.
    pub fn write_csv<W: Write>(&self, inst: Option<&ProblemInstance>, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["day", "slot", "job", "employee"])?;
        for a in &self.assignments {
            let job = inst
                .and_then(|i| i.jobs.get(a.job))
                .map_or_else(|| a.job.to_string(), |j| j.code.clone());
            w.write_record([a.day.to_string(), a.slot.to_string(), job, a.employee.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// What a policy sees when judging a candidate. Members are referred to by
/// their position in `members`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorState {
    pub members: Vec<usize>,
    /// Assignments so far per member.
    pub workable: Vec<usize>,
    pub day: usize,
    pub needs: Vec<usize>,
    /// Member positions chosen on each day so far.
    pub worktime: Vec<Vec<usize>>,
}

impl GeneratorState {
    pub fn new(members: &[usize], needs: &[usize]) -> Self {
        GeneratorState {
            members: members.to_vec(),
            workable: vec![0; members.len()],
            day: 0,
            needs: needs.to_vec(),
            worktime: Vec::new(),
        }
    }

    pub fn days(&self) -> usize {
        self.needs.len()
    }

    /// Days left including the current one.
    pub fn remaining_days(&self) -> usize {
        self.days() - self.day
    }

    pub fn chosen_today(&self, member: usize) -> bool {
        self.worktime.get(self.day).is_some_and(|d| d.contains(&member))
    }

    /// Picks still owed today and on later days.
    pub fn remaining_need(&self) -> usize {
        let today = self.worktime.get(self.day).map_or(0, |d| d.len());
        self.needs[self.day] - today + self.needs[self.day + 1..].iter().sum::<usize>()
    }

    fn record_day_start(&mut self) {
        while self.worktime.len() <= self.day {
            self.worktime.push(Vec::new());
        }
    }

    fn record(&mut self, member: usize) {
        self.record_day_start();
        self.worktime[self.day].push(member);
        self.workable[member] += 1;
    }
}

pub trait SuitablePolicy {
    /// Whether `member` may be chosen next. Must depend only on its inputs.
    fn admits(&self, member: usize, state: &GeneratorState) -> bool;
}

/// At most `cap` assignments per member over the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CapPolicy {
    pub cap: usize,
}

impl CapPolicy {
    /// Cap from the job's work-time ceiling shared evenly over its members,
    /// never more than the horizon.
    pub fn for_job(inst: &ProblemInstance, job: usize, members: usize) -> CapPolicy {
        let hours = daily_work_hours(&inst.jobs[job]);
        let days = inst.horizon_days;
        if hours <= 0.0 || members == 0 {
            return CapPolicy { cap: days };
        }
        let share = inst.jobs[job].work_time_bounds.1 / (hours * members as f64);
        CapPolicy {
            cap: (share.floor() as usize).min(days),
        }
    }
}

impl SuitablePolicy for CapPolicy {
    fn admits(&self, member: usize, state: &GeneratorState) -> bool {
        state.workable[member] < self.cap
    }
}

/// Admits only members whose load is minimal among those not yet chosen
/// today. Loads then never differ by more than one, so every member ends
/// with the floor or ceiling of the even split, whatever the daily needs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BalancedPolicy;

impl SuitablePolicy for BalancedPolicy {
    fn admits(&self, member: usize, state: &GeneratorState) -> bool {
        let least = (0..state.members.len())
            .filter(|&i| !state.chosen_today(i))
            .map(|i| state.workable[i])
            .min();
        least.is_some_and(|l| state.workable[member] == l)
    }
}

/// Fills `needs[d]` distinct members on every day `d`.
pub fn generate_table(
    members: &[usize],
    job: usize,
    needs: &[usize],
    policy: &dyn SuitablePolicy,
    seed: u64,
) -> Result<ScheduleTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GeneratorState::new(members, needs);
    let mut table = ScheduleTable {
        days: needs.len(),
        assignments: Vec::new(),
    };
    for (day, &need) in needs.iter().enumerate() {
        state.day = day;
        state.record_day_start();
        if need > members.len() {
            return Err(Error::GenerationFailed {
                day,
                reason: format!("need {need} exceeds the {} members", members.len()),
            });
        }
        for _ in 0..need {
            let mut tries = 0;
            let chosen = loop {
                let man = rng.gen_range(0..members.len());
                if !state.chosen_today(man) && policy.admits(man, &state) {
                    break man;
                }
                tries += 1;
                if tries >= MAX_RETRIES {
                    return Err(Error::GenerationFailed {
                        day,
                        reason: format!("no admissible member after {MAX_RETRIES} draws"),
                    });
                }
            };
            state.record(chosen);
            table.assignments.push(Assignment {
                day,
                slot: Slot::Day,
                job,
                employee: members[chosen],
            });
        }
    }
    Ok(table)
}

/// Re-runs the selections of a table produced by [`generate_table`] and
/// returns the index of the first assignment the policy would not have
/// admitted, or that repeats a member on the same day.
pub fn replay(table: &ScheduleTable, members: &[usize], needs: &[usize], policy: &dyn SuitablePolicy) -> Option<usize> {
    let mut state = GeneratorState::new(members, needs);
    for (k, a) in table.assignments.iter().enumerate() {
        if a.day >= needs.len() || a.day < state.day {
            return Some(k);
        }
        state.day = a.day;
        state.record_day_start();
        let Some(pos) = members.iter().position(|&m| m == a.employee) else {
            return Some(k);
        };
        if state.chosen_today(pos) || !policy.admits(pos, &state) {
            return Some(k);
        }
        state.record(pos);
    }
    let filled = (0..needs.len()).all(|d| table.on_day(d).count() == needs[d]);
    (!filled).then_some(table.assignments.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSpec {
    pub positions: usize,
    pub people: usize,
    /// Sequence in which people take turns; a permutation of `0..people`.
    pub order: Vec<usize>,
}

impl RotationSpec {
    pub fn new(positions: usize, people: usize) -> Self {
        RotationSpec {
            positions,
            people,
            order: (0..people).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions == 0 || self.people == 0 {
            return Err(Error::Config("a rotation needs at least one position and one person".into()));
        }
        if self.people < self.positions {
            return Err(Error::Config(format!(
                "{} people cannot cover {} positions",
                self.people, self.positions
            )));
        }
        let mut seen = vec![false; self.people];
        if self.order.len() != self.people || !self.order.iter().all(|&p| p < self.people && !std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Config("rotation order must be a permutation of the people".into()));
        }
        Ok(())
    }
}

/// Day `d`, position `p` goes to `order[(d * positions + p) mod people]`.
pub fn generate_rotation(spec: &RotationSpec, days: usize) -> Result<ScheduleTable> {
    spec.validate()?;
    let mut assignments = Vec::with_capacity(days * spec.positions);
    for day in 0..days {
        for p in 0..spec.positions {
            assignments.push(Assignment {
                day,
                slot: Slot::Position(p),
                job: 0,
                employee: spec.order[(day * spec.positions + p) % spec.people],
            });
        }
    }
    Ok(ScheduleTable { days, assignments })
}

/// Attendance tensor of a table whose employee ids are global staff numbers
/// for `hc`.
pub fn table_to_tensor(table: &ScheduleTable, inst: &ProblemInstance, hc: &HeadcountVector) -> Result<AttendanceTensor> {
    hc.check_against(inst)?;
    let staff = hc.total() as usize;
    let mut t = AttendanceTensor::zeros(staff, inst.slots(), inst.job_count());
    for a in &table.assignments {
        if a.employee >= staff {
            return Err(Error::Structural(format!("unknown employee {} (staff of {staff})", a.employee)));
        }
        if a.job >= inst.job_count() || a.day >= inst.horizon_days {
            return Err(Error::Structural(format!(
                "assignment to job {} on day {} is outside the instance",
                a.job, a.day
            )));
        }
        let base = a.day * SHIFTS_PER_DAY;
        match a.slot {
            Slot::Day => {
                for s in 0..SHIFTS_PER_DAY {
                    t.set(a.employee, base + s, a.job, true);
                }
            }
            Slot::Shift(s) => t.set(a.employee, base + s.index(), a.job, true),
            Slot::Position(_) => {
                return Err(Error::Structural("rotation positions do not map to instance slots".into()));
            }
        }
    }
    Ok(t)
}

/// Attendees per job and day of a roster tensor.
pub fn needs_from_tensor(tensor: &AttendanceTensor, hc: &HeadcountVector) -> Vec<Vec<usize>> {
    let layout = StaffLayout::new(hc);
    (0..layout.jobs())
        .map(|j| {
            (0..tensor.days())
                .map(|d| {
                    layout
                        .employees_of(j)
                        .filter(|&e| (0..SHIFTS_PER_DAY).any(|s| tensor.get(e, d * SHIFTS_PER_DAY + s, j)))
                        .count()
                })
                .collect()
        })
        .collect()
}

/// Daily need per job so that an even split leaves each member at most
/// `rest_cap` days off: `ceil(N * (D - rest_cap) / D)`.
pub fn default_needs(inst: &ProblemInstance, hc: &HeadcountVector) -> Vec<Vec<usize>> {
    let d = inst.horizon_days;
    let work_days = d.saturating_sub(inst.rest_cap as usize);
    hc.counts()
        .iter()
        .map(|&n| {
            let n = n as usize;
            let need = if d == 0 { 0 } else { (n * work_days).div_ceil(d).max((n > 0) as usize) };
            vec![need; d]
        })
        .collect()
}

/// Tables for every job with [`BalancedPolicy`], one random stream per job.
pub fn generate_roster(inst: &ProblemInstance, hc: &HeadcountVector, needs: &[Vec<usize>], seed: u64) -> Result<ScheduleTable> {
    hc.check_against(inst)?;
    if needs.len() != inst.job_count() {
        return Err(Error::Structural(format!(
            "needs for {} jobs, instance has {}",
            needs.len(),
            inst.job_count()
        )));
    }
    let layout = StaffLayout::new(hc);
    let mut tables = Vec::with_capacity(inst.job_count());
    for (j, need) in needs.iter().enumerate() {
        let members: Vec<usize> = layout.employees_of(j).collect();
        let stream = seed.wrapping_add((j as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        tables.push(generate_table(&members, j, need, &BalancedPolicy, stream)?);
    }
    let mut out = ScheduleTable::merge(tables);
    out.days = inst.horizon_days;
    Ok(out)
}
