//! Jobs, problem instances and the employee × slot × job attendance space.
//!
//! Time slots run day-major: day 0 MOR, AFT, EVN, MID, then day 1, and so
//! on. Employees are numbered by concatenating the staff of each job in job
//! order, so with headcounts `(2, 3)` employees 0..2 belong to job 0 and
//! 2..5 to job 1.

use std::io::Write;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::headcount_upper_bound;

pub const SHIFTS_PER_DAY: usize = 4;
pub const FORMAT_VERSION: u32 = 1;

/// Shift hours used when an instance does not list them.
pub const DEFAULT_SHIFT_HOURS: [f64; SHIFTS_PER_DAY] = [4.0, 4.0, 4.0, 8.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Shift {
    Morning,
    Afternoon,
    Evening,
    Midnight,
}

impl Shift {
    pub const ALL: [Shift; SHIFTS_PER_DAY] =
        [Shift::Morning, Shift::Afternoon, Shift::Evening, Shift::Midnight];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Shift> {
        Shift::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Shift::Morning => "MOR",
            Shift::Afternoon => "AFT",
            Shift::Evening => "EVN",
            Shift::Midnight => "MID",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub code: String,
    pub name: String,
    /// Wage paid for one attended shift, per slot (MOR, AFT, EVN, MID).
    pub wage_per_shift: [f64; SHIFTS_PER_DAY],
    /// Hours worked in each slot of a day.
    pub shift_hours: [f64; SHIFTS_PER_DAY],
    pub headcount_min: u32,
    pub headcount_max: u32,
    /// Allowed total working time of the job over the horizon, in hours.
    pub work_time_bounds: (f64, f64),
}

impl Job {
    /// Wage for one full day of attendance.
    pub fn daily_wage(&self) -> f64 {
        self.wage_per_shift.iter().sum()
    }
}

/// Hours an employee of `job` works on an attended day.
pub fn daily_work_hours(job: &Job) -> f64 {
    job.shift_hours.iter().sum()
}

/// An urgent task that pulls `alpha` staff off their regular duties.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmergencySpec {
    pub alpha: u32,
    pub time_cost: f64,
    pub bonus: f64,
    pub punishment: f64,
    pub daily_probability: f64,
    /// Codes of the jobs the withdrawn staff are drawn from. Empty means all jobs.
    #[serde(default)]
    pub jobs: Vec<String>,
}

/// A task needing `alpha` staff jointly drawn from a set of jobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CooperationSpec {
    pub alpha: u32,
    pub jobs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub jobs: Vec<Job>,
    pub horizon_days: usize,
    pub max_total_staff: u32,
    pub salary_bounds: (f64, f64),
    pub rest_cap: u32,
    pub emergency: Option<EmergencySpec>,
    pub cooperation: Option<CooperationSpec>,
    pub multi_shift: bool,
}

impl ProblemInstance {
    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn slots(&self) -> usize {
        self.horizon_days * SHIFTS_PER_DAY
    }

    pub fn work_time_bounds(&self) -> Vec<(f64, f64)> {
        self.jobs.iter().map(|j| j.work_time_bounds).collect()
    }

    pub fn lower_bounds(&self) -> Vec<u32> {
        self.jobs.iter().map(|j| j.headcount_min).collect()
    }

    pub fn upper_bounds(&self) -> Vec<u32> {
        self.jobs.iter().map(|j| j.headcount_max).collect()
    }

    pub fn job_index(&self, code: &str) -> Option<usize> {
        self.jobs.iter().position(|j| j.code == code)
    }

    /// Resolves job codes to indices; an empty list selects every job.
    pub fn resolve_jobs(&self, codes: &[String]) -> Result<Vec<usize>> {
        if codes.is_empty() {
            return Ok((0..self.jobs.len()).collect());
        }
        codes
            .iter()
            .map(|c| {
                self.job_index(c)
                    .ok_or_else(|| Error::Config(format!("unknown job code `{c}`")))
            })
            .collect()
    }

    /// Every violated invariant, as human readable diagnostics.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.jobs.is_empty() {
            out.push("instance has no jobs".to_string());
        }
        if self.horizon_days == 0 {
            out.push("horizon_days must be positive".to_string());
        }
        if self.max_total_staff == 0 {
            out.push("max_total_staff must be positive".to_string());
        }
        for (i, job) in self.jobs.iter().enumerate() {
            let tag = format!("job `{}`", job.code);
            if self.jobs[..i].iter().any(|o| o.code == job.code) {
                out.push(format!("{tag}: duplicate job code"));
            }
            if job.headcount_max == 0 {
                out.push(format!("{tag}: headcount_max must be positive"));
            }
            if job.headcount_min > job.headcount_max {
                out.push(format!(
                    "{tag}: headcount_min {} exceeds headcount_max {}",
                    job.headcount_min, job.headcount_max
                ));
            }
            if job.shift_hours.iter().any(|h| !(*h >= 0.0)) {
                out.push(format!("{tag}: shift hours must be nonnegative"));
            } else if job.shift_hours.iter().all(|h| *h == 0.0) {
                out.push(format!("{tag}: at least one shift must have positive hours"));
            }
            if job.wage_per_shift.iter().any(|w| !(*w >= 0.0)) {
                out.push(format!("{tag}: wages must be nonnegative"));
            }
            let (lo, hi) = job.work_time_bounds;
            if !(lo <= hi) {
                out.push(format!("{tag}: work time lower bound {lo} exceeds upper bound {hi}"));
            }
        }
        let min_total: u64 = self.jobs.iter().map(|j| j.headcount_min as u64).sum();
        if min_total > self.max_total_staff as u64 {
            out.push(format!(
                "sum of headcount minimums {min_total} exceeds max_total_staff {}",
                self.max_total_staff
            ));
        }
        let (cl, cu) = self.salary_bounds;
        if !(cl <= cu) {
            out.push(format!("salary lower bound {cl} exceeds upper bound {cu}"));
        }
        if let Some(e) = &self.emergency {
            if e.alpha == 0 {
                out.push("emergency: alpha must be positive".to_string());
            }
            if e.alpha > self.max_total_staff {
                out.push(format!(
                    "emergency: alpha {} exceeds max_total_staff {}",
                    e.alpha, self.max_total_staff
                ));
            }
            if !(0.0..=1.0).contains(&e.daily_probability) {
                out.push(format!(
                    "emergency: daily_probability {} outside [0, 1]",
                    e.daily_probability
                ));
            }
            if e.time_cost < 0.0 || e.bonus < 0.0 || e.punishment < 0.0 {
                out.push("emergency: time_cost, bonus and punishment must be nonnegative".into());
            }
            for c in e.jobs.iter().filter(|c| self.job_index(c).is_none()) {
                out.push(format!("emergency: unknown job code `{c}`"));
            }
        }
        if let Some(c) = &self.cooperation {
            if c.jobs.is_empty() {
                out.push("cooperation: job list is empty".to_string());
            }
            for code in c.jobs.iter().filter(|code| self.job_index(code).is_none()) {
                out.push(format!("cooperation: unknown job code `{code}`"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(d))
        }
    }

    /// Same instance over a different horizon, with the work-time and salary
    /// bounds rescaled proportionally.
    pub fn with_horizon(&self, days: usize) -> ProblemInstance {
        let scale = days as f64 / self.horizon_days.max(1) as f64;
        let mut out = self.clone();
        out.horizon_days = days;
        for job in &mut out.jobs {
            job.work_time_bounds = (job.work_time_bounds.0 * scale, job.work_time_bounds.1 * scale);
        }
        out.salary_bounds = (self.salary_bounds.0 * scale, self.salary_bounds.1 * scale);
        out
    }

    pub fn from_toml_str(text: &str) -> Result<ProblemInstance> {
        let doc: InstanceDocument = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        doc.into_instance()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ProblemInstance> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&InstanceDocument::from(self)).expect("instance documents always serialize")
    }
}

/// On-disk layout of an instance file.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceDocument {
    format_version: u32,
    #[serde(default)]
    name: String,
    horizon_days: usize,
    max_total_staff: u32,
    salary_bounds: (f64, f64),
    #[serde(default)]
    rest_cap: u32,
    #[serde(default)]
    multi_shift: bool,
    jobs: Vec<JobDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    emergency: Option<EmergencySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cooperation: Option<CooperationSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JobDocument {
    code: String,
    #[serde(default)]
    name: String,
    wage_per_shift: [f64; SHIFTS_PER_DAY],
    #[serde(default = "default_shift_hours")]
    shift_hours: [f64; SHIFTS_PER_DAY],
    headcount_min: u32,
    /// Derived from the headcount minimums and the staff cap when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    headcount_max: Option<u32>,
    work_time_bounds: (f64, f64),
}

fn default_shift_hours() -> [f64; SHIFTS_PER_DAY] {
    DEFAULT_SHIFT_HOURS
}

impl InstanceDocument {
    fn into_instance(self) -> Result<ProblemInstance> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let mut inst = ProblemInstance {
            name: self.name,
            jobs: self
                .jobs
                .iter()
                .map(|j| Job {
                    code: j.code.clone(),
                    name: j.name.clone(),
                    wage_per_shift: j.wage_per_shift,
                    shift_hours: j.shift_hours,
                    headcount_min: j.headcount_min,
                    headcount_max: j.headcount_max.unwrap_or(0),
                    work_time_bounds: j.work_time_bounds,
                })
                .collect(),
            horizon_days: self.horizon_days,
            max_total_staff: self.max_total_staff,
            salary_bounds: self.salary_bounds,
            rest_cap: self.rest_cap,
            emergency: self.emergency,
            cooperation: self.cooperation,
            multi_shift: self.multi_shift,
        };
        for (j, doc) in self.jobs.iter().enumerate() {
            if doc.headcount_max.is_none() {
                inst.jobs[j].headcount_max = headcount_upper_bound(&inst, j)?;
            }
        }
        Ok(inst)
    }
}

impl From<&ProblemInstance> for InstanceDocument {
    fn from(inst: &ProblemInstance) -> Self {
        InstanceDocument {
            format_version: FORMAT_VERSION,
            name: inst.name.clone(),
            horizon_days: inst.horizon_days,
            max_total_staff: inst.max_total_staff,
            salary_bounds: inst.salary_bounds,
            rest_cap: inst.rest_cap,
            multi_shift: inst.multi_shift,
            jobs: inst
                .jobs
                .iter()
                .map(|j| JobDocument {
                    code: j.code.clone(),
                    name: j.name.clone(),
                    wage_per_shift: j.wage_per_shift,
                    shift_hours: j.shift_hours,
                    headcount_min: j.headcount_min,
                    headcount_max: Some(j.headcount_max),
                    work_time_bounds: j.work_time_bounds,
                })
                .collect(),
            emergency: inst.emergency.clone(),
            cooperation: inst.cooperation.clone(),
        }
    }
}

/// Number of employees per job.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HeadcountVector(pub Vec<u32>);

impl HeadcountVector {
    pub fn new(counts: Vec<u32>) -> Self {
        HeadcountVector(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn check_against(&self, inst: &ProblemInstance) -> Result<()> {
        if self.len() != inst.job_count() {
            return Err(Error::Structural(format!(
                "headcount vector has {} entries, instance has {} jobs",
                self.len(),
                inst.job_count()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for HeadcountVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Maps global employee numbers to (job, ordinal within job).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaffLayout {
    offsets: Vec<usize>,
}

impl StaffLayout {
    pub fn new(hc: &HeadcountVector) -> Self {
        let mut offsets = Vec::with_capacity(hc.len() + 1);
        offsets.push(0);
        let mut acc = 0usize;
        for &c in hc.counts() {
            acc += c as usize;
            offsets.push(acc);
        }
        StaffLayout { offsets }
    }

    pub fn staff(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn jobs(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn employees_of(&self, job: usize) -> Range<usize> {
        self.offsets[job]..self.offsets[job + 1]
    }

    pub fn job_of(&self, employee: usize) -> Option<usize> {
        if employee >= self.staff() {
            return None;
        }
        // offsets is nondecreasing; the owning job is the last offset <= employee
        // among jobs that actually have staff.
        let pos = self.offsets.partition_point(|&o| o <= employee);
        Some(pos - 1)
    }

    pub fn headcount(&self) -> HeadcountVector {
        HeadcountVector(self.offsets.windows(2).map(|w| (w[1] - w[0]) as u32).collect())
    }
}

/// Binary attendance indexed by (employee, slot, job).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AttendanceTensor {
    staff: usize,
    slots: usize,
    jobs: usize,
    data: Vec<u8>,
}

impl AttendanceTensor {
    pub fn zeros(staff: usize, slots: usize, jobs: usize) -> Self {
        AttendanceTensor {
            staff,
            slots,
            jobs,
            data: vec![0; staff * slots * jobs],
        }
    }

    /// Day-level attendance: each employee works in their own job channel on
    /// every slot of the days where `attends(employee, day)` holds.
    pub fn from_days(layout: &StaffLayout, days: usize, mut attends: impl FnMut(usize, usize) -> bool) -> Self {
        let mut t = Self::zeros(layout.staff(), days * SHIFTS_PER_DAY, layout.jobs());
        for job in 0..layout.jobs() {
            for e in layout.employees_of(job) {
                for d in 0..days {
                    if attends(e, d) {
                        for s in 0..SHIFTS_PER_DAY {
                            t.set(e, d * SHIFTS_PER_DAY + s, job, true);
                        }
                    }
                }
            }
        }
        t
    }

    /// Shift-level attendance in each employee's own job channel.
    pub fn from_slots(layout: &StaffLayout, days: usize, mut attends: impl FnMut(usize, usize) -> bool) -> Self {
        let slots = days * SHIFTS_PER_DAY;
        let mut t = Self::zeros(layout.staff(), slots, layout.jobs());
        for job in 0..layout.jobs() {
            for e in layout.employees_of(job) {
                for s in 0..slots {
                    if attends(e, s) {
                        t.set(e, s, job, true);
                    }
                }
            }
        }
        t
    }

    /// Everyone works every slot of every day.
    pub fn full_attendance(hc: &HeadcountVector, days: usize) -> Self {
        Self::from_days(&StaffLayout::new(hc), days, |_, _| true)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.staff, self.slots, self.jobs)
    }

    pub fn staff(&self) -> usize {
        self.staff
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn days(&self) -> usize {
        self.slots / SHIFTS_PER_DAY
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    #[inline]
    fn offset(&self, employee: usize, slot: usize, job: usize) -> usize {
        debug_assert!(employee < self.staff && slot < self.slots && job < self.jobs);
        (employee * self.slots + slot) * self.jobs + job
    }

    #[inline]
    pub fn get(&self, employee: usize, slot: usize, job: usize) -> bool {
        self.data[self.offset(employee, slot, job)] != 0
    }

    #[inline]
    pub fn set(&mut self, employee: usize, slot: usize, job: usize, value: bool) {
        let o = self.offset(employee, slot, job);
        self.data[o] = value as u8;
    }

    pub fn activation_count(&self) -> usize {
        self.data.iter().filter(|&&b| b != 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&b| b == 0)
    }

    /// True when every (employee, day, job) has the same value on all four slots.
    pub fn is_day_consistent(&self) -> bool {
        (0..self.staff).all(|e| {
            (0..self.days()).all(|d| {
                (0..self.jobs).all(|j| {
                    let first = self.get(e, d * SHIFTS_PER_DAY, j);
                    (1..SHIFTS_PER_DAY).all(|s| self.get(e, d * SHIFTS_PER_DAY + s, j) == first)
                })
            })
        })
    }

    pub fn check_against(&self, inst: &ProblemInstance) -> Result<()> {
        if self.jobs != inst.job_count() || self.slots != inst.slots() {
            return Err(Error::Structural(format!(
                "tensor has {} slots × {} jobs, instance needs {} × {}",
                self.slots,
                self.jobs,
                inst.slots(),
                inst.job_count()
            )));
        }
        Ok(())
    }

    /// Writes one row per (employee, day, shift, job) cell.
    pub fn write_csv<W: Write>(&self, inst: &ProblemInstance, out: W) -> Result<()> {
        self.check_against(inst)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["employee", "day", "shift", "job", "attend"])?;
        for e in 0..self.staff {
            for slot in 0..self.slots {
                let shift = Shift::ALL[slot % SHIFTS_PER_DAY];
                for j in 0..self.jobs {
                    w.write_record([
                        e.to_string(),
                        (slot / SHIFTS_PER_DAY).to_string(),
                        shift.label().to_string(),
                        inst.jobs[j].code.clone(),
                        (self.get(e, slot, j) as u8).to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// One job's slice of the attendance tensor: rows are staff, columns are slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelMatrix {
    pub job: usize,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl ChannelMatrix {
    pub fn zeros(job: usize, rows: usize, cols: usize) -> Self {
        ChannelMatrix {
            job,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.cols + col] != 0
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.cols + col] = value as u8;
    }

    pub fn ones(&self) -> usize {
        self.data.iter().filter(|&&b| b != 0).count()
    }
}

pub fn separate_channels(tensor: &AttendanceTensor) -> Vec<ChannelMatrix> {
    (0..tensor.jobs)
        .map(|j| {
            let mut m = ChannelMatrix::zeros(j, tensor.staff, tensor.slots);
            for e in 0..tensor.staff {
                for s in 0..tensor.slots {
                    if tensor.get(e, s, j) {
                        m.set(e, s, true);
                    }
                }
            }
            m
        })
        .collect()
}

/// Inverse of [`separate_channels`]. Matrices must cover jobs `0..n` exactly
/// once and share one shape.
pub fn combine_channels(mats: &[ChannelMatrix]) -> Result<AttendanceTensor> {
    let Some(first) = mats.first() else {
        return Err(Error::Structural("no channel matrices to combine".into()));
    };
    let (rows, cols) = (first.rows, first.cols);
    if let Some(m) = mats.iter().find(|m| m.rows != rows || m.cols != cols) {
        return Err(Error::Structural(format!(
            "channel for job {} is {}×{}, expected {rows}×{cols}",
            m.job, m.rows, m.cols
        )));
    }
    let mut seen = vec![false; mats.len()];
    for m in mats {
        if m.job >= mats.len() || std::mem::replace(&mut seen[m.job], true) {
            return Err(Error::Structural(format!(
                "channel job indices must be a permutation of 0..{}, got {}",
                mats.len(),
                m.job
            )));
        }
    }
    let mut t = AttendanceTensor::zeros(rows, cols, mats.len());
    for m in mats {
        for e in 0..rows {
            for s in 0..cols {
                if m.get(e, s) {
                    t.set(e, s, m.job, true);
                }
            }
        }
    }
    Ok(t)
}

/// Total hours worked: for every attended cell, the hours of that job's slot.
pub fn total_work_time(tensor: &AttendanceTensor, inst: &ProblemInstance) -> Result<f64> {
    tensor.check_against(inst)?;
    let mut total = 0.0;
    for e in 0..tensor.staff {
        for s in 0..tensor.slots {
            for (j, job) in inst.jobs.iter().enumerate() {
                if tensor.get(e, s, j) {
                    total += job.shift_hours[s % SHIFTS_PER_DAY];
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::micro_instance;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn job_with_hours(hours: [f64; 4]) -> Job {
        Job {
            code: "x".into(),
            name: "x".into(),
            wage_per_shift: [1.0; 4],
            shift_hours: hours,
            headcount_min: 0,
            headcount_max: 1,
            work_time_bounds: (0.0, 1.0),
        }
    }

    fn random_tensor(rng: &mut ChaCha8Rng, staff: usize, slots: usize, jobs: usize) -> AttendanceTensor {
        let mut t = AttendanceTensor::zeros(staff, slots, jobs);
        for e in 0..staff {
            for s in 0..slots {
                for j in 0..jobs {
                    t.set(e, s, j, rng.gen_bool(0.5));
                }
            }
        }
        t
    }

    #[test]
    fn daily_hours_sum_the_four_slots() {
        assert_eq!(daily_work_hours(&job_with_hours([4.0, 4.0, 4.0, 8.0])), 20.0);
        assert_eq!(daily_work_hours(&job_with_hours([0.0; 4])), 0.0);
        assert_eq!(daily_work_hours(&job_with_hours([8.0, 0.0, 0.0, 0.0])), 8.0);
    }

    #[test]
    fn separate_zero_tensor() {
        let mats = separate_channels(&AttendanceTensor::zeros(2, 4, 2));
        assert_eq!(mats.len(), 2);
        for (j, m) in mats.iter().enumerate() {
            assert_eq!(m.job, j);
            assert_eq!((m.rows(), m.cols()), (2, 4));
            assert_eq!(m.ones(), 0);
        }
    }

    #[test]
    fn separate_single_entry() {
        let mut t = AttendanceTensor::zeros(2, 4, 2);
        t.set(0, 2, 1, true);
        let mats = separate_channels(&t);
        assert_eq!(mats[0].ones(), 0);
        assert_eq!(mats[1].ones(), 1);
        assert!(mats[1].get(0, 2));
    }

    #[test]
    fn combine_two_zero_matrices() {
        let t = combine_channels(&[ChannelMatrix::zeros(0, 1, 4), ChannelMatrix::zeros(1, 1, 4)]).unwrap();
        assert_eq!(t.dims(), (1, 4, 2));
        assert!(t.is_zero());
    }

    #[test]
    fn combine_single_matrix() {
        let mut m = ChannelMatrix::zeros(0, 2, 8);
        m.set(1, 5, true);
        let t = combine_channels(&[m]).unwrap();
        assert_eq!(t.dims(), (2, 8, 1));
        assert!(t.get(1, 5, 0));
        assert_eq!(t.activation_count(), 1);
    }

    #[test]
    fn combine_rejects_ragged_and_duplicate_channels() {
        let ragged = combine_channels(&[ChannelMatrix::zeros(0, 2, 4), ChannelMatrix::zeros(1, 2, 8)]);
        assert!(matches!(ragged, Err(Error::Structural(_))));
        let dup = combine_channels(&[ChannelMatrix::zeros(0, 2, 4), ChannelMatrix::zeros(0, 2, 4)]);
        assert!(matches!(dup, Err(Error::Structural(_))));
        assert!(combine_channels(&[]).is_err());
    }

    #[test]
    fn separate_combine_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = random_tensor(&mut rng, 5, 28, 3);
            assert_eq!(combine_channels(&separate_channels(&t)).unwrap(), t);
        }
    }

    #[test]
    fn total_work_time_cases() {
        let mut inst = micro_instance();
        inst.jobs.truncate(1);
        inst.jobs[0].shift_hours = [4.0, 4.0, 4.0, 8.0];
        let zero = AttendanceTensor::zeros(1, inst.slots(), 1);
        assert_eq!(total_work_time(&zero, &inst).unwrap(), 0.0);

        let mut t = zero.clone();
        t.set(0, 0, 0, true); // MOR
        t.set(0, 3, 0, true); // MID
        assert_eq!(total_work_time(&t, &inst).unwrap(), 12.0);

        let wrong = AttendanceTensor::zeros(1, 8, 1);
        assert!(total_work_time(&wrong, &inst).is_err());
    }

    #[test]
    fn total_work_time_matches_loop_oracle() {
        let mut inst = micro_instance();
        inst.horizon_days = 3;
        inst.jobs[0].shift_hours = [1.0, 2.0, 3.0, 5.0];
        inst.jobs[1].shift_hours = [7.0, 0.0, 11.0, 13.0];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t = random_tensor(&mut rng, 4, inst.slots(), 2);
            let mut oracle = 0.0;
            for e in 0..4 {
                for d in 0..3 {
                    for s in 0..4 {
                        for j in 0..2 {
                            if t.get(e, d * 4 + s, j) {
                                oracle += inst.jobs[j].shift_hours[s];
                            }
                        }
                    }
                }
            }
            assert_eq!(total_work_time(&t, &inst).unwrap(), oracle);
        }
    }

    #[test]
    fn staff_layout_numbering() {
        let layout = StaffLayout::new(&HeadcountVector(vec![2, 0, 3]));
        assert_eq!(layout.staff(), 5);
        assert_eq!(layout.employees_of(0), 0..2);
        assert_eq!(layout.employees_of(1), 2..2);
        assert_eq!(layout.employees_of(2), 2..5);
        assert_eq!(layout.job_of(1), Some(0));
        assert_eq!(layout.job_of(2), Some(2));
        assert_eq!(layout.job_of(5), None);
        assert_eq!(layout.headcount(), HeadcountVector(vec![2, 0, 3]));
    }

    #[test]
    fn day_constructors_are_day_consistent() {
        let layout = StaffLayout::new(&HeadcountVector(vec![2, 3]));
        let t = AttendanceTensor::from_days(&layout, 4, |e, d| (e + d) % 3 == 0);
        assert!(t.is_day_consistent());
        assert!(AttendanceTensor::full_attendance(&HeadcountVector(vec![1, 2]), 3).is_day_consistent());
        let s = AttendanceTensor::from_slots(&layout, 2, |e, s| e == 0 && s == 1);
        assert!(!s.is_day_consistent());
    }

    #[test]
    fn instance_toml_round_trip_and_derived_upper_bound() {
        let text = r#"
format_version = 1
name = "tiny"
horizon_days = 2
max_total_staff = 10
salary_bounds = [0.0, 1000.0]

[[jobs]]
code = "a"
wage_per_shift = [1.0, 1.0, 1.0, 1.0]
headcount_min = 2
work_time_bounds = [0.0, 500.0]

[[jobs]]
code = "b"
wage_per_shift = [1.0, 1.0, 1.0, 1.0]
shift_hours = [8.0, 0.0, 0.0, 0.0]
headcount_min = 3
work_time_bounds = [0.0, 500.0]
"#;
        let inst = ProblemInstance::from_toml_str(text).unwrap();
        assert_eq!(inst.jobs[0].shift_hours, DEFAULT_SHIFT_HOURS);
        assert_eq!(inst.upper_bounds(), vec![4, 6]);
        let back = ProblemInstance::from_toml_str(&inst.to_toml_string()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_unknown_format_version() {
        let err = ProblemInstance::from_toml_str(
            "format_version = 9\nhorizon_days = 1\nmax_total_staff = 1\nsalary_bounds = [0.0, 1.0]\njobs = []\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn diagnostics_name_the_offending_job() {
        let mut inst = micro_instance();
        assert!(inst.diagnostics().is_empty());
        inst.jobs[1].headcount_min = 5;
        let d = inst.diagnostics();
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("`b`"), "{d:?}");
        inst.jobs[1].headcount_min = 1;
        inst.max_total_staff = 1;
        let d = inst.diagnostics();
        assert!(d.iter().any(|m| m.contains("max_total_staff")), "{d:?}");
    }

    #[test]
    fn tensor_csv_has_one_row_per_cell() {
        let inst = micro_instance();
        let t = AttendanceTensor::full_attendance(&HeadcountVector(vec![1, 1]), inst.horizon_days);
        let mut buf = Vec::new();
        t.write_csv(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "employee,day,shift,job,attend");
        assert_eq!(lines.len(), 1 + 2 * inst.slots() * 2);
        assert_eq!(lines[1], "0,0,MOR,a,1");
        assert_eq!(lines[2], "0,0,MOR,b,0");
    }

    proptest! {
        #[test]
        fn separate_combine_is_identity(bits in proptest::collection::vec(any::<bool>(), 3 * 8 * 2)) {
            let mut t = AttendanceTensor::zeros(3, 8, 2);
            let mut it = bits.into_iter();
            for e in 0..3 { for s in 0..8 { for j in 0..2 { t.set(e, s, j, it.next().unwrap()); } } }
            prop_assert_eq!(combine_channels(&separate_channels(&t)).unwrap(), t);
        }

        #[test]
        fn total_work_time_is_monotone(bits in proptest::collection::vec(any::<bool>(), 2 * 4 * 2), flip in 0usize..16) {
            let inst = micro_instance();
            let mut t = AttendanceTensor::zeros(2, 4, 2);
            for (k, b) in bits.iter().enumerate() {
                t.set(k / 8, (k / 2) % 4, k % 2, *b);
            }
            let before = total_work_time(&t, &inst).unwrap();
            t.set(flip / 8, (flip / 2) % 4, flip % 2, true);
            prop_assert!(total_work_time(&t, &inst).unwrap() >= before);
        }
    }
}
