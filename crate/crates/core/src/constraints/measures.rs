use crate::domain::{AttendanceTensor, HeadcountVector, ProblemInstance, StaffLayout, SHIFTS_PER_DAY};
use crate::error::{Error, Result};

/// Aggregate quantities of a candidate solution that every atom and
/// objective is computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct Measures {
    pub headcount: HeadcountVector,
    /// Hours worked per job over the horizon.
    pub job_time: Vec<f64>,
    pub total_time: f64,
    /// Salary paid per attended employee-day at the job's daily wage.
    pub day_salary: f64,
    /// Salary paid per attended shift at that shift's wage.
    pub shift_salary: f64,
    /// (job, day) pairs without a single attendee.
    pub vacancies: usize,
    /// Fewest attendees of any job on any day.
    pub min_coverage: u32,
    /// Days off per employee.
    pub rest_days: Vec<u32>,
    /// Employees with attendance outside their own job channel.
    pub multi_duty: usize,
    /// Single-shift mode: (employee, day, job) cells whose four slots differ.
    /// Multi-shift mode: (employee, day) pairs without any shift.
    pub shift_breaks: usize,
}

impl Measures {
    pub fn from_tensor(tensor: &AttendanceTensor, hc: &HeadcountVector, inst: &ProblemInstance) -> Result<Measures> {
        hc.check_against(inst)?;
        tensor.check_against(inst)?;
        let layout = StaffLayout::new(hc);
        if tensor.staff() != layout.staff() {
            return Err(Error::Structural(format!(
                "tensor has {} employees, headcount vector totals {}",
                tensor.staff(),
                layout.staff()
            )));
        }
        let jobs = inst.job_count();
        let days = inst.horizon_days;
        let mut job_time = vec![0.0; jobs];
        let mut day_salary = 0.0;
        let mut shift_salary = 0.0;
        let mut coverage = vec![0u32; jobs * days];
        let mut rest_days = vec![0u32; tensor.staff()];
        let mut multi_duty = 0;
        let mut shift_breaks = 0;

        for (e, rest) in rest_days.iter_mut().enumerate() {
            let own = layout.job_of(e);
            let mut strays = false;
            for d in 0..days {
                let mut worked_today = false;
                for (j, job) in inst.jobs.iter().enumerate() {
                    let mut any = false;
                    let mut all = true;
                    for s in 0..SHIFTS_PER_DAY {
                        if tensor.get(e, d * SHIFTS_PER_DAY + s, j) {
                            any = true;
                            job_time[j] += job.shift_hours[s];
                            shift_salary += job.wage_per_shift[s];
                        } else {
                            all = false;
                        }
                    }
                    if any {
                        worked_today = true;
                        coverage[j * days + d] += 1;
                        day_salary += job.daily_wage();
                        if Some(j) != own {
                            strays = true;
                        }
                        if !inst.multi_shift && !all {
                            shift_breaks += 1;
                        }
                    }
                }
                if !worked_today {
                    *rest += 1;
                    if inst.multi_shift {
                        shift_breaks += 1;
                    }
                }
            }
            if strays {
                multi_duty += 1;
            }
        }

        Ok(Measures {
            headcount: hc.clone(),
            total_time: job_time.iter().sum(),
            job_time,
            day_salary,
            shift_salary,
            vacancies: coverage.iter().filter(|&&c| c == 0).count(),
            min_coverage: coverage.iter().copied().min().unwrap_or(0),
            rest_days,
            multi_duty,
            shift_breaks,
        })
    }

    /// Closed form of [`Measures::from_tensor`] on the full-attendance
    /// tensor of `hc`.
    pub fn full_attendance(hc: &HeadcountVector, inst: &ProblemInstance) -> Result<Measures> {
        hc.check_against(inst)?;
        let days = inst.horizon_days as f64;
        let job_time: Vec<f64> = inst
            .jobs
            .iter()
            .zip(hc.counts())
            .map(|(job, &n)| n as f64 * days * crate::domain::daily_work_hours(job))
            .collect();
        let salary = days
            * inst
                .jobs
                .iter()
                .zip(hc.counts())
                .map(|(job, &n)| n as f64 * job.daily_wage())
                .sum::<f64>();
        let unstaffed = hc.counts().iter().filter(|&&n| n == 0).count();
        Ok(Measures {
            headcount: hc.clone(),
            total_time: job_time.iter().sum(),
            job_time,
            day_salary: salary,
            shift_salary: salary,
            vacancies: unstaffed * inst.horizon_days,
            min_coverage: if inst.horizon_days == 0 {
                0
            } else {
                hc.counts().iter().copied().min().unwrap_or(0)
            },
            rest_days: vec![0; hc.total() as usize],
            multi_duty: 0,
            shift_breaks: 0,
        })
    }

    /// Salary under the instance's cost model.
    pub fn salary(&self, inst: &ProblemInstance) -> f64 {
        if inst.multi_shift {
            self.shift_salary
        } else {
            self.day_salary
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{micro_instance, reference_like};

    #[test]
    fn closed_form_matches_full_attendance_tensor() {
        for inst in [micro_instance(), reference_like()] {
            let hc = HeadcountVector(inst.lower_bounds().iter().map(|&l| l.max(1) + 1).collect());
            let t = AttendanceTensor::full_attendance(&hc, inst.horizon_days);
            let a = Measures::from_tensor(&t, &hc, &inst).unwrap();
            let b = Measures::full_attendance(&hc, &inst).unwrap();
            assert_eq!(a.job_time, b.job_time);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn counts_rest_days_and_vacancies() {
        let mut inst = micro_instance();
        inst.horizon_days = 3;
        let hc = HeadcountVector(vec![2, 1]);
        let layout = StaffLayout::new(&hc);
        // employee 0 works day 0 only, employee 1 never, employee 2 (job b) days 1 and 2
        let t = AttendanceTensor::from_days(&layout, 3, |e, d| matches!((e, d), (0, 0) | (2, 1) | (2, 2)));
        let m = Measures::from_tensor(&t, &hc, &inst).unwrap();
        assert_eq!(m.rest_days, vec![2, 3, 1]);
        // job a uncovered on days 1,2; job b uncovered on day 0
        assert_eq!(m.vacancies, 3);
        assert_eq!(m.min_coverage, 0);
        assert_eq!(m.multi_duty, 0);
        assert_eq!(m.shift_breaks, 0);
    }

    #[test]
    fn detects_multi_duty_and_broken_days() {
        let inst = micro_instance();
        let hc = HeadcountVector(vec![1, 1]);
        let mut t = AttendanceTensor::zeros(2, inst.slots(), 2);
        t.set(0, 0, 1, true); // employee of job a attends job b's morning slot
        let m = Measures::from_tensor(&t, &hc, &inst).unwrap();
        assert_eq!(m.multi_duty, 1);
        assert_eq!(m.shift_breaks, 1);
    }

    #[test]
    fn staff_mismatch_is_structural() {
        let inst = micro_instance();
        let t = AttendanceTensor::zeros(3, inst.slots(), 2);
        let err = Measures::from_tensor(&t, &HeadcountVector(vec![1, 1]), &inst).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }
}
