//! Built-in instances.
//!
//! `shopping_mall` is an illustrative six-job staffing problem (manager,
//! clerk, guard, salesclerk, tallyclerk, cleaner) with a staff cap of 60 over
//! one week. Its wages, hours and bounds are made up; they are chosen so the
//! salary floor couples the jobs and the optimum is not simply every job at
//! its minimum. `instances/reference.toml` holds the same data.

use crate::domain::{CooperationSpec, EmergencySpec, Job, ProblemInstance};

fn job(code: &str, name: &str, wage: [f64; 4], hours: [f64; 4], n: (u32, u32), t: (f64, f64)) -> Job {
    Job {
        code: code.into(),
        name: name.into(),
        wage_per_shift: wage,
        shift_hours: hours,
        headcount_min: n.0,
        headcount_max: n.1,
        work_time_bounds: t,
    }
}

pub fn shopping_mall() -> ProblemInstance {
    ProblemInstance {
        name: "shopping-mall".into(),
        jobs: vec![
            job("a", "manager", [30.0, 30.0, 0.0, 0.0], [4.0, 4.0, 0.0, 0.0], (2, 8), (160.0, 400.0)),
            job("b", "clerk", [12.0, 12.0, 0.0, 0.0], [4.0, 4.0, 0.0, 0.0], (6, 16), (540.0, 900.0)),
            job("c", "guard", [0.0, 0.0, 16.0, 28.0], [0.0, 0.0, 4.0, 8.0], (2, 8), (240.0, 800.0)),
            job("d", "salesclerk", [12.0, 12.0, 12.0, 0.0], [4.0, 4.0, 4.0, 0.0], (5, 14), (640.0, 1400.0)),
            job("e", "tallyclerk", [12.0, 12.0, 0.0, 0.0], [4.0, 4.0, 0.0, 0.0], (4, 10), (300.0, 700.0)),
            job("f", "cleaner", [10.0, 0.0, 0.0, 10.0], [4.0, 0.0, 0.0, 4.0], (5, 12), (420.0, 900.0)),
        ],
        horizon_days: 7,
        max_total_staff: 60,
        salary_bounds: (8500.0, 20000.0),
        rest_cap: 2,
        emergency: Some(EmergencySpec {
            alpha: 3,
            time_cost: 6.0,
            bonus: 120.0,
            punishment: 40.0,
            daily_probability: 0.1,
            jobs: vec!["d".into(), "e".into()],
        }),
        cooperation: Some(CooperationSpec {
            alpha: 2,
            jobs: vec!["c".into(), "f".into()],
        }),
        multi_shift: false,
    }
}

/// Two jobs, one day, 8-hour single-slot shifts, staff cap 6.
pub fn micro() -> ProblemInstance {
    ProblemInstance {
        name: "micro".into(),
        jobs: vec![
            job("a", "first", [5.0, 0.0, 0.0, 0.0], [8.0, 0.0, 0.0, 0.0], (1, 3), (0.0, 1000.0)),
            job("b", "second", [5.0, 0.0, 0.0, 0.0], [8.0, 0.0, 0.0, 0.0], (1, 3), (0.0, 1000.0)),
        ],
        horizon_days: 1,
        max_total_staff: 6,
        salary_bounds: (0.0, 1.0e6),
        rest_cap: 0,
        emergency: Some(EmergencySpec {
            alpha: 1,
            time_cost: 1.0,
            bonus: 0.0,
            punishment: 0.0,
            daily_probability: 0.5,
            jobs: vec![],
        }),
        cooperation: Some(CooperationSpec {
            alpha: 1,
            jobs: vec!["a".into(), "b".into()],
        }),
        multi_shift: false,
    }
}
