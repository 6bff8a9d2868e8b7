use std::time::Instant;

use msp_core::baselines::{solve, SolverKind};
use msp_core::constraints::{apply_emergency, eval_expr, ConstraintExpr, Measures};
use msp_core::domain::{HeadcountVector, ProblemInstance, StaffLayout};
use msp_core::evolution::{solve_assignment, EAConfig, RunTrace};
use msp_core::moea::run_moea;
use msp_core::objectives::{Direction, ObjectiveBundle};
use msp_core::tablegen::{
    default_needs, generate_roster, generate_rotation, needs_from_tensor, replay, table_to_tensor, BalancedPolicy,
    RotationSpec, ScheduleTable,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::metrics::{accuracy, convergence_rank, median, stability};
use crate::report::{
    ComparisonRow, EmergencyRecord, ParetoRecord, PipelineRecord, Report, RotationRecord, TableTimingRecord,
    TimingSummary, TrialRecord,
};
use crate::spec::{ExperimentId, ExperimentSpec};
use crate::BenchError;

/// Everything a run needs, resolved once from the spec.
pub struct Resolved<'a> {
    pub spec: &'a ExperimentSpec,
    pub inst: ProblemInstance,
    pub expr: ConstraintExpr,
    pub stage_expr: ConstraintExpr,
    pub bundle: ObjectiveBundle,
}

impl<'a> Resolved<'a> {
    pub fn new(spec: &'a ExperimentSpec, inst: ProblemInstance) -> msp_core::Result<Self> {
        spec.validate()?;
        inst.validate()?;
        let expr: ConstraintExpr = spec.constraints.parse()?;
        expr.check(&inst)?;
        let stage_expr: ConstraintExpr = spec.stage_constraints.as_deref().unwrap_or(&spec.constraints).parse()?;
        stage_expr.check(&inst)?;
        let bundle = ObjectiveBundle::parse(&spec.objectives, &inst)?;
        Ok(Resolved {
            spec,
            inst,
            expr,
            stage_expr,
            bundle,
        })
    }
}

/// Loads the spec's instance and runs the experiment. Only an unresolvable
/// spec is an error; solver failures are recorded in the report.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report, BenchError> {
    let inst = ProblemInstance::load(&spec.instance)?;
    run_on(spec, inst)
}

/// [`run_experiment`] with the instance already loaded.
pub fn run_on(spec: &ExperimentSpec, inst: ProblemInstance) -> Result<Report, BenchError> {
    let r = Resolved::new(spec, inst)?;
    let jobs: Vec<(SolverKind, usize)> = spec
        .solvers
        .iter()
        .flat_map(|&k| (0..spec.trials).map(move |t| (k, t)))
        .collect();
    let results: Vec<(TrialRecord, Option<RunTrace>, Option<HeadcountVector>)> =
        jobs.par_iter().map(|&(k, t)| run_trial(&r, k, t)).collect();

    let mut report = Report {
        spec: spec.clone(),
        trials: Vec::with_capacity(results.len()),
        comparison: Vec::new(),
        pipeline: Vec::new(),
        rotation: Vec::new(),
        pareto: Vec::new(),
        tables: Vec::new(),
        timing: Vec::new(),
        traces: Vec::new(),
        archives: Vec::new(),
    };
    let mut sources: Vec<Option<HeadcountVector>> = vec![None; spec.trials];
    // later stages start from the integer-coded EA when it ran
    let source_solver = if spec.solvers.contains(&SolverKind::Ea) {
        Some(SolverKind::Ea)
    } else {
        spec.solvers.first().copied()
    };
    for (rec, trace, best) in results {
        if let Some(trace) = trace {
            report.traces.push((format!("{}_{:03}", rec.solver, rec.trial), trace));
        }
        if Some(rec.solver.as_str()) == source_solver.map(|k| k.name()) {
            sources[rec.trial] = best;
        }
        report.trials.push(rec);
    }
    report.comparison = compare(&r, &report.trials)?;

    match spec.id {
        ExperimentId::Exp1 | ExperimentId::Exp4 => {
            let emergency = spec.id == ExperimentId::Exp4;
            let runs: Vec<(PipelineRecord, Option<RunTrace>)> = sources
                .par_iter()
                .enumerate()
                .filter_map(|(t, hc)| hc.as_ref().map(|hc| pipeline(&r, hc, t, emergency)))
                .collect();
            for (rec, trace) in runs {
                if let Some(trace) = trace {
                    report.traces.push((format!("assign_{:03}", rec.trial), trace));
                }
                report.pipeline.push(rec);
            }
        }
        ExperimentId::Exp2 => {
            report.rotation = (0..spec.trials)
                .map(|t| rotation(spec, t))
                .collect::<msp_core::Result<_>>()?;
        }
        ExperimentId::Exp5 => {
            let runs: Vec<(ParetoRecord, Option<(RunTrace, Vec<u8>)>)> =
                (0..spec.trials).into_par_iter().map(|t| pareto(&r, t)).collect();
            for (rec, artifacts) in runs {
                if let Some((trace, csv)) = artifacts {
                    report.traces.push((format!("moea_{:03}", rec.trial), trace));
                    report.archives.push((format!("archive_{:03}", rec.trial), csv));
                }
                report.pareto.push(rec);
            }
        }
        ExperimentId::TablegenTiming => {
            let cells: Vec<(usize, usize, &HeadcountVector)> = spec
                .horizons
                .iter()
                .flat_map(|&h| sources.iter().enumerate().filter_map(move |(t, hc)| hc.as_ref().map(|hc| (h, t, hc))))
                .collect();
            report.tables = cells.par_iter().map(|&(h, t, hc)| timed_roster(&r, hc, h, t)).collect();
            report.timing = spec
                .horizons
                .iter()
                .map(|&h| {
                    let ms: Vec<f64> = report
                        .tables
                        .iter()
                        .filter(|rec| rec.horizon == h && rec.error.is_none())
                        .filter_map(|rec| rec.millis)
                        .collect();
                    TimingSummary {
                        horizon: h,
                        median_ms: median(&ms),
                    }
                })
                .collect();
        }
        ExperimentId::Exp3 => {}
    }
    Ok(report)
}

fn run_trial(r: &Resolved, kind: SolverKind, trial: usize) -> (TrialRecord, Option<RunTrace>, Option<HeadcountVector>) {
    let seed = r.spec.seed(trial);
    let started = Instant::now();
    let outcome = solve(kind, &r.inst, &r.bundle, &r.expr, &r.spec.config, seed);
    let millis = started.elapsed().as_secs_f64() * 1e3;
    let mut rec = TrialRecord {
        solver: kind.name().into(),
        trial,
        seed,
        best: None,
        value: None,
        fitness: None,
        valid: None,
        evaluations: None,
        generation_to_best: None,
        millis: Some(millis),
        error: None,
    };
    match outcome {
        Ok(s) => {
            let valid = Measures::full_attendance(&s.best, &r.inst).and_then(|m| eval_expr(&r.expr, &m, &r.inst));
            rec.valid = Some(valid.unwrap_or(false));
            rec.best = Some(s.best.0.clone());
            rec.value = Some(s.value);
            rec.fitness = s.trace.final_best();
            rec.evaluations = Some(s.trace.evaluations());
            rec.generation_to_best = s.trace.generation_to_best();
            (rec, Some(s.trace), Some(s.best))
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            (rec, None, None)
        }
    }
}

fn compare(r: &Resolved, trials: &[TrialRecord]) -> Result<Vec<ComparisonRow>, BenchError> {
    let Ok(objective) = r.bundle.sole() else {
        return Ok(Vec::new());
    };
    let per_solver: Vec<(SolverKind, Vec<f64>, Vec<f64>, usize)> = r
        .spec
        .solvers
        .iter()
        .map(|&k| {
            let mine: Vec<&TrialRecord> = trials.iter().filter(|t| t.solver == k.name()).collect();
            let values: Vec<f64> = mine.iter().filter_map(|t| t.value).collect();
            let times: Vec<f64> = mine.iter().filter_map(|t| t.millis).collect();
            let failures = mine.iter().filter(|t| t.error.is_some()).count();
            (k, values, times, failures)
        })
        .collect();
    let median_of = |kind: SolverKind| {
        per_solver
            .iter()
            .find(|(k, ..)| *k == kind)
            .and_then(|(_, v, ..)| median(v))
    };
    let reference = median_of(SolverKind::Ip).or_else(|| median_of(SolverKind::Ea));
    let stabilities: Vec<f64> = per_solver.iter().map(|(_, v, ..)| stability(v)).collect();
    let ranks = convergence_rank(&stabilities);
    Ok(per_solver
        .iter()
        .zip(ranks)
        .zip(&stabilities)
        .map(|(((k, values, times, failures), rank), &stab)| {
            let med = median(values);
            let acc = match (reference, med) {
                (Some(rf), Some(m)) => match objective.direction {
                    Direction::Minimize => accuracy(rf, m).ok(),
                    Direction::Maximize => accuracy(m, rf).ok(),
                },
                _ => None,
            };
            ComparisonRow {
                algorithm: k.name().into(),
                median_time_ms: median(times),
                accuracy: acc,
                convergence_rank: rank,
                median_value: med,
                stability: stab,
                failures: *failures,
            }
        })
        .collect())
}

fn replay_jobs(table: &ScheduleTable, hc: &HeadcountVector, needs: &[Vec<usize>]) -> bool {
    let layout = StaffLayout::new(hc);
    needs.iter().enumerate().all(|(j, need)| {
        let members: Vec<usize> = layout.employees_of(j).collect();
        let sub = ScheduleTable {
            days: table.days,
            assignments: table.assignments.iter().filter(|a| a.job == j).copied().collect(),
        };
        replay(&sub, &members, need, &BalancedPolicy).is_none()
    })
}

/// Attendance, then a roster from the attendance counts, each stage checked
/// against the stage constraints.
fn pipeline(r: &Resolved, hc: &HeadcountVector, trial: usize, emergency: bool) -> (PipelineRecord, Option<RunTrace>) {
    let seed = r.spec.seed(trial);
    let started = Instant::now();
    let headcount_valid = Measures::full_attendance(hc, &r.inst)
        .and_then(|m| eval_expr(&r.expr, &m, &r.inst))
        .unwrap_or(false);
    let mut rec = PipelineRecord {
        trial,
        seed,
        headcount: hc.0.clone(),
        headcount_valid,
        emergency: None,
        assignment_value: None,
        assignment_valid: None,
        roster_total_time: None,
        roster_valid: None,
        replay_ok: None,
        millis: None,
        error: None,
    };
    let mut trace = None;
    let result = (|| -> msp_core::Result<()> {
        let mut staff = hc.clone();
        if emergency {
            let spec = r
                .inst
                .emergency
                .as_ref()
                .ok_or_else(|| msp_core::Error::Config("instance has no emergency section".into()))?;
            let m = Measures::full_attendance(hc, &r.inst)?;
            let (after, time, cost) = apply_emergency(hc, m.total_time, m.salary(&r.inst), spec, &r.inst)?;
            rec.emergency = Some(EmergencyRecord {
                headcount_after: after.0.clone(),
                total_time_after: time,
                cost_after: cost,
            });
            staff = after;
        }
        let cfg = EAConfig {
            seed,
            ..r.spec.config.ea.clone()
        };
        let assigned = solve_assignment(&staff, &r.inst, &r.stage_expr, &r.bundle, &cfg)?;
        let m = Measures::from_tensor(&assigned.tensor, &staff, &r.inst)?;
        rec.assignment_value = Some(assigned.value);
        rec.assignment_valid = Some(eval_expr(&r.stage_expr, &m, &r.inst)?);
        trace = Some(assigned.trace);

        let needs = needs_from_tensor(&assigned.tensor, &staff);
        let table = generate_roster(&r.inst, &staff, &needs, seed)?;
        rec.replay_ok = Some(replay_jobs(&table, &staff, &needs));
        let tensor = table_to_tensor(&table, &r.inst, &staff)?;
        let m = Measures::from_tensor(&tensor, &staff, &r.inst)?;
        rec.roster_total_time = Some(m.total_time);
        rec.roster_valid = Some(eval_expr(&r.stage_expr, &m, &r.inst)?);
        Ok(())
    })();
    if let Err(e) = result {
        rec.error = Some(e.to_string());
    }
    rec.millis = Some(started.elapsed().as_secs_f64() * 1e3);
    (rec, trace)
}

fn rotation(spec: &ExperimentSpec, trial: usize) -> msp_core::Result<RotationRecord> {
    let seed = spec.seed(trial);
    let mut rot = RotationSpec::new(spec.rotation.positions, spec.rotation.people);
    rot.order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let table = generate_rotation(&rot, spec.rotation.days)?;
    let mut loads = table.loads();
    loads.resize(spec.rotation.people, 0);
    Ok(RotationRecord {
        trial,
        seed,
        order: rot.order,
        loads,
    })
}

fn pareto(r: &Resolved, trial: usize) -> (ParetoRecord, Option<(RunTrace, Vec<u8>)>) {
    let seed = r.spec.seed(trial);
    let started = Instant::now();
    let cfg = EAConfig {
        seed,
        ..r.spec.config.ea.clone()
    };
    let mut rec = ParetoRecord {
        trial,
        seed,
        archive_size: 0,
        nondominated: false,
        points: Vec::new(),
        millis: None,
        error: None,
    };
    let result = run_moea(&r.inst, &r.bundle, &r.expr, &cfg).and_then(|res| {
        let mut csv = Vec::new();
        res.archive.write_csv(&r.inst, &r.bundle, &mut csv)?;
        Ok((res, csv))
    });
    rec.millis = Some(started.elapsed().as_secs_f64() * 1e3);
    match result {
        Ok((res, csv)) => {
            rec.archive_size = res.archive.len();
            rec.nondominated = res.archive.is_internally_nondominated();
            rec.points = res
                .archive
                .members
                .iter()
                .map(|m| {
                    let own: Vec<f64> = r
                        .bundle
                        .objectives()
                        .iter()
                        .zip(&m.objectives)
                        .map(|(o, &v)| o.denormalize(v))
                        .collect();
                    (m.values.clone(), own)
                })
                .collect();
            (rec, Some((res.trace, csv)))
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            (rec, None)
        }
    }
}

fn timed_roster(r: &Resolved, hc: &HeadcountVector, horizon: usize, trial: usize) -> TableTimingRecord {
    let seed = r.spec.seed(trial);
    let inst = r.inst.with_horizon(horizon);
    let needs = default_needs(&inst, hc);
    let started = Instant::now();
    let table = generate_roster(&inst, hc, &needs, seed);
    let millis = started.elapsed().as_secs_f64() * 1e3;
    match table {
        Ok(table) => TableTimingRecord {
            horizon,
            trial,
            seed,
            assignments: Some(table.assignments.len()),
            replay_ok: Some(replay_jobs(&table, hc, &needs)),
            millis: Some(millis),
            error: None,
        },
        Err(e) => TableTimingRecord {
            horizon,
            trial,
            seed,
            assignments: None,
            replay_ok: None,
            millis: Some(millis),
            error: Some(e.to_string()),
        },
    }
}
