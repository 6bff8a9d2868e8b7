//! Second stage: given headcounts, choose who attends when.
//!
//! One bit per (employee, day) in single-shift mode, or per (employee, slot)
//! in multi-shift mode. Every employee works only in their own job channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::genome::{Encoding, GeneSpace, Genome};
use super::landscape::{Evaluation, Landscape, PenaltyConfig};
use super::{evolve, EAConfig, RunTrace};
use crate::constraints::{barrier_expr, violation_atom, violation_expr, Atom, ConstraintExpr, Measures};
use crate::domain::{AttendanceTensor, HeadcountVector, ProblemInstance, StaffLayout, SHIFTS_PER_DAY};
use crate::error::{Error, Result};
use crate::objectives::{Objective, ObjectiveBundle};

pub struct AssignmentLandscape<'a> {
    inst: &'a ProblemInstance,
    hc: HeadcountVector,
    layout: StaffLayout,
    objective: &'a Objective,
    expr: &'a ConstraintExpr,
    penalty: PenaltyConfig,
    space: GeneSpace,
}

impl<'a> AssignmentLandscape<'a> {
    pub fn new(
        hc: &HeadcountVector,
        inst: &'a ProblemInstance,
        objective: &'a Objective,
        expr: &'a ConstraintExpr,
        penalty: PenaltyConfig,
    ) -> Result<Self> {
        inst.validate()?;
        hc.check_against(inst)?;
        expr.check(inst)?;
        objective.check(inst)?;
        penalty.validate()?;
        penalty.check_expr(expr, inst)?;
        let layout = StaffLayout::new(hc);
        let per_employee = if inst.multi_shift {
            inst.slots()
        } else {
            inst.horizon_days
        };
        Ok(AssignmentLandscape {
            inst,
            hc: hc.clone(),
            space: GeneSpace::bits(layout.staff() * per_employee),
            layout,
            objective,
            expr,
            penalty,
        })
    }

    fn per_employee(&self) -> usize {
        if self.inst.multi_shift {
            self.inst.slots()
        } else {
            self.inst.horizon_days
        }
    }

    pub fn tensor(&self, bits: &[i64]) -> AttendanceTensor {
        let w = self.per_employee();
        if self.inst.multi_shift {
            AttendanceTensor::from_slots(&self.layout, self.inst.horizon_days, |e, s| bits[e * w + s] == 1)
        } else {
            AttendanceTensor::from_days(&self.layout, self.inst.horizon_days, |e, d| bits[e * w + d] == 1)
        }
    }

    pub fn measures(&self, bits: &[i64]) -> Result<Measures> {
        Measures::from_tensor(&self.tensor(bits), &self.hc, self.inst)
    }
}

impl Landscape for AssignmentLandscape<'_> {
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

#[derive(Clone, Debug)]
pub struct AssignmentResult {
    pub tensor: AttendanceTensor,
    pub value: f64,
    pub trace: RunTrace,
}

/// Optimizes attendance for fixed headcounts.
///
/// The initial population holds full attendance plus individuals that
/// attend each day with probability `1 - rest_cap / horizon`; the rest is
/// uniform. Mutation is capped at two expected flips per genome so long
/// bitstrings are not scrambled.
pub fn solve_assignment(
    hc: &HeadcountVector,
    inst: &ProblemInstance,
    expr: &ConstraintExpr,
    bundle: &ObjectiveBundle,
    cfg: &EAConfig,
) -> Result<AssignmentResult> {
    let objective = bundle.sole()?;
    let full = Measures::full_attendance(hc, inst)?;
    for atom in [Atom::Y2, Atom::K5] {
        let v = violation_atom(atom, &full, inst)?;
        if v > 0.0 {
            return Err(Error::Infeasible {
                reason: format!("headcounts {hc} violate {atom} by {v}"),
                best_violation: Some(v),
                best_genome: None,
            });
        }
    }
    let land = AssignmentLandscape::new(hc, inst, objective, expr, cfg.penalty)?;
    let bits = land.space().len();
    if bits == 0 {
        let ev = land.evaluate(&[])?;
        if !ev.is_feasible() {
            return Err(Error::Infeasible {
                reason: "empty roster does not satisfy the constraints".into(),
                best_violation: Some(ev.violation),
                best_genome: None,
            });
        }
        return Ok(AssignmentResult {
            tensor: land.tensor(&[]),
            value: objective.denormalize(ev.objective),
            trace: RunTrace::default(),
        });
    }

    let mut run = cfg.clone();
    run.encoding = Encoding::Binary;
    run.mutation_rate = cfg.mutation_rate.min(2.0 / bits as f64);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_a551);
    let p_attend = if inst.horizon_days == 0 {
        1.0
    } else {
        (1.0 - inst.rest_cap as f64 / inst.horizon_days as f64).clamp(0.0, 1.0)
    };
    let mut seeds = vec![Genome::Binary(vec![true; bits])];
    let w = land.per_employee();
    while seeds.len() < run.population_size / 2 {
        let g: Vec<bool> = if inst.multi_shift {
            // day-level draw, then copied to that day's slots
            let days: Vec<bool> = (0..bits / w * inst.horizon_days).map(|_| rng.gen_bool(p_attend)).collect();
            (0..bits).map(|i| days[i / w * inst.horizon_days + (i % w) / SHIFTS_PER_DAY]).collect()
        } else {
            (0..bits).map(|_| rng.gen_bool(p_attend)).collect()
        };
        seeds.push(Genome::Binary(g));
    }
    let out = evolve(&land, &run, &seeds)?;
    Ok(AssignmentResult {
        tensor: land.tensor(&out.values),
        value: objective.denormalize(out.evaluation.objective),
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::eval_expr;
    use crate::objectives::ObjectiveKind;
    use crate::testutil::{micro_instance, reference_like};

    fn total_time() -> ObjectiveBundle {
        ObjectiveBundle::single(Objective::minimize(ObjectiveKind::TotalTime))
    }

    #[test]
    fn forced_single_attendee() {
        let inst = micro_instance();
        let hc = HeadcountVector(vec![1, 1]);
        let expr: ConstraintExpr = "k2".parse().unwrap();
        let r = solve_assignment(&hc, &inst, &expr, &total_time(), &EAConfig::default()).unwrap();
        let m = Measures::from_tensor(&r.tensor, &hc, &inst).unwrap();
        assert_eq!(m.min_coverage, 1);
        assert_eq!(r.tensor.activation_count(), 2 * SHIFTS_PER_DAY);
        assert_eq!(r.value, 16.0);
    }

    #[test]
    fn zero_count_is_infeasible() {
        let mut inst = micro_instance();
        inst.jobs[1].headcount_min = 0;
        let hc = HeadcountVector(vec![1, 0]);
        let expr: ConstraintExpr = "k2".parse().unwrap();
        let cfg = EAConfig {
            population_size: 10,
            generations: 3,
            ..EAConfig::default()
        };
        assert!(matches!(
            solve_assignment(&hc, &inst, &expr, &total_time(), &cfg),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn over_cap_headcount_is_rejected_upfront() {
        let inst = micro_instance();
        let hc = HeadcountVector(vec![3, 3]);
        let mut small = inst.clone();
        small.max_total_staff = 5;
        let expr: ConstraintExpr = "k2".parse().unwrap();
        assert!(matches!(
            solve_assignment(&hc, &small, &expr, &total_time(), &EAConfig::default()),
            Err(Error::Infeasible { best_genome: None, .. })
        ));
    }

    /// Exhaustive minimum over every attendance pattern.
    fn enumerate(hc: &HeadcountVector, inst: &ProblemInstance, expr: &ConstraintExpr) -> Option<f64> {
        let obj = Objective::minimize(ObjectiveKind::TotalTime);
        let land = AssignmentLandscape::new(hc, inst, &obj, expr, PenaltyConfig::default()).unwrap();
        let n = land.space().len();
        assert!(n <= 12);
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << n) {
            let bits: Vec<i64> = (0..n).map(|k| (mask >> k & 1) as i64).collect();
            let m = land.measures(&bits).unwrap();
            if eval_expr(expr, &m, inst).unwrap() {
                best = Some(best.map_or(m.total_time, |b: f64| b.min(m.total_time)));
            }
        }
        best
    }

    #[test]
    fn small_rosters_match_enumeration() {
        let mut inst = reference_like();
        inst.jobs.truncate(2);
        inst.jobs[0].headcount_min = 1;
        inst.jobs[1].headcount_min = 1;
        inst.horizon_days = 3;
        inst.rest_cap = 1;
        inst.jobs[0].work_time_bounds = (8.0, 100.0);
        inst.jobs[1].work_time_bounds = (16.0, 100.0);
        inst.salary_bounds = (0.0, 1e6);
        inst.emergency = None;
        inst.cooperation = None;
        let hc = HeadcountVector(vec![2, 2]);
        let expr: ConstraintExpr = "k1&k2&k3&k4&k5&k6".parse().unwrap();
        let opt = enumerate(&hc, &inst, &expr).unwrap();
        for seed in 0..20 {
            let cfg = EAConfig {
                seed,
                ..EAConfig::default()
            };
            let r = solve_assignment(&hc, &inst, &expr, &total_time(), &cfg).unwrap();
            assert_eq!(r.value, opt, "seed {seed}");
            let m = Measures::from_tensor(&r.tensor, &hc, &inst).unwrap();
            assert!(eval_expr(&expr, &m, &inst).unwrap());
        }
    }

    #[test]
    fn multi_shift_bits_per_slot() {
        let mut inst = micro_instance();
        inst.multi_shift = true;
        inst.rest_cap = 0;
        for j in &mut inst.jobs {
            j.shift_hours = [8.0, 2.0, 3.0, 4.0];
        }
        let hc = HeadcountVector(vec![1, 1]);
        let obj = Objective::minimize(ObjectiveKind::TotalTime);
        let expr: ConstraintExpr = "k2&o1".parse().unwrap();
        let land = AssignmentLandscape::new(&hc, &inst, &obj, &expr, PenaltyConfig::default()).unwrap();
        assert_eq!(land.space().len(), 8);
        let r = solve_assignment(&hc, &inst, &expr, &total_time(), &EAConfig::default()).unwrap();
        // each employee needs some shift; the afternoon is the shortest
        assert_eq!(r.value, 4.0);
        assert_eq!(r.tensor.activation_count(), 2);
    }
}
