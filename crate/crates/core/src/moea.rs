//! Elitist multi-objective search: constraint-aware Pareto sorting with
//! crowding-distance truncation.
//!
//! Parents and offspring are pooled every generation, sorted into fronts and
//! the next population is filled front by front; the front that does not fit
//! is truncated once, keeping its least crowded members. Every feasible
//! non-dominated point seen so far is kept in a [`ParetoArchive`].

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::{violation_expr, ConstraintExpr, Measures};
use crate::domain::{HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};
use crate::evolution::{EAConfig, GeneSpace, Genome, RunTrace};
use crate::objectives::ObjectiveBundle;

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredIndividual {
    pub genome: Genome,
    pub values: Vec<i64>,
    /// Minimization form.
    pub objectives: Vec<f64>,
    pub violation: f64,
    pub rank: usize,
    pub crowd: f64,
}

impl ScoredIndividual {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

/// Pareto dominance for minimization: no worse anywhere, better somewhere.
pub fn dominates(u: &[f64], v: &[f64]) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::Structural(format!(
            "comparing {} objectives with {}",
            u.len(),
            v.len()
        )));
    }
    let mut strict = false;
    for (a, b) in u.iter().zip(v) {
        if a > b {
            return Ok(false);
        }
        strict |= a < b;
    }
    Ok(strict)
}

/// Feasible beats infeasible, infeasible pairs compare by violation and
/// feasible pairs by Pareto dominance.
pub fn constrained_dominates(u: &ScoredIndividual, v: &ScoredIndividual) -> Result<bool> {
    match (u.is_feasible(), v.is_feasible()) {
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        (false, false) => Ok(u.violation < v.violation),
        (true, true) => dominates(&u.objectives, &v.objectives),
    }
}

/// Splits `0..n` into fronts given a dominance relation.
fn sort_fronts(n: usize, dom: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut dominated_by = vec![0usize; n];
    let mut beats: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dom(i, j) {
                beats[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &beats[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Fronts of plain objective vectors; front 0 is non-dominated.
pub fn non_dominated_sort(points: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    if let Some(first) = points.first() {
        if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
            return Err(Error::Structural(format!(
                "comparing {} objectives with {}",
                first.len(),
                bad.len()
            )));
        }
    }
    Ok(sort_fronts(points.len(), |i, j| dominates(&points[i], &points[j]).expect("checked arity")))
}

/// Crowding distance of each member of a front. Boundary members of each
/// objective get `+inf`; interior members add the gap between their
/// neighbours over that objective's range. Objectives with zero range add
/// nothing.
pub fn crowding(front: &[&[f64]]) -> Vec<f64> {
    let n = front.len();
    let mut crowd = vec![0.0; n];
    if n == 0 {
        return crowd;
    }
    for m in 0..front[0].len() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a][m].total_cmp(&front[b][m]).then(a.cmp(&b)));
        let lo = front[order[0]][m];
        let hi = front[order[n - 1]][m];
        let range = hi - lo;
        if range == 0.0 {
            continue;
        }
        crowd[order[0]] = f64::INFINITY;
        crowd[order[n - 1]] = f64::INFINITY;
        for k in 1..n.saturating_sub(1) {
            crowd[order[k]] += (front[order[k + 1]][m] - front[order[k - 1]][m]) / range;
        }
    }
    crowd
}

/// Area dominated by a two-objective minimization set, bounded by `reference`.
pub fn hypervolume_2d(points: &[Vec<f64>], reference: (f64, f64)) -> f64 {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p[0], p[1]))
        .filter(|&(x, y)| x < reference.0 && y < reference.1)
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut area = 0.0;
    let mut ceiling = reference.1;
    for (x, y) in pts {
        if y < ceiling {
            area += (reference.0 - x) * (ceiling - y);
            ceiling = y;
        }
    }
    area
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveEntry {
    pub values: Vec<i64>,
    /// Minimization form.
    pub objectives: Vec<f64>,
}

/// Feasible points no other archived point dominates, one per decoded value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParetoArchive {
    pub members: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds a feasible point unless it is dominated or already present;
    /// evicts members it dominates. Returns whether it was added.
    pub fn offer(&mut self, values: &[i64], objectives: &[f64]) -> Result<bool> {
        for m in &self.members {
            if m.values == values || dominates(&m.objectives, objectives)? {
                return Ok(false);
            }
        }
        let mut kept = Vec::with_capacity(self.members.len() + 1);
        for m in self.members.drain(..) {
            if !dominates(objectives, &m.objectives)? {
                kept.push(m);
            }
        }
        kept.push(ArchiveEntry {
            values: values.to_vec(),
            objectives: objectives.to_vec(),
        });
        kept.sort_by(|a, b| a.values.cmp(&b.values));
        self.members = kept;
        Ok(true)
    }

    pub fn is_internally_nondominated(&self) -> bool {
        self.members.iter().all(|u| {
            self.members
                .iter()
                .all(|v| !dominates(&u.objectives, &v.objectives).unwrap_or(true))
        })
    }

    pub fn objective_vectors(&self) -> Vec<Vec<f64>> {
        self.members.iter().map(|m| m.objectives.clone()).collect()
    }

    /// One row per member: job codes, then objective labels in their own
    /// direction.
    pub fn write_csv<W: Write>(&self, inst: &ProblemInstance, bundle: &ObjectiveBundle, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let mut header: Vec<String> = inst.jobs.iter().map(|j| j.code.clone()).collect();
        header.extend(bundle.objectives().iter().map(|o| o.label(inst)));
        w.write_record(&header)?;
        for m in &self.members {
            let mut row: Vec<String> = m.values.iter().map(|v| v.to_string()).collect();
            row.extend(
                bundle
                    .objectives()
                    .iter()
                    .zip(&m.objectives)
                    .map(|(o, &v)| o.denormalize(v).to_string()),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Headcounts scored on several objectives under full attendance.
pub struct MultiObjectiveLandscape<'a> {
    inst: &'a ProblemInstance,
    bundle: &'a ObjectiveBundle,
    expr: &'a ConstraintExpr,
    space: GeneSpace,
}

impl<'a> MultiObjectiveLandscape<'a> {
    pub fn new(inst: &'a ProblemInstance, bundle: &'a ObjectiveBundle, expr: &'a ConstraintExpr) -> Result<Self> {
        inst.validate()?;
        expr.check(inst)?;
        bundle.check(inst)?;
        Ok(MultiObjectiveLandscape {
            inst,
            bundle,
            expr,
            space: GeneSpace::for_headcounts(inst)?,
        })
    }

    pub fn space(&self) -> &GeneSpace {
        &self.space
    }

    /// Normalized objectives and constraint violation.
    pub fn evaluate(&self, values: &[i64]) -> Result<(Vec<f64>, f64)> {
        let hc = HeadcountVector(values.iter().map(|&v| v as u32).collect());
        let m = Measures::full_attendance(&hc, self.inst)?;
        Ok((self.bundle.normalized(&m), violation_expr(self.expr, &m, self.inst)?))
    }
}

#[derive(Clone, Debug)]
pub struct MoeaResult {
    pub archive: ParetoArchive,
    /// `best` is the archive size (negated, so it never increases) and
    /// `mean` the mean rank of the population.
    pub trace: RunTrace,
}

fn rank_and_crowd(pop: &mut [ScoredIndividual]) -> Result<Vec<Vec<usize>>> {
    let fronts = sort_fronts(pop.len(), |i, j| constrained_dominates(&pop[i], &pop[j]).expect("same arity"));
    for (r, front) in fronts.iter().enumerate() {
        let objs: Vec<&[f64]> = front.iter().map(|&i| pop[i].objectives.as_slice()).collect();
        let crowd = crowding(&objs);
        for (k, &i) in front.iter().enumerate() {
            pop[i].rank = r;
            pop[i].crowd = crowd[k];
        }
    }
    Ok(fronts)
}

/// Binary tournament on (rank, crowd).
fn pick<'p, R: Rng>(pop: &'p [ScoredIndividual], rng: &mut R) -> &'p Genome {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if a.rank < b.rank || (a.rank == b.rank && a.crowd > b.crowd) {
        &a.genome
    } else {
        &b.genome
    }
}

pub fn run_moea(
    inst: &ProblemInstance,
    bundle: &ObjectiveBundle,
    expr: &ConstraintExpr,
    cfg: &EAConfig,
) -> Result<MoeaResult> {
    run_moea_observed(inst, bundle, expr, cfg, |_, _| {})
}

/// [`run_moea`] with a callback receiving the archive after every generation
/// (generation 0 is the initial population).
pub fn run_moea_observed(
    inst: &ProblemInstance,
    bundle: &ObjectiveBundle,
    expr: &ConstraintExpr,
    cfg: &EAConfig,
    mut observe: impl FnMut(usize, &ParetoArchive),
) -> Result<MoeaResult> {
    if bundle.len() < 2 {
        return Err(Error::Config(format!(
            "multi-objective search needs at least 2 objectives, got {}",
            bundle.len()
        )));
    }
    cfg.validate()?;
    let land = MultiObjectiveLandscape::new(inst, bundle, expr)?;
    let space = land.space();
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evals = 0usize;
    let mut archive = ParetoArchive::default();

    let score = |genome: Genome, evals: &mut usize, archive: &mut ParetoArchive| -> Result<ScoredIndividual> {
        let values = space.decode(&genome);
        let (objectives, violation) = land.evaluate(&values)?;
        *evals += 1;
        if violation == 0.0 {
            archive.offer(&values, &objectives)?;
        }
        Ok(ScoredIndividual {
            genome,
            values,
            objectives,
            violation,
            rank: 0,
            crowd: 0.0,
        })
    };

    let mut pop = Vec::with_capacity(cfg.population_size);
    for _ in 0..cfg.population_size {
        let g = space.random(cfg.encoding, &mut rng);
        pop.push(score(g, &mut evals, &mut archive)?);
    }
    rank_and_crowd(&mut pop)?;
    let mut trace = RunTrace::default();
    let mean_rank = |pop: &[ScoredIndividual]| pop.iter().map(|i| i.rank as f64).sum::<f64>() / pop.len() as f64;
    trace.push(0, -(archive.len() as f64), mean_rank(&pop), evals, started);
    observe(0, &archive);

    for generation in 1..=cfg.generations {
        let mut pooled = pop.clone();
        while pooled.len() < 2 * cfg.population_size {
            let a = pick(&pop, &mut rng);
            let b = pick(&pop, &mut rng);
            let (mut c1, mut c2) = if rng.gen_bool(cfg.crossover_rate) {
                space.crossover(a, b, &mut rng)
            } else {
                (a.clone(), b.clone())
            };
            space.mutate(&mut c1, cfg.mutation_rate, &mut rng);
            space.mutate(&mut c2, cfg.mutation_rate, &mut rng);
            for g in [c1, c2] {
                if pooled.len() < 2 * cfg.population_size {
                    pooled.push(score(g, &mut evals, &mut archive)?);
                }
            }
        }
        let fronts = rank_and_crowd(&mut pooled)?;
        let mut keep: Vec<usize> = Vec::with_capacity(cfg.population_size);
        for front in fronts {
            if keep.len() + front.len() <= cfg.population_size {
                keep.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&a, &b| pooled[b].crowd.total_cmp(&pooled[a].crowd).then(a.cmp(&b)));
                rest.truncate(cfg.population_size - keep.len());
                keep.extend(rest);
            }
            if keep.len() == cfg.population_size {
                break;
            }
        }
        let mut slots: Vec<Option<ScoredIndividual>> = pooled.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("kept once")).collect();
        trace.push(generation, -(archive.len() as f64), mean_rank(&pop), evals, started);
        observe(generation, &archive);
    }

    Ok(MoeaResult { archive, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Objective, ObjectiveKind};
    use crate::testutil::{micro_instance, reference_like};
    use rand::Rng;

    fn pts(v: &[(f64, f64)]) -> Vec<Vec<f64>> {
        v.iter().map(|&(a, b)| vec![a, b]).collect()
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&[1.0, 1.0], &[2.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[2.0, 1.0]).unwrap());
        assert!(!dominates(&[2.0, 1.0], &[1.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(matches!(dominates(&[1.0], &[1.0, 2.0]), Err(Error::Structural(_))));
    }

    #[test]
    fn constraint_domination() {
        let ind = |obj: f64, violation: f64| ScoredIndividual {
            genome: Genome::Integer(vec![]),
            values: vec![],
            objectives: vec![obj],
            violation,
            rank: 0,
            crowd: 0.0,
        };
        assert!(constrained_dominates(&ind(9.0, 0.0), &ind(1.0, 0.5)).unwrap());
        assert!(constrained_dominates(&ind(9.0, 0.2), &ind(1.0, 0.5)).unwrap());
        assert!(!constrained_dominates(&ind(1.0, 0.5), &ind(9.0, 0.5)).unwrap());
        assert!(constrained_dominates(&ind(1.0, 0.0), &ind(2.0, 0.0)).unwrap());
    }

    #[test]
    fn sort_examples() {
        let fronts = non_dominated_sort(&pts(&[(1.0, 1.0), (1.5, 0.5), (2.0, 2.0)])).unwrap();
        assert_eq!(fronts, vec![vec![0, 1], vec![2]]);
        assert_eq!(non_dominated_sort(&pts(&[(3.0, 3.0)])).unwrap(), vec![vec![0]]);
        assert_eq!(non_dominated_sort(&pts(&[(1.0, 1.0); 4])).unwrap(), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn sorting_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.gen_range(0..6) as f64, rng.gen_range(0..6) as f64]).collect();
            let fronts = non_dominated_sort(&p).unwrap();
            for front in &fronts {
                let sub: Vec<Vec<f64>> = front.iter().map(|&i| p[i].clone()).collect();
                assert_eq!(non_dominated_sort(&sub).unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn crowding_examples() {
        let a = [0.0, 5.0];
        let b = [1.0, 2.0];
        assert_eq!(crowding(&[&a, &b]), vec![f64::INFINITY, f64::INFINITY]);
        let line = [[0.0], [1.0], [2.0]];
        let c = crowding(&[&line[0], &line[1], &line[2]]);
        assert_eq!(c, vec![f64::INFINITY, 1.0, f64::INFINITY]);
        let flat = [[4.0, 0.0], [4.0, 1.0], [4.0, 3.0]];
        // first objective has zero range
        assert_eq!(crowding(&[&flat[0], &flat[1], &flat[2]])[1], 1.0);
    }

    #[test]
    fn crowding_matches_hand_oracle() {
        // Four points on a front, two objectives.
        let p = [[1.0, 9.0], [2.0, 6.0], [4.0, 3.0], [8.0, 1.0]];
        let c = crowding(&[&p[0], &p[1], &p[2], &p[3]]);
        // member 1: (4-1)/7 + (9-3)/8; member 2: (8-2)/7 + (6-1)/8
        assert_eq!(c[0], f64::INFINITY);
        assert!((c[1] - (3.0 / 7.0 + 6.0 / 8.0)).abs() < 1e-12);
        assert!((c[2] - (6.0 / 7.0 + 5.0 / 8.0)).abs() < 1e-12);
        assert_eq!(c[3], f64::INFINITY);
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume_2d(&pts(&[(1.0, 1.0)]), (3.0, 3.0)), 4.0);
        assert_eq!(hypervolume_2d(&pts(&[(1.0, 2.0), (2.0, 1.0)]), (3.0, 3.0)), 3.0);
        assert_eq!(hypervolume_2d(&pts(&[(1.0, 2.0), (2.0, 1.0), (2.5, 2.5)]), (3.0, 3.0)), 3.0);
    }

    #[test]
    fn archive_evicts_dominated_and_deduplicates() {
        let mut a = ParetoArchive::default();
        assert!(a.offer(&[1], &[2.0, 2.0]).unwrap());
        assert!(!a.offer(&[1], &[2.0, 2.0]).unwrap());
        assert!(a.offer(&[2], &[2.0, 2.0]).unwrap());
        assert!(a.offer(&[3], &[1.0, 3.0]).unwrap());
        assert!(a.offer(&[4], &[1.0, 1.0]).unwrap());
        assert_eq!(a.len(), 1);
        assert!(a.is_internally_nondominated());
    }

    #[test]
    fn conflicting_objectives_span_extremes() {
        let inst = micro_instance();
        let bundle = ObjectiveBundle::new(vec![
            Objective::minimize(ObjectiveKind::Headcount(vec![0])),
            Objective::maximize(ObjectiveKind::Headcount(vec![0])),
        ])
        .unwrap();
        let expr: ConstraintExpr = "k5".parse().unwrap();
        let r = run_moea(&inst, &bundle, &expr, &EAConfig { seed: 2, ..EAConfig::default() }).unwrap();
        let counts: std::collections::BTreeSet<i64> = r.archive.members.iter().map(|m| m.values[0]).collect();
        assert_eq!(counts, [1, 2, 3].into_iter().collect());
        // every decoded point is mutually non-dominated here
        assert_eq!(r.archive.len(), 9);
    }

    #[test]
    fn single_generation_archive_is_initial_front() {
        let inst = reference_like();
        let bundle = ObjectiveBundle::parse(&["headcount:b+c+e".into(), "total_time".into()], &inst).unwrap();
        let expr: ConstraintExpr = "k2&k5".parse().unwrap();
        let cfg = EAConfig {
            population_size: 8,
            generations: 0,
            seed: 5,
            ..EAConfig::default()
        };
        let r = run_moea(&inst, &bundle, &expr, &cfg).unwrap();
        // replay the initial population
        let land = MultiObjectiveLandscape::new(&inst, &bundle, &expr).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut feasible: Vec<(Vec<i64>, Vec<f64>)> = Vec::new();
        for _ in 0..8 {
            let v = land.space().decode(&land.space().random(cfg.encoding, &mut rng));
            let (o, viol) = land.evaluate(&v).unwrap();
            if viol == 0.0 && !feasible.iter().any(|(w, _)| *w == v) {
                feasible.push((v, o));
            }
        }
        let objs: Vec<Vec<f64>> = feasible.iter().map(|f| f.1.clone()).collect();
        let front = &non_dominated_sort(&objs).unwrap()[0];
        let mut expected: Vec<Vec<i64>> = front.iter().map(|&i| feasible[i].0.clone()).collect();
        expected.sort();
        let got: Vec<Vec<i64>> = r.archive.members.iter().map(|m| m.values.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn hypervolume_never_decreases() {
        let inst = reference_like();
        let bundle = ObjectiveBundle::parse(&["headcount:b+c+e".into(), "total_time".into()], &inst).unwrap();
        let expr: ConstraintExpr = "k1&k2&k3&k4&k5&k6".parse().unwrap();
        let mut hv = Vec::new();
        run_moea_observed(&inst, &bundle, &expr, &EAConfig { seed: 7, ..EAConfig::default() }, |_, a| {
            hv.push(hypervolume_2d(&a.objective_vectors(), (100.0, 10_000.0)));
        })
        .unwrap();
        assert_eq!(hv.len(), 51);
        assert!(hv.windows(2).all(|w| w[1] >= w[0]));
        assert!(*hv.last().unwrap() > 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let inst = reference_like();
        let bundle = ObjectiveBundle::parse(&["salary".into(), "max:total_time".into()], &inst).unwrap();
        let expr: ConstraintExpr = "k2&k3&k5".parse().unwrap();
        let cfg = EAConfig { seed: 13, ..EAConfig::default() };
        let a = run_moea(&inst, &bundle, &expr, &cfg).unwrap();
        let b = run_moea(&inst, &bundle, &expr, &cfg).unwrap();
        assert_eq!(a.archive, b.archive);
        assert!(a.archive.is_internally_nondominated());
    }

    #[test]
    fn needs_two_objectives() {
        let inst = micro_instance();
        let bundle = ObjectiveBundle::parse(&["total_time".into()], &inst).unwrap();
        let expr: ConstraintExpr = "k5".parse().unwrap();
        assert!(matches!(
            run_moea(&inst, &bundle, &expr, &EAConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn archive_csv() {
        let inst = micro_instance();
        let bundle = ObjectiveBundle::parse(&["headcount:a".into(), "max:total_time".into()], &inst).unwrap();
        let mut a = ParetoArchive::default();
        a.offer(&[1, 3], &[1.0, -32.0]).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&inst, &bundle, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a,b,headcount:a,max:total_time\n1,3,1,32\n"
        );
    }
}
