//! Single-objective evolutionary search with penalty-based constraint
//! handling.
//!
//! The loop is: initial population, evaluation, selection, crossover,
//! mutation, with the best individual carried over unchanged each
//! generation. Candidates are judged by penalized fitness while the best
//! feasible point ever seen is tracked separately and returned.

mod assignment;
mod genome;
mod landscape;

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use assignment::{solve_assignment, AssignmentLandscape, AssignmentResult};
pub use genome::{decode, encode, Encoding, GeneSpace, Genome};
pub use landscape::{fitness, Evaluation, HeadcountLandscape, Landscape, PenaltyConfig, PenaltyMethod};

use crate::constraints::ConstraintExpr;
use crate::domain::{HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};
use crate::objectives::ObjectiveBundle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Tournament(usize),
    /// Fitness-proportional.
    Roulette,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EAConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-variable mutation probability.
    pub mutation_rate: f64,
    pub selection: Selection,
    pub penalty: PenaltyConfig,
    pub encoding: Encoding,
    pub seed: u64,
}

impl Default for EAConfig {
    fn default() -> Self {
        EAConfig {
            population_size: 100,
            generations: 50,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            selection: Selection::Tournament(2),
            penalty: PenaltyConfig::default(),
            encoding: Encoding::Integer,
            seed: 0,
        }
    }
}

impl EAConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config(format!(
                "population size {} is below 2",
                self.population_size
            )));
        }
        for (name, r) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{name} rate {r} is outside [0, 1]")));
            }
        }
        if let Selection::Tournament(k) = self.selection {
            if k == 0 {
                return Err(Error::Config("tournament size must be positive".into()));
            }
        }
        self.penalty.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    /// Best penalized fitness in the population.
    pub best: f64,
    /// Mean over the finite fitness values.
    pub mean: f64,
    /// Cumulative fitness evaluations.
    pub evals: usize,
    pub millis: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn push(&mut self, generation: usize, best: f64, mean: f64, evals: usize, started: Instant) {
        self.rows.push(TraceRow {
            generation,
            best,
            mean,
            evals,
            millis: started.elapsed().as_secs_f64() * 1e3,
        });
    }

    pub fn final_best(&self) -> Option<f64> {
        self.rows.last().map(|r| r.best)
    }

    /// First generation whose best equals the final best.
    pub fn generation_to_best(&self) -> Option<usize> {
        let target = self.final_best()?;
        self.rows.iter().find(|r| r.best <= target).map(|r| r.generation)
    }

    pub fn evaluations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.evals)
    }

    pub fn elapsed_millis(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.millis)
    }

    /// Header `generation,best,mean,evals,millis`.
    pub fn write_csv<W: Write>(&self, out: W, with_timing: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["generation", "best", "mean", "evals", "millis"])?;
        for r in &self.rows {
            let millis = if with_timing { format!("{:.3}", r.millis) } else { String::new() };
            w.write_record([
                r.generation.to_string(),
                r.best.to_string(),
                r.mean.to_string(),
                r.evals.to_string(),
                millis,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Result of one evolutionary run over a [`Landscape`].
#[derive(Clone, Debug)]
pub struct EvolutionOutcome {
    pub values: Vec<i64>,
    pub genome: Genome,
    pub evaluation: Evaluation,
    pub trace: RunTrace,
}

struct Individual {
    genome: Genome,
    eval: Evaluation,
}

fn select<'p, R: Rng>(pop: &'p [Individual], selection: Selection, rng: &mut R) -> &'p Genome {
    match selection {
        Selection::Tournament(k) => {
            let mut best = rng.gen_range(0..pop.len());
            for _ in 1..k {
                let c = rng.gen_range(0..pop.len());
                if pop[c].eval.fitness < pop[best].eval.fitness {
                    best = c;
                }
            }
            &pop[best].genome
        }
        Selection::Roulette => {
            let min = pop.iter().map(|i| i.eval.fitness).fold(f64::INFINITY, f64::min);
            let weights: Vec<f64> = pop
                .iter()
                .map(|i| {
                    if i.eval.fitness.is_finite() {
                        1.0 / (1.0 + i.eval.fitness - min)
                    } else {
                        0.0
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) {
                return &pop[rng.gen_range(0..pop.len())].genome;
            }
            let mut r = rng.gen::<f64>() * total;
            for (i, w) in weights.iter().enumerate() {
                if r < *w {
                    return &pop[i].genome;
                }
                r -= w;
            }
            &pop[pop.len() - 1].genome
        }
    }
}

fn mean_finite(pop: &[Individual]) -> f64 {
    let finite: Vec<f64> = pop.iter().map(|i| i.eval.fitness).filter(|f| f.is_finite()).collect();
    if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

fn best_index(pop: &[Individual]) -> usize {
    (0..pop.len())
        .min_by(|&a, &b| pop[a].eval.fitness.total_cmp(&pop[b].eval.fitness))
        .expect("population is nonempty")
}

/// Runs the evolutionary loop. `seeds` are placed in the initial population
/// ahead of random individuals. The internal penalty method draws its
/// random individuals from the feasible region only.
pub fn evolve<L: Landscape>(land: &L, cfg: &EAConfig, seeds: &[Genome]) -> Result<EvolutionOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let space = land.space();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evals = 0usize;
    let evaluate = |g: &Genome, evals: &mut usize| -> Result<Evaluation> {
        *evals += 1;
        land.evaluate(&space.decode(g))
    };

    let mut pop: Vec<Individual> = Vec::with_capacity(cfg.population_size);
    for g in seeds.iter().take(cfg.population_size) {
        space.check_genome(g)?;
        if g.encoding() != cfg.encoding {
            return Err(Error::Structural("seed genome encoding differs from the configuration".into()));
        }
        let eval = evaluate(g, &mut evals)?;
        pop.push(Individual { genome: g.clone(), eval });
    }
    let internal = cfg.penalty.method == PenaltyMethod::Internal;
    let mut attempts = 0usize;
    let max_attempts = 1000 * cfg.population_size;
    while pop.len() < cfg.population_size {
        let genome = space.random(cfg.encoding, &mut rng);
        let eval = evaluate(&genome, &mut evals)?;
        attempts += 1;
        if internal && !eval.fitness.is_finite() {
            if attempts >= max_attempts {
                return Err(Error::Config(format!(
                    "internal penalty needs a feasible initial population; found {} feasible points in {attempts} draws",
                    pop.len()
                )));
            }
            continue;
        }
        pop.push(Individual { genome, eval });
    }

    let mut best_feasible: Option<(Genome, Evaluation)> = None;
    let mut least_violation: Option<(Genome, Evaluation)> = None;
    let mut note = |ind: &Individual| {
        if ind.eval.is_feasible() {
            if best_feasible
                .as_ref()
                .map_or(true, |(_, e)| ind.eval.objective < e.objective)
            {
                best_feasible = Some((ind.genome.clone(), ind.eval));
            }
        } else if least_violation
            .as_ref()
            .map_or(true, |(_, e)| ind.eval.violation < e.violation)
        {
            least_violation = Some((ind.genome.clone(), ind.eval));
        }
    };
    pop.iter().for_each(&mut note);

    let mut trace = RunTrace::default();
    trace.push(0, pop[best_index(&pop)].eval.fitness, mean_finite(&pop), evals, started);

    for generation in 1..=cfg.generations {
        let elite = best_index(&pop);
        let mut next = Vec::with_capacity(cfg.population_size);
        next.push(Individual {
            genome: pop[elite].genome.clone(),
            eval: pop[elite].eval,
        });
        while next.len() < cfg.population_size {
            let a = select(&pop, cfg.selection, &mut rng);
            let b = select(&pop, cfg.selection, &mut rng);
            let (mut c1, mut c2) = if rng.gen_bool(cfg.crossover_rate) {
                space.crossover(a, b, &mut rng)
            } else {
                (a.clone(), b.clone())
            };
            space.mutate(&mut c1, cfg.mutation_rate, &mut rng);
            space.mutate(&mut c2, cfg.mutation_rate, &mut rng);
            for genome in [c1, c2] {
                if next.len() < cfg.population_size {
                    let eval = evaluate(&genome, &mut evals)?;
                    next.push(Individual { genome, eval });
                }
            }
        }
        next.iter().skip(1).for_each(&mut note);
        pop = next;
        trace.push(generation, pop[best_index(&pop)].eval.fitness, mean_finite(&pop), evals, started);
    }

    match best_feasible {
        Some((genome, evaluation)) => Ok(EvolutionOutcome {
            values: space.decode(&genome),
            genome,
            evaluation,
            trace,
        }),
        None => {
            let (genome, eval) = least_violation.expect("population is nonempty");
            Err(Error::Infeasible {
                reason: format!("no feasible individual in {} evaluations", evals),
                best_violation: Some(eval.violation),
                best_genome: Some(genome),
            })
        }
    }
}

/// Headcount search result.
#[derive(Clone, Debug)]
pub struct EaResult {
    pub best: HeadcountVector,
    /// Objective value in its own direction.
    pub value: f64,
    pub fitness: f64,
    pub trace: RunTrace,
}

pub fn run_ea(
    inst: &ProblemInstance,
    bundle: &ObjectiveBundle,
    expr: &ConstraintExpr,
    cfg: &EAConfig,
) -> Result<EaResult> {
    let objective = bundle.sole()?;
    let land = HeadcountLandscape::new(inst, objective, expr, cfg.penalty)?;
    let out = evolve(&land, cfg, &[])?;
    Ok(EaResult {
        best: HeadcountLandscape::headcount(&out.values),
        value: objective.denormalize(out.evaluation.objective),
        fitness: out.evaluation.fitness,
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{eval_expr, Measures};
    use crate::objectives::{Objective, ObjectiveKind};
    use crate::testutil::{micro_instance, reference_like};

    fn total_time() -> ObjectiveBundle {
        ObjectiveBundle::single(Objective::minimize(ObjectiveKind::TotalTime))
    }

    fn brute_force(inst: &ProblemInstance, expr: &ConstraintExpr, bundle: &ObjectiveBundle) -> Option<f64> {
        let space = GeneSpace::for_headcounts(inst).unwrap();
        let mut best: Option<f64> = None;
        let mut v = space.lower().to_vec();
        loop {
            let hc = HeadcountLandscape::headcount(&v);
            let m = Measures::full_attendance(&hc, inst).unwrap();
            if eval_expr(expr, &m, inst).unwrap() {
                let f = bundle.sole().unwrap().normalized(&m);
                best = Some(best.map_or(f, |b: f64| b.min(f)));
            }
            let mut i = 0;
            loop {
                if i == v.len() {
                    return best;
                }
                if v[i] < space.upper()[i] {
                    v[i] += 1;
                    break;
                }
                v[i] = space.lower()[i];
                i += 1;
            }
        }
    }

    #[test]
    fn micro_optimum() {
        let inst = micro_instance();
        let expr: ConstraintExpr = "k2&k5".parse().unwrap();
        assert_eq!(brute_force(&inst, &expr, &total_time()), Some(16.0));
        for enc in [Encoding::Binary, Encoding::Integer] {
            let cfg = EAConfig {
                encoding: enc,
                seed: 3,
                ..EAConfig::default()
            };
            let r = run_ea(&inst, &total_time(), &expr, &cfg).unwrap();
            assert_eq!(r.value, 16.0);
            assert_eq!(r.best.0, vec![1, 1]);
        }
    }

    #[test]
    fn zero_generations_returns_best_initial() {
        let inst = reference_like();
        let expr: ConstraintExpr = "k2&k5".parse().unwrap();
        let cfg = EAConfig {
            generations: 0,
            population_size: 10,
            seed: 9,
            ..EAConfig::default()
        };
        let r = run_ea(&inst, &total_time(), &expr, &cfg).unwrap();
        assert_eq!(r.trace.rows.len(), 1);
        assert_eq!(r.trace.rows[0].evals, 10);
        assert_eq!(r.fitness, r.trace.rows[0].best);
    }

    #[test]
    fn trace_is_monotone_and_deterministic() {
        let inst = reference_like();
        let expr: ConstraintExpr = "k1&k2&k3&k4&k5&k6".parse().unwrap();
        for enc in [Encoding::Binary, Encoding::Integer] {
            let cfg = EAConfig {
                encoding: enc,
                seed: 11,
                ..EAConfig::default()
            };
            let a = run_ea(&inst, &total_time(), &expr, &cfg).unwrap();
            let b = run_ea(&inst, &total_time(), &expr, &cfg).unwrap();
            assert_eq!(a.best, b.best);
            let strip = |t: &RunTrace| t.rows.iter().map(|r| (r.generation, r.best, r.mean, r.evals)).collect::<Vec<_>>();
            assert_eq!(strip(&a.trace), strip(&b.trace));
            for w in a.trace.rows.windows(2) {
                assert!(w[1].best <= w[0].best);
            }
            let m = Measures::full_attendance(&a.best, &inst).unwrap();
            assert!(eval_expr(&expr, &m, &inst).unwrap());
        }
    }

    #[test]
    fn reference_optimum_matches_enumeration_mostly() {
        let inst = reference_like();
        let expr: ConstraintExpr = "k1&k2&k3&k4&k5&k6".parse().unwrap();
        let opt = brute_force(&inst, &expr, &total_time()).unwrap();
        let hits = (0..20)
            .filter(|&s| {
                let cfg = EAConfig {
                    seed: s,
                    ..EAConfig::default()
                };
                run_ea(&inst, &total_time(), &expr, &cfg).unwrap().value == opt
            })
            .count();
        assert!(hits >= 18, "{hits}/20");
    }

    #[test]
    fn internal_penalty_run() {
        let inst = micro_instance();
        let expr: ConstraintExpr = "k2&k5".parse().unwrap();
        let cfg = EAConfig {
            penalty: PenaltyConfig {
                method: PenaltyMethod::Internal,
                ..PenaltyConfig::default()
            },
            seed: 1,
            ..EAConfig::default()
        };
        let r = run_ea(&inst, &total_time(), &expr, &cfg).unwrap();
        assert_eq!(r.best.0, vec![1, 1]);
        assert!(r.fitness > 16.0);
    }

    #[test]
    fn infeasible_reports_best_violation() {
        let mut inst = micro_instance();
        inst.max_total_staff = 6;
        let expr: ConstraintExpr = "!k5".parse().unwrap();
        let cfg = EAConfig {
            population_size: 10,
            generations: 5,
            ..EAConfig::default()
        };
        match run_ea(&inst, &total_time(), &expr, &cfg) {
            Err(Error::Infeasible {
                best_violation: Some(v),
                best_genome: Some(_),
                ..
            }) => assert_eq!(v, 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            EAConfig {
                population_size: 1,
                ..EAConfig::default()
            },
            EAConfig {
                mutation_rate: 1.5,
                ..EAConfig::default()
            },
            EAConfig {
                selection: Selection::Tournament(0),
                ..EAConfig::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn roulette_selection_runs() {
        let inst = micro_instance();
        let expr: ConstraintExpr = "k2&k5".parse().unwrap();
        let cfg = EAConfig {
            selection: Selection::Roulette,
            seed: 4,
            ..EAConfig::default()
        };
        assert_eq!(run_ea(&inst, &total_time(), &expr, &cfg).unwrap().value, 16.0);
    }

    #[test]
    fn trace_csv_layout() {
        let mut t = RunTrace::default();
        t.rows.push(TraceRow {
            generation: 0,
            best: 2.5,
            mean: 3.0,
            evals: 10,
            millis: 1.25,
        });
        let mut buf = Vec::new();
        t.write_csv(&mut buf, false).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "generation,best,mean,evals,millis\n0,2.5,3,10,\n");
    }
}
