use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Landscape, RunTrace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PSOConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    /// Inertia decays linearly from `inertia_start` to `inertia_end`.
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub c1: f64,
    pub c2: f64,
    /// Velocity clamp per dimension; half the dimension's range when unset.
    pub v_max: Option<f64>,
    pub seed: u64,
}

impl Default for PSOConfig {
    fn default() -> Self {
        PSOConfig {
            swarm_size: 30,
            iterations: 100,
            inertia_start: 0.9,
            inertia_end: 0.4,
            c1: 2.0,
            c2: 2.0,
            v_max: None,
            seed: 0,
        }
    }
}

impl PSOConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 {
            return Err(Error::Config("swarm size must be positive".into()));
        }
        for (name, v) in [
            ("inertia_start", self.inertia_start),
            ("inertia_end", self.inertia_end),
            ("c1", self.c1),
            ("c2", self.c2),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("{name} = {v} must be nonnegative")));
            }
        }
        if let Some(v) = self.v_max {
            if !(v > 0.0) {
                return Err(Error::Config(format!("v_max = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn inertia(&self, iteration: usize) -> f64 {
        if self.iterations <= 1 {
            return self.inertia_start;
        }
        let t = iteration as f64 / (self.iterations - 1) as f64;
        self.inertia_start + (self.inertia_end - self.inertia_start) * t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// Coefficients of one velocity update.
#[derive(Clone, Debug, PartialEq)]
pub struct StepParams {
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_max: Vec<f64>,
}

/// `v <- w v + c1 r1 (p - x) + c2 r2 (g - x)`, clamped to `+-v_max`, then
/// `x <- x + v`. `rand` is called for `r1` then `r2` in every dimension.
pub fn pso_step(particle: &mut Particle, p_best: &[f64], g_best: &[f64], params: &StepParams, rand: &mut impl FnMut() -> f64) {
    for d in 0..particle.position.len() {
        let x = particle.position[d];
        let r1 = rand();
        let r2 = rand();
        let v = params.inertia * particle.velocity[d] + params.c1 * r1 * (p_best[d] - x) + params.c2 * r2 * (g_best[d] - x);
        let lim = params.v_max[d];
        particle.velocity[d] = v.clamp(-lim, lim);
        particle.position[d] = x + particle.velocity[d];
    }
}

#[derive(Clone, Debug)]
pub struct PsoOutcome {
    pub position: Vec<f64>,
    pub value: f64,
    pub trace: RunTrace,
}

/// Minimizes `f` over the box `lower..=upper`. Positions are clamped into
/// the box after every step.
pub fn pso_minimize(lower: &[f64], upper: &[f64], mut f: impl FnMut(&[f64]) -> Result<f64>, cfg: &PSOConfig) -> Result<PsoOutcome> {
    cfg.validate()?;
    if lower.len() != upper.len() {
        return Err(Error::Structural("box bounds differ in length".into()));
    }
    let started = Instant::now();
    let dims = lower.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let v_max: Vec<f64> = (0..dims)
        .map(|d| cfg.v_max.unwrap_or(((upper[d] - lower[d]) / 2.0).max(0.5)))
        .collect();
    let mut evals = 0usize;
    let mut swarm: Vec<Particle> = (0..cfg.swarm_size)
        .map(|_| Particle {
            position: (0..dims).map(|d| rng.gen_range(lower[d]..=upper[d])).collect(),
            velocity: (0..dims).map(|d| rng.gen_range(-v_max[d]..=v_max[d])).collect(),
        })
        .collect();
    let mut values = Vec::with_capacity(swarm.len());
    for p in &swarm {
        values.push(f(&p.position)?);
        evals += 1;
    }
    let mut p_best: Vec<(Vec<f64>, f64)> = swarm.iter().zip(&values).map(|(p, &v)| (p.position.clone(), v)).collect();
    let argmin = |pb: &[(Vec<f64>, f64)]| (0..pb.len()).min_by(|&a, &b| pb[a].1.total_cmp(&pb[b].1)).expect("swarm nonempty");
    let mut g_best = p_best[argmin(&p_best)].clone();
    let mean = |v: &[f64]| {
        let finite: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
        if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        }
    };
    let mut trace = RunTrace::default();
    trace.push(0, g_best.1, mean(&values), evals, started);

    for it in 0..cfg.iterations {
        let params = StepParams {
            inertia: cfg.inertia(it),
            c1: cfg.c1,
            c2: cfg.c2,
            v_max: v_max.clone(),
        };
        for (i, p) in swarm.iter_mut().enumerate() {
            pso_step(p, &p_best[i].0, &g_best.0, &params, &mut || rng.gen::<f64>());
            for d in 0..dims {
                p.position[d] = p.position[d].clamp(lower[d], upper[d]);
            }
            values[i] = f(&p.position)?;
            evals += 1;
            if values[i] < p_best[i].1 {
                p_best[i] = (p.position.clone(), values[i]);
            }
        }
        let b = argmin(&p_best);
        if p_best[b].1 < g_best.1 {
            g_best = p_best[b].clone();
        }
        trace.push(it + 1, g_best.1, mean(&values), evals, started);
    }
    Ok(PsoOutcome {
        position: g_best.0,
        value: g_best.1,
        trace,
    })
}

/// Integer search: positions round to the nearest lattice point for
/// evaluation. Returns the best feasible point seen with its evaluation.
pub fn pso_integer<L: Landscape>(land: &L, cfg: &PSOConfig) -> Result<(Vec<i64>, crate::evolution::Evaluation, RunTrace)> {
    let space = land.space();
    let lower: Vec<f64> = space.lower().iter().map(|&v| v as f64).collect();
    let upper: Vec<f64> = space.upper().iter().map(|&v| v as f64).collect();
    let mut best_feasible: Option<(Vec<i64>, crate::evolution::Evaluation)> = None;
    let mut least_violation: Option<f64> = None;
    let out = pso_minimize(
        &lower,
        &upper,
        |x| {
            let mut v: Vec<i64> = x.iter().map(|c| c.round() as i64).collect();
            space.clamp(&mut v);
            let e = land.evaluate(&v)?;
            if e.is_feasible() {
                if best_feasible.as_ref().map_or(true, |(_, b)| e.objective < b.objective) {
                    best_feasible = Some((v, e));
                }
            } else {
                least_violation = Some(least_violation.map_or(e.violation, |l: f64| l.min(e.violation)));
            }
            Ok(e.fitness)
        },
        cfg,
    )?;
    match best_feasible {
        Some((v, e)) => Ok((v, e, out.trace)),
        None => Err(Error::Infeasible {
            reason: format!("particle swarm saw no feasible point in {} evaluations", out.trace.evaluations()),
            best_violation: least_violation,
            best_genome: None,
        }),
    }
}
