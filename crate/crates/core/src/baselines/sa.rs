use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Evaluation, Landscape, RunTrace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SAConfig {
    pub initial_temperature: f64,
    /// Geometric factor applied after each temperature level.
    pub cooling_rate: f64,
    pub termination_temperature: f64,
    pub moves_per_temperature: usize,
    pub seed: u64,
}

impl Default for SAConfig {
    fn default() -> Self {
        SAConfig {
            initial_temperature: 100.0,
            cooling_rate: 0.95,
            termination_temperature: 0.01,
            moves_per_temperature: 20,
            seed: 0,
        }
    }
}

impl SAConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.termination_temperature > 0.0 && self.termination_temperature < self.initial_temperature) {
            return Err(Error::Config(format!(
                "temperatures must satisfy 0 < {} < {}",
                self.termination_temperature, self.initial_temperature
            )));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::Config(format!("cooling rate {} outside (0, 1)", self.cooling_rate)));
        }
        if !self.initial_temperature.is_finite() {
            return Err(Error::Config("initial temperature must be finite".into()));
        }
        Ok(())
    }

    /// Number of temperature levels visited.
    pub fn levels(&self) -> usize {
        let ratio = self.termination_temperature / self.initial_temperature;
        (ratio.ln() / self.cooling_rate.ln()).ceil().max(1.0) as usize
    }
}

/// Metropolis rule: downhill moves always pass, uphill ones with
/// probability `exp(-(e_b - e_a) / t)`.
pub fn sa_accept(e_a: f64, e_b: f64, t: f64, rng: &mut impl Rng) -> bool {
    if e_b <= e_a {
        return true;
    }
    let p = (-(e_b - e_a) / t).exp();
    rng.gen::<f64>() < p
}

#[derive(Clone, Debug)]
pub struct SaOutcome {
    pub values: Vec<i64>,
    pub energy: f64,
    pub trace: RunTrace,
}

/// Anneals over the integer box `lower..=upper`, starting from a uniform
/// random point. One trace row per temperature level.
pub fn sa_minimize(
    lower: &[i64],
    upper: &[i64],
    mut energy: impl FnMut(&[i64]) -> Result<f64>,
    cfg: &SAConfig,
) -> Result<SaOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dims = lower.len();
    let mut current: Vec<i64> = (0..dims).map(|d| rng.gen_range(lower[d]..=upper[d])).collect();
    let mut e_cur = energy(&current)?;
    let mut evals = 1;
    let mut best = (current.clone(), e_cur);
    let mut trace = RunTrace::default();
    trace.push(0, e_cur, e_cur, evals, started);

    let movable: Vec<usize> = (0..dims).filter(|&d| lower[d] < upper[d]).collect();
    let mut t = cfg.initial_temperature;
    let mut level = 0;
    while t > cfg.termination_temperature {
        let mut sum = 0.0;
        for _ in 0..cfg.moves_per_temperature {
            if !movable.is_empty() {
                let d = movable[rng.gen_range(0..movable.len())];
                let step = if rng.gen_bool(0.5) { 1 } else { -1 };
                let mut next = current.clone();
                next[d] = (next[d] + step).clamp(lower[d], upper[d]);
                let e_next = energy(&next)?;
                evals += 1;
                if sa_accept(e_cur, e_next, t, &mut rng) {
                    current = next;
                    e_cur = e_next;
                    if e_cur < best.1 {
                        best = (current.clone(), e_cur);
                    }
                }
            }
            sum += e_cur;
        }
        level += 1;
        let mean = if cfg.moves_per_temperature == 0 {
            e_cur
        } else {
            sum / cfg.moves_per_temperature as f64
        };
        trace.push(level, best.1, mean, evals, started);
        t *= cfg.cooling_rate;
    }
    Ok(SaOutcome {
        values: best.0,
        energy: best.1,
        trace,
    })
}

/// Anneals a landscape on its penalized fitness. Returns the best feasible
/// point seen.
pub fn sa_landscape<L: Landscape>(land: &L, cfg: &SAConfig) -> Result<(Vec<i64>, Evaluation, RunTrace)> {
    let space = land.space();
    let mut best_feasible: Option<(Vec<i64>, Evaluation)> = None;
    let mut least_violation: Option<f64> = None;
    let out = sa_minimize(
        space.lower(),
        space.upper(),
        |v| {
            let e = land.evaluate(v)?;
            if e.is_feasible() {
                if best_feasible.as_ref().map_or(true, |(_, b)| e.objective < b.objective) {
                    best_feasible = Some((v.to_vec(), e));
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
            reason: format!("annealing saw no feasible point in {} evaluations", out.trace.evaluations()),
            best_violation: least_violation,
            best_genome: None,
        }),
    }
}
