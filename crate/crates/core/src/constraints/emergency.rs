use rand::Rng;

use crate::domain::{EmergencySpec, HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};

/// Withdraws `alpha` staff for an urgent task and books its time and money.
///
/// Staff are taken one at a time from whichever listed job currently has the
/// most people (lowest index on ties). Returns the adjusted headcounts, total
/// hours `T - T0` and cost `C - bonus + punishment`.
pub fn apply_emergency(
    hc: &HeadcountVector,
    total_time: f64,
    cost: f64,
    spec: &EmergencySpec,
    inst: &ProblemInstance,
) -> Result<(HeadcountVector, f64, f64)> {
    hc.check_against(inst)?;
    let jobs = inst.resolve_jobs(&spec.jobs)?;
    let available: u32 = jobs.iter().map(|&j| hc.0[j]).sum();
    if spec.alpha > available {
        return Err(Error::infeasible(format!(
            "emergency needs {} staff but the drawn-from jobs only have {available}",
            spec.alpha
        )));
    }
    let mut counts = hc.0.clone();
    for _ in 0..spec.alpha {
        let &j = jobs
            .iter()
            .max_by(|&&a, &&b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
            .expect("jobs nonempty when alpha > 0");
        counts[j] -= 1;
    }
    Ok((
        HeadcountVector(counts),
        total_time - spec.time_cost,
        cost - spec.bonus + spec.punishment,
    ))
}

/// Independent Bernoulli draw per day: `true` where an emergency occurs.
pub fn sample_emergency_days<R: Rng>(spec: &EmergencySpec, days: usize, rng: &mut R) -> Vec<bool> {
    let p = spec.daily_probability.clamp(0.0, 1.0);
    (0..days).map(|_| rng.gen_bool(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::reference_like;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(alpha: u32, time_cost: f64, bonus: f64, punishment: f64) -> EmergencySpec {
        EmergencySpec {
            alpha,
            time_cost,
            bonus,
            punishment,
            daily_probability: 0.1,
            jobs: vec![],
        }
    }

    #[test]
    fn direct_formula() {
        let inst = reference_like();
        let hc = HeadcountVector(vec![3, 10, 4, 8, 7, 8]);
        let (n, t, _) = apply_emergency(&hc, 4942.0, 0.0, &spec(5, 100.0, 0.0, 0.0), &inst).unwrap();
        assert_eq!(n.total(), 35);
        assert_eq!(t, 4842.0);
        // largest count first, lowest index on ties
        assert_eq!(n.0, vec![3, 7, 4, 7, 7, 7]);
    }

    #[test]
    fn zero_alpha_is_identity() {
        let inst = reference_like();
        let hc = HeadcountVector(vec![3, 10, 4, 8, 7, 8]);
        let (n, t, c) = apply_emergency(&hc, 10.0, 20.0, &spec(0, 0.0, 0.0, 0.0), &inst).unwrap();
        assert_eq!((n, t, c), (hc, 10.0, 20.0));
    }

    #[test]
    fn cost_adjustment() {
        let inst = reference_like();
        let hc = HeadcountVector(vec![3, 10, 4, 8, 7, 8]);
        let (_, _, c) = apply_emergency(&hc, 0.0, 1000.0, &spec(1, 0.0, 50.0, 20.0), &inst).unwrap();
        assert_eq!(c, 970.0);
    }

    #[test]
    fn draws_only_from_listed_jobs() {
        let inst = reference_like();
        let hc = HeadcountVector(vec![3, 10, 4, 8, 7, 8]);
        let mut s = spec(3, 0.0, 0.0, 0.0);
        s.jobs = vec!["d".into(), "e".into()];
        let (n, _, _) = apply_emergency(&hc, 0.0, 0.0, &s, &inst).unwrap();
        assert_eq!(n.0, vec![3, 10, 4, 6, 6, 8]);
        s.alpha = 16;
        assert!(matches!(
            apply_emergency(&hc, 0.0, 0.0, &s, &inst),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn bernoulli_days_follow_probability() {
        let mut s = spec(1, 0.0, 0.0, 0.0);
        s.daily_probability = 0.25;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let days = sample_emergency_days(&s, 40_000, &mut rng);
        let freq = days.iter().filter(|&&d| d).count() as f64 / days.len() as f64;
        assert!((freq - 0.25).abs() < 0.01, "{freq}");
        s.daily_probability = 0.0;
        assert!(sample_emergency_days(&s, 100, &mut rng).iter().all(|&d| !d));
    }
}
