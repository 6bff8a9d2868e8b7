use std::time::Instant;

use crate::constraints::{eval_expr, ConstraintExpr, Measures};
use crate::domain::{HeadcountVector, ProblemInstance};
use crate::error::{Error, Result};
use crate::evolution::{GeneSpace, RunTrace};
use crate::objectives::{Direction, ObjectiveBundle};

/// Largest headcount box the exact search will walk.
pub const NODE_CAP: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct IpResult {
    pub best: HeadcountVector,
    /// Objective in its own direction.
    pub value: f64,
    /// Leaves evaluated.
    pub evaluated: usize,
    pub trace: RunTrace,
}

/// Exact constrained optimum by depth-first search over the headcount box.
///
/// Jobs are branched in order with counts ascending, so the first optimum
/// met is the lexicographically smallest one. For minimized objectives that
/// never decrease with headcount, a branch is cut when the objective with
/// all remaining jobs at their minimum already reaches the incumbent.
pub fn ip_solve(inst: &ProblemInstance, bundle: &ObjectiveBundle, expr: &ConstraintExpr) -> Result<IpResult> {
    ip_solve_capped(inst, bundle, expr, NODE_CAP)
}

pub fn ip_solve_capped(inst: &ProblemInstance, bundle: &ObjectiveBundle, expr: &ConstraintExpr, cap: f64) -> Result<IpResult> {
    let started = Instant::now();
    let objective = bundle.sole()?;
    inst.validate()?;
    expr.check(inst)?;
    objective.check(inst)?;
    let space = GeneSpace::for_headcounts(inst)?;
    let size = space.size();
    if size > cap {
        return Err(Error::SearchSpaceTooLarge { size, cap });
    }
    let prune = objective.direction == Direction::Minimize && objective.monotone_in_headcount();

    struct Search<'a> {
        inst: &'a ProblemInstance,
        expr: &'a ConstraintExpr,
        lower: Vec<u32>,
        upper: Vec<u32>,
        prune: bool,
        value: &'a dyn Fn(&Measures) -> f64,
        best: Option<(Vec<u32>, f64)>,
        evaluated: usize,
    }

    impl Search<'_> {
        fn bound(&self, counts: &[u32]) -> Result<f64> {
            Ok((self.value)(&Measures::full_attendance(&HeadcountVector(counts.to_vec()), self.inst)?))
        }

        fn visit(&mut self, counts: &mut Vec<u32>, depth: usize) -> Result<()> {
            if depth == counts.len() {
                self.evaluated += 1;
                let m = Measures::full_attendance(&HeadcountVector(counts.clone()), self.inst)?;
                if eval_expr(self.expr, &m, self.inst)? {
                    let v = (self.value)(&m);
                    if self.best.as_ref().map_or(true, |(_, b)| v < *b) {
                        self.best = Some((counts.clone(), v));
                    }
                }
                return Ok(());
            }
            for n in self.lower[depth]..=self.upper[depth] {
                counts[depth] = n;
                if self.prune {
                    if let Some((_, incumbent)) = &self.best {
                        // remaining jobs already sit at their minimum
                        if self.bound(counts)? >= *incumbent {
                            break;
                        }
                    }
                }
                self.visit(counts, depth + 1)?;
            }
            counts[depth] = self.lower[depth];
            Ok(())
        }
    }

    let value = |m: &Measures| objective.normalized(m);
    let mut search = Search {
        inst,
        expr,
        lower: inst.lower_bounds(),
        upper: inst.upper_bounds(),
        prune,
        value: &value,
        best: None,
        evaluated: 0,
    };
    let mut counts = search.lower.clone();
    search.visit(&mut counts, 0)?;
    let (best, v) = search
        .best
        .ok_or_else(|| Error::infeasible(format!("no headcount vector in the box of {size} satisfies {expr}")))?;
    let mut trace = RunTrace::default();
    trace.push(0, v, v, search.evaluated, started);
    Ok(IpResult {
        best: HeadcountVector(best),
        value: objective.denormalize(v),
        evaluated: search.evaluated,
        trace,
    })
}
