use std::path::Path;

use msp_bench::{run_experiment, write_atomic, ExperimentId, ExperimentSpec};
use msp_core::baselines::{solve, SolverKind};
use msp_core::constraints::{eval_expr, ConstraintExpr, Measures};
use msp_core::domain::{HeadcountVector, ProblemInstance};
use msp_core::evolution::{solve_assignment, EAConfig, RunTrace};
use msp_core::moea::run_moea;
use msp_core::objectives::{Objective, ObjectiveBundle};
use msp_core::tablegen::{default_needs, generate_roster, generate_rotation, RotationSpec};

use crate::overrides::solver_config;
use crate::{
    AssignArgs, BenchArgs, Cli, Command, Failure, ParetoArgs, ProblemArgs, RunArgs, SolveArgs, TableArgs,
    ValidateArgs, EXIT_USAGE,
};

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Pareto(a) => pareto_cmd(a),
        Command::Table(a) => table_cmd(a),
        Command::Assign(a) => assign_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Validate(a) => validate_cmd(a),
    }
}

fn read_instance(path: &Path) -> Result<ProblemInstance, Failure> {
    let inst = ProblemInstance::load(path).map_err(|e| match e {
        msp_core::Error::Io(io) => Failure::usage(format!("cannot read instance {}: {io}", path.display())),
        other => other.into(),
    })?;
    inst.validate()?;
    Ok(inst)
}

struct Problem {
    inst: ProblemInstance,
    expr: ConstraintExpr,
}

fn read_problem(p: &ProblemArgs) -> Result<Problem, Failure> {
    let inst = read_instance(&p.instance)?;
    let text = match (&p.constraints, &p.constraints_file) {
        (Some(c), _) => c.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read constraints {}: {e}", path.display())))?,
        (None, None) => return Err(Failure::usage("give --constraints or --constraints-file")),
    };
    let expr: ConstraintExpr = text.trim().parse()?;
    expr.check(&inst)?;
    Ok(Problem { inst, expr })
}

/// The given seed, or a fresh one announced on stderr.
fn seed(run: &RunArgs) -> u64 {
    run.seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn write_out(out: Option<&Path>, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join(name), bytes)?;
    }
    Ok(())
}

fn trace_bytes(trace: &RunTrace) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf, true)?;
    Ok(buf)
}

fn headcount_csv(inst: &ProblemInstance, hc: &HeadcountVector) -> Result<Vec<u8>, Failure> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["job", "name", "headcount"])?;
    for (job, n) in inst.jobs.iter().zip(hc.counts()) {
        w.write_record([job.code.as_str(), job.name.as_str(), &n.to_string()])?;
    }
    w.into_inner().map_err(|e| Failure::internal(e.to_string()))
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::internal(e.to_string())
    }
}

fn describe(inst: &ProblemInstance, hc: &HeadcountVector) -> String {
    inst.jobs
        .iter()
        .zip(hc.counts())
        .map(|(j, n)| format!("{}={n}", j.code))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_headcount(inst: &ProblemInstance, counts: &[u32]) -> Result<HeadcountVector, Failure> {
    if counts.len() != inst.job_count() {
        return Err(Failure::usage(format!(
            "--headcount has {} values, the instance has {} jobs",
            counts.len(),
            inst.job_count()
        )));
    }
    let hc = HeadcountVector(counts.to_vec());
    hc.check_against(inst)?;
    Ok(hc)
}

fn solve_cmd(a: SolveArgs) -> Result<(), Failure> {
    let kind: SolverKind = a.solver.parse()?;
    let p = read_problem(&a.problem)?;
    let objective = Objective::parse(&a.objective, &p.inst)?;
    let bundle = ObjectiveBundle::single(objective);
    let cfg = solver_config(a.run.config.as_deref(), &a.run.overrides)?;
    let seed = seed(&a.run);
    let s = solve(kind, &p.inst, &bundle, &p.expr, &cfg, seed)?;
    let m = Measures::full_attendance(&s.best, &p.inst)?;
    if !eval_expr(&p.expr, &m, &p.inst)? {
        return Err(Failure::internal("solver reported a point that violates the constraints"));
    }
    let out = a.run.out.as_deref();
    write_out(out, "headcount.csv", &headcount_csv(&p.inst, &s.best)?)?;
    write_out(out, "trace.csv", &trace_bytes(&s.trace)?)?;
    println!("seed: {seed}");
    println!("solver: {kind}");
    println!("{}: {}", bundle.objectives()[0].label(&p.inst), s.value);
    println!("headcount: {}", describe(&p.inst, &s.best));
    Ok(())
}

fn pareto_cmd(a: ParetoArgs) -> Result<(), Failure> {
    let p = read_problem(&a.problem)?;
    let bundle = ObjectiveBundle::parse(&a.objectives, &p.inst)?;
    let cfg = solver_config(a.run.config.as_deref(), &a.run.overrides)?;
    let seed = seed(&a.run);
    let r = run_moea(&p.inst, &bundle, &p.expr, &EAConfig { seed, ..cfg.ea })?;
    let mut archive = Vec::new();
    r.archive.write_csv(&p.inst, &bundle, &mut archive)?;
    let out = a.run.out.as_deref();
    write_out(out, "archive.csv", &archive)?;
    write_out(out, "trace.csv", &trace_bytes(&r.trace)?)?;
    println!("seed: {seed}");
    println!("archive: {} points", r.archive.len());
    if out.is_none() {
        print!("{}", String::from_utf8_lossy(&archive));
    }
    Ok(())
}

fn assign_cmd(a: AssignArgs) -> Result<(), Failure> {
    let p = read_problem(&a.problem)?;
    let hc = parse_headcount(&p.inst, &a.headcount)?;
    let bundle = ObjectiveBundle::single(Objective::parse(&a.objective, &p.inst)?);
    let cfg = solver_config(a.run.config.as_deref(), &a.run.overrides)?;
    let seed = seed(&a.run);
    let r = solve_assignment(&hc, &p.inst, &p.expr, &bundle, &EAConfig { seed, ..cfg.ea })?;
    let mut attendance = Vec::new();
    r.tensor.write_csv(&p.inst, &mut attendance)?;
    let out = a.run.out.as_deref();
    write_out(out, "attendance.csv", &attendance)?;
    write_out(out, "trace.csv", &trace_bytes(&r.trace)?)?;
    println!("seed: {seed}");
    println!("{}: {}", bundle.objectives()[0].label(&p.inst), r.value);
    println!("attended shifts: {}", r.tensor.activation_count());
    Ok(())
}

fn table_cmd(a: TableArgs) -> Result<(), Failure> {
    let (table, inst) = if let Some(rot) = &a.rotation {
        let [positions, people] = rot[..] else {
            return Err(Failure::usage("--rotation takes POSITIONS,PEOPLE"));
        };
        let spec = RotationSpec::new(positions, people);
        (generate_rotation(&spec, a.days.unwrap_or(people))?, None)
    } else {
        let path = a.instance.as_deref().ok_or_else(|| Failure::usage("give --instance or --rotation"))?;
        let mut inst = read_instance(path)?;
        if let Some(d) = a.days {
            if d == 0 {
                return Err(Failure::usage("--days must be positive"));
            }
            inst = inst.with_horizon(d);
        }
        let hc = parse_headcount(&inst, &a.headcount)?;
        let needs = default_needs(&inst, &hc);
        let seed = seed(&a.run);
        println!("seed: {seed}");
        (generate_roster(&inst, &hc, &needs, seed)?, Some(inst))
    };
    let mut csv = Vec::new();
    table.write_csv(inst.as_ref(), &mut csv)?;
    let out = a.run.out.as_deref();
    write_out(out, "table.csv", &csv)?;
    println!("assignments: {} over {} days", table.assignments.len(), table.days);
    if out.is_none() {
        print!("{}", String::from_utf8_lossy(&csv));
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Result<(), Failure> {
    let id: ExperimentId = a.experiment.parse()?;
    let mut spec = ExperimentSpec::preset(id, &a.instance);
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if !a.solvers.is_empty() {
        spec.solvers = a.solvers.iter().map(|s| s.parse()).collect::<msp_core::Result<_>>()?;
    }
    if let Some(c) = a.constraints {
        spec.constraints = c;
    }
    if !a.objectives.is_empty() {
        spec.objectives = a.objectives;
    }
    spec.config = solver_config(a.run.config.as_deref(), &a.run.overrides)?;
    spec.seed_base = seed(&a.run);
    read_instance(&a.instance)?;
    let out = a
        .run
        .out
        .as_deref()
        .ok_or_else(|| Failure::usage("bench needs --out"))?;
    let mut report = run_experiment(&spec)?;
    if a.no_timing {
        report.strip_timing();
    }
    report.write(out, !a.no_timing)?;
    println!("seed: {}", spec.seed_base);
    println!("experiment: {id}, {} trials", spec.trials);
    for row in &report.comparison {
        println!(
            "{:<6} accuracy {:>6} rank {} failures {}",
            row.algorithm,
            row.accuracy.map_or("-".into(), |v| format!("{v:.1}%")),
            row.convergence_rank,
            row.failures
        );
    }
    let failed = report.trials.iter().filter(|t| t.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} trials failed; see report.json");
    }
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Result<(), Failure> {
    let inst = ProblemInstance::load(&a.instance).map_err(|e| match e {
        msp_core::Error::Io(io) => Failure::usage(format!("cannot read instance {}: {io}", a.instance.display())),
        other => other.into(),
    })?;
    let diagnostics = inst.diagnostics();
    if diagnostics.is_empty() {
        println!("{}: ok", a.instance.display());
        return Ok(());
    }
    for d in &diagnostics {
        println!("{}: {d}", a.instance.display());
    }
    Err(Failure {
        code: EXIT_USAGE,
        message: format!("{} problems found", diagnostics.len()),
    })
}
