use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use covcheck_core::{
    check_parsed, declared_type, definition_term, denotation_member, eval_bounded, parse_program, BasicType,
    CheckConfig, DomainBounds, Measure, Outcome, PredicateRegistry, ProgramReport, Prop, RefinementType, Solver,
    SolverConfig, TypeContext,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Coverage-type checker for generator programs.
#[derive(Parser, Debug)]
#[command(name = "covcheck", version)]
struct Args {
    /// Program to check (`.tg`).
    input: PathBuf,
    /// Extra `val` signatures; these override the program's own.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Check every definition against its declared type (default mode).
    #[arg(long, conflicts_with = "oracle")]
    check: bool,
    /// Decide membership by bounded enumeration instead of the solver.
    #[arg(long)]
    oracle: bool,
    /// Write each solver script to `<dir>/<n>_<origin>.smt2`.
    #[arg(long, value_name = "DIR")]
    dump_queries: Option<PathBuf>,
    #[arg(long, default_value = "z3")]
    solver: PathBuf,
    /// Per-query timeout in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    solver_timeout: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Oracle domains, e.g. `nat=4,int=4,len=3,depth=3`.
    #[arg(long, default_value = "nat=4,int=4,len=3,depth=3")]
    bounds: DomainBounds,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Additional predicate/axiom declaration files.
    #[arg(long, num_args = 1..)]
    axioms: Vec<PathBuf>,
    /// Measure for recursive calls on numeric arguments.
    #[arg(long)]
    measure: Option<Measure>,
    /// Keep algebra results unsimplified.
    #[arg(long)]
    no_simplify: bool,
}

fn read(path: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn registry(args: &Args) -> anyhow::Result<PredicateRegistry> {
    let mut reg = PredicateRegistry::builtin();
    for p in &args.axioms {
        reg.load_file(p).with_context(|| format!("loading {}", p.display()))?;
    }
    Ok(reg)
}

fn run_check(args: &Args) -> anyhow::Result<ExitCode> {
    let program = parse_program(&read(&args.input)?).with_context(|| format!("parsing {}", args.input.display()))?;
    let annotations = match &args.annotations {
        Some(p) => parse_program(&read(p)?).with_context(|| format!("parsing {}", p.display()))?.signatures,
        None => vec![],
    };
    if let Some(dir) = &args.dump_queries {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let solver = Solver::new(
        SolverConfig { path: args.solver.clone(), timeout_ms: args.solver_timeout, dump_dir: args.dump_queries.clone() },
        registry(args)?,
    );
    solver.probe()?;
    let cfg = CheckConfig { measure: args.measure, simplify: !args.no_simplify, jobs: args.jobs.max(1) };
    let report = check_parsed(&solver, &program, &annotations, &cfg)?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => print_text(&report, &solver),
    }
    Ok(exit_code(&report))
}

fn exit_code(report: &ProgramReport) -> ExitCode {
    if report.definitions.iter().any(|d| d.verdict == Outcome::Error) {
        ExitCode::from(2)
    } else if report.all_accepted() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn print_text(report: &ProgramReport, solver: &Solver) {
    let queries: BTreeMap<usize, _> = solver.queries().into_iter().map(|q| (q.id, q)).collect();
    let mut out = std::io::stdout().lock();
    for d in &report.definitions {
        let verdict = match d.verdict {
            Outcome::Accepted => "accepted",
            Outcome::Rejected => "rejected",
            Outcome::Error => "error",
        };
        let _ = writeln!(out, "{}: {verdict} ({} queries, {:.0} ms)", d.name, d.queries, d.wall_ms);
        if let Some(e) = &d.error {
            let _ = writeln!(out, "  {e}");
        }
        if let Some(q) = d.failing_query.and_then(|id| queries.get(&id)) {
            let _ = writeln!(out, "  query #{} [{}]: {}", q.id, q.verdict, q.goal);
        }
    }
}

fn run_oracle(args: &Args) -> anyhow::Result<ExitCode> {
    let program = parse_program(&read(&args.input)?).with_context(|| format!("parsing {}", args.input.display()))?;
    let mut sigs: BTreeMap<String, RefinementType> = program.signatures.iter().cloned().collect();
    if let Some(p) = &args.annotations {
        sigs.extend(parse_program(&read(p)?)?.signatures);
    }
    let reg = registry(args)?;
    let mut all = true;
    let mut out = std::io::stdout().lock();
    for def in &program.definitions {
        // Unannotated closed definitions are tested against the empty coverage type.
        let ty = match declared_type(def, &sigs) {
            Ok(t) => t,
            Err(_) if def.params.is_empty() => {
                let env = BTreeMap::new();
                match covcheck_core::basic_check(&env, &def.body)? {
                    BasicType::Base(b) => RefinementType::under(b, Prop::Bot),
                    t => bail!("`{}` has function type {t} and no annotation", def.name),
                }
            }
            Err(e) => return Err(e.into()),
        };
        let term = definition_term(def, &ty)?;
        let member = denotation_member(&reg, &term, &ty, &TypeContext::new(), &args.bounds)?;
        all &= member;
        match args.format {
            Format::Json => {
                let line = serde_json::json!({ "term": def.name, "type": ty.to_string(), "member": member });
                writeln!(out, "{line}")?;
            }
            Format::Text => {
                if def.params.is_empty() {
                    let vs = eval_bounded(&term, &args.bounds)?;
                    let values: Vec<String> = vs.values.iter().map(ToString::to_string).collect();
                    let err = if vs.err_reachable { " (err reachable)" } else { "" };
                    writeln!(out, "{}: values {{{}}}{err}", def.name, values.join(", "))?;
                }
                writeln!(out, "{}: {} {ty}", def.name, if member { "∈" } else { "∉" })?;
            }
        }
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    let r = if args.oracle { run_oracle(&args) } else { run_check(&args) };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("covcheck: {e:#}");
            ExitCode::from(2)
        }
    }
}
