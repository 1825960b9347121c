//! Per-definition coverage checking and program reports.

mod basic;
mod bidir;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use basic::{basic_check, basic_info, uniquify, BasicInfo};
pub use bidir::is_typing_error as is_rejection;

use crate::algebra::check_closed;
use crate::error::{Error, Result};
use crate::smt::Solver;
use crate::syntax::{
    normalize_mnf, parse_program, BaseType, BasicType, Definition, Expr, ParamType, Program, RefinementType,
    Term, TypeContext,
};
use bidir::{default_measure, explicit_measure, SelfRef, Session};

/// Well-founded relation used for recursive calls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// `ν < x`
    Nat,
    /// `0 ≤ ν < x`
    Int,
    /// `len(ν) < len(x)`; depth for trees.
    Len,
}

impl std::str::FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nat" => Ok(Measure::Nat),
            "int" => Ok(Measure::Int),
            "len" => Ok(Measure::Len),
            _ => Err(format!("unknown measure `{s}` (expected nat, int or len)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    /// Overrides the measure chosen from the measured argument's type.
    pub measure: Option<Measure>,
    /// Simplify types after each algebra operation.
    pub simplify: bool,
    pub jobs: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { measure: None, simplify: true, jobs: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Accepted,
    Rejected,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub depth: usize,
    pub rule: String,
    pub subject: String,
    pub conclusion: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitionReport {
    pub name: String,
    pub verdict: Outcome,
    pub error: Option<String>,
    pub failing_query: Option<usize>,
    pub queries: usize,
    pub wall_ms: f64,
    pub trace: Vec<TraceStep>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgramReport {
    pub definitions: Vec<DefinitionReport>,
}

impl ProgramReport {
    pub fn all_accepted(&self) -> bool {
        self.definitions.iter().all(|d| d.verdict == Outcome::Accepted)
    }

    pub fn get(&self, name: &str) -> Option<&DefinitionReport> {
        self.definitions.iter().find(|d| d.name == name)
    }
}

fn outcome_of(e: &Error) -> Outcome {
    if is_rejection(e) || matches!(e, Error::BasicType { .. } | Error::NotClosed(_) | Error::UnhousedSymbol(_)) {
        Outcome::Rejected
    } else {
        Outcome::Error
    }
}

/// Declared type of a definition: its `val` signature if any, otherwise
/// assembled from parameter and return annotations.
pub fn declared_type(def: &Definition, sigs: &BTreeMap<String, RefinementType>) -> Result<RefinementType> {
    if let Some(t) = sigs.get(&def.name) {
        return Ok(t.clone());
    }
    let ret = match &def.ret {
        Some(ParamType::Refined(t)) => t.clone(),
        _ => return Err(Error::MissingAnnotation(format!("result type of `{}` needs a refinement", def.name))),
    };
    let mut ty = ret;
    for p in def.params.iter().rev() {
        let dom = match &p.ty {
            Some(ParamType::Refined(t)) => t.clone(),
            Some(ParamType::Basic(b)) => RefinementType::top_over(b),
            None => return Err(Error::MissingAnnotation(format!("parameter `{}` of `{}`", p.name, def.name))),
        };
        ty = RefinementType::arrow(p.name.clone(), dom, ty);
    }
    Ok(ty)
}

fn measured_argument(
    def: &Definition,
    params: &[(String, RefinementType)],
    binders: &[String],
    measure: Option<Measure>,
) -> Result<(usize, crate::syntax::Prop)> {
    if let Some(m) = &def.decreasing {
        let fv = m.free_vars();
        let k = params
            .iter()
            .rposition(|(p, _)| fv.contains(p))
            .ok_or_else(|| Error::MissingAnnotation(format!("measure of `{}` mentions no parameter", def.name)))?;
        let mut at_call = m.subst(&params[k].0, &Expr::nu());
        for (j, (p, _)) in params.iter().enumerate().take(k) {
            at_call = at_call.subst(p, &Expr::var(binders[j].clone()));
        }
        return Ok((k, explicit_measure(m, &at_call)));
    }
    let (k, base) = params
        .iter()
        .enumerate()
        .find_map(|(i, (_, t))| match t {
            RefinementType::Over { base, .. } => Some((i, base.clone())),
            _ => None,
        })
        .ok_or_else(|| {
            Error::MissingAnnotation(format!("recursive `{}` has no base-typed argument to measure", def.name))
        })?;
    let kind = match (measure, &base) {
        // `ν < x` alone is not well-founded on int; keep the lower bound.
        (Some(Measure::Nat), BaseType::Int) => Measure::Int,
        (Some(m), BaseType::Nat | BaseType::Int) => m,
        (Some(Measure::Len), _) => Measure::Len,
        _ => Measure::for_base(&base),
    };
    Ok((k, default_measure(kind, &params[k].0)))
}

/// Renames the first `n` binders of an arrow chain; returns the type and
/// the new names.
fn rename_chain(ty: &RefinementType, names: &[String]) -> Result<RefinementType> {
    match (ty, names.split_first()) {
        (_, None) => Ok(ty.clone()),
        (RefinementType::Arrow { binder, dom, cod }, Some((n, rest))) => {
            let cod = rename_chain(&cod.rename(binder, n), rest)?;
            Ok(RefinementType::arrow(n.clone(), (**dom).clone(), cod))
        }
        _ => Err(Error::ShapeViolation("definition has more parameters than its type".into())),
    }
}

fn strengthen_at(ty: &RefinementType, k: usize, m: &crate::syntax::Prop) -> RefinementType {
    match ty {
        RefinementType::Arrow { binder, dom, cod } if k == 0 => {
            RefinementType::arrow(binder.clone(), dom.conjoin(m), (**cod).clone())
        }
        RefinementType::Arrow { binder, dom, cod } => {
            RefinementType::arrow(binder.clone(), (**dom).clone(), strengthen_at(cod, k - 1, m))
        }
        t => t.clone(),
    }
}

fn check_definition_in(
    session: &mut Session<'_>,
    def: &Definition,
    ty: &RefinementType,
    globals: &TypeContext,
    cfg: &CheckConfig,
) -> Result<()> {
    check_closed(globals, ty)?;
    let names: Vec<String> = def.params.iter().map(|p| p.name.clone()).collect();
    let renamed = rename_chain(ty, &names)?;
    let mut ctx = globals.clone();
    let mut params = Vec::new();
    let mut rest = renamed;
    for p in &def.params {
        let RefinementType::Arrow { dom, cod, .. } = rest else { unreachable!("renamed chain") };
        if let Some(ParamType::Basic(b)) = &p.ty {
            if !b.compatible(&dom.erase()) {
                return Err(Error::BasicType {
                    rule: "BtFun",
                    msg: format!("parameter `{}` annotated {b} but typed {}", p.name, dom.erase()),
                });
            }
        }
        ctx.push(p.name.clone(), (*dom).clone());
        params.push((p.name.clone(), *dom));
        rest = *cod;
    }
    if def.is_rec {
        let binders: Vec<String> = def.params.iter().map(|_| session.fresh.name("s")).collect();
        let plain = rename_chain(ty, &binders)?;
        let (k, m) = measured_argument(def, &params, &binders, cfg.measure)?;
        ctx.push(def.name.clone(), strengthen_at(&plain, k, &m));
        session.selfrefs.push(SelfRef { name: def.name.clone(), measured: k, plain });
    }

    let reserved: BTreeSet<String> = ctx.names().map(str::to_string).collect();
    let body = uniquify(&normalize_mnf(&def.body), &reserved);
    let env: BTreeMap<String, BasicType> = ctx.bindings().iter().map(|(x, t)| (x.clone(), t.erase())).collect();
    let info = basic_info(&env, &body)?;
    let got = info.result.clone().expect("inferred");
    if !got.compatible(&rest.erase()) {
        return Err(Error::BasicType { rule: "BtFun", msg: format!("body has type {got}, expected {}", rest.erase()) });
    }
    session.bt = env.into_iter().chain(info.binders).collect();
    session.check(&ctx, &body, &rest)
}

/// Checks one definition against `ty` with earlier definitions in `globals`.
pub fn check_definition(
    solver: &Solver,
    def: &Definition,
    ty: &RefinementType,
    globals: &TypeContext,
    cfg: &CheckConfig,
) -> DefinitionReport {
    let start = Instant::now();
    let mut session = Session::new(solver, &def.name, cfg.simplify);
    let r = check_definition_in(&mut session, def, ty, globals, cfg);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (verdict, error, failing_query) = match &r {
        Ok(()) => (Outcome::Accepted, None, None),
        Err(e) => {
            let q = match e {
                Error::SubtypeFailure { query_id, .. } => *query_id,
                _ => None,
            };
            (outcome_of(e), Some(e.to_string()), q)
        }
    };
    DefinitionReport {
        name: def.name.clone(),
        verdict,
        error,
        failing_query,
        queries: session.queries.len(),
        wall_ms,
        trace: session.trace,
    }
}

/// Checks every definition of `program`. Signatures from `annotations`
/// take precedence over those in the program.
pub fn check_parsed(solver: &Solver, program: &Program, annotations: &[(String, RefinementType)], cfg: &CheckConfig) -> Result<ProgramReport> {
    let mut sigs: BTreeMap<String, RefinementType> = program.signatures.iter().cloned().collect();
    sigs.extend(annotations.iter().cloned());
    let defined: BTreeSet<&str> = program.definitions.iter().map(|d| d.name.as_str()).collect();

    // Signatures without a definition are assumed.
    let mut globals = TypeContext::new();
    for (x, t) in program.signatures.iter().chain(annotations) {
        if !defined.contains(x.as_str()) && !globals.contains(x) {
            globals.push(x.clone(), t.clone());
        }
    }
    let mut jobs = Vec::new();
    for def in &program.definitions {
        let ty = declared_type(def, &sigs);
        jobs.push((def, ty, globals.clone()));
        if let Ok(t) = &jobs.last().expect("pushed").1 {
            globals.push(def.name.clone(), t.clone());
        }
    }

    let run = |(def, ty, g): &(&Definition, Result<RefinementType>, TypeContext)| match ty {
        Ok(t) => check_definition(solver, def, t, g, cfg),
        Err(e) => DefinitionReport {
            name: def.name.clone(),
            verdict: outcome_of(e),
            error: Some(e.to_string()),
            failing_query: None,
            queries: 0,
            wall_ms: 0.0,
            trace: vec![],
        },
    };
    let definitions = if cfg.jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(run).collect())
    } else {
        jobs.iter().map(run).collect()
    };
    Ok(ProgramReport { definitions })
}

/// Parses and checks a program; `annotations` is an optional file of `val`
/// signatures.
pub fn check_program(solver: &Solver, program: &str, annotations: Option<&str>, cfg: &CheckConfig) -> Result<ProgramReport> {
    let program = parse_program(program)?;
    let annotations = match annotations {
        Some(src) => parse_program(src)?.signatures,
        None => vec![],
    };
    check_parsed(solver, &program, &annotations, cfg)
}

/// The definition as a closed term: nested lambdas, under a fixpoint when
/// recursive. Parameter types come from `ty`.
pub fn definition_term(def: &Definition, ty: &RefinementType) -> Result<Term> {
    let mut doms = Vec::new();
    let mut cur = ty;
    for p in &def.params {
        let RefinementType::Arrow { dom, cod, .. } = cur else {
            return Err(Error::ShapeViolation(format!("`{}` has more parameters than its type", def.name)));
        };
        doms.push((p.name.clone(), dom.erase()));
        cur = cod;
    }
    let mut body = def.body.clone();
    let skip = usize::from(def.is_rec);
    for (p, t) in doms.iter().skip(skip).rev() {
        body = Term::Lam { param: p.clone(), param_ty: t.clone(), body: Box::new(body) };
    }
    if def.is_rec {
        let (p, t) = doms
            .first()
            .cloned()
            .ok_or_else(|| Error::Unsupported(format!("recursive `{}` without parameters", def.name)))?;
        body = Term::Fix { fname: def.name.clone(), fty: ty.erase(), param: p, param_ty: t, body: Box::new(body) };
    }
    Ok(body)
}
