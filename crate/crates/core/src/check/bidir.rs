//! Synthesis and checking judgments over MNF terms.
//!
//! Every non-function term is checked by synthesizing under the current
//! context and then subtyping (`ChkSub`); let-bound and ghost bindings are
//! folded back into the synthesized type with `Ex`, so the final subtyping
//! query is made against the caller's context only.

use std::collections::{BTreeMap, HashMap};

use super::{Measure, TraceStep};
use crate::algebra::{disj_all, ex_context_with};
use crate::error::{Error, Result};
use crate::prim::{const_qual, ty_of_const, ty_of_op};
use crate::smt::{err_free_goal, subtype_goal, Solver, Verdict};
use crate::syntax::fresh::global_fresh;
use crate::syntax::pretty::print_term;
use crate::syntax::{
    BaseType, BasicType, CmpOp, Constant, Ctor, Expr, Fresh, Op, Prop, RefinementType, Term, TypeContext,
};

/// A recursive function whose calls must decrease at `measured`.
#[derive(Clone, Debug)]
pub(crate) struct SelfRef {
    pub name: String,
    pub measured: usize,
    /// Same binders as the measured type, without the measure.
    pub plain: RefinementType,
}

/// Partial application of a recursive function to `applied` arguments.
#[derive(Clone, Debug)]
struct Partial {
    func: String,
    applied: usize,
    plain: RefinementType,
}

pub(crate) struct Session<'a> {
    pub solver: &'a Solver,
    pub simplify: bool,
    pub def: String,
    pub fresh: Fresh,
    /// Basic types of every variable the body can mention.
    pub bt: BTreeMap<String, BasicType>,
    pub trace: Vec<TraceStep>,
    pub queries: Vec<usize>,
    pub selfrefs: Vec<SelfRef>,
    partials: HashMap<String, Partial>,
    depth: usize,
}

fn subject(e: &Term) -> String {
    let s = print_term(e).split_whitespace().collect::<Vec<_>>().join(" ");
    if s.chars().count() > 72 {
        format!("{}…", s.chars().take(71).collect::<String>())
    } else {
        s
    }
}

/// Typing errors reject a definition; everything else is an operational
/// failure that must not be papered over.
pub fn is_typing_error(e: &Error) -> bool {
    matches!(
        e,
        Error::SubtypeFailure { .. }
            | Error::TerminationViolation { .. }
            | Error::ContextInfeasible(_)
            | Error::NoRuleApplies(_)
            | Error::ShapeViolation(_)
            | Error::ShapeMismatch(_)
            | Error::IncomparableKinds(_)
            | Error::NonEPRContext(_)
    )
}

impl<'a> Session<'a> {
    pub fn new(solver: &'a Solver, def: &str, simplify: bool) -> Self {
        Session {
            solver,
            simplify,
            def: def.to_string(),
            fresh: Fresh::new(),
            bt: BTreeMap::new(),
            trace: Vec::new(),
            queries: Vec::new(),
            selfrefs: Vec::new(),
            partials: HashMap::new(),
            depth: 0,
        }
    }

    fn step(&mut self, rule: &'static str, e: &Term, conclusion: String) {
        self.trace.push(TraceStep { depth: self.depth, rule: rule.to_string(), subject: subject(e), conclusion });
    }

    fn ex(&self, ctx: &TypeContext, t: &RefinementType) -> Result<RefinementType> {
        ex_context_with(ctx, t, self.simplify)
    }

    fn query(&mut self, goal: &Prop, what: &str) -> Result<(Verdict, usize)> {
        let origin = format!("{}-{what}", self.def);
        let (v, id) = self.solver.check_valid(goal, &origin)?;
        self.queries.push(id);
        Ok((v, id))
    }

    /// `Some(true)` when the binding is provably empty under `ctx`.
    fn infeasible(&mut self, ctx: &TypeContext, binding: &RefinementType, what: &str) -> Result<Option<bool>> {
        let goal = err_free_goal(ctx, binding)?;
        Ok(match self.query(&goal, what)?.0 {
            Verdict::Valid => Some(true),
            Verdict::Invalid => Some(false),
            Verdict::Unknown | Verdict::Timeout => None,
        })
    }

    fn var_bt(&self, ctx: &TypeContext, x: &str) -> Option<BasicType> {
        ctx.lookup(x).map(RefinementType::erase).or_else(|| self.bt.get(x).cloned())
    }

    fn value_base(&self, ctx: &TypeContext, v: &Term) -> Option<BaseType> {
        match v {
            Term::Var(x) => self.var_bt(ctx, x).and_then(|t| t.as_base().cloned()),
            Term::Const(Constant::Unit) => Some(BaseType::Unit),
            Term::Const(Constant::Bool(_)) => Some(BaseType::Bool),
            Term::Const(Constant::Int(_)) => Some(BaseType::Int),
            _ => None,
        }
    }

    /// The value as a qualifier expression. Data constants have no term
    /// syntax in qualifiers and are bound to a fresh name instead.
    fn value_expr(&mut self, v: &Term, b: &BaseType) -> Result<(Expr, Option<(String, RefinementType)>)> {
        Ok(match v {
            Term::Var(x) => (Expr::var(x.clone()), None),
            Term::Const(Constant::Unit) => (Expr::Unit, None),
            Term::Const(Constant::Bool(p)) => (Expr::Bool(*p), None),
            Term::Const(Constant::Int(n)) => (Expr::Int(*n), None),
            Term::Const(c) => {
                let name = self.fresh.name("cst");
                let ty = RefinementType::under(b.clone(), const_qual(c, &Expr::nu(), b).simplify());
                (Expr::var(name.clone()), Some((name, ty)))
            }
            other => return Err(Error::NoRuleApplies(format!("`{}` is not a value", subject(other)))),
        })
    }

    pub fn synth(&mut self, ctx: &TypeContext, e: &Term, want: &BasicType) -> Result<RefinementType> {
        self.depth += 1;
        let r = self.synth_inner(ctx, e, want);
        self.depth -= 1;
        r
    }

    fn synth_inner(&mut self, ctx: &TypeContext, e: &Term, want: &BasicType) -> Result<RefinementType> {
        let want_base = || {
            want.as_base().cloned().ok_or_else(|| Error::NoRuleApplies(format!("`{}` at function type {want}", subject(e))))
        };
        let (rule, ty) = match e {
            Term::Const(c) => ("SynConst", ty_of_const(c, &want_base()?)),
            Term::Op(op) => ("SynOp", ty_of_op(*op, op_inst(*op, want))),
            Term::Var(x) => match ctx.lookup(x) {
                None => return Err(Error::NotClosed(x.clone())),
                Some(t @ RefinementType::Arrow { .. }) => ("SynVarFun", t.clone()),
                Some(t) => {
                    let b = t.base().expect("base binding").clone();
                    ("SynVarBase", RefinementType::under(b, Prop::nu_eq(Expr::var(x.clone()))))
                }
            },
            Term::Err => ("SynErr", RefinementType::under(want_base()?, Prop::Bot)),
            Term::Lam { .. } | Term::Fix { .. } => {
                return Err(Error::NoRuleApplies(format!("functions are only checked, never synthesized: `{}`", subject(e))))
            }
            Term::Let { x, bound, body } => {
                let bx = self.bt.get(x).cloned().unwrap_or_else(|| want.clone());
                let tx = self.synth(ctx, bound, &bx)?;
                let local = TypeContext::from_bindings(vec![(x.clone(), tx)]);
                ("SynLetE", self.let_body(ctx, &local, body, want)?)
            }
            Term::LetOp { x, op, args, body } => {
                let local = self.op_app(ctx, x, *op, args)?;
                ("SynAppOp", self.let_body(ctx, &local, body, want)?)
            }
            Term::LetApp { x, func, arg, body } => {
                let (rule, local) = self.app(ctx, x, func, arg)?;
                (rule, self.let_body(ctx, &local, body, want)?)
            }
            Term::Match { scrut, branches } => ("SynMatch", self.synth_match(ctx, scrut, branches, want)?),
            Term::App(..) | Term::OpApp(..) => {
                return Err(Error::NoRuleApplies(format!("term is not in monadic normal form: `{}`", subject(e))))
            }
        };
        self.step(rule, e, format!("⇒ {ty}"));
        Ok(ty)
    }

    fn let_body(
        &mut self,
        ctx: &TypeContext,
        local: &TypeContext,
        body: &Term,
        want: &BasicType,
    ) -> Result<RefinementType> {
        let mut inner = ctx.clone();
        for (y, t) in local.bindings() {
            inner.push(y.clone(), t.clone());
        }
        let t = self.synth(&inner, body, want)?;
        self.ex(local, &t)
    }

    /// Ghost bindings `a_i:[b_i | ν = v_i ∧ φ_i]` for the operands followed
    /// by the result binding.
    fn op_app(&mut self, ctx: &TypeContext, x: &str, op: Op, args: &[Term]) -> Result<TypeContext> {
        let inst = match op {
            Op::Prim(_) => args.iter().find_map(|a| self.value_base(ctx, a)),
            Op::Ctor(_) => self.bt.get(x).and_then(|t| t.as_base()).and_then(|b| b.elem()).cloned(),
        };
        let mut ty = ty_of_op(op, inst.as_ref());
        let mut local = TypeContext::new();
        for a in args {
            let RefinementType::Arrow { binder, dom, cod } = ty else {
                return Err(Error::ShapeViolation(format!("`{}` applied to too many arguments", op.name())));
            };
            let RefinementType::Over { base, qual } = *dom else {
                return Err(Error::ShapeViolation(format!("operator `{}` has a non-base parameter", op.name())));
            };
            let (v, pre) = self.value_expr(a, &base)?;
            local.extend(pre);
            let g = self.fresh.name("ga");
            let ghost = RefinementType::under(base, Prop::and2(Prop::nu_eq(v), qual).simplify());
            local.push(g.clone(), ghost);
            ty = cod.rename(&binder, &g);
        }
        if ty.is_arrow() {
            return Err(Error::ShapeViolation(format!("operator `{}` is partially applied", op.name())));
        }
        local.push(x.to_string(), ty);
        Ok(local)
    }

    fn app(&mut self, ctx: &TypeContext, x: &str, func: &Term, arg: &Term) -> Result<(&'static str, TypeContext)> {
        let fbt = match func {
            Term::Var(f) => self.var_bt(ctx, f),
            _ => None,
        }
        .unwrap_or_else(|| BasicType::arrow(BasicType::Base(BaseType::Int), BasicType::Base(BaseType::Int)));
        let tf = self.synth(ctx, func, &fbt)?;
        let RefinementType::Arrow { binder, dom, cod } = tf else {
            return Err(Error::ShapeViolation(format!("`{}` applied but has type {tf}", subject(func))));
        };
        let caller = match func {
            Term::Var(f) => self.call_position(f),
            _ => None,
        };
        let mut local = TypeContext::new();
        let rule = match *dom {
            RefinementType::Over { base, qual } => {
                let (v, pre) = self.value_expr(arg, &base)?;
                local.extend(pre);
                let g = self.fresh.name("ga");
                let ghost = RefinementType::under(base.clone(), Prop::and2(Prop::nu_eq(v.clone()), qual).simplify());
                if let Some((sref, idx, plain)) = &caller {
                    if *idx == sref.measured {
                        self.termination(ctx, &local, &ghost, plain, &v, &base, &sref.name)?;
                    }
                }
                local.push(g.clone(), ghost);
                let tx = cod.rename(&binder, &g);
                if let Some((sref, idx, plain)) = caller {
                    if tx.is_arrow() {
                        let plain = match plain {
                            RefinementType::Arrow { binder, cod, .. } => cod.rename(&binder, &g),
                            p => p,
                        };
                        self.partials.insert(x.to_string(), Partial { func: sref.name, applied: idx + 1, plain });
                    }
                }
                local.push(x.to_string(), tx);
                "SynAppBase"
            }
            dom @ RefinementType::Arrow { .. } => {
                self.check(ctx, arg, &dom)?;
                if cod.mentions(&binder) {
                    return Err(Error::ShapeViolation(format!("result type mentions function parameter `{binder}`")));
                }
                local.push(x.to_string(), *cod);
                "SynAppFun"
            }
            RefinementType::Under { .. } => {
                return Err(Error::ShapeViolation(format!("`{}` has a coverage-typed parameter", subject(func))))
            }
        };
        Ok((rule, local))
    }

    /// The recursive function reached through `f`, the index of the argument
    /// about to be supplied, and the unmeasured type at that point.
    fn call_position(&self, f: &str) -> Option<(SelfRef, usize, RefinementType)> {
        if let Some(s) = self.selfrefs.iter().rev().find(|s| s.name == f) {
            return Some((s.clone(), 0, s.plain.clone()));
        }
        let p = self.partials.get(f)?;
        let s = self.selfrefs.iter().rev().find(|s| s.name == p.func)?;
        Some((s.clone(), p.applied, p.plain.clone()))
    }

    /// A recursive call whose argument can never satisfy the measure, while
    /// the call itself is reachable, cannot terminate.
    #[allow(clippy::too_many_arguments)]
    fn termination(
        &mut self,
        ctx: &TypeContext,
        local: &TypeContext,
        measured: &RefinementType,
        plain: &RefinementType,
        v: &Expr,
        base: &BaseType,
        func: &str,
    ) -> Result<()> {
        let mut c = ctx.clone();
        for (y, t) in local.bindings() {
            c.push(y.clone(), t.clone());
        }
        if self.infeasible(&c, measured, "measure")? != Some(true) {
            return Ok(());
        }
        let RefinementType::Arrow { dom, .. } = plain else { return Ok(()) };
        let qual = dom.qual().cloned().unwrap_or(Prop::Top);
        let unmeasured = RefinementType::under(base.clone(), Prop::and2(Prop::nu_eq(v.clone()), qual).simplify());
        if self.infeasible(&c, &unmeasured, "reach")? == Some(false) {
            return Err(Error::TerminationViolation {
                func: func.to_string(),
                detail: format!("argument {v} never satisfies the decreasing measure"),
            });
        }
        Ok(())
    }

    fn synth_match(
        &mut self,
        ctx: &TypeContext,
        scrut: &Term,
        branches: &[crate::syntax::Branch],
        want: &BasicType,
    ) -> Result<RefinementType> {
        let sb = self
            .value_base(ctx, scrut)
            .or_else(|| branches.first().map(|b| ctor_base(b.ctor)))
            .ok_or_else(|| Error::NoRuleApplies("match without branches".into()))?;
        let want_base = want
            .as_base()
            .cloned()
            .ok_or_else(|| Error::NoRuleApplies(format!("match at function type {want}")))?;
        let (v, pre) = self.value_expr(scrut, &sb)?;
        let mut tys = Vec::new();
        for br in branches {
            let mut local = TypeContext::new();
            local.extend(pre.clone());
            let mut ty = ty_of_op(Op::Ctor(br.ctor), sb.elem());
            for y in &br.vars {
                let RefinementType::Arrow { binder, dom, cod } = ty else {
                    return Err(Error::ShapeViolation(format!("pattern {} has too many variables", br.ctor.name())));
                };
                let (b, q) = (dom.base().expect("base").clone(), dom.qual().cloned().unwrap_or(Prop::Top));
                local.push(y.clone(), RefinementType::under(b, q));
                ty = cod.rename(&binder, y);
            }
            let psi = ty.qual().cloned().unwrap_or(Prop::Top);
            let g = self.fresh.name("gm");
            let ghost = RefinementType::under(sb.clone(), Prop::and2(Prop::nu_eq(v.clone()), psi).simplify());
            let mut inner = ctx.clone();
            for (y, t) in local.bindings() {
                inner.push(y.clone(), t.clone());
            }
            local.push(g.clone(), ghost.clone());
            let mut body_ctx = inner.clone();
            body_ctx.push(g, ghost.clone());
            let t = match self.synth(&body_ctx, &br.body, want) {
                Ok(t) => t,
                Err(e) if is_typing_error(&e) => {
                    // An unreachable branch contributes nothing.
                    if self.infeasible(&inner, &ghost, "branch")? == Some(true) {
                        RefinementType::under(want_base.clone(), Prop::Bot)
                    } else {
                        return Err(e);
                    }
                }
                Err(e) => return Err(e),
            };
            tys.push(self.ex(&local, &t)?);
        }
        disj_all(&tys, self.simplify)
    }

    pub fn check(&mut self, ctx: &TypeContext, e: &Term, ty: &RefinementType) -> Result<()> {
        self.depth += 1;
        let r = self.check_inner(ctx, e, ty);
        self.depth -= 1;
        r
    }

    fn check_inner(&mut self, ctx: &TypeContext, e: &Term, ty: &RefinementType) -> Result<()> {
        match (e, ty) {
            (Term::Lam { param, body, .. }, RefinementType::Arrow { binder, dom, cod }) => {
                self.step("ChkFun", e, format!("⇐ {ty}"));
                let cod = cod.rename(binder, param);
                self.check(&ctx.extended(param.clone(), (**dom).clone()), body, &cod)
            }
            (Term::Fix { fname, param, body, .. }, RefinementType::Arrow { binder, dom, cod }) => {
                self.step("ChkFix", e, format!("⇐ {ty}"));
                let base = dom.base().cloned().ok_or_else(|| {
                    Error::ShapeViolation(format!("recursive function `{fname}` must take a base-typed argument first"))
                })?;
                let cod = cod.rename(binder, param);
                let mut inner = ctx.extended(param.clone(), (**dom).clone());
                let s = self.fresh.name("s");
                let plain = ty.rename_binder(&s);
                let m = default_measure(Measure::for_base(&base), param);
                let measured = plain.strengthen_domain(&m);
                inner.push(fname.clone(), measured);
                self.selfrefs.push(SelfRef { name: fname.clone(), measured: 0, plain });
                let r = self.check(&inner, body, &cod);
                self.selfrefs.pop();
                r
            }
            (Term::Lam { .. } | Term::Fix { .. }, _) => {
                Err(Error::ShapeViolation(format!("function checked against base type {ty}")))
            }
            _ => {
                let rule = if matches!(e, Term::Match { .. }) { "ChkMatch" } else { "ChkSub" };
                let t = self.synth(ctx, e, &ty.erase())?;
                self.subtype(ctx, &t, ty, rule)?;
                self.step(rule, e, format!("⇐ {ty}"));
                Ok(())
            }
        }
    }

    pub fn subtype(&mut self, ctx: &TypeContext, t1: &RefinementType, t2: &RefinementType, rule: &str) -> Result<()> {
        use RefinementType::*;
        match (t1, t2) {
            (Under { .. }, Under { .. }) | (Over { .. }, Over { .. }) => {
                let goal = subtype_goal(ctx, t1, t2)?;
                let (verdict, id) = self.query(&goal, rule)?;
                if verdict == Verdict::Valid {
                    Ok(())
                } else {
                    Err(Error::SubtypeFailure {
                        query_id: Some(id),
                        goal: format!("{} ⊢ {t1} <: {t2}", ctx_summary(ctx)),
                        verdict,
                    })
                }
            }
            (Arrow { binder: b1, dom: d1, cod: c1 }, Arrow { binder: b2, dom: d2, cod: c2 }) => {
                self.subtype(ctx, d2, d1, rule)?;
                let c1 = c1.rename(b1, b2);
                self.subtype(&ctx.extended(b2.clone(), (**d2).clone()), &c1, c2, rule)
            }
            (Arrow { .. }, _) | (_, Arrow { .. }) => Err(Error::ShapeMismatch(format!("{t1} vs {t2}"))),
            _ => Err(Error::IncomparableKinds(format!("{t1} vs {t2}"))),
        }
    }
}

fn ctx_summary(ctx: &TypeContext) -> String {
    if ctx.is_empty() {
        "∅".into()
    } else {
        ctx.bindings().iter().map(|(x, t)| format!("{x}:{t}")).collect::<Vec<_>>().join(", ")
    }
}

fn ctor_base(c: Ctor) -> BaseType {
    match c {
        Ctor::True | Ctor::False => BaseType::Bool,
        Ctor::Zero | Ctor::Succ => BaseType::Nat,
        Ctor::Nil | Ctor::Cons => BaseType::list(BaseType::Int),
        Ctor::Leaf | Ctor::Node => BaseType::tree(BaseType::Int),
    }
}

fn op_inst(op: Op, want: &BasicType) -> Option<&BaseType> {
    match (op, want) {
        (Op::Ctor(_), _) => {
            let mut t = want;
            while let BasicType::Arrow(_, r) = t {
                t = r;
            }
            t.as_base().and_then(BaseType::elem)
        }
        (Op::Prim(_), BasicType::Arrow(a, _)) => a.as_base(),
        _ => None,
    }
}

impl Measure {
    pub fn for_base(b: &BaseType) -> Measure {
        match b {
            BaseType::Nat => Measure::Nat,
            BaseType::List(_) | BaseType::Tree(_) => Measure::Len,
            _ => Measure::Int,
        }
    }
}

/// `ν ≺ x` for the given measure.
pub(crate) fn default_measure(m: Measure, x: &str) -> Prop {
    let (nu, x) = (Expr::nu(), Expr::var(x));
    match m {
        Measure::Nat => Prop::cmp(CmpOp::Lt, nu, x),
        Measure::Int => Prop::and2(Prop::cmp(CmpOp::Le, Expr::Int(0), nu.clone()), Prop::cmp(CmpOp::Lt, nu, x)),
        Measure::Len => {
            let (n, k) = (global_fresh("n"), global_fresh("m"));
            Prop::exists(
                n.clone(),
                BaseType::Int,
                Prop::exists(
                    k.clone(),
                    BaseType::Int,
                    Prop::And(vec![
                        Prop::pred("len", vec![nu, Expr::var(n.clone())]),
                        Prop::pred("len", vec![x, Expr::var(k.clone())]),
                        Prop::cmp(CmpOp::Lt, Expr::var(n), Expr::var(k)),
                    ]),
                ),
            )
        }
    }
}

/// `0 ≤ M' ∧ M' < M` where `M'` is the measure at the recursive call.
pub(crate) fn explicit_measure(m: &Expr, at_call: &Expr) -> Prop {
    Prop::and2(Prop::cmp(CmpOp::Le, Expr::Int(0), at_call.clone()), Prop::cmp(CmpOp::Lt, at_call.clone(), m.clone()))
}

impl RefinementType {
    /// Renames the outermost binder to `to`.
    fn rename_binder(&self, to: &str) -> RefinementType {
        match self {
            RefinementType::Arrow { binder, dom, cod } => {
                RefinementType::arrow(to, (**dom).clone(), cod.rename(binder, to))
            }
            t => t.clone(),
        }
    }

    /// Conjoins `m` onto the outermost domain.
    fn strengthen_domain(&self, m: &Prop) -> RefinementType {
        match self {
            RefinementType::Arrow { binder, dom, cod } => {
                RefinementType::arrow(binder.clone(), dom.conjoin(m), (**cod).clone())
            }
            t => t.clone(),
        }
    }

    pub(crate) fn conjoin(&self, m: &Prop) -> RefinementType {
        match self {
            RefinementType::Over { base, qual } => RefinementType::over(base.clone(), Prop::and2(qual.clone(), m.clone())),
            RefinementType::Under { base, qual } => {
                RefinementType::under(base.clone(), Prop::and2(qual.clone(), m.clone()))
            }
            t => t.clone(),
        }
    }
}

trait Extend {
    fn extend(&mut self, b: Option<(String, RefinementType)>);
}

impl Extend for TypeContext {
    fn extend(&mut self, b: Option<(String, RefinementType)>) {
        if let Some((x, t)) = b {
            self.push(x, t);
        }
    }
}
