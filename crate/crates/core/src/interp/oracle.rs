use std::collections::BTreeSet;

use super::domain::{enumerate_domain, eval_prop, Env};
use super::{eval_bounded, DomainBounds};
use crate::error::{Error, Result};
use crate::prim::PredicateRegistry;
use crate::syntax::{BaseType, Constant, Ctor, Op, Prim, Prop, RefinementType, Term, TypeContext, NU};

/// A closed term reaching exactly `values` (or `err` when empty), built
/// from nested `bool_gen` choices.
pub fn choice_term(values: &[Constant]) -> Term {
    choice_of(values.iter().map(|v| Term::Const(v.clone())).collect())
}

fn choice_of(mut alts: Vec<Term>) -> Term {
    match alts.len() {
        0 => Term::Err,
        1 => alts.pop().unwrap(),
        _ => {
            let rest = alts.split_off(1);
            let first = alts.pop().unwrap();
            Term::let_op(
                "$c",
                Op::Prim(Prim::BoolGen),
                vec![Term::unit()],
                Term::Match {
                    scrut: Box::new(Term::var("$c")),
                    branches: vec![
                        crate::syntax::Branch { ctor: Ctor::True, vars: vec![], body: first },
                        crate::syntax::Branch { ctor: Ctor::False, vars: vec![], body: choice_of(rest) },
                    ],
                },
            )
        }
    }
}

fn satisfying(reg: &PredicateRegistry, base: &BaseType, qual: &Prop, env: &Env, b: &DomainBounds) -> Result<Vec<Constant>> {
    let mut out = Vec::new();
    let mut env2 = env.clone();
    for v in enumerate_domain(base, b)? {
        env2.insert(NU.to_string(), v.clone());
        if eval_prop(reg, qual, &env2, b)? {
            out.push(v);
        }
    }
    Ok(out)
}

fn apply_to(e: &Term, v: &Constant) -> Term {
    Term::let_(
        "$f",
        e.clone(),
        Term::let_app("$z", Term::var("$f"), Term::Const(v.clone()), Term::var("$z")),
    )
}

/// Membership in the denotation of a type whose free variables are given
/// values by `env`.
fn closed_member(
    reg: &PredicateRegistry,
    e: &Term,
    ty: &RefinementType,
    env: &Env,
    b: &DomainBounds,
) -> Result<bool> {
    match ty {
        RefinementType::Under { base, qual } => {
            let must = satisfying(reg, base, qual, env, b)?;
            if must.is_empty() {
                return Ok(true);
            }
            let vs = eval_bounded(e, b)?;
            Ok(must.iter().all(|v| vs.values.contains(v)))
        }
        RefinementType::Over { base: _, qual } => {
            let vs = eval_bounded(e, b)?;
            if vs.err_reachable || vs.diverged || vs.functions > 0 {
                return Ok(false);
            }
            let mut env2 = env.clone();
            for v in &vs.values {
                env2.insert(NU.to_string(), v.clone());
                if !eval_prop(reg, qual, &env2, b)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        RefinementType::Arrow { binder, dom, cod } => match &**dom {
            RefinementType::Over { base, qual } => {
                let mut env2 = env.clone();
                for v in satisfying(reg, base, qual, env, b)? {
                    env2.insert(binder.clone(), v.clone());
                    if !closed_member(reg, &apply_to(e, &v), cod, &env2, b)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            d => Err(Error::Unsupported(format!("oracle membership for functions with domain {d}"))),
        },
    }
}

/// Candidate terms for a coverage-typed context binding: every bounded
/// literal, the generators of that base type, `err`, the exact choice over
/// the satisfying values, and choices adding one extra value or `err`.
fn witnesses(base: &BaseType, must: &[Constant], b: &DomainBounds) -> Result<Vec<Term>> {
    let dom = enumerate_domain(base, b)?;
    let mut out: Vec<Term> = Vec::new();
    let push = |t: Term, out: &mut Vec<Term>| {
        if !out.contains(&t) {
            out.push(t);
        }
    };
    match must.len() {
        0 => dom.iter().for_each(|v| push(Term::Const(v.clone()), &mut out)),
        1 => push(Term::Const(must[0].clone()), &mut out),
        _ => {}
    }
    let gens: &[Prim] = match base {
        BaseType::Nat => &[Prim::NatGen],
        BaseType::Int => &[Prim::NatGen, Prim::IntGen],
        BaseType::Bool => &[Prim::BoolGen],
        _ => &[],
    };
    for g in gens {
        push(Term::let_op("$g", Op::Prim(*g), vec![Term::unit()], Term::var("$g")), &mut out);
    }
    push(Term::Err, &mut out);
    push(choice_term(must), &mut out);
    if !must.is_empty() {
        let mut alts: Vec<Term> = must.iter().map(|v| Term::Const(v.clone())).collect();
        alts.push(Term::Err);
        push(choice_of(alts), &mut out);
    }
    if dom.len() <= 16 {
        for v in dom.iter().filter(|v| !must.contains(v)) {
            let mut vals = must.to_vec();
            vals.push(v.clone());
            push(choice_term(&vals), &mut out);
        }
    }
    Ok(out)
}

fn ctx_member(
    reg: &PredicateRegistry,
    e: &Term,
    ty: &RefinementType,
    ctx: &[(String, RefinementType)],
    env: &Env,
    b: &DomainBounds,
) -> Result<bool> {
    let Some(((x, tx), rest)) = ctx.split_first() else {
        return closed_member(reg, e, ty, env, b);
    };
    match tx {
        RefinementType::Over { base, qual } => {
            let mut env2 = env.clone();
            for v in satisfying(reg, base, qual, env, b)? {
                env2.insert(x.clone(), v.clone());
                let t = Term::let_(x.clone(), Term::Const(v), e.clone());
                if !ctx_member(reg, &t, ty, rest, &env2, b)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        RefinementType::Under { base, qual } => {
            let must = satisfying(reg, base, qual, env, b)?;
            let mut members = Vec::new();
            for w in witnesses(base, &must, b)? {
                if closed_member(reg, &w, tx, env, b)? {
                    members.push(w);
                }
            }
            let lets: Vec<Term> = members.iter().map(|ex| Term::let_(x.clone(), ex.clone(), e.clone())).collect();
            'hat: for hat in &members {
                let vals = eval_bounded(hat, b)?.values;
                let mut env2 = env.clone();
                for t in &lets {
                    for v in &vals {
                        env2.insert(x.clone(), v.clone());
                        if !ctx_member(reg, t, ty, rest, &env2, b)? {
                            continue 'hat;
                        }
                    }
                }
                return Ok(true);
            }
            Ok(false)
        }
        RefinementType::Arrow { .. } => {
            Err(Error::Unsupported(format!("oracle contexts with function binding `{x}`")))
        }
    }
}

fn type_literals(ty: &RefinementType, out: &mut BTreeSet<i64>) {
    match ty {
        RefinementType::Under { qual, .. } | RefinementType::Over { qual, .. } => out.extend(qual.int_literals()),
        RefinementType::Arrow { dom, cod, .. } => {
            type_literals(dom, out);
            type_literals(cod, out);
        }
    }
}

/// Decides `e ∈ ⟦τ⟧_Γ` by enumeration over the bounded domains.
///
/// Refutations are conclusive for the bounded semantics; confirmations hold
/// relative to the finite witness set used for coverage-typed bindings.
pub fn denotation_member(
    reg: &PredicateRegistry,
    e: &Term,
    ty: &RefinementType,
    ctx: &TypeContext,
    b: &DomainBounds,
) -> Result<bool> {
    let mut lits = BTreeSet::new();
    type_literals(ty, &mut lits);
    for (_, t) in ctx.bindings() {
        type_literals(t, &mut lits);
    }
    let reach = b.int_abs_max.max(b.nat_max);
    if let Some(n) = lits.iter().find(|n| n.abs() > reach) {
        return Err(Error::BoundsTooSmall(format!("literal {n} lies outside the enumerated domain ({b})")));
    }
    ctx_member(reg, e, ty, ctx.bindings(), &Env::new(), b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub name: String,
    pub holds: bool,
}

/// Evaluates every axiom instance at integer elements against the concrete
/// predicate meanings. Integer quantifiers must be able to reach every list
/// length and tree depth in the domain, so `int_abs_max` should be at least
/// `list_len_max` and `tree_depth_max`.
pub fn check_axioms(reg: &PredicateRegistry, b: &DomainBounds) -> Result<Vec<AxiomReport>> {
    let sorts: BTreeSet<BaseType> =
        [BaseType::Int, BaseType::list(BaseType::Int), BaseType::tree(BaseType::Int)].into_iter().collect();
    let preds: BTreeSet<String> = reg.predicates().iter().map(|p| p.name.clone()).collect();
    let mut out = Vec::new();
    for inst in reg.axiom_instances(&sorts, &preds) {
        let holds = eval_prop(reg, &inst.formula, &Env::new(), b)?;
        out.push(AxiomReport { name: inst.name, holds });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_context, parse_term, parse_type};

    fn member(e: &str, ty: &str, ctx: &str) -> bool {
        let reg = PredicateRegistry::builtin();
        let ctx = if ctx.is_empty() { TypeContext::new() } else { parse_context(ctx).unwrap() };
        denotation_member(&reg, &parse_term(e).unwrap(), &parse_type(ty).unwrap(), &ctx, &DomainBounds::default())
            .unwrap()
    }

    #[test]
    fn choice_terms_reach_exactly() {
        let vals = vec![Constant::Int(1), Constant::Int(3), Constant::Int(4)];
        let v = eval_bounded(&choice_term(&vals), &DomainBounds::default()).unwrap();
        assert_eq!(v.values.into_iter().collect::<Vec<_>>(), vals);
        assert!(eval_bounded(&choice_term(&[]), &DomainBounds::default()).unwrap().err_reachable);
    }

    #[test]
    fn context_examples() {
        let ctx = "x:[v:nat | v = 1]";
        assert!(member("x + 1", "[v:nat | v = x + 1 || v = x + x]", ctx));
        assert!(!member("x", "[v:nat | v = x + 1 || v = x + x]", ctx));
    }

    #[test]
    fn functions_quantify_over_their_domain() {
        assert!(member("fun (n:nat) -> n + 1", "n:{v:nat | true} -> [v:nat | v = n + 1]", ""));
        assert!(!member("fun (n:nat) -> n", "n:{v:nat | true} -> [v:nat | v = n + 1]", ""));
    }

    #[test]
    fn out_of_range_literals_are_flagged() {
        let reg = PredicateRegistry::builtin();
        let r = denotation_member(
            &reg,
            &Term::int(9),
            &parse_type("[v:int | v = 9]").unwrap(),
            &TypeContext::new(),
            &DomainBounds::default(),
        );
        assert!(matches!(r, Err(Error::BoundsTooSmall(_))));
    }

    #[test]
    fn shipped_axioms_hold_on_small_domains() {
        let reg = PredicateRegistry::builtin();
        let b = DomainBounds { nat_max: 3, int_abs_max: 3, list_len_max: 3, tree_depth_max: 2, fuel: 1000 };
        let failing: Vec<String> =
            check_axioms(&reg, &b).unwrap().into_iter().filter(|r| !r.holds).map(|r| r.name).collect();
        assert!(failing.is_empty(), "{failing:?}");
    }
}
