//! Syntactic operations on refinement types: disjunction and conjunction
//! of branch types, embedding context bindings into a type, and
//! well-formedness.

use crate::error::{Error, Result};
use crate::smt::{err_free_goal, Solver, Verdict};
use crate::syntax::{BaseType, Expr, Prop, RefinementType, TypeContext, NU};

fn join(b1: &BaseType, b2: &BaseType) -> Result<BaseType> {
    b1.join(b2).ok_or_else(|| Error::ShapeMismatch(format!("base types {b1} and {b2} differ")))
}

fn tidy(p: Prop, simp: bool) -> Prop {
    if simp {
        p.simplify()
    } else {
        p
    }
}

/// Aligns the binder of `t2` with `x` (the left operand's binder).
fn align(x: &str, y: &str, t2: &RefinementType) -> RefinementType {
    if x == y {
        t2.clone()
    } else {
        t2.rename(y, x)
    }
}

fn merge(t1: &RefinementType, t2: &RefinementType, disjoin: bool, simp: bool) -> Result<RefinementType> {
    use RefinementType::*;
    match (t1, t2) {
        (Under { base: b1, qual: q1 }, Under { base: b2, qual: q2 }) => {
            let q = if disjoin { Prop::or2(q1.clone(), q2.clone()) } else { Prop::and2(q1.clone(), q2.clone()) };
            Ok(RefinementType::under(join(b1, b2)?, tidy(q, simp)))
        }
        (Over { base: b1, qual: q1 }, Over { base: b2, qual: q2 }) => {
            let q = if disjoin { Prop::and2(q1.clone(), q2.clone()) } else { Prop::or2(q1.clone(), q2.clone()) };
            Ok(RefinementType::over(join(b1, b2)?, tidy(q, simp)))
        }
        (Arrow { binder: x, dom: d1, cod: c1 }, Arrow { binder: y, dom: d2, cod: c2 }) => {
            let dom = merge(d1, d2, !disjoin, simp)?;
            let c2 = align(x, y, c2);
            let cod = merge(c1, &c2, disjoin, simp)?;
            Ok(RefinementType::arrow(x.clone(), dom, cod))
        }
        _ => Err(Error::ShapeMismatch(format!("cannot merge {t1} with {t2}"))),
    }
}

/// Type whose denotation is the intersection of both operands': coverage
/// qualifiers are disjoined, overapproximate ones conjoined.
pub fn disj(t1: &RefinementType, t2: &RefinementType) -> Result<RefinementType> {
    merge(t1, t2, true, true)
}

pub fn conj(t1: &RefinementType, t2: &RefinementType) -> Result<RefinementType> {
    merge(t1, t2, false, true)
}

pub fn disj_with(t1: &RefinementType, t2: &RefinementType, simp: bool) -> Result<RefinementType> {
    merge(t1, t2, true, simp)
}

pub fn conj_with(t1: &RefinementType, t2: &RefinementType, simp: bool) -> Result<RefinementType> {
    merge(t1, t2, false, simp)
}

/// Right fold of [`disj`] over a nonempty list.
pub fn disj_all(ts: &[RefinementType], simp: bool) -> Result<RefinementType> {
    let Some((last, init)) = ts.split_last() else {
        return Err(Error::ShapeViolation("disjunction of no types".into()));
    };
    init.iter().rev().try_fold(last.clone(), |acc, t| merge(t, &acc, true, simp))
}

fn embed(x: &str, bx: &BaseType, phix: &Prop, t: &RefinementType, exists: bool, simp: bool) -> RefinementType {
    let hyp = phix.subst(NU, &Expr::var(x));
    let ex = |body: &Prop| Prop::exists(x, bx.clone(), Prop::and2(hyp.clone(), body.clone()));
    let fa = |body: &Prop| Prop::forall(x, bx.clone(), Prop::implies(hyp.clone(), body.clone()));
    match t {
        RefinementType::Under { base, qual } => {
            let q = if exists { ex(qual) } else { fa(qual) };
            RefinementType::under(base.clone(), tidy(q, simp))
        }
        RefinementType::Over { base, qual } => {
            let q = if exists { fa(qual) } else { ex(qual) };
            RefinementType::over(base.clone(), tidy(q, simp))
        }
        RefinementType::Arrow { binder, dom, cod } => {
            // A binder named like the eliminated variable shadows it.
            if binder == x {
                let dom = embed(x, bx, phix, dom, !exists, simp);
                return RefinementType::arrow(binder.clone(), dom, (**cod).clone());
            }
            let dom = embed(x, bx, phix, dom, !exists, simp);
            let cod = embed(x, bx, phix, cod, exists, simp);
            RefinementType::arrow(binder.clone(), dom, cod)
        }
    }
}

fn coverage_binding<'a>(x: &str, tx: &'a RefinementType) -> Result<Option<(&'a BaseType, &'a Prop)>> {
    match tx {
        RefinementType::Under { base, qual } => Ok(Some((base, qual))),
        RefinementType::Arrow { .. } => Ok(None),
        RefinementType::Over { .. } => {
            Err(Error::ShapeViolation(format!("cannot existentialize overapproximate binding `{x}`")))
        }
    }
}

/// `Ex(x:τx, τ)`. Function-typed bindings cannot occur in qualifiers and
/// are passed through.
pub fn ex_binding(x: &str, tx: &RefinementType, t: &RefinementType) -> Result<RefinementType> {
    ex_binding_with(x, tx, t, true)
}

pub fn ex_binding_with(x: &str, tx: &RefinementType, t: &RefinementType, simp: bool) -> Result<RefinementType> {
    Ok(match coverage_binding(x, tx)? {
        Some((b, q)) => embed(x, b, q, t, true, simp),
        None => t.clone(),
    })
}

/// `Fa(x:τx, τ)`, the dual of [`ex_binding`].
pub fn fa_binding(x: &str, tx: &RefinementType, t: &RefinementType) -> Result<RefinementType> {
    Ok(match coverage_binding(x, tx)? {
        Some((b, q)) => embed(x, b, q, t, false, true),
        None => t.clone(),
    })
}

/// Existentializes every binding of `ctx` into `t`, last binding first.
pub fn ex_context(ctx: &TypeContext, t: &RefinementType) -> Result<RefinementType> {
    ex_context_with(ctx, t, true)
}

pub fn ex_context_with(ctx: &TypeContext, t: &RefinementType, simp: bool) -> Result<RefinementType> {
    ctx.bindings().iter().rev().try_fold(t.clone(), |acc, (x, tx)| ex_binding_with(x, tx, &acc, simp))
}

/// Over types only in argument position, coverage types only in result
/// position.
fn check_shape(t: &RefinementType, result: bool) -> Result<()> {
    match t {
        RefinementType::Under { .. } if !result => {
            Err(Error::ShapeViolation(format!("coverage type {t} used as a function argument type")))
        }
        RefinementType::Over { .. } if result => {
            Err(Error::ShapeViolation(format!("overapproximate type {t} used as a result type")))
        }
        RefinementType::Arrow { dom, cod, .. } => {
            check_shape(dom, false)?;
            check_shape(cod, true)
        }
        _ => Ok(()),
    }
}

/// Syntactic part of well-formedness: the type is closed under `ctx` and
/// has a legal shape.
pub fn check_closed(ctx: &TypeContext, t: &RefinementType) -> Result<()> {
    for v in t.free_vars() {
        if !ctx.contains(&v) {
            return Err(Error::NotClosed(v));
        }
    }
    check_shape(t, true)
}

/// `Γ ⊢WF τ`: closedness, shape, and feasibility of every coverage binding
/// in `Γ` (each must exclude `err`).
pub fn well_formed(solver: &Solver, ctx: &TypeContext, t: &RefinementType) -> Result<()> {
    check_closed(ctx, t)?;
    let mut prefix = TypeContext::new();
    for (x, tx) in ctx.bindings() {
        if tx.is_under() {
            let goal = err_free_goal(&prefix, tx)?;
            let (v, _) = solver.check_valid(&goal, &format!("wf-{x}"))?;
            if v == Verdict::Valid {
                return Err(Error::ContextInfeasible(x.clone()));
            }
        }
        prefix.push(x.clone(), tx.clone());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prim::PredicateRegistry;
    use crate::smt::SolverConfig;
    use crate::syntax::{parse_context, parse_prop, parse_type};

    fn ty(s: &str) -> RefinementType {
        parse_type(s).unwrap()
    }

    #[test]
    fn disjunction_of_coverage_types() {
        let t = disj(&ty("[v:nat | v = 1]"), &ty("[v:nat | v = 2]")).unwrap();
        assert!(t.alpha_eq(&ty("[v:nat | v = 1 || v = 2]")), "{t}");
        let o = disj(&ty("{v:nat | v > 1}"), &ty("{v:nat | v < 5}")).unwrap();
        assert!(o.alpha_eq(&ty("{v:nat | v > 1 && v < 5}")), "{o}");
    }

    #[test]
    fn arrows_conjoin_domains_and_align_binders() {
        let a = ty("x:{v:int | v > 0} -> [v:int | v = x]");
        let b = ty("y:{v:int | v < 9} -> [v:int | v = y + 1]");
        let t = disj(&a, &b).unwrap();
        let want = ty("x:{v:int | v > 0 || v < 9} -> [v:int | v = x || v = x + 1]");
        assert!(t.alpha_eq(&want), "{t}");
    }

    #[test]
    fn mismatched_shapes() {
        assert!(matches!(disj(&ty("[v:int | true]"), &ty("{v:int | true}")), Err(Error::ShapeMismatch(_))));
        assert!(matches!(disj(&ty("[v:bool | true]"), &ty("[v:int | true]")), Err(Error::ShapeMismatch(_))));
        assert!(disj_all(&[], true).is_err());
    }

    #[test]
    fn existentializing_a_binding() {
        let t = ex_binding("x", &ty("[v:nat | v > 0]"), &ty("[v:nat | v = x + 1]")).unwrap();
        let want = RefinementType::under(BaseType::Nat, parse_prop("exists x:nat. x > 0 && v = x + 1").unwrap());
        // parse_prop keeps `v` as a variable; compare after renaming.
        let want = match want {
            RefinementType::Under { base, qual } => RefinementType::under(base, qual.rename("v", NU)),
            _ => unreachable!(),
        };
        assert!(t.alpha_eq(&want), "{t}");
        assert!(!t.mentions("x"));
    }

    #[test]
    fn ex_over_ghost_reduces_by_one_point() {
        // b':[bool | ν = b ∧ ¬ν] existentialized into [int | ν = n].
        let ghost = RefinementType::under(
            BaseType::Bool,
            Prop::and2(Prop::eq(Expr::nu(), Expr::var("b")), Prop::not(Prop::Atom(Expr::nu()))),
        );
        let t = ex_binding("b'", &ghost, &RefinementType::under(BaseType::Int, Prop::nu_eq(Expr::var("n")))).unwrap();
        let want =
            RefinementType::under(BaseType::Int, Prop::and2(Prop::not(Prop::Atom(Expr::var("b"))), Prop::nu_eq(Expr::var("n"))));
        assert!(t.alpha_eq(&want), "{t}");
    }

    #[test]
    fn arrow_bindings_pass_through() {
        let ctx = parse_context("f:x:{v:int | true} -> [v:int | v = x], y:[v:int | v = 3]").unwrap();
        let t = ex_context(&ctx, &ty("[v:int | v = y]")).unwrap();
        assert!(t.alpha_eq(&ty("[v:int | v = 3]")), "{t}");
    }

    #[test]
    fn arrows_flip_quantifiers_in_domains() {
        let t = ex_binding("y", &ty("[v:int | v > 0]"), &ty("x:{v:int | v < y} -> [v:int | v > y]")).unwrap();
        match &t {
            RefinementType::Arrow { dom, cod, .. } => {
                assert!(matches!(dom.qual().unwrap(), Prop::Exists(..)), "{t}");
                assert!(matches!(cod.qual().unwrap(), Prop::Exists(..)), "{t}");
            }
            _ => panic!("{t}"),
        }
        let f = fa_binding("y", &ty("[v:int | v > 0]"), &ty("[v:int | v = y]")).unwrap();
        assert!(matches!(f.qual().unwrap(), Prop::Forall(..)), "{f}");
    }

    #[test]
    fn closedness_and_shape() {
        assert_eq!(check_closed(&TypeContext::new(), &ty("[v:nat | v = y]")), Err(Error::NotClosed("y".into())));
        assert!(matches!(check_closed(&TypeContext::new(), &ty("{v:nat | true}")), Err(Error::ShapeViolation(_))));
        assert!(matches!(
            check_closed(&TypeContext::new(), &ty("x:[v:nat | true] -> [v:nat | true]")),
            Err(Error::ShapeViolation(_))
        ));
    }

    #[test]
    fn infeasible_contexts() {
        let s = Solver::new(SolverConfig::default(), PredicateRegistry::builtin());
        let ctx = parse_context("x:[v:nat | false]").unwrap();
        assert_eq!(well_formed(&s, &ctx, &ty("[v:nat | true]")), Err(Error::ContextInfeasible("x".into())));
        let ctx = parse_context("x:{v:nat | v > 0}").unwrap();
        assert_eq!(well_formed(&s, &ctx, &ty("[v:nat | false]")), Ok(()));
    }
}
