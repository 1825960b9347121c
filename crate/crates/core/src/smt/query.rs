use crate::error::{Error, Result};
use crate::syntax::{BaseType, Expr, Prop, RefinementType, TypeContext, NU};

/// Rejects contexts whose overapproximate bindings mention coverage-typed
/// variables (the resulting ∃∀ alternation leaves the decidable fragment),
/// and qualifiers with unbound variables.
fn guard_context(ctx: &TypeContext) -> Result<()> {
    let mut under: Vec<&str> = Vec::new();
    let mut seen: Vec<&str> = Vec::new();
    for (x, ty) in ctx.bindings() {
        if let Some(q) = ty.qual() {
            for v in q.free_vars() {
                if v != NU && !seen.contains(&v.as_str()) {
                    return Err(Error::UnhousedSymbol(v));
                }
            }
        }
        if let RefinementType::Over { qual, .. } = ty {
            if under.iter().any(|u| qual.mentions(u)) {
                return Err(Error::NonEPRContext(x.clone()));
            }
        }
        if ty.is_under() {
            under.push(x);
        }
        seen.push(x);
    }
    Ok(())
}

/// Folds the context into both qualifiers, innermost binding first:
/// coverage bindings become `∃x. φx[ν↦x] ∧ ·` on each side. Overapproximate
/// bindings are returned separately, in order, because they must scope over
/// the whole implication: quantifying them per side would let a qualifier
/// that relates `ν` to such a binding become vacuous. Function bindings are
/// dropped.
pub fn closure(ctx: &TypeContext, phi1: &Prop, phi2: &Prop) -> Result<(Vec<(String, BaseType, Prop)>, Prop, Prop)> {
    guard_context(ctx)?;
    for phi in [phi1, phi2] {
        for v in phi.free_vars() {
            if v != NU && !ctx.contains(&v) {
                return Err(Error::UnhousedSymbol(v));
            }
        }
    }
    let (mut a, mut b) = (phi1.clone(), phi2.clone());
    let mut over = Vec::new();
    for (x, ty) in ctx.bindings().iter().rev() {
        match ty {
            RefinementType::Under { base, qual } => {
                let hyp = qual.subst(NU, &Expr::var(x.clone()));
                a = Prop::exists(x.clone(), base.clone(), Prop::and2(hyp.clone(), a));
                b = Prop::exists(x.clone(), base.clone(), Prop::and2(hyp, b));
            }
            RefinementType::Over { base, qual } => {
                over.push((x.clone(), base.clone(), qual.subst(NU, &Expr::var(x.clone()))));
            }
            RefinementType::Arrow { .. } => {}
        }
    }
    over.reverse();
    Ok((over, a, b))
}

/// `Query(Γ, [b|φ1], [b|φ2])`: `∀x̄. θ̄ ⟹ ∀ν:b. Φ2 ⟹ Φ1`, where `x̄:θ̄` are
/// the overapproximate bindings of Γ and `Φi` close `φi` over its coverage
/// bindings.
pub fn build_query(ctx: &TypeContext, base: &BaseType, phi1: &Prop, phi2: &Prop) -> Result<Prop> {
    let (over, a, b) = closure(ctx, phi1, phi2)?;
    let mut q = Prop::forall(NU, base.clone(), Prop::implies(b, a));
    for (x, s, hyp) in over.into_iter().rev() {
        q = Prop::forall(x, s, Prop::implies(hyp, q));
    }
    Ok(q)
}

/// Goal whose validity establishes `Γ ⊢ τ1 <: τ2` at base type.
pub fn subtype_goal(ctx: &TypeContext, t1: &RefinementType, t2: &RefinementType) -> Result<Prop> {
    match (t1, t2) {
        (RefinementType::Under { base: b1, qual: q1 }, RefinementType::Under { base: b2, qual: q2 }) => {
            check_bases(b1, b2)?;
            build_query(ctx, b1, q1, q2)
        }
        (RefinementType::Over { base: b1, qual: q1 }, RefinementType::Over { base: b2, qual: q2 }) => {
            check_bases(b1, b2)?;
            build_query(ctx, b1, q2, q1)
        }
        _ => Err(Error::IncomparableKinds(format!("{t1} vs {t2}"))),
    }
}

fn check_bases(b1: &BaseType, b2: &BaseType) -> Result<()> {
    if b1.compatible(b2) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("base types {b1} and {b2} differ")))
    }
}

/// Goal whose validity means `err` inhabits the binding's denotation, i.e.
/// the binding is infeasible under Γ.
pub fn err_free_goal(ctx: &TypeContext, binding: &RefinementType) -> Result<Prop> {
    match binding {
        RefinementType::Under { base, qual } => build_query(ctx, base, &Prop::Bot, qual),
        _ => Err(Error::ShapeViolation(format!("feasibility of non-coverage binding {binding}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_context, parse_type};

    #[test]
    fn reflexive_query_shape() {
        let q = build_query(&TypeContext::new(), &BaseType::Int, &Prop::Top, &Prop::Top).unwrap();
        assert_eq!(q, Prop::forall(NU, BaseType::Int, Prop::implies(Prop::Top, Prop::Top)));
    }

    #[test]
    fn alternation_is_rejected() {
        let ctx = parse_context("x:[v:nat | v > 0], y:{v:nat | v > x + 1}").unwrap();
        let r = build_query(&ctx, &BaseType::Nat, &Prop::Top, &Prop::Top);
        assert_eq!(r, Err(Error::NonEPRContext("y".into())));
    }

    #[test]
    fn unbound_names_are_reported() {
        let r = build_query(&TypeContext::new(), &BaseType::Nat, &Prop::eq(Expr::nu(), Expr::var("y")), &Prop::Top);
        assert_eq!(r, Err(Error::UnhousedSymbol("y".into())));
    }

    #[test]
    fn kinds_must_agree() {
        let a = parse_type("[v:int | true]").unwrap();
        let b = parse_type("{v:int | true}").unwrap();
        assert!(matches!(subtype_goal(&TypeContext::new(), &a, &b), Err(Error::IncomparableKinds(_))));
    }
}
