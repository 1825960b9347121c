use std::collections::BTreeMap;

use super::DomainBounds;
use crate::error::{Error, Result};
use crate::prim::PredicateRegistry;
use crate::syntax::{euclid_mod, BaseType, Constant, Expr, Prop};

/// Values of qualifier variables.
pub type Env = BTreeMap<String, Constant>;

/// Largest domain the oracle is willing to enumerate.
const DOMAIN_LIMIT: u128 = 250_000;

/// Number of values of `b` within the bounds (saturating).
pub fn domain_size(b: &BaseType, bounds: &DomainBounds) -> u128 {
    match b {
        BaseType::Unit => 1,
        BaseType::Bool => 2,
        BaseType::Nat => bounds.nat_max as u128 + 1,
        BaseType::Int => 2 * bounds.int_abs_max as u128 + 1,
        BaseType::List(e) => {
            let k = domain_size(e, bounds);
            let mut total: u128 = 0;
            let mut pow: u128 = 1;
            for _ in 0..=bounds.list_len_max {
                total = total.saturating_add(pow);
                pow = pow.saturating_mul(k);
            }
            total
        }
        BaseType::Tree(e) => {
            let k = domain_size(e, bounds);
            let mut t: u128 = 1;
            for _ in 0..bounds.tree_depth_max {
                t = 1u128.saturating_add(k.saturating_mul(t.saturating_mul(t)));
            }
            t
        }
    }
}

/// All values of `b` within the bounds: lists up to `list_len_max`
/// elements, trees up to depth `tree_depth_max`.
pub fn enumerate_domain(b: &BaseType, bounds: &DomainBounds) -> Result<Vec<Constant>> {
    let n = domain_size(b, bounds);
    if n > DOMAIN_LIMIT {
        return Err(Error::BoundsTooSmall(format!(
            "the domain of {b} has {n} values at {bounds}; lower the bounds for this probe"
        )));
    }
    Ok(match b {
        BaseType::Unit => vec![Constant::Unit],
        BaseType::Bool => vec![Constant::Bool(false), Constant::Bool(true)],
        BaseType::Nat => (0..=bounds.nat_max).map(Constant::Int).collect(),
        BaseType::Int => (-bounds.int_abs_max..=bounds.int_abs_max).map(Constant::Int).collect(),
        BaseType::List(e) => {
            let elems = enumerate_domain(e, bounds)?;
            let mut out = vec![Constant::nil()];
            let mut layer = vec![Constant::nil()];
            for _ in 0..bounds.list_len_max {
                let mut next = Vec::new();
                for tail in &layer {
                    for h in &elems {
                        next.push(Constant::cons(h.clone(), tail.clone()));
                    }
                }
                out.extend(next.iter().cloned());
                layer = next;
            }
            out
        }
        BaseType::Tree(e) => {
            let elems = enumerate_domain(e, bounds)?;
            let mut all = vec![Constant::leaf()];
            for _ in 0..bounds.tree_depth_max {
                let mut next = vec![Constant::leaf()];
                for x in &elems {
                    for l in &all {
                        for r in &all {
                            next.push(Constant::node(x.clone(), l.clone(), r.clone()));
                        }
                    }
                }
                all = next;
            }
            all
        }
    })
}

pub fn eval_expr(e: &Expr, env: &Env) -> Result<Constant> {
    let int = |e: &Expr| -> Result<i64> {
        match eval_expr(e, env)? {
            Constant::Int(n) => Ok(n),
            c => Err(Error::SortMismatch(format!("{c} used as an integer"))),
        }
    };
    let arith = |a: &Expr, b: &Expr, f: fn(i64, i64) -> Option<i64>| -> Result<Constant> {
        f(int(a)?, int(b)?)
            .map(Constant::Int)
            .ok_or_else(|| Error::Unsupported(format!("arithmetic in `{e}` is undefined or overflows")))
    };
    match e {
        Expr::Var(x) => env.get(x).cloned().ok_or_else(|| Error::UnhousedSymbol(x.clone())),
        Expr::Int(n) => Ok(Constant::Int(*n)),
        Expr::Bool(b) => Ok(Constant::Bool(*b)),
        Expr::Unit => Ok(Constant::Unit),
        Expr::Add(a, b) => arith(a, b, i64::checked_add),
        Expr::Sub(a, b) => arith(a, b, i64::checked_sub),
        Expr::Mul(a, b) => arith(a, b, i64::checked_mul),
        Expr::Mod(a, b) => arith(a, b, euclid_mod),
        Expr::Neg(a) => Ok(Constant::Int(int(a)?.checked_neg().ok_or_else(|| Error::Unsupported("overflow".into()))?)),
    }
}

fn implication_hyps(p: &Prop) -> Vec<&Prop> {
    let mut cur = p;
    while let Prop::Forall(_, _, b) = cur {
        cur = b;
    }
    match cur {
        Prop::Implies(h, _) => match &**h {
            Prop::And(ps) => ps.iter().collect(),
            h => vec![h],
        },
        _ => vec![],
    }
}

fn conjuncts(p: &Prop) -> Vec<&Prop> {
    let mut cur = p;
    while let Prop::Exists(_, _, b) = cur {
        cur = b;
    }
    match cur {
        Prop::And(ps) => ps.iter().collect(),
        _ => vec![],
    }
}

/// Whether `p` is decidable under `env` and mentions `x`.
fn ready(p: &Prop, x: &str, env: &Env) -> bool {
    let fv = p.free_vars();
    fv.contains(x) && fv.iter().all(|v| env.contains_key(v))
}

/// Evaluates a qualifier with quantifiers ranging over the bounded domains.
///
/// Nested quantifier blocks are pruned: after binding a variable, any
/// hypothesis (for ∀) or conjunct (for ∃) of the innermost body that has
/// become closed is evaluated first, so guarded quantifiers over datatypes
/// cost roughly the number of matching tuples rather than the full product.
pub fn eval_prop(reg: &PredicateRegistry, p: &Prop, env: &Env, b: &DomainBounds) -> Result<bool> {
    Ok(match p {
        Prop::Top => true,
        Prop::Bot => false,
        Prop::Atom(e) => match eval_expr(e, env)? {
            Constant::Bool(v) => v,
            c => return Err(Error::SortMismatch(format!("{c} used as a proposition"))),
        },
        Prop::Cmp(op, x, y) => {
            let (x, y) = (eval_expr(x, env)?, eval_expr(y, env)?);
            match (op, &x, &y) {
                (crate::syntax::CmpOp::Eq, _, _) => x == y,
                (crate::syntax::CmpOp::Ne, _, _) => x != y,
                (_, Constant::Int(a), Constant::Int(c)) => op.eval(*a, *c),
                _ => return Err(Error::SortMismatch(format!("ordering on {x} and {y}"))),
            }
        }
        Prop::Pred(name, args) => {
            let vals: Vec<Constant> = args.iter().map(|a| eval_expr(a, env)).collect::<Result<_>>()?;
            reg.eval(name, &vals)?
        }
        Prop::Not(q) => !eval_prop(reg, q, env, b)?,
        Prop::And(ps) => {
            for q in ps {
                if !eval_prop(reg, q, env, b)? {
                    return Ok(false);
                }
            }
            true
        }
        Prop::Or(ps) => {
            for q in ps {
                if eval_prop(reg, q, env, b)? {
                    return Ok(true);
                }
            }
            false
        }
        Prop::Implies(x, y) => !eval_prop(reg, x, env, b)? || eval_prop(reg, y, env, b)?,
        Prop::Iff(x, y) => eval_prop(reg, x, env, b)? == eval_prop(reg, y, env, b)?,
        Prop::Forall(x, s, body) => {
            let hyps = implication_hyps(body);
            let mut env2 = env.clone();
            for v in enumerate_domain(s, b)? {
                env2.insert(x.clone(), v);
                let mut skip = false;
                for h in &hyps {
                    if ready(h, x, &env2) && !eval_prop(reg, h, &env2, b)? {
                        skip = true;
                        break;
                    }
                }
                if !skip && !eval_prop(reg, body, &env2, b)? {
                    return Ok(false);
                }
            }
            true
        }
        Prop::Exists(x, s, body) => {
            let cs = conjuncts(body);
            let mut env2 = env.clone();
            for v in enumerate_domain(s, b)? {
                env2.insert(x.clone(), v);
                let mut skip = false;
                for c in &cs {
                    if ready(c, x, &env2) && !eval_prop(reg, c, &env2, b)? {
                        skip = true;
                        break;
                    }
                }
                if !skip && eval_prop(reg, body, &env2, b)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_prop;

    #[test]
    fn domain_sizes_match_enumeration() {
        let b = DomainBounds { int_abs_max: 1, list_len_max: 2, tree_depth_max: 2, ..DomainBounds::default() };
        for t in [
            BaseType::Int,
            BaseType::Nat,
            BaseType::list(BaseType::Int),
            BaseType::tree(BaseType::Int),
            BaseType::list(BaseType::Bool),
        ] {
            assert_eq!(enumerate_domain(&t, &b).unwrap().len() as u128, domain_size(&t, &b), "{t}");
        }
    }

    #[test]
    fn large_tree_domains_are_refused() {
        let b = DomainBounds::default();
        assert!(matches!(enumerate_domain(&BaseType::tree(BaseType::Int), &b), Err(Error::BoundsTooSmall(_))));
    }

    #[test]
    fn quantified_qualifiers() {
        let reg = PredicateRegistry::builtin();
        let b = DomainBounds::default();
        let mut env = Env::new();
        env.insert("l".into(), Constant::from_list(vec![Constant::Int(1), Constant::Int(3)]));
        let p = parse_prop("forall u:int. mem(l, u) ==> u > 0").unwrap();
        assert!(eval_prop(&reg, &p, &env, &b).unwrap());
        let q = parse_prop("exists u:int. mem(l, u) && u mod 2 == 0").unwrap();
        assert!(!eval_prop(&reg, &q, &env, &b).unwrap());
    }
}
