//! Reference small-step interpreter with bounded nondeterminism, and the
//! brute-force denotation oracle built on it.

mod domain;
mod oracle;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{euclid_mod, normalize_mnf, Branch, Constant, Ctor, Op, Prim, Term};

pub use domain::{domain_size, enumerate_domain, eval_expr, eval_prop, Env};
pub use oracle::{check_axioms, choice_term, denotation_member, AxiomReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub nat_max: i64,
    pub int_abs_max: i64,
    pub list_len_max: usize,
    pub tree_depth_max: usize,
    /// Step budget per evaluation path.
    pub fuel: usize,
}

impl Default for DomainBounds {
    fn default() -> Self {
        DomainBounds { nat_max: 4, int_abs_max: 4, list_len_max: 3, tree_depth_max: 3, fuel: 100_000 }
    }
}

impl fmt::Display for DomainBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nat={},int={},len={},depth={},fuel={}",
            self.nat_max, self.int_abs_max, self.list_len_max, self.tree_depth_max, self.fuel
        )
    }
}

impl FromStr for DomainBounds {
    type Err = String;

    /// `nat=4,int=4,len=3,depth=3[,fuel=N]`; omitted keys keep defaults.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut b = DomainBounds::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, found `{part}`"))?;
            let n: i64 = v.trim().parse().map_err(|_| format!("bad number in `{part}`"))?;
            if n < 0 {
                return Err(format!("bound `{k}` must be nonnegative"));
            }
            match k.trim() {
                "nat" => b.nat_max = n,
                "int" => b.int_abs_max = n,
                "len" => b.list_len_max = n as usize,
                "depth" => b.tree_depth_max = n as usize,
                "fuel" if n > 0 => b.fuel = n as usize,
                "fuel" => return Err("fuel must be positive".into()),
                other => return Err(format!("unknown bound `{other}`")),
            }
        }
        Ok(b)
    }
}

/// Outcome of exploring every evaluation path of a closed term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValueSet {
    pub values: BTreeSet<Constant>,
    /// Function values reached (only possible for higher-order results).
    pub functions: usize,
    pub diverged: bool,
    pub err_reachable: bool,
}

/// Total states explored before giving up on a term.
const STATE_LIMIT: usize = 2_000_000;

fn is_val(t: &Term) -> bool {
    match t {
        Term::Const(_) | Term::Op(_) | Term::Lam { .. } | Term::Fix { .. } => true,
        Term::OpApp(op, args) => args.len() < op.arity() && args.iter().all(is_val),
        _ => false,
    }
}

fn constant(t: &Term) -> Result<&Constant> {
    match t {
        Term::Const(c) => Ok(c),
        Term::Var(x) => Err(Error::StuckTerm(format!("free variable `{x}`"))),
        t => Err(Error::StuckTerm(format!("expected a first-order value, found {t}"))),
    }
}

fn int_arg(c: &Constant) -> Result<i64> {
    c.as_int().ok_or_else(|| Error::StuckTerm(format!("expected an integer, found {c}")))
}

fn bool_arg(c: &Constant) -> Result<bool> {
    c.as_bool().ok_or_else(|| Error::StuckTerm(format!("expected a boolean, found {c}")))
}

/// Result of a saturated operator application: its possible values, or
/// `None` for `err`.
fn apply_op(op: Op, args: &[Constant], b: &DomainBounds) -> Result<Option<Vec<Constant>>> {
    let arith = |f: fn(i64, i64) -> Option<i64>| -> Result<Option<Vec<Constant>>> {
        let v = f(int_arg(&args[0])?, int_arg(&args[1])?)
            .ok_or_else(|| Error::StuckTerm(format!("arithmetic overflow in {op}")))?;
        Ok(Some(vec![Constant::Int(v)]))
    };
    let cmp = |f: fn(i64, i64) -> bool| -> Result<Option<Vec<Constant>>> {
        Ok(Some(vec![Constant::Bool(f(int_arg(&args[0])?, int_arg(&args[1])?))]))
    };
    match op {
        Op::Prim(p) => match p {
            Prim::Add => arith(i64::checked_add),
            Prim::Sub => arith(i64::checked_sub),
            Prim::Mul => arith(i64::checked_mul),
            Prim::Mod => {
                let (a, m) = (int_arg(&args[0])?, int_arg(&args[1])?);
                Ok(euclid_mod(a, m).map(|v| vec![Constant::Int(v)]))
            }
            Prim::Eq => Ok(Some(vec![Constant::Bool(args[0] == args[1])])),
            Prim::Ne => Ok(Some(vec![Constant::Bool(args[0] != args[1])])),
            Prim::Lt => cmp(|a, b| a < b),
            Prim::Le => cmp(|a, b| a <= b),
            Prim::Gt => cmp(|a, b| a > b),
            Prim::Ge => cmp(|a, b| a >= b),
            Prim::And => Ok(Some(vec![Constant::Bool(bool_arg(&args[0])? && bool_arg(&args[1])?)])),
            Prim::Or => Ok(Some(vec![Constant::Bool(bool_arg(&args[0])? || bool_arg(&args[1])?)])),
            Prim::Not => Ok(Some(vec![Constant::Bool(!bool_arg(&args[0])?)])),
            Prim::NatGen => Ok(Some((0..=b.nat_max).map(Constant::Int).collect())),
            Prim::IntGen => Ok(Some((-b.int_abs_max..=b.int_abs_max).map(Constant::Int).collect())),
            Prim::BoolGen => Ok(Some(vec![Constant::Bool(true), Constant::Bool(false)])),
            Prim::IntRange => {
                let (lo, hi) = (int_arg(&args[0])?, int_arg(&args[1])?);
                Ok(Some((lo..=hi).map(Constant::Int).collect()))
            }
        },
        Op::Ctor(c) => Ok(Some(vec![match c {
            Ctor::True => Constant::Bool(true),
            Ctor::False => Constant::Bool(false),
            Ctor::Zero => Constant::Int(0),
            Ctor::Succ => {
                let n = int_arg(&args[0])?;
                if n < 0 {
                    return Err(Error::StuckTerm(format!("S applied to negative {n}")));
                }
                Constant::Int(n + 1)
            }
            c => Constant::Data(c, args.to_vec()),
        }])),
    }
}

fn select_branch<'a>(c: &Constant, branches: &'a [Branch]) -> Result<(&'a Branch, Vec<Constant>)> {
    let (ctor, fields) = match c {
        Constant::Bool(true) => (Ctor::True, vec![]),
        Constant::Bool(false) => (Ctor::False, vec![]),
        Constant::Int(0) => (Ctor::Zero, vec![]),
        Constant::Int(n) if *n > 0 => (Ctor::Succ, vec![Constant::Int(n - 1)]),
        Constant::Data(ctor, args) => (*ctor, args.clone()),
        c => return Err(Error::StuckTerm(format!("cannot match on {c}"))),
    };
    let br = branches
        .iter()
        .find(|b| b.ctor == ctor)
        .ok_or_else(|| Error::StuckTerm(format!("no branch for {}", ctor.name())))?;
    Ok((br, fields))
}

fn subst_all(body: &Term, vars: &[String], vals: &[Constant]) -> Term {
    vars.iter().zip(vals).fold(body.clone(), |t, (x, v)| t.subst(x, &Term::Const(v.clone())))
}

/// One-step successors. `err` and values have none.
pub fn step(e: &Term, b: &DomainBounds) -> Result<Vec<Term>> {
    match e {
        _ if is_val(e) || matches!(e, Term::Err) => Ok(vec![]),
        Term::Var(x) => Err(Error::StuckTerm(format!("free variable `{x}`"))),
        Term::Let { x, bound, body } => {
            if is_val(bound) {
                return Ok(vec![body.subst(x, bound)]);
            }
            if matches!(**bound, Term::Err) {
                return Ok(vec![Term::Err]);
            }
            Ok(step(bound, b)?
                .into_iter()
                .map(|nb| Term::Let { x: x.clone(), bound: Box::new(nb), body: body.clone() })
                .collect())
        }
        Term::LetOp { x, op, args, body } => {
            let cs: Vec<Constant> = args.iter().map(|a| constant(a).cloned()).collect::<Result<_>>()?;
            match apply_op(*op, &cs, b)? {
                None => Ok(vec![Term::Err]),
                Some(vs) => Ok(vs.into_iter().map(|v| body.subst(x, &Term::Const(v))).collect()),
            }
        }
        Term::LetApp { x, func, arg, body } => {
            if !is_val(arg) {
                return Err(Error::StuckTerm(format!("application argument {arg} is not a value")));
            }
            let bound = match &**func {
                Term::Lam { param, body: fb, .. } => fb.subst(param, arg),
                Term::Fix { fname, param, body: fb, .. } => fb.subst(fname, func).subst(param, arg),
                Term::Op(op) if op.arity() == 1 => {
                    Term::let_op("$r", *op, vec![(**arg).clone()], Term::var("$r"))
                }
                Term::Op(op) => Term::OpApp(*op, vec![(**arg).clone()]),
                Term::OpApp(op, prev) if prev.len() < op.arity() => {
                    let mut all = prev.clone();
                    all.push((**arg).clone());
                    if all.len() == op.arity() {
                        // The operands are closed, so a fixed binder cannot capture.
                        Term::let_op("$r", *op, all, Term::var("$r"))
                    } else {
                        Term::OpApp(*op, all)
                    }
                }
                f => return Err(Error::StuckTerm(format!("cannot apply {f}"))),
            };
            Ok(vec![Term::Let { x: x.clone(), bound: Box::new(bound), body: body.clone() }])
        }
        Term::Match { scrut, branches } => {
            let c = constant(scrut)?;
            let (br, fields) = select_branch(c, branches)?;
            Ok(vec![subst_all(&br.body, &br.vars, &fields)])
        }
        Term::App(..) | Term::OpApp(..) => Err(Error::StuckTerm(format!("term is not in normal form: {e}"))),
        _ => unreachable!("values handled above"),
    }
}

/// Explores all evaluation paths of a closed term. Terms not in monadic
/// normal form are normalized first.
pub fn eval_bounded(e: &Term, b: &DomainBounds) -> Result<ValueSet> {
    let start = if e.is_mnf() { e.clone() } else { normalize_mnf(e) };
    let mut out = ValueSet::default();
    let mut seen: HashSet<Term> = HashSet::new();
    let mut stack: Vec<(Term, usize)> = vec![(start, 0)];
    while let Some((t, depth)) = stack.pop() {
        if !seen.insert(t.clone()) {
            continue;
        }
        if seen.len() > STATE_LIMIT {
            out.diverged = true;
            break;
        }
        match &t {
            Term::Err => out.err_reachable = true,
            Term::Const(c) => {
                out.values.insert(c.clone());
            }
            _ if is_val(&t) => out.functions += 1,
            _ if depth >= b.fuel => out.diverged = true,
            _ => {
                for n in step(&t, b)? {
                    stack.push((n, depth + 1));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn eval(src: &str) -> ValueSet {
        eval_bounded(&parse_term(src).unwrap(), &DomainBounds::default()).unwrap()
    }

    fn ints(vs: &ValueSet) -> Vec<i64> {
        vs.values.iter().map(|c| c.as_int().unwrap()).collect()
    }

    #[test]
    fn let_and_match_steps() {
        let b = DomainBounds::default();
        let t = parse_term("let x = 1 in x").unwrap();
        assert_eq!(step(&t, &b).unwrap(), vec![Term::int(1)]);
        let m = parse_term("match S 0 with O -> 5 | S y -> y").unwrap();
        assert_eq!(ints(&eval_bounded(&m, &b).unwrap()), vec![0]);
    }

    #[test]
    fn generators_branch_over_bounds() {
        let b = DomainBounds { nat_max: 2, ..DomainBounds::default() };
        let t = parse_term("let n = nat_gen () in n").unwrap();
        assert_eq!(ints(&eval_bounded(&t, &b).unwrap()), vec![0, 1, 2]);
    }

    #[test]
    fn choice_and_err() {
        let v = eval("1 <+> 2");
        assert_eq!(ints(&v), vec![1, 2]);
        assert!(!v.err_reachable);
        let e = eval("err");
        assert!(e.values.is_empty() && e.err_reachable);
    }

    #[test]
    fn even_gen_reaches_even_values_and_err() {
        let v = eval("let n = int_gen () in if n mod 2 == 0 then n else err");
        assert_eq!(ints(&v), vec![-4, -2, 0, 2, 4]);
        assert!(v.err_reachable);
    }

    #[test]
    fn empty_range_and_mod_zero() {
        assert!(eval("int_range 3 1").values.is_empty());
        assert!(eval("let z = 0 in 1 mod z").err_reachable);
    }

    #[test]
    fn divergence_is_reported() {
        let b = DomainBounds { fuel: 200, ..DomainBounds::default() };
        let t = parse_term("let rec loop (n:nat) : nat = loop n in loop 0").unwrap();
        let v = eval_bounded(&t, &b).unwrap();
        assert!(v.diverged && v.values.is_empty());
    }

    #[test]
    fn bounds_parse() {
        let b: DomainBounds = "nat=3,int=2,len=2,depth=1,fuel=10".parse().unwrap();
        assert_eq!(b, DomainBounds { nat_max: 3, int_abs_max: 2, list_len_max: 2, tree_depth_max: 1, fuel: 10 });
        assert!("nat=-1".parse::<DomainBounds>().is_err());
        assert!("size=2".parse::<DomainBounds>().is_err());
    }
}
