//! Simple types for MNF terms. Unification is needed only for the few
//! polymorphic pieces of the language: `err`, empty data constants, `==`
//! and the list/tree constructors.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::syntax::{BaseType, BasicType, Branch, Constant, Ctor, Fresh, Op, Prim, Term};

#[derive(Clone, Debug, PartialEq)]
enum Ty {
    Unit,
    Bool,
    Nat,
    Int,
    List(Box<Ty>),
    Tree(Box<Ty>),
    Arrow(Box<Ty>, Box<Ty>),
    Var(usize),
}

impl Ty {
    fn arrow(a: Ty, b: Ty) -> Ty {
        Ty::Arrow(Box::new(a), Box::new(b))
    }

    fn from_basic(t: &BasicType) -> Ty {
        match t {
            BasicType::Base(b) => Ty::from_base(b),
            BasicType::Arrow(a, b) => Ty::arrow(Ty::from_basic(a), Ty::from_basic(b)),
        }
    }

    fn from_base(b: &BaseType) -> Ty {
        match b {
            BaseType::Unit => Ty::Unit,
            BaseType::Bool => Ty::Bool,
            BaseType::Nat => Ty::Nat,
            BaseType::Int => Ty::Int,
            BaseType::List(e) => Ty::List(Box::new(Ty::from_base(e))),
            BaseType::Tree(e) => Ty::Tree(Box::new(Ty::from_base(e))),
        }
    }
}

fn err(rule: &'static str, msg: impl Into<String>) -> Error {
    Error::BasicType { rule, msg: msg.into() }
}

struct Infer {
    subst: Vec<Option<Ty>>,
    env: BTreeMap<String, Ty>,
}

impl Infer {
    fn var(&mut self) -> Ty {
        self.subst.push(None);
        Ty::Var(self.subst.len() - 1)
    }

    fn prune(&self, t: &Ty) -> Ty {
        match t {
            Ty::Var(i) => match &self.subst[*i] {
                Some(u) => self.prune(u),
                None => t.clone(),
            },
            Ty::List(e) => Ty::List(Box::new(self.prune(e))),
            Ty::Tree(e) => Ty::Tree(Box::new(self.prune(e))),
            Ty::Arrow(a, b) => Ty::arrow(self.prune(a), self.prune(b)),
            _ => t.clone(),
        }
    }

    fn occurs(&self, i: usize, t: &Ty) -> bool {
        match self.prune(t) {
            Ty::Var(j) => i == j,
            Ty::List(e) | Ty::Tree(e) => self.occurs(i, &e),
            Ty::Arrow(a, b) => self.occurs(i, &a) || self.occurs(i, &b),
            _ => false,
        }
    }

    fn unify(&mut self, rule: &'static str, a: &Ty, b: &Ty) -> Result<()> {
        let (a, b) = (self.prune(a), self.prune(b));
        match (&a, &b) {
            (Ty::Var(i), Ty::Var(j)) if i == j => Ok(()),
            (Ty::Var(i), t) | (t, Ty::Var(i)) => {
                if self.occurs(*i, t) {
                    return Err(err(rule, "infinite type"));
                }
                self.subst[*i] = Some(t.clone());
                Ok(())
            }
            // Naturals are integers with a nonnegativity refinement.
            (Ty::Nat | Ty::Int, Ty::Nat | Ty::Int) => Ok(()),
            (Ty::Unit, Ty::Unit) | (Ty::Bool, Ty::Bool) => Ok(()),
            (Ty::List(x), Ty::List(y)) | (Ty::Tree(x), Ty::Tree(y)) => self.unify(rule, x, y),
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => {
                self.unify(rule, a1, a2)?;
                self.unify(rule, b1, b2)
            }
            _ => Err(err(rule, format!("expected {}, found {}", self.show(&b), self.show(&a)))),
        }
    }

    fn show(&self, t: &Ty) -> String {
        resolve(&self.prune(t)).to_string()
    }

    fn constant(&mut self, c: &Constant) -> Result<Ty> {
        Ok(match c {
            Constant::Unit => Ty::Unit,
            Constant::Bool(_) => Ty::Bool,
            Constant::Int(_) => Ty::Int,
            Constant::Data(ctor, args) => {
                let (params, ret) = self.ctor_sig(*ctor);
                for (a, p) in args.iter().zip(&params) {
                    let t = self.constant(a)?;
                    self.unify("BtConst", &t, p)?;
                }
                ret
            }
        })
    }

    fn ctor_sig(&mut self, c: Ctor) -> (Vec<Ty>, Ty) {
        match c {
            Ctor::True | Ctor::False => (vec![], Ty::Bool),
            Ctor::Zero => (vec![], Ty::Nat),
            Ctor::Succ => (vec![Ty::Nat], Ty::Nat),
            Ctor::Nil => (vec![], Ty::List(Box::new(self.var()))),
            Ctor::Cons => {
                let a = self.var();
                let l = Ty::List(Box::new(a.clone()));
                (vec![a, l.clone()], l)
            }
            Ctor::Leaf => (vec![], Ty::Tree(Box::new(self.var()))),
            Ctor::Node => {
                let a = self.var();
                let t = Ty::Tree(Box::new(a.clone()));
                (vec![a, t.clone(), t.clone()], t)
            }
        }
    }

    fn op_sig(&mut self, op: Op) -> (Vec<Ty>, Ty) {
        let Op::Prim(p) = op else {
            let Op::Ctor(c) = op else { unreachable!() };
            return self.ctor_sig(c);
        };
        match p {
            Prim::Add | Prim::Sub | Prim::Mul | Prim::Mod => (vec![Ty::Int, Ty::Int], Ty::Int),
            Prim::Eq | Prim::Ne => {
                let a = self.var();
                (vec![a.clone(), a], Ty::Bool)
            }
            Prim::Lt | Prim::Le | Prim::Gt | Prim::Ge => (vec![Ty::Int, Ty::Int], Ty::Bool),
            Prim::And | Prim::Or => (vec![Ty::Bool, Ty::Bool], Ty::Bool),
            Prim::Not => (vec![Ty::Bool], Ty::Bool),
            Prim::NatGen => (vec![Ty::Unit], Ty::Nat),
            Prim::IntGen => (vec![Ty::Unit], Ty::Int),
            Prim::BoolGen => (vec![Ty::Unit], Ty::Bool),
            Prim::IntRange => (vec![Ty::Int, Ty::Int], Ty::Int),
        }
    }

    fn bind(&mut self, x: &str, t: Ty) {
        self.env.insert(x.to_string(), t);
    }

    fn infer(&mut self, e: &Term) -> Result<Ty> {
        match e {
            Term::Const(c) => self.constant(c),
            Term::Op(op) => {
                let (ps, r) = self.op_sig(*op);
                Ok(ps.into_iter().rev().fold(r, |acc, p| Ty::arrow(p, acc)))
            }
            Term::Var(x) => self.env.get(x).cloned().ok_or_else(|| err("BtVar", format!("unbound variable `{x}`"))),
            Term::Err => Ok(self.var()),
            Term::Lam { param, param_ty, body } => {
                let pt = Ty::from_basic(param_ty);
                self.bind(param, pt.clone());
                let bt = self.infer(body)?;
                Ok(Ty::arrow(pt, bt))
            }
            Term::Fix { fname, fty, param, param_ty, body } => {
                let ft = Ty::from_basic(fty);
                let pt = Ty::from_basic(param_ty);
                self.bind(fname, ft.clone());
                self.bind(param, pt.clone());
                let bt = self.infer(body)?;
                self.unify("BtFix", &Ty::arrow(pt, bt), &ft)?;
                Ok(ft)
            }
            Term::Let { x, bound, body } => {
                let t = self.infer(bound)?;
                self.bind(x, t);
                self.infer(body)
            }
            Term::LetOp { x, op, args, body } => {
                let r = self.apply_op("BtAppOp", *op, args)?;
                self.bind(x, r);
                self.infer(body)
            }
            Term::OpApp(op, args) => self.apply_op("BtAppOp", *op, args),
            Term::LetApp { x, func, arg, body } => {
                let r = self.apply("BtApp", func, arg)?;
                self.bind(x, r);
                self.infer(body)
            }
            Term::App(f, a) => self.apply("BtApp", f, a),
            Term::Match { scrut, branches } => {
                let st = self.infer(scrut)?;
                let out = self.var();
                for Branch { ctor, vars, body } in branches {
                    let (params, ret) = self.ctor_sig(*ctor);
                    self.unify("BtMatch", &st, &ret)?;
                    if params.len() != vars.len() {
                        return Err(err("BtMatch", format!("pattern {} binds {} variable(s)", ctor.name(), vars.len())));
                    }
                    for (y, p) in vars.iter().zip(params) {
                        self.bind(y, p);
                    }
                    let bt = self.infer(body)?;
                    self.unify("BtMatch", &bt, &out)?;
                }
                Ok(out)
            }
        }
    }

    fn apply_op(&mut self, rule: &'static str, op: Op, args: &[Term]) -> Result<Ty> {
        let (params, ret) = self.op_sig(op);
        if params.len() != args.len() {
            return Err(err(rule, format!("`{}` expects {} argument(s), found {}", op.name(), params.len(), args.len())));
        }
        for (a, p) in args.iter().zip(&params) {
            let t = self.infer(a)?;
            self.unify(rule, &t, p)?;
        }
        Ok(ret)
    }

    fn apply(&mut self, rule: &'static str, f: &Term, a: &Term) -> Result<Ty> {
        let ft = self.infer(f)?;
        let at = self.infer(a)?;
        let r = self.var();
        self.unify(rule, &ft, &Ty::arrow(at, r.clone()))?;
        Ok(r)
    }
}

/// Unconstrained type variables default to `int`.
fn resolve(t: &Ty) -> BasicType {
    BasicType::Base(match t {
        Ty::Arrow(a, b) => return BasicType::arrow(resolve(a), resolve(b)),
        _ => resolve_base(t),
    })
}

fn resolve_base(t: &Ty) -> BaseType {
    match t {
        Ty::Unit => BaseType::Unit,
        Ty::Bool => BaseType::Bool,
        Ty::Nat => BaseType::Nat,
        Ty::Int | Ty::Var(_) | Ty::Arrow(..) => BaseType::Int,
        Ty::List(e) => BaseType::list(resolve_base(e)),
        Ty::Tree(e) => BaseType::tree(resolve_base(e)),
    }
}

/// Result of basic typing: the term's type and the type of every binder
/// inside it. Binder names are assumed unique (see [`uniquify`]).
#[derive(Clone, Debug, Default)]
pub struct BasicInfo {
    pub result: Option<BasicType>,
    pub binders: BTreeMap<String, BasicType>,
}

/// Basic type of `e` under `env`, together with its binder types.
pub fn basic_info(env: &BTreeMap<String, BasicType>, e: &Term) -> Result<BasicInfo> {
    let mut inf = Infer { subst: Vec::new(), env: env.iter().map(|(x, t)| (x.clone(), Ty::from_basic(t))).collect() };
    let t = inf.infer(e)?;
    let binders = inf
        .env
        .iter()
        .filter(|(x, _)| !env.contains_key(*x))
        .map(|(x, t)| (x.clone(), resolve(&inf.prune(t))))
        .collect();
    Ok(BasicInfo { result: Some(resolve(&inf.prune(&t))), binders })
}

/// Checks `e` against the simple type system and returns its type.
pub fn basic_check(env: &BTreeMap<String, BasicType>, e: &Term) -> Result<BasicType> {
    let names: BTreeSet<String> = env.keys().cloned().collect();
    let e = uniquify(e, &names);
    Ok(basic_info(env, &e)?.result.expect("inferred"))
}

/// Renames binders so that no name is bound twice or shadows one of
/// `reserved`; free variables are left alone.
pub fn uniquify(e: &Term, reserved: &BTreeSet<String>) -> Term {
    let mut used = reserved.clone();
    used.extend(e.free_vars());
    let mut u = Uniq { used, fresh: Fresh::new() };
    u.go(e, &BTreeMap::new())
}

struct Uniq {
    used: BTreeSet<String>,
    fresh: Fresh,
}

impl Uniq {
    fn binder(&mut self, x: &str, map: &mut BTreeMap<String, String>) -> String {
        let mut y = x.to_string();
        while self.used.contains(&y) {
            y = self.fresh.name(x);
        }
        self.used.insert(y.clone());
        map.insert(x.to_string(), y.clone());
        y
    }

    fn go(&mut self, e: &Term, map: &BTreeMap<String, String>) -> Term {
        let rn = |t: &Term| -> Term {
            match t {
                Term::Var(x) => Term::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
                _ => t.clone(),
            }
        };
        match e {
            Term::Var(_) => rn(e),
            Term::Const(_) | Term::Op(_) | Term::Err => e.clone(),
            Term::Lam { param, param_ty, body } => {
                let mut m = map.clone();
                let p = self.binder(param, &mut m);
                Term::Lam { param: p, param_ty: param_ty.clone(), body: Box::new(self.go(body, &m)) }
            }
            Term::Fix { fname, fty, param, param_ty, body } => {
                let mut m = map.clone();
                let f = self.binder(fname, &mut m);
                let p = self.binder(param, &mut m);
                Term::Fix { fname: f, fty: fty.clone(), param: p, param_ty: param_ty.clone(), body: Box::new(self.go(body, &m)) }
            }
            Term::Let { x, bound, body } => {
                let bound = self.go(bound, map);
                let mut m = map.clone();
                let y = self.binder(x, &mut m);
                Term::Let { x: y, bound: Box::new(bound), body: Box::new(self.go(body, &m)) }
            }
            Term::LetOp { x, op, args, body } => {
                let args = args.iter().map(|a| self.go(a, map)).collect();
                let mut m = map.clone();
                let y = self.binder(x, &mut m);
                Term::LetOp { x: y, op: *op, args, body: Box::new(self.go(body, &m)) }
            }
            Term::LetApp { x, func, arg, body } => {
                let func = self.go(func, map);
                let arg = self.go(arg, map);
                let mut m = map.clone();
                let y = self.binder(x, &mut m);
                Term::LetApp { x: y, func: Box::new(func), arg: Box::new(arg), body: Box::new(self.go(body, &m)) }
            }
            Term::Match { scrut, branches } => Term::Match {
                scrut: Box::new(self.go(scrut, map)),
                branches: branches
                    .iter()
                    .map(|b| {
                        let mut m = map.clone();
                        let vars = b.vars.iter().map(|y| self.binder(y, &mut m)).collect();
                        Branch { ctor: b.ctor, vars, body: self.go(&b.body, &m) }
                    })
                    .collect(),
            },
            Term::App(f, a) => Term::App(Box::new(self.go(f, map)), Box::new(self.go(a, map))),
            Term::OpApp(op, args) => Term::OpApp(*op, args.iter().map(|a| self.go(a, map)).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{normalize_mnf, parse_basic_type, parse_term};

    fn check(src: &str) -> Result<BasicType> {
        basic_check(&BTreeMap::new(), &normalize_mnf(&parse_term(src).unwrap()))
    }

    #[test]
    fn identity_on_nat() {
        assert_eq!(check("fun (x:nat) -> x").unwrap(), parse_basic_type("nat -> nat").unwrap());
    }

    #[test]
    fn bool_is_not_a_number() {
        assert!(matches!(check("let x = true in x + 1"), Err(Error::BasicType { .. })));
    }

    #[test]
    fn polymorphic_pieces_are_resolved_by_context() {
        assert_eq!(check("let l = [] in true :: l").unwrap(), parse_basic_type("bool list").unwrap());
        assert_eq!(check("let x = err in x && true").unwrap(), parse_basic_type("bool").unwrap());
        assert_eq!(check("if 1 == 2 then Leaf else Node (true, Leaf, Leaf)").unwrap(), parse_basic_type("bool tree").unwrap());
    }

    #[test]
    fn binder_types_are_reported() {
        let t = normalize_mnf(&parse_term("let n = int_gen () in let b = n mod 2 == 0 in if b then err else n").unwrap());
        let info = basic_info(&BTreeMap::new(), &t).unwrap();
        assert_eq!(info.binders["n"], BasicType::Base(BaseType::Int));
        assert_eq!(info.binders["b"], BasicType::Base(BaseType::Bool));
        assert_eq!(info.result, Some(BasicType::Base(BaseType::Int)));
    }

    #[test]
    fn shadowed_binders_are_renamed() {
        let t = parse_term("let x = 1 in let x = x + 1 in x").unwrap();
        let u = uniquify(&t, &BTreeSet::new());
        match &u {
            Term::Let { x, body, .. } => match &**body {
                Term::LetOp { x: y, args, body, .. } => {
                    assert_ne!(x, y);
                    assert_eq!(args[0], Term::Var(x.clone()));
                    assert_eq!(**body, Term::Var(y.clone()));
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }
}
