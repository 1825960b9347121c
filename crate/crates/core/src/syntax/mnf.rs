//! Monadic normal form conversion: every operator and application argument
//! becomes a variable or base literal, and every application is let-bound.

use super::fresh::Fresh;
use super::parse::mk_let;
use super::term::{Branch, Term};

pub fn normalize_mnf(t: &Term) -> Term {
    Normalizer { fresh: Fresh::new() }.norm(t)
}

/// Like [`normalize_mnf`] but drawing names from an existing generator.
pub fn normalize_mnf_with(t: &Term, fresh: &mut Fresh) -> Term {
    let mut n = Normalizer { fresh: std::mem::take(fresh) };
    let out = n.norm(t);
    *fresh = n.fresh;
    out
}

struct Normalizer {
    fresh: Fresh,
}

fn is_atom(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Const(c) => c.is_base_literal(),
        _ => false,
    }
}

type Cont<'a> = Box<dyn FnOnce(&mut Normalizer, Vec<Term>) -> Term + 'a>;

impl Normalizer {
    fn norm(&mut self, t: &Term) -> Term {
        match t {
            Term::Const(_) | Term::Op(_) | Term::Var(_) | Term::Err => t.clone(),
            Term::Lam { param, param_ty, body } => {
                Term::Lam { param: param.clone(), param_ty: param_ty.clone(), body: Box::new(self.norm(body)) }
            }
            Term::Fix { fname, fty, param, param_ty, body } => Term::Fix {
                fname: fname.clone(),
                fty: fty.clone(),
                param: param.clone(),
                param_ty: param_ty.clone(),
                body: Box::new(self.norm(body)),
            },
            Term::Let { x, bound, body } => {
                let body = self.norm(body);
                self.bind(x.clone(), bound, body)
            }
            Term::LetOp { x, op, args, body } => {
                let body = self.norm(body);
                self.bind(x.clone(), &Term::OpApp(*op, args.clone()), body)
            }
            Term::LetApp { x, func, arg, body } => {
                let body = self.norm(body);
                self.bind(x.clone(), &Term::App(func.clone(), arg.clone()), body)
            }
            Term::Match { scrut, branches } => {
                let branches: Vec<Branch> = branches
                    .iter()
                    .map(|b| Branch { ctor: b.ctor, vars: b.vars.clone(), body: self.norm(&b.body) })
                    .collect();
                self.atoms(
                    vec![(**scrut).clone()],
                    Box::new(move |_, mut a| Term::Match { scrut: Box::new(a.pop().unwrap()), branches }),
                )
            }
            Term::App(..) | Term::OpApp(..) => {
                let r = self.fresh.name("r");
                self.bind(r.clone(), t, Term::Var(r))
            }
        }
    }

    /// `let x = bound in body` with `body` already normalized.
    fn bind(&mut self, x: String, bound: &Term, body: Term) -> Term {
        match bound {
            Term::OpApp(op, args) => {
                let op = *op;
                self.atoms(args.clone(), Box::new(move |_, args| Term::LetOp { x, op, args, body: Box::new(body) }))
            }
            Term::App(f, a) => {
                let f = (**f).clone();
                let a = (**a).clone();
                self.func(
                    f,
                    Box::new(move |n, mut fv| {
                        let fv = fv.pop().unwrap();
                        n.atoms(
                            vec![a],
                            Box::new(move |_, mut av| Term::LetApp {
                                x,
                                func: Box::new(fv),
                                arg: Box::new(av.pop().unwrap()),
                                body: Box::new(body),
                            }),
                        )
                    }),
                )
            }
            other => {
                let bound = self.norm(other);
                mk_let(x, bound, body)
            }
        }
    }

    /// Normalizes each term to an atom, let-binding the non-atomic ones, and
    /// hands the atoms to `k`.
    fn atoms<'a>(&mut self, ts: Vec<Term>, k: Cont<'a>) -> Term {
        let mut bindings: Vec<(String, Term)> = Vec::new();
        let mut atoms = Vec::new();
        for t in ts {
            if is_atom(&t) {
                atoms.push(t);
            } else {
                let y = self.fresh.name("t");
                atoms.push(Term::Var(y.clone()));
                bindings.push((y, t));
            }
        }
        let mut out = k(self, atoms);
        for (y, t) in bindings.into_iter().rev() {
            out = self.bind(y, &t, out);
        }
        out
    }

    /// Like [`Self::atoms`] for the function position, which also admits
    /// operator values and lambdas.
    fn func<'a>(&mut self, f: Term, k: Cont<'a>) -> Term {
        match f {
            Term::Var(_) | Term::Op(_) => k(self, vec![f]),
            Term::Lam { .. } | Term::Fix { .. } => {
                let f = self.norm(&f);
                k(self, vec![f])
            }
            other => {
                let y = self.fresh.name("f");
                let body = k(self, vec![Term::Var(y.clone())]);
                self.bind(y, &other, body)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_term;
    use super::*;

    #[test]
    fn nested_applications_are_let_bound() {
        let t = parse_term("Node (x, bst_gen lo x, bst_gen x hi)").unwrap();
        assert!(!t.is_mnf());
        let n = normalize_mnf(&t);
        assert!(n.is_mnf(), "{n}");
    }

    #[test]
    fn normalization_is_idempotent_on_mnf() {
        let t = parse_term("let x = nat_gen () in let y = x + 1 in y").unwrap();
        assert!(t.is_mnf());
        assert_eq!(normalize_mnf(&t), t);
    }

    #[test]
    fn data_constants_in_operand_position_are_bound() {
        let t = parse_term("Cons (1, [])").unwrap();
        // Closed constructor applications fold to constants.
        assert!(matches!(t, Term::Const(_)));
        let u = parse_term("Cons (x, [])").unwrap();
        let n = normalize_mnf(&u);
        assert!(n.is_mnf(), "{n}");
    }

    #[test]
    fn evaluation_order_is_left_to_right() {
        let t = parse_term("f (g 1) (h 2)").unwrap();
        let n = normalize_mnf(&t).to_string();
        let gi = n.find("g 1").unwrap();
        let hi = n.find("h 2").unwrap();
        assert!(gi < hi, "{n}");
    }
}
