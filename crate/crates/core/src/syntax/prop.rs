//! Qualifier language: linear integer arithmetic, uninterpreted method
//! predicates and first-order quantifiers.

use std::collections::BTreeSet;
use std::fmt;

use super::fresh::global_fresh;
use super::types::BaseType;

/// The distinguished refinement variable.
pub const NU: &str = "ν";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(String),
    Int(i64),
    Bool(bool),
    Unit,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Mod(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn eval(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    Top,
    Bot,
    /// A boolean-sorted expression used as a proposition.
    Atom(Expr),
    Cmp(CmpOp, Expr, Expr),
    Pred(String, Vec<Expr>),
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
    Implies(Box<Prop>, Box<Prop>),
    Iff(Box<Prop>, Box<Prop>),
    Forall(String, BaseType, Box<Prop>),
    Exists(String, BaseType, Box<Prop>),
}

/// Euclidean remainder, shared by the interpreter and the SMT encoding.
pub fn euclid_mod(a: i64, b: i64) -> Option<i64> {
    if b == 0 {
        None
    } else {
        Some(a.rem_euclid(b))
    }
}

impl Expr {
    pub fn var(x: impl Into<String>) -> Self {
        Expr::Var(x.into())
    }

    pub fn nu() -> Self {
        Expr::Var(NU.to_string())
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn modulo(a: Expr, b: Expr) -> Self {
        Expr::Mod(Box::new(a), Box::new(b))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Int(_) | Expr::Bool(_) | Expr::Unit => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Mod(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Expr::Neg(a) => a.collect(out),
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        match self {
            Expr::Var(y) => y == x,
            Expr::Int(_) | Expr::Bool(_) | Expr::Unit => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Mod(a, b) => {
                a.mentions(x) || b.mentions(x)
            }
            Expr::Neg(a) => a.mentions(x),
        }
    }

    pub fn subst(&self, x: &str, e: &Expr) -> Expr {
        match self {
            Expr::Var(y) if y == x => e.clone(),
            Expr::Var(_) | Expr::Int(_) | Expr::Bool(_) | Expr::Unit => self.clone(),
            Expr::Add(a, b) => Expr::Add(Box::new(a.subst(x, e)), Box::new(b.subst(x, e))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.subst(x, e)), Box::new(b.subst(x, e))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.subst(x, e)), Box::new(b.subst(x, e))),
            Expr::Mod(a, b) => Expr::Mod(Box::new(a.subst(x, e)), Box::new(b.subst(x, e))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.subst(x, e))),
        }
    }

    /// Constant folding over integer literals.
    pub fn fold(&self) -> Expr {
        let bin = |a: &Expr, b: &Expr, f: fn(i64, i64) -> Option<i64>, mk: fn(Box<Expr>, Box<Expr>) -> Expr| {
            let (a, b) = (a.fold(), b.fold());
            match (&a, &b) {
                (Expr::Int(x), Expr::Int(y)) => match f(*x, *y) {
                    Some(v) => Expr::Int(v),
                    None => mk(Box::new(a), Box::new(b)),
                },
                _ => mk(Box::new(a), Box::new(b)),
            }
        };
        match self {
            Expr::Add(a, b) => bin(a, b, i64::checked_add, Expr::Add),
            Expr::Sub(a, b) => bin(a, b, i64::checked_sub, Expr::Sub),
            Expr::Mul(a, b) => bin(a, b, i64::checked_mul, Expr::Mul),
            Expr::Mod(a, b) => bin(a, b, euclid_mod, Expr::Mod),
            Expr::Neg(a) => match a.fold() {
                Expr::Int(v) => Expr::Int(-v),
                other => Expr::Neg(Box::new(other)),
            },
            _ => self.clone(),
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Expr::Var(_) | Expr::Int(_) | Expr::Bool(_) | Expr::Unit)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |f: &mut fmt::Formatter<'_>, e: &Expr| {
            if e.is_atomic() && !matches!(e, Expr::Int(n) if *n < 0) {
                write!(f, "{e}")
            } else {
                write!(f, "({e})")
            }
        };
        match self {
            Expr::Var(x) => write!(f, "{x}"),
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Unit => write!(f, "()"),
            Expr::Add(a, b) => {
                sub(f, a)?;
                write!(f, " + ")?;
                sub(f, b)
            }
            Expr::Sub(a, b) => {
                sub(f, a)?;
                write!(f, " - ")?;
                sub(f, b)
            }
            Expr::Mul(a, b) => {
                sub(f, a)?;
                write!(f, " * ")?;
                sub(f, b)
            }
            Expr::Mod(a, b) => {
                sub(f, a)?;
                write!(f, " mod ")?;
                sub(f, b)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                write!(f, "({a})")
            }
        }
    }
}

impl Prop {
    pub fn not(p: Prop) -> Prop {
        Prop::Not(Box::new(p))
    }

    pub fn implies(a: Prop, b: Prop) -> Prop {
        Prop::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Prop, b: Prop) -> Prop {
        Prop::Iff(Box::new(a), Box::new(b))
    }

    pub fn and2(a: Prop, b: Prop) -> Prop {
        Prop::And(vec![a, b])
    }

    pub fn or2(a: Prop, b: Prop) -> Prop {
        Prop::Or(vec![a, b])
    }

    pub fn forall(x: impl Into<String>, b: BaseType, body: Prop) -> Prop {
        Prop::Forall(x.into(), b, Box::new(body))
    }

    pub fn exists(x: impl Into<String>, b: BaseType, body: Prop) -> Prop {
        Prop::Exists(x.into(), b, Box::new(body))
    }

    pub fn eq(a: Expr, b: Expr) -> Prop {
        Prop::Cmp(CmpOp::Eq, a, b)
    }

    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Prop {
        Prop::Cmp(op, a, b)
    }

    pub fn pred(name: impl Into<String>, args: Vec<Expr>) -> Prop {
        Prop::Pred(name.into(), args)
    }

    /// `ν = e`
    pub fn nu_eq(e: Expr) -> Prop {
        Prop::eq(Expr::nu(), e)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut Vec::new(), &mut out);
        out
    }

    fn collect(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut push_expr = |e: &Expr, bound: &Vec<String>| {
            for v in e.free_vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Prop::Top | Prop::Bot => {}
            Prop::Atom(e) => push_expr(e, bound),
            Prop::Cmp(_, a, b) => {
                push_expr(a, bound);
                push_expr(b, bound);
            }
            Prop::Pred(_, args) => {
                for a in args {
                    push_expr(a, bound);
                }
            }
            Prop::Not(p) => p.collect(bound, out),
            Prop::And(ps) | Prop::Or(ps) => {
                for p in ps {
                    p.collect(bound, out);
                }
            }
            Prop::Implies(a, b) | Prop::Iff(a, b) => {
                a.collect(bound, out);
                b.collect(bound, out);
            }
            Prop::Forall(x, _, p) | Prop::Exists(x, _, p) => {
                bound.push(x.clone());
                p.collect(bound, out);
                bound.pop();
            }
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.free_vars().contains(x)
    }

    /// Capture-avoiding substitution `self[x ↦ e]`.
    pub fn subst(&self, x: &str, e: &Expr) -> Prop {
        if !self.mentions(x) {
            return self.clone();
        }
        match self {
            Prop::Top | Prop::Bot => self.clone(),
            Prop::Atom(a) => Prop::Atom(a.subst(x, e)),
            Prop::Cmp(op, a, b) => Prop::Cmp(*op, a.subst(x, e), b.subst(x, e)),
            Prop::Pred(n, args) => Prop::Pred(n.clone(), args.iter().map(|a| a.subst(x, e)).collect()),
            Prop::Not(p) => Prop::not(p.subst(x, e)),
            Prop::And(ps) => Prop::And(ps.iter().map(|p| p.subst(x, e)).collect()),
            Prop::Or(ps) => Prop::Or(ps.iter().map(|p| p.subst(x, e)).collect()),
            Prop::Implies(a, b) => Prop::implies(a.subst(x, e), b.subst(x, e)),
            Prop::Iff(a, b) => Prop::iff(a.subst(x, e), b.subst(x, e)),
            Prop::Forall(y, s, p) | Prop::Exists(y, s, p) => {
                let is_forall = matches!(self, Prop::Forall(..));
                let (y, p) = if e.mentions(y) {
                    let fresh = global_fresh(y);
                    let renamed = p.subst(y, &Expr::Var(fresh.clone()));
                    (fresh, renamed)
                } else {
                    (y.clone(), (**p).clone())
                };
                let body = p.subst(x, e);
                if is_forall {
                    Prop::forall(y, s.clone(), body)
                } else {
                    Prop::exists(y, s.clone(), body)
                }
            }
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Prop {
        self.subst(from, &Expr::Var(to.to_string()))
    }

    /// Syntactic equality modulo renaming of bound variables.
    pub fn alpha_eq(&self, other: &Prop) -> bool {
        self.canonical(0) == other.canonical(0)
    }

    fn canonical(&self, depth: usize) -> Prop {
        match self {
            Prop::Forall(x, s, p) | Prop::Exists(x, s, p) => {
                let name = format!("#{depth}");
                let body = p.rename(x, &name).canonical(depth + 1);
                if matches!(self, Prop::Forall(..)) {
                    Prop::forall(name, s.clone(), body)
                } else {
                    Prop::exists(name, s.clone(), body)
                }
            }
            Prop::Not(p) => Prop::not(p.canonical(depth)),
            Prop::And(ps) => Prop::And(ps.iter().map(|p| p.canonical(depth)).collect()),
            Prop::Or(ps) => Prop::Or(ps.iter().map(|p| p.canonical(depth)).collect()),
            Prop::Implies(a, b) => Prop::implies(a.canonical(depth), b.canonical(depth)),
            Prop::Iff(a, b) => Prop::iff(a.canonical(depth), b.canonical(depth)),
            _ => self.clone(),
        }
    }

    /// Predicate symbols occurring anywhere in the proposition.
    pub fn predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |p| {
            if let Prop::Pred(n, _) = p {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Integer literals occurring anywhere in the proposition.
    pub fn int_literals(&self) -> BTreeSet<i64> {
        fn lits(e: &Expr, out: &mut BTreeSet<i64>) {
            match e {
                Expr::Int(n) => {
                    out.insert(*n);
                }
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Mod(a, b) => {
                    lits(a, out);
                    lits(b, out);
                }
                Expr::Neg(a) => lits(a, out),
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        self.visit(&mut |p| match p {
            Prop::Atom(e) => lits(e, &mut out),
            Prop::Cmp(_, a, b) => {
                lits(a, &mut out);
                lits(b, &mut out);
            }
            Prop::Pred(_, args) => args.iter().for_each(|a| lits(a, &mut out)),
            _ => {}
        });
        out
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Prop)) {
        f(self);
        match self {
            Prop::Not(p) | Prop::Forall(_, _, p) | Prop::Exists(_, _, p) => p.visit(f),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|p| p.visit(f)),
            Prop::Implies(a, b) | Prop::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn has_quantifier(&self) -> bool {
        let mut found = false;
        self.visit(&mut |p| {
            if matches!(p, Prop::Forall(..) | Prop::Exists(..)) {
                found = true;
            }
        });
        found
    }

    /// Logical simplification preserving equivalence: unit laws for ⊤/⊥,
    /// flattening, double negation, vacuous quantifiers, constant comparisons
    /// and the one-point rule for equalities on quantified variables.
    pub fn simplify(&self) -> Prop {
        match self {
            Prop::Top | Prop::Bot | Prop::Pred(..) => self.clone(),
            Prop::Atom(e) => match e.fold() {
                Expr::Bool(true) => Prop::Top,
                Expr::Bool(false) => Prop::Bot,
                e => Prop::Atom(e),
            },
            Prop::Cmp(op, a, b) => {
                let (a, b) = (a.fold(), b.fold());
                match (&a, &b) {
                    (Expr::Int(x), Expr::Int(y)) => bool_prop(op.eval(*x, *y)),
                    (Expr::Bool(x), Expr::Bool(y)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                        bool_prop((x == y) == (*op == CmpOp::Eq))
                    }
                    (Expr::Unit, Expr::Unit) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                        bool_prop(*op == CmpOp::Eq)
                    }
                    _ if a == b && matches!(op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge) => Prop::Top,
                    _ if a == b && matches!(op, CmpOp::Ne | CmpOp::Lt | CmpOp::Gt) => Prop::Bot,
                    (Expr::Var(_), Expr::Bool(true)) if *op == CmpOp::Eq => Prop::Atom(a),
                    (Expr::Var(_), Expr::Bool(false)) if *op == CmpOp::Eq => Prop::not(Prop::Atom(a)),
                    _ => Prop::Cmp(*op, a, b),
                }
            }
            Prop::Not(p) => match p.simplify() {
                Prop::Top => Prop::Bot,
                Prop::Bot => Prop::Top,
                Prop::Not(q) => *q,
                q => Prop::not(q),
            },
            Prop::And(ps) => {
                let mut out: Vec<Prop> = Vec::new();
                for p in ps {
                    match p.simplify() {
                        Prop::Top => {}
                        Prop::Bot => return Prop::Bot,
                        Prop::And(qs) => {
                            for q in qs {
                                if !out.contains(&q) {
                                    out.push(q);
                                }
                            }
                        }
                        q => {
                            if !out.contains(&q) {
                                out.push(q);
                            }
                        }
                    }
                }
                match out.len() {
                    0 => Prop::Top,
                    1 => out.pop().unwrap(),
                    _ => Prop::And(out),
                }
            }
            Prop::Or(ps) => {
                let mut out: Vec<Prop> = Vec::new();
                for p in ps {
                    match p.simplify() {
                        Prop::Bot => {}
                        Prop::Top => return Prop::Top,
                        Prop::Or(qs) => {
                            for q in qs {
                                if !out.contains(&q) {
                                    out.push(q);
                                }
                            }
                        }
                        q => {
                            if !out.contains(&q) {
                                out.push(q);
                            }
                        }
                    }
                }
                match out.len() {
                    0 => Prop::Bot,
                    1 => out.pop().unwrap(),
                    _ => Prop::Or(out),
                }
            }
            Prop::Implies(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (&a, &b) {
                    (Prop::Top, _) => b,
                    (Prop::Bot, _) | (_, Prop::Top) => Prop::Top,
                    (_, Prop::Bot) => Prop::not(a).simplify(),
                    _ if a == b => Prop::Top,
                    _ => Prop::implies(a, b),
                }
            }
            Prop::Iff(a, b) => {
                let (a, b) = (a.simplify(), b.simplify());
                match (&a, &b) {
                    (Prop::Top, _) => b,
                    (_, Prop::Top) => a,
                    (Prop::Bot, _) => Prop::not(b).simplify(),
                    (_, Prop::Bot) => Prop::not(a).simplify(),
                    _ if a == b => Prop::Top,
                    _ => Prop::iff(a, b),
                }
            }
            Prop::Exists(x, s, p) => {
                let body = p.simplify();
                if !body.mentions(x) {
                    return body;
                }
                if let Some(r) = one_point_exists(x, s, &body) {
                    return r.simplify();
                }
                Prop::exists(x.clone(), s.clone(), body)
            }
            Prop::Forall(x, s, p) => {
                let body = p.simplify();
                if !body.mentions(x) {
                    return body;
                }
                if let Some(r) = one_point_forall(x, s, &body) {
                    return r.simplify();
                }
                Prop::forall(x.clone(), s.clone(), body)
            }
        }
    }
}

fn bool_prop(b: bool) -> Prop {
    if b {
        Prop::Top
    } else {
        Prop::Bot
    }
}

/// Sort membership side condition for a term substituted for a bound
/// variable of base type `s`.
pub fn sort_guard(s: &BaseType, e: &Expr) -> Prop {
    match s {
        BaseType::Nat => Prop::cmp(CmpOp::Ge, e.clone(), Expr::Int(0)),
        _ => Prop::Top,
    }
}

fn defining_eq(x: &str, p: &Prop) -> Option<Expr> {
    if let Prop::Cmp(CmpOp::Eq, a, b) = p {
        match (a, b) {
            (Expr::Var(y), t) if y == x && !t.mentions(x) => return Some(t.clone()),
            (t, Expr::Var(y)) if y == x && !t.mentions(x) => return Some(t.clone()),
            _ => {}
        }
    }
    None
}

/// `∃x. x = t ∧ ψ` ⇒ `guard(t) ∧ ψ[x↦t]`
fn one_point_exists(x: &str, s: &BaseType, body: &Prop) -> Option<Prop> {
    let conjuncts: Vec<Prop> = match body {
        Prop::And(ps) => ps.clone(),
        p => vec![p.clone()],
    };
    let idx = conjuncts.iter().position(|p| defining_eq(x, p).is_some())?;
    let t = defining_eq(x, &conjuncts[idx]).unwrap();
    let mut rest: Vec<Prop> = vec![sort_guard(s, &t)];
    for (i, p) in conjuncts.iter().enumerate() {
        if i != idx {
            rest.push(p.subst(x, &t));
        }
    }
    Some(Prop::And(rest))
}

/// `∀x. (x = t ∧ ψ) ⟹ χ` ⇒ `guard(t) ∧ ψ[x↦t] ⟹ χ[x↦t]`
fn one_point_forall(x: &str, s: &BaseType, body: &Prop) -> Option<Prop> {
    let Prop::Implies(lhs, rhs) = body else { return None };
    let conjuncts: Vec<Prop> = match &**lhs {
        Prop::And(ps) => ps.clone(),
        p => vec![p.clone()],
    };
    let idx = conjuncts.iter().position(|p| defining_eq(x, p).is_some())?;
    let t = defining_eq(x, &conjuncts[idx]).unwrap();
    let mut hyps: Vec<Prop> = vec![sort_guard(s, &t)];
    for (i, p) in conjuncts.iter().enumerate() {
        if i != idx {
            hyps.push(p.subst(x, &t));
        }
    }
    Some(Prop::implies(Prop::And(hyps), rhs.subst(x, &t)))
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, p: &Prop| {
            if matches!(p, Prop::Top | Prop::Bot | Prop::Atom(_) | Prop::Cmp(..) | Prop::Pred(..) | Prop::Not(_)) {
                write!(f, "{p}")
            } else {
                write!(f, "({p})")
            }
        };
        match self {
            Prop::Top => write!(f, "true"),
            Prop::Bot => write!(f, "false"),
            Prop::Atom(e) => write!(f, "{e}"),
            Prop::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Prop::Pred(n, args) => {
                write!(f, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Prop::Not(p) => {
                write!(f, "not ")?;
                child(f, p)
            }
            Prop::And(ps) | Prop::Or(ps) => {
                if ps.is_empty() {
                    return write!(f, "{}", if matches!(self, Prop::And(_)) { "true" } else { "false" });
                }
                let sep = if matches!(self, Prop::And(_)) { " && " } else { " || " };
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    child(f, p)?;
                }
                Ok(())
            }
            Prop::Implies(a, b) => {
                child(f, a)?;
                write!(f, " ==> ")?;
                child(f, b)
            }
            Prop::Iff(a, b) => {
                child(f, a)?;
                write!(f, " <=> ")?;
                child(f, b)
            }
            Prop::Forall(x, s, p) => write!(f, "forall {x}:{s}. {p}"),
            Prop::Exists(x, s, p) => write!(f, "exists {x}:{s}. {p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Expr {
        Expr::var(x)
    }

    #[test]
    fn substitution_avoids_capture() {
        let p = Prop::exists("y", BaseType::Int, Prop::eq(v("x"), v("y")));
        let q = p.subst("x", &v("y"));
        match &q {
            Prop::Exists(b, _, body) => {
                assert_ne!(b, "y");
                assert!(body.mentions("y"));
            }
            _ => panic!("shape changed"),
        }
        assert!(q.free_vars().contains("y"));
    }

    #[test]
    fn bound_variable_shadows_substitution() {
        let p = Prop::forall("x", BaseType::Int, Prop::eq(v("x"), Expr::Int(1)));
        assert_eq!(p.subst("x", &Expr::Int(5)), p);
    }

    #[test]
    fn alpha_equivalence_ignores_binder_names() {
        let a = Prop::forall("u", BaseType::Int, Prop::cmp(CmpOp::Lt, v("u"), v("z")));
        let b = Prop::forall("w", BaseType::Int, Prop::cmp(CmpOp::Lt, v("w"), v("z")));
        let c = Prop::forall("z", BaseType::Int, Prop::cmp(CmpOp::Lt, v("z"), v("z")));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn one_point_rule_eliminates_existential() {
        let p = Prop::exists(
            "x",
            BaseType::Nat,
            Prop::And(vec![Prop::eq(v("x"), Expr::Int(3)), Prop::nu_eq(v("x"))]),
        );
        assert_eq!(p.simplify(), Prop::nu_eq(Expr::Int(3)));
    }

    #[test]
    fn one_point_keeps_nat_guard_for_open_terms() {
        let p = Prop::exists("x", BaseType::Nat, Prop::And(vec![Prop::eq(v("x"), v("y")), Prop::nu_eq(v("x"))]));
        let s = p.simplify();
        assert_eq!(
            s,
            Prop::And(vec![Prop::cmp(CmpOp::Ge, v("y"), Expr::Int(0)), Prop::nu_eq(v("y"))])
        );
    }

    #[test]
    fn simplify_folds_constants_and_units() {
        let p = Prop::And(vec![Prop::Top, Prop::cmp(CmpOp::Lt, Expr::Int(1), Expr::Int(2)), Prop::Atom(v("b"))]);
        assert_eq!(p.simplify(), Prop::Atom(v("b")));
        let q = Prop::Or(vec![Prop::Bot, Prop::eq(Expr::modulo(Expr::Int(-3), Expr::Int(2)), Expr::Int(1))]);
        assert_eq!(q.simplify(), Prop::Top);
    }

    #[test]
    fn euclidean_mod_is_nonnegative() {
        assert_eq!(euclid_mod(-3, 2), Some(1));
        assert_eq!(euclid_mod(-4, 2), Some(0));
        assert_eq!(euclid_mod(5, 0), None);
    }
}
