//! Terms of the core language, in (and around) monadic normal form.

use std::collections::BTreeSet;
use std::fmt;

use super::fresh::global_fresh;
use super::types::BasicType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctor {
    True,
    False,
    Zero,
    Succ,
    Nil,
    Cons,
    Leaf,
    Node,
}

impl Ctor {
    pub const ALL: [Ctor; 8] =
        [Ctor::True, Ctor::False, Ctor::Zero, Ctor::Succ, Ctor::Nil, Ctor::Cons, Ctor::Leaf, Ctor::Node];

    pub fn name(self) -> &'static str {
        match self {
            Ctor::True => "true",
            Ctor::False => "false",
            Ctor::Zero => "O",
            Ctor::Succ => "S",
            Ctor::Nil => "Nil",
            Ctor::Cons => "Cons",
            Ctor::Leaf => "Leaf",
            Ctor::Node => "Node",
        }
    }

    pub fn from_name(s: &str) -> Option<Ctor> {
        Some(match s {
            "true" => Ctor::True,
            "false" => Ctor::False,
            "O" | "Z" | "Zero" => Ctor::Zero,
            "S" | "Succ" => Ctor::Succ,
            "Nil" | "[]" => Ctor::Nil,
            "Cons" | "::" => Ctor::Cons,
            "Leaf" => Ctor::Leaf,
            "Node" => Ctor::Node,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Ctor::True | Ctor::False | Ctor::Zero | Ctor::Nil | Ctor::Leaf => 0,
            Ctor::Succ => 1,
            Ctor::Cons => 2,
            Ctor::Node => 3,
        }
    }

    /// Constructors of the same datatype, in declaration order.
    pub fn siblings(self) -> &'static [Ctor] {
        match self {
            Ctor::True | Ctor::False => &[Ctor::True, Ctor::False],
            Ctor::Zero | Ctor::Succ => &[Ctor::Zero, Ctor::Succ],
            Ctor::Nil | Ctor::Cons => &[Ctor::Nil, Ctor::Cons],
            Ctor::Leaf | Ctor::Node => &[Ctor::Leaf, Ctor::Node],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    NatGen,
    IntGen,
    BoolGen,
    IntRange,
}

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Mod => "mod",
            Prim::Eq => "==",
            Prim::Ne => "!=",
            Prim::Lt => "<",
            Prim::Le => "<=",
            Prim::Gt => ">",
            Prim::Ge => ">=",
            Prim::And => "&&",
            Prim::Or => "||",
            Prim::Not => "not",
            Prim::NatGen => "nat_gen",
            Prim::IntGen => "int_gen",
            Prim::BoolGen => "bool_gen",
            Prim::IntRange => "int_range",
        }
    }

    pub fn from_name(s: &str) -> Option<Prim> {
        Some(match s {
            "+" => Prim::Add,
            "-" => Prim::Sub,
            "*" => Prim::Mul,
            "mod" => Prim::Mod,
            "==" | "=" => Prim::Eq,
            "!=" | "<>" => Prim::Ne,
            "<" => Prim::Lt,
            "<=" => Prim::Le,
            ">" => Prim::Gt,
            ">=" => Prim::Ge,
            "&&" => Prim::And,
            "||" => Prim::Or,
            "not" => Prim::Not,
            "nat_gen" => Prim::NatGen,
            "int_gen" => Prim::IntGen,
            "bool_gen" => Prim::BoolGen,
            "int_range" => Prim::IntRange,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Prim::Not | Prim::NatGen | Prim::IntGen | Prim::BoolGen => 1,
            _ => 2,
        }
    }

    pub fn is_generator(self) -> bool {
        matches!(self, Prim::NatGen | Prim::IntGen | Prim::BoolGen | Prim::IntRange)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Ctor(Ctor),
    Prim(Prim),
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Ctor(c) => c.arity(),
            Op::Prim(p) => p.arity(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Ctor(c) => c.name(),
            Op::Prim(p) => p.name(),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Prim(p) if !p.name().chars().next().unwrap().is_alphabetic() => write!(f, "({})", p.name()),
            _ => write!(f, "{}", self.name()),
        }
    }
}

/// Closed first-order values. Naturals and integers share `Int`; booleans
/// are `Bool` rather than nullary constructors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Unit,
    Bool(bool),
    Int(i64),
    Data(Ctor, Vec<Constant>),
}

impl Constant {
    pub fn nil() -> Self {
        Constant::Data(Ctor::Nil, vec![])
    }

    pub fn cons(h: Constant, t: Constant) -> Self {
        Constant::Data(Ctor::Cons, vec![h, t])
    }

    pub fn leaf() -> Self {
        Constant::Data(Ctor::Leaf, vec![])
    }

    pub fn node(x: Constant, l: Constant, r: Constant) -> Self {
        Constant::Data(Ctor::Node, vec![x, l, r])
    }

    pub fn is_base_literal(&self) -> bool {
        !matches!(self, Constant::Data(..))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Constant::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Constant::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Elements of a list constant, head first.
    pub fn list_items(&self) -> Option<Vec<&Constant>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Constant::Data(Ctor::Nil, _) => return Some(out),
                Constant::Data(Ctor::Cons, a) => {
                    out.push(&a[0]);
                    cur = &a[1];
                }
                _ => return None,
            }
        }
    }

    pub fn from_list(items: Vec<Constant>) -> Constant {
        items.into_iter().rev().fold(Constant::nil(), |acc, h| Constant::cons(h, acc))
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Unit => write!(f, "()"),
            Constant::Bool(b) => write!(f, "{b}"),
            Constant::Int(n) if *n < 0 => write!(f, "({n})"),
            Constant::Int(n) => write!(f, "{n}"),
            Constant::Data(Ctor::Nil, _) => write!(f, "[]"),
            Constant::Data(Ctor::Cons, _) if self.list_items().is_some() => {
                let items = self.list_items().unwrap();
                write!(f, "[")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Constant::Data(c, args) if args.is_empty() => write!(f, "{}", c.name()),
            Constant::Data(c, args) => {
                write!(f, "{} (", c.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub ctor: Ctor,
    pub vars: Vec<String>,
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Constant),
    Op(Op),
    Var(String),
    Lam { param: String, param_ty: BasicType, body: Box<Term> },
    Fix { fname: String, fty: BasicType, param: String, param_ty: BasicType, body: Box<Term> },
    Err,
    Let { x: String, bound: Box<Term>, body: Box<Term> },
    LetOp { x: String, op: Op, args: Vec<Term>, body: Box<Term> },
    LetApp { x: String, func: Box<Term>, arg: Box<Term>, body: Box<Term> },
    Match { scrut: Box<Term>, branches: Vec<Branch> },
    /// Surface-only application; removed by MNF normalization.
    App(Box<Term>, Box<Term>),
    /// Surface-only saturated operator application.
    OpApp(Op, Vec<Term>),
}

impl Term {
    pub fn var(x: impl Into<String>) -> Term {
        Term::Var(x.into())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Constant::Int(n))
    }

    pub fn unit() -> Term {
        Term::Const(Constant::Unit)
    }

    pub fn let_(x: impl Into<String>, bound: Term, body: Term) -> Term {
        Term::Let { x: x.into(), bound: Box::new(bound), body: Box::new(body) }
    }

    pub fn let_op(x: impl Into<String>, op: Op, args: Vec<Term>, body: Term) -> Term {
        Term::LetOp { x: x.into(), op, args, body: Box::new(body) }
    }

    pub fn let_app(x: impl Into<String>, func: Term, arg: Term, body: Term) -> Term {
        Term::LetApp { x: x.into(), func: Box::new(func), arg: Box::new(arg), body: Box::new(body) }
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Const(_) | Term::Op(_) | Term::Var(_) | Term::Lam { .. } | Term::Fix { .. })
    }

    /// Operands of lets and matches: variables and base literals.
    fn is_atom(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Const(c) => c.is_base_literal(),
            _ => false,
        }
    }

    /// Monadic normal form check.
    pub fn is_mnf(&self) -> bool {
        match self {
            Term::Const(_) | Term::Op(_) | Term::Var(_) | Term::Err => true,
            Term::Lam { body, .. } | Term::Fix { body, .. } => body.is_mnf(),
            Term::Let { bound, body, .. } => bound.is_mnf() && body.is_mnf(),
            Term::LetOp { op, args, body, .. } => {
                args.len() == op.arity() && args.iter().all(Term::is_atom) && body.is_mnf()
            }
            Term::LetApp { func, arg, body, .. } => {
                let func_ok = match &**func {
                    Term::Var(_) | Term::Op(_) => true,
                    Term::Lam { .. } | Term::Fix { .. } => func.is_mnf(),
                    _ => false,
                };
                func_ok && arg.is_atom() && body.is_mnf()
            }
            Term::Match { scrut, branches } => scrut.is_atom() && branches.iter().all(|b| b.body.is_mnf()),
            Term::App(..) | Term::OpApp(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut Vec::new(), &mut out);
        out
    }

    fn collect(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let with = |bound: &mut Vec<String>, names: &[&String], t: &Term, out: &mut BTreeSet<String>| {
            let n = bound.len();
            bound.extend(names.iter().map(|s| (*s).clone()));
            t.collect(bound, out);
            bound.truncate(n);
        };
        match self {
            Term::Const(_) | Term::Op(_) | Term::Err => {}
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Lam { param, body, .. } => with(bound, &[param], body, out),
            Term::Fix { fname, param, body, .. } => with(bound, &[fname, param], body, out),
            Term::Let { x, bound: b, body } => {
                b.collect(bound, out);
                with(bound, &[x], body, out);
            }
            Term::LetOp { x, args, body, .. } => {
                args.iter().for_each(|a| a.collect(bound, out));
                with(bound, &[x], body, out);
            }
            Term::LetApp { x, func, arg, body } => {
                func.collect(bound, out);
                arg.collect(bound, out);
                with(bound, &[x], body, out);
            }
            Term::Match { scrut, branches } => {
                scrut.collect(bound, out);
                for b in branches {
                    let names: Vec<&String> = b.vars.iter().collect();
                    with(bound, &names, &b.body, out);
                }
            }
            Term::App(f, a) => {
                f.collect(bound, out);
                a.collect(bound, out);
            }
            Term::OpApp(_, args) => args.iter().for_each(|a| a.collect(bound, out)),
        }
    }

    /// Capture-avoiding substitution of a closed value for `x`.
    ///
    /// Values substituted by the interpreter are closed, so binders never
    /// need renaming in that use; open replacements are handled by renaming
    /// any binder that would capture.
    pub fn subst(&self, x: &str, v: &Term) -> Term {
        let vfv = v.free_vars();
        self.subst_inner(x, v, &vfv)
    }

    fn subst_inner(&self, x: &str, v: &Term, vfv: &BTreeSet<String>) -> Term {
        // Rename binder `b` in `body` if it would capture a free variable of `v`.
        let under = |b: &String, body: &Term| -> (String, Term) {
            if vfv.contains(b) {
                let fresh = global_fresh(b);
                let renamed = body.subst_inner(b, &Term::Var(fresh.clone()), &BTreeSet::new());
                (fresh.clone(), renamed.subst_inner(x, v, vfv))
            } else {
                (b.clone(), body.subst_inner(x, v, vfv))
            }
        };
        match self {
            Term::Var(y) if y == x => v.clone(),
            Term::Const(_) | Term::Op(_) | Term::Var(_) | Term::Err => self.clone(),
            Term::Lam { param, param_ty, body } => {
                if param == x {
                    return self.clone();
                }
                let (p, b) = under(param, body);
                Term::Lam { param: p, param_ty: param_ty.clone(), body: Box::new(b) }
            }
            Term::Fix { fname, fty, param, param_ty, body } => {
                if fname == x || param == x {
                    return self.clone();
                }
                let (f, b1) = if vfv.contains(fname) {
                    let fresh = global_fresh(fname);
                    (fresh.clone(), body.subst_inner(fname, &Term::Var(fresh), &BTreeSet::new()))
                } else {
                    (fname.clone(), (**body).clone())
                };
                let (p, b) = under(param, &b1);
                Term::Fix { fname: f, fty: fty.clone(), param: p, param_ty: param_ty.clone(), body: Box::new(b) }
            }
            Term::Let { x: y, bound, body } => {
                let bound = bound.subst_inner(x, v, vfv);
                if y == x {
                    return Term::Let { x: y.clone(), bound: Box::new(bound), body: body.clone() };
                }
                let (y2, b) = under(y, body);
                Term::Let { x: y2, bound: Box::new(bound), body: Box::new(b) }
            }
            Term::LetOp { x: y, op, args, body } => {
                let args = args.iter().map(|a| a.subst_inner(x, v, vfv)).collect();
                if y == x {
                    return Term::LetOp { x: y.clone(), op: *op, args, body: body.clone() };
                }
                let (y2, b) = under(y, body);
                Term::LetOp { x: y2, op: *op, args, body: Box::new(b) }
            }
            Term::LetApp { x: y, func, arg, body } => {
                let func = func.subst_inner(x, v, vfv);
                let arg = arg.subst_inner(x, v, vfv);
                if y == x {
                    return Term::LetApp { x: y.clone(), func: Box::new(func), arg: Box::new(arg), body: body.clone() };
                }
                let (y2, b) = under(y, body);
                Term::LetApp { x: y2, func: Box::new(func), arg: Box::new(arg), body: Box::new(b) }
            }
            Term::Match { scrut, branches } => {
                let scrut = scrut.subst_inner(x, v, vfv);
                let branches = branches
                    .iter()
                    .map(|br| {
                        if br.vars.iter().any(|y| y == x) {
                            return br.clone();
                        }
                        let mut vars = br.vars.clone();
                        let mut body = br.body.clone();
                        for y in vars.iter_mut() {
                            if vfv.contains(y) {
                                let fresh = global_fresh(y);
                                body = body.subst_inner(y, &Term::Var(fresh.clone()), &BTreeSet::new());
                                *y = fresh;
                            }
                        }
                        Branch { ctor: br.ctor, vars, body: body.subst_inner(x, v, vfv) }
                    })
                    .collect();
                Term::Match { scrut: Box::new(scrut), branches }
            }
            Term::App(f, a) => Term::App(Box::new(f.subst_inner(x, v, vfv)), Box::new(a.subst_inner(x, v, vfv))),
            Term::OpApp(op, args) => Term::OpApp(*op, args.iter().map(|a| a.subst_inner(x, v, vfv)).collect()),
        }
    }

    /// Number of AST nodes; used to bound random generation and for reports.
    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) | Term::Op(_) | Term::Var(_) | Term::Err => 1,
            Term::Lam { body, .. } | Term::Fix { body, .. } => 1 + body.size(),
            Term::Let { bound, body, .. } => 1 + bound.size() + body.size(),
            Term::LetOp { args, body, .. } => 1 + args.len() + body.size(),
            Term::LetApp { func, arg, body, .. } => 1 + func.size() + arg.size() + body.size(),
            Term::Match { scrut, branches } => 1 + scrut.size() + branches.iter().map(|b| b.body.size()).sum::<usize>(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::OpApp(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }
}
