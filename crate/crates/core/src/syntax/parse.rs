//! Recursive-descent parser for programs, terms, refinement types and
//! qualifiers.
//!
//! Surface sugar is removed here: `if` becomes a boolean match, `e1 <+> e2`
//! becomes a match on `nat_gen () mod 2`, list literals and closed
//! constructor applications become constants, and `let x = op a b` /
//! `let x = f a` over atoms are read directly as their MNF forms.

use super::fresh::Fresh;
use super::lexer::{tokenize, Tok, Token};
use super::prop::{CmpOp, Expr, Prop, NU};
use super::term::{Branch, Constant, Ctor, Op, Prim, Term};
use super::types::{BaseType, BasicType, RefinementType, TypeContext};
use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum ParamType {
    Basic(BasicType),
    Refined(RefinementType),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Option<ParamType>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    pub name: String,
    pub is_rec: bool,
    pub params: Vec<Param>,
    pub ret: Option<ParamType>,
    /// Explicit termination measure (`decreasing e`).
    pub decreasing: Option<Expr>,
    pub body: Term,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    /// `val name : τ` signatures.
    pub signatures: Vec<(String, RefinementType)>,
    pub definitions: Vec<Definition>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    fresh: Fresh,
    /// Instantiation of type variables, used when monomorphizing axioms.
    tyvars: Vec<(String, BaseType)>,
}

type PResult<T> = Result<T, ParseError>;

/// Argument positions: tuples are only meaningful for operators.
enum Atom {
    Term(Term),
    Tuple(Vec<Term>),
}

const PROP_FOLLOW: &[&str] = &[")", "&&", "||", "==>", "=>", "<=>", "]", "}", ".", "/\\", "\\/", ",", ";;"];

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        let toks = tokenize(src).map_err(|e| ParseError { line: e.line, col: e.col, msg: e.msg })?;
        Ok(Parser { toks, pos: 0, fresh: Fresh::new(), tyvars: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, col: t.col, msg: msg.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {t}")),
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.err(format!("unexpected trailing {}", self.peek()))
        }
    }

    fn line(&self) -> usize {
        self.toks[self.pos].line
    }

    // ---------------------------------------------------------------- types

    fn base_type(&mut self) -> PResult<BaseType> {
        let mut b = match self.peek().clone() {
            Tok::Ident(s) if s == "unit" => BaseType::Unit,
            Tok::Ident(s) if s == "bool" => BaseType::Bool,
            Tok::Ident(s) if s == "nat" => BaseType::Nat,
            Tok::Ident(s) if s == "int" => BaseType::Int,
            Tok::TyVar(v) => match self.tyvars.iter().find(|(n, _)| *n == v) {
                Some((_, b)) => b.clone(),
                None => return self.err(format!("unbound type variable '{v}")),
            },
            Tok::Sym("(") => {
                self.bump();
                let b = self.base_type()?;
                self.expect_sym(")")?;
                return self.base_postfix(b);
            }
            t => return self.err(format!("expected base type, found {t}")),
        };
        self.bump();
        b = self.base_postfix(b)?;
        Ok(b)
    }

    fn base_postfix(&mut self, mut b: BaseType) -> PResult<BaseType> {
        loop {
            if self.eat_kw("list") {
                b = BaseType::list(b);
            } else if self.eat_kw("tree") {
                b = BaseType::tree(b);
            } else {
                return Ok(b);
            }
        }
    }

    fn basic_type(&mut self) -> PResult<BasicType> {
        let lhs = if self.is_sym("(") {
            let save = self.pos;
            self.bump();
            let inner = self.basic_type()?;
            self.expect_sym(")")?;
            match inner {
                BasicType::Base(b) if self.is_kw("list") || self.is_kw("tree") => {
                    BasicType::Base(self.base_postfix(b)?)
                }
                BasicType::Arrow(..) if self.is_kw("list") || self.is_kw("tree") => {
                    self.pos = save;
                    return self.err("containers of functions are not supported");
                }
                t => t,
            }
        } else {
            BasicType::Base(self.base_type()?)
        };
        if self.eat_sym("->") {
            Ok(BasicType::arrow(lhs, self.basic_type()?))
        } else {
            Ok(lhs)
        }
    }

    fn starts_refinement(&self) -> bool {
        self.is_sym("{") || self.is_sym("[")
    }

    /// `x:τ -> τ`, `{v:b | φ}`, `[v:b | φ]`, or a bare base type (read as
    /// `{ν:b | true}`).
    fn rtype(&mut self) -> PResult<RefinementType> {
        let named = matches!(self.peek(), Tok::Ident(s) if !is_keyword(s))
            && matches!(self.peek_at(1), Tok::Sym(":"));
        let binder = if named {
            let b = self.ident()?;
            self.expect_sym(":")?;
            Some(b)
        } else {
            None
        };
        let lhs = self.rtype_atom()?;
        if self.eat_sym("->") {
            let cod = self.rtype()?;
            let binder = binder.unwrap_or_else(|| self.fresh.name("a"));
            Ok(RefinementType::arrow(binder, lhs, cod))
        } else if binder.is_some() {
            self.err("named binder must be followed by `->`")
        } else {
            Ok(lhs)
        }
    }

    fn rtype_atom(&mut self) -> PResult<RefinementType> {
        if self.is_sym("{") || self.is_sym("[") {
            let under = self.is_sym("[");
            self.bump();
            // `[v:b | φ]`, or the short form `[b | φ]` whose qualifier
            // names the refinement variable `ν` (or `v`).
            let v = if matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) && matches!(self.peek_at(1), Tok::Sym(":")) {
                let v = self.ident()?;
                self.expect_sym(":")?;
                v
            } else {
                "v".to_string()
            };
            let base = self.base_type()?;
            let qual = if self.eat_sym("|") { self.prop()?.rename(&v, NU) } else { Prop::Top };
            self.expect_sym(if under { "]" } else { "}" })?;
            return Ok(if under { RefinementType::under(base, qual) } else { RefinementType::over(base, qual) });
        }
        if self.is_sym("(") {
            // Either a parenthesized refinement type or a parenthesized base type.
            let save = self.pos;
            self.bump();
            if let Ok(t) = self.rtype() {
                if self.eat_sym(")") {
                    return Ok(t);
                }
            }
            self.pos = save;
        }
        let b = self.base_type()?;
        Ok(RefinementType::over(b, Prop::Top))
    }

    // ----------------------------------------------------------- qualifiers

    fn prop(&mut self) -> PResult<Prop> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantifier();
        }
        let lhs = self.prop_imp()?;
        if self.eat_sym("<=>") {
            let rhs = self.prop_imp()?;
            return Ok(Prop::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn quantifier(&mut self) -> PResult<Prop> {
        let forall = self.is_kw("forall");
        self.bump();
        let mut binders = Vec::new();
        loop {
            let paren = self.eat_sym("(");
            let x = self.ident()?;
            self.expect_sym(":")?;
            let b = self.base_type()?;
            if paren {
                self.expect_sym(")")?;
            }
            binders.push((x, b));
            if !self.eat_sym(",") && !self.is_sym("(") {
                break;
            }
        }
        self.expect_sym(".")?;
        let mut body = self.prop()?;
        for (x, b) in binders.into_iter().rev() {
            body = if forall { Prop::forall(x, b, body) } else { Prop::exists(x, b, body) };
        }
        Ok(body)
    }

    fn prop_imp(&mut self) -> PResult<Prop> {
        let lhs = self.prop_or()?;
        if self.eat_sym("==>") || self.eat_sym("=>") {
            let rhs = if self.is_kw("forall") || self.is_kw("exists") { self.quantifier()? } else { self.prop_imp()? };
            return Ok(Prop::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn prop_or(&mut self) -> PResult<Prop> {
        let mut ps = vec![self.prop_and()?];
        while self.eat_sym("||") || self.eat_sym("\\/") {
            ps.push(self.prop_and()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Prop::Or(ps) })
    }

    fn prop_and(&mut self) -> PResult<Prop> {
        let mut ps = vec![self.prop_not()?];
        while self.eat_sym("&&") || self.eat_sym("/\\") {
            ps.push(self.prop_not()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Prop::And(ps) })
    }

    fn prop_not(&mut self) -> PResult<Prop> {
        if self.eat_kw("not") || self.eat_sym("!") || self.eat_sym("~") {
            return Ok(Prop::not(self.prop_not()?));
        }
        self.prop_primary()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Sym("=") | Tok::Sym("==") => Some(CmpOp::Eq),
            Tok::Sym("!=") | Tok::Sym("<>") => Some(CmpOp::Ne),
            Tok::Sym("<") => Some(CmpOp::Lt),
            Tok::Sym("<=") => Some(CmpOp::Le),
            Tok::Sym(">") => Some(CmpOp::Gt),
            Tok::Sym(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn prop_primary(&mut self) -> PResult<Prop> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantifier();
        }
        if (self.is_kw("true") || self.is_kw("false")) && !is_cmp_tok(self.peek_at(1)) {
            let t = self.is_kw("true");
            self.bump();
            return Ok(if t { Prop::Top } else { Prop::Bot });
        }
        if let (Tok::Ident(name), Tok::Sym("(")) = (self.peek().clone(), self.peek_at(1).clone()) {
            if !is_keyword(&name) {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if !self.is_sym(")") {
                    loop {
                        args.push(self.aexpr()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym(")")?;
                return Ok(Prop::Pred(name, args));
            }
        }
        if self.is_sym("(") {
            let save = self.pos;
            if let Ok(p) = self.cmp_chain() {
                let ok = matches!(self.peek(), Tok::Eof)
                    || matches!(self.peek(), Tok::Sym(s) if PROP_FOLLOW.contains(s))
                    || self.is_kw("then");
                if ok {
                    return Ok(p);
                }
            }
            self.pos = save;
            self.bump();
            let p = self.prop()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        self.cmp_chain()
    }

    fn cmp_chain(&mut self) -> PResult<Prop> {
        let first = self.aexpr()?;
        let Some(_) = self.cmp_op() else { return Ok(Prop::Atom(first)) };
        let mut parts = Vec::new();
        let mut lhs = first;
        while let Some(op) = self.cmp_op() {
            self.bump();
            let rhs = self.aexpr()?;
            parts.push(Prop::Cmp(op, lhs, rhs.clone()));
            lhs = rhs;
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Prop::And(parts) })
    }

    fn aexpr(&mut self) -> PResult<Expr> {
        let mut e = self.mexpr()?;
        loop {
            if self.eat_sym("+") {
                e = Expr::add(e, self.mexpr()?);
            } else if self.eat_sym("-") {
                e = Expr::sub(e, self.mexpr()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn mexpr(&mut self) -> PResult<Expr> {
        let mut e = self.uexpr()?;
        loop {
            if self.eat_sym("*") {
                e = Expr::Mul(Box::new(e), Box::new(self.uexpr()?));
            } else if self.eat_kw("mod") {
                e = Expr::modulo(e, self.uexpr()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn uexpr(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            if let Tok::Int(n) = self.peek().clone() {
                self.bump();
                return Ok(Expr::Int(-n));
            }
            return Ok(Expr::Neg(Box::new(self.uexpr()?)));
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Expr::Bool(s == "true"))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Expr::Unit);
                }
                let e = self.aexpr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            t => self.err(format!("expected expression, found {t}")),
        }
    }

    // ---------------------------------------------------------------- terms

    fn term(&mut self) -> PResult<Term> {
        let line = self.line();
        if self.eat_kw("let") {
            return self.let_term();
        }
        if self.eat_kw("if") {
            let c = self.term()?;
            self.expect_kw("then")?;
            let a = self.term()?;
            self.expect_kw("else")?;
            let b = self.term()?;
            return Ok(Term::Match {
                scrut: Box::new(c),
                branches: vec![
                    Branch { ctor: Ctor::True, vars: vec![], body: a },
                    Branch { ctor: Ctor::False, vars: vec![], body: b },
                ],
            });
        }
        if self.eat_kw("match") {
            let scrut = self.term()?;
            self.expect_kw("with")?;
            return self.match_cases(scrut, line);
        }
        if self.eat_kw("fun") {
            let params = self.fun_params()?;
            self.expect_sym("->")?;
            let mut body = self.term()?;
            for (x, t) in params.into_iter().rev() {
                let Some(t) = t else {
                    return self.err(format!("lambda parameter `{x}` needs a type annotation"));
                };
                body = Term::Lam { param: x, param_ty: t, body: Box::new(body) };
            }
            return Ok(body);
        }
        if self.eat_kw("fix") {
            self.expect_sym("(")?;
            let f = self.ident()?;
            self.expect_sym(":")?;
            let fty = self.basic_type()?;
            self.expect_sym(")")?;
            let mut params = self.fun_params()?;
            if params.len() != 1 {
                return self.err("`fix` takes exactly one parameter");
            }
            let (x, t) = params.pop().unwrap();
            let Some(t) = t else { return self.err("`fix` parameter needs a type annotation") };
            self.expect_sym("->")?;
            let body = self.term()?;
            return Ok(Term::Fix { fname: f, fty, param: x, param_ty: t, body: Box::new(body) });
        }
        self.choice()
    }

    fn choice(&mut self) -> PResult<Term> {
        let lhs = self.or_term()?;
        if self.eat_sym("<+>") {
            let rhs = self.term()?;
            return Ok(self.desugar_choice(lhs, rhs));
        }
        Ok(lhs)
    }

    /// `e1 <+> e2` ≜ `let n = nat_gen () mod 2 in match n with O -> e1 | S _ -> e2`
    fn desugar_choice(&mut self, e1: Term, e2: Term) -> Term {
        let g = self.fresh.name("g");
        let n = self.fresh.name("n");
        let m = self.fresh.name("m");
        Term::let_op(
            g.clone(),
            Op::Prim(Prim::NatGen),
            vec![Term::unit()],
            Term::let_op(
                n.clone(),
                Op::Prim(Prim::Mod),
                vec![Term::Var(g), Term::int(2)],
                Term::Match {
                    scrut: Box::new(Term::Var(n)),
                    branches: vec![
                        Branch { ctor: Ctor::Zero, vars: vec![], body: e1 },
                        Branch { ctor: Ctor::Succ, vars: vec![m], body: e2 },
                    ],
                },
            ),
        )
    }

    fn binop_chain(
        &mut self,
        next: fn(&mut Parser) -> PResult<Term>,
        ops: &[(&'static str, Prim)],
    ) -> PResult<Term> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (sym, prim) in ops {
                let hit = if sym.chars().all(char::is_alphabetic) { self.eat_kw(sym) } else { self.eat_sym(sym) };
                if hit {
                    let rhs = next(self)?;
                    lhs = Term::OpApp(Op::Prim(*prim), vec![lhs, rhs]);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_term(&mut self) -> PResult<Term> {
        self.binop_chain(Parser::and_term, &[("||", Prim::Or)])
    }

    fn and_term(&mut self) -> PResult<Term> {
        self.binop_chain(Parser::cmp_term, &[("&&", Prim::And)])
    }

    fn cmp_term(&mut self) -> PResult<Term> {
        let lhs = self.cons_term()?;
        let prim = match self.peek() {
            Tok::Sym("==") | Tok::Sym("=") => Prim::Eq,
            Tok::Sym("!=") | Tok::Sym("<>") => Prim::Ne,
            Tok::Sym("<") => Prim::Lt,
            Tok::Sym("<=") => Prim::Le,
            Tok::Sym(">") => Prim::Gt,
            Tok::Sym(">=") => Prim::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.cons_term()?;
        Ok(Term::OpApp(Op::Prim(prim), vec![lhs, rhs]))
    }

    fn cons_term(&mut self) -> PResult<Term> {
        let lhs = self.add_term()?;
        if self.eat_sym("::") {
            let rhs = self.cons_term()?;
            return Ok(ctor_app(Ctor::Cons, vec![lhs, rhs]));
        }
        Ok(lhs)
    }

    fn add_term(&mut self) -> PResult<Term> {
        self.binop_chain(Parser::mul_term, &[("+", Prim::Add), ("-", Prim::Sub)])
    }

    fn mul_term(&mut self) -> PResult<Term> {
        self.binop_chain(Parser::unary_term, &[("*", Prim::Mul), ("mod", Prim::Mod)])
    }

    fn unary_term(&mut self) -> PResult<Term> {
        if self.eat_kw("not") {
            let t = self.unary_term()?;
            return Ok(Term::OpApp(Op::Prim(Prim::Not), vec![t]));
        }
        if self.is_sym("-") {
            self.bump();
            if let Tok::Int(n) = self.peek().clone() {
                self.bump();
                return Ok(Term::int(-n));
            }
            let t = self.unary_term()?;
            return Ok(Term::OpApp(Op::Prim(Prim::Sub), vec![Term::int(0), t]));
        }
        self.app_term()
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Upper(_) => true,
            Tok::Ident(s) => !is_keyword(s) || s == "true" || s == "false" || s == "err",
            Tok::Sym("(") | Tok::Sym("[") => true,
            _ => false,
        }
    }

    fn app_term(&mut self) -> PResult<Term> {
        let head = self.atom_term()?;
        let head = match head {
            Atom::Term(t) => t,
            Atom::Tuple(items) => {
                return self.err(format!("a {}-tuple can only be an operator argument", items.len()));
            }
        };
        match head {
            Term::Op(op) => {
                if !self.starts_atom() {
                    return Ok(fold_op(op, vec![]).unwrap_or(Term::Op(op)));
                }
                let args = match self.atom_term()? {
                    Atom::Tuple(items) => items,
                    Atom::Term(t) => {
                        let mut v = vec![t];
                        while v.len() < op.arity() && self.starts_atom() {
                            match self.atom_term()? {
                                Atom::Term(t) => v.push(t),
                                Atom::Tuple(_) => return self.err("unexpected tuple argument"),
                            }
                        }
                        v
                    }
                };
                if args.len() != op.arity() {
                    return self.err(format!("`{}` expects {} argument(s), got {}", op.name(), op.arity(), args.len()));
                }
                let t = match op {
                    Op::Ctor(c) => ctor_app(c, args),
                    Op::Prim(_) => Term::OpApp(op, args),
                };
                if self.starts_atom() {
                    return self.err("operator results cannot be applied");
                }
                Ok(t)
            }
            mut f => {
                while self.starts_atom() {
                    match self.atom_term()? {
                        Atom::Term(a) => f = Term::App(Box::new(f), Box::new(a)),
                        Atom::Tuple(_) => return self.err("tuples can only be passed to operators and constructors"),
                    }
                }
                Ok(f)
            }
        }
    }

    fn atom_term(&mut self) -> PResult<Atom> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Atom::Term(Term::int(n)))
            }
            Tok::Upper(c) => {
                self.bump();
                match Ctor::from_name(&c) {
                    Some(ctor) if ctor.arity() == 0 => Ok(Atom::Term(ctor_app(ctor, vec![]))),
                    Some(ctor) => Ok(Atom::Term(Term::Op(Op::Ctor(ctor)))),
                    None => {
                        self.pos -= 1;
                        self.err(format!("unknown constructor `{c}`"))
                    }
                }
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Atom::Term(Term::Const(Constant::Bool(s == "true"))))
            }
            Tok::Ident(s) if s == "err" => {
                self.bump();
                Ok(Atom::Term(Term::Err))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                match Prim::from_name(&s) {
                    Some(p) if p.is_generator() => Ok(Atom::Term(Term::Op(Op::Prim(p)))),
                    _ => Ok(Atom::Term(Term::Var(s))),
                }
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.is_sym("]") {
                    loop {
                        items.push(self.term()?);
                        if !self.eat_sym(";") {
                            break;
                        }
                    }
                }
                self.expect_sym("]")?;
                let t = items.into_iter().rev().fold(Term::Const(Constant::nil()), |acc, h| ctor_app(Ctor::Cons, vec![h, acc]));
                Ok(Atom::Term(t))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Atom::Term(Term::unit()));
                }
                // Operator sections such as `(+)`.
                if let Tok::Sym(s) = self.peek().clone() {
                    if matches!(self.peek_at(1), Tok::Sym(")")) {
                        if let Some(p) = Prim::from_name(s) {
                            self.bump();
                            self.bump();
                            return Ok(Atom::Term(Term::Op(Op::Prim(p))));
                        }
                    }
                }
                if let (Tok::Ident(s), Tok::Sym(")")) = (self.peek().clone(), self.peek_at(1).clone()) {
                    if let Some(p) = Prim::from_name(&s) {
                        if s == "mod" || s == "not" {
                            self.bump();
                            self.bump();
                            return Ok(Atom::Term(Term::Op(Op::Prim(p))));
                        }
                    }
                }
                let first = self.term()?;
                if self.eat_sym(":") {
                    // Type ascriptions are checked against nothing; they only
                    // document intent in the surface syntax.
                    self.basic_type()?;
                    self.expect_sym(")")?;
                    return Ok(Atom::Term(first));
                }
                if self.eat_sym(",") {
                    let mut items = vec![first];
                    loop {
                        items.push(self.term()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym(")")?;
                    return Ok(Atom::Tuple(items));
                }
                self.expect_sym(")")?;
                Ok(Atom::Term(first))
            }
            t => self.err(format!("expected a term, found {t}")),
        }
    }

    fn binder_name(&mut self) -> PResult<String> {
        if self.eat_sym("_") {
            return Ok(self.fresh.name("w"));
        }
        self.ident()
    }

    /// `x`, `_`, `()`, `(x : T)` — returns name and optional basic type.
    fn fun_params(&mut self) -> PResult<Vec<(String, Option<BasicType>)>> {
        let mut out = Vec::new();
        loop {
            if self.is_sym("(") && matches!(self.peek_at(1), Tok::Sym(")")) {
                self.bump();
                self.bump();
                out.push((self.fresh.name("u"), Some(BasicType::Base(BaseType::Unit))));
            } else if self.is_sym("(") {
                self.bump();
                let x = self.binder_name()?;
                self.expect_sym(":")?;
                let t = self.basic_type()?;
                self.expect_sym(")")?;
                out.push((x, Some(t)));
            } else if self.is_sym("_") || matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) {
                out.push((self.binder_name()?, None));
            } else {
                break;
            }
        }
        if out.is_empty() {
            return self.err("expected at least one parameter");
        }
        Ok(out)
    }

    fn let_term(&mut self) -> PResult<Term> {
        if self.eat_kw("rec") {
            let f = self.ident()?;
            let params = self.fun_params()?;
            self.expect_sym(":")?;
            let ret = self.basic_type()?;
            self.expect_sym("=")?;
            let body = self.term()?;
            self.expect_kw("in")?;
            let rest = self.term()?;
            let mut tys = Vec::new();
            for (x, t) in &params {
                match t {
                    Some(t) => tys.push(t.clone()),
                    None => return self.err(format!("parameter `{x}` of local recursive function needs a type")),
                }
            }
            let fty = tys.iter().rev().fold(ret, |acc, t| BasicType::arrow(t.clone(), acc));
            let mut inner = body;
            for (x, t) in params.iter().skip(1).rev() {
                inner = Term::Lam { param: x.clone(), param_ty: t.clone().unwrap(), body: Box::new(inner) };
            }
            let fix = Term::Fix {
                fname: f.clone(),
                fty,
                param: params[0].0.clone(),
                param_ty: tys[0].clone(),
                body: Box::new(inner),
            };
            return Ok(mk_let(f, fix, rest));
        }
        let x = if self.is_sym("(") && matches!(self.peek_at(1), Tok::Sym(")")) {
            self.bump();
            self.bump();
            self.fresh.name("u")
        } else if self.is_sym("(") {
            self.bump();
            let x = self.binder_name()?;
            self.expect_sym(":")?;
            self.basic_type()?;
            self.expect_sym(")")?;
            x
        } else {
            self.binder_name()?
        };
        if !self.is_sym("=") {
            // Local function definition: `let f (x : T) = e in ...`
            let params = self.fun_params()?;
            self.expect_sym("=")?;
            let mut body = self.term()?;
            for (p, t) in params.into_iter().rev() {
                let Some(t) = t else { return self.err(format!("parameter `{p}` needs a type annotation")) };
                body = Term::Lam { param: p, param_ty: t, body: Box::new(body) };
            }
            self.expect_kw("in")?;
            let rest = self.term()?;
            return Ok(mk_let(x, body, rest));
        }
        self.expect_sym("=")?;
        let bound = self.term()?;
        self.expect_kw("in")?;
        let body = self.term()?;
        Ok(mk_let(x, bound, body))
    }

    fn pattern(&mut self) -> PResult<Option<(Ctor, Vec<String>)>> {
        if self.eat_sym("(") {
            let p = self.pattern()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if self.eat_sym("_") {
            return Ok(None);
        }
        match self.peek().clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Some((Ctor::Zero, vec![])))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Some((if s == "true" { Ctor::True } else { Ctor::False }, vec![])))
            }
            Tok::Sym("[") if matches!(self.peek_at(1), Tok::Sym("]")) => {
                self.bump();
                self.bump();
                Ok(Some((Ctor::Nil, vec![])))
            }
            Tok::Upper(c) => {
                self.bump();
                let Some(ctor) = Ctor::from_name(&c) else {
                    self.pos -= 1;
                    return self.err(format!("unknown constructor `{c}`"));
                };
                let mut vars = Vec::new();
                match ctor.arity() {
                    0 => {}
                    1 => {
                        let paren = self.eat_sym("(");
                        vars.push(self.binder_name()?);
                        if paren {
                            self.expect_sym(")")?;
                        }
                    }
                    n => {
                        self.expect_sym("(")?;
                        for i in 0..n {
                            if i > 0 {
                                self.expect_sym(",")?;
                            }
                            vars.push(self.binder_name()?);
                        }
                        self.expect_sym(")")?;
                    }
                }
                Ok(Some((ctor, vars)))
            }
            Tok::Ident(_) if matches!(self.peek_at(1), Tok::Sym("::")) => {
                let h = self.binder_name()?;
                self.expect_sym("::")?;
                let t = self.binder_name()?;
                Ok(Some((Ctor::Cons, vec![h, t])))
            }
            Tok::Sym("_") if matches!(self.peek_at(1), Tok::Sym("::")) => {
                let h = self.binder_name()?;
                self.expect_sym("::")?;
                let t = self.binder_name()?;
                Ok(Some((Ctor::Cons, vec![h, t])))
            }
            t => self.err(format!("expected a pattern, found {t}")),
        }
    }

    fn match_cases(&mut self, scrut: Term, _line: usize) -> PResult<Term> {
        self.eat_sym("|");
        let mut cases: Vec<(Option<(Ctor, Vec<String>)>, Term)> = Vec::new();
        loop {
            // `_ :: t` starts with `_` but is a cons pattern.
            let pat = if self.is_sym("_") && matches!(self.peek_at(1), Tok::Sym("::")) {
                self.bump();
                self.bump();
                let h = self.fresh.name("w");
                let t = self.binder_name()?;
                Some((Ctor::Cons, vec![h, t]))
            } else {
                self.pattern()?
            };
            self.expect_sym("->")?;
            let body = self.term()?;
            cases.push((pat, body));
            if !self.eat_sym("|") {
                break;
            }
        }
        let family = cases.iter().find_map(|(p, _)| p.as_ref().map(|(c, _)| *c));
        let Some(family) = family else {
            // `match e with _ -> body`
            let (_, body) = cases.pop().unwrap();
            let x = self.fresh.name("w");
            return Ok(mk_let(x, scrut, body));
        };
        let mut branches: Vec<Branch> = Vec::new();
        for (pat, body) in cases {
            match pat {
                Some((ctor, vars)) => {
                    if !family.siblings().contains(&ctor) {
                        return self.err(format!("constructor `{}` does not belong to the matched type", ctor.name()));
                    }
                    if branches.iter().any(|b| b.ctor == ctor) {
                        continue;
                    }
                    branches.push(Branch { ctor, vars, body });
                }
                None => {
                    for &c in family.siblings() {
                        if !branches.iter().any(|b| b.ctor == c) {
                            let vars = (0..c.arity()).map(|_| self.fresh.name("w")).collect();
                            branches.push(Branch { ctor: c, vars, body: body.clone() });
                        }
                    }
                }
            }
        }
        // Keep declaration order of constructors for stable output.
        branches.sort_by_key(|b| family.siblings().iter().position(|c| *c == b.ctor));
        Ok(Term::Match { scrut: Box::new(scrut), branches })
    }

    // ---------------------------------------------------------- top level

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            while self.eat_sym(";;") {}
            if matches!(self.peek(), Tok::Eof) {
                return Ok(prog);
            }
            if self.eat_kw("type") {
                self.skip_type_decl();
                continue;
            }
            if self.eat_kw("val") {
                let name = self.ident()?;
                self.expect_sym(":")?;
                let ty = self.rtype()?;
                prog.signatures.push((name, ty));
                continue;
            }
            if self.is_kw("let") {
                prog.definitions.push(self.definition()?);
                continue;
            }
            return self.err(format!("expected `let`, `val` or `type`, found {}", self.peek()));
        }
    }

    fn skip_type_decl(&mut self) {
        while !matches!(self.peek(), Tok::Eof) && !self.is_kw("let") && !self.is_kw("val") && !self.is_kw("type") {
            self.bump();
        }
    }

    fn definition(&mut self) -> PResult<Definition> {
        let line = self.line();
        self.expect_kw("let")?;
        let is_rec = self.eat_kw("rec");
        let name = self.ident()?;
        let mut params = Vec::new();
        loop {
            if self.is_sym("(") && matches!(self.peek_at(1), Tok::Sym(")")) {
                self.bump();
                self.bump();
                params.push(Param { name: self.fresh.name("u"), ty: Some(ParamType::Basic(BasicType::Base(BaseType::Unit))) });
            } else if self.is_sym("(") {
                self.bump();
                let x = self.binder_name()?;
                let ty = if self.eat_sym(":") {
                    Some(if self.starts_refinement() || self.is_named_rtype() {
                        ParamType::Refined(self.rtype()?)
                    } else {
                        ParamType::Basic(self.basic_type()?)
                    })
                } else {
                    None
                };
                self.expect_sym(")")?;
                params.push(Param { name: x, ty });
            } else if self.is_sym("_") || matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) {
                params.push(Param { name: self.binder_name()?, ty: None });
            } else {
                break;
            }
        }
        let ret = if self.eat_sym(":") {
            Some(if self.starts_refinement() || self.is_named_rtype() {
                ParamType::Refined(self.rtype()?)
            } else {
                ParamType::Basic(self.basic_type()?)
            })
        } else {
            None
        };
        let decreasing = if self.eat_kw("decreasing") { Some(self.aexpr()?) } else { None };
        self.expect_sym("=")?;
        let body = self.term()?;
        Ok(Definition { name, is_rec, params, ret, decreasing, body, line })
    }

    fn is_named_rtype(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !is_keyword(s)) && matches!(self.peek_at(1), Tok::Sym(":"))
    }

    fn context(&mut self) -> PResult<TypeContext> {
        let mut ctx = TypeContext::new();
        if matches!(self.peek(), Tok::Eof) {
            return Ok(ctx);
        }
        loop {
            let x = self.ident()?;
            self.expect_sym(":")?;
            let t = self.rtype()?;
            ctx.push(x, t);
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(ctx)
    }
}

fn is_cmp_tok(t: &Tok) -> bool {
    matches!(t, Tok::Sym("=" | "==" | "!=" | "<>" | "<" | "<=" | ">" | ">="))
}

pub const KEYWORDS: &[&str] = &[
    "let", "rec", "in", "match", "with", "if", "then", "else", "fun", "fix", "err", "true", "false", "not", "mod",
    "forall", "exists", "val", "type", "of", "decreasing", "list", "tree", "int", "nat", "bool", "unit",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Constructor application; closed data becomes a constant.
fn ctor_app(c: Ctor, args: Vec<Term>) -> Term {
    fold_op(Op::Ctor(c), args.clone()).unwrap_or(Term::OpApp(Op::Ctor(c), args))
}

fn fold_op(op: Op, args: Vec<Term>) -> Option<Term> {
    let Op::Ctor(c) = op else { return None };
    if args.len() != c.arity() {
        return None;
    }
    match c {
        Ctor::True => Some(Term::Const(Constant::Bool(true))),
        Ctor::False => Some(Term::Const(Constant::Bool(false))),
        Ctor::Zero => Some(Term::int(0)),
        Ctor::Nil | Ctor::Leaf => Some(Term::Const(Constant::Data(c, vec![]))),
        Ctor::Cons | Ctor::Node => {
            let consts: Option<Vec<Constant>> = args
                .iter()
                .map(|a| match a {
                    Term::Const(k) => Some(k.clone()),
                    _ => None,
                })
                .collect();
            consts.map(|cs| Term::Const(Constant::Data(c, cs)))
        }
        Ctor::Succ => None,
    }
}

fn is_operand(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Const(c) => c.is_base_literal(),
        _ => false,
    }
}

/// Builds a let, reading operator and application bindings over atoms
/// directly as their MNF forms.
pub(crate) fn mk_let(x: String, bound: Term, body: Term) -> Term {
    match bound {
        Term::OpApp(op, args) if args.len() == op.arity() && args.iter().all(is_operand) => {
            Term::LetOp { x, op, args, body: Box::new(body) }
        }
        Term::App(f, a) if matches!(*f, Term::Var(_) | Term::Op(_) | Term::Lam { .. } | Term::Fix { .. }) && is_operand(&a) => {
            Term::LetApp { x, func: f, arg: a, body: Box::new(body) }
        }
        bound => Term::Let { x, bound: Box::new(bound), body: Box::new(body) },
    }
}

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src)?;
    p.program()
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<RefinementType, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.rtype()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_basic_type(src: &str) -> Result<BasicType, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.basic_type()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_prop(src: &str) -> Result<Prop, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.prop()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_base_type(src: &str) -> Result<BaseType, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.base_type()?;
    p.expect_eof()?;
    Ok(t)
}

/// Comma-separated `x:τ` bindings.
pub fn parse_context(src: &str) -> Result<TypeContext, ParseError> {
    let mut p = Parser::new(src)?;
    let c = p.context()?;
    p.expect_eof()?;
    Ok(c)
}

/// Shared entry point for the predicate/axiom declaration readers, which
/// need the qualifier grammar on a token prefix.
pub(crate) struct DeclParser {
    inner: Parser,
}

pub(crate) enum SortSpec {
    Base(BaseType),
    Var(String),
    ListOf(Box<SortSpec>),
    TreeOf(Box<SortSpec>),
}

impl DeclParser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(DeclParser { inner: Parser::new(src)? })
    }

    /// A parser in which type variables stand for the given base types.
    pub(crate) fn with_tyvars(src: &str, tyvars: Vec<(String, BaseType)>) -> Result<Self, ParseError> {
        let mut inner = Parser::new(src)?;
        inner.tyvars = tyvars;
        Ok(DeclParser { inner })
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.inner.peek(), Tok::Eof)
    }

    pub(crate) fn keyword(&mut self) -> Result<String, ParseError> {
        match self.inner.bump() {
            Tok::Ident(s) => Ok(s),
            t => {
                self.inner.pos -= 1;
                self.inner.err(format!("expected a declaration keyword, found {t}"))
            }
        }
    }

    pub(crate) fn name(&mut self) -> Result<String, ParseError> {
        match self.inner.peek().clone() {
            Tok::Ident(s) => {
                self.inner.bump();
                Ok(s)
            }
            t => self.inner.err(format!("expected a name, found {t}")),
        }
    }

    pub(crate) fn sym(&mut self, s: &str) -> Result<(), ParseError> {
        self.inner.expect_sym(s)
    }

    pub(crate) fn eat(&mut self, s: &str) -> bool {
        self.inner.eat_sym(s)
    }

    pub(crate) fn sort(&mut self) -> Result<SortSpec, ParseError> {
        let mut s = match self.inner.peek().clone() {
            Tok::TyVar(v) => {
                self.inner.bump();
                SortSpec::Var(v)
            }
            _ => {
                let b = self.inner.base_type()?;
                SortSpec::Base(b)
            }
        };
        loop {
            if self.inner.eat_kw("list") {
                s = SortSpec::ListOf(Box::new(s));
            } else if self.inner.eat_kw("tree") {
                s = SortSpec::TreeOf(Box::new(s));
            } else {
                return Ok(s);
            }
        }
    }

    /// Parses `forall x:'a list, y:'a. φ`: the outer binders are returned
    /// separately from the body. Type variables resolve through the
    /// instantiation given at construction.
    pub(crate) fn axiom_body(&mut self) -> Result<(Vec<(String, BaseType)>, Prop), ParseError> {
        let mut binders = Vec::new();
        if self.inner.eat_kw("forall") {
            loop {
                let paren = self.inner.eat_sym("(");
                let x = self.inner.ident()?;
                self.inner.expect_sym(":")?;
                let s = self.inner.base_type()?;
                if paren {
                    self.inner.expect_sym(")")?;
                }
                binders.push((x, s));
                if !self.inner.eat_sym(",") && !self.inner.is_sym("(") {
                    break;
                }
            }
            self.inner.expect_sym(".")?;
        }
        let p = self.inner.prop()?;
        Ok((binders, p))
    }

    pub(crate) fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        self.inner.err(msg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_refinement_types() {
        let t = parse_type("x:{v:int | v > 0} -> [v:int list | len(v, x)]").unwrap();
        match &t {
            RefinementType::Arrow { binder, dom, cod } => {
                assert_eq!(binder, "x");
                assert_eq!(dom.qual().unwrap(), &Prop::cmp(CmpOp::Gt, Expr::nu(), Expr::Int(0)));
                assert!(cod.is_under());
                assert_eq!(cod.base().unwrap(), &BaseType::list(BaseType::Int));
            }
            _ => panic!("expected arrow"),
        }
    }

    #[test]
    fn chained_comparisons_split_into_conjunctions() {
        let p = parse_prop("lo < u < hi").unwrap();
        assert_eq!(
            p,
            Prop::And(vec![
                Prop::cmp(CmpOp::Lt, Expr::var("lo"), Expr::var("u")),
                Prop::cmp(CmpOp::Lt, Expr::var("u"), Expr::var("hi")),
            ])
        );
    }

    #[test]
    fn quantifier_body_extends_right() {
        let p = parse_prop("bst(v) && forall u:int. mem(v, u) ==> lo < u").unwrap();
        match p {
            Prop::And(ps) => assert!(matches!(ps[1], Prop::Forall(..))),
            _ => panic!("{p:?}"),
        }
    }

    #[test]
    fn parenthesized_props_and_arithmetic_are_disambiguated() {
        let a = parse_prop("(x + 1) = y").unwrap();
        assert!(matches!(a, Prop::Cmp(CmpOp::Eq, Expr::Add(..), _)));
        let b = parse_prop("(x = 1) && b").unwrap();
        assert!(matches!(b, Prop::And(_)));
    }

    #[test]
    fn if_desugars_to_bool_match() {
        let t = parse_term("if b then 1 else 2").unwrap();
        match t {
            Term::Match { branches, .. } => {
                assert_eq!(branches[0].ctor, Ctor::True);
                assert_eq!(branches[1].ctor, Ctor::False);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn choice_desugars_through_nat_gen() {
        let t = parse_term("1 <+> 2").unwrap();
        assert!(t.is_mnf());
        match t {
            Term::LetOp { op: Op::Prim(Prim::NatGen), .. } => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn let_over_atoms_is_read_in_mnf() {
        let t = parse_term("let x = a + 1 in let y = f x in y").unwrap();
        assert!(t.is_mnf());
        assert!(matches!(t, Term::LetOp { .. }));
    }

    #[test]
    fn constructor_applications() {
        assert_eq!(parse_term("[1; 2]").unwrap(), Term::Const(Constant::from_list(vec![Constant::Int(1), Constant::Int(2)])));
        assert!(matches!(parse_term("Node (x, l, r)").unwrap(), Term::OpApp(Op::Ctor(Ctor::Node), _)));
        assert!(matches!(parse_term("x :: l").unwrap(), Term::OpApp(Op::Ctor(Ctor::Cons), _)));
        assert!(matches!(parse_term("S n").unwrap(), Term::OpApp(Op::Ctor(Ctor::Succ), _)));
    }

    #[test]
    fn wildcard_expands_to_missing_constructors() {
        let t = parse_term("match l with [] -> 0 | _ -> 1").unwrap();
        match t {
            Term::Match { branches, .. } => {
                assert_eq!(branches.len(), 2);
                assert_eq!(branches[1].ctor, Ctor::Cons);
                assert_eq!(branches[1].vars.len(), 2);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn unknown_constructor_is_reported() {
        let e = parse_term("Foo 1").unwrap_err();
        assert!(e.msg.contains("unknown constructor"));
        assert_eq!((e.line, e.col), (1, 1));
    }

    #[test]
    fn parses_program_with_signature_and_measure() {
        let src = "
            val f : n:{v:nat | true} -> [v:nat | v <= n]
            let rec f (n : nat) decreasing n = if n == 0 then 0 else f (n - 1)
        ";
        let p = parse_program(src).unwrap();
        assert_eq!(p.signatures.len(), 1);
        assert_eq!(p.definitions.len(), 1);
        assert!(p.definitions[0].is_rec);
        assert_eq!(p.definitions[0].decreasing, Some(Expr::var("n")));
    }

    #[test]
    fn parses_contexts() {
        let c = parse_context("x:[nat|v>0], y:{nat|v>x+1}").unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.lookup("y").unwrap().is_over());
        assert!(c.lookup("y").unwrap().mentions("x"));
    }
}
