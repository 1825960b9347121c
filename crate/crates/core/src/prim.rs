//! Built-in typings for constants, constructors and operators, and the
//! registry of method predicates with their axioms and executable meaning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, ParseError, Result};
use crate::syntax::fresh::global_fresh;
use crate::syntax::parse::DeclParser;
use crate::syntax::{BaseType, CmpOp, Constant, Ctor, Expr, Op, Prim, Prop, RefinementType, NU};

fn over_top(b: BaseType) -> RefinementType {
    RefinementType::over(b, Prop::Top)
}

fn nu() -> Expr {
    Expr::nu()
}

/// Curried arrow over `{b|⊤}` parameters, with fresh binder names handed to
/// the result builder.
fn op_arrow(params: &[BaseType], hints: &[&str], result: impl FnOnce(&[Expr]) -> RefinementType) -> RefinementType {
    let names: Vec<String> = hints.iter().map(|h| global_fresh(h)).collect();
    let args: Vec<Expr> = names.iter().map(|n| Expr::var(n.clone())).collect();
    let mut ty = result(&args);
    for (name, b) in names.iter().zip(params).rev() {
        ty = RefinementType::arrow(name.clone(), over_top(b.clone()), ty);
    }
    ty
}

fn bool_iff(p: Prop) -> RefinementType {
    RefinementType::under(BaseType::Bool, Prop::iff(Prop::Atom(nu()), p))
}

/// `Ty(op)`. Polymorphic constructors and `==` take the element (resp.
/// operand) type from `inst`, defaulting to `int`.
pub fn ty_of_op(op: Op, inst: Option<&BaseType>) -> RefinementType {
    let int = BaseType::Int;
    let elem = inst.cloned().unwrap_or(BaseType::Int);
    let arith = |f: fn(Expr, Expr) -> Expr| {
        op_arrow(&[BaseType::Int, BaseType::Int], &["a", "b"], |a| {
            RefinementType::under(BaseType::Int, Prop::nu_eq(f(a[0].clone(), a[1].clone())))
        })
    };
    let cmp = |c: CmpOp, b: BaseType| {
        op_arrow(&[b.clone(), b], &["a", "b"], |a| bool_iff(Prop::cmp(c, a[0].clone(), a[1].clone())))
    };
    match op {
        Op::Prim(p) => match p {
            Prim::Add => arith(Expr::add),
            Prim::Sub => arith(Expr::sub),
            Prim::Mul => arith(|a, b| Expr::Mul(Box::new(a), Box::new(b))),
            Prim::Mod => {
                let (a, b) = (global_fresh("a"), global_fresh("b"));
                RefinementType::arrow(
                    a.clone(),
                    over_top(int.clone()),
                    RefinementType::arrow(
                        b.clone(),
                        RefinementType::over(int.clone(), Prop::cmp(CmpOp::Ne, nu(), Expr::Int(0))),
                        RefinementType::under(int, Prop::nu_eq(Expr::modulo(Expr::var(a), Expr::var(b)))),
                    ),
                )
            }
            Prim::Eq => cmp(CmpOp::Eq, elem),
            Prim::Ne => cmp(CmpOp::Ne, elem),
            Prim::Lt => cmp(CmpOp::Lt, int),
            Prim::Le => cmp(CmpOp::Le, int),
            Prim::Gt => cmp(CmpOp::Gt, int),
            Prim::Ge => cmp(CmpOp::Ge, int),
            Prim::And => op_arrow(&[BaseType::Bool, BaseType::Bool], &["a", "b"], |a| {
                bool_iff(Prop::and2(Prop::Atom(a[0].clone()), Prop::Atom(a[1].clone())))
            }),
            Prim::Or => op_arrow(&[BaseType::Bool, BaseType::Bool], &["a", "b"], |a| {
                bool_iff(Prop::or2(Prop::Atom(a[0].clone()), Prop::Atom(a[1].clone())))
            }),
            Prim::Not => op_arrow(&[BaseType::Bool], &["a"], |a| bool_iff(Prop::not(Prop::Atom(a[0].clone())))),
            Prim::NatGen => op_arrow(&[BaseType::Unit], &["u"], |_| RefinementType::under(BaseType::Nat, Prop::Top)),
            Prim::IntGen => op_arrow(&[BaseType::Unit], &["u"], |_| RefinementType::under(BaseType::Int, Prop::Top)),
            Prim::BoolGen => op_arrow(&[BaseType::Unit], &["u"], |_| RefinementType::under(BaseType::Bool, Prop::Top)),
            Prim::IntRange => op_arrow(&[BaseType::Int, BaseType::Int], &["a", "b"], |a| {
                RefinementType::under(
                    BaseType::Int,
                    Prop::and2(
                        Prop::cmp(CmpOp::Le, a[0].clone(), nu()),
                        Prop::cmp(CmpOp::Le, nu(), a[1].clone()),
                    ),
                )
            }),
        },
        Op::Ctor(c) => match c {
            Ctor::True => RefinementType::under(BaseType::Bool, Prop::Atom(nu())),
            Ctor::False => RefinementType::under(BaseType::Bool, Prop::not(Prop::Atom(nu()))),
            Ctor::Zero => RefinementType::under(BaseType::Nat, Prop::nu_eq(Expr::Int(0))),
            Ctor::Succ => op_arrow(&[BaseType::Nat], &["n"], |a| {
                RefinementType::under(BaseType::Nat, Prop::nu_eq(Expr::add(a[0].clone(), Expr::Int(1))))
            }),
            Ctor::Nil => RefinementType::under(BaseType::list(elem), Prop::pred("emp", vec![nu()])),
            Ctor::Leaf => RefinementType::under(BaseType::tree(elem), Prop::pred("emp", vec![nu()])),
            Ctor::Cons => {
                let l = BaseType::list(elem.clone());
                op_arrow(&[elem, l.clone()], &["h", "t"], |a| {
                    RefinementType::under(
                        l,
                        Prop::and2(
                            Prop::pred("hd", vec![nu(), a[0].clone()]),
                            Prop::pred("tl", vec![nu(), a[1].clone()]),
                        ),
                    )
                })
            }
            Ctor::Node => {
                let t = BaseType::tree(elem.clone());
                op_arrow(&[elem, t.clone(), t.clone()], &["x", "l", "r"], |a| {
                    RefinementType::under(
                        t,
                        Prop::And(vec![
                            Prop::pred("root", vec![nu(), a[0].clone()]),
                            Prop::pred("lch", vec![nu(), a[1].clone()]),
                            Prop::pred("rch", vec![nu(), a[2].clone()]),
                        ]),
                    )
                })
            }
        },
    }
}

/// Qualifier characterizing exactly the constant `c` at `at`. Data
/// constants are described through their constructors with existentially
/// quantified components.
pub fn const_qual(c: &Constant, at: &Expr, ty: &BaseType) -> Prop {
    match c {
        Constant::Unit => Prop::Top,
        Constant::Bool(true) => Prop::Atom(at.clone()),
        Constant::Bool(false) => Prop::not(Prop::Atom(at.clone())),
        Constant::Int(n) => Prop::eq(at.clone(), Expr::Int(*n)),
        Constant::Data(Ctor::Nil | Ctor::Leaf, _) => Prop::pred("emp", vec![at.clone()]),
        Constant::Data(ctor, args) => {
            let elem = ty.elem().cloned().unwrap_or(BaseType::Int);
            let (names, preds): (Vec<&str>, Vec<&str>) = match ctor {
                Ctor::Cons => (vec!["h", "t"], vec!["hd", "tl"]),
                Ctor::Node => (vec!["x", "l", "r"], vec!["root", "lch", "rch"]),
                _ => return Prop::Bot,
            };
            let mut binders = Vec::new();
            let mut conj = Vec::new();
            for ((arg, hint), pred) in args.iter().zip(names).zip(preds) {
                let x = global_fresh(hint);
                let sort = if hint == "h" || hint == "x" { elem.clone() } else { ty.clone() };
                conj.push(Prop::pred(pred, vec![at.clone(), Expr::var(x.clone())]));
                conj.push(const_qual(arg, &Expr::var(x.clone()), &sort));
                binders.push((x, sort));
            }
            binders.into_iter().rev().fold(Prop::And(conj), |acc, (x, s)| Prop::exists(x, s, acc))
        }
    }
}

/// `Ty(c)` for a constant of base type `ty`.
pub fn ty_of_const(c: &Constant, ty: &BaseType) -> RefinementType {
    RefinementType::under(ty.clone(), const_qual(c, &nu(), ty).simplify())
}

/// `Ty(id)` by surface name: operators, constructors, and literals.
/// Polymorphic constructors are instantiated at `int`.
pub fn ty_of(id: &str) -> Result<RefinementType> {
    if let Ok(n) = id.parse::<i64>() {
        return Ok(ty_of_const(&Constant::Int(n), &BaseType::Int));
    }
    match id {
        "true" => return Ok(ty_of_op(Op::Ctor(Ctor::True), None)),
        "false" => return Ok(ty_of_op(Op::Ctor(Ctor::False), None)),
        "()" => return Ok(RefinementType::under(BaseType::Unit, Prop::Top)),
        "[]" => return Ok(ty_of_op(Op::Ctor(Ctor::Nil), None)),
        _ => {}
    }
    if let Some(p) = Prim::from_name(id) {
        return Ok(ty_of_op(Op::Prim(p), None));
    }
    if let Some(c) = Ctor::from_name(id) {
        return Ok(ty_of_op(Op::Ctor(c), None));
    }
    Err(Error::UnknownPrimitive(id.to_string()))
}

/// Argument sort of a method predicate, possibly mentioning type variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SortPattern {
    Var(String),
    Unit,
    Bool,
    Int,
    List(Box<SortPattern>),
    Tree(Box<SortPattern>),
}

impl SortPattern {
    /// Matches a concrete sort, extending the type-variable assignment.
    /// `nat` is matched as `int`.
    pub fn matches(&self, b: &BaseType, env: &mut BTreeMap<String, BaseType>) -> bool {
        match (self, b) {
            (SortPattern::Var(v), _) => {
                let b = smt_sort(b);
                match env.get(v) {
                    Some(prev) => *prev == b,
                    None => {
                        env.insert(v.clone(), b);
                        true
                    }
                }
            }
            (SortPattern::Unit, BaseType::Unit) | (SortPattern::Bool, BaseType::Bool) => true,
            (SortPattern::Int, BaseType::Int | BaseType::Nat) => true,
            (SortPattern::List(p), BaseType::List(e)) | (SortPattern::Tree(p), BaseType::Tree(e)) => p.matches(e, env),
            _ => false,
        }
    }

    fn from_spec(s: &crate::syntax::parse::SortSpec) -> SortPattern {
        use crate::syntax::parse::SortSpec;
        match s {
            SortSpec::Var(v) => SortPattern::Var(v.clone()),
            SortSpec::Base(b) => SortPattern::from_base(b),
            SortSpec::ListOf(e) => SortPattern::List(Box::new(SortPattern::from_spec(e))),
            SortSpec::TreeOf(e) => SortPattern::Tree(Box::new(SortPattern::from_spec(e))),
        }
    }

    fn from_base(b: &BaseType) -> SortPattern {
        match b {
            BaseType::Unit => SortPattern::Unit,
            BaseType::Bool => SortPattern::Bool,
            BaseType::Nat | BaseType::Int => SortPattern::Int,
            BaseType::List(e) => SortPattern::List(Box::new(SortPattern::from_base(e))),
            BaseType::Tree(e) => SortPattern::Tree(Box::new(SortPattern::from_base(e))),
        }
    }
}

impl fmt::Display for SortPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortPattern::Var(v) => write!(f, "'{v}"),
            SortPattern::Unit => write!(f, "unit"),
            SortPattern::Bool => write!(f, "bool"),
            SortPattern::Int => write!(f, "int"),
            SortPattern::List(e) => write!(f, "{e} list"),
            SortPattern::Tree(e) => write!(f, "{e} tree"),
        }
    }
}

/// The solver-level sort of a base type: `nat` collapses to `int`.
pub fn smt_sort(b: &BaseType) -> BaseType {
    match b {
        BaseType::Nat => BaseType::Int,
        BaseType::List(e) => BaseType::list(smt_sort(e)),
        BaseType::Tree(e) => BaseType::tree(smt_sort(e)),
        b => b.clone(),
    }
}

pub type ConcreteEval = Arc<dyn Fn(&[Constant]) -> Option<bool> + Send + Sync>;

#[derive(Clone)]
pub struct MethodPredicate {
    pub name: String,
    pub arg_sorts: Vec<SortPattern>,
    /// Executable meaning for the oracle; `None` for user predicates
    /// without a built-in interpretation.
    pub eval: Option<ConcreteEval>,
}

impl fmt::Debug for MethodPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sorts: Vec<String> = self.arg_sorts.iter().map(|s| s.to_string()).collect();
        write!(f, "pred {}({})", self.name, sorts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub name: String,
    /// Text of the formula; polymorphic axioms are re-parsed per
    /// instantiation of their type variables.
    pub source: String,
    pub tyvars: Vec<String>,
    pub line: usize,
}

/// A monomorphic axiom ready for encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomInstance {
    pub name: String,
    pub formula: Prop,
}

/// Predicates from constructor typings; their axioms are always in scope
/// for the corresponding datatype sorts.
pub const CONSTRUCTOR_PREDICATES: &[&str] = &["emp", "hd", "tl", "root", "lch", "rch"];

#[derive(Clone, Debug, Default)]
pub struct PredicateRegistry {
    preds: Vec<MethodPredicate>,
    axioms: Vec<Axiom>,
}

const SHIPPED: &str = include_str!("../assets/prelude.tgp");

impl PredicateRegistry {
    pub fn empty() -> Self {
        PredicateRegistry::default()
    }

    /// The shipped predicate set with its axioms.
    pub fn builtin() -> Self {
        let mut r = PredicateRegistry::empty();
        r.load_str(SHIPPED).expect("shipped predicate file is well formed");
        r
    }

    pub fn predicates(&self) -> &[MethodPredicate] {
        &self.preds
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    /// Signatures registered under `name`.
    pub fn signatures(&self, name: &str) -> impl Iterator<Item = &MethodPredicate> + '_ {
        let name = name.to_string();
        self.preds.iter().filter(move |p| p.name == name)
    }

    /// Resolves an application of `name` at concrete argument sorts.
    pub fn resolve(&self, name: &str, sorts: &[BaseType]) -> Result<&MethodPredicate> {
        let mut arity = None;
        for p in self.signatures(name) {
            arity = Some(p.arg_sorts.len());
            if p.arg_sorts.len() != sorts.len() {
                continue;
            }
            let mut env = BTreeMap::new();
            if p.arg_sorts.iter().zip(sorts).all(|(pat, s)| pat.matches(s, &mut env)) {
                return Ok(p);
            }
        }
        match arity {
            None => Err(Error::UnknownPredicate(name.to_string())),
            Some(n) if n != sorts.len() => {
                Err(Error::ArityMismatch { name: name.to_string(), expected: n, found: sorts.len() })
            }
            Some(_) => {
                let s: Vec<String> = sorts.iter().map(|s| s.to_string()).collect();
                Err(Error::SortMismatch(format!("no signature of `{name}` accepts ({})", s.join(", "))))
            }
        }
    }

    pub fn register_predicate(&mut self, p: MethodPredicate, axioms: Vec<Axiom>) -> Result<()> {
        if self.preds.iter().any(|q| q.name == p.name && q.arg_sorts == p.arg_sorts) {
            return Err(Error::DuplicatePredicate(p.name));
        }
        self.preds.push(p);
        for a in axioms {
            self.register_axiom(a)?;
        }
        Ok(())
    }

    /// Adds an axiom after checking that it parses and uses registered
    /// predicates at their arities.
    pub fn register_axiom(&mut self, a: Axiom) -> Result<()> {
        let probe: Vec<(String, BaseType)> = a.tyvars.iter().map(|v| (v.clone(), BaseType::Int)).collect();
        let formula = parse_axiom_formula(&a.source, probe, a.line)?;
        let mut err = None;
        formula.visit(&mut |p| {
            if let Prop::Pred(name, args) = p {
                let mut sigs = self.signatures(name).peekable();
                if sigs.peek().is_none() {
                    err.get_or_insert(Error::UnknownPredicate(name.clone()));
                } else if !self.signatures(name).any(|s| s.arg_sorts.len() == args.len()) {
                    let expected = self.signatures(name).next().unwrap().arg_sorts.len();
                    err.get_or_insert(Error::ArityMismatch { name: name.clone(), expected, found: args.len() });
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        self.axioms.push(a);
        Ok(())
    }

    /// Reads `pred name(sorts)` and `axiom name: φ` declarations. A
    /// declaration extends over continuation lines until the next line
    /// starting with a keyword.
    pub fn load_str(&mut self, src: &str) -> Result<()> {
        for (line, chunk) in split_declarations(src) {
            let mut p = DeclParser::new(&chunk).map_err(|e| shift(e, line))?;
            let kw = p.keyword().map_err(|e| shift(e, line))?;
            match kw.as_str() {
                "pred" => {
                    let name = p.name().map_err(|e| shift(e, line))?;
                    p.sym("(").map_err(|e| shift(e, line))?;
                    let mut sorts = Vec::new();
                    if !p.eat(")") {
                        loop {
                            sorts.push(SortPattern::from_spec(&p.sort().map_err(|e| shift(e, line))?));
                            if p.eat(")") {
                                break;
                            }
                            p.sym(",").map_err(|e| shift(e, line))?;
                        }
                    }
                    if !p.at_eof() {
                        return Err(shift(p.error::<()>("unexpected text after predicate").unwrap_err(), line).into());
                    }
                    let eval = builtin_eval(&name, sorts.len());
                    self.register_predicate(MethodPredicate { name, arg_sorts: sorts, eval }, vec![])?;
                }
                "axiom" => {
                    let name = p.name().map_err(|e| shift(e, line))?;
                    p.sym(":").map_err(|e| shift(e, line))?;
                    let colon = chunk.find(':').unwrap();
                    let source = chunk[colon + 1..].trim().to_string();
                    let tyvars = collect_tyvars(&source);
                    self.register_axiom(Axiom { name, source, tyvars, line })?;
                }
                other => {
                    return Err(ParseError { line, col: 1, msg: format!("expected `pred` or `axiom`, found `{other}`") }
                        .into())
                }
            }
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.load_str(&text)
    }

    /// Monomorphic instances of the axioms relevant to a query over the given
    /// sorts and predicates.
    ///
    /// Type variables range over the element sorts of the datatypes present;
    /// an instance is kept when every datatype sort it quantifies over is
    /// present and every predicate it mentions is either used by the query
    /// or is a constructor predicate.
    pub fn axiom_instances(&self, sorts: &BTreeSet<BaseType>, preds: &BTreeSet<String>) -> Vec<AxiomInstance> {
        let elems: BTreeSet<BaseType> = sorts.iter().filter_map(|s| s.elem().cloned()).collect();
        let mut out = Vec::new();
        for a in &self.axioms {
            for assignment in assignments(&a.tyvars, &elems) {
                let suffix: Vec<String> = assignment.iter().map(|(_, b)| mangle_sort(b)).collect();
                let Ok(formula) = parse_axiom_formula(&a.source, assignment.clone(), a.line) else { continue };
                let mut ok = true;
                formula.visit(&mut |p| match p {
                    Prop::Forall(_, s, _) | Prop::Exists(_, s, _) => {
                        if s.elem().is_some() && !sorts.contains(&smt_sort(s)) {
                            ok = false;
                        }
                    }
                    Prop::Pred(name, _) => {
                        if !preds.contains(name) && !CONSTRUCTOR_PREDICATES.contains(&name.as_str()) {
                            ok = false;
                        }
                    }
                    _ => {}
                });
                if ok {
                    let name =
                        if suffix.is_empty() { a.name.clone() } else { format!("{}[{}]", a.name, suffix.join(",")) };
                    out.push(AxiomInstance { name, formula });
                }
            }
        }
        out
    }

    /// Concrete evaluation of a predicate application.
    pub fn eval(&self, name: &str, args: &[Constant]) -> Result<bool> {
        let p = self
            .signatures(name)
            .find(|p| p.arg_sorts.len() == args.len())
            .ok_or_else(|| Error::UnknownPredicate(name.to_string()))?;
        let f = p.eval.as_ref().ok_or_else(|| Error::Unsupported(format!("`{name}` has no concrete meaning")))?;
        f(args).ok_or_else(|| Error::SortMismatch(format!("`{name}` applied to ill-sorted values")))
    }
}

fn shift(mut e: ParseError, line: usize) -> ParseError {
    e.line += line - 1;
    e
}

fn split_declarations(src: &str) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let starts_decl = ["pred ", "axiom "].iter().any(|k| trimmed.starts_with(k));
        match out.last_mut() {
            Some((_, text)) if !starts_decl => {
                text.push('\n');
                text.push_str(line);
            }
            _ => out.push((i + 1, line.to_string())),
        }
    }
    out
}

fn collect_tyvars(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '\'' && chars.get(i + 1).is_some_and(|c| c.is_alphabetic()) && (i == 0 || !chars[i - 1].is_alphanumeric()) {
            let start = i + 1;
            i += 1;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let v: String = chars[start..i].iter().collect();
            if !out.contains(&v) {
                out.push(v);
            }
        } else {
            i += 1;
        }
    }
    out
}

fn assignments(vars: &[String], elems: &BTreeSet<BaseType>) -> Vec<Vec<(String, BaseType)>> {
    let mut out = vec![vec![]];
    for v in vars {
        let mut next = Vec::new();
        for partial in &out {
            for e in elems {
                let mut p = partial.clone();
                p.push((v.clone(), e.clone()));
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn parse_axiom_formula(src: &str, tyvars: Vec<(String, BaseType)>, line: usize) -> Result<Prop> {
    let mut p = DeclParser::with_tyvars(src, tyvars).map_err(|e| shift(e, line))?;
    let (binders, body) = p.axiom_body().map_err(|e| shift(e, line))?;
    if !p.at_eof() {
        return Err(shift(p.error::<()>("unexpected text after axiom").unwrap_err(), line).into());
    }
    Ok(binders.into_iter().rev().fold(body, |acc, (x, s)| Prop::forall(x, s, acc)))
}

/// Solver-level name fragment for a sort: `Int`, `List_Int`, `Tree_List_Int`.
pub fn mangle_sort(b: &BaseType) -> String {
    match b {
        BaseType::Unit => "Unit".into(),
        BaseType::Bool => "Bool".into(),
        BaseType::Nat | BaseType::Int => "Int".into(),
        BaseType::List(e) => format!("List_{}", mangle_sort(e)),
        BaseType::Tree(e) => format!("Tree_{}", mangle_sort(e)),
    }
}

fn list(c: &Constant) -> Option<Vec<&Constant>> {
    c.list_items()
}

enum Tree<'a> {
    Leaf,
    Node(&'a Constant, &'a Constant, &'a Constant),
}

fn tree(c: &Constant) -> Option<Tree<'_>> {
    match c {
        Constant::Data(Ctor::Leaf, _) => Some(Tree::Leaf),
        Constant::Data(Ctor::Node, a) => Some(Tree::Node(&a[0], &a[1], &a[2])),
        _ => None,
    }
}

fn tree_elems<'a>(c: &'a Constant, out: &mut Vec<&'a Constant>) -> Option<()> {
    match tree(c)? {
        Tree::Leaf => Some(()),
        Tree::Node(x, l, r) => {
            tree_elems(l, out)?;
            out.push(x);
            tree_elems(r, out)
        }
    }
}

fn depth(c: &Constant) -> Option<i64> {
    match tree(c)? {
        Tree::Leaf => Some(0),
        Tree::Node(_, l, r) => Some(1 + depth(l)?.max(depth(r)?)),
    }
}

fn perfect(c: &Constant) -> Option<bool> {
    match tree(c)? {
        Tree::Leaf => Some(true),
        Tree::Node(_, l, r) => Some(perfect(l)? && perfect(r)? && depth(l)? == depth(r)?),
    }
}

fn bst_within(c: &Constant, lo: Option<i64>, hi: Option<i64>) -> Option<bool> {
    match tree(c)? {
        Tree::Leaf => Some(true),
        Tree::Node(x, l, r) => {
            let x = x.as_int()?;
            if lo.is_some_and(|lo| x <= lo) || hi.is_some_and(|hi| x >= hi) {
                return Some(false);
            }
            Some(bst_within(l, lo, Some(x))? && bst_within(r, Some(x), hi)?)
        }
    }
}

/// Elements of a list or tree constant.
fn elements(c: &Constant) -> Option<Vec<&Constant>> {
    if let Some(items) = list(c) {
        return Some(items);
    }
    let mut out = Vec::new();
    tree_elems(c, &mut out)?;
    Some(out)
}

/// Executable meaning of the shipped predicates, looked up by name and
/// arity when a predicate is declared.
pub fn builtin_eval(name: &str, arity: usize) -> Option<ConcreteEval> {
    let f: ConcreteEval = match (name, arity) {
        ("emp", 1) => Arc::new(|a| match &a[0] {
            Constant::Data(Ctor::Nil | Ctor::Leaf, _) => Some(true),
            Constant::Data(..) => Some(false),
            _ => None,
        }),
        ("hd", 2) => Arc::new(|a| match &a[0] {
            Constant::Data(Ctor::Cons, xs) => Some(xs[0] == a[1]),
            Constant::Data(Ctor::Nil, _) => Some(false),
            _ => None,
        }),
        ("tl", 2) => Arc::new(|a| match &a[0] {
            Constant::Data(Ctor::Cons, xs) => Some(xs[1] == a[1]),
            Constant::Data(Ctor::Nil, _) => Some(false),
            _ => None,
        }),
        ("root" | "lch" | "rch", 2) => {
            let idx = match name {
                "root" => 0,
                "lch" => 1,
                _ => 2,
            };
            Arc::new(move |a| match &a[0] {
                Constant::Data(Ctor::Node, xs) => Some(xs[idx] == a[1]),
                Constant::Data(Ctor::Leaf, _) => Some(false),
                _ => None,
            })
        }
        ("mem", 2) => Arc::new(|a| Some(elements(&a[0])?.contains(&&a[1]))),
        ("len", 2) => Arc::new(|a| {
            let n = a[1].as_int()?;
            match list(&a[0]) {
                Some(items) => Some(items.len() as i64 == n),
                None => Some(depth(&a[0])? == n),
            }
        }),
        ("sorted", 1) => Arc::new(|a| {
            let items = list(&a[0])?;
            Some(items.windows(2).all(|w| w[0] <= w[1]))
        }),
        ("uniq", 1) => Arc::new(|a| {
            let items = elements(&a[0])?;
            let set: BTreeSet<&Constant> = items.iter().copied().collect();
            Some(set.len() == items.len())
        }),
        ("bst", 1) => Arc::new(|a| bst_within(&a[0], None, None)),
        ("complete", 1) => Arc::new(|a| perfect(&a[0])),
        _ => return None,
    };
    Some(f)
}

/// Checks that a constructor's result qualifier, instantiated at concrete
/// arguments, holds of exactly the constructed value among `candidates`.
pub fn constructor_qual_exact(
    reg: &PredicateRegistry,
    ctor: Ctor,
    args: &[Constant],
    candidates: &[Constant],
    elem: &BaseType,
    bounds: &crate::interp::DomainBounds,
) -> Result<bool> {
    let mut ty = ty_of_op(Op::Ctor(ctor), Some(elem));
    let mut env = crate::interp::Env::new();
    for a in args {
        match ty {
            RefinementType::Arrow { binder, cod, .. } => {
                env.insert(binder, a.clone());
                ty = *cod;
            }
            _ => return Ok(false),
        }
    }
    let Some(q) = ty.qual().cloned() else { return Ok(false) };
    let built = crate::interp::eval_bounded(&crate::syntax::Term::let_op("$b", Op::Ctor(ctor), args.iter().cloned().map(crate::syntax::Term::Const).collect(), crate::syntax::Term::var("$b")), bounds)?;
    for c in candidates {
        env.insert(NU.to_string(), c.clone());
        let holds = crate::interp::eval_prop(reg, &q, &env, bounds)?;
        if holds != built.values.contains(c) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_typings() {
        assert_eq!(ty_of("true").unwrap().to_string(), "[ν:bool | ν]");
        let ng = ty_of("nat_gen").unwrap();
        assert!(ng.alpha_eq(&crate::syntax::parse_type("u:{v:unit | true} -> [v:nat | true]").unwrap()));
        let cons = ty_of("Cons").unwrap();
        let expected =
            crate::syntax::parse_type("x:{v:int | true} -> y:{v:int list | true} -> [v:int list | hd(v, x) && tl(v, y)]")
                .unwrap();
        assert!(cons.alpha_eq(&expected), "{cons}");
        assert!(matches!(ty_of("frobnicate"), Err(Error::UnknownPrimitive(_))));
    }

    #[test]
    fn ty_of_is_alpha_stable() {
        let a = ty_of("int_range").unwrap();
        let b = ty_of("int_range").unwrap();
        assert_ne!(a, b, "binders should be fresh");
        assert!(a.alpha_eq(&b));
    }

    #[test]
    fn shipped_registry_loads() {
        let r = PredicateRegistry::builtin();
        assert!(r.resolve("mem", &[BaseType::list(BaseType::Int), BaseType::Int]).is_ok());
        assert!(r.resolve("mem", &[BaseType::tree(BaseType::Int), BaseType::Nat]).is_ok());
        assert!(matches!(
            r.resolve("mem", &[BaseType::list(BaseType::Int)]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(!r.axioms().is_empty());
    }

    #[test]
    fn duplicate_predicate_is_rejected() {
        let mut r = PredicateRegistry::empty();
        r.load_str("pred p(int)").unwrap();
        assert!(matches!(r.load_str("pred p(int)"), Err(Error::DuplicatePredicate(_))));
        // Overloading at a different sort is fine.
        r.load_str("pred p(bool)").unwrap();
    }

    #[test]
    fn axiom_arity_is_checked() {
        let mut r = PredicateRegistry::empty();
        r.load_str("pred len('a list, int)\npred mem('a list, 'a)").unwrap();
        r.load_str("axiom ok: forall l:'a list. len(l, 0) ==> (forall u:'a. not mem(l, u))").unwrap();
        assert!(matches!(
            r.load_str("axiom bad: forall l:'a list. len(l) ==> true"),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(r.load_str("axiom bad2: forall l:int. nope(l)"), Err(Error::UnknownPredicate(_))));
    }

    #[test]
    fn instances_follow_query_sorts() {
        let r = PredicateRegistry::builtin();
        let sorts: BTreeSet<BaseType> = [BaseType::list(BaseType::Int), BaseType::Int].into_iter().collect();
        let preds: BTreeSet<String> = ["len".to_string()].into_iter().collect();
        let inst = r.axiom_instances(&sorts, &preds);
        assert!(inst.iter().any(|a| a.name.starts_with("list_len")));
        assert!(inst.iter().all(|a| !a.name.starts_with("tree_")));
        assert!(inst.iter().all(|a| !a.formula.predicates().contains("sorted")));
    }

    #[test]
    fn concrete_meanings() {
        let r = PredicateRegistry::builtin();
        let l = Constant::from_list(vec![Constant::Int(1), Constant::Int(2), Constant::Int(2)]);
        assert!(r.eval("sorted", &[l.clone()]).unwrap());
        assert!(!r.eval("uniq", &[l.clone()]).unwrap());
        assert!(r.eval("len", &[l.clone(), Constant::Int(3)]).unwrap());
        assert!(r.eval("hd", &[l.clone(), Constant::Int(1)]).unwrap());
        let t = Constant::node(Constant::Int(2), Constant::node(Constant::Int(1), Constant::leaf(), Constant::leaf()), Constant::leaf());
        assert!(r.eval("bst", &[t.clone()]).unwrap());
        assert!(r.eval("len", &[t.clone(), Constant::Int(2)]).unwrap());
        assert!(!r.eval("complete", &[t]).unwrap());
    }
}
