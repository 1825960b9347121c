use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::prim::{mangle_sort, smt_sort, PredicateRegistry};
use crate::syntax::{BaseType, CmpOp, Expr, Prop, NU};

/// A rendered obligation.
#[derive(Clone, Debug)]
pub struct Encoded {
    /// The goal in `∀*∃*` prenex form with solver-safe names.
    pub prenex: Prop,
    pub text: String,
    pub logic: &'static str,
}

fn stem(name: &str) -> String {
    if name == NU {
        return "nu".into();
    }
    let s = name.trim_start_matches('$');
    let s = s.split('!').next().unwrap_or(s);
    let s = s.trim_end_matches(|c: char| c.is_ascii_digit());
    let mut out = String::new();
    for c in s.chars() {
        match c {
            'ν' => out.push_str("nu"),
            '\'' => out.push_str("_q"),
            c if c.is_ascii_alphanumeric() || c == '_' => out.push(c),
            _ => out.push('_'),
        }
    }
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, 'v');
    }
    out
}

/// `nat` quantifiers become guarded integer quantifiers; datatype sorts lose
/// their `nat` elements.
fn denat(p: &Prop) -> Prop {
    match p {
        Prop::Forall(x, s, b) => {
            let body = denat(b);
            let body = match s {
                BaseType::Nat => Prop::implies(Prop::cmp(CmpOp::Ge, Expr::var(x.clone()), Expr::Int(0)), body),
                _ => body,
            };
            Prop::forall(x.clone(), smt_sort(s), body)
        }
        Prop::Exists(x, s, b) => {
            let body = denat(b);
            let body = match s {
                BaseType::Nat => Prop::and2(Prop::cmp(CmpOp::Ge, Expr::var(x.clone()), Expr::Int(0)), body),
                _ => body,
            };
            match residue(x, &body) {
                Some(r) => Prop::exists(x.clone(), BaseType::Int, r),
                None => Prop::exists(x.clone(), smt_sort(s), body),
            }
        }
        Prop::Not(q) => Prop::not(denat(q)),
        Prop::And(ps) => Prop::And(ps.iter().map(denat).collect()),
        Prop::Or(ps) => Prop::Or(ps.iter().map(denat).collect()),
        Prop::Implies(a, b) => Prop::implies(denat(a), denat(b)),
        Prop::Iff(a, b) => Prop::iff(denat(a), denat(b)),
        _ => p.clone(),
    }
}

/// `∃g. g ≥ 0 ∧ φ(g mod k)` is `∃r. 0 ≤ r < k ∧ φ(r)` when `g` occurs
/// nowhere else. This is the shape every `<+>` ghost takes, and solvers do
/// far better on the bounded residue than on `mod` under a quantifier.
fn residue(x: &str, body: &Prop) -> Option<Prop> {
    let guard = |p: &Prop| {
        matches!(p, Prop::Cmp(CmpOp::Ge, Expr::Var(v), Expr::Int(0)) | Prop::Cmp(CmpOp::Le, Expr::Int(0), Expr::Var(v)) if v == x)
    };
    let mut cs = Vec::new();
    flatten_and(body, &mut cs);
    let rest: Vec<Prop> = cs.into_iter().filter(|c| !guard(c)).collect();
    let mut k = None;
    let rest: Vec<Prop> = rest.iter().map(|c| strip_mod_prop(c, x, &mut k)).collect::<Option<_>>()?;
    let k = k?;
    let mut out = vec![
        Prop::cmp(CmpOp::Le, Expr::Int(0), Expr::var(x.to_string())),
        Prop::cmp(CmpOp::Lt, Expr::var(x.to_string()), Expr::Int(k)),
    ];
    out.extend(rest);
    Some(Prop::And(out))
}

fn strip_mod_prop(p: &Prop, x: &str, k: &mut Option<i64>) -> Option<Prop> {
    let mut go = |q: &Prop| strip_mod_prop(q, x, k);
    Some(match p {
        Prop::Top | Prop::Bot => p.clone(),
        Prop::Atom(e) => Prop::Atom(strip_mod(e, x, k)?),
        Prop::Cmp(op, a, b) => Prop::Cmp(*op, strip_mod(a, x, k)?, strip_mod(b, x, k)?),
        Prop::Pred(n, args) => Prop::Pred(n.clone(), args.iter().map(|a| strip_mod(a, x, k)).collect::<Option<_>>()?),
        Prop::Not(q) => Prop::not(go(q)?),
        Prop::And(ps) => Prop::And(ps.iter().map(go).collect::<Option<_>>()?),
        Prop::Or(ps) => Prop::Or(ps.iter().map(go).collect::<Option<_>>()?),
        Prop::Implies(a, b) => Prop::implies(go(a)?, go(b)?),
        Prop::Iff(a, b) => Prop::iff(go(a)?, go(b)?),
        Prop::Forall(y, _, _) | Prop::Exists(y, _, _) if y == x => p.clone(),
        Prop::Forall(y, s, b) => Prop::forall(y.clone(), s.clone(), go(b)?),
        Prop::Exists(y, s, b) => Prop::exists(y.clone(), s.clone(), go(b)?),
    })
}

fn strip_mod(e: &Expr, x: &str, k: &mut Option<i64>) -> Option<Expr> {
    let bin = |a: &Expr, b: &Expr, k: &mut Option<i64>| Some((Box::new(strip_mod(a, x, k)?), Box::new(strip_mod(b, x, k)?)));
    Some(match e {
        Expr::Mod(a, b) => match (&**a, &**b) {
            (Expr::Var(v), Expr::Int(m)) if v == x && *m > 0 && k.map_or(true, |k| k == *m) => {
                *k = Some(*m);
                Expr::var(x.to_string())
            }
            _ => {
                let (a, b) = bin(a, b, k)?;
                Expr::Mod(a, b)
            }
        },
        Expr::Var(v) if v == x => return None,
        Expr::Var(_) | Expr::Int(_) | Expr::Bool(_) | Expr::Unit => e.clone(),
        Expr::Add(a, b) => {
            let (a, b) = bin(a, b, k)?;
            Expr::Add(a, b)
        }
        Expr::Sub(a, b) => {
            let (a, b) = bin(a, b, k)?;
            Expr::Sub(a, b)
        }
        Expr::Mul(a, b) => {
            let (a, b) = bin(a, b, k)?;
            Expr::Mul(a, b)
        }
        Expr::Neg(a) => Expr::Neg(Box::new(strip_mod(a, x, k)?)),
    })
}

struct Prenexer {
    univ: Vec<(String, BaseType)>,
    exist: Vec<(String, BaseType)>,
    next: usize,
}

impl Prenexer {
    fn rename_expr(e: &Expr, env: &[(String, String)]) -> Expr {
        match e {
            Expr::Var(x) => match env.iter().rev().find(|(from, _)| from == x) {
                Some((_, to)) => Expr::Var(to.clone()),
                None => e.clone(),
            },
            Expr::Add(a, b) => Expr::Add(Box::new(Self::rename_expr(a, env)), Box::new(Self::rename_expr(b, env))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(Self::rename_expr(a, env)), Box::new(Self::rename_expr(b, env))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(Self::rename_expr(a, env)), Box::new(Self::rename_expr(b, env))),
            Expr::Mod(a, b) => Expr::Mod(Box::new(Self::rename_expr(a, env)), Box::new(Self::rename_expr(b, env))),
            Expr::Neg(a) => Expr::Neg(Box::new(Self::rename_expr(a, env))),
            Expr::Int(_) | Expr::Bool(_) | Expr::Unit => e.clone(),
        }
    }

    fn go(&mut self, p: &Prop, pos: bool, env: &mut Vec<(String, String)>) -> Prop {
        match p {
            Prop::Top | Prop::Bot => p.clone(),
            Prop::Atom(e) => Prop::Atom(Self::rename_expr(e, env)),
            Prop::Cmp(op, a, b) => Prop::Cmp(*op, Self::rename_expr(a, env), Self::rename_expr(b, env)),
            Prop::Pred(n, args) => Prop::Pred(n.clone(), args.iter().map(|a| Self::rename_expr(a, env)).collect()),
            Prop::Not(q) => Prop::not(self.go(q, !pos, env)),
            Prop::And(ps) => Prop::And(ps.iter().map(|q| self.go(q, pos, env)).collect()),
            Prop::Or(ps) => Prop::Or(ps.iter().map(|q| self.go(q, pos, env)).collect()),
            Prop::Implies(a, b) => {
                let a = self.go(a, !pos, env);
                Prop::implies(a, self.go(b, pos, env))
            }
            Prop::Iff(a, b) => {
                if a.has_quantifier() || b.has_quantifier() {
                    let both = Prop::and2(
                        Prop::implies((**a).clone(), (**b).clone()),
                        Prop::implies((**b).clone(), (**a).clone()),
                    );
                    self.go(&both, pos, env)
                } else {
                    let a = self.go(a, pos, env);
                    Prop::iff(a, self.go(b, pos, env))
                }
            }
            Prop::Forall(x, s, b) | Prop::Exists(x, s, b) => {
                let universal = matches!(p, Prop::Forall(..)) == pos;
                let fresh = format!("{}!{}", stem(x), self.next);
                self.next += 1;
                env.push((x.clone(), fresh.clone()));
                let m = self.go(b, pos, env);
                env.pop();
                if universal {
                    self.univ.push((fresh, s.clone()));
                } else {
                    self.exist.push((fresh, s.clone()));
                }
                m
            }
        }
    }
}

/// Negation normal form above quantifiers: quantifier-free subformulas are
/// kept intact, everything else loses `¬`, `⟹` and `⟺`.
fn nnf(p: &Prop, pos: bool) -> Prop {
    if !p.has_quantifier() {
        return if pos { p.clone() } else { Prop::not(p.clone()) };
    }
    match p {
        Prop::Not(q) => nnf(q, !pos),
        Prop::And(ps) | Prop::Or(ps) => {
            let qs = ps.iter().map(|q| nnf(q, pos)).collect();
            if matches!(p, Prop::And(_)) == pos {
                Prop::And(qs)
            } else {
                Prop::Or(qs)
            }
        }
        Prop::Implies(a, b) => {
            if pos {
                Prop::Or(vec![nnf(a, false), nnf(b, true)])
            } else {
                Prop::And(vec![nnf(a, true), nnf(b, false)])
            }
        }
        Prop::Iff(a, b) => {
            let both = Prop::and2(
                Prop::implies((**a).clone(), (**b).clone()),
                Prop::implies((**b).clone(), (**a).clone()),
            );
            nnf(&both, pos)
        }
        Prop::Forall(x, s, b) | Prop::Exists(x, s, b) => {
            let body = nnf(b, pos);
            if matches!(p, Prop::Forall(..)) == pos {
                Prop::forall(x.clone(), s.clone(), body)
            } else {
                Prop::exists(x.clone(), s.clone(), body)
            }
        }
        _ => unreachable!("atoms are quantifier-free"),
    }
}

fn has_forall(p: &Prop) -> bool {
    let mut found = false;
    p.visit(&mut |q| found |= matches!(q, Prop::Forall(..)));
    found
}

/// Predicates whose last argument is a function of the others.
const FUNCTIONAL: &[&str] = &["hd", "tl", "root", "lch", "rch", "len"];

fn pins(p: &Prop, x: &str) -> bool {
    match p {
        Prop::Pred(name, args) if FUNCTIONAL.contains(&name.as_str()) => {
            matches!(args.last(), Some(Expr::Var(y)) if y == x)
                && args[..args.len() - 1].iter().all(|a| !a.mentions(x))
        }
        _ => false,
    }
}

/// Rewrites an NNF formula so that, wherever possible, no existential
/// scopes over a universal; hoisting universals in [`prenex`] is then
/// exact. Steps, all equivalences: boolean existentials are expanded,
/// existentials are pushed into disjunctions and past conjuncts that do not
/// mention them, and an existential pinned by a functional predicate
/// `P(ō, x)` becomes `(∃x. P(ō, x)) ∧ ∀x. P(ō, x) ⟹ R`.
fn miniscope(p: &Prop) -> Prop {
    match p {
        Prop::And(ps) => Prop::And(ps.iter().map(miniscope).collect()),
        Prop::Or(ps) => Prop::Or(ps.iter().map(miniscope).collect()),
        Prop::Forall(x, s, b) => Prop::forall(x.clone(), s.clone(), miniscope(b)),
        Prop::Exists(x, s, b) => {
            let b = miniscope(b);
            if has_forall(&b) {
                mini(x, s, &b)
            } else {
                Prop::exists(x.clone(), s.clone(), b)
            }
        }
        _ => p.clone(),
    }
}

fn flatten_and(p: &Prop, out: &mut Vec<Prop>) {
    match p {
        Prop::And(ps) => ps.iter().for_each(|q| flatten_and(q, out)),
        _ => out.push(p.clone()),
    }
}

fn mini(x: &str, s: &BaseType, b: &Prop) -> Prop {
    if !b.mentions(x) {
        return b.clone();
    }
    if *s == BaseType::Bool {
        let t = b.subst(x, &Expr::Bool(true)).simplify();
        let f = b.subst(x, &Expr::Bool(false)).simplify();
        return miniscope(&nnf(&Prop::Or(vec![t, f]), true));
    }
    match b {
        Prop::Or(ds) => Prop::Or(ds.iter().map(|d| mini(x, s, d)).collect()),
        Prop::And(_) => {
            let mut cs = Vec::new();
            flatten_and(b, &mut cs);
            let (with, without): (Vec<Prop>, Vec<Prop>) = cs.into_iter().partition(|c| c.mentions(x));
            if !without.is_empty() {
                let mut out = without;
                out.push(mini(x, s, &Prop::And(with)));
                return Prop::And(out);
            }
            if let [only] = with.as_slice() {
                return match only {
                    Prop::Or(_) => mini(x, s, only),
                    _ => Prop::exists(x.to_string(), s.clone(), only.clone()),
                };
            }
            if let Some(i) = with.iter().position(|c| pins(c, x)) {
                let mut rest = with.clone();
                let pin = rest.remove(i);
                return Prop::And(vec![
                    Prop::exists(x.to_string(), s.clone(), pin.clone()),
                    Prop::forall(x.to_string(), s.clone(), Prop::Or(vec![Prop::not(pin), miniscope(&Prop::And(rest))])),
                ]);
            }
            Prop::exists(x.to_string(), s.clone(), b.clone())
        }
        _ => Prop::exists(x.to_string(), s.clone(), b.clone()),
    }
}

fn scoped(goal: &Prop) -> Prop {
    miniscope(&nnf(&denat(goal).simplify(), true))
}

/// Prenex form `∀U ∃E. M` of a closed goal, with every bound variable
/// renamed apart. Universals are hoisted above all existentials. After
/// [`miniscope`] this is exact except for existentials that still scope over
/// a universal without being pinned; for those `∃x∀y.P` is weakened to
/// `∀y∃x.P`.
pub fn prenex(goal: &Prop) -> Prop {
    let p = scoped(goal);
    let mut pr = Prenexer { univ: vec![], exist: vec![], next: 0 };
    let m = pr.go(&p, true, &mut vec![]).simplify();
    let mut out = m;
    for (x, s) in pr.exist.into_iter().rev() {
        if out.mentions(&x) {
            out = Prop::exists(x, s, out);
        }
    }
    for (x, s) in pr.univ.into_iter().rev() {
        if out.mentions(&x) {
            out = Prop::forall(x, s, out);
        }
    }
    out
}

/// `∀*∃*` followed by a quantifier-free matrix.
pub fn is_forall_exists(p: &Prop) -> bool {
    let mut cur = p;
    while let Prop::Forall(_, _, b) = cur {
        cur = b;
    }
    while let Prop::Exists(_, _, b) = cur {
        cur = b;
    }
    !cur.has_quantifier()
}

struct Renderer<'a> {
    reg: &'a PredicateRegistry,
    sorts: BTreeSet<BaseType>,
    preds: BTreeMap<String, (Vec<BaseType>, String)>,
    nonlinear: bool,
}

fn sort_name(s: &BaseType) -> String {
    match s {
        BaseType::Nat | BaseType::Int => "Int".into(),
        BaseType::Bool => "Bool".into(),
        b => mangle_sort(b),
    }
}

impl Renderer<'_> {
    fn note_sort(&mut self, s: &BaseType) {
        let s = smt_sort(s);
        if let Some(e) = s.elem() {
            self.note_sort(&e.clone());
        }
        self.sorts.insert(s);
    }

    fn expr_sort(&self, e: &Expr, env: &[(String, BaseType)]) -> Result<BaseType> {
        Ok(match e {
            Expr::Var(x) => env
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| Error::UnhousedSymbol(x.clone()))?,
            Expr::Bool(_) => BaseType::Bool,
            Expr::Unit => BaseType::Unit,
            _ => BaseType::Int,
        })
    }

    fn expr(&mut self, e: &Expr, env: &[(String, BaseType)], out: &mut String) -> Result<()> {
        let bin = |r: &mut Self, op: &str, a: &Expr, b: &Expr, out: &mut String| -> Result<()> {
            write!(out, "({op} ").unwrap();
            r.expr(a, env, out)?;
            out.push(' ');
            r.expr(b, env, out)?;
            out.push(')');
            Ok(())
        };
        match e {
            Expr::Var(x) => {
                self.expr_sort(e, env)?;
                out.push_str(x);
            }
            Expr::Int(n) if *n < 0 => write!(out, "(- {})", -(*n as i128)).unwrap(),
            Expr::Int(n) => write!(out, "{n}").unwrap(),
            Expr::Bool(b) => write!(out, "{b}").unwrap(),
            Expr::Unit => {
                self.note_sort(&BaseType::Unit);
                out.push_str("unit!c");
            }
            Expr::Add(a, b) => bin(self, "+", a, b, out)?,
            Expr::Sub(a, b) => bin(self, "-", a, b, out)?,
            Expr::Mul(a, b) => {
                if !matches!(**a, Expr::Int(_)) && !matches!(**b, Expr::Int(_)) {
                    self.nonlinear = true;
                }
                bin(self, "*", a, b, out)?
            }
            Expr::Mod(a, b) => {
                if !matches!(**b, Expr::Int(_)) {
                    self.nonlinear = true;
                }
                bin(self, "mod", a, b, out)?
            }
            Expr::Neg(a) => {
                out.push_str("(- ");
                self.expr(a, env, out)?;
                out.push(')');
            }
        }
        Ok(())
    }

    fn prop(&mut self, p: &Prop, env: &mut Vec<(String, BaseType)>, out: &mut String) -> Result<()> {
        match p {
            Prop::Top => out.push_str("true"),
            Prop::Bot => out.push_str("false"),
            Prop::Atom(e) => self.expr(e, env, out)?,
            Prop::Cmp(op, a, b) => {
                let sym = match op {
                    CmpOp::Eq | CmpOp::Ne => "=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                if *op == CmpOp::Ne {
                    out.push_str("(not ");
                }
                write!(out, "({sym} ").unwrap();
                self.expr(a, env, out)?;
                out.push(' ');
                self.expr(b, env, out)?;
                out.push(')');
                if *op == CmpOp::Ne {
                    out.push(')');
                }
            }
            Prop::Pred(name, args) => {
                let sorts: Vec<BaseType> = args.iter().map(|a| self.expr_sort(a, env)).collect::<Result<_>>()?;
                self.reg.resolve(name, &sorts)?;
                let mut mangled = name.clone();
                for s in &sorts {
                    mangled.push('.');
                    mangled.push_str(&sort_name(s));
                }
                for s in &sorts {
                    self.note_sort(s);
                }
                self.preds.entry(mangled.clone()).or_insert_with(|| (sorts, name.clone()));
                write!(out, "({mangled}").unwrap();
                for a in args {
                    out.push(' ');
                    self.expr(a, env, out)?;
                }
                out.push(')');
            }
            Prop::Not(q) => {
                out.push_str("(not ");
                self.prop(q, env, out)?;
                out.push(')');
            }
            Prop::And(ps) | Prop::Or(ps) => {
                if ps.is_empty() {
                    out.push_str(if matches!(p, Prop::And(_)) { "true" } else { "false" });
                    return Ok(());
                }
                out.push_str(if matches!(p, Prop::And(_)) { "(and" } else { "(or" });
                for q in ps {
                    out.push(' ');
                    self.prop(q, env, out)?;
                }
                out.push(')');
            }
            Prop::Implies(a, b) | Prop::Iff(a, b) => {
                out.push_str(if matches!(p, Prop::Implies(..)) { "(=> " } else { "(= " });
                self.prop(a, env, out)?;
                out.push(' ');
                self.prop(b, env, out)?;
                out.push(')');
            }
            Prop::Forall(..) | Prop::Exists(..) => {
                let forall = matches!(p, Prop::Forall(..));
                let mut binders = Vec::new();
                let mut cur = p;
                loop {
                    match cur {
                        Prop::Forall(x, s, b) if forall => {
                            binders.push((x.clone(), s.clone()));
                            cur = b;
                        }
                        Prop::Exists(x, s, b) if !forall => {
                            binders.push((x.clone(), s.clone()));
                            cur = b;
                        }
                        _ => break,
                    }
                }
                write!(out, "({} (", if forall { "forall" } else { "exists" }).unwrap();
                for (i, (x, s)) in binders.iter().enumerate() {
                    self.note_sort(s);
                    if i > 0 {
                        out.push(' ');
                    }
                    write!(out, "({x} {})", sort_name(&smt_sort(s))).unwrap();
                }
                out.push_str(") ");
                let depth = env.len();
                env.extend(binders.iter().map(|(x, s)| (x.clone(), smt_sort(s))));
                self.prop(cur, env, out)?;
                env.truncate(depth);
                out.push(')');
            }
        }
        Ok(())
    }
}

/// SMT-LIB script asserting the negated goal together with the axiom
/// instances relevant to it; `unsat` means the goal is valid.
pub fn render(goal: &Prop, reg: &PredicateRegistry, origin: &str) -> Result<Encoded> {
    let pgoal = prenex(goal);
    if !is_forall_exists(&pgoal) {
        return Err(Error::ShapeViolation(format!("goal is not ∀*∃* after prenexing: {pgoal}")));
    }
    let mut r = Renderer { reg, sorts: BTreeSet::new(), preds: BTreeMap::new(), nonlinear: false };
    let mut goal_text = String::new();
    r.prop(&pgoal, &mut vec![], &mut goal_text)?;

    let pred_names: BTreeSet<String> = r.preds.values().map(|(_, n)| n.clone()).collect();
    let mut sorts = r.sorts.clone();
    sorts.insert(BaseType::Int);
    let mut axiom_texts = Vec::new();
    for inst in reg.axiom_instances(&sorts, &pred_names) {
        let f = prenex_axiom(&inst.formula);
        let mut t = String::new();
        r.prop(&f, &mut vec![], &mut t)?;
        axiom_texts.push((inst.name, t));
    }

    let logic = if r.nonlinear { "UFNIA" } else { "UFLIA" };
    let mut out = String::new();
    writeln!(out, "; {origin}").unwrap();
    // Declaring the fragment as the logic steers z3 into a quantifier
    // strategy that stalls on the datatype axioms; record it instead.
    writeln!(out, "; fragment {logic}").unwrap();
    writeln!(out, "(set-logic ALL)").unwrap();
    for s in &r.sorts {
        if matches!(s, BaseType::Int | BaseType::Nat | BaseType::Bool) {
            continue;
        }
        writeln!(out, "(declare-sort {} 0)", sort_name(s)).unwrap();
    }
    if r.sorts.contains(&BaseType::Unit) {
        writeln!(out, "(declare-const unit!c Unit)").unwrap();
        writeln!(out, "(assert (forall ((u Unit)) (= u unit!c)))").unwrap();
    }
    for (mangled, (sorts, _)) in &r.preds {
        let args: Vec<String> = sorts.iter().map(sort_name).collect();
        writeln!(out, "(declare-fun {mangled} ({}) Bool)", args.join(" ")).unwrap();
    }
    for (name, t) in &axiom_texts {
        writeln!(out, "; axiom {name}").unwrap();
        writeln!(out, "(assert {t})").unwrap();
    }
    writeln!(out, "(assert (not {goal_text}))").unwrap();
    writeln!(out, "(check-sat)").unwrap();
    Ok(Encoded { prenex: pgoal, text: out, logic })
}

/// Axioms keep their own quantifier structure (they are assumptions, so
/// their ∃ become Skolem functions in the solver); only sorts and names are
/// normalized.
fn prenex_axiom(p: &Prop) -> Prop {
    fn go(p: &Prop, env: &mut Vec<(String, String)>, next: &mut usize) -> Prop {
        match p {
            Prop::Forall(x, s, b) | Prop::Exists(x, s, b) => {
                let fresh = format!("{}!a{}", stem(x), *next);
                *next += 1;
                env.push((x.clone(), fresh.clone()));
                let body = go(b, env, next);
                env.pop();
                if matches!(p, Prop::Forall(..)) {
                    Prop::forall(fresh, s.clone(), body)
                } else {
                    Prop::exists(fresh, s.clone(), body)
                }
            }
            Prop::Not(q) => Prop::not(go(q, env, next)),
            Prop::And(ps) => Prop::And(ps.iter().map(|q| go(q, env, next)).collect()),
            Prop::Or(ps) => Prop::Or(ps.iter().map(|q| go(q, env, next)).collect()),
            Prop::Implies(a, b) => {
                let a = go(a, env, next);
                Prop::implies(a, go(b, env, next))
            }
            Prop::Iff(a, b) => {
                let a = go(a, env, next);
                Prop::iff(a, go(b, env, next))
            }
            Prop::Atom(e) => Prop::Atom(Prenexer::rename_expr(e, env)),
            Prop::Cmp(op, a, b) => Prop::Cmp(*op, Prenexer::rename_expr(a, env), Prenexer::rename_expr(b, env)),
            Prop::Pred(n, args) => Prop::Pred(n.clone(), args.iter().map(|a| Prenexer::rename_expr(a, env)).collect()),
            Prop::Top | Prop::Bot => p.clone(),
        }
    }
    go(&denat(p), &mut vec![], &mut 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_prop;

    #[test]
    fn universals_are_hoisted() {
        let p = parse_prop("exists x:int. x > 0 && (forall y:int. y > x ==> y > 0)").unwrap();
        let q = prenex(&p);
        assert!(is_forall_exists(&q), "{q}");
        assert!(matches!(q, Prop::Forall(..)));
    }

    #[test]
    fn parity_ghosts_become_residues() {
        let p = parse_prop("exists g:nat. g mod 2 == 0 && x > 0").unwrap();
        let d = denat(&p).to_string();
        assert!(!d.contains("mod") && d.contains("g < 2"), "{d}");
        let q = parse_prop("exists g:nat. g mod 2 == 0 && g > 5").unwrap();
        assert!(denat(&q).to_string().contains("mod"));
    }

    #[test]
    fn nat_binders_are_guarded() {
        let p = parse_prop("forall n:nat. n + 1 > 0").unwrap();
        let q = prenex(&p);
        assert_eq!(q.to_string(), "forall n!0:int. n!0 >= 0 ==> n!0 + 1 > 0");
    }

    #[test]
    fn rendering_is_deterministic_and_declares_predicates() {
        let reg = PredicateRegistry::builtin();
        let p = parse_prop("forall l:int list. emp(l) ==> len(l, 0)").unwrap();
        let a = render(&p, &reg, "t").unwrap();
        let b = render(&p.rename("l", "$zz!9"), &reg, "t").unwrap();
        assert_eq!(a.text, b.text.replace("zz!0", "l!0"));
        assert!(a.text.contains("(declare-sort List_Int 0)"));
        assert!(a.text.contains("(declare-fun len.List_Int.Int (List_Int Int) Bool)"));
        assert!(a.text.contains("; axiom list_emp_len[Int]"));
    }
}
