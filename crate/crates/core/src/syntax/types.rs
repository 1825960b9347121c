//! Base types, basic (unrefined) types, refinement types and typing contexts.

use std::fmt;

use super::prop::{Prop, NU};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseType {
    Unit,
    Bool,
    Nat,
    Int,
    List(Box<BaseType>),
    Tree(Box<BaseType>),
}

impl BaseType {
    pub fn list(elem: BaseType) -> Self {
        BaseType::List(Box::new(elem))
    }

    pub fn tree(elem: BaseType) -> Self {
        BaseType::Tree(Box::new(elem))
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, BaseType::Nat | BaseType::Int)
    }

    pub fn elem(&self) -> Option<&BaseType> {
        match self {
            BaseType::List(e) | BaseType::Tree(e) => Some(e),
            _ => None,
        }
    }

    /// `nat` and `int` are interchangeable at the basic-type level; a `nat`
    /// refinement seen as `int` carries an implicit `0 <= ν` guard.
    pub fn compatible(&self, other: &BaseType) -> bool {
        self == other || (self.is_numeric() && other.is_numeric())
    }

    /// Join used when two compatible base types meet (e.g. match branches).
    pub fn join(&self, other: &BaseType) -> Option<BaseType> {
        if self == other {
            Some(self.clone())
        } else if self.is_numeric() && other.is_numeric() {
            Some(BaseType::Int)
        } else {
            None
        }
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Unit => write!(f, "unit"),
            BaseType::Bool => write!(f, "bool"),
            BaseType::Nat => write!(f, "nat"),
            BaseType::Int => write!(f, "int"),
            BaseType::List(e) => write!(f, "{e} list"),
            BaseType::Tree(e) => write!(f, "{e} tree"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BasicType {
    Base(BaseType),
    Arrow(Box<BasicType>, Box<BasicType>),
}

impl BasicType {
    pub fn arrow(a: BasicType, b: BasicType) -> Self {
        BasicType::Arrow(Box::new(a), Box::new(b))
    }

    pub fn as_base(&self) -> Option<&BaseType> {
        match self {
            BasicType::Base(b) => Some(b),
            BasicType::Arrow(..) => None,
        }
    }

    /// Structural equality up to `nat`/`int` interchange.
    pub fn compatible(&self, other: &BasicType) -> bool {
        match (self, other) {
            (BasicType::Base(a), BasicType::Base(b)) => a.compatible(b),
            (BasicType::Arrow(a1, b1), BasicType::Arrow(a2, b2)) => {
                a1.compatible(a2) && b1.compatible(b2)
            }
            _ => false,
        }
    }
}

impl fmt::Display for BasicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasicType::Base(b) => write!(f, "{b}"),
            BasicType::Arrow(a, b) => match **a {
                BasicType::Arrow(..) => write!(f, "({a}) -> {b}"),
                BasicType::Base(_) => write!(f, "{a} -> {b}"),
            },
        }
    }
}

/// `[ν:b | φ]` (coverage), `{ν:b | φ}` (overapproximate) or `x:τ → τ`.
///
/// Qualifiers always use the distinguished variable [`NU`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RefinementType {
    Under { base: BaseType, qual: Prop },
    Over { base: BaseType, qual: Prop },
    Arrow { binder: String, dom: Box<RefinementType>, cod: Box<RefinementType> },
}

impl RefinementType {
    pub fn under(base: BaseType, qual: Prop) -> Self {
        RefinementType::Under { base, qual }
    }

    pub fn over(base: BaseType, qual: Prop) -> Self {
        RefinementType::Over { base, qual }
    }

    pub fn arrow(binder: impl Into<String>, dom: RefinementType, cod: RefinementType) -> Self {
        RefinementType::Arrow { binder: binder.into(), dom: Box::new(dom), cod: Box::new(cod) }
    }

    pub fn is_under(&self) -> bool {
        matches!(self, RefinementType::Under { .. })
    }

    pub fn is_over(&self) -> bool {
        matches!(self, RefinementType::Over { .. })
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, RefinementType::Arrow { .. })
    }

    pub fn base(&self) -> Option<&BaseType> {
        match self {
            RefinementType::Under { base, .. } | RefinementType::Over { base, .. } => Some(base),
            RefinementType::Arrow { .. } => None,
        }
    }

    pub fn qual(&self) -> Option<&Prop> {
        match self {
            RefinementType::Under { qual, .. } | RefinementType::Over { qual, .. } => Some(qual),
            RefinementType::Arrow { .. } => None,
        }
    }

    /// Type erasure `⌊τ⌋`.
    pub fn erase(&self) -> BasicType {
        match self {
            RefinementType::Under { base, .. } | RefinementType::Over { base, .. } => {
                BasicType::Base(base.clone())
            }
            RefinementType::Arrow { dom, cod, .. } => BasicType::arrow(dom.erase(), cod.erase()),
        }
    }

    /// The trivially-true overapproximation of a basic type, used for
    /// unannotated parameters.
    pub fn top_over(ty: &BasicType) -> Self {
        match ty {
            BasicType::Base(b) => RefinementType::over(b.clone(), Prop::Top),
            BasicType::Arrow(a, b) => RefinementType::arrow(
                "_",
                RefinementType::top_over(a),
                RefinementType::top_over(b),
            ),
        }
    }

    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            RefinementType::Under { qual, .. } | RefinementType::Over { qual, .. } => {
                for v in qual.free_vars() {
                    if v != NU && !bound.contains(&v) && !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            RefinementType::Arrow { binder, dom, cod } => {
                dom.collect_free(bound, out);
                bound.push(binder.clone());
                cod.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn mentions(&self, x: &str) -> bool {
        self.free_vars().iter().any(|v| v == x)
    }

    /// Capture-avoiding substitution of a qualifier expression for `x`.
    pub fn subst(&self, x: &str, e: &super::prop::Expr) -> RefinementType {
        match self {
            RefinementType::Under { base, qual } => {
                RefinementType::Under { base: base.clone(), qual: qual.subst(x, e) }
            }
            RefinementType::Over { base, qual } => {
                RefinementType::Over { base: base.clone(), qual: qual.subst(x, e) }
            }
            RefinementType::Arrow { binder, dom, cod } => {
                let dom = dom.subst(x, e);
                if binder == x {
                    return RefinementType::Arrow { binder: binder.clone(), dom: Box::new(dom), cod: cod.clone() };
                }
                if e.free_vars().iter().any(|v| v == binder) {
                    let fresh = super::fresh::global_fresh(binder);
                    let cod = cod.rename(binder, &fresh);
                    return RefinementType::Arrow {
                        binder: fresh,
                        dom: Box::new(dom),
                        cod: Box::new(cod.subst(x, e)),
                    };
                }
                RefinementType::Arrow { binder: binder.clone(), dom: Box::new(dom), cod: Box::new(cod.subst(x, e)) }
            }
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> RefinementType {
        self.subst(from, &super::prop::Expr::Var(to.to_string()))
    }

    /// Syntactic equality modulo renaming of arrow binders.
    pub fn alpha_eq(&self, other: &RefinementType) -> bool {
        match (self, other) {
            (RefinementType::Under { base: b1, qual: q1 }, RefinementType::Under { base: b2, qual: q2 })
            | (RefinementType::Over { base: b1, qual: q1 }, RefinementType::Over { base: b2, qual: q2 }) => {
                b1 == b2 && q1.alpha_eq(q2)
            }
            (
                RefinementType::Arrow { binder: x1, dom: d1, cod: c1 },
                RefinementType::Arrow { binder: x2, dom: d2, cod: c2 },
            ) => {
                if !d1.alpha_eq(d2) {
                    return false;
                }
                if x1 == x2 {
                    c1.alpha_eq(c2)
                } else {
                    let fresh = super::fresh::global_fresh("a");
                    c1.rename(x1, &fresh).alpha_eq(&c2.rename(x2, &fresh))
                }
            }
            _ => false,
        }
    }
}

impl fmt::Display for RefinementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinementType::Under { base, qual } => write!(f, "[{NU}:{base} | {qual}]"),
            RefinementType::Over { base, qual } => write!(f, "{{{NU}:{base} | {qual}}}"),
            RefinementType::Arrow { binder, dom, cod } => {
                if dom.is_arrow() {
                    write!(f, "{binder}:({dom}) -> {cod}")
                } else {
                    write!(f, "{binder}:{dom} -> {cod}")
                }
            }
        }
    }
}

/// Ordered list of bindings `x:τ`; later bindings may mention earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeContext {
    bindings: Vec<(String, RefinementType)>,
}

impl TypeContext {
    pub fn new() -> Self {
        TypeContext::default()
    }

    pub fn from_bindings(bindings: Vec<(String, RefinementType)>) -> Self {
        TypeContext { bindings }
    }

    pub fn push(&mut self, x: impl Into<String>, ty: RefinementType) {
        self.bindings.push((x.into(), ty));
    }

    pub fn extended(&self, x: impl Into<String>, ty: RefinementType) -> TypeContext {
        let mut c = self.clone();
        c.push(x, ty);
        c
    }

    /// Latest binding for `x` (shadowing is resolved right to left).
    pub fn lookup(&self, x: &str) -> Option<&RefinementType> {
        self.bindings.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn bindings(&self) -> &[(String, RefinementType)] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(x, _)| x.as_str())
    }
}

impl fmt::Display for TypeContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bindings.is_empty() {
            return write!(f, "∅");
        }
        for (i, (x, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}:{t}")?;
        }
        Ok(())
    }
}
