//! Concrete-syntax printing for terms. Output re-parses to the same AST for
//! terms produced by the parser or by MNF normalization.

use std::fmt::{self, Write};

use super::term::{Branch, Ctor, Op, Prim, Term};

fn is_infix(p: Prim) -> bool {
    !matches!(p, Prim::Not | Prim::NatGen | Prim::IntGen | Prim::BoolGen | Prim::IntRange)
}

fn atomic(t: &Term) -> bool {
    matches!(t, Term::Const(_) | Term::Var(_) | Term::Err | Term::Op(_))
}

struct Printer {
    out: String,
}

impl Printer {
    fn nl(&mut self, indent: usize) {
        self.out.push('\n');
        for _ in 0..indent {
            self.out.push_str("  ");
        }
    }

    fn atom(&mut self, t: &Term, indent: usize) {
        if atomic(t) {
            self.term(t, indent);
        } else {
            self.out.push('(');
            self.term(t, indent);
            self.out.push(')');
        }
    }

    fn op_app(&mut self, op: Op, args: &[Term], indent: usize) {
        match op {
            Op::Prim(p) if is_infix(p) && args.len() == 2 => {
                self.atom(&args[0], indent);
                let _ = write!(self.out, " {} ", p.name());
                self.atom(&args[1], indent);
            }
            _ => {
                self.out.push_str(op.name());
                match args.len() {
                    0 => {}
                    1 => {
                        self.out.push(' ');
                        self.atom(&args[0], indent);
                    }
                    _ => {
                        self.out.push_str(" (");
                        for (i, a) in args.iter().enumerate() {
                            if i > 0 {
                                self.out.push_str(", ");
                            }
                            self.term(a, indent);
                        }
                        self.out.push(')');
                    }
                }
            }
        }
    }

    fn pattern(&mut self, b: &Branch) {
        match b.ctor {
            Ctor::True => self.out.push_str("true"),
            Ctor::False => self.out.push_str("false"),
            Ctor::Zero => self.out.push('0'),
            Ctor::Nil => self.out.push_str("[]"),
            Ctor::Leaf => self.out.push_str("Leaf"),
            Ctor::Succ | Ctor::Cons | Ctor::Node => {
                self.out.push_str(b.ctor.name());
                if b.vars.len() == 1 {
                    let _ = write!(self.out, " {}", b.vars[0]);
                } else {
                    let _ = write!(self.out, " ({})", b.vars.join(", "));
                }
            }
        }
    }

    fn term(&mut self, t: &Term, indent: usize) {
        match t {
            Term::Const(c) => {
                let _ = write!(self.out, "{c}");
            }
            Term::Op(op) => match op {
                Op::Prim(p) if is_infix(*p) || *p == Prim::Not => {
                    let _ = write!(self.out, "({})", p.name());
                }
                _ => self.out.push_str(op.name()),
            },
            Term::Var(x) => self.out.push_str(x),
            Term::Err => self.out.push_str("err"),
            Term::Lam { param, param_ty, body } => {
                let _ = write!(self.out, "fun ({param} : {param_ty}) ->");
                self.nl(indent + 1);
                self.term(body, indent + 1);
            }
            Term::Fix { fname, fty, param, param_ty, body } => {
                let _ = write!(self.out, "fix ({fname} : {fty}) ({param} : {param_ty}) ->");
                self.nl(indent + 1);
                self.term(body, indent + 1);
            }
            Term::Let { x, bound, body } => {
                let _ = write!(self.out, "let {x} = ");
                self.term(bound, indent + 1);
                self.out.push_str(" in");
                self.nl(indent);
                self.term(body, indent);
            }
            Term::LetOp { x, op, args, body } => {
                let _ = write!(self.out, "let {x} = ");
                self.op_app(*op, args, indent);
                self.out.push_str(" in");
                self.nl(indent);
                self.term(body, indent);
            }
            Term::LetApp { x, func, arg, body } => {
                let _ = write!(self.out, "let {x} = ");
                self.atom(func, indent + 1);
                self.out.push(' ');
                self.atom(arg, indent + 1);
                self.out.push_str(" in");
                self.nl(indent);
                self.term(body, indent);
            }
            Term::Match { scrut, branches } => {
                self.out.push_str("match ");
                self.atom(scrut, indent);
                self.out.push_str(" with");
                for b in branches {
                    self.nl(indent);
                    self.out.push_str("| ");
                    self.pattern(b);
                    self.out.push_str(" ->");
                    if atomic(&b.body) {
                        self.out.push(' ');
                        self.term(&b.body, indent + 1);
                    } else {
                        self.nl(indent + 1);
                        self.out.push('(');
                        self.term(&b.body, indent + 1);
                        self.out.push(')');
                    }
                }
            }
            Term::App(f, a) => {
                self.atom(f, indent);
                self.out.push(' ');
                self.atom(a, indent);
            }
            Term::OpApp(op, args) => self.op_app(*op, args, indent),
        }
    }
}

pub fn print_term(t: &Term) -> String {
    let mut p = Printer { out: String::new() };
    p.term(t, 0);
    p.out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse::{parse_prop, parse_term, parse_type};

    fn round_trip(src: &str) {
        let t = parse_term(src).unwrap();
        let printed = t.to_string();
        let back = parse_term(&printed).unwrap_or_else(|e| panic!("reparse failed: {e}\n{printed}"));
        assert_eq!(t, back, "printed:\n{printed}");
    }

    #[test]
    fn terms_round_trip() {
        round_trip("let x = nat_gen () in let y = x + 1 in y");
        round_trip("match l with [] -> 0 | Cons (h, t) -> (match t with [] -> h | _ -> err)");
        round_trip("fun (x : int) -> let y = x mod 2 in y == 0");
        round_trip("let t = Leaf in let n = Node (x, t, t) in n <+> t");
        round_trip("fix (f : nat -> int) (n : nat) -> if n == 0 then -3 else let m = n - 1 in f m");
        round_trip("let x = not b in let y = int_range (a, x) in (+)");
        round_trip("[1; 2; 3]");
    }

    #[test]
    fn types_and_props_round_trip() {
        for src in [
            "x:{v:int | v > 0} -> y:{v:int list | len(v, x)} -> [v:int tree | bst(v) && (forall u:int. mem(v, u) ==> x < u)]",
            "[v:nat | v mod 2 = 0]",
            "f:(x:{v:nat | true} -> [v:nat | v = x + 1]) -> [v:nat | exists w:nat. v = w]",
        ] {
            let t = parse_type(src).unwrap();
            let back = parse_type(&t.to_string()).unwrap();
            assert!(t.alpha_eq(&back), "{t}\n{back}");
        }
        let p = parse_prop("not (a <=> b) || -(x) < -3").unwrap();
        assert_eq!(parse_prop(&p.to_string()).unwrap(), p);
    }
}
