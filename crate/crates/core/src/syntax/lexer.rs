//! Tokenizer shared by the term, type, qualifier and declaration parsers.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lower-case identifier or keyword (`let`, `forall`, ...).
    Ident(String),
    /// Capitalized identifier (constructors).
    Upper(String),
    /// Type variable such as `'a`.
    TyVar(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::TyVar(s) => write!(f, "`'{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

// Longest symbols first so that maximal munch works by linear scan.
const SYMBOLS: &[&str] = &[
    "<=>", "==>", "<+>", ";;", "->", "=>", "==", "!=", "<>", "<=", ">=", "&&", "||", "::", "/\\", "\\/", "(", ")",
    "[", "]", "{", "}", ",", ";", ":", ".", "|", "=", "<", ">", "+", "-", "*", "!", "~", "_", "⊕",
];

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '$' || c == '!'
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        // (* nested comments *)
        if c == '(' && chars.get(i + 1) == Some(&'*') {
            let (sl, sc) = (line, col);
            let mut depth = 0usize;
            loop {
                if i >= chars.len() {
                    return Err(LexError { line: sl, col: sc, msg: "unterminated comment".into() });
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    advance(&mut i, &mut line, &mut col, '(');
                    advance(&mut i, &mut line, &mut col, '*');
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, ')');
                    if depth == 0 {
                        break;
                    }
                } else {
                    let ch = chars[i];
                    advance(&mut i, &mut line, &mut col, ch);
                }
            }
            continue;
        }
        // `#` line comments, used in predicate/axiom files.
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse::<i64>()
                .map_err(|_| LexError { line: tl, col: tc, msg: format!("integer literal `{text}` out of range") })?;
            out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            continue;
        }
        if c == '\'' && chars.get(i + 1).is_some_and(|c| c.is_alphabetic()) {
            advance(&mut i, &mut line, &mut col, c);
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            out.push(Token { tok: Tok::TyVar(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if is_ident_start(c) && !(c == '_' && !chars.get(i + 1).is_some_and(|&d| is_ident_char(d))) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                // `!=` after an identifier is an operator, not part of the name.
                if chars[i] == '!' && chars.get(i + 1) == Some(&'=') {
                    break;
                }
                { let ch = chars[i]; advance(&mut i, &mut line, &mut col, ch); }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if text.chars().next().unwrap().is_uppercase() { Tok::Upper(text) } else { Tok::Ident(text) };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
            Some(s) => {
                for ch in s.chars() {
                    advance(&mut i, &mut line, &mut col, ch);
                }
                let s: &'static str = if *s == "⊕" { "<+>" } else { s };
                out.push(Token { tok: Tok::Sym(s), line: tl, col: tc });
            }
            None => {
                return Err(LexError { line: tl, col: tc, msg: format!("unexpected character `{c}`") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn maximal_munch_on_operators() {
        assert_eq!(
            toks("a <=> b ==> c <= d"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("<=>"),
                Tok::Ident("b".into()),
                Tok::Sym("==>"),
                Tok::Ident("c".into()),
                Tok::Sym("<="),
                Tok::Ident("d".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn nested_comments_are_skipped() {
        assert_eq!(toks("1 (* a (* b *) c *) 2"), vec![Tok::Int(1), Tok::Int(2), Tok::Eof]);
    }

    #[test]
    fn identifiers_allow_primes_and_unicode() {
        assert_eq!(toks("x' ν $t1"), vec![
            Tok::Ident("x'".into()),
            Tok::Ident("ν".into()),
            Tok::Ident("$t1".into()),
            Tok::Eof
        ]);
    }

    #[test]
    fn wildcard_is_a_symbol() {
        assert_eq!(toks("_ _x"), vec![Tok::Sym("_"), Tok::Ident("_x".into()), Tok::Eof]);
    }

    #[test]
    fn type_variables() {
        assert_eq!(toks("'a list"), vec![Tok::TyVar("a".into()), Tok::Ident("list".into()), Tok::Eof]);
    }

    #[test]
    fn unterminated_comment_reports_position() {
        let e = tokenize("\n  (* oops").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
    }
}
