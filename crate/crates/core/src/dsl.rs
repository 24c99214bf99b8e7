//! Concrete syntax for recursive thread specifications.
//!
//! ```text
//! file   := decl+
//! decl   := NAME "=" term            (one per line)
//! term   := "S" | "D" | NAME
//!         | action "?" term ":" term
//!         | action ";" term
//!         | "(" term ")"
//! action := IDENT [":" NAT]
//! ```
//!
//! `#` starts a comment that runs to the end of the line. The first
//! declaration is the root. `a ; t` is sugar for `a ? t : t`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::thread::{ActionId, RecSpec, ThreadTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u32),
    Eq,
    Question,
    Colon,
    Semi,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Nat(n) => format!("`{n}`"),
            Tok::Eq => "`=`".into(),
            Tok::Question => "`?`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let single = match c {
                '=' => Some(Tok::Eq),
                '?' => Some(Tok::Question),
                ':' => Some(Tok::Colon),
                ';' => Some(Tok::Semi),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Spanned {
                    tok,
                    line: lineno + 1,
                    column,
                });
                i += 1;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: lineno + 1,
                    column,
                });
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse().map_err(|_| ParseError {
                    line: lineno + 1,
                    column,
                    message: format!("number `{text}` is too large"),
                })?;
                out.push(Spanned {
                    tok: Tok::Nat(n),
                    line: lineno + 1,
                    column,
                });
            } else {
                return Err(ParseError {
                    line: lineno + 1,
                    column,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    uses: Vec<(String, usize, usize)>,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self, ahead: usize) -> Option<&Tok> {
        self.toks.get(self.pos + ahead).map(|s| &s.tok)
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek(0) {
            Some(t) => self.error_here(format!("expected {wanted}, found {}", t.describe())),
            None => self.error_here(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<(), ParseError> {
        if self.peek(0) == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    /// Length of an action starting at the cursor, if the tokens there form
    /// `IDENT [":" NAT]` followed by `?` or `;`.
    fn action_len(&self) -> Option<usize> {
        match self.peek(0) {
            Some(Tok::Ident(name)) if name != "S" && name != "D" => {}
            _ => return None,
        }
        match (self.peek(1), self.peek(2), self.peek(3)) {
            (Some(Tok::Question | Tok::Semi), _, _) => Some(1),
            (Some(Tok::Colon), Some(Tok::Nat(_)), Some(Tok::Question | Tok::Semi)) => Some(3),
            _ => None,
        }
    }

    fn term(&mut self) -> Result<ThreadTerm, ParseError> {
        if let Some(len) = self.action_len() {
            let action = match (&self.toks[self.pos].tok, self.peek(2)) {
                (Tok::Ident(name), Some(Tok::Nat(n))) if len == 3 => ActionId::indexed(name.clone(), *n),
                (Tok::Ident(name), _) => ActionId::named(name.clone()),
                _ => unreachable!(),
            };
            self.pos += len;
            return match self.peek(0) {
                Some(Tok::Semi) => {
                    self.pos += 1;
                    Ok(ThreadTerm::prefix(action, self.term()?))
                }
                _ => {
                    self.pos += 1;
                    let on_true = self.term()?;
                    self.expect(Tok::Colon, "`:`")?;
                    let on_false = self.term()?;
                    Ok(ThreadTerm::post(action, on_true, on_false))
                }
            };
        }
        let Some(current) = self.toks.get(self.pos).cloned() else {
            return Err(self.unexpected("a term"));
        };
        match current.tok {
            Tok::Ident(name) if name == "S" => {
                self.pos += 1;
                Ok(ThreadTerm::Stop)
            }
            Tok::Ident(name) if name == "D" => {
                self.pos += 1;
                Ok(ThreadTerm::Dead)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                self.uses.push((name.clone(), current.line, current.column));
                Ok(ThreadTerm::Var(name))
            }
            Tok::LParen => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.unexpected("a term")),
        }
    }
}

/// Parses a thread file into a specification rooted at its first
/// declaration. Guardedness is not checked here.
pub fn parse_threads(src: &str) -> Result<RecSpec, ParseError> {
    let toks = lex(src)?;
    let end = src
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").chars().count() + 1))
        .unwrap_or((1, 1));
    let mut p = Parser {
        toks,
        pos: 0,
        uses: Vec::new(),
        end,
    };
    let mut equations: Vec<(String, ThreadTerm)> = Vec::new();
    let mut declared: HashMap<String, (usize, usize)> = HashMap::new();
    while p.pos < p.toks.len() {
        let head = p.toks[p.pos].clone();
        let name = match &head.tok {
            Tok::Ident(n) if n == "S" || n == "D" => {
                return Err(p.error_here(format!("`{n}` is reserved and cannot be declared")))
            }
            Tok::Ident(n) => n.clone(),
            _ => return Err(p.unexpected("a declaration `NAME = term`")),
        };
        if declared.contains_key(&name) {
            return Err(p.error_here(format!("variable `{name}` is declared twice")));
        }
        declared.insert(name.clone(), (head.line, head.column));
        p.pos += 1;
        p.expect(Tok::Eq, "`=`")?;
        let rhs = p.term()?;
        let last_line = p.toks[p.pos - 1].line;
        if let Some(next) = p.toks.get(p.pos) {
            if next.line == last_line {
                return Err(p.unexpected("end of line"));
            }
        }
        equations.push((name, rhs));
    }
    if equations.is_empty() {
        return Err(ParseError {
            line: 1,
            column: 1,
            message: "expected at least one declaration".into(),
        });
    }
    if let Some((name, line, column)) = p.uses.iter().find(|(n, _, _)| !declared.contains_key(n)) {
        return Err(ParseError {
            line: *line,
            column: *column,
            message: format!("variable `{name}` is not declared"),
        });
    }
    RecSpec::from_equations(equations).map_err(|e| ParseError {
        line: 1,
        column: 1,
        message: e.to_string(),
    })
}

/// Prints a specification in the syntax accepted by [`parse_threads`], root
/// first, one newline-terminated declaration per line.
pub fn print_threads(spec: &RecSpec) -> String {
    let mut out = String::new();
    let root = spec.root();
    let ordered = std::iter::once((root, &spec.equations()[root])).chain(
        spec.equations()
            .iter()
            .filter(|(n, _)| n.as_str() != root)
            .map(|(n, t)| (n.as_str(), t)),
    );
    for (name, term) in ordered {
        let _ = write!(out, "{name} = ");
        print_term(term, &mut out);
        out.push('\n');
    }
    out
}

fn print_term(term: &ThreadTerm, out: &mut String) {
    match term {
        ThreadTerm::Stop => out.push('S'),
        ThreadTerm::Dead => out.push('D'),
        ThreadTerm::Var(v) => out.push_str(v),
        ThreadTerm::Post {
            action,
            on_true,
            on_false,
        } if on_true == on_false => {
            let _ = write!(out, "{action} ; ");
            print_term(on_true, out);
        }
        ThreadTerm::Post {
            action,
            on_true,
            on_false,
        } => {
            let _ = write!(out, "{action} ? ");
            let nested = matches!(on_true.as_ref(), ThreadTerm::Post { on_true: t, on_false: f, .. } if t != f);
            if nested {
                out.push('(');
            }
            print_term(on_true, out);
            if nested {
                out.push(')');
            }
            out.push_str(" : ");
            print_term(on_false, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thread::sample::{random_spec, SpecShape};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_constant() {
        let spec = parse_threads("X = S\n").unwrap();
        assert_eq!(spec.root(), "X");
        assert_eq!(spec.equations()["X"], ThreadTerm::Stop);
        assert_eq!(print_threads(&spec), "X = S\n");
    }

    #[test]
    fn prefix_desugars() {
        let spec = parse_threads("X = load:0 ? Y : D\nY = post ; X").unwrap();
        assert_eq!(spec.equations().len(), 2);
        assert_eq!(
            spec.equations()["X"],
            ThreadTerm::post(ActionId::indexed("load", 0), ThreadTerm::var("Y"), ThreadTerm::Dead)
        );
        assert_eq!(
            spec.equations()["Y"],
            ThreadTerm::post(ActionId::named("post"), ThreadTerm::var("X"), ThreadTerm::var("X"))
        );
    }

    #[test]
    fn missing_action_reports_position() {
        let err = parse_threads("X = ? S : S").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
    }

    #[test]
    fn comments_parens_and_nesting() {
        let src = "# header\nX = a ? (b ? S : D) : c ; X   # trailing\n";
        let spec = parse_threads(src).unwrap();
        assert_eq!(
            spec.equations()["X"],
            ThreadTerm::post(
                ActionId::named("a"),
                ThreadTerm::post(ActionId::named("b"), ThreadTerm::Stop, ThreadTerm::Dead),
                ThreadTerm::prefix(ActionId::named("c"), ThreadTerm::var("X")),
            )
        );
        // right-associative conditional without parentheses
        let flat = parse_threads("X = a ? b ? S : D : S").unwrap();
        let Some(ThreadTerm::Post { on_true, .. }) = flat.equations().get("X") else {
            panic!()
        };
        assert!(matches!(on_true.as_ref(), ThreadTerm::Post { .. }));
    }

    #[test]
    fn syntax_errors() {
        for (src, pos) in [
            ("X = ", (1, 5)),
            ("X S", (1, 3)),
            ("X = S S", (1, 7)),
            ("X = a ? S", (1, 10)),
            ("X = Y", (1, 5)),
            ("X = S\nX = D", (2, 1)),
            ("S = S", (1, 1)),
            ("X = (S", (1, 7)),
            ("X = a $ S", (1, 7)),
        ] {
            let err = parse_threads(src).unwrap_err();
            assert_eq!((err.line, err.column), pos, "{src:?}: {err}");
        }
        assert!(parse_threads("").is_err());
        assert!(parse_threads("# only a comment").is_err());
    }

    #[test]
    fn unguarded_is_syntactically_fine() {
        let spec = parse_threads("X = Y\nY = S").unwrap();
        assert!(crate::thread::check_guarded(&spec).is_err());
    }

    #[test]
    fn printing_uses_prefix_sugar_and_is_stable() {
        let spec = parse_threads("X = a ? Y : Y\nY = b ? (c ? S : D) : X").unwrap();
        let text = print_threads(&spec);
        assert_eq!(text, "X = a ; Y\nY = b ? (c ? S : D) : X\n");
        assert_eq!(print_threads(&parse_threads(&text).unwrap()), text);
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = random_spec(&mut rng, &SpecShape::default());
            let text = print_threads(&spec);
            let back = parse_threads(&text).unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(print_threads(&back), text);
        }
    }
}
