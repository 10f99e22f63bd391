//! A small s-expression reader with source positions.
//!
//! Atoms are runs of characters other than whitespace, parentheses, `"` and
//! `;`.  Strings are double-quoted with `\\`, `\"`, `\n` and `\t` escapes.  A
//! `;` starts a comment running to the end of the line.

use std::fmt;

/// 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String, Pos),
    Str(String, Pos),
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Atom(_, p) | Sexpr::Str(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            _ => None,
        }
    }

    /// The head atom of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_atom()
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a, _) => f.write_str(a),
            Sexpr::Str(s, _) => write!(f, "{}", quote(s)),
            Sexpr::List(items, _) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct ReadError {
    pub pos: Pos,
    pub message: String,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

/// True if `s` reads back as a single atom.
pub fn is_atom_text(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(is_delimiter)
}

/// `s` as an atom when possible, otherwise as a quoted string.
pub fn atom_or_string(s: &str) -> String {
    if is_atom_text(s) {
        s.to_string()
    } else {
        quote(s)
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(c) = self.peek() {
            if c == ';' {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn error<T>(&self, pos: Pos, message: impl Into<String>) -> Result<T, ReadError> {
        Err(ReadError {
            pos,
            message: message.into(),
        })
    }

    /// Reads one datum; the caller has skipped blanks and checked for input.
    fn datum(&mut self) -> Result<Sexpr, ReadError> {
        crate::deep::deep(|| {
            let start = self.pos;
            match self.peek() {
                Some('(') => {
                    self.bump();
                    let mut items = Vec::new();
                    loop {
                        self.skip_blank();
                        match self.peek() {
                            None => return self.error(start, "unclosed '('"),
                            Some(')') => {
                                self.bump();
                                return Ok(Sexpr::List(items, start));
                            }
                            Some(_) => items.push(self.datum()?),
                        }
                    }
                }
                Some(')') => self.error(start, "unexpected ')'"),
                Some('"') => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            None => return self.error(start, "unterminated string"),
                            Some('"') => return Ok(Sexpr::Str(s, start)),
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(c @ ('"' | '\\')) => s.push(c),
                                Some(c) => return self.error(start, format!("unknown escape '\\{c}'")),
                                None => return self.error(start, "unterminated string"),
                            },
                            Some(c) => s.push(c),
                        }
                    }
                }
                _ => {
                    let mut a = String::new();
                    while let Some(c) = self.peek().filter(|c| !is_delimiter(*c)) {
                        a.push(c);
                        self.bump();
                    }
                    Ok(Sexpr::Atom(a, start))
                }
            }
        })
    }
}

/// Reads every datum in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexpr>, ReadError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, column: 1 },
    };
    let mut out = Vec::new();
    loop {
        r.skip_blank();
        if r.peek().is_none() {
            return Ok(out);
        }
        out.push(r.datum()?);
    }
}

/// Reads exactly one datum.
pub fn read_one(text: &str) -> Result<Sexpr, ReadError> {
    let mut all = read_all(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("one datum")),
        0 => Err(ReadError {
            pos: Pos { line: 1, column: 1 },
            message: "expected a datum, found end of input".into(),
        }),
        _ => Err(ReadError {
            pos: all[1].pos(),
            message: "expected a single datum".into(),
        }),
    }
}
