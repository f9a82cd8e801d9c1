//! S-expression reader. Identifiers are lowercased; `;` starts a comment.

use super::PddlError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// First element of a list, if it is an atom.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }
}

fn syntax(pos: Pos, message: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

/// Parses exactly one top-level expression.
pub fn parse(text: &str) -> Result<Sexp, PddlError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut result: Option<Sexp> = None;
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);

    while let Some(c) = chars.next() {
        let pos = Pos { line, col };
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
        match c {
            ';' => {
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                if result.is_some() {
                    return Err(syntax(pos, "unexpected text after the closing parenthesis"));
                }
                stack.push((Vec::new(), pos));
            }
            ')' => {
                let (items, start) = stack.pop().ok_or_else(|| syntax(pos, "unbalanced ')'"))?;
                let list = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            c if c.is_whitespace() => {}
            c => {
                let mut word = String::new();
                word.extend(c.to_lowercase());
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    word.extend(n.to_lowercase());
                    chars.next();
                    col += 1;
                }
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(Sexp::Atom(word, pos)),
                    None => return Err(syntax(pos, format!("expected '(' but found '{word}'"))),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed '('"));
    }
    result.ok_or_else(|| syntax(Pos { line, col }, "empty input"))
}
