//! Regular expressions over the mode alphabet.
//!
//! Grammar (whitespace is not allowed):
//!
//! ```text
//! alt    := concat ('|' concat)*
//! concat := repeat+
//! repeat := atom ('*' | '+')?
//! atom   := symbol | '(' alt ')'
//! ```

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::mode::ModeLabel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModeRegex {
    Symbol(ModeLabel),
    Concat(Vec<ModeRegex>),
    Alt(Vec<ModeRegex>),
    Star(Box<ModeRegex>),
    Plus(Box<ModeRegex>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at position {position}: {reason}")]
pub struct SyntaxError {
    pub position: usize,
    pub reason: &'static str,
}

impl ModeRegex {
    /// Modes appearing anywhere in the expression.
    pub fn alphabet(&self) -> alloc::collections::BTreeSet<ModeLabel> {
        let mut out = alloc::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut alloc::collections::BTreeSet<ModeLabel>) {
        match self {
            ModeRegex::Symbol(m) => {
                out.insert(*m);
            }
            ModeRegex::Concat(xs) | ModeRegex::Alt(xs) => {
                xs.iter().for_each(|x| x.collect_symbols(out))
            }
            ModeRegex::Star(x) | ModeRegex::Plus(x) => x.collect_symbols(out),
        }
    }
}

impl fmt::Display for ModeRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(r: &ModeRegex, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match r {
                ModeRegex::Symbol(_) => write!(f, "{r}"),
                _ => write!(f, "({r})"),
            }
        }
        match self {
            ModeRegex::Symbol(m) => write!(f, "{m}"),
            ModeRegex::Concat(xs) => xs.iter().try_for_each(|x| match x {
                ModeRegex::Alt(_) => write!(f, "({x})"),
                _ => write!(f, "{x}"),
            }),
            ModeRegex::Alt(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("|")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            ModeRegex::Star(x) => {
                atom(x, f)?;
                f.write_str("*")
            }
            ModeRegex::Plus(x) => {
                atom(x, f)?;
                f.write_str("+")
            }
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

pub fn parse_regex(text: &str) -> Result<ModeRegex, SyntaxError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, _src: text };
    let r = p.alt()?;
    if p.pos != p.chars.len() {
        return Err(p.error(match p.chars[p.pos] {
            ')' => "unbalanced `)`",
            '*' | '+' => "repetition operator without an operand",
            _ => "unexpected character",
        }));
    }
    Ok(r)
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn error(&self, reason: &'static str) -> SyntaxError {
        SyntaxError { position: self.pos, reason }
    }

    fn alt(&mut self) -> Result<ModeRegex, SyntaxError> {
        let mut branches = Vec::new();
        loop {
            match self.concat()? {
                ModeRegex::Alt(xs) => branches.extend(xs),
                x => branches.push(x),
            }
            if self.peek() != Some('|') {
                break;
            }
            self.pos += 1;
        }
        Ok(if branches.len() == 1 { branches.pop().unwrap() } else { ModeRegex::Alt(branches) })
    }

    fn concat(&mut self) -> Result<ModeRegex, SyntaxError> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            // grouped sequences are flattened so the tree stays canonical
            match self.repeat()? {
                ModeRegex::Concat(xs) => parts.extend(xs),
                x => parts.push(x),
            }
        }
        match parts.len() {
            0 => Err(self.error("empty expression")),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(ModeRegex::Concat(parts)),
        }
    }

    fn repeat(&mut self) -> Result<ModeRegex, SyntaxError> {
        let a = self.atom()?;
        Ok(match self.peek() {
            Some('*') => {
                self.pos += 1;
                ModeRegex::Star(Box::new(a))
            }
            Some('+') => {
                self.pos += 1;
                ModeRegex::Plus(Box::new(a))
            }
            _ => a,
        })
    }

    fn atom(&mut self) -> Result<ModeRegex, SyntaxError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('*') | Some('+') => Err(self.error("repetition operator without an operand")),
            Some(c) => match ModeLabel::from_symbol(c) {
                Some(m) => {
                    self.pos += 1;
                    Ok(ModeRegex::Symbol(m))
                }
                None => Err(self.error("not a mode symbol")),
            },
            None => Err(self.error("unexpected end of pattern")),
        }
    }
}

/// Renders the canonical text of a regex. Useful as a stable key.
pub fn regex_text(r: &ModeRegex) -> String {
    alloc::format!("{r}")
}
