//! Extensional databases: the data files handed to `ground -d`.
//!
//! Three kinds of entries are accepted:
//!
//! ```text
//! edge(1,3).          % one tuple
//! color(red;green).   % unary set, one tuple per element
//! queens[1..8].       % unary integer range
//! ```

use std::fmt;

use indexmap::{IndexMap, IndexSet};

use crate::lexer::{self, Cursor, LexError, Pos, Tok};

/// A constant symbol. Integers compare numerically; everything else is an
/// opaque identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    Int(i64),
    Sym(String),
}

impl Constant {
    /// Reads a token as an integer if it looks like one, otherwise as a symbol.
    pub fn parse(text: &str) -> Constant {
        match text.parse::<i64>() {
            Ok(n) => Constant::Int(n),
            Err(_) => Constant::Sym(text.to_string()),
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Constant::Int(n) => Some(*n),
            Constant::Sym(_) => None,
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(n) => write!(f, "{n}"),
            Constant::Sym(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Constant {
    fn from(n: i64) -> Self {
        Constant::Int(n)
    }
}

impl From<&str> for Constant {
    fn from(s: &str) -> Self {
        Constant::parse(s)
    }
}

pub type Tuple = Vec<Constant>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    tuples: IndexSet<Tuple>,
}

impl Relation {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Relation {
            name: name.into(),
            arity,
            tuples: IndexSet::new(),
        }
    }

    /// Adds a tuple; duplicates are ignored. Returns whether it was new.
    pub fn insert(&mut self, tuple: Tuple) -> bool {
        assert_eq!(
            tuple.len(),
            self.arity,
            "tuple arity mismatch for {}",
            self.name
        );
        self.tuples.insert(tuple)
    }

    pub fn contains(&self, tuple: &[Constant]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Tuples in first-appearance order.
    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    /// The constants of a unary relation in grounding order: ascending when
    /// every constant is an integer, first-appearance order otherwise.
    pub fn domain(&self) -> Vec<Constant> {
        let mut out: Vec<Constant> = self.tuples.iter().map(|t| t[0].clone()).collect();
        if out.iter().all(|c| c.as_int().is_some()) {
            out.sort();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EdbError {
    #[error("syntax error at {0}")]
    Syntax(#[from] LexError),
    #[error("{}relation {name} used with arity {found}, previously {expected}", at(.pos))]
    ArityConflict {
        pos: Option<Pos>,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: range bound must be an integer")]
    NonIntegerBound { pos: Pos },
}

fn at(pos: &Option<Pos>) -> String {
    pos.map(|p| format!("{p}: ")).unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Database {
    relations: IndexMap<String, Relation>,
    /// Source file names, in the order they were read.
    pub origin: Vec<String>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Inserts a fact, creating the relation on first use.
    pub fn insert(&mut self, name: &str, tuple: Tuple) -> Result<bool, EdbError> {
        self.insert_at(name, tuple, None)
    }

    fn insert_at(&mut self, name: &str, tuple: Tuple, pos: Option<Pos>) -> Result<bool, EdbError> {
        self.declare(name, tuple.len(), pos)?;
        Ok(self
            .relations
            .get_mut(name)
            .expect("declared")
            .insert(tuple))
    }

    fn declare(&mut self, name: &str, arity: usize, pos: Option<Pos>) -> Result<(), EdbError> {
        match self.relations.get(name) {
            Some(r) if r.arity != arity => Err(EdbError::ArityConflict {
                pos,
                name: name.to_string(),
                expected: r.arity,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.relations
                    .insert(name.to_string(), Relation::new(name, arity));
                Ok(())
            }
        }
    }

    /// Serializes the database as one fact per tuple.
    pub fn to_facts(&self) -> String {
        let mut out = String::new();
        for r in self.relations.values() {
            for t in r.tuples() {
                out.push_str(&r.name);
                if !t.is_empty() {
                    out.push('(');
                    let args: Vec<String> = t.iter().map(ToString::to_string).collect();
                    out.push_str(&args.join(","));
                    out.push(')');
                }
                out.push_str(".\n");
            }
        }
        out
    }
}

/// A `-c label=value` substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantBinding {
    pub label: String,
    pub value: String,
}

impl ConstantBinding {
    pub fn new(label: impl Into<String>, value: impl Into<String>) -> Self {
        ConstantBinding {
            label: label.into(),
            value: value.into(),
        }
    }
}

/// Replaces every whole-word occurrence of each binding label by its value.
///
/// A word is a maximal run of ASCII letters, digits and underscores, so `q`
/// matches in `[1..q]` but not in `qq`. Substituted text is not rescanned.
pub fn apply_bindings(source: &str, bindings: &[ConstantBinding]) -> String {
    if bindings.is_empty() {
        return source.to_string();
    }
    let mut out = String::with_capacity(source.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if word.is_empty() {
            return;
        }
        match bindings.iter().find(|b| b.label == *word) {
            Some(b) => out.push_str(&b.value),
            None => out.push_str(word),
        }
        word.clear();
    };
    for c in source.chars() {
        if lexer::is_word_char(c) {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

/// Parses one data file. Bindings must already have been applied.
pub fn parse_edb(source: &str) -> Result<Database, EdbError> {
    let mut cur = Cursor::new(lexer::tokenize(source)?);
    let mut db = Database::new();
    while *cur.peek() != Tok::Eof {
        let pos = cur.pos();
        let name = cur.ident()?;
        match cur.peek() {
            Tok::LBracket => {
                cur.bump();
                let lo = range_bound(&mut cur)?;
                cur.expect(&Tok::DotDot)?;
                let hi = range_bound(&mut cur)?;
                cur.expect(&Tok::RBracket)?;
                cur.expect(&Tok::Dot)?;
                db.declare(&name, 1, Some(pos))?;
                for n in lo..=hi {
                    db.insert_at(&name, vec![Constant::Int(n)], Some(pos))?;
                }
            }
            Tok::LParen => {
                cur.bump();
                let first = constant(&mut cur)?;
                if *cur.peek() == Tok::Semi {
                    let mut elems = vec![first];
                    while cur.eat(&Tok::Semi) {
                        elems.push(constant(&mut cur)?);
                    }
                    cur.expect(&Tok::RParen)?;
                    cur.expect(&Tok::Dot)?;
                    for e in elems {
                        db.insert_at(&name, vec![e], Some(pos))?;
                    }
                } else {
                    let mut args = vec![first];
                    while cur.eat(&Tok::Comma) {
                        args.push(constant(&mut cur)?);
                    }
                    cur.expect(&Tok::RParen)?;
                    cur.expect(&Tok::Dot)?;
                    db.insert_at(&name, args, Some(pos))?;
                }
            }
            Tok::Dot => {
                cur.bump();
                db.insert_at(&name, Vec::new(), Some(pos))?;
            }
            _ => return Err(cur.unexpected("`(`, `[` or `.`").into()),
        }
    }
    Ok(db)
}

fn range_bound(cur: &mut Cursor) -> Result<i64, EdbError> {
    let pos = cur.pos();
    match cur.peek() {
        Tok::Int(_) | Tok::Minus => Ok(cur.int()?),
        Tok::Ident(_) => Err(EdbError::NonIntegerBound { pos }),
        _ => Err(cur.unexpected("an integer").into()),
    }
}

fn constant(cur: &mut Cursor) -> Result<Constant, EdbError> {
    match cur.peek().clone() {
        Tok::Ident(s) => {
            cur.bump();
            Ok(Constant::Sym(s))
        }
        Tok::Int(_) | Tok::Minus => Ok(Constant::Int(cur.int()?)),
        _ => Err(cur.unexpected("a constant").into()),
    }
}

/// Unions several databases in order. Tuples keep the order in which they
/// were first seen across all inputs.
pub fn merge<'a>(databases: impl IntoIterator<Item = &'a Database>) -> Result<Database, EdbError> {
    let mut out = Database::new();
    for db in databases {
        for r in db.relations() {
            out.declare(&r.name, r.arity, None)?;
            for t in r.tuples() {
                out.insert(&r.name, t.clone())?;
            }
        }
        out.origin.extend(db.origin.iter().cloned());
    }
    Ok(out)
}
