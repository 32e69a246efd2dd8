use crate::edb::Constant;
use crate::lexer::{self, Cursor, LexError, Pos, Tok};

use super::*;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IdbError {
    #[error("syntax error at {0}")]
    Syntax(#[from] LexError),
    #[error("{pos}: unknown section keyword `{word}`")]
    UnknownSection { pos: Pos, word: String },
    #[error("{pos}: expected a section keyword (idbpred, idbvar, idbrules)")]
    MissingSection { pos: Pos },
    #[error("{pos}: Select lower bound {lower} exceeds upper bound {upper}")]
    BoundsOrder { pos: Pos, lower: u32, upper: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Pred,
    Var,
    Rules,
}

/// Parses a rule file. Bindings must already have been applied.
pub fn parse_idb(source: &str) -> Result<Program, IdbError> {
    let mut p = Parser {
        cur: Cursor::new(lexer::tokenize(source)?),
        program: Program::default(),
    };
    let mut rules = Vec::new();
    let mut section = None;

    while *p.cur.peek() != Tok::Eof {
        if let Tok::Ident(word) = p.cur.peek().clone() {
            let next = p.cur.peek_at(1).clone();
            let switch = match word.as_str() {
                "idbpred" => Some(Section::Pred),
                "idbvar" => Some(Section::Var),
                "idbrules" => Some(Section::Rules),
                w if w.starts_with("idb") && !matches!(next, Tok::LParen | Tok::Dot) => {
                    return Err(IdbError::UnknownSection {
                        pos: p.cur.pos(),
                        word,
                    });
                }
                _ => None,
            };
            if let Some(s) = switch {
                p.cur.bump();
                section = Some(s);
                continue;
            }
        }
        match section {
            None => return Err(IdbError::MissingSection { pos: p.cur.pos() }),
            Some(Section::Pred) => p.predicate_decl()?,
            Some(Section::Var) => p.var_decl()?,
            Some(Section::Rules) => rules.push(p.rule()?),
        }
    }

    let mut program = p.program;
    for r in &rules {
        if let ParsedRule::Horn(h) = r {
            program.horn_rules.push(h.clone());
        }
    }
    let horn: Vec<String> = program
        .horn_predicates()
        .into_iter()
        .map(String::from)
        .collect();
    for r in rules {
        if let ParsedRule::Constraint(c) = r {
            let post = c.explicit_post || c.atoms().iter().any(|a| horn.contains(&a.predicate));
            if post {
                program.post_constraints.push(c);
            } else {
                program.constraints.push(c);
            }
        }
    }
    Ok(program)
}

enum ParsedRule {
    Constraint(ConstraintRule),
    Horn(HornRule),
}

struct Parser {
    cur: Cursor,
    program: Program,
}

impl Parser {
    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.cur.peek(), Tok::Ident(s) if s == kw)
    }

    fn predicate_decl(&mut self) -> Result<(), IdbError> {
        let name = self.cur.ident()?;
        let mut param_types = Vec::new();
        if self.cur.eat(&Tok::LParen) {
            param_types.push(self.cur.ident()?);
            while self.cur.eat(&Tok::Comma) {
                param_types.push(self.cur.ident()?);
            }
            self.cur.expect(&Tok::RParen)?;
        }
        self.cur.expect(&Tok::Dot)?;
        self.program
            .predicates
            .push(PredicateDecl { name, param_types });
        Ok(())
    }

    fn var_decl(&mut self) -> Result<(), IdbError> {
        let type_name = self.cur.ident()?;
        loop {
            let name = self.cur.ident()?;
            self.program.variables.push(VarDecl {
                name,
                type_name: type_name.clone(),
            });
            if !self.cur.eat(&Tok::Comma) {
                break;
            }
        }
        self.cur.expect(&Tok::Dot)?;
        Ok(())
    }

    fn is_var_name(&self, name: &str) -> bool {
        self.program.variable(name).is_some() || name.starts_with(|c: char| c.is_ascii_uppercase())
    }

    fn rule(&mut self) -> Result<ParsedRule, IdbError> {
        if self.is_keyword("Horn") {
            self.cur.bump();
            let forall = self.opt_forall()?;
            let mut body = Vec::new();
            let head;
            if self.cur.eat(&Tok::Arrow) {
                head = self.atom_list(&Tok::Comma)?;
            } else {
                body = self.atom_list(&Tok::Comma)?;
                if self.cur.eat(&Tok::Arrow) {
                    head = self.atom_list(&Tok::Comma)?;
                } else {
                    // `Horn p(X).` states facts.
                    head = std::mem::take(&mut body);
                }
            }
            self.cur.expect(&Tok::Dot)?;
            return Ok(ParsedRule::Horn(HornRule { forall, body, head }));
        }

        let explicit_post = if self.is_keyword("Post") {
            self.cur.bump();
            true
        } else {
            false
        };

        if self.is_keyword("Select") {
            let select = self.select()?;
            return Ok(ParsedRule::Constraint(ConstraintRule {
                constraint: Constraint::Select(select),
                explicit_post,
            }));
        }

        let forall = self.opt_forall()?;
        let kind = if self.is_keyword("NOT") && matches!(self.cur.peek_at(1), Tok::Ident(_)) {
            self.cur.bump();
            ClauseKind::Not(self.atom_list(&Tok::Comma)?)
        } else if self.cur.eat(&Tok::Arrow) {
            let (head, connective) = self.head()?;
            ClauseKind::Implication {
                body: Vec::new(),
                head,
                connective,
            }
        } else {
            let first = self.atom()?;
            match self.cur.peek() {
                Tok::Pipe => {
                    let mut atoms = vec![first];
                    while self.cur.eat(&Tok::Pipe) {
                        atoms.push(self.atom()?);
                    }
                    ClauseKind::Disjunction(atoms)
                }
                Tok::Comma | Tok::Arrow => {
                    let mut body = vec![first];
                    while self.cur.eat(&Tok::Comma) {
                        body.push(self.atom()?);
                    }
                    self.cur.expect(&Tok::Arrow)?;
                    let (head, connective) = self.head()?;
                    ClauseKind::Implication {
                        body,
                        head,
                        connective,
                    }
                }
                _ => ClauseKind::Disjunction(vec![first]),
            }
        };
        self.cur.expect(&Tok::Dot)?;
        Ok(ParsedRule::Constraint(ConstraintRule {
            constraint: Constraint::Clause { forall, kind },
            explicit_post,
        }))
    }

    fn head(&mut self) -> Result<(Vec<Atom>, Connective), IdbError> {
        let first = self.atom()?;
        let connective = match self.cur.peek() {
            Tok::Comma => Connective::Conjunction,
            _ => Connective::Disjunction,
        };
        let sep = match connective {
            Connective::Conjunction => Tok::Comma,
            Connective::Disjunction => Tok::Pipe,
        };
        let mut head = vec![first];
        while self.cur.eat(&sep) {
            head.push(self.atom()?);
        }
        Ok((head, connective))
    }

    fn select(&mut self) -> Result<SelectRule, IdbError> {
        let pos = self.cur.pos();
        self.cur.bump();
        self.cur.expect(&Tok::LParen)?;
        let lower = self.bound()?;
        self.cur.expect(&Tok::Comma)?;
        let upper = self.bound()?;
        if lower > upper {
            return Err(IdbError::BoundsOrder { pos, lower, upper });
        }
        let mut bound_vars = Vec::new();
        while self.cur.eat(&Tok::Comma) {
            bound_vars.push(self.cur.ident()?);
        }
        let conditions = if self.cur.eat(&Tok::Semi) {
            self.conditions()?
        } else {
            Vec::new()
        };
        self.cur.expect(&Tok::RParen)?;
        let targets = self.atom_list(&Tok::Comma)?;
        self.cur.expect(&Tok::Dot)?;
        Ok(SelectRule {
            lower,
            upper: (upper != UNBOUNDED_SENTINEL).then_some(upper),
            bound_vars,
            conditions,
            targets,
        })
    }

    fn bound(&mut self) -> Result<u32, IdbError> {
        let pos = self.cur.pos();
        let n = self.cur.int()?;
        u32::try_from(n).map_err(|_| {
            IdbError::Syntax(LexError {
                pos,
                message: format!("cardinality bound {n} must be a nonnegative integer"),
            })
        })
    }

    fn opt_forall(&mut self) -> Result<Option<Forall>, IdbError> {
        if !self.is_keyword("Forall") {
            return Ok(None);
        }
        self.cur.bump();
        self.cur.expect(&Tok::LParen)?;
        let mut vars = Vec::new();
        if let Tok::Ident(_) = self.cur.peek() {
            vars.push(self.cur.ident()?);
            while self.cur.eat(&Tok::Comma) {
                vars.push(self.cur.ident()?);
            }
        }
        let conditions = if self.cur.eat(&Tok::Semi) {
            self.conditions()?
        } else {
            Vec::new()
        };
        self.cur.expect(&Tok::RParen)?;
        Ok(Some(Forall { vars, conditions }))
    }

    fn conditions(&mut self) -> Result<Vec<Condition>, IdbError> {
        let mut out = vec![self.condition()?];
        while self.cur.eat(&Tok::Comma) {
            out.push(self.condition()?);
        }
        Ok(out)
    }

    fn condition(&mut self) -> Result<Condition, IdbError> {
        if matches!(self.cur.peek(), Tok::Ident(_)) && *self.cur.peek_at(1) == Tok::LParen {
            return Ok(Condition::Edb(self.atom()?));
        }
        let left = self.expr()?;
        let op = match self.cur.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::NotEq => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Err(self.cur.unexpected("a comparison operator").into()),
        };
        self.cur.bump();
        let right = self.expr()?;
        Ok(Condition::Compare { left, op, right })
    }

    fn expr(&mut self) -> Result<Expr, IdbError> {
        let mut e = self.term()?;
        loop {
            let op = match self.cur.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(e),
            };
            self.cur.bump();
            let r = self.term()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn term(&mut self) -> Result<Expr, IdbError> {
        let mut e = self.factor()?;
        loop {
            let op = match self.cur.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Ident(s) if s == "mod" => BinOp::Mod,
                _ => return Ok(e),
            };
            self.cur.bump();
            let r = self.factor()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn factor(&mut self) -> Result<Expr, IdbError> {
        match self.cur.peek().clone() {
            Tok::Int(n) => {
                self.cur.bump();
                Ok(Expr::Const(Constant::Int(n)))
            }
            Tok::Minus => {
                if let Tok::Int(_) = self.cur.peek_at(1) {
                    return Ok(Expr::Const(Constant::Int(self.cur.int()?)));
                }
                self.cur.bump();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::LParen => {
                self.cur.bump();
                let e = self.expr()?;
                self.cur.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) => {
                self.cur.bump();
                Ok(if self.is_var_name(&s) {
                    Expr::Var(s)
                } else {
                    Expr::Const(Constant::Sym(s))
                })
            }
            _ => Err(self.cur.unexpected("an expression").into()),
        }
    }

    fn atom_list(&mut self, sep: &Tok) -> Result<Vec<Atom>, IdbError> {
        let mut out = vec![self.atom()?];
        while self.cur.eat(sep) {
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Atom, IdbError> {
        let predicate = self.cur.ident()?;
        let mut args = Vec::new();
        if self.cur.eat(&Tok::LParen) {
            args.push(self.arg()?);
            while self.cur.eat(&Tok::Comma) {
                args.push(self.arg()?);
            }
            self.cur.expect(&Tok::RParen)?;
        }
        Ok(Atom { predicate, args })
    }

    fn arg(&mut self) -> Result<Term, IdbError> {
        match self.cur.peek().clone() {
            Tok::Ident(s) => {
                self.cur.bump();
                Ok(if self.is_var_name(&s) {
                    Term::Var(s)
                } else {
                    Term::Const(Constant::Sym(s))
                })
            }
            Tok::Int(_) | Tok::Minus => Ok(Term::Const(Constant::Int(self.cur.int()?))),
            _ => Err(self.cur.unexpected("a variable or constant").into()),
        }
    }
}
