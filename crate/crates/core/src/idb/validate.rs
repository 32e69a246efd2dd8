use crate::edb::Database;
pub use crate::Diagnostic;

use super::*;

struct Checker<'a> {
    program: &'a Program,
    db: &'a Database,
    horn: IndexSet<&'a str>,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn report(&mut self, message: String) {
        let d = Diagnostic { message };
        if !self.out.contains(&d) {
            self.out.push(d);
        }
    }

    fn unary_type(&mut self, type_name: &str, what: &str) {
        match self.db.relation(type_name) {
            None => self.report(format!("{what}: unknown EDB type {type_name}")),
            Some(r) if r.arity != 1 => self.report(format!(
                "{what}: type {type_name} must be a unary EDB relation, has arity {}",
                r.arity
            )),
            Some(_) => {}
        }
    }

    fn var(&mut self, name: &str, rule: &str) {
        if self.program.variable(name).is_none() {
            self.report(format!("{rule}: undeclared variable {name}"));
        }
    }

    fn atom(&mut self, atom: &Atom, rule: &str) {
        let Some(decl) = self.program.predicate(&atom.predicate) else {
            if self.db.relation(&atom.predicate).is_some() {
                self.report(format!(
                    "{rule}: EDB relation {} may only be used in conditions",
                    atom.predicate
                ));
            } else {
                self.report(format!("{rule}: undeclared predicate {}", atom.predicate));
            }
            return;
        };
        if decl.param_types.len() != atom.args.len() {
            self.report(format!(
                "{rule}: {} expects {} arguments, got {}",
                atom.predicate,
                decl.param_types.len(),
                atom.args.len()
            ));
            return;
        }
        for (arg, ty) in atom.args.iter().zip(&decl.param_types) {
            match arg {
                Term::Var(v) => match self.program.variable(v) {
                    None => self.var(v, rule),
                    Some(vd) if vd.type_name != *ty => self.report(format!(
                        "{rule}: variable {v} has type {} but {} expects {ty}",
                        vd.type_name, atom.predicate
                    )),
                    Some(_) => {}
                },
                Term::Const(c) => {
                    let ok = self
                        .db
                        .relation(ty)
                        .is_some_and(|r| r.arity == 1 && r.contains(std::slice::from_ref(c)));
                    if !ok {
                        self.report(format!("{rule}: constant {c} is not of type {ty}"));
                    }
                }
            }
        }
    }

    fn condition(&mut self, cond: &Condition, rule: &str) {
        for v in cond.vars() {
            self.var(v, rule);
        }
        match cond {
            Condition::Edb(a) => match self.db.relation(&a.predicate) {
                Some(r) if r.arity == a.args.len() => {}
                _ => {
                    if self.program.predicate(&a.predicate).is_some() {
                        self.report(format!(
                            "{rule}: condition {a} uses IDB predicate {}; conditions may only use EDB relations",
                            a.predicate
                        ));
                    } else {
                        self.report(format!(
                            "{rule}: unknown EDB relation {}/{}",
                            a.predicate,
                            a.args.len()
                        ));
                    }
                }
            },
            Condition::Compare { left, op, right } => {
                if op.is_ordering() && (left.has_symbol() || right.has_symbol()) {
                    self.report(format!(
                        "{rule}: ordered comparison {cond} on a non-integer constant"
                    ));
                }
            }
        }
    }

    fn constraint(&mut self, rule: &ConstraintRule, post: bool) {
        let label = format!("rule `{rule}`");
        for a in rule.atoms() {
            self.atom(a, &label);
        }
        for v in rule.quantified_vars() {
            self.var(v, &label);
        }
        for c in rule.conditions() {
            self.condition(c, &label);
        }
        if let Constraint::Select(s) = &rule.constraint {
            if post {
                self.report(format!(
                    "{label}: Select constraints cannot be post-constraints"
                ));
            }
            for t in &s.targets {
                if self.horn.contains(t.predicate.as_str()) {
                    self.report(format!(
                        "{label}: Horn predicate {} cannot appear in a Select constraint",
                        t.predicate
                    ));
                }
            }
        }
    }
}

/// Checks a program against the merged database. An empty result means the
/// program can be grounded without unknown-name or arity failures.
pub fn validate(program: &Program, db: &Database) -> Vec<Diagnostic> {
    let mut c = Checker {
        program,
        db,
        horn: program.horn_predicates(),
        out: Vec::new(),
    };

    for (i, p) in program.predicates.iter().enumerate() {
        if program.predicates[..i].iter().any(|q| q.name == p.name) {
            c.report(format!("predicate {} declared twice", p.name));
        }
        if db.relation(&p.name).is_some() {
            c.report(format!(
                "predicate {} has the same name as an EDB relation",
                p.name
            ));
        }
        for t in &p.param_types {
            c.unary_type(t, &format!("predicate {}", p.name));
        }
    }
    for (i, v) in program.variables.iter().enumerate() {
        if program.variables[..i].iter().any(|w| w.name == v.name) {
            c.report(format!("variable {} declared twice", v.name));
        }
        c.unary_type(&v.type_name, &format!("variable {}", v.name));
    }

    for r in &program.constraints {
        c.constraint(r, false);
    }
    for r in &program.post_constraints {
        c.constraint(r, true);
    }
    for r in &program.horn_rules {
        let label = format!("rule `{r}`");
        for a in r.body.iter().chain(&r.head) {
            c.atom(a, &label);
        }
        if let Some(fa) = &r.forall {
            for v in &fa.vars {
                c.var(v, &label);
            }
            for cond in &fa.conditions {
                c.condition(cond, &label);
            }
        }
    }
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edb::parse_edb;
    use crate::idb::parse_idb;

    use crate::fixtures::{hamilton, GRAPH};

    #[test]
    fn figure_program_is_clean() {
        let db = parse_edb(GRAPH).unwrap();
        assert_eq!(validate(&hamilton(), &db), vec![]);
    }

    #[test]
    fn missing_edge_relation() {
        let db = parse_edb("vtx(1).\nvtx(2).").unwrap();
        let d = validate(&hamilton(), &db);
        assert!(
            d.iter()
                .any(|d| d.message.contains("unknown EDB relation edge/2")),
            "{d:?}"
        );
    }

    #[test]
    fn undeclared_variable() {
        let p = parse_idb("idbpred\np(t).\nidbvar\nt X.\nidbrules\nNOT p(Z).").unwrap();
        let db = parse_edb("t(1).").unwrap();
        let d = validate(&p, &db);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("undeclared variable Z"));
    }

    #[test]
    fn type_and_arity_problems() {
        let src = "idbpred\np(t). q(u,u).\nidbvar\nt X. u Y.\nidbrules\n\
                   NOT p(Y).\nq(Y).\np(7).\nForall(X; X < a) NOT p(X).";
        let p = parse_idb(src).unwrap();
        let db = parse_edb("t(1). u(a). ").unwrap();
        let msgs: Vec<String> = validate(&p, &db).into_iter().map(|d| d.message).collect();
        assert!(msgs
            .iter()
            .any(|m| m.contains("variable Y has type u but p expects t")));
        assert!(msgs.iter().any(|m| m.contains("q expects 2 arguments")));
        assert!(msgs
            .iter()
            .any(|m| m.contains("constant 7 is not of type t")));
        assert!(msgs.iter().any(|m| m.contains("ordered comparison")));
    }

    #[test]
    fn horn_predicate_in_select() {
        let src =
            "idbpred\nh(t). p(t).\nidbvar\nt X.\nidbrules\nHorn p(X) -> h(X).\nSelect(1,1) h(X).";
        let p = parse_idb(src).unwrap();
        let db = parse_edb("t(1).").unwrap();
        let d = validate(&p, &db);
        assert!(
            d.iter().any(|d| d.message.contains("Horn predicate h")),
            "{d:?}"
        );
    }

    #[test]
    fn types_must_be_unary_relations() {
        let p = parse_idb("idbpred\np(edge).\nidbvar\nzzz X.\nidbrules\n").unwrap();
        let db = parse_edb("edge(1,2).").unwrap();
        let d = validate(&p, &db);
        assert_eq!(d.len(), 2, "{d:?}");
    }
}
