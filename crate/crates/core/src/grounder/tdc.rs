//! Line-oriented text format for ground theories.
//!
//! ```text
//! dc 1 <natoms> <nclauses> <nselects> <nhorn> <npost>
//! atom <id> <c|h> <name>
//! cl <lit> ... 0
//! sel <lower> <upper|-1> <id> ... 0
//! horn <head> <body-id> ... 0
//! post <lit> ... 0
//! unsat
//! ```
//!
//! Lines starting with `#` are comments.

use std::io::{self, Write};

use crate::edb::Constant;
use crate::theory::{validate_theory, AtomId, AtomKind, GroundTheory, HornRule, Lit, Select};

const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TdcError {
    #[error("line {line}: malformed header: {message}")]
    Header { line: usize, message: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown atom id {id}")]
    DanglingAtom { line: usize, id: i64 },
    #[error("line {line}: {message}")]
    Kind { line: usize, message: String },
    #[error("header declares {expected} {what}, file has {found}")]
    Count {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid theory: {0}")]
    Invalid(String),
}

pub fn write_tdc<W: Write + ?Sized>(theory: &GroundTheory, out: &mut W) -> io::Result<()> {
    let (ncl, nsel, nhorn, npost) = if theory.ground_unsat {
        (0, 0, 0, 0)
    } else {
        (
            theory.clauses.len(),
            theory.selects.len(),
            theory.horn.len(),
            theory.post.len(),
        )
    };
    writeln!(
        out,
        "dc {VERSION} {} {ncl} {nsel} {nhorn} {npost}",
        theory.num_atoms()
    )?;
    for a in &theory.atoms {
        let k = match a.kind {
            AtomKind::Constraint => 'c',
            AtomKind::Horn => 'h',
        };
        writeln!(out, "atom {} {k} {a}", a.id)?;
    }
    if theory.ground_unsat {
        return writeln!(out, "unsat");
    }
    let lits = |ls: &[Lit]| -> String { ls.iter().map(|l| format!("{l} ")).collect() };
    let ids = |ids: &[AtomId]| -> String { ids.iter().map(|a| format!("{a} ")).collect() };
    for c in &theory.clauses {
        writeln!(out, "cl {}0", lits(c))?;
    }
    for s in &theory.selects {
        let upper = s.upper.map(i64::from).unwrap_or(-1);
        writeln!(out, "sel {} {upper} {}0", s.lower, ids(&s.scope))?;
    }
    for r in &theory.horn {
        writeln!(out, "horn {} {}0", r.head, ids(&r.body))?;
    }
    for c in &theory.post {
        writeln!(out, "post {}0", lits(c))?;
    }
    Ok(())
}

pub fn to_tdc_string(theory: &GroundTheory) -> String {
    let mut buf = Vec::new();
    write_tdc(theory, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("tdc output is UTF-8")
}

fn parse_name(name: &str) -> Option<(String, Vec<Constant>)> {
    match name.find('(') {
        None => Some((name.to_string(), Vec::new())),
        Some(i) => {
            let inner = name[i + 1..].strip_suffix(')')?;
            let args = inner.split(',').map(Constant::parse).collect();
            Some((name[..i].to_string(), args))
        }
    }
}

struct Reader {
    natoms: usize,
    kinds: Vec<AtomKind>,
}

impl Reader {
    fn id(&self, line: usize, tok: &str) -> Result<AtomId, TdcError> {
        let v: i64 = tok.parse().map_err(|_| TdcError::Malformed {
            line,
            message: format!("expected an atom id, found {tok:?}"),
        })?;
        if v < 1 || v as usize > self.natoms {
            return Err(TdcError::DanglingAtom { line, id: v });
        }
        Ok(AtomId(v as u32))
    }

    fn lit(&self, line: usize, tok: &str) -> Result<Lit, TdcError> {
        let v: i64 = tok.parse().map_err(|_| TdcError::Malformed {
            line,
            message: format!("expected a literal, found {tok:?}"),
        })?;
        if v == 0 || v.unsigned_abs() as usize > self.natoms {
            return Err(TdcError::DanglingAtom { line, id: v });
        }
        Ok(Lit::from_signed(v as i32).expect("nonzero"))
    }

    fn require_kind(
        &self,
        line: usize,
        id: AtomId,
        kind: AtomKind,
        role: &str,
    ) -> Result<(), TdcError> {
        if self.kinds[id.index()] != kind {
            return Err(TdcError::Kind {
                line,
                message: format!("atom {id} has the wrong kind for {role}"),
            });
        }
        Ok(())
    }
}

/// Splits `<items> 0` and checks the terminator.
fn terminated<'a>(line: usize, toks: &'a [&'a str]) -> Result<&'a [&'a str], TdcError> {
    match toks.split_last() {
        Some((&"0", items)) => Ok(items),
        _ => Err(TdcError::Malformed {
            line,
            message: "list must end with 0".into(),
        }),
    }
}

pub fn read_tdc(source: &str) -> Result<GroundTheory, TdcError> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(TdcError::Header {
        line: 1,
        message: "file is empty".into(),
    })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 7 || h[0] != "dc" {
        return Err(TdcError::Header {
            line: hline,
            message: "expected `dc <version> <natoms> <nclauses> <nselects> <nhorn> <npost>`"
                .into(),
        });
    }
    let counts = h[1..]
        .iter()
        .map(|t| t.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| TdcError::Header {
            line: hline,
            message: "counts must be nonnegative integers".into(),
        })?;
    if counts[0] != VERSION as usize {
        return Err(TdcError::Header {
            line: hline,
            message: format!("unsupported format version {}", counts[0]),
        });
    }

    let body: Vec<(usize, Vec<&str>)> = lines
        .map(|(n, l)| (n, l.split_whitespace().collect()))
        .collect();
    let mut theory = GroundTheory::new();

    // Atoms first, so constraints may be checked against the table.
    for (line, toks) in &body {
        if toks[0] != "atom" {
            continue;
        }
        let line = *line;
        if toks.len() != 4 {
            return Err(TdcError::Malformed {
                line,
                message: "expected `atom <id> <c|h> <name>`".into(),
            });
        }
        let expected = theory.num_atoms() + 1;
        if toks[1].parse::<usize>().ok() != Some(expected) {
            return Err(TdcError::Malformed {
                line,
                message: format!("atom ids must be dense and ascending; expected {expected}"),
            });
        }
        let kind = match toks[2] {
            "c" => AtomKind::Constraint,
            "h" => AtomKind::Horn,
            k => {
                return Err(TdcError::Malformed {
                    line,
                    message: format!("unknown atom kind {k:?}"),
                })
            }
        };
        let (pred, args) = parse_name(toks[3]).ok_or_else(|| TdcError::Malformed {
            line,
            message: format!("bad atom name {:?}", toks[3]),
        })?;
        theory.add_atom(pred, args, kind);
    }

    let r = Reader {
        natoms: theory.num_atoms(),
        kinds: theory.atoms.iter().map(|a| a.kind).collect(),
    };
    for (line, toks) in &body {
        let line = *line;
        match toks[0] {
            "atom" => {}
            "unsat" => theory.ground_unsat = true,
            "cl" | "post" => {
                let lits = terminated(line, &toks[1..])?
                    .iter()
                    .map(|t| r.lit(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if toks[0] == "cl" {
                    for l in &lits {
                        r.require_kind(
                            line,
                            l.atom(),
                            AtomKind::Constraint,
                            "a constraint clause",
                        )?;
                    }
                    theory.clauses.push(lits);
                } else {
                    theory.post.push(lits);
                }
            }
            "sel" => {
                if toks.len() < 4 {
                    return Err(TdcError::Malformed {
                        line,
                        message: "expected `sel <lower> <upper> <id> ... 0`".into(),
                    });
                }
                let lower: u32 = toks[1].parse().map_err(|_| TdcError::Malformed {
                    line,
                    message: "bad lower bound".into(),
                })?;
                let upper = match toks[2].parse::<i64>() {
                    Ok(-1) => None,
                    Ok(u) if u >= 0 && u <= u32::MAX as i64 => Some(u as u32),
                    _ => {
                        return Err(TdcError::Malformed {
                            line,
                            message: "bad upper bound".into(),
                        })
                    }
                };
                let scope = terminated(line, &toks[3..])?
                    .iter()
                    .map(|t| r.id(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                for &a in &scope {
                    r.require_kind(line, a, AtomKind::Constraint, "a Select scope")?;
                }
                theory.selects.push(Select {
                    lower,
                    upper,
                    scope,
                });
            }
            "horn" => {
                let items = terminated(line, &toks[1..])?;
                let (head, body) = items.split_first().ok_or_else(|| TdcError::Malformed {
                    line,
                    message: "horn rule needs a head".into(),
                })?;
                let head = r.id(line, head)?;
                r.require_kind(line, head, AtomKind::Horn, "a Horn rule head")?;
                let body = body
                    .iter()
                    .map(|t| r.id(line, t))
                    .collect::<Result<Vec<_>, _>>()?;
                theory.horn.push(HornRule { head, body });
            }
            other => {
                return Err(TdcError::Malformed {
                    line,
                    message: format!("unknown record {other:?}"),
                })
            }
        }
    }

    let check = |what, expected: usize, found: usize| {
        if expected == found {
            Ok(())
        } else {
            Err(TdcError::Count {
                what,
                expected,
                found,
            })
        }
    };
    check("atoms", counts[1], theory.num_atoms())?;
    check("clauses", counts[2], theory.clauses.len())?;
    check("selects", counts[3], theory.selects.len())?;
    check("horn rules", counts[4], theory.horn.len())?;
    check("post-constraints", counts[5], theory.post.len())?;
    if theory.ground_unsat && theory.num_constraints() > 0 {
        return Err(TdcError::Invalid("`unsat` replaces all constraints".into()));
    }
    if let Some(d) = validate_theory(&theory).into_iter().next() {
        return Err(TdcError::Invalid(d.message));
    }
    Ok(theory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edb::parse_edb;
    use crate::fixtures::{hamilton, GRAPH};
    use crate::grounder::ground;

    #[test]
    fn empty_theory() {
        assert_eq!(to_tdc_string(&GroundTheory::new()), "dc 1 0 0 0 0 0\n");
        assert_eq!(read_tdc("dc 1 0 0 0 0 0\n").unwrap(), GroundTheory::new());
    }

    #[test]
    fn single_clause() {
        let mut t = GroundTheory::new();
        let a = t.add_atom("p", vec![Constant::Int(1)], AtomKind::Constraint);
        let b = t.add_atom("q", vec![Constant::Int(1)], AtomKind::Constraint);
        t.clauses.push(vec![Lit::neg(a), Lit::pos(b)]);
        let text = to_tdc_string(&t);
        assert_eq!(
            text,
            "dc 1 2 1 0 0 0\natom 1 c p(1)\natom 2 c q(1)\ncl -1 2 0\n"
        );
        assert_eq!(read_tdc(&text).unwrap(), t);
    }

    #[test]
    fn figure_grounding_round_trips() {
        let t = ground(&hamilton(), &parse_edb(GRAPH).unwrap()).unwrap();
        let text = to_tdc_string(&t);
        assert!(text.ends_with("unsat\n"));
        assert_eq!(read_tdc(&text).unwrap(), t);
    }

    #[test]
    fn comments_and_unbounded_selects() {
        let text =
            "# a comment\ndc 1 2 0 1 0 0\natom 1 c a\natom 2 c b\n\n# more\nsel 1 -1 1 2 0\n";
        let t = read_tdc(text).unwrap();
        assert_eq!(t.selects[0].upper, None);
        assert_eq!(
            to_tdc_string(&t),
            "dc 1 2 0 1 0 0\natom 1 c a\natom 2 c b\nsel 1 -1 1 2 0\n"
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(read_tdc(""), Err(TdcError::Header { .. })));
        assert!(matches!(
            read_tdc("dc 2 0 0 0 0 0"),
            Err(TdcError::Header { .. })
        ));
        assert!(matches!(
            read_tdc("dc 1 1 1 0 0 0\natom 1 c a\ncl 2 0"),
            Err(TdcError::DanglingAtom { line: 3, id: 2 })
        ));
        assert!(matches!(
            read_tdc("dc 1 1 0 0 1 0\natom 1 c a\nhorn 1 0"),
            Err(TdcError::Kind { line: 3, .. })
        ));
        assert!(matches!(
            read_tdc("dc 1 1 1 0 0 0\natom 1 h a\ncl 1 0"),
            Err(TdcError::Kind { .. })
        ));
        assert!(matches!(
            read_tdc("dc 1 1 0 0 0 0\natom 1 c a\ncl 1 0"),
            Err(TdcError::Count { .. })
        ));
        assert!(matches!(
            read_tdc("dc 1 1 1 0 0 0\natom 1 c a\ncl 1"),
            Err(TdcError::Malformed { .. })
        ));
    }
}
