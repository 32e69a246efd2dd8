//! DATALOG with constraints.
//!
//! The pipeline is: data files ([`edb`]) and a rule file ([`idb`]) are
//! grounded ([`grounder`]) into a propositional [`theory`], which the
//! [`solver`] searches for answer sets. [`oracle`] holds brute-force
//! reference procedures used to test the rest.

use std::fmt;

pub mod edb;
pub mod grounder;
pub mod idb;
mod lexer;
pub mod oracle;
pub mod solver;
pub mod theory;

pub use lexer::{LexError, Pos};

/// A non-fatal problem report (validation output).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::edb::{apply_bindings, ConstantBinding};
    use crate::idb::{parse_idb, Program};

    pub const GRAPH: &str = "vtx(1).\nvtx(2).\nvtx(3).\nedge(1,3).\nedge(3,2).";

    pub const HAMILTON: &str = "\
% comments begin with percent sign
idbpred % section for defining predicates
vstd(vtx).
hc(vtx,vtx).
idbvar % section for declaring variables
vtx X,Y.
idbrules % rule section
% constraints
Select(1,1,Y;edge(X,Y)) hc(X,Y).
Select(1,1,X;edge(X,Y)) hc(X,Y).
% Horn rules
Horn Forall(X,Y;X!=i,edge(X,Y))
 vstd(X), hc(X,Y) → vstd(Y).
Horn Forall(X,Y;X==i,edge(X,Y))
 hc(X,Y) → vstd(Y).
% post-constraints
vstd(X).
";

    /// The hamiltonicity program with `i = 1`.
    pub fn hamilton() -> Program {
        let src = apply_bindings(HAMILTON, &[ConstantBinding::new("i", "1")]);
        parse_idb(&src).unwrap()
    }
}
