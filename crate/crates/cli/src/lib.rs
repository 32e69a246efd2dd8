//! The `ground` and `dcs` command-line tools.

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Parser};
use dc_core::edb::{apply_bindings, merge, parse_edb, ConstantBinding};
use dc_core::grounder::{ground, output_name, read_tdc, write_tdc};
use dc_core::idb::{parse_idb, validate};
use dc_core::solver::{Solver, SolverConfig, Stats, TraceEvent};
use dc_core::theory::{AnswerSet, GroundTheory, Lit};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_ANSWER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;

/// Name of the statistics file `dcs` appends to.
pub const STAT_FILE: &str = "dcs.stat";

fn parse_binding(s: &str) -> Result<ConstantBinding, String> {
    let (label, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected label=value, got `{s}`"))?;
    let word = |w: &str| !w.is_empty() && w.chars().all(|c| c.is_alphanumeric() || c == '_');
    if !word(label) {
        return Err(format!("invalid constant label `{label}`"));
    }
    if !word(value) && value.parse::<i64>().is_err() {
        return Err(format!("invalid constant value `{value}`"));
    }
    Ok(ConstantBinding::new(label, value))
}

/// Grounds a rule file over one or more data files into a `.tdc` theory.
#[derive(Debug, Parser)]
#[command(name = "ground", disable_version_flag = true)]
pub struct GroundArgs {
    /// Rule (IDB) file; exactly one.
    #[arg(short = 'r', value_name = "RULE_FILE")]
    pub rule_file: PathBuf,
    /// Data (EDB) files.
    #[arg(short = 'd', value_name = "DATA_FILE", required = true, num_args = 1.., action = ArgAction::Append)]
    pub data_files: Vec<PathBuf>,
    /// Constant substitutions, `label=value`.
    #[arg(short = 'c', value_name = "LABEL=VALUE", num_args = 1.., action = ArgAction::Append, value_parser = parse_binding)]
    pub bindings: Vec<ConstantBinding>,
    /// Report progress on stdout.
    #[arg(short = 'V')]
    pub verbose: bool,
}

/// Searches a `.tdc` theory for answer sets.
#[derive(Debug, Parser)]
#[command(name = "dcs", disable_version_flag = true)]
pub struct DcsArgs {
    /// Theory file written by `ground`.
    #[arg(short = 'f', value_name = "FILE")]
    pub theory_file: PathBuf,
    /// Print the atoms of the answer set.
    #[arg(short = 'A')]
    pub print_atoms: bool,
    /// Print the theory and exit.
    #[arg(short = 'P')]
    pub print_theory: bool,
    /// Count all answer sets.
    #[arg(short = 'C')]
    pub count: bool,
    /// Trace branching and backtracking.
    #[arg(short = 'V')]
    pub verbose: bool,
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn read(path: &Path, err: &mut dyn Write) -> Option<String> {
    match fs::read_to_string(path) {
        Ok(s) => Some(s),
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", path.display());
            None
        }
    }
}

/// Runs `ground`, writing the theory into `out_dir`. Returns the exit code.
pub fn ground_main(
    args: &GroundArgs,
    out_dir: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let mut dbs = Vec::new();
    for path in &args.data_files {
        let Some(text) = read(path, err) else {
            return EXIT_INPUT;
        };
        match parse_edb(&apply_bindings(&text, &args.bindings)) {
            Ok(mut db) => {
                if args.verbose {
                    for r in db.relations() {
                        let _ = writeln!(
                            out,
                            "{}: {}/{} with {} tuples",
                            path.display(),
                            r.name,
                            r.arity,
                            r.len()
                        );
                    }
                }
                db.origin.push(file_name(path));
                dbs.push(db);
            }
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", path.display());
                return EXIT_INPUT;
            }
        }
    }
    let db = match merge(&dbs) {
        Ok(db) => db,
        Err(e) => {
            let _ = writeln!(err, "merging data files: {e}");
            return EXIT_INPUT;
        }
    };

    let Some(text) = read(&args.rule_file, err) else {
        return EXIT_INPUT;
    };
    let program = match parse_idb(&apply_bindings(&text, &args.bindings)) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", args.rule_file.display());
            return EXIT_INPUT;
        }
    };
    let diagnostics = validate(&program, &db);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            let _ = writeln!(err, "{}: {d}", args.rule_file.display());
        }
        return EXIT_INPUT;
    }
    if args.verbose {
        let _ = writeln!(
            out,
            "{}: {} constraints, {} Horn rules, {} post-constraints",
            args.rule_file.display(),
            program.constraints.len(),
            program.horn_rules.len(),
            program.post_constraints.len()
        );
    }

    let theory = match ground(&program, &db) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", args.rule_file.display());
            return EXIT_INPUT;
        }
    };
    let data: Vec<String> = args.data_files.iter().map(|p| file_name(p)).collect();
    let data: Vec<&str> = data.iter().map(String::as_str).collect();
    let name = output_name(&args.bindings, &data, &file_name(&args.rule_file));
    let target = out_dir.join(&name);
    let written = fs::File::create(&target).and_then(|f| {
        let mut w = io::BufWriter::new(f);
        write_tdc(&theory, &mut w)?;
        w.flush()
    });
    if let Err(e) = written {
        let _ = writeln!(err, "{}: {e}", target.display());
        return EXIT_INPUT;
    }
    if args.verbose {
        let _ = writeln!(
            out,
            "{name}: {} atoms, {} clauses, {} selects, {} Horn rules, {} post-constraints{}",
            theory.num_atoms(),
            theory.clauses.len(),
            theory.selects.len(),
            theory.horn.len(),
            theory.post.len(),
            if theory.ground_unsat {
                ", unsatisfiable"
            } else {
                ""
            }
        );
    }
    EXIT_OK
}

/// One `dcs.stat` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatRecord {
    pub theory_name: String,
    pub natoms: usize,
    pub nconstraints: usize,
    pub satisfiable: bool,
    pub models: Option<u64>,
    pub decisions: u64,
    pub backtracks: u64,
    pub lookahead_tests: u64,
    pub cpu_ms: u64,
}

impl std::fmt::Display for StatRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let models = self
            .models
            .map(|m| m.to_string())
            .unwrap_or_else(|| "-".into());
        write!(
            f,
            "{} {} {} {} {} {} {} {} {}",
            self.theory_name,
            self.natoms,
            self.nconstraints,
            if self.satisfiable { "SAT" } else { "UNSAT" },
            models,
            self.decisions,
            self.backtracks,
            self.lookahead_tests,
            self.cpu_ms
        )
    }
}

/// Appends one record as a single write; creates the file if needed.
pub fn append_stats(path: &Path, record: &StatRecord) -> io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(format!("{record}\n").as_bytes())
}

fn lit_name(theory: &GroundTheory, lit: Lit) -> String {
    let sign = if lit.is_positive() { '+' } else { '-' };
    format!("{sign}{}", theory.atom(lit.atom()))
}

fn trace_line(theory: &GroundTheory, e: &TraceEvent) -> String {
    match e {
        TraceEvent::Decide { lit, level } => {
            format!("branch {} at level {level}", lit_name(theory, *lit))
        }
        TraceEvent::Backtrack { lit, level } => {
            format!("backtrack to {} at level {level}", lit_name(theory, *lit))
        }
        TraceEvent::Forced { lit, level } => format!(
            "lookahead forces {} at level {level}",
            lit_name(theory, *lit)
        ),
        TraceEvent::Conflict { level } => format!("conflict at level {level}"),
        TraceEvent::Model { index } => format!("answer set {index}"),
    }
}

fn print_answer(theory: &GroundTheory, a: &AnswerSet, out: &mut dyn Write) {
    let _ = writeln!(out, "ANSWER");
    for id in &a.m {
        let _ = writeln!(out, "{}", theory.atom(*id));
    }
    let _ = writeln!(out, "CLOSURE");
    for id in a.derived() {
        let _ = writeln!(out, "{}", theory.atom(id));
    }
}

/// Runs `dcs`, appending statistics to `stat_path`. Returns the exit code.
pub fn dcs_main(args: &DcsArgs, stat_path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let Some(text) = read(&args.theory_file, err) else {
        return EXIT_INPUT;
    };
    let theory = match read_tdc(&text) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", args.theory_file.display());
            return EXIT_INPUT;
        }
    };
    if args.print_theory {
        let _ = write_tdc(&theory, out);
        return EXIT_OK;
    }

    let mut solver = Solver::new(&theory, SolverConfig::from_env());
    if args.verbose {
        let sink = &mut *out;
        let theory = &theory;
        solver = solver.with_tracer(move |e| {
            let _ = writeln!(sink, "{}", trace_line(theory, e));
        });
    }
    let mut answers = Vec::new();
    let (satisfiable, models, stats): (bool, Option<u64>, Stats) = if args.count {
        let keep = args.print_atoms;
        let stats = solver.enumerate(|a| {
            if keep {
                answers.push(a.clone());
            }
        });
        (stats.models_found > 0, Some(stats.models_found), stats)
    } else {
        let (a, stats) = solver.solve();
        let sat = a.is_some();
        answers.extend(a);
        (sat, None, stats)
    };

    match models {
        Some(n) => {
            let _ = writeln!(out, "MODELS {n}");
        }
        None => {
            let _ = writeln!(out, "{}", if satisfiable { "SAT" } else { "UNSAT" });
        }
    }
    if args.print_atoms {
        for a in &answers {
            print_answer(&theory, a, out);
        }
    }
    if args.verbose {
        let _ = writeln!(
            out,
            "decisions {} backtracks {} lookahead_tests {} propagations {} lookahead_satisfied {} cpu_ms {}",
            stats.decisions,
            stats.backtracks,
            stats.lookahead_tests,
            stats.propagations,
            stats.lookahead_satisfied,
            stats.cpu_ms
        );
    }

    let record = StatRecord {
        theory_name: file_name(&args.theory_file),
        natoms: theory.num_atoms(),
        nconstraints: theory.num_constraints(),
        satisfiable,
        models,
        decisions: stats.decisions,
        backtracks: stats.backtracks,
        lookahead_tests: stats.lookahead_tests,
        cpu_ms: stats.cpu_ms,
    };
    if let Err(e) = append_stats(stat_path, &record) {
        let _ = writeln!(err, "{}: {e}", stat_path.display());
    }

    if satisfiable || args.count {
        EXIT_OK
    } else {
        EXIT_NO_ANSWER
    }
}

fn parse_or_exit<A: Parser>(argv: impl IntoIterator<Item = OsString>) -> Result<A, ExitCode> {
    A::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK })
    })
}

/// Entry point of the `ground` binary.
pub fn ground_cli(argv: impl IntoIterator<Item = OsString>) -> ExitCode {
    match parse_or_exit::<GroundArgs>(argv) {
        Ok(args) => ExitCode::from(ground_main(
            &args,
            Path::new("."),
            &mut io::stdout().lock(),
            &mut io::stderr().lock(),
        )),
        Err(code) => code,
    }
}

/// Entry point of the `dcs` binary.
pub fn dcs_cli(argv: impl IntoIterator<Item = OsString>) -> ExitCode {
    match parse_or_exit::<DcsArgs>(argv) {
        Ok(args) => ExitCode::from(dcs_main(
            &args,
            Path::new(STAT_FILE),
            &mut io::BufWriter::new(io::stdout().lock()),
            &mut io::stderr().lock(),
        )),
        Err(code) => code,
    }
}
