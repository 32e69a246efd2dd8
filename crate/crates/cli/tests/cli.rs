use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

/// A scratch directory holding copies of the named example files.
fn workdir(files: &[&str]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in files {
        let src = examples().join(f);
        fs::copy(&src, dir.path().join(src.file_name().unwrap())).unwrap();
    }
    dir
}

fn run(bin: &str, dir: &Path, args: &[&str]) -> Output {
    let exe = match bin {
        "ground" => env!("CARGO_BIN_EXE_ground"),
        _ => env!("CARGO_BIN_EXE_dcs"),
    };
    Command::new(exe)
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stat_lines(dir: &Path) -> Vec<String> {
    fs::read_to_string(dir.join("dcs.stat"))
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn hamiltonicity_worked_example() {
    let dir = workdir(&["hamiltonicity/hcp", "hamiltonicity/1.gph"]);
    let g = run(
        "ground",
        dir.path(),
        &["-r", "hcp", "-d", "1.gph", "-c", "i=1"],
    );
    assert_eq!(
        g.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&g.stderr)
    );
    assert!(g.stderr.is_empty());
    assert!(dir.path().join("1_1.gph_hcp.tdc").exists());

    let d = run("dcs", dir.path(), &["-f", "1_1.gph_hcp.tdc"]);
    assert_eq!(d.status.code(), Some(1));
    assert_eq!(stdout(&d), "UNSAT\n");
    let lines = stat_lines(dir.path());
    assert_eq!(lines.len(), 1);
    let fields: Vec<&str> = lines[0].split(' ').collect();
    assert_eq!(fields.len(), 9);
    assert_eq!(&fields[..5], ["1_1.gph_hcp.tdc", "5", "0", "UNSAT", "-"]);

    run("dcs", dir.path(), &["-f", "1_1.gph_hcp.tdc"]);
    let again = stat_lines(dir.path());
    assert_eq!(again.len(), 2);
    assert_eq!(again[0], lines[0]);
}

#[test]
fn answer_and_closure_are_printed() {
    let dir = workdir(&["hamiltonicity/hcp", "hamiltonicity/4cycle.gph"]);
    let g = run(
        "ground",
        dir.path(),
        &["-r", "hcp", "-d", "4cycle.gph", "-c", "i=1"],
    );
    assert_eq!(g.status.code(), Some(0));
    let d = run("dcs", dir.path(), &["-f", "1_4cycle.gph_hcp.tdc", "-A"]);
    assert_eq!(d.status.code(), Some(0));
    assert_eq!(
        stdout(&d),
        "SAT\nANSWER\nhc(1,2)\nhc(2,3)\nhc(3,4)\nhc(4,1)\nCLOSURE\nvstd(2)\nvstd(3)\nvstd(4)\nvstd(1)\n"
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = workdir(&["hamiltonicity/hcp", "hamiltonicity/1.gph"]);
    for args in [
        &["-d", "1.gph"][..],
        &["-r", "hcp"],
        &["-r", "hcp", "-r", "hcp", "-d", "1.gph"],
        &["-r", "hcp", "-d", "1.gph", "-c", "i"],
    ] {
        let o = run("ground", dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run("dcs", dir.path(), &[]).status.code(), Some(2));
    assert_eq!(
        run("dcs", dir.path(), &["-f", "x", "-Q"]).status.code(),
        Some(2)
    );
}

#[test]
fn binding_forms_give_identical_theories() {
    let dir = workdir(&["schur/schur.idb", "schur/schur.edb"]);
    let a = run(
        "ground",
        dir.path(),
        &[
            "-r",
            "schur.idb",
            "-d",
            "schur.edb",
            "-c",
            "b=3",
            "-c",
            "n=14",
        ],
    );
    assert_eq!(a.status.code(), Some(0));
    let first = fs::read(dir.path().join("3_14_schur.edb_schur.idb.tdc")).unwrap();
    let b = run(
        "ground",
        dir.path(),
        &["-r", "schur.idb", "-d", "schur.edb", "-c", "b=3", "n=14"],
    );
    assert_eq!(b.status.code(), Some(0));
    let second = fs::read(dir.path().join("3_14_schur.edb_schur.idb.tdc")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn print_theory_echoes_canonical_form() {
    let dir = workdir(&[
        "coloring/color.idb",
        "coloring/colors.edb",
        "coloring/c5.gph",
    ]);
    let g = run(
        "ground",
        dir.path(),
        &["-r", "color.idb", "-d", "colors.edb", "c5.gph"],
    );
    assert_eq!(g.status.code(), Some(0));
    let name = "colors.edb_c5.gph_color.idb.tdc";
    let bytes = fs::read(dir.path().join(name)).unwrap();
    let p = run("dcs", dir.path(), &["-f", name, "-P"]);
    assert_eq!(p.status.code(), Some(0));
    assert_eq!(p.stdout, bytes);
    assert!(!dir.path().join("dcs.stat").exists(), "-P must not solve");
}

#[test]
fn count_records_models() {
    let dir = workdir(&["queens/queens.idb", "queens/queens.edb"]);
    run(
        "ground",
        dir.path(),
        &["-r", "queens.idb", "-d", "queens.edb", "-c", "q=8"],
    );
    let d = run(
        "dcs",
        dir.path(),
        &["-f", "8_queens.edb_queens.idb.tdc", "-C"],
    );
    assert_eq!(d.status.code(), Some(0));
    assert_eq!(stdout(&d), "MODELS 92\n");
    let fields: Vec<String> = stat_lines(dir.path())[0]
        .split(' ')
        .map(String::from)
        .collect();
    assert_eq!(fields[3], "SAT");
    assert_eq!(fields[4], "92");
}

#[test]
fn count_of_zero_still_exits_0() {
    let dir = workdir(&[
        "coloring/color.idb",
        "coloring/colors.edb",
        "coloring/k4.gph",
    ]);
    run(
        "ground",
        dir.path(),
        &["-r", "color.idb", "-d", "colors.edb", "k4.gph"],
    );
    let name = "colors.edb_k4.gph_color.idb.tdc";
    let d = run("dcs", dir.path(), &["-f", name, "-C"]);
    assert_eq!(d.status.code(), Some(0));
    assert_eq!(stdout(&d), "MODELS 0\n");
    assert_eq!(run("dcs", dir.path(), &["-f", name]).status.code(), Some(1));
}

#[test]
fn bad_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.tdc"), "dc 1 1 0 0 0 0\natom 2 c a\n").unwrap();
    let d = run("dcs", dir.path(), &["-f", "bad.tdc"]);
    assert_eq!(d.status.code(), Some(3));
    assert!(!d.stderr.is_empty());
    assert_eq!(
        run("dcs", dir.path(), &["-f", "missing.tdc"]).status.code(),
        Some(3)
    );

    fs::write(dir.path().join("g.edb"), "vtx(1).\n").unwrap();
    fs::write(
        dir.path().join("r.idb"),
        "idbpred\np(vtx).\nidbvar\nvtx X.\nidbrules\nNOT p(Z).\n",
    )
    .unwrap();
    let g = run("ground", dir.path(), &["-r", "r.idb", "-d", "g.edb"]);
    assert_eq!(g.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&g.stderr).contains("undeclared variable Z"));

    fs::write(
        dir.path().join("s.idb"),
        "idbpred\np(vtx).\nidbrules\nNOT p(.\n",
    )
    .unwrap();
    let g = run("ground", dir.path(), &["-r", "s.idb", "-d", "g.edb"]);
    assert_eq!(g.status.code(), Some(3));
    fs::write(dir.path().join("e.edb"), "vtx(1).\nvtx(1,2).\n").unwrap();
    let g = run("ground", dir.path(), &["-r", "r.idb", "-d", "e.edb"]);
    assert_eq!(g.status.code(), Some(3));
}

#[test]
fn corpus_grounds_cleanly() {
    let cases: &[(&[&str], &[&str])] = &[
        (
            &["hamiltonicity/hcp", "hamiltonicity/1.gph"],
            &["-r", "hcp", "-d", "1.gph", "-c", "i=1"],
        ),
        (
            &["queens/queens.idb", "queens/queens.edb"],
            &["-r", "queens.idb", "-d", "queens.edb", "-c", "q=6"],
        ),
        (
            &["pigeonhole/php.idb", "pigeonhole/php.edb"],
            &["-r", "php.idb", "-d", "php.edb", "-c", "p=4", "h=3"],
        ),
        (
            &[
                "coloring/color.idb",
                "coloring/colors.edb",
                "coloring/c5.gph",
            ],
            &["-r", "color.idb", "-d", "colors.edb", "c5.gph"],
        ),
        (
            &["schur/schur.idb", "schur/schur.edb"],
            &["-r", "schur.idb", "-d", "schur.edb", "-c", "b=3", "n=13"],
        ),
    ];
    for (files, args) in cases {
        let dir = workdir(files);
        let g = run("ground", dir.path(), args);
        assert_eq!(
            g.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&g.stderr)
        );
        assert!(g.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn verbose_modes_report_progress() {
    let dir = workdir(&["hamiltonicity/hcp", "hamiltonicity/4cycle.gph"]);
    let g = run(
        "ground",
        dir.path(),
        &["-r", "hcp", "-d", "4cycle.gph", "-c", "i=1", "-V"],
    );
    let text = stdout(&g);
    assert!(text.contains("edge/2 with 5 tuples"), "{text}");
    assert!(text.contains("1_4cycle.gph_hcp.tdc: 9 atoms"), "{text}");
    let d = run("dcs", dir.path(), &["-f", "1_4cycle.gph_hcp.tdc", "-V"]);
    let text = stdout(&d);
    assert!(text.contains("answer set 1"), "{text}");
    assert!(text.contains("decisions "), "{text}");
}
