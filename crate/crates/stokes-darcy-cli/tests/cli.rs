//! End-to-end checks of the command-line interface through the compiled
//! binary: flag validation, config-file precedence, both table formats, file
//! output, field dumps, the budget guard, and run-to-run determinism.

use std::fs;
use std::process::{Command, Output};

const CSV_HEADER: &str =
    "level,e_u0,k_u0,e_utb,k_utb,e_ps,k_ps,e_ud,k_ud,e_div,k_div,e_pd,k_pd";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokes-darcy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokes-darcy"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn usage_errors_exit_with_code_two() {
    let cases: &[(&[&str], &str)] = &[
        (&["--example", "7"], "--example"),
        (&["--degree", "9"], "--degree"),
        (&["--degree", "0"], "--degree"),
        (&["--levels", "0..3"], "--levels"),
        (&["--levels", "5..3"], "--levels"),
        (&["--levels", "abc"], "level range"),
        (&["--nu", "-1.0"], "--nu"),
        (&["--nu", "0"], "--nu"),
        (&["--bjs", "-0.5"], "--bjs"),
        (&["--kappa", "0"], "--kappa"),
        (&["--format", "yaml"], "format"),
        (&["--frobnicate"], "unexpected argument"),
    ];
    for (args, needle) in cases {
        let out = run(args);
        assert_eq!(code(&out), 2, "args {args:?}: {}", stderr(&out));
        assert!(
            stderr(&out).contains(needle),
            "args {args:?}: stderr missing {needle:?}: {}",
            stderr(&out)
        );
    }
}

#[test]
fn csv_table_follows_the_header_contract() {
    let out = run(&["--example", "2", "--degree", "1", "--levels", "2..3", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("2,"));
    assert!(lines[2].starts_with("3,"));
    // first data row carries no orders: every second cell after the errors
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first.len(), 13);
    for i in 0..6 {
        let e: f64 = first[1 + 2 * i].parse().expect("error cell is a float");
        assert!(e > 0.0);
        assert_eq!(first[2 + 2 * i], "");
    }
    let second: Vec<&str> = lines[2].split(',').collect();
    for i in 0..6 {
        let k: f64 = second[2 + 2 * i].parse().expect("order cell is a float");
        assert!(k > 0.3, "column {i} order {k}");
    }
    // one JSON progress line per level on stderr
    let errs = stderr(&out);
    assert!(errs.contains("\"level\": 2") && errs.contains("\"level\": 3"), "{errs}");
    assert!(errs.contains("\"dofs\"") && errs.contains("\"residual\""));
}

#[test]
fn markdown_is_the_default_format() {
    let out = run(&["--example", "2", "--levels", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("example-2"));
    assert!(text.contains("P1"));
    assert!(text.contains("| level |"));

    let md = run(&["--example", "2", "--levels", "2", "--format", "md"]);
    assert_eq!(code(&md), 0);
    assert_eq!(stdout(&md), text, "md is an alias for markdown");
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "# study setup\nexample = 2\ndegree = 2\nlevels = 2..3\nformat = csv\n",
    )
    .unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let from_file = run(&["--config", cfg_s]);
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    let text = stdout(&from_file);
    assert!(text.starts_with(CSV_HEADER));
    assert_eq!(text.lines().count(), 3);

    // explicit flags win over the file
    let overridden = run(&["--config", cfg_s, "--format", "markdown", "--levels", "2"]);
    assert_eq!(code(&overridden), 0, "{}", stderr(&overridden));
    let text = stdout(&overridden);
    assert!(text.contains("P2"), "degree still comes from the file: {text}");
    assert!(text.contains("| level |"));
    assert_eq!(text.matches("| 2 |").count(), 2, "one level, two table halves");

    // malformed lines and unknown keys are usage errors
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "degree\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));

    fs::write(&bad, "degre = 2\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown config key"), "{}", stderr(&out));

    let out = run(&["--config", dir.path().join("missing.conf").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn out_flag_writes_the_table_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let out = run(&[
        "--example",
        "2",
        "--levels",
        "2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).is_empty(), "table goes to the file, not stdout");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(CSV_HEADER));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn dump_fields_writes_one_file_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--example", "1", "--levels", "2..3", "--format", "csv", "--dump-fields"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for level in [2u32, 3] {
        let path = dir.path().join(format!("fields-example1-p1-level{level}.txt"));
        let text = fs::read_to_string(&path).expect("dump file exists");
        for label in ["us_cell", "us_edge", "ud_edge", "ps", "pd", "lambda", "mean_multiplier"] {
            assert!(text.lines().any(|l| l.starts_with(label)), "missing {label}");
        }
        // one line per unknown, in agreement with the stderr report
        let dofs_line = stderr(&out)
            .lines()
            .find(|l| l.contains(&format!("\"level\": {level}")))
            .expect("report line")
            .to_string();
        let dofs: usize = dofs_line
            .split("\"dofs\": ")
            .nth(1)
            .unwrap()
            .split(',')
            .next()
            .unwrap()
            .trim()
            .parse()
            .unwrap();
        assert_eq!(text.lines().count(), dofs);
    }

    // dumps land next to --out when a directory is given there
    let sub = dir.path().join("nested");
    fs::create_dir(&sub).unwrap();
    let out_file = sub.join("t.csv");
    let out = run(&[
        "--example",
        "1",
        "--levels",
        "2",
        "--dump-fields",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(sub.join("fields-example1-p1-level2.txt").exists());
}

#[test]
fn budget_overrun_exits_with_code_one_and_names_the_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.conf");
    fs::write(&cfg, "budget = 10\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "--example", "2", "--levels", "2..3"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    let errs = stderr(&out);
    assert!(errs.contains("budget"), "{errs}");
    assert!(errs.contains("level 2"), "{errs}");
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let args = ["--example", "2", "--degree", "2", "--levels", "2..3", "--format", "csv"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
