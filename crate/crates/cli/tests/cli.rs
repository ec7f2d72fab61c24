use std::path::Path;
use std::process::{Command, Output};

fn sbstlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbstlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SBSTLAB_OUT")
        .output()
        .unwrap()
}

fn text(o: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    )
}

#[test]
fn help_on_every_subcommand_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let expected: [(&str, &[&str]); 5] = [
        (
            "gen",
            &[
                "--target",
                "--count",
                "--seed",
                "--out",
                "--input-arity",
                "--desk-scale",
                "--paper-scale",
            ],
        ),
        (
            "run-ga",
            &[
                "--criterion",
                "--seed",
                "--suite-size",
                "--domain",
                "--max-loop-iters",
            ],
        ),
        (
            "run-random",
            &[
                "--criterion",
                "--seed",
                "--suite-size",
                "--domain",
                "--max-loop-iters",
            ],
        ),
        (
            "experiment",
            &[
                "--plan",
                "--seed",
                "--out",
                "--criterion",
                "--level",
                "--target",
                "--programs-per-cell",
                "--suite-size",
                "--input-arity",
                "--max-loop-iters",
                "--domain",
                "--jobs",
            ],
        ),
        ("report", &["--jobs"]),
    ];
    for (cmd, flags) in expected {
        let o = sbstlab(&[cmd, "--help"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let help = text(&o);
        for f in flags {
            assert!(help.contains(f), "{cmd} help lacks {f}");
        }
    }
    assert_eq!(sbstlab(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["experiment", "--bogus"][..],
        &["gen"],
        &["gen", "--target", "loops=3"],
        &["run-ga", "x.sut", "--criterion", "path"],
        &["experiment", "--desk-scale", "--paper-scale"],
        &["experiment", "--programs-per-cell", "1"],
    ] {
        let o = sbstlab(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", text(&o));
    }
}

#[test]
fn missing_program_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["run-ga", "run-random"] {
        let o = sbstlab(&[cmd, "missing.sut"], dir.path());
        assert_eq!(o.status.code(), Some(2));
        let msg = text(&o);
        assert!(msg.contains("file not found"), "{msg}");
        assert_eq!(msg.trim().lines().count(), 1, "{msg}");
    }
    let o = sbstlab(&["report", "nowhere"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = sbstlab(&["experiment", "--plan", "nope.txt"], dir.path());
    assert!(text(&o).contains("file not found"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_plan_exits_two_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("plan.txt"),
        "levels = low\nsuite_size = many\n",
    )
    .unwrap();
    let o = sbstlab(&["experiment", "--plan", "plan.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("line 2"), "{}", text(&o));
}

#[test]
fn gen_writes_valid_programs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbstlab(
        &[
            "gen",
            "--target",
            "statements=75",
            "--count",
            "10",
            "--seed",
            "7",
            "--out",
            "g",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("seed: 7"));
    let suts = dir.path().join("g/suts");
    let mut n = 0;
    for entry in std::fs::read_dir(&suts).unwrap() {
        let p = sbstlab::sut_lang::parse(&std::fs::read_to_string(entry.unwrap().path()).unwrap())
            .unwrap();
        assert!(sbstlab::sut_lang::validate(&p).is_empty());
        assert!((71..=79).contains(&p.metrics().statements));
        n += 1;
    }
    assert_eq!(n, 10);
    let manifest = std::fs::read_to_string(dir.path().join("g/manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 11);
}

#[test]
fn searches_print_seed_and_coverage() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.sut"),
        "program p(x0, x1)\nif (x0 > x1) {\n    v0 = 1;\n} else {\n    v1 = 2;\n}\n",
    )
    .unwrap();
    for cmd in ["run-ga", "run-random"] {
        let o = sbstlab(
            &[cmd, "p.sut", "--seed", "3", "--domain", "-5:5"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", text(&o));
        let out = text(&o);
        assert!(out.contains("seed: 3"));
        assert!(out.contains("branch coverage: 100.00%"), "{out}");
    }
}

#[test]
fn small_experiment_creates_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = sbstlab(
        &[
            "experiment",
            "--seed",
            "42",
            "--programs-per-cell",
            "2",
            "--desk-scale",
            "--level",
            "low",
            "--criterion",
            "branch",
            "--out",
            "run",
            "--jobs",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("seed: 42"));
    let run = dir.path().join("run");
    for f in [
        "summary.csv",
        "per_program.csv",
        "manifest.csv",
        "runs.csv",
        "plan.txt",
        "figures/branch-low.svg",
    ] {
        assert!(run.join(f).exists(), "{f}");
    }
    let o = sbstlab(&["report", "run"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("branch"));
}

#[test]
fn out_directory_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sbstlab"))
        .args(["gen", "--target", "branches=5", "--count", "2"])
        .current_dir(dir.path())
        .env("SBSTLAB_OUT", "from-env")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(dir.path().join("from-env/manifest.csv").exists());
}
