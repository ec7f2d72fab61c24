use std::fs;
use std::path::Path;

use sbstlab::exec_cov::Criterion;
use sbstlab::harness::{rerender, run_experiment, sha256_hex, ExperimentPlan, Level};
use sbstlab::stats::summarize_cell;

fn tiny_plan(seed: u64) -> ExperimentPlan {
    let mut plan = ExperimentPlan::desk(seed);
    plan.criteria = vec![Criterion::Branch];
    plan.levels = vec![Level::Low];
    plan.programs_per_cell = 3;
    plan.branch_targets = [8, 50, 100];
    plan.budgets.ga_generations = 10;
    plan.budgets.random_trials = 200;
    plan
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn minimal_plan_writes_a_complete_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let result = run_experiment(&tiny_plan(5), &run).unwrap();
    assert!(result.failures.is_empty());
    assert_eq!(result.cells.len(), 1);
    assert_eq!(result.cells[0].programs.len(), 3);

    let summary = read(&run, "summary.csv");
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("criterion,level,target,ga_mean,ga_std,rnd_mean,rnd_std,actual_cl")
    );
    assert_eq!(lines.count(), 1);
    assert_eq!(read(&run, "per_program.csv").lines().count(), 4);
    assert_eq!(read(&run, "runs.csv").lines().count(), 7);

    // the manifest hashes are the files GA and random both ran on
    let manifest = read(&run, "manifest.csv");
    for (row, p) in manifest.lines().skip(1).zip(&result.cells[0].programs) {
        let sha = row.rsplit(',').next().unwrap();
        assert_eq!(sha, p.sha256);
        assert_eq!(sha, sha256_hex(&fs::read(run.join(&p.file)).unwrap()));
        assert!(row.starts_with(&p.file));
    }
    let raw = read(&run, "summary_raw.csv");
    assert!(raw
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(&result.cells[0].programs_sha256()));

    let plan_text = read(&run, "plan.txt");
    let mut back = ExperimentPlan::desk(0);
    back.apply_text(&plan_text).unwrap();
    assert_eq!(back, tiny_plan(5));
}

#[test]
fn summary_is_recomputable_from_raw_per_program_values() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    run_experiment(&tiny_plan(9), &run).unwrap();
    let raw = read(&run, "per_program_raw.csv");
    let (mut ga, mut rnd) = (Vec::new(), Vec::new());
    for line in raw.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        ga.push(f[3].parse::<f64>().unwrap());
        rnd.push(f[4].parse::<f64>().unwrap());
    }
    let s = summarize_cell(&ga, &rnd).unwrap();
    let row = read(&run, "summary_raw.csv");
    let f: Vec<f64> = row
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .skip(3)
        .take(5)
        .map(|v| v.parse().unwrap())
        .collect();
    let want = [s.ga_mean, s.ga_std, s.rnd_mean, s.rnd_std, s.actual_cl()];
    for (got, want) in f.iter().zip(want) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn figures_carry_one_bar_per_program_and_technique() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let result = run_experiment(&tiny_plan(3), &run).unwrap();
    let svg = read(&run, "figures/branch-low.svg");
    assert_eq!(svg.matches("class=\"bar\"").count(), 6);
    for (i, p) in result.cells[0].programs.iter().enumerate() {
        let ga = format!(
            "data-program=\"{}\" data-technique=\"ga\" data-coverage=\"{}\"",
            i + 1,
            p.ga_coverage
        );
        assert!(svg.contains(&ga), "{ga}");
    }
}

#[test]
fn same_seed_same_bytes_and_report_reproduces_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_experiment(&tiny_plan(11), &a).unwrap();
    run_experiment(&tiny_plan(11), &b).unwrap();
    for f in [
        "summary.csv",
        "per_program.csv",
        "manifest.csv",
        "runs.csv",
        "summary_raw.csv",
    ] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let before = read(&a, "summary_raw.csv");
    fs::remove_file(a.join("summary.csv")).unwrap();
    fs::remove_dir_all(a.join("figures")).unwrap();
    rerender(&a).unwrap();
    assert_eq!(read(&a, "summary.csv"), read(&b, "summary.csv"));
    assert_eq!(read(&a, "summary_raw.csv"), before);
    assert!(a.join("figures/branch-low.svg").exists());
}

#[test]
fn invalid_plan_is_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = tiny_plan(1);
    plan.programs_per_cell = 1;
    assert!(run_experiment(&plan, &dir.path().join("x")).is_err());
    assert!(!dir.path().join("x").exists());
}
