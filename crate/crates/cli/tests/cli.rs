use std::path::Path;
use std::process::{Command, Output};

use bedqsd::fixtures;
use bedqsd_cli::commands::{parse_dims, OPTIMIZED_POVM};
use bedqsd_cli::scenario_file::{bundled, NamedPovm};
use bedqsd_cli::{
    cmd_evaluate, cmd_monotone, cmd_optimize, cmd_repeat, cmd_reproduce, cmd_strategies,
    parse_scenario, CliError, GlobalOptions, MonotoneArgs, OptimizeArgs, RepeatMode, ResultTable,
    ScenarioFile, Status,
};

fn num(t: &ResultTable, row: usize, col: &str) -> f64 {
    t.get(row, col)
        .unwrap_or_else(|| panic!("no column {col}"))
        .parse()
        .unwrap()
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bedqsd"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn row_of(t: &ResultTable, povm: &str, utility: &str) -> usize {
    (0..t.len())
        .find(|&r| t.get(r, "povm") == Some(povm) && t.get(r, "utility") == Some(utility))
        .unwrap_or_else(|| panic!("no row for {povm}/{utility}"))
}

#[test]
fn evaluate_example1_projective_family() {
    let opts = GlobalOptions::default();
    let out = cmd_evaluate(&opts, "example1", &strings(&["B"]), &strings(&["max-confidence"]), None).unwrap();
    let t = &out.table;
    assert_eq!(t.len(), 1);
    assert!((num(t, 0, "score_1") - 2.0).abs() < 1e-9);
    assert!((num(t, 0, "p_inconclusive") - 0.5).abs() < 1e-12);
    assert_eq!(t.get(0, "strategy"), Some("(1,2,0)"));
    assert_eq!(t.get(0, "mode"), Some("analytic"));
}

#[test]
fn evaluate_fig1_projective() {
    let opts = GlobalOptions::default();
    let out = cmd_evaluate(
        &opts,
        "fig1",
        &[],
        &strings(&["p-success", "mutual-information"]),
        None,
    )
    .unwrap();
    let t = &out.table;
    // rows sorted by utility name
    assert_eq!(t.get(0, "utility"), Some("mutual-information"));
    assert!(num(t, row_of(t, "projective", "mutual-information"), "score_1") > 0.0);
    assert!((num(t, row_of(t, "projective", "p-success"), "score_1") - 0.85).abs() < 1e-9);
}

#[test]
fn evaluate_with_a_fixed_strategy_and_rows_sorted() {
    let opts = GlobalOptions::default();
    let out = cmd_evaluate(&opts, "example1", &strings(&["B", "A"]), &strings(&["p-success"]), Some("(1,2,0)"))
        .unwrap();
    let t = &out.table;
    assert_eq!(t.get(0, "povm"), Some("A"));
    assert_eq!(t.get(1, "povm"), Some("B"));
    assert_eq!(t.get(1, "mode"), Some("fixed"));
    // ρ₁ on |0⟩ (1/2 · 1/2) plus ρ₂ on |2⟩ (1/2 · 1/2)
    assert!((num(t, 1, "score_1") - 0.5).abs() < 1e-12);
    assert!(cmd_evaluate(&opts, "example1", &strings(&["B"]), &strings(&["p-success"]), Some("(1,2)")).is_err());
}

#[test]
fn evaluate_errors() {
    let opts = GlobalOptions::default();
    let e = cmd_evaluate(&opts, "fig1", &[], &strings(&["nonsense"]), None).unwrap_err();
    assert!(e.to_string().contains("unknown utility"), "{e}");
    let e = cmd_evaluate(&opts, "fig1", &strings(&["missing"]), &strings(&["p-success"]), None).unwrap_err();
    assert!(e.to_string().contains("no POVM named"), "{e}");
    let tight = GlobalOptions { cap: 3, ..GlobalOptions::default() };
    let e = cmd_evaluate(&tight, "fig1", &[], &strings(&["total-confidence,conclusive"]), None).unwrap_err();
    assert!(matches!(e, CliError::Library(bedqsd::Error::CapExceeded { .. })), "{e}");
}

#[test]
fn invalid_priors_exit_with_validation_status() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = bundled("fig1").unwrap().replace("[0.85, 0.15]", "[0.5, 0.6]");
    std::fs::write(&path, text).unwrap();
    let out = bin(&["evaluate", path.to_str().unwrap(), "-u", "p-success"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad:") && err.contains("priors sum to 1.1"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["reproduce", "example9"], dir.path()).status.code(), Some(1));
    assert_eq!(bin(&["no-such-command"], dir.path()).status.code(), Some(1));
    assert_eq!(bin(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn optimized_povm_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("best.json");
    let opts = GlobalOptions {
        seed: Some(3),
        ..GlobalOptions::default()
    };
    let args = OptimizeArgs {
        utility: "p-success,mutual-information".into(),
        restarts: 4,
        povm_out: Some(path.clone()),
        ..OptimizeArgs::default()
    };
    let out = cmd_optimize(&opts, "fig1", &args).unwrap();
    let t = &out.table;
    assert!((num(t, 0, "score_1") - 0.85).abs() < 1e-9);
    let information = num(t, 0, "score_2");
    assert!(information > 0.0);

    let loaded = parse_scenario(path.to_str().unwrap()).unwrap();
    assert_eq!(loaded.seed, Some(3));
    let again = cmd_evaluate(
        &GlobalOptions::default(),
        path.to_str().unwrap(),
        &strings(&[OPTIMIZED_POVM]),
        &strings(&["p-success,mutual-information"]),
        None,
    )
    .unwrap();
    // CSV cells carry 12 significant digits; compare the underlying values
    let e = loaded.povm(OPTIMIZED_POVM).unwrap();
    let table = bedqsd::ProbabilityTable::new(&loaded.scenario, e).unwrap();
    assert!((table.mutual_information() - information).abs() < 1e-9);
    assert_eq!(again.table.get(0, "score_2"), t.get(0, "score_2"));
}

#[test]
fn optimizing_orthogonal_states_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orthogonal.json");
    let s = fixtures::orthogonal_pair();
    let text = ScenarioFile::from_parts(&strings(&["zero", "one"]), &s, &[], None).render();
    std::fs::write(&path, text).unwrap();
    let args = OptimizeArgs {
        restarts: 3,
        ..OptimizeArgs::default()
    };
    let out = cmd_optimize(&GlobalOptions::default(), path.to_str().unwrap(), &args).unwrap();
    assert_eq!(out.table.get(0, "scenario"), Some("orthogonal"));
    assert!((num(&out.table, 0, "score_1") - 1.0).abs() < 1e-6);
}

#[test]
fn optimizing_example1_lexicographically() {
    let args = OptimizeArgs {
        utility: "total-confidence,conclusive".into(),
        restarts: 3,
        iterations: 150,
        outcomes: Some(3),
        ..OptimizeArgs::default()
    };
    let out = cmd_optimize(&GlobalOptions::default(), "example1", &args).unwrap();
    assert!((num(&out.table, 0, "score_1") - 2.0).abs() < 1e-6);
    assert!(num(&out.table, 0, "score_2") >= 0.5 - 1e-3);
}

#[test]
fn monotone_success_probability_and_control() {
    let opts = GlobalOptions {
        seed: Some(0),
        ..GlobalOptions::default()
    };
    let args = MonotoneArgs {
        utilities: strings(&["p-success"]),
        trials: 200,
        dims: (2, 3),
        report: None,
    };
    let out = cmd_monotone(&opts, &args).unwrap();
    assert_eq!(out.status, Status::Success);
    assert_eq!(out.table.get(0, "violations"), Some("0"));

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("violations.csv");
    let args = MonotoneArgs {
        utilities: strings(&["anti-success"]),
        trials: 50,
        dims: (2, 3),
        report: Some(report.clone()),
    };
    let out = cmd_monotone(&opts, &args).unwrap();
    assert_eq!(out.status, Status::Violation);
    let n: usize = out.table.get(0, "violations").unwrap().parse().unwrap();
    assert!(n >= 1);
    let csv = std::fs::read_to_string(&report).unwrap();
    assert_eq!(csv.lines().count(), n + 1);
    assert!(csv.starts_with("utility,trial,seed,"));
}

/// Splitting an outcome into proportional pieces raises total confidence,
/// so the fuzzer flags it.
#[test]
fn monotone_flags_total_confidence() {
    let args = MonotoneArgs {
        utilities: strings(&["total-confidence"]),
        trials: 60,
        dims: (2, 3),
        report: None,
    };
    let out = cmd_monotone(&GlobalOptions::default(), &args).unwrap();
    assert_eq!(out.status, Status::Violation);
}

#[test]
fn monotone_binary_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin(&["monotone", "-u", "p-success", "--trials", "20"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin(&["monotone", "-u", "anti-success", "--trials", "50"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(parse_dims("2-3").is_ok());
}

#[test]
fn repeat_record_posteriors() {
    let out = cmd_repeat(
        &GlobalOptions::default(),
        "fig1",
        2,
        None,
        &RepeatMode::Record("2,2".into()),
    )
    .unwrap();
    let t = &out.table;
    assert_eq!(t.header(), ["step", "outcome", "p(rho1)", "p(rho2)"]);
    assert_eq!(t.len(), 3);
    assert_eq!(t.get(0, "outcome"), Some(""));
    assert_eq!(t.get(2, "outcome"), Some("2"));
    // Bayes: q₂(1/2)² / (q₂(1/2)² + q₁(1/6)²)
    let oracle = 0.15 * 0.25 / (0.15 * 0.25 + 0.85 / 36.0);
    assert!((num(t, 2, "p(rho2)") - oracle).abs() < 1e-11);
    assert!((num(t, 2, "p(rho2)") - 0.614).abs() < 1e-3);
    assert!(out.notes[0].contains("favours rho2"));

    let e = cmd_repeat(&GlobalOptions::default(), "fig1", 1, None, &RepeatMode::Record("2,2".into()));
    assert!(e.is_err());
}

#[test]
fn repeat_condition_and_search() {
    let opts = GlobalOptions::default();
    let out = cmd_repeat(&opts, "fig1", 1, None, &RepeatMode::Condition).unwrap();
    assert_eq!(out.table.get(0, "condition"), Some("holds"));
    assert_eq!(out.table.get(0, "guess"), Some("rho1"));
    assert!(out.notes[0].contains("guessing rho1"));

    let out = cmd_repeat(&opts, "fig1", 2, None, &RepeatMode::Condition).unwrap();
    assert_eq!(out.table.get(1, "condition"), Some("fails"));
    assert_eq!(out.table.get(1, "rival"), Some("rho2"));

    let out = cmd_repeat(&opts, "fig1", 2, None, &RepeatMode::Search { samples: 10 }).unwrap();
    assert_eq!(out.status, Status::Success);
    assert!(out.notes[0].contains("record 2,2"), "{:?}", out.notes);
    assert_eq!(out.table.get(2, "outcome"), Some("2"));

    let out = cmd_repeat(&opts, "fig1", 1, None, &RepeatMode::Search { samples: 50 }).unwrap();
    assert_eq!(out.status, Status::Success);
    assert!(out.notes.last().unwrap().contains("no witness"));
}

#[test]
fn reproduce_bundled_examples() {
    for id in ["example1", "fig1"] {
        let out = cmd_reproduce(&GlobalOptions::default(), id).unwrap();
        assert_eq!(out.status, Status::Success, "{}", out.table.to_csv_string());
        assert!(out.table.len() >= 5);
        assert!((0..out.table.len()).all(|r| out.table.get(r, "status") == Some("pass")));
    }
    assert!(matches!(
        cmd_reproduce(&GlobalOptions::default(), "example2"),
        Err(CliError::Usage(_))
    ));
}

#[test]
fn strategies_table() {
    let out = cmd_strategies(&GlobalOptions::default(), "fig1", "projective", "p-success", true).unwrap();
    let t = &out.table;
    assert_eq!(t.len(), 9);
    let optimal: Vec<&str> = (0..t.len())
        .filter(|&r| t.get(r, "optimal") == Some("yes"))
        .map(|r| t.get(r, "strategy").unwrap())
        .collect();
    assert_eq!(optimal, ["(1,1)"]);
    let out = cmd_strategies(&GlobalOptions::default(), "fig1", "projective", "p-success", false).unwrap();
    assert_eq!(out.table.len(), 4);
}

#[test]
fn identical_invocations_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = bin(
            &["--seed", "5", "--out", out.to_str().unwrap(), "monotone", "-u", "neg-conditional-entropy", "--trials", "30"],
            dir.path(),
        );
        assert_eq!(status.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));

    let a = bin(&["--seed", "2", "optimize", "fig1", "--restarts", "2", "--iterations", "20"], dir.path());
    let b = bin(&["--seed", "2", "optimize", "fig1", "--restarts", "2", "--iterations", "20"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn timing_column_is_opt_in() {
    let plain = cmd_evaluate(&GlobalOptions::default(), "fig1", &[], &strings(&["p-success"]), None).unwrap();
    assert!(plain.table.column("wall_ms").is_none());
    let timed = GlobalOptions {
        timing: true,
        ..GlobalOptions::default()
    };
    let out = cmd_evaluate(&timed, "fig1", &[], &strings(&["p-success"]), None).unwrap();
    assert!(num(&out.table, 0, "wall_ms") >= 0.0);
}

#[test]
fn bundled_names_prefer_existing_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = ScenarioFile::from_parts(
        &strings(&["zero", "one"]),
        &fixtures::orthogonal_pair(),
        &[NamedPovm {
            name: "z".into(),
            povm: bedqsd::Povm::computational(2),
        }],
        None,
    )
    .render();
    std::fs::write(dir.path().join("fig1"), text).unwrap();
    let out = bin(&["evaluate", "fig1", "-u", "p-success"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("fig1,z,p-success"), "{csv}");
}
