mod common;

use nonholonomic::cli::{format_trajectory_csv, load_problem_file, run_command, write_trajectory_csv};
use nonholonomic::scenarios::{build_scenario, oracle_state, scenario_names};
use nonholonomic::simulate::{simulate, SimulateOptions};
use nonholonomic::solver::solve_sode;
use nonholonomic::{ProblemBuilder, LagrangianModel, State};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nonholonomic").chain(args.iter().copied());
    let code = run_command(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn problem_files_match_the_builtin_scenarios() {
    for name in scenario_names() {
        let spec = build_scenario(name, &[]).unwrap();
        let loaded = load_problem_file(common::data_file(name)).unwrap();
        assert_eq!(loaded.force_count(), spec.problem.force_count(), "{name}");
        for s in common::free_states(spec.problem.dim(), 10, 7) {
            let a = solve_sode(&spec.problem, &s).unwrap();
            let b = solve_sode(&loaded, &s).unwrap();
            assert_eq!(a.classification, b.classification, "{name}");
            if let (Some(x), Some(y)) = (a.acceleration, b.acceleration) {
                assert!((x - y).amax() <= 1e-12, "{name}");
            }
            let e = (spec.problem.model().energy(&s).unwrap() - loaded.model().energy(&s).unwrap()).abs();
            assert!(e <= 1e-12, "{name}");
        }
    }
}

#[test]
fn check_rolling_disk_is_all_unique() {
    let (code, out, _) = run(&["check", "--scenario", "rolling_disk"]);
    assert_eq!(code, 0);
    assert!(out.contains("unique:          100"), "{out}");
}

#[test]
fn check_misaligned_force_is_all_infeasible() {
    let (code, out, _) = run(&["check", "--scenario", "misaligned_force", "--samples", "20"]);
    assert_eq!(code, 1);
    assert!(out.contains("infeasible:      20"), "{out}");
}

#[test]
fn check_reads_problem_files() {
    let path = common::data_file("benenti_points");
    let (code, out, _) = run(&["check", "--file", path.to_str().unwrap(), "--samples", "10", "--seed", "3"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn check_is_reproducible_for_a_seed() {
    let a = run(&["check", "--scenario", "appell_rho", "--samples", "5", "--seed", "9"]);
    let b = run(&["check", "--scenario", "appell_rho", "--samples", "5", "--seed", "9"]);
    assert_eq!(a, b);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["check"]).0, 2);
    assert_eq!(run(&["check", "--scenario", "nope"]).0, 2);
    assert_eq!(run(&["check", "--scenario", "rolling_disk", "--file", "x"]).0, 2);
    assert_eq!(run(&["simulate", "--scenario", "rolling_disk", "--param", "R"]).0, 2);
    assert_eq!(run(&["algorithm", "--scenario", "rolling_disk", "--state", "1,2"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["simulate", "--file", "/nonexistent.problem", "--state", "0,0"]).0, 2);
}

#[test]
fn numerical_failure_exits_one_with_time() {
    let (code, _, err) = run(&["simulate", "--scenario", "misaligned_force", "--t-end", "0.1"]);
    assert_eq!(code, 1);
    assert!(err.contains("t = 0"), "{err}");
}

#[test]
fn simulate_writes_csv_ending_at_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let (code, _, err) = run(&[
        "simulate",
        "--scenario",
        "rolling_disk",
        "--h",
        "0.001",
        "--t-end",
        "1.5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = common::parse_csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(header[0], "t");
    assert_eq!(header[1], "q_x");
    let last = rows.last().unwrap();
    let spec = build_scenario("rolling_disk", &[]).unwrap();
    let want = oracle_state(&spec, &spec.default_state, 1.5).unwrap().to_vector();
    for i in 0..8 {
        assert!((last[1 + i] - want[i]).abs() <= 1e-6, "column {}", header[1 + i]);
    }
    for row in &rows {
        assert!(row[10].abs() <= 1e-6 && row[11].abs() <= 1e-6);
    }
}

#[test]
fn simulate_to_stdout() {
    let (code, out, _) = run(&["simulate", "--scenario", "free_particle", "--h", "0.5", "--t-end", "1"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn algorithm_reports_the_trace() {
    let (code, out, _) = run(&["algorithm", "--scenario", "misaligned_force", "--state", "0,0,1,0"]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict: excluded at step 1"), "{out}");
    let (_, out, _) = run(&["algorithm", "--scenario", "rolling_disk", "--state", "0,0,0,0,2,0,1,2", "--depth", "2"]);
    assert!(out.contains("verdict: compatible, unique"), "{out}");
}

#[test]
fn scenarios_lists_every_builtin() {
    let (code, out, _) = run(&["scenarios"]);
    assert_eq!(code, 0);
    for name in scenario_names() {
        assert!(out.contains(&format!("{name}:")));
    }
}

#[test]
fn three_step_free_particle_csv() {
    let model = LagrangianModel::new(&["x"], &[], "0.5*dx^2").unwrap();
    let p = ProblemBuilder::new(model).build().unwrap();
    let tr = simulate(&p, &State::new(vec![0.0], vec![1.0]), 0.1, 0.3, SimulateOptions::default()).unwrap();
    let (header, rows) = common::parse_csv(&format_trajectory_csv(&tr));
    assert_eq!(header, ["t", "q_x", "v_x", "E", "p_1"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[3] == rows[0][3]));
}

#[test]
fn csv_rereads_the_trajectory_exactly() {
    let spec = build_scenario("appell_rho", &[]).unwrap();
    let tr = simulate(&spec.problem, &spec.default_state, 1e-2, 0.5, SimulateOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("appell.csv");
    write_trajectory_csv(&tr, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let (header, rows) = common::parse_csv(&text);
    let n = spec.problem.dim();
    assert_eq!(header.len(), 1 + 2 * n + 1 + 3 + 3 + n);
    assert_eq!(rows.len(), tr.len());
    for (i, row) in rows.iter().enumerate() {
        let mut want = vec![tr.times[i]];
        want.extend(tr.states[i].to_vector().iter());
        want.push(tr.energy[i]);
        want.extend(tr.psi_residuals[i].iter());
        want.extend(tr.lambdas[i].iter());
        want.extend(tr.momenta[i].iter());
        assert_eq!(row, &want);
    }
}
