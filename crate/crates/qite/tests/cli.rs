use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qite::problem_file::{Problem, ProblemFile};
use qite_core::mps::{MpsState, C64};
use qite_core::solver::SolveReport;

fn qite(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qite"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> Output {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const TRIANGLE: &str = r#"{"type":"maxcut","n":3,"edges":[[0,1,1.0],[1,2,1.0],[0,2,1.0]],"reference_cost":-2}"#;

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

fn parse(v: &str) -> f64 {
    v.parse().unwrap()
}

#[test]
fn generate_graph_families() {
    let dir = tempfile::tempdir().unwrap();
    ok(qite(&["generate", "3reg", "--n", "8", "--seed", "1", "--out", "a.json"], dir.path()));
    ok(qite(&["generate", "sk", "--n", "5", "--seed", "3", "--out", "b.json"], dir.path()));
    let a = ProblemFile::load(&dir.path().join("a.json")).unwrap();
    let b = ProblemFile::load(&dir.path().join("b.json")).unwrap();
    match (&a.problem, &b.problem) {
        (Problem::Maxcut { n: 8, edges: e3 }, Problem::Maxcut { n: 5, edges: esk }) => {
            assert_eq!(e3.len(), 12);
            assert_eq!(esk.len(), 10);
        }
        other => panic!("unexpected problems {other:?}"),
    }
    assert!(dir.path().join("a.manifest.json").exists());

    ok(qite(&["generate", "3reg", "--n", "8", "--seed", "1", "--out", "c.json"], dir.path()));
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("c.json")).unwrap()
    );
}

#[test]
fn generate_portfolio_matches_direct_objective() {
    let dir = tempfile::tempdir().unwrap();
    ok(qite(
        &["generate", "portfolio", "--assets", "2", "--times", "3", "--bits", "1", "--out", "p.json"],
        dir.path(),
    ));
    let file = ProblemFile::load(&dir.path().join("p.json")).unwrap();
    assert_eq!(file.problem.n(), 6);
    let inst = file.instance().unwrap();
    let spec = inst.portfolio.as_ref().unwrap();
    for code in 0u32..64 {
        let x: Vec<u8> = (0..6).map(|k| ((code >> (5 - k)) & 1) as u8).collect();
        let direct = spec.objective(&spec.decode(&x).unwrap());
        let qubo = inst.model.cost_of_bits(&x).unwrap();
        assert!((direct - qubo).abs() < 1e-10 * (1.0 + direct.abs()), "{x:?}: {direct} vs {qubo}");
    }
}

#[test]
fn solve_triangle() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    let args = ["solve", "tri.json", "--chi", "4", "--arch", "tsn", "--ordering", "spectral", "--out", "run"];
    ok(qite(&args, dir.path()));
    let report_path = dir.path().join("run/report.json");
    let report: SolveReport = qite::json::read(&report_path).unwrap();
    assert_eq!(report.best_cost, -2.0);
    assert_eq!(report.approximation_ratio, Some(1.0));
    let steps = csv_rows(&dir.path().join("run/steps.csv"));
    assert_eq!(steps.len(), report.steps.len());
    let manifest = std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap();
    assert!(manifest.contains("report.json") && manifest.contains("steps.csv"));

    let first = std::fs::read(&report_path).unwrap();
    ok(qite(&args, dir.path()));
    assert_eq!(first, std::fs::read(&report_path).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    let out = qite(&["solve", "tri.json", "--chi", "0", "--out", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("bad").exists());

    let out = qite(&["solve", "tri.json", "--ordering", "hierarchical", "--out", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("bad").exists());

    let out = qite(&["solve", "missing.json", "--out", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(4));

    write(dir.path(), "broken.json", r#"{"type":"maxcut","n":3,"edges":[[0,0,1.0]]}"#);
    let out = qite(&["solve", "broken.json", "--out", "bad"], dir.path());
    assert_eq!(out.status.code(), Some(5));
    assert!(!dir.path().join("bad").exists());
}

#[test]
fn sweep_rows_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    ok(qite(&["generate", "3reg", "--n", "8", "--seed", "2", "--reference", "--out", "g8.json"], dir.path()));
    ok(qite(
        &["sweep", "tri.json", "g8.json", "--arch", "rsn,tsn", "--chi", "4,8", "--seeds", "3", "--out", "sw"],
        dir.path(),
    ));
    let cells = dir.path().join("sw/sweep.csv");
    let runs = dir.path().join("sw/runs.csv");
    assert_eq!(csv_rows(&cells).len(), 8);
    assert_eq!(csv_rows(&runs).len(), 24);

    let mut rdr = csv::Reader::from_path(&runs).unwrap();
    let h = rdr.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|x| x == name).unwrap();
    let run_rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let mut crdr = csv::Reader::from_path(&cells).unwrap();
    let ch = crdr.headers().unwrap().clone();
    let ccol = |name: &str| ch.iter().position(|x| x == name).unwrap();
    for cell in crdr.records().map(Result::unwrap) {
        let matching: Vec<&csv::StringRecord> = run_rows
            .iter()
            .filter(|r| {
                r[col("instance")] == cell[ccol("instance")]
                    && r[col("chi")] == cell[ccol("chi")]
                    && r[col("arch")] == cell[ccol("arch")]
                    && r[col("ordering")] == cell[ccol("ordering")]
            })
            .collect();
        assert_eq!(matching.len(), 3);
        let mean_steps = matching.iter().map(|r| parse(&r[col("steps")])).sum::<f64>() / 3.0;
        let mean_err = matching.iter().map(|r| parse(&r[col("error")])).sum::<f64>() / 3.0;
        assert!((parse(&cell[ccol("mean_steps")]) - mean_steps).abs() < 1e-12);
        assert!((parse(&cell[ccol("mean_error")]) - mean_err).abs() < 1e-12);
    }
    assert_eq!(csv_rows(&dir.path().join("sw/summary.csv")).len(), 4);
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    ok(qite(&["generate", "er", "--n", "7", "--p", "0.6", "--seed", "4", "--reference", "--out", "e.json"], dir.path()));
    let run = |threads: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_qite"))
            .args(["sweep", "e.json", "--chi", "2,4", "--ordering", "spectral,shuffled", "--seeds", "2", "--out", out])
            .current_dir(dir.path())
            .env("QITE_THREADS", threads)
            .output()
            .unwrap();
        ok(o);
        let strip = |p: PathBuf| -> Vec<Vec<String>> {
            let mut r = csv::Reader::from_path(p).unwrap();
            let drop = r.headers().unwrap().iter().position(|h| h == "seconds_per_step").unwrap();
            r.records()
                .map(|rec| rec.unwrap().iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, v)| v.to_string()).collect())
                .collect()
        };
        strip(dir.path().join(out).join("runs.csv"))
    };
    assert_eq!(run("1", "one"), run("4", "four"));

    let bad = Command::new(env!("CARGO_BIN_EXE_qite"))
        .args(["sweep", "e.json", "--out", "bad"])
        .current_dir(dir.path())
        .env("QITE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn spectral_ordering_not_worse_than_shuffled() {
    let dir = tempfile::tempdir().unwrap();
    let mut problems = Vec::new();
    for seed in 0..10 {
        let name = format!("r{seed}.json");
        ok(qite(
            &["generate", "3reg", "--n", "16", "--seed", &seed.to_string(), "--reference", "--out", &name],
            dir.path(),
        ));
        problems.push(name);
    }
    let mut args: Vec<&str> = vec!["sweep"];
    args.extend(problems.iter().map(String::as_str));
    args.extend(["--chi", "8", "--arch", "tsn", "--ordering", "spectral,shuffled", "--out", "sw"]);
    ok(qite(&args, dir.path()));
    let summary = dir.path().join("sw/summary.csv");
    let orderings = column(&summary, "ordering");
    let errors = column(&summary, "mean_error");
    let get = |o: &str| parse(&errors[orderings.iter().position(|x| x == o).unwrap()]);
    let (spectral, shuffled) = (get("spectral"), get("shuffled"));
    println!("mean error spectral {spectral:.5} shuffled {shuffled:.5}");
    assert!(spectral <= shuffled, "spectral {spectral} > shuffled {shuffled}");
}

#[test]
fn oracle_reports_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    ok(qite(&["oracle", "tri.json", "--steps", "5", "--out", "o.json"], dir.path()));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("o.json")).unwrap()).unwrap();
    assert_eq!(v["ground_cost"].as_f64(), Some(-2.0));
    let energies = v["dense_energies"].as_array().unwrap();
    assert_eq!(energies.len(), 6);
}

fn entropy_table(path: &Path) -> Vec<Vec<f64>> {
    csv_rows(path).iter().map(|r| r.iter().map(parse).collect()).collect()
}

#[test]
fn entropy_report_product_run_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "fields.json", r#"{"type":"ising","n":4,"couplings":[],"fields":[1.0,-0.5,0.25,2.0]}"#);
    ok(qite(&["solve", "fields.json", "--chi", "4", "--out", "run"], dir.path()));
    ok(qite(&["entropy-report", "run/report.json", "--out", "ent"], dir.path()));
    let files: Vec<PathBuf> = std::fs::read_dir(dir.path().join("ent"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert_eq!(files.len(), 1);
    let table = entropy_table(&files[0]);
    assert!(!table.is_empty());
    for row in table {
        assert_eq!(row.len(), 2 + 3);
        assert!(row[1..].iter().all(|&v| v == 0.0), "{row:?}");
    }
}

#[test]
fn entropy_report_bell_fixture_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.json", TRIANGLE);
    ok(qite(&["solve", "tri.json", "--chi", "2", "--out", "run"], dir.path()));
    ok(qite(&["generate", "sk", "--n", "8", "--seed", "5", "--out", "sk.json"], dir.path()));
    ok(qite(&["solve", "sk.json", "--chi", "4", "--dtau", "0.3", "--out", "sk"], dir.path()));

    let mut bell: SolveReport = qite::json::read(&dir.path().join("run/report.json")).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let state = MpsState::from_dense(2, &[C64::new(h, 0.0), z, z, C64::new(h, 0.0)]).unwrap();
    bell.n = 2;
    bell.steps.truncate(1);
    bell.steps[0].bond_entropies = state.bond_entropies().unwrap();
    qite::json::write(&dir.path().join("bell.json"), &bell).unwrap();

    ok(qite(&["entropy-report", "bell.json", "run/report.json", "sk/report.json", "--out", "ent"], dir.path()));
    let bell_table = entropy_table(&dir.path().join("ent/000_bell_entropy.csv"));
    assert_eq!(bell_table.len(), 1);
    assert_eq!(bell_table[0].len(), 3);
    assert!((bell_table[0][2] - 1.0).abs() < 1e-12);

    for name in ["001_run_report_entropy.csv", "002_sk_report_entropy.csv"] {
        for row in entropy_table(&dir.path().join("ent").join(name)) {
            assert!((0.0..=1.0 + 1e-12).contains(&row[1]), "{name}: A = {}", row[1]);
        }
    }

    let mut empty = bell.clone();
    empty.steps.clear();
    qite::json::write(&dir.path().join("empty.json"), &empty).unwrap();
    let out = qite(&["entropy-report", "empty.json", "--out", "ent2"], dir.path());
    assert_eq!(out.status.code(), Some(5));
    assert!(!dir.path().join("ent2").exists());
}
