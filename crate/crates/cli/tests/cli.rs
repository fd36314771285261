use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gencheb::genmat::example33_fixture;
use gencheb::linalg::matrix_market::to_matrix_market_string;
use gencheb::linalg::ComplexSparseMatrix;
use gencheb::textio::{format_complex_list, Metadata};
use gencheb_cli::error::exit;
use num_complex::Complex64;
use tempfile::TempDir;

fn gencheb(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gencheb"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("GENCHEB_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Row {
    m: usize,
    scheme: String,
    err: Option<f64>,
    residual: f64,
}

fn read_trace(dir: &Path) -> (Vec<String>, Vec<Row>) {
    let mut rdr = csv::Reader::from_path(dir.join("trace.csv")).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            Row {
                m: r[0].parse().unwrap(),
                scheme: r[1].to_string(),
                err: (!r[2].is_empty()).then(|| r[2].parse().unwrap()),
                residual: r[3].parse().unwrap(),
            }
        })
        .collect();
    (header, rows)
}

fn errors(rows: &[Row], scheme: &str) -> Vec<f64> {
    rows.iter().filter(|r| r.scheme == scheme).map(|r| r.err.unwrap()).collect()
}

fn window_rate(e: &[f64], a: usize, b: usize) -> f64 {
    (e[b] / e[a]).powf(1.0 / (b - a) as f64)
}

fn report_value<'a>(report: &'a str, key: &str) -> Option<&'a str> {
    report.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
}

fn write_example33_inputs(dir: &Path) {
    let ex = example33_fixture().unwrap();
    fs::write(dir.join("m.mtx"), to_matrix_market_string(ex.system.matrix())).unwrap();
    fs::write(dir.join("mt.mtx"), to_matrix_market_string(ex.system.tilde_matrix().unwrap())).unwrap();
    fs::write(dir.join("spectrum.txt"), format_complex_list(&ex.eigenvalues)).unwrap();
}

#[test]
fn example33_default_run() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("ex");
    let o = gencheb(&out, &["example33"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.starts_with("config: {"));
    assert!(report.lines().next().unwrap().contains("\"subcommand\":\"example33\""));
    assert_eq!(report_value(&report, "k_geometric"), Some("2"));
    assert_eq!(report_value(&report, "k_bound"), Some("10"));
    assert_eq!(report_value(&report, "predicted_basic_rate"), Some("0.810000"));
    assert_eq!(report_value(&report, "fair_comparison_rate"), Some("0.656100"));
    assert!(report_value(&report, "practical").is_some());

    let (header, rows) = read_trace(&out);
    assert_eq!(header, ["m", "scheme", "err_norm", "residual", "ratio", "matvecs"]);
    let basic = errors(&rows, "basic");
    let gen = errors(&rows, "generalized");
    assert_eq!(basic.len(), 201);
    assert_eq!(gen.len(), 201);
    assert!((window_rate(&basic, 30, 60) - 0.81).abs() <= 0.02);
    assert!((window_rate(&gen, 30, 60) - 0.442).abs() <= 0.02);
}

#[test]
fn zero_steps_gives_header_only_trace() {
    let tmp = TempDir::new().unwrap();
    let o = gencheb(tmp.path(), &["example33", "--steps", "0"]);
    assert_eq!(code(&o), exit::OK);
    let text = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    assert_eq!(text, "m,scheme,err_norm,residual,ratio,matvecs\n");
}

#[test]
fn direct_error_mode_floors_but_agrees_early() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("p"), tmp.path().join("d"));
    assert_eq!(code(&gencheb(&a, &["example33", "--steps", "20"])), exit::OK);
    assert_eq!(code(&gencheb(&b, &["example33", "--steps", "20", "--error-mode", "direct"])), exit::OK);
    let (ea, eb) = (errors(&read_trace(&a).1, "generalized"), errors(&read_trace(&b).1, "generalized"));
    for m in 0..=10 {
        assert!((ea[m] - eb[m]).abs() <= 1e-9 * ea[m].max(1e-12), "step {m}");
    }
}

#[test]
fn normal_sparse_scaled_down() {
    let tmp = TempDir::new().unwrap();
    let o = gencheb(tmp.path(), &["--threads", "1", "normal-sparse", "--n", "50", "--block", "10", "--steps", "40"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert_eq!(report_value(&report, "k"), Some("3"));
    let (_, rows) = read_trace(tmp.path());
    let basic = errors(&rows, "basic");
    let gen = errors(&rows, "generalized");
    assert!((window_rate(&basic, 20, 40) - 0.729).abs() <= 0.05);
    let mean = (11..=20).map(|m| gen[m] / gen[m - 1]).sum::<f64>() / 10.0;
    assert!(mean > 0.34 - 0.05 && mean < 0.53 + 0.05, "{mean}");

    let meta = Metadata::parse(&fs::read_to_string(tmp.path().join("matrix.meta")).unwrap()).unwrap();
    assert_eq!(meta.require::<usize>("n").unwrap(), 50);
    assert_eq!(meta.require::<u64>("seed").unwrap(), 42);
    let mtx = fs::read_to_string(tmp.path().join("matrix.mtx")).unwrap();
    let m = gencheb::linalg::parse_matrix_market(&mtx).unwrap();
    assert_eq!(m.nnz(), meta.require::<usize>("nnz").unwrap());
    let rhs = gencheb::textio::parse_complex_list(&fs::read_to_string(tmp.path().join("rhs.txt")).unwrap()).unwrap();
    assert_eq!(rhs.len(), 50);
}

#[test]
fn single_thread_runs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["--threads", "1", "normal-sparse", "--n", "80", "--block", "20", "--seed", "7", "--steps", "15"];
    assert_eq!(code(&gencheb(&a, &args)), exit::OK);
    assert_eq!(code(&gencheb(&b, &args)), exit::OK);
    assert_eq!(fs::read(a.join("trace.csv")).unwrap(), fs::read(b.join("trace.csv")).unwrap());
    assert_eq!(fs::read(a.join("matrix.mtx")).unwrap(), fs::read(b.join("matrix.mtx")).unwrap());
}

#[test]
fn custom_matches_fixture_run() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    write_example33_inputs(dir);
    let (fx, cu) = (dir.join("fixture"), dir.join("custom"));
    let steps = ["--steps", "30"];
    let o = gencheb(&fx, &["example33", "--error-mode", "direct", steps[0], steps[1]]);
    assert_eq!(code(&o), exit::OK);
    let m = dir.join("m.mtx");
    let mt = dir.join("mt.mtx");
    let sp = dir.join("spectrum.txt");
    let o = gencheb(
        &cu,
        &[
            "custom",
            "--matrix",
            m.to_str().unwrap(),
            "--tilde",
            mt.to_str().unwrap(),
            "--spectrum",
            sp.to_str().unwrap(),
            "--residual-tol",
            "1e-300",
            steps[0],
            steps[1],
        ],
    );
    // the tolerance is unreachable, so the run ends at the cap
    assert_eq!(code(&o), exit::NOT_CONVERGED, "{}", stderr(&o));
    let (_, a) = read_trace(&fx);
    let (_, b) = read_trace(&cu);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((x.m, &x.scheme), (y.m, &y.scheme));
        let (ex, ey) = (x.err.unwrap(), y.err.unwrap());
        assert!((ex - ey).abs() <= 1e-10 * ex.max(1.0), "{} m={}", x.scheme, x.m);
    }
    let report = fs::read_to_string(cu.join("report.txt")).unwrap();
    assert_eq!(report_value(&report, "k_geometric"), Some("2"));
}

#[test]
fn custom_refuses_non_normal_without_tilde() {
    let tmp = TempDir::new().unwrap();
    write_example33_inputs(tmp.path());
    let m = tmp.path().join("m.mtx");
    let o = gencheb(tmp.path(), &["custom", "--matrix", m.to_str().unwrap()]);
    assert_eq!(code(&o), exit::INVALID_INPUT);
    assert!(stderr(&o).contains("not normal"), "{}", stderr(&o));

    let o = gencheb(tmp.path(), &["custom", "--matrix", m.to_str().unwrap(), "--schemes", "basic", "--steps", "500"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));

    let o = gencheb(tmp.path(), &["custom", "--matrix", m.to_str().unwrap(), "--assume-normal", "--steps", "5"]);
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
}

fn tridiagonal(n: usize, diag: f64, off: f64) -> ComplexSparseMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, Complex64::new(diag, 0.0)));
        if i + 1 < n {
            t.push((i, i + 1, Complex64::new(off, 0.0)));
            t.push((i + 1, i, Complex64::new(off, 0.0)));
        }
    }
    ComplexSparseMatrix::from_triplets(n, n, &t).unwrap()
}

#[test]
fn custom_hermitian_offers_classical() {
    let tmp = TempDir::new().unwrap();
    let m = tmp.path().join("h.mtx");
    fs::write(&m, to_matrix_market_string(&tridiagonal(12, 0.2, 0.3))).unwrap();
    let o = gencheb(tmp.path(), &["custom", "--matrix", m.to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let (_, rows) = read_trace(tmp.path());
    for scheme in ["basic", "classical", "generalized"] {
        let last = rows.iter().rfind(|r| r.scheme == scheme).unwrap();
        assert!(last.residual < 1e-9, "{scheme}");
        assert!(last.err.unwrap() < 1e-8, "{scheme}");
    }
}

#[test]
fn custom_with_rhs_and_estimate() {
    let tmp = TempDir::new().unwrap();
    let n = 100;
    let mut t: Vec<_> = (0..n).map(|i| (i, i, Complex64::new(if i == 0 { 0.9 } else { 0.4 }, 0.0))).collect();
    t.extend((0..n - 1).flat_map(|i| [(i, i + 1, Complex64::new(0.05, 0.0)), (i + 1, i, Complex64::new(0.05, 0.0))]));
    let a = ComplexSparseMatrix::from_triplets(n, n, &t).unwrap();
    let m = tmp.path().join("a.mtx");
    fs::write(&m, to_matrix_market_string(&a)).unwrap();
    let g: Vec<Complex64> = (0..n).map(|i| Complex64::new((i % 7) as f64 / 7.0, 0.0)).collect();
    let rhs = tmp.path().join("g.txt");
    fs::write(&rhs, format_complex_list(&g)).unwrap();
    let (m, rhs) = (m.to_str().unwrap(), rhs.to_str().unwrap());

    let o = gencheb(tmp.path(), &["custom", "--matrix", m, "--rhs", rhs, "--estimate"]);
    assert_eq!(code(&o), exit::USAGE, "{}", stderr(&o));
    assert!(stderr(&o).contains("--tilde-rhs"));

    let o = gencheb(tmp.path(), &["custom", "--matrix", m, "--rhs", rhs, "--tilde-rhs", rhs, "--estimate"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert!(report.contains("(estimated)"));
    let (_, rows) = read_trace(tmp.path());
    assert!(rows.iter().all(|r| r.err.is_none()));
    assert!(rows.iter().rfind(|r| r.scheme == "generalized").unwrap().residual < 1e-9);

    let o = gencheb(tmp.path(), &["custom", "--matrix", m]);
    assert_eq!(code(&o), exit::USAGE);
}

#[test]
fn custom_inapplicable_spectrum() {
    let tmp = TempDir::new().unwrap();
    let d =
        ComplexSparseMatrix::diagonal(&[Complex64::new(0.9, 0.1), Complex64::new(0.9, -0.1), Complex64::new(0.2, 0.0)]);
    let m = tmp.path().join("d.mtx");
    fs::write(&m, to_matrix_market_string(&d)).unwrap();
    let o = gencheb(tmp.path(), &["custom", "--matrix", m.to_str().unwrap()]);
    assert_eq!(code(&o), exit::INAPPLICABLE);
    let report = fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert_eq!(report_value(&report, "classification"), Some("inapplicable"));
}

#[test]
fn custom_not_converged_still_writes_trace() {
    let tmp = TempDir::new().unwrap();
    write_example33_inputs(tmp.path());
    let (m, mt) = (tmp.path().join("m.mtx"), tmp.path().join("mt.mtx"));
    let o = gencheb(
        tmp.path(),
        &["custom", "--matrix", m.to_str().unwrap(), "--tilde", mt.to_str().unwrap(), "--steps", "3"],
    );
    assert_eq!(code(&o), exit::NOT_CONVERGED);
    let (_, rows) = read_trace(tmp.path());
    assert_eq!(rows.iter().filter(|r| r.scheme == "generalized").count(), 4);
    assert!(fs::read_to_string(tmp.path().join("report.txt")).unwrap().contains("converged=false"));
}

#[test]
fn report_root_of_unity_pair() {
    let tmp = TempDir::new().unwrap();
    let sp = tmp.path().join("s.txt");
    fs::write(&sp, "0.8\n-0.8\n0.3 0.1\n-0.1 -0.2\n").unwrap();
    let o = gencheb(tmp.path(), &["report", "--spectrum", sp.to_str().unwrap()]);
    assert_eq!(code(&o), exit::OK);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(report_value(&stdout, "classification"), Some("root-of-unity family (k0 = 2)"));
    let k: usize = report_value(&stdout, "k").unwrap().parse().unwrap();
    assert_eq!(k % 2, 0);
}

#[test]
fn report_from_dominant_eigenvalue() {
    let tmp = TempDir::new().unwrap();
    let o = gencheb(tmp.path(), &["report", "--lambda1", "0.9", "--radius", "0.8055"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(report_value(&stdout, "k_bound"), Some("10"));
    assert_eq!(report_value(&stdout, "k_geometric"), Some("none"));
}

#[test]
fn deltoid_sample_files() {
    let tmp = TempDir::new().unwrap();
    let o = gencheb(tmp.path(), &["deltoid-sample"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));

    let mut grid = csv::Reader::from_path(tmp.path().join("deltoid_grid.csv")).unwrap();
    assert_eq!(grid.headers().unwrap(), vec!["re", "im", "in_k1", "in_k2", "in_k3"]);
    let mut seen = 0;
    let mut count = 0;
    for r in grid.records() {
        let r = r.unwrap();
        count += 1;
        let flags = (&r[2], &r[3], &r[4]);
        match (&r[0], &r[1]) {
            ("-0.9", "0.0") => {
                assert_eq!(flags, ("0", "1", "0"));
                seen += 1;
            }
            ("1.0", "0.0") | ("0.0", "0.0") => {
                assert_eq!(flags, ("1", "1", "1"));
                seen += 1;
            }
            ("1.1", "0.0") => {
                assert_eq!(flags, ("0", "0", "0"));
                seen += 1;
            }
            _ => {}
        }
    }
    assert_eq!(seen, 4);
    assert_eq!(count, 221 * 221);

    let mut b = csv::Reader::from_path(tmp.path().join("deltoid_boundary.csv")).unwrap();
    let mut samples = 0;
    for r in b.records() {
        let h: f64 = r.unwrap()[3].parse().unwrap();
        assert!(h.abs() <= 1e-12);
        samples += 1;
    }
    assert_eq!(samples, 720);

    let q = fs::read_to_string(tmp.path().join("quotients.csv")).unwrap();
    assert_eq!(q.lines().count(), 1 + 3 * 4);
    assert!(q.lines().skip(1).filter(|l| l.starts_with("2,")).all(|l| l.ends_with(",1")));
}

#[test]
fn out_dir_from_environment() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_gencheb"))
        .args(["example33", "--steps", "2"])
        .env("GENCHEB_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), exit::OK);
    assert!(out.join("trace.csv").exists());
}

#[test]
fn error_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let o = gencheb(tmp.path(), &["example33", "--k", "0"]);
    assert_eq!(code(&o), exit::USAGE);
    let o = gencheb(tmp.path(), &["custom"]);
    assert_eq!(code(&o), exit::USAGE);

    let missing = tmp.path().join("missing.mtx");
    let o = gencheb(tmp.path(), &["custom", "--matrix", missing.to_str().unwrap()]);
    assert_eq!(code(&o), exit::IO);

    let bad = tmp.path().join("bad.mtx");
    fs::write(&bad, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap();
    let o = gencheb(tmp.path(), &["custom", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(code(&o), exit::INVALID_INPUT);
    assert!(stderr(&o).contains("bad.mtx"));

    let rect = tmp.path().join("rect.mtx");
    fs::write(&rect, "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 0.5\n").unwrap();
    let o = gencheb(tmp.path(), &["custom", "--matrix", rect.to_str().unwrap()]);
    assert_eq!(code(&o), exit::INVALID_INPUT);

    let blocked = tmp.path().join("file");
    fs::write(&blocked, "").unwrap();
    let o = gencheb(&blocked.join("sub"), &["example33"]);
    assert_eq!(code(&o), exit::IO);
}
