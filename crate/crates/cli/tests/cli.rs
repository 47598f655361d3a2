use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use circflow::generators::{generate_matrix, SpendingSpec, TopologySpec};
use circflow::io::read_matrix;
use circflow::CirculationMatrix;
use tempfile::TempDir;

fn circflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("CIRCFLOW_OUT")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

struct Case {
    dir: TempDir,
}

impl Case {
    fn new(config: &str) -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("run.toml"), config).unwrap();
        Case { dir }
    }

    fn file(&self, name: &str, body: &str) -> &Self {
        fs::write(self.dir.path().join(name), body).unwrap();
        self
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn cmd(&self, sub: &str, extra: &[&str]) -> Output {
        let mut args = vec![sub, "--config", "run.toml", "--out", "out", "-q"];
        args.extend_from_slice(extra);
        circflow(&args, self.dir.path())
    }

    fn ok(&self, sub: &str, extra: &[&str]) -> Output {
        let out = self.cmd(sub, extra);
        assert!(
            out.status.success(),
            "{sub} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path("out").join(name)).unwrap()
    }
}

fn assert_bitwise_equal(a: &CirculationMatrix, b: &CirculationMatrix) {
    let ea: Vec<_> = a.entries().map(|(i, j, v)| (i, j, v.to_bits())).collect();
    let eb: Vec<_> = b.entries().map(|(i, j, v)| (i, j, v.to_bits())).collect();
    assert_eq!(a.n(), b.n());
    assert_eq!(ea, eb);
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn report_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from\n{text}"))
        .to_string()
}

const WORKED: &str = "cfm 3 8\n1 1 0.5\n2 1 0.3\n3 1 0.2\n1 2 0.2\n2 2 0.7\n3 2 0.1\n1 3 0.4\n3 3 0.6\n";

#[test]
fn gen_single_agent_is_one_by_one_identity() {
    let c = Case::new("seed = 1\nT = 1\n[economy]\nn = 1\n[topology]\nkind = \"complete\"\n");
    c.ok("gen", &[]);
    let text = c.read("matrix.cfm");
    assert!(text.starts_with("# circflow "), "{text}");
    assert_eq!(data_lines(&text), ["cfm 1 1", "1 1 1.0"]);
    assert!(c.path("out/resolved_config.toml").exists());
}

#[test]
fn gen_zero_propensity_gives_identity() {
    let c = Case::new(
        "seed = 3\nT = 1\n[economy]\nn = 4\n[topology]\nkind = \"complete\"\n\
         [spending.propensity]\nkind = \"constant\"\nvalue = 0.0\n",
    );
    c.ok("gen", &[]);
    let text = c.read("matrix.cfm");
    assert_eq!(
        data_lines(&text),
        ["cfm 4 4", "1 1 1.0", "2 2 1.0", "3 3 1.0", "4 4 1.0"]
    );
}

#[test]
fn gen_ring_matches_library_generator() {
    let c = Case::new(
        "seed = 11\nT = 1\n[economy]\nn = 3\n[topology]\nkind = \"ring\"\nk = 1\n",
    );
    c.ok("gen", &[]);
    let text = c.read("matrix.cfm");
    // three diagonal entries plus one seller per buyer
    assert_eq!(data_lines(&text).len(), 1 + 6);

    let loaded = read_matrix(BufReader::new(text.as_bytes())).unwrap();
    let expected = generate_matrix(
        &TopologySpec::ring(3, 1),
        &SpendingSpec::default(),
        circflow::rng::derive_seed(11, 0),
    )
    .unwrap();
    assert_bitwise_equal(&loaded, &expected);
}

#[test]
fn gen_then_load_is_bitwise_identical() {
    let c = Case::new(
        "seed = 5\nT = 1\n[economy]\nn = 40\n[topology]\nkind = \"random-directed\"\np_edge = 0.2\n",
    );
    c.ok("gen", &[]);
    let loaded = read_matrix(BufReader::new(c.read("matrix.cfm").as_bytes())).unwrap();
    let expected = generate_matrix(
        &TopologySpec::random_directed(40, 0.2),
        &SpendingSpec::default(),
        circflow::rng::derive_seed(5, 0),
    )
    .unwrap();
    assert_bitwise_equal(&loaded, &expected);
}

#[test]
fn run_identity_leaves_wealth_unchanged() {
    let c = Case::new(
        "seed = 2\nT = 100\n[economy]\nn = 3\n[economy.initial]\nfrom_file = \"x0.txt\"\n\
         [topology]\nkind = \"complete\"\n[spending.propensity]\nkind = \"constant\"\nvalue = 0.0\n",
    );
    c.file("x0.txt", "5, 7.5, 12\n");
    c.ok("run", &[]);
    let fin = c.read("final.csv");
    assert_eq!(data_lines(&fin), ["100,24.5,5,7.5,12"]);
    let snaps = c.read("snapshots.csv");
    assert_eq!(data_lines(&snaps)[0], "0,24.5,5,7.5,12");
}

#[test]
fn run_worked_example_one_step() {
    let c = Case::new(
        "seed = 0\nT = 1\n[economy]\nn = 3\n[economy.initial]\nfrom_file = \"x0.txt\"\n\
         [[matrices]]\nfile = \"worked.cfm\"\n[snapshots]\ntimes = \"every\"\nevery = 1\n",
    );
    c.file("x0.txt", "100 200 300\n").file("worked.cfm", WORKED);
    c.ok("run", &[]);
    assert_eq!(
        data_lines(&c.read("snapshots.csv")),
        ["0,600,100,200,300", "1,600,210,170,220"]
    );
    assert_eq!(data_lines(&c.read("drift.csv")), ["1,600,0,0"]);
}

#[test]
fn integer_run_has_zero_drift() {
    let c = Case::new(
        "seed = 9\nT = 500\nmode = \"integer\"\n[economy]\nn = 50\n\
         [economy.initial.uniform]\nlow = 0\nhigh = 1000\n\
         [topology]\nkind = \"scale-free\"\nm = 3\n",
    );
    c.ok("run", &[]);
    let drift = c.read("drift.csv");
    let rows = data_lines(&drift);
    assert_eq!(rows.len(), 500);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[2], "0", "{row}");
    }
    assert!(c.read("snapshots.csv").contains("# mode: integer"));
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = "seed = 21\nT = 300\n[economy]\nn = 30\n[economy.initial.uniform]\nlow = 1\nhigh = 50\n\
               [[matrices]]\n[matrices.topology]\nkind = \"random-directed\"\np_edge = 0.3\n\
               [[matrices]]\n[matrices.topology]\nkind = \"ring\"\nk = 2\n\
               [schedule]\nkind = \"regime-switching\"\ntransitions = [[0.9, 0.1], [0.2, 0.8]]\n";
    let a = Case::new(cfg);
    let b = Case::new(cfg);
    a.ok("run", &[]);
    b.ok("run", &[]);
    for f in ["snapshots.csv", "drift.csv", "final.csv", "resolved_config.toml"] {
        assert_eq!(a.read(f), b.read(f), "{f} differs");
    }
    // a different seed changes the trajectory
    a.ok("run", &["--seed", "22"]);
    assert_ne!(a.read("final.csv"), b.read("final.csv"));
}

#[test]
fn negative_horizon_is_a_configuration_error() {
    let c = Case::new("seed = 1\nT = -1\n[economy]\nn = 3\n[topology]\nkind = \"complete\"\n");
    let out = c.cmd("run", &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('T'), "{err}");
    assert!(!c.path("out/final.csv").exists());
}

#[test]
fn conflicting_initial_wealth_options_are_rejected() {
    let c = Case::new(
        "seed = 1\nT = 1\n[economy]\nn = 3\n[economy.initial]\nequal = 5.0\n\
         [economy.initial.uniform]\nlow = 0.0\nhigh = 1.0\n[topology]\nkind = \"complete\"\n",
    );
    let out = c.cmd("run", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("initial"));
}

#[test]
fn wealth_file_of_wrong_length_fails() {
    let c = Case::new(
        "seed = 1\nT = 1\n[economy]\nn = 4\n[economy.initial]\nfrom_file = \"x0.txt\"\n\
         [topology]\nkind = \"complete\"\n",
    );
    c.file("x0.txt", "1 2 3\n");
    let out = c.cmd("run", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("economy.n = 4"));
}

#[test]
fn analyze_equal_and_point_mass_wealth() {
    let c = Case::new(
        "seed = 1\nT = 0\n[economy]\nn = 4\n[topology]\nkind = \"complete\"\n",
    );
    c.ok("run", &[]);
    let out = circflow(&["analyze", "out", "-q", "--what", "inequality"], c.dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_value(&c.read("report.txt"), "gini"), "0");

    let c = Case::new(
        "seed = 1\nT = 0\n[economy]\nn = 4\n[economy.initial.point_mass]\nagent = 2\namount = 10.0\n\
         [topology]\nkind = \"complete\"\n",
    );
    c.ok("run", &[]);
    let out = circflow(&["analyze", "out", "-q"], c.dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = c.read("report.txt");
    let g: f64 = report_value(&report, "gini").parse().unwrap();
    assert!((g - 0.75).abs() < 1e-12, "{report}");
    assert!(c.read("lorenz.csv").contains("# columns:"));
    // the tail fit is undefined with a single positive agent, but not requested
    assert_eq!(report_value(&report, "hill_alpha"), "undefined");
}

#[test]
fn analyze_recovers_pareto_exponent() {
    let n = 100_000;
    let x: Vec<f64> = (0..n)
        .map(|i| (1.0 - (i as f64 + 0.5) / n as f64).powf(-0.5))
        .collect();
    let total: f64 = x.iter().sum();
    let mut text = String::from("# mode: float\n# columns: tau,total,x_1..x_n\n0,");
    text.push_str(&total.to_string());
    for v in &x {
        text.push(',');
        text.push_str(&v.to_string());
    }
    text.push('\n');
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("pareto.csv"), text).unwrap();
    let out = circflow(&["analyze", "pareto.csv", "-q", "--what", "tail"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let alpha: f64 = report_value(&report, "hill_alpha").parse().unwrap();
    assert!((1.8..=2.2).contains(&alpha), "{report}");
    assert_eq!(report_value(&report, "hill_k"), "1000");
    assert!(dir.path().join("ccdf.csv").exists());
}

#[test]
fn analyze_convergence_on_full_trace() {
    let c = Case::new(
        "seed = 4\nT = 200\n[economy]\nn = 20\n[topology]\nkind = \"complete\"\n\
         [snapshots]\ntimes = \"every\"\nevery = 10\n",
    );
    c.ok("run", &[]);
    let out = circflow(&["analyze", "out", "-q", "--what", "convergence"], c.dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let conv = c.read("convergence.csv");
    assert_eq!(data_lines(&conv).len(), 20);
}

#[test]
fn analyze_summary_trace_explains_what_to_change() {
    let c = Case::new(
        "seed = 4\nT = 50\n[economy]\nn = 20\n[topology]\nkind = \"complete\"\n\
         [snapshots]\ncontent = \"summary\"\n",
    );
    c.ok("run", &[]);
    let out = circflow(&["analyze", "out", "-q", "--what", "convergence"], c.dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("content = \"full\""), "{err}");

    // without an explicit request the other reports still come out
    let out = circflow(&["analyze", "out", "-q"], c.dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(c.read("report.txt").contains("gini="));
}

#[test]
fn verify_identity_and_random_economies() {
    let c = Case::new(
        "seed = 1\nT = 20\n[economy]\nn = 6\n[topology]\nkind = \"complete\"\n\
         [spending.propensity]\nkind = \"constant\"\nvalue = 0.0\n",
    );
    let out = c.ok("verify", &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("max_abs_difference=0e0\n"), "{text}");
    assert!(text.contains("result=pass"));
    assert!(c.read("verify.txt").contains("result=pass"));

    let c = Case::new(
        "seed = 77\nT = 100\n[economy]\nn = 32\n[economy.initial.uniform]\nlow = 0.0\nhigh = 100.0\n\
         [topology]\nkind = \"random-directed\"\np_edge = 0.25\n",
    );
    c.ok("verify", &["--tolerance", "1e-12"]);
}

#[test]
fn verify_rejects_non_stochastic_matrix_file() {
    let c = Case::new(
        "seed = 0\nT = 1\n[economy]\nn = 3\n[[matrices]]\nfile = \"bad.cfm\"\n",
    );
    c.file(
        "bad.cfm",
        "cfm 3 8\n1 1 0.5\n2 1 0.3\n3 1 0.1\n1 2 0.2\n2 2 0.7\n3 2 0.1\n1 3 0.4\n3 3 0.6\n",
    );
    let out = c.cmd("verify", &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("column 1"), "{err}");
}

#[test]
fn verify_refuses_large_economies() {
    let c = Case::new("seed = 0\nT = 1\n[economy]\nn = 5000\n[topology]\nkind = \"ring\"\nk = 1\n");
    let out = c.cmd("verify", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4096"));
}
