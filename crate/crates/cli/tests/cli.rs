use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn nllab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nllab"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Writes `config` into a fresh directory and runs `command` on it with
/// outputs in `<dir>/out`.
fn run(command: &str, config: &str, extra: &[&str]) -> (TempDir, PathBuf, Output) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.toml");
    fs::write(&path, config).unwrap();
    let out = dir.path().join("out");
    let mut args = vec![
        command,
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let status = nllab(&args);
    (dir, out, status)
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_success(o: &Output) {
    assert!(
        o.status.success(),
        "status {:?}\nstderr: {}",
        o.status,
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn version_prints_the_package_version() {
    let o = nllab(&["version"]);
    assert_success(&o);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap().trim(),
        format!("nllab {}", env!("CARGO_PKG_VERSION"))
    );
}

#[test]
fn axes_moment_rows_and_manifest() {
    let cfg = r#"
[measure]
kind = "axes"
dim = 2
alpha = 1.0

[conditions]
rhos = [0.1, 0.5, 1.0, 3.0]
budget = 10.0
"#;
    let (_d, out, o) = run("check-conditions", cfg, &[]);
    assert_success(&o);
    assert_eq!(column(&out.join("k1.csv"), "value"), vec!["8.0"; 4]);
    let summary = json(&out.join("conditions.json"));
    assert_eq!(summary["k1"]["pass"], true);
    assert!(summary["k2"].is_null());

    let manifest = json(&out.join("run.json"));
    assert_eq!(manifest["command"], "check-conditions");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert_eq!(files, ["k1.csv", "conditions.json"]);
    let mut on_disk: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|f| f != "run.json")
        .collect();
    on_disk.sort();
    assert_eq!(on_disk, ["conditions.json", "k1.csv"]);
}

#[test]
fn normalized_stable_energy_comparison_is_the_identity() {
    let cfg = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.3
normalization = "robust"

[conditions]
rhos = [1.0]
dh = [0.03125]
"#;
    let (_d, out, o) = run("check-conditions", cfg, &[]);
    assert_success(&o);
    let summary = json(&out.join("conditions.json"));
    let lambda = summary["k2"]["lambda_measured"].as_f64().unwrap();
    assert!((lambda - 1.0).abs() <= 1e-9, "{lambda}");
    for r in column(&out.join("k2_samples.csv"), "ratio") {
        assert!((r.parse::<f64>().unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn invalid_configs_exit_with_status_two() {
    let cusp = "[measure]\nkind = \"cusp\"\ndim = 2\nalpha = 0.2\ns = 0.5\n";
    let (_d, _, o) = run("check-conditions", cusp, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("effective order"));

    let unknown = "[measure]\nkind = \"alpha_stable\"\ndim = 1\nalpha = 1.0\n[experiment]\nname = \"wavelet\"\n";
    let (_d, _, o) = run("regularity", unknown, &[]);
    assert_eq!(o.status.code(), Some(2));

    let unseeded = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.0
[grid]
h = 0.125
box_radius = 3.0
domain_radius = 2.0
[solver]
dt = 0.125
[experiment]
name = "harnack"
samples = 2
"#;
    let (_d, _, o) = run("regularity", unseeded, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    let o = nllab(&["check-conditions", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failures_exit_with_status_three() {
    let cfg = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.0
[grid]
h = 0.0625
box_radius = 2.0
domain_radius = 1.0
[solver]
dt = 0.0625
max_iterations = 1
[solve]
t0 = 0.0
t1 = 0.125
initial = { type = "bump", width = 0.5, height = 1.0, power = 4 }
snapshots = [0.125]
"#;
    let (_d, _, o) = run("solve", cfg, &[]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
}

const CONSTANT: &str = r#"
[measure]
kind = "axes"
dim = 2
alpha = 0.8

[grid]
h = 0.125
box_radius = 2.0
domain_radius = 1.0

[solver]
dt = 0.125

[solve]
t0 = 0.0
t1 = 0.5
initial = { type = "constant", value = 2.5 }
exterior = 2.5
snapshots = [0.25, 0.5]
"#;

#[test]
fn constant_data_stay_constant_and_reruns_are_byte_identical() {
    let (_d, out, o) = run("solve", CONSTANT, &[]);
    assert_success(&o);
    for f in ["snapshot_000.csv", "snapshot_001.csv"] {
        for v in column(&out.join(f), "u") {
            assert!((v.parse::<f64>().unwrap() - 2.5).abs() < 1e-10, "{v}");
        }
    }
    let (_e, again, o) = run("solve", CONSTANT, &["--threads", "2"]);
    assert_success(&o);
    for f in ["snapshot_000.csv", "snapshot_001.csv", "solve.json"] {
        assert_eq!(
            fs::read(out.join(f)).unwrap(),
            fs::read(again.join(f)).unwrap()
        );
    }
}

#[test]
fn cauchy_snapshot_centre_value() {
    let cfg = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.0
normalization = "fractional_laplacian"

[grid]
h = 0.03125
box_radius = 8.0
domain = "cube"

[solver]
dt = 0.015625
theta = 0.5

[solve]
t0 = 0.0
t1 = 0.5
initial = { type = "delta" }
snapshots = [0.5]
"#;
    let (_d, out, o) = run("solve", cfg, &[]);
    assert_success(&o);
    let summary = json(&out.join("solve.json"));
    let centre = summary["snapshots"][0]["center_value"].as_f64().unwrap();
    let exact = 2.0 / std::f64::consts::PI;
    assert!((centre - exact).abs() <= 0.05 * exact, "{centre}");
}

const HARNACK: &str = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.0

[grid]
h = 0.0625
box_radius = 3.0
domain_radius = 2.0

[solver]
dt = 0.0625

[experiment]
name = "harnack"
samples = 3
include_constant = true
"#;

#[test]
fn harnack_constant_sample_has_quotient_one_half() {
    let (_d, out, o) = run("regularity", HARNACK, &["--seed", "4"]);
    assert_success(&o);
    let q = column(&out.join("harnack.csv"), "quotient");
    assert_eq!(q.len(), 4);
    assert_eq!(q[3], "0.5");
    assert_eq!(json(&out.join("run.json"))["seed"], 4);
}

#[test]
fn scaling_at_unit_radius_is_exact() {
    let cfg = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.0

[grid]
h = 0.0625
box_radius = 4.0

[solver]
dt = 0.0625

[experiment]
name = "scaling"
r = 1.0
"#;
    let (_d, out, o) = run("regularity", cfg, &[]);
    assert_success(&o);
    assert_eq!(column(&out.join("scaling.csv"), "discrepancy"), ["0.0"]);
}

#[test]
fn strong_harnack_axes_ratios_increase() {
    let cfg = r#"
[measure]
kind = "axes"
dim = 2
alpha = 1.0

[experiment]
name = "strongharnack"
widths = [0.5, 0.25, 0.125]
"#;
    let (_d, out, o) = run("regularity", cfg, &[]);
    assert_success(&o);
    let ratios: Vec<f64> = column(&out.join("strongharnack.csv"), "ratio")
        .iter()
        .map(|r| r.parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 3);
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn batch_outputs_do_not_depend_on_thread_count() {
    for name in ["loglemma", "moser", "poincare"] {
        let cfg = format!(
            r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.5

[grid]
h = 0.0625
box_radius = 3.0
domain_radius = 2.0

[solver]
dt = 0.0625

[experiment]
name = "{name}"
seed = 9
samples = 4
levels = 9
"#
        );
        let (_a, one, o) = run("regularity", &cfg, &["--threads", "1"]);
        assert_success(&o);
        let (_b, three, o) = run("regularity", &cfg, &["--threads", "3"]);
        assert_success(&o);
        for f in [format!("{name}.csv"), format!("{name}.json")] {
            assert_eq!(
                fs::read(one.join(&f)).unwrap(),
                fs::read(three.join(&f)).unwrap(),
                "{f}"
            );
        }
    }
}

#[test]
fn hoelder_and_heat_kernel_write_plot_data() {
    let hoelder = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.5

[grid]
h = 0.03125
box_radius = 2.0
domain_radius = 1.0

[solver]
dt = 0.03125

[experiment]
name = "hoelder"
seed = 1
"#;
    let (_d, out, o) = run("regularity", hoelder, &[]);
    assert_success(&o);
    assert!(column(&out.join("hoelder.csv"), "distance").len() >= 3);
    assert!(json(&out.join("hoelder.json"))["beta"].as_f64().unwrap() > 0.0);

    let heat = r#"
[measure]
kind = "alpha_stable"
dim = 1
alpha = 1.5
normalization = "fractional_laplacian"

[grid]
h = 0.03125
box_radius = 8.0

[solver]
dt = 0.015625
theta = 0.5

[experiment]
name = "heatkernel"
times = [0.25, 0.5, 1.0]
"#;
    let (_d, out, o) = run("regularity", heat, &[]);
    assert_success(&o);
    let scaled: Vec<f64> = column(&out.join("heatkernel.csv"), "scaled")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let (lo, hi) = scaled
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi <= 1.1 * lo, "{scaled:?}");
}
