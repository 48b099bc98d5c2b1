use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hyperquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperquant")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn analyze_sphere_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o =
        hyperquant(&["analyze", "--builtin", "sphere-height", "--k", "4", "--out", out.to_str().unwrap(), "--plot"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sing: toml::Value = toml::from_str(&read(&out, "singularities.toml")).unwrap();
    assert_eq!(sing["elliptic"].as_integer(), Some(2));
    assert_eq!(sing["hyperbolic"].as_integer(), Some(0));
    let reeb: toml::Value = toml::from_str(&read(&out, "reeb.toml")).unwrap();
    assert_eq!(reeb["edge"].as_array().unwrap().len(), 1);
    let summary: toml::Value = toml::from_str(&read(&out, "analysis.toml")).unwrap();
    assert_eq!(summary["bs_leaves"].as_array().unwrap().len(), 3);
    assert_eq!(summary["prequant_check"]["ok"].as_bool(), Some(true));
    assert_eq!(summary["bs_holonomy_ok"].as_bool(), Some(true));
    let csv = read(&out, "actions/edge-0.csv");
    assert!(csv.starts_with("t,action\n") && csv.lines().count() > 10);
    let svg = read(&out, "actions.svg");
    assert!(svg.contains("<svg") && svg.contains("polyline") && svg.contains("1*2pi"));
}

#[test]
fn analyze_euler_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = hyperquant(&["analyze", "--builtin", "euler-sphere", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let sing: toml::Value = toml::from_str(&read(dir.path(), "singularities.toml")).unwrap();
    assert_eq!(sing["elliptic"].as_integer(), Some(4));
    assert_eq!(sing["hyperbolic"].as_integer(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = hyperquant(&[
            "quantize",
            "--builtin",
            "euler-sphere",
            "--jet-order",
            "2",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let o = hyperquant(&["analyze", "--builtin", "euler-sphere", "--out", d.path().to_str().unwrap(), "--plot"]);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in
        ["quantization.toml", "singularities.toml", "reeb.toml", "analysis.toml", "actions/edge-2.csv", "actions.svg"]
    {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name} differs");
    }
}

#[test]
fn quantize_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = hyperquant(&["quantize", "--builtin", "sphere-height", "--k", "4", "--jet-order", "4", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let report: toml::Value = toml::from_str(&read(dir.path(), "quantization.toml")).unwrap();
    let dims = report["truncated_dims"].as_table().unwrap();
    assert_eq!(dims.len(), 5);
    assert!(dims.values().all(|v| v.as_integer() == Some(3)));

    let o = hyperquant(&["quantize", "--builtin", "euler-sphere", "--jet-order", "3", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let report: toml::Value = toml::from_str(&read(dir.path(), "quantization.toml")).unwrap();
    let cn = report["cn_factor_count"].as_integer().unwrap();
    assert_eq!(cn * 4, 16);
    assert!(!stdout(&o).contains("NO"));

    let o = hyperquant(&[
        "quantize",
        "--builtin",
        "sphere-height",
        "--k",
        "4",
        "--insert",
        "2",
        "--jet-order",
        "1",
        "--out",
        d,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: toml::Value = toml::from_str(&read(dir.path(), "quantization.toml")).unwrap();
    assert_eq!(report["cn_factor_count"].as_integer(), Some(4));
}

#[test]
fn not_prequantized_is_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        hyperquant(&["quantize", "--builtin", "sphere-height", "--k", "3.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn cech_verify_tables() {
    let o = hyperquant(&["cech-verify", "--builtin", "figure-eight", "--jet-order", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for n in 0..=5 {
        let h = 2 * (n + 1);
        assert!(text.lines().any(|l| l.split_whitespace().collect::<Vec<_>>()
            == [n.to_string(), h.to_string(), h.to_string(), h.to_string(), "yes".into()]));
    }
    assert!(text.contains("collapse") && text.contains("refine x3"));

    let o = hyperquant(&["cech-verify", "--builtin", "triple-eight", "--jet-order", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.trim_start().starts_with("4        20        20")));
}

#[test]
fn corrupted_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.toml");
    let good = "order = 2\ngraph = \"figure-eight\"\n\n[[family]]\naction = [0.3, 6.283185307179586]\nbs = [0.9522535170724314]\n\n[[family]]\naction = [1.0, 2.0]\n\n[[family]]\naction = [2.0, -1.0]\n";
    fs::write(&path, good).unwrap();
    assert_eq!(hyperquant(&["cech-verify", "--input", path.to_str().unwrap()]).status.code(), Some(0));
    fs::write(&path, good.replace("0.9522535170724314", "0.9")).unwrap();
    let o = hyperquant(&["cech-verify", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconsistent holonomy"));
}

#[test]
fn surgery_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = hyperquant(&["surgery", "--builtin", "sphere-height", "--k", "4", "--insert", "2", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let rec: toml::Value = toml::from_str(&read(dir.path(), "surgery.toml")).unwrap();
    assert_eq!(rec["s_e"].as_integer(), Some(4));
    assert_eq!(rec["s_h"].as_integer(), Some(2));
    assert_eq!(rec["cn_factor_count"].as_integer(), Some(4));
    assert!(rec["area_change"].as_float().unwrap().abs() < 1e-9);

    let o =
        hyperquant(&["surgery", "--builtin", "sphere-height", "--k", "4", "--edge", "0", "--area", "100", "--out", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient area"));
    let o = hyperquant(&["surgery", "--builtin", "sphere-height", "--k", "4", "--out", d]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flat_check_table() {
    let o = hyperquant(&["flat-check"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("flat up to k = 10"));
    assert!(text.contains("rigidity nullity to degree 12: 0"));
    let o = hyperquant(&["flat-check", "--function", "h^4", "--k-max", "6"]);
    assert!(stdout(&o).contains("first failure at k = 4"));
    assert_eq!(hyperquant(&["flat-check", "--function", "h +"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    let o = hyperquant(&["analyze"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(hyperquant(&["analyze", "--builtin", "sphere-height", "--tol-bs", "-1"]).status.code(), Some(1));
    assert_eq!(hyperquant(&["quantize", "--input", "x.toml", "--k", "3"]).status.code(), Some(1));
    assert_eq!(hyperquant(&["--version"]).status.code(), Some(0));
}

#[test]
fn missing_input_file_is_an_analysis_error() {
    let o = hyperquant(&["analyze", "--input", "/nonexistent/system.toml"]);
    assert_eq!(o.status.code(), Some(2));
}
