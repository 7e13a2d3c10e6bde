//! Exit-code and format contracts of the command-line interface.

use std::process::{Command, Output};

fn flexcrystal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexcrystal"))
        .args(args)
        .env_remove("FLEXCRYSTAL_TOL")
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn quartz_realize_emits_framework_json_with_zero_sum_relation() {
    let out = flexcrystal(&[
        "quartz", "realize", "--theta", "0", "--phi0", "0", "--phi1", "0", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["relations"], serde_json::json!([[1, 1, 1, 1]]));
    assert_eq!(doc["vertices"].as_array().unwrap().len(), 10);
    assert_eq!(doc["generators"].as_array().unwrap().len(), 4);
    // diagnostics stay on stderr
    assert!(stderr_str(&out).contains("validation:"));
}

#[test]
fn quartz_realize_obj_has_vertex_and_line_records() {
    let out = flexcrystal(&[
        "quartz", "realize", "--theta", "1", "--phi0", "2", "--phi1", "3", "--format", "obj",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 10);
    assert_eq!(text.lines().filter(|l| l.starts_with("l ")).count(), 18);
}

#[test]
fn quartz_sweep_row_count_matches_grid() {
    let out = flexcrystal(&["quartz", "sweep", "--grid", "8,8,8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert_eq!(text.lines().count(), 1 + 512);
    assert!(text.starts_with("theta,phi0,phi1,rank,sigma_min,cell_det"));
}

#[test]
fn quartz_strict_rejects_degenerate_chart_points() {
    let chart = flexcrystal::quartz::find_degenerate_chart(8, 1e-9).expect("degenerate point");
    let out = flexcrystal(&[
        "quartz",
        "realize",
        "--theta",
        &format!("{:.17e}", chart.theta),
        "--phi0",
        &format!("{:.17e}", chart.phi0),
        "--phi1",
        &format!("{:.17e}", chart.phi1),
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_str(&out));
    assert!(stderr_str(&out).contains("degenerate"));
}

#[test]
fn cristobalite_aristotype_generators_are_minus_twice_s() {
    let out = flexcrystal(&["cristobalite", "realize", "--axis", "0,0,1", "--angle", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let gens = doc["generators"].as_array().unwrap();
    let vertices = doc["vertices"].as_array().unwrap();
    // s_i are vertices 1..=3; gamma_i must equal -2 s_i
    for i in 0..3 {
        let s = vertices[i + 1]["pos"].as_array().unwrap();
        let g = gens[i]["vec"].as_array().unwrap();
        for k in 0..3 {
            let sv = s[k].as_f64().unwrap();
            let gv = g[k].as_f64().unwrap();
            assert_eq!(gv, -2.0 * sv);
        }
    }
}

#[test]
fn cristobalite_strict_rejects_near_half_turn() {
    let out = flexcrystal(&[
        "cristobalite",
        "realize",
        "--axis",
        "0,0,1",
        "--angle",
        "3.14159265",
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_str(&out));
}

#[test]
fn cristobalite_scan_row_count() {
    let out = flexcrystal(&["cristobalite", "scan", "--axes", "16", "--angles", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert_eq!(text.lines().count(), 1 + 256);
    assert!(text.starts_with("axis_x,axis_y,axis_z,angle,det_gamma"));
}

#[test]
fn tridymite_solve_aristotype_reports_single_distinct_branch() {
    let out = flexcrystal(&["tridymite", "solve", "--axis", "0,0,1", "--angle", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 4);
    assert!(stderr_str(&out).contains("distinct branches: 1"));
}

#[test]
fn tridymite_tangent_prints_six() {
    let out = flexcrystal(&["tridymite", "tangent"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_str(&out).trim(), "6");
}

#[test]
fn tridymite_oracle_prints_four_for_generic_rotation() {
    let out = flexcrystal(&[
        "tridymite",
        "oracle",
        "--axis",
        "0.577,0.577,0.577",
        "--angle",
        "0.3",
        "--grid",
        "256",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_str(&out).trim(), "4");
}

#[test]
fn tridymite_out_of_neighborhood_is_exit_three() {
    // a half-turn about e3 annihilates the first chord midpoint
    let out = flexcrystal(&[
        "tridymite",
        "solve",
        "--axis",
        "0,0,1",
        "--angle",
        "3.141592653589793",
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_str(&out));
    assert!(stderr_str(&out).contains("midpoint"));
}

#[test]
fn validate_pipeline_and_fault_injection() {
    let dir = tempfile::tempdir().unwrap();

    // a good document validates with exit 0
    let good = dir.path().join("good.json");
    let out = flexcrystal(&["quartz", "realize", "--theta", "1", "--phi0", "2", "--phi1", "3"]);
    std::fs::write(&good, out.stdout).unwrap();
    let out = flexcrystal(&["validate", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    assert!(stdout_str(&out).contains("pass: true"));

    // corrupt one coordinate: an edge goes off unit length -> exit 2
    let text = std::fs::read_to_string(&good).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["vertices"][1]["pos"][0] = serde_json::json!(1.1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let out = flexcrystal(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout_str(&out).contains("pass: false"));

    // malformed JSON -> exit 1
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, b"{not json").unwrap();
    let out = flexcrystal(&["validate", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // schema violation carries the field path
    let schema = dir.path().join("schema.json");
    std::fs::write(
        &schema,
        br#"{"vertices":[{"label":"A","pos":[0,"x",0]}],"edges":[],"generators":[],"relations":[]}"#,
    )
    .unwrap();
    let out = flexcrystal(&["validate", schema.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("vertices[0].pos[1]"));
}

#[test]
fn usage_errors_exit_one_and_name_the_flag() {
    let out = flexcrystal(&["quartz", "realize", "--theta", "abc", "--phi0", "0", "--phi1", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("--theta"), "stderr: {}", stderr_str(&out));

    let out = flexcrystal(&["cristobalite", "realize", "--axis", "0,0,0", "--angle", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("axis"));

    let out = flexcrystal(&["tridymite", "tangent", "--step", "0.5"]);
    assert_eq!(out.status.code(), Some(1));

    let out = flexcrystal(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn tol_env_var_overrides_default() {
    // an absurd tolerance makes every lattice look degenerate
    let out = Command::new(env!("CARGO_BIN_EXE_flexcrystal"))
        .args(["quartz", "realize", "--theta", "1", "--phi0", "2", "--phi1", "3", "--strict"])
        .env("FLEXCRYSTAL_TOL", "10.0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // a flag wins over the environment
    let out = Command::new(env!("CARGO_BIN_EXE_flexcrystal"))
        .args([
            "quartz", "realize", "--theta", "1", "--phi0", "2", "--phi1", "3", "--strict",
            "--tol", "1e-9",
        ])
        .env("FLEXCRYSTAL_TOL", "10.0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    // unparseable environment value is a usage error
    let out = Command::new(env!("CARGO_BIN_EXE_flexcrystal"))
        .args(["quartz", "realize", "--theta", "1", "--phi0", "2", "--phi1", "3"])
        .env("FLEXCRYSTAL_TOL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("FLEXCRYSTAL_TOL"));
}

#[test]
fn output_flag_writes_the_artifact_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fragment.json");
    let out = flexcrystal(&[
        "quartz", "realize", "--theta", "0.5", "--phi0", "0.25", "--phi1", "0.75", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty(), "artifact must not also hit stdout");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("{\"vertices\":["));
}
