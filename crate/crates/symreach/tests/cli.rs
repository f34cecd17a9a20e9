use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn symreach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symreach")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const ROAD: &str = r#"
schema_version = 1
name = "short_road"
dynamics = "robot"
mode_style = "road"
map = "tr"

[path]
kind = "rectangle"
width = 5.0
height = 3.0
loops = 1
start = [-4.5, -0.5]

[init]
center = [-4.5, -0.5, -0.7853981633974483]
width = [0.8, 0.8, 1.5707963267948966]

[domain]
lo = [-10.0, -10.0, -3.141592653589793]
hi = [10.0, 10.0, 3.141592653589793]

[sim]
dt = 0.01
time_margin = 1.0
"#;

#[test]
fn run_safe_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scn = scenarios().join("rectangle_road.scn");
    let out = dir.path().join("out");
    let o = symreach(&["run", scn.to_str().unwrap(), "--method", "sv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["_reachtube.csv", "_metrics.txt", "_virtual.json", "_report.json"] {
        assert!(out.join(format!("rectangle_road_sv_tr{f}")).exists(), "missing {f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("rectangle_road_sv_tr_report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["method"], "sv");
    assert_eq!(report["report"]["fixed_point"], true);
}

#[test]
fn obstacle_on_the_path_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{ROAD}\n[[unsafe]]\nlo = [-3.0, -2.0, -3.2]\nhi = [-2.0, -1.0, 3.2]\n");
    let p = write(dir.path(), "blocked.scn", &text);
    let o = symreach(&["run", &p, "--method", "sv"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn clear_obstacle_is_safe() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{ROAD}\n[[unsafe]]\nlo = [7.0, 7.0, -3.2]\nhi = [8.0, 8.0, 3.2]\n");
    let p = write(dir.path(), "clear.scn", &text);
    let o = symreach(&["run", &p, "--method", "sv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown_key.scn", ROAD.replace("time_margin = 1.0", "time_margin = 1.0\nwobble = 2")),
        ("bad_version.scn", ROAD.replace("schema_version = 1", "schema_version = 7")),
        ("bad_dynamics.scn", ROAD.replace("\"robot\"", "\"boat\"")),
        ("inverted_box.scn", ROAD.replace("width = [0.8, 0.8,", "width = [-0.8, 0.8,")),
        ("not_toml.scn", "this is = = not toml".to_string()),
    ];
    for (name, text) in cases {
        let p = write(dir.path(), name, &text);
        let o = symreach(&["run", &p]);
        assert_eq!(code(&o), 3, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let p = write(dir.path(), "ok.scn", ROAD);
    assert_eq!(code(&symreach(&["run", &p, "--method", "xx"])), 3);
    assert_eq!(code(&symreach(&["run", &p, "--grid", "-1"])), 3);
    assert_eq!(code(&symreach(&["run", &p, "--jmax", "many"])), 3);
    assert_eq!(code(&symreach(&["run", "/no/such/file.scn"])), 3);
    assert_eq!(code(&symreach(&["frobnicate"])), 3);
}

#[test]
fn singular_custom_map_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = ROAD.replace("map = \"tr\"", "map = \"custom\"");
    for m in ["[-4.5, -0.5, -2.5, -1.5]", "[-2.5, -1.5, -2.5, 1.5]", "[-2.5, 1.5, 2.5, 1.5]", "[2.5, 1.5, 2.5, -1.5]", "[2.5, -1.5, -2.5, -1.5]"] {
        text.push_str(&format!(
            "\n[[custom_map]]\nmode = {m}\ngamma_a = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]\ngamma_b = [0.0, 0.0, 0.0]\nrho_a = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]\nrho_b = [0.0, 0.0, 0.0, 0.0]\n"
        ));
    }
    let p = write(dir.path(), "singular.scn", &text);
    let o = symreach(&["check-equivariance", &p, "--samples", "10"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn equivariance_check_passes_on_shipped_maps() {
    let scn = scenarios().join("s_shaped.scn");
    for map in ["t", "tr"] {
        let o = symreach(&["check-equivariance", scn.to_str().unwrap(), "--samples", "200", "--map", map]);
        assert_eq!(code(&o), 0);
        assert!(String::from_utf8_lossy(&o.stdout).contains("ok"));
    }
}

#[test]
fn fsr_check_reports_counts() {
    let scn = scenarios().join("rectangle_road.scn");
    let o = symreach(&["check-fsr", scn.to_str().unwrap(), "--samples", "5", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("executions  5"), "{text}");
    assert!(text.contains("violations  0"));
}

#[test]
fn matrix_of_one_scenario() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "short_road.scn", ROAD);
    let o = symreach(&["matrix", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    for m in ["NS", "SC", "SV"] {
        assert!(text.contains(m), "{text}");
    }
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(code(&symreach(&["matrix", empty.path().to_str().unwrap()])), 3);
}
