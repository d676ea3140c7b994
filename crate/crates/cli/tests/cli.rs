//! Runs the built binary end to end.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bitmodel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitmodel")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bitmodel-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn eval_prints_value_and_costs() {
    let o = bitmodel(&["eval", "exp(1)", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("2.71828"), "{text}");
    assert!(text.contains("queries=") && text.contains("bit_ops="));
}

#[test]
fn eval_of_the_cube_root_example() {
    let o = bitmodel(&["eval", "cbrt(1 - (1/2)^3)", "30"]);
    assert!(o.status.success());
    // (7/8)^(1/3) = 0.95646559...
    assert!(stdout(&o).starts_with("0.9564655"), "{}", stdout(&o));
}

#[test]
fn eval_rejects_decimal_fractions() {
    let o = bitmodel(&["eval", "0.1", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn render_disk_writes_three_files() {
    let prefix = scratch("disk");
    let p = prefix.to_str().unwrap();
    let o = bitmodel(&["render", "disk", "--n", "3", "--half-width", "2", "--radius", "1", "--out", p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pgm = std::fs::read_to_string(prefix.with_extension("pgm")).unwrap();
    assert!(pgm.starts_with("P2\n33 33\n255\n"), "{}", &pgm[..20]);
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 33 * 33);
    let stats = std::fs::read_to_string(prefix.with_extension("stats")).unwrap();
    assert!(stats.contains("set=disk"));
    assert!(stdout(&o).contains("pixels=1089"));
}

#[test]
fn render_julia_marks_the_unit_circle() {
    let prefix = scratch("julia");
    let p = prefix.to_str().unwrap();
    let o = bitmodel(&["render", "julia", "--c", "0", "0", "--n", "3", "--half-width", "5/4", "--out", p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| l.starts_with("8,0,") || l.starts_with("0,0,")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().any(|r| r.starts_with("8,0,1")), "{rows:?}");
    assert!(rows.iter().any(|r| r.starts_with("0,0,0")), "{rows:?}");
}

#[test]
fn render_rejects_misaligned_windows() {
    let prefix = scratch("bad");
    let o = bitmodel(&["render", "disk", "--n", "2", "--half-width", "1/8", "--out", prefix.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("multiple"));
}

#[test]
fn selfcheck_passes_and_a_broken_threshold_fails() {
    let ok = bitmodel(&["selfcheck"]);
    assert!(ok.status.success(), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("selfcheck passed"));
    let broken = bitmodel(&["selfcheck", "--break-threshold", "round_trip"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stdout(&broken).contains("FAIL round_trip"));
}

#[test]
fn negative_fractions_are_accepted_as_values() {
    let prefix = scratch("neg");
    let p = prefix.to_str().unwrap();
    let o = bitmodel(&[
        "render", "circle", "--shape-center", "-1/2", "0", "--radius", "1/2", "--center", "-1/2", "0", "--n", "2",
        "--half-width", "1", "--out", p,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("pixels=81"));
}
