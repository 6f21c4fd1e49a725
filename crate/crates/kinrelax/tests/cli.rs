//! End-to-end checks of the command-line front end: exit codes, artifact
//! emission and output determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_kinrelax")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn run_produces_reports_and_is_deterministic() {
    let dir = std::env::temp_dir().join(format!("kinrelax_cli_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("gaussian.cfg");
    let out1 = dir.join("out1");
    let out2 = dir.join("out2");
    write(
        &cfg,
        &format!(
            "case = gaussian_c\nn = 10, 20\norder = 2\nthreads = 1\nout_dir = {}\n",
            out1.display()
        ),
    );
    let status = Command::new(bin()).args(["run"]).arg(&cfg).status().unwrap();
    assert!(status.success());
    let csv1 = std::fs::read(out1.join("convergence_gaussian_c.csv")).unwrap();
    assert!(!csv1.is_empty());

    // identical configuration, different thread count: bit-identical CSV
    write(
        &cfg,
        &format!(
            "case = gaussian_c\nn = 10, 20\norder = 2\nthreads = 2\nout_dir = {}\n",
            out2.display()
        ),
    );
    let status = Command::new(bin()).args(["run"]).arg(&cfg).status().unwrap();
    assert!(status.success());
    let csv2 = std::fs::read(out2.join("convergence_gaussian_c.csv")).unwrap();
    assert_eq!(csv1, csv2, "CSV output must not depend on threading");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = std::env::temp_dir().join(format!("kinrelax_cli_bad_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");

    write(&cfg, "case = gaussian_a\norder = 3\n");
    let status = Command::new(bin()).args(["run"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));

    write(&cfg, "case = gaussian_a\nbogus_key = 1\n");
    let status = Command::new(bin()).args(["run"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));

    write(&cfg, "no case here\n");
    let status = Command::new(bin()).args(["run"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn stability_table_subcommand_writes_csv() {
    let dir = std::env::temp_dir().join(format!("kinrelax_cli_stab_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let status = Command::new(bin())
        .args(["stability-table", "--out-dir"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.join("stability_table.csv")).unwrap();
    assert!(csv.starts_with("time_order,spatial_order,iterations,critical_lambda"));
    // 3 first-order rows + 2 x 3 x 6 DeC rows
    assert_eq!(csv.lines().count(), 1 + 39);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn convergence_subcommand_with_grid_range() {
    let dir = std::env::temp_dir().join(format!("kinrelax_cli_conv_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let status = Command::new(bin())
        .args(["convergence", "gaussian_c", "--orders", "1", "--grids", "10..20", "--out-dir"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.join("convergence_gaussian_c.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3); // header + N=10 + N=20
    assert!(csv.contains("gaussian_c,1,10,"));
    std::fs::remove_dir_all(&dir).ok();
}
