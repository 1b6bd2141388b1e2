use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn rydcool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydcool")).args(args).output().expect("binary runs")
}

fn config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn run_with(cfg: &Path, cmd: &str, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    rydcool(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows as floats (non-numeric cells become NaN).
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn summary(csv: &str, key: &str) -> String {
    let prefix = format!("# {key} ");
    csv.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in summary:\n{csv}"))
        .to_string()
}

#[test]
fn c6map_single_cell_reproduces_quoted_c6() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[c6map]\npair_type SS\nn 60 60\ndn 0 0\n");
    let out = run_with(&cfg, "c6map", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# rydcool ") && lines[0].contains("config-sha256"));
    assert_eq!(lines[1], "n,dn,pair_type,c6_GHz_um6,deviation");
    assert_eq!(lines.len(), 3);
    let cells: Vec<_> = lines[2].split(',').collect();
    assert_eq!(&cells[..3], ["60", "0", "SS"]);
    let c6: f64 = cells[3].parse().unwrap();
    assert!((c6 / 138.5 - 1.0).abs() < 0.1, "C6 = {c6}");
}

#[test]
fn c6map_empty_range_is_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[c6map]\nn 61 60\n");
    let out = run_with(&cfg, "c6map", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().nth(1), Some("n,dn,pair_type,c6_GHz_um6,deviation"));
}

#[test]
fn missing_species_file_names_the_path() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[species]\nfile no_such_species.dat\n");
    let out = run_with(&cfg, "c6map", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no_such_species.dat"), "{}", stderr(&out));
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let out = rydcool(&["swap", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/nonexistent/run.cfg"));
}

#[test]
fn malformed_config_reports_line() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[swap]\nn_pairs 3\nomega_z 15\n");
    let out = run_with(&cfg, "swap", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn negative_time_grid_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[swap]\nt_end -0.5\n");
    let out = run_with(&cfg, "swap", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("non-negative"), "{}", stderr(&out));
}

#[test]
fn unstable_chain_is_flagged_in_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[swap]\nn_pairs 4\nomega_ratio 1\npoints 11\n");
    let out = run_with(&cfg, "swap", &[]);
    // an unstable but well-defined run still produces a trace
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(summary(&stdout(&out), "stable"), "false");
}

#[test]
fn swap_single_pair_is_the_two_atom_exchange() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[swap]\nn_pairs 1\nmodel rwa\nnbar 20 0\nt_end 3.14159265358979\npoints 31\n");
    let out = run_with(&cfg, "swap", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for r in rows(&text) {
        let (t, d, a) = (r[0], r[1], r[2]);
        assert!((d - 20.0 * t.cos().powi(2)).abs() < 1e-9, "t = {t}: {d}");
        assert!((a - 20.0 * t.sin().powi(2)).abs() < 1e-9, "t = {t}: {a}");
    }
    let eff: f64 = summary(&text, "efficiency_at_ts").parse().unwrap();
    assert!((eff - 1.0).abs() < 1e-9);
}

#[test]
fn swap_default_chain_reaches_98_percent() {
    let out = rydcool(&["swap"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1), Some("t_in_units_of_invG,nbar_data,nbar_aux"));
    let eff: f64 = summary(&text, "efficiency_at_ts").parse().unwrap();
    assert!((eff - 0.98).abs() < 0.01, "efficiency {eff}");
    let last = rows(&text).pop().unwrap();
    assert!((last[0] - FRAC_PI_2).abs() < 1e-10);
}

#[test]
fn swap_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[swap]\nn_pairs 6\npoints 21\n");
    let a = run_with(&cfg, "swap", &["--threads", "1"]);
    let b = run_with(&cfg, "swap", &["--threads", "4"]);
    let c = run_with(&cfg, "swap", &[]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn dress_scan_is_byte_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[dress]\natom1_plus 100 MHz -200 MHz\natom1_minus 80 MHz -220 MHz\natom2_plus 90MHz -250MHz\n");
    let a = run_with(&cfg, "dress", &["--threads", "1"]);
    let b = run_with(&cfg, "dress", &["--threads", "3"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    // atom 2 has no minus drive, so those columns stay empty
    let row = stdout(&a).lines().nth(2).unwrap().to_string();
    let cells: Vec<_> = row.split(',').collect();
    assert!(cells[2].is_empty() && cells[4].is_empty() && !cells[1].is_empty() && !cells[3].is_empty());
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[swap]\nn_pairs 2\npoints 5\n");
    let dest = dir.path().join("trace.csv");
    let a = run_with(&cfg, "swap", &["--out", dest.to_str().unwrap()]);
    assert!(a.status.success());
    assert!(a.stdout.is_empty());
    let b = run_with(&cfg, "swap", &[]);
    assert_eq!(std::fs::read(&dest).unwrap(), b.stdout);
}

#[test]
fn config_hash_tracks_config_bytes() {
    let dir = TempDir::new().unwrap();
    let a = stdout(&run_with(&config(&dir, "[swap]\nn_pairs 2\npoints 3\n"), "swap", &[]));
    let b = stdout(&run_with(&config(&dir, "[swap]\nn_pairs 2\npoints 3\n# comment\n"), "swap", &[]));
    assert_ne!(a.lines().next(), b.lines().next());
    assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn dress_identical_drives_give_equal_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[dress]\ndrive 100 MHz -200 MHz\nr_over_rc 1.5 10 20\n");
    let out = run_with(&cfg, "dress", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(rows(&text).len(), 20);
    for r in rows(&text) {
        for v in &r[2..5] {
            assert!((v - r[1]).abs() <= 1e-12 * r[1].abs(), "{r:?}");
        }
    }
    assert_eq!(summary(&text, "state_insensitive"), "true");
}

#[test]
fn dress_weak_dressing_matches_the_oracle_within_one_percent() {
    let dir = TempDir::new().unwrap();
    // ε = Ω/2Δ = 0.05
    let cfg = config(&dir, "[dress]\ndrive 20 MHz -200 MHz\nr_over_rc 1.5 10 20\n");
    let out = run_with(&cfg, "dress", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for r in rows(&text) {
        for k in 1..5 {
            let (v, exact) = (r[k], r[k + 4]);
            assert!(((v - exact) / exact).abs() <= 0.01, "r = {} um: perturbative {v}, exact {exact}", r[0]);
        }
    }
}

#[test]
fn dress_single_point_grid_gives_one_row() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[dress]\nr 8 8 1\n");
    let out = run_with(&cfg, "dress", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], 8.0);
}

#[test]
fn pulse_csv_columns_and_zero_amplitude_areas() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[pulse]\na_max 0 MHz\nsamples 201\n");
    let out = run_with(&cfg, "pulse", &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1), Some("t,y1,y2,Gx,Gy,Gz,alpha_dot_ratio"));
    assert_eq!(rows(&text).len(), 201);
    for axis in ["x", "y", "z"] {
        let a: f64 = summary(&text, &format!("area_{axis}_over_half_pi")).parse().unwrap();
        assert_eq!(a, 0.0);
    }
}

#[test]
fn pulse_worked_parameters_give_quarter_turn_areas() {
    let out = rydcool(&["pulse"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for axis in ["x", "y", "z"] {
        let a: f64 = summary(&text, &format!("area_{axis}_over_half_pi")).parse().unwrap();
        assert!((0.95..=1.05).contains(&a.abs()), "axis {axis}: area/(π/2) = {a}");
    }
}

#[test]
fn pulse_optimizer_echoes_spec_in_json() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "[pulse]\noptimize true\nmax_evaluations 12\nsamples 401\n");
    let out = run_with(&cfg, "pulse", &["--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = &v["summary"]["optimized_pulse"];
    for k in ["a_max_MHz_um6", "sigma_us", "t0_us"] {
        assert!(p[k].as_f64().is_some_and(|x| x > 0.0), "{p}");
    }
    assert_eq!(v["summary"]["pulse"], *p);
    assert_eq!(v["columns"].as_array().unwrap().len(), 7);
}

#[test]
fn selftest_fast_skips_the_map_and_passes() {
    let out = rydcool(&["selftest", "--fast"]);
    let text = stdout(&out);
    assert!(!text.contains("[trends]"), "{text}");
    assert!(text.contains("[1]") && text.contains("[9]"));
    let failed: Vec<_> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert!(failed.is_empty(), "failing criteria:\n{}", failed.join("\n"));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn selftest_with_corrupted_species_names_failing_criteria() {
    let dir = TempDir::new().unwrap();
    let bundled = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/rb87.species")).unwrap();
    let line = bundled.lines().position(|l| l.starts_with("mass_amu")).unwrap() + 1;
    let corrupted: Vec<String> = bundled
        .lines()
        .map(|l| if l.starts_with("mass_amu") { "mass_amu not_a_number".to_string() } else { l.to_string() })
        .collect();
    std::fs::write(dir.path().join("bad.dat"), corrupted.join("\n")).unwrap();
    let cfg = config(&dir, "[species]\nfile bad.dat\n");
    let out = run_with(&cfg, "selftest", &["--fast"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("FAIL [1] C6 reproduction: species data unavailable"), "{text}");
    assert!(text.contains(&format!("line {line}")), "{text}");
}
