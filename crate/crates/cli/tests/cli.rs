use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cryolink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cryolink"))
        .args(args)
        .env_remove("CRYOLINK_ATMOS_PATH")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples")
}

#[test]
fn occupancy_grid_goes_to_stdout_and_summary_to_stderr() {
    let out = cryolink(&["occupancy", "--frequency-hz", "5e9", "--temperature-k", "0.03", "300"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "frequency_hz,temperature_k,occupation_photons");
    assert_eq!(lines.len(), 3);
    let n300: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!((1249.0..=1251.0).contains(&n300));
    assert!(stderr(&out).contains("thermal occupation"));
    assert!(!text.contains("thermal occupation"));
}

#[test]
fn out_writes_records_and_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("nested/link");
    let out = cryolink(&[
        "linkbudget",
        "--wavelength-m",
        "8.1e-7",
        "--distance-km",
        "1000",
        "--tx-aperture-m",
        "1",
        "--rx-aperture-m",
        "1",
        "--absorption-path-km",
        "10",
        "--format",
        "json",
        "--out",
        stem.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let json = fs::read_to_string(stem.with_extension("json")).unwrap();
    assert!(json.trim_start().starts_with('['));
    assert!(json.contains("\"total_loss_db\""));
    let summary = fs::read_to_string(stem.with_extension("summary.txt")).unwrap();
    assert!(summary.contains("65-82 dB"));
}

#[test]
fn table1_passes_its_self_check() {
    let out = cryolink(&["table1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 7);
    assert!(stderr(&out).contains("PASS"));
}

#[test]
fn run_reproduces_golden_report() {
    let golden = examples().join("golden");
    for name in ["inter_fridge", "intra_fridge_teleport", "open_air_satellite", "qi_background_sweep"] {
        let config = examples().join(format!("{name}.toml"));
        let out = cryolink(&["run", config.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        assert_eq!(stdout(&out), fs::read_to_string(golden.join(format!("{name}.csv"))).unwrap());
        assert_eq!(stderr(&out), fs::read_to_string(golden.join(format!("{name}.summary.txt"))).unwrap());
    }
}

const TYPO_CONFIG: &str = r#"
[source]
kind = "vacuum"

[[channel]]
kind = "loss"
mode = 0
loss_db = 3.0
bath_photons = 0.5
frequency_ghz = 5.0

[metric]
kind = "occupation"
mode = 0
"#;

#[test]
fn unknown_keys_fail_in_strict_mode_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.toml");
    fs::write(&path, TYPO_CONFIG).unwrap();
    let strict = cryolink(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&strict), 2);
    assert!(stderr(&strict).contains("channel[0].frequency_ghz"), "{}", stderr(&strict));
    let lenient = cryolink(&["--strict", "false", "run", path.to_str().unwrap()]);
    assert_eq!(code(&lenient), 0, "{}", stderr(&lenient));
    assert!(stderr(&lenient).contains("ignoring unknown keys"));
}

#[test]
fn exit_codes_follow_error_class() {
    // config: unreadable scenario, bad format, bad flag value
    assert_eq!(code(&cryolink(&["run", "/no/such/scenario.toml"])), 2);
    assert_eq!(code(&cryolink(&["--format", "xml", "table1"])), 2);
    assert_eq!(code(&cryolink(&["teleport"])), 2);
    assert_eq!(code(&cryolink(&["occupancy", "--frequency-hz", "0", "--temperature-k", "4"])), 2);
    // physics: frequency outside the atmosphere table, truncated Fock space
    let far_ir = cryolink(&[
        "linkbudget",
        "--wavelength-m",
        "1e-9",
        "--distance-km",
        "1",
        "--tx-aperture-m",
        "1",
        "--rx-aperture-m",
        "1",
    ]);
    assert_eq!(code(&far_ir), 3, "{}", stderr(&far_ir));
    let oracle = cryolink(&[
        "illuminate",
        "--reflectivity-ratio",
        "0.01",
        "--signal-photons",
        "0.01",
        "--background-photons",
        "20",
        "--oracle",
        "--fock-cutoff",
        "10",
    ]);
    assert_eq!(code(&oracle), 3, "{}", stderr(&oracle));
    assert!(stderr(&oracle).contains("Fock cutoff"));
}

#[test]
fn attenuation_emits_requested_band() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("atm.csv");
    fs::write(&csv, "frequency_ghz,attenuation_db_per_km\n1,0.005\n5,0.009\n10,0.012\n60,15\n").unwrap();
    let out = cryolink(&["attenuation", csv.to_str().unwrap(), "--min-ghz", "2", "--max-ghz", "20"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("frequency_ghz,attenuation_db_per_km\n"));
    assert!(text.contains("\n5.0,0.009\n"));
    assert!(!text.contains("60.0"));
    let empty = cryolink(&["attenuation", csv.to_str().unwrap(), "--min-ghz", "70", "--max-ghz", "80"]);
    assert_ne!(code(&empty), 0);
}

#[test]
fn teleport_vacuum_resource_sits_at_classical_limit() {
    let out = cryolink(&["teleport", "--squeezing-nepers", "0"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let fidelity: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((fidelity - 0.5).abs() < 1e-9);
}

#[test]
fn waveguide_models_agree() {
    let args = ["waveguide", "--frequency-hz", "5e9", "--segment", "0.002:100:0.01", "--segment", "0.005:100:4"];
    let seg = cryolink(&args);
    let mut cont_args = args.to_vec();
    cont_args.push("--continuous");
    let cont = cryolink(&cont_args);
    assert_eq!(code(&seg), 0, "{}", stderr(&seg));
    assert_eq!(code(&cont), 0, "{}", stderr(&cont));
    let pick = |o: &Output, key: &str| -> f64 {
        let text = stdout(o);
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        row[header.iter().position(|h| *h == key).unwrap()].parse().unwrap()
    };
    for key in ["transmissivity_ratio", "bath_photons", "log_negativity_ebit"] {
        let (a, b) = (pick(&seg, key), pick(&cont, key));
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{key}: {a} vs {b}");
    }
}
