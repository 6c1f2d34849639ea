//! End-to-end behaviour of the experiment harness and the `ptsim` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command as Process;

use pts_ofdm::harness::runs::{run_ccdf_vs_n, run_time_domain};
use pts_ofdm::harness::{execute, with_workers, Command, ExperimentConfig};

fn small(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::parse_str(
        "# reduced sizes for tests
n_subcarriers = 64
fft_points = 512
cp_time_s = 0.003
n_list = 16, 64
oversampling_n = 32
n_trials = 300
pts_trials = 40
m_list = 1, 2, 4, 8
roundtrip_frames = 12
channel_taps = 0:1:0, 2m:0.4:0.3
seed = 99
",
    )
    .unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

fn read_all(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    for command in Command::ALL {
        let mut reference = None;
        for workers in [1, 2, 4] {
            let dir = tmp.path().join(format!("{command}-{workers}"));
            let cfg = small(&dir);
            with_workers(Some(workers), || execute(command, &cfg)).unwrap().unwrap();
            let files = read_all(&dir);
            assert!(files.contains_key("manifest.json"));
            match &reference {
                None => reference = Some(files),
                Some(r) => {
                    assert_eq!(r.keys().collect::<Vec<_>>(), files.keys().collect::<Vec<_>>());
                    for (name, bytes) in r {
                        assert!(bytes == &files[name], "{command}: {name} differs with {workers} workers");
                    }
                }
            }
        }
    }
}

#[test]
fn manifest_describes_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(tmp.path());
    let outcome = execute(Command::Ccdf, &cfg).unwrap();
    let m = &outcome.manifest;
    assert_eq!(m.command, "ccdf");
    assert_eq!(m.seed, 99);
    assert_eq!(m.config_hash, cfg.hash());
    assert_eq!(m.ccdf_level, 1e-3);
    let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
    for n in [16, 64] {
        assert!(names.contains(&format!("ccdf_n{n}.csv").as_str()));
        assert!(names.contains(&format!("ccdf_theory_n{n}.csv").as_str()));
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("ccdf_n64.json")).unwrap()).unwrap();
    assert_eq!(sidecar["L"], 4);
    assert_eq!(sidecar["n_trials"], 300);
    assert_eq!(sidecar["scheme"], "QPSK");
    let csv = fs::read_to_string(tmp.path().join("ccdf_n64.csv")).unwrap();
    assert!(csv.starts_with("threshold_db,probability\n0.0000,"));

    // The manifest's config text reproduces the same run.
    let mut rerun = ExperimentConfig::default();
    for (k, v) in &m.config {
        rerun.set(k, v).unwrap();
    }
    assert_eq!(rerun.hash(), cfg.hash());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    execute(Command::PtsSweep, &small(&a)).unwrap();
    execute(Command::PtsSweep, &small(&b)).unwrap();
    assert!(read_all(&a) == read_all(&b));
    let mut other = small(&tmp.path().join("c"));
    other.seed = 100;
    execute(Command::PtsSweep, &other).unwrap();
    assert_ne!(read_all(&a)["pts_m4.csv"], read_all(&tmp.path().join("c"))["pts_m4.csv"]);
}

#[test]
fn trial_k_is_reproducible_in_isolation() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(tmp.path());
    cfg.n_list = vec![64];
    let full = run_ccdf_vs_n(&cfg).unwrap();
    cfg.n_trials = 10;
    let head = run_ccdf_vs_n(&cfg).unwrap();
    assert_eq!(&full.entries[0].papr_db[..10], &head.entries[0].papr_db[..]);
}

#[test]
fn default_time_domain_papr_is_typical() {
    let cfg = ExperimentConfig::default();
    let run = run_time_domain(&cfg).unwrap();
    assert_eq!(run.magnitudes.len(), 8192);
    assert!((8.0..13.0).contains(&run.papr.db), "{}", run.papr.db);
    assert_eq!(run, run_time_domain(&cfg).unwrap());
}

#[test]
fn config_file_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("exp.cfg");
    fs::write(&path, "seed = 5\nm_list = 1,2\n").unwrap();
    let cfg = ExperimentConfig::from_file(&path).unwrap();
    assert_eq!((cfg.seed, cfg.m_list.clone()), (5, vec![1, 2]));
    for bad in ["seed 5", "seed = x", "sede = 5", "seed = 1\nseed = 1", "partition = diagonal"] {
        assert_eq!(ExperimentConfig::parse_str(bad).unwrap_err().exit_code(), 1, "{bad}");
    }
    let missing = ExperimentConfig::from_file(&tmp.path().join("nope.cfg")).unwrap_err();
    assert_eq!(missing.exit_code(), 3);
}

fn ptsim(args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_ptsim")).args(args).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.cfg");
    fs::write(&cfg, small(tmp.path()).to_text()).unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();

    let (code, text) = ptsim(&["power-report", "--config", cfg, "--seed", "3", "--out", &out("p")]);
    assert_eq!(code, 0, "{text}");
    let manifest = fs::read_to_string(tmp.path().join("p/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 3"));

    let (code, text) = ptsim(&["roundtrip", "--config", cfg, "--seed", "1", "--out", &out("r")]);
    assert_eq!(code, 0, "{text}");
    let (code, text) = ptsim(&[
        "roundtrip", "--config", cfg, "--seed", "1", "--out", &out("rc"), "--set", "corrupt_side_info=true",
    ]);
    assert_eq!(code, 4, "{text}");

    let (code, _) = ptsim(&["ccdf", "--config", cfg, "--seed", "1", "--out", &out("c"), "--set", "n_trials=0"]);
    assert_eq!(code, 1);
    let (code, _) = ptsim(&["ccdf", "--config", cfg, "--seed", "1", "--out", &out("c"), "--set", "bogus=1"]);
    assert_eq!(code, 1);
    let (code, _) = ptsim(&[
        "pts-sweep", "--config", cfg, "--seed", "1", "--out", &out("s"), "--set", "phase_factors=4", "--set",
        "search_budget=100",
    ]);
    assert_eq!(code, 2);
    let (code, _) = ptsim(&["ccdf", "--config", &out("missing.cfg"), "--seed", "1", "--out", &out("c")]);
    assert_eq!(code, 3);
    let (code, _) = ptsim(&["roundtrip", "--config", cfg, "--set", "channel_taps=0:1:0,5m:0.5:0", "--out", &out("x")]);
    assert_eq!(code, 1);
}

#[test]
fn iterative_fallback_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(tmp.path());
    cfg.search_budget = 10;
    let outcome = execute(Command::PtsSweep, &cfg).unwrap();
    assert!(outcome.manifest.notes.iter().any(|n| n.contains("M=8") && n.contains("iterative")));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("pts_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"][3]["search"], "iterative-binary");
    assert_eq!(summary["rows"][2]["search"], "exhaustive");
}
