use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cycloscan::scan::io::{load_checkpoints, load_records};
use cycloscan::scan::Accumulator;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cycloscan"));
    c.env_remove("CYCLOSCAN_THREADS");
    c
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("job.conf");
    fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = "\
[curve]
label = small
a4 = 1
a6 = 1
conductor = 496

[scan]
x_max = 30000
m_max = 40
";

#[test]
fn verify_bundled_generic_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["verify"], &bundled("x3_x_1.conf"), tmp.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().count() >= 6);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn non_unit_residue_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}q = 6\na = 3\n"));
    let out = run(&["scan"], &cfg, &tmp.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 11"), "{err}");
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn siegel_without_s_is_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}[bounds]\nenvelopes = siegel\n"));
    let out = run(&["bounds"], &cfg, &tmp.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bounds.s"));

    let cfg = write_config(tmp.path(), &format!("{SMALL}[bounds]\nenvelopes = siegel\ns = 0\n"));
    let out = run(&["bounds"], &cfg, &tmp.path().join("o"));
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(tmp.path().join("o/bounds.csv")).unwrap();
    assert!(table.starts_with("x,siegel\n"));
}

#[test]
fn malformed_config_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{SMALL}shard = 2\n"));
    let out = run(&["scan"], &cfg, &tmp.path().join("o"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 10: unknown key `shard`"));
}

#[test]
fn scan_round_trip_and_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let dir = tmp.path().join("o");
    assert_eq!(run(&["scan"], &cfg, &dir).status.code(), Some(0));

    let records = load_records(&dir).unwrap();
    let snaps = load_checkpoints(&dir).unwrap();
    let mut acc = Accumulator::new(40);
    for r in &records {
        acc.add(r);
    }
    assert_eq!(snaps.last().unwrap().to_accumulator().unwrap(), acc);
    assert_eq!(acc.snapshot(30_000), *snaps.last().unwrap());

    // Running again resumes a finished job and changes nothing.
    let before = fs::read(dir.join("records.csv")).unwrap();
    assert_eq!(run(&["scan"], &cfg, &dir).status.code(), Some(0));
    assert_eq!(fs::read(dir.join("records.csv")).unwrap(), before);

    for cmd in ["constants", "compare", "export"] {
        let out = run(&[cmd], &cfg, &dir);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    for f in [
        "constants_cyclicity.json",
        "constants_exponent.json",
        "residuals_noncm_grh.csv",
        "envelope_exp_noncm_1.json",
        "export.tsv",
    ] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("constants_cyclicity.json")).unwrap())
            .unwrap();
    assert_eq!(json["backend"], "hybrid");
    assert_eq!(json["M"], 30);
    let tsv = fs::read_to_string(dir.join("export.tsv")).unwrap();
    assert_eq!(tsv.lines().next(), Some("x\tcount\tmain_term\tresidual\tenvelope"));
}

#[test]
fn thread_override_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run(&["scan", "--shards", "1"], &cfg, &a).status.code(), Some(0));
    let out = bin()
        .env("CYCLOSCAN_THREADS", "3")
        .args(["scan", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&b)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    for f in ["records.csv", "checkpoint_30000.json", "checkpoint_10000.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn halted_scan_resumes_to_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let whole = tmp.path().join("whole");
    let split = tmp.path().join("split");
    assert_eq!(run(&["scan"], &cfg, &whole).status.code(), Some(0));
    let out = run(&["scan", "--halt-at", "12345"], &cfg, &split);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("halted"));
    let out = run(&["constants"], &cfg, &split);
    assert_eq!(out.status.code(), Some(1), "incomplete data must not be used");
    assert_eq!(run(&["scan"], &cfg, &split).status.code(), Some(0));
    for f in ["records.csv", "checkpoint_20000.json", "checkpoint_30000.json"] {
        assert_eq!(fs::read(whole.join(f)).unwrap(), fs::read(split.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn checkpoint_flag_sets_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let dir = tmp.path().join("o");
    let out = run(&["scan", "--checkpoints", "1e3,5_000,3e4", "--m-max", "12"], &cfg, &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let xs: Vec<u64> = load_checkpoints(&dir).unwrap().iter().map(|s| s.x).collect();
    assert_eq!(xs, vec![1000, 5000, 30_000]);
    let out = run(&["scan", "--checkpoints", "1e3,oops"], &cfg, &tmp.path().join("p"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_backend_on_cm_curve_is_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["constants", "--backend", "exact"],
        &bundled("x3_1.conf"),
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no closed-form degree"));
}

#[test]
fn readme_config_example_parses() {
    let readme = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let section = &readme[readme.find("### Configuration").unwrap()..];
    let start = section.find("```\n").unwrap() + 4;
    let block = &section[start..start + section[start..].find("```").unwrap()];
    let job = cycloscan::cli::JobConfig::parse(block, &cycloscan::cli::Overrides::default()).unwrap();
    assert_eq!((job.scan.q, job.scan.a, job.scan.x_max), (4, 1, 1_000_000));
    assert_eq!(job.truncation, 30);
}
