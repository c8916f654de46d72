use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fermitrap"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let p = dir.join("run.toml");
        fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.output().unwrap()
}

const TF: &str = "[potential]\nkind = \"harmonic_plus_one\"\n[sweep]\ng = [0.1]\n";

#[test]
fn missing_potential_exits_2_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["tf"], Some("[interaction]\nshape = \"step\"\n"), tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_key_and_bad_jobs_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["tf"], Some("[potential]\nkind = \"coulomb\"\n"), tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["budget"], Some("nonsense = 1\n"), tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["budget", "--jobs", "0"], None, tmp.path()).status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn tf_output_is_byte_identical_and_thread_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let read = |sub: &str, jobs: &str| {
        let dir = tmp.path().join(sub);
        fs::create_dir_all(&dir).unwrap();
        let out = run(&["tf", "--jobs", jobs], Some(TF), &dir);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<_> = fs::read_dir(dir.join("out")).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    let a = read("a", "1");
    let b = read("b", "4");
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn csv_header_and_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["budget", "--json"], None, tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("out/budget.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# fermitrap "));
    assert_eq!(lines.next().unwrap(), "# command: budget");
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("# formulas: "));
    let columns = lines.next().unwrap();
    assert!(columns.split(',').count() > 3);
    for row in lines {
        assert_eq!(row.split(',').count(), columns.split(',').count());
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("out/budget.json")).unwrap()).unwrap();
    assert_eq!(json["command"], "budget");
}

#[test]
fn spectra_levels_follow_the_oscillator_ladder() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["spectra"], Some("[spectra]\nhbar = 1.0\nlambda_max = 9.5\n"), tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("out/harmonic_levels.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (n, r) in rows.iter().enumerate() {
        let e: f64 = r[1].parse().unwrap();
        let d: u64 = r[2].parse().unwrap();
        assert_eq!(e, (2 * n + 3) as f64);
        assert_eq!(d, ((n + 1) * (n + 2) / 2) as u64);
    }
}
