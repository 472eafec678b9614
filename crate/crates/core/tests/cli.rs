use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adrlite"))
}

const TINY: &str = r#"
name = "tiny"
strategies = ["adr-lite", "adr-max"]
replicates = 2
seed = 9
horizon_s = 20000.0

[sweep]
variable = "sigma"
values = [0.0, 7.08]

[network]
num_eds = 15
"#;

fn write_tiny(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("tiny.toml");
    fs::write(&p, TINY).unwrap();
    p
}

#[test]
fn run_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_tiny(tmp.path());
    let out = tmp.path().join("out");
    let status = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .args(["--jobs", "2", "--trace"])
        .status()
        .unwrap();
    assert!(status.success());

    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,strategy,dims,k_size,num_eds,sigma,replicate,seed,airtime_mode,packets_sent,packets_received,pdr,total_energy_j,ec_j,status"
    );
    assert_eq!(lines.count(), 2 * 2 * 2);
    assert!(results
        .lines()
        .skip(1)
        .all(|l| l.ends_with(",ok") && l.contains(",paper,")));

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("strategy,dims,k_size,sigma,replicates,pdr_mean,pdr_ci95"));
    assert_eq!(summary.lines().count(), 1 + 4);

    let plot = fs::read_to_string(out.join("tiny.dat")).unwrap();
    let data: Vec<_> = plot.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 2);
    assert!(data
        .iter()
        .all(|l| l.split_whitespace().count() == 1 + 2 * 2));
    assert!(plot.lines().any(|l| l.starts_with("# sigma adr-lite:pdr")));

    let echoed = fs::read_to_string(out.join("scenario.toml")).unwrap();
    let reloaded = adrlite::scenario::ScenarioSpec::from_toml_str(&echoed).unwrap();
    assert_eq!(
        reloaded,
        adrlite::scenario::ScenarioSpec::from_toml_str(TINY).unwrap()
    );
    assert!(!out.join("failures.txt").exists());

    let traces: Vec<_> = fs::read_dir(out.join("traces")).unwrap().collect();
    assert_eq!(traces.len(), 2 * 2 * 2 * 2);
    let tx =
        fs::read_to_string(out.join("traces/adr-lite_config-1_0_0_transmissions.csv")).unwrap();
    assert!(tx.starts_with(
        "attempt,time_s,ed_id,sf,tp_dbm,cf_mhz,cr,k_index,energy_j,rx_dbm,snr_db,outcome"
    ));
    let dec = fs::read_to_string(out.join("traces/adr-lite_config-1_0_0_decisions.csv")).unwrap();
    assert!(dec.starts_with("time_s,ed_id,r_index,branch,new_index,sf,tp_dbm"));
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_tiny(tmp.path());
    let run = |name: &str, jobs: &str| {
        let out = tmp.path().join(name);
        let ok = bin()
            .args(["run", "--scenario"])
            .arg(&scenario)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .status()
            .unwrap()
            .success();
        assert!(ok);
        fs::read(out.join("results.csv")).unwrap()
    };
    assert_eq!(run("a", "1"), run("b", "3"));
}

#[test]
fn validate_reports_field_and_legal_set() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(
        &bad,
        format!(
            "{TINY}\n[[dimensions]]\nsf = [7, 13]\ntp = [2]\ncf_mhz = [868.1]\ncr = [\"4/5\"]\n"
        ),
    )
    .unwrap();
    let out = bin()
        .args(["validate", "--scenario"])
        .arg(&bad)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("dimensions[0].sf"), "{err}");
    assert!(err.contains("{7, 8, 9, 10, 11, 12}"), "{err}");
}

#[test]
fn validate_prints_resolved_preset() {
    let out = bin()
        .args(["validate", "--scenario", "scenario2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mode = \"random-waypoint\""), "{text}");
    assert!(text.contains("horizon_s = 1036800.0"), "{text}");
}

#[test]
fn dump_space_lists_sorted_configs() {
    let out = bin()
        .args(["dump-space", "--dims", "config-4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 360);
    let energies: Vec<f64> = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(energies.windows(2).all(|w| w[0] <= w[1]));
    assert!(rows[0].starts_with("1,7,2,"));
}

#[test]
fn unknown_preset_or_file_fails() {
    let out = bin()
        .args([
            "run",
            "--scenario",
            "scenario9",
            "--out",
            "/tmp/never-written",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn shipped_example_scenario_validates() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/mobile_small.toml");
    let out = bin().args(["validate", "--scenario", path]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
