use std::path::Path;
use std::process::{Command, Output};

fn scholmig(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scholmig"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = scholmig(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned()
}

#[test]
fn stage_by_stage_run() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("spec.toml"),
        "n_researchers = 150\nseed = 8\nn_id_collisions = 2\n",
    )
    .unwrap();
    ok(
        d,
        &[
            "synth",
            "--spec",
            "spec.toml",
            "--out",
            "corpus.csv",
            "--truth",
            "truth.json",
        ],
    );
    ok(
        d,
        &[
            "disambiguate",
            "--in",
            "corpus.csv",
            "--out",
            "disamb.csv",
            "--report",
            "disamb.json",
        ],
    );
    ok(
        d,
        &[
            "mobility",
            "--in",
            "disamb.csv",
            "--focal",
            "DE",
            "--out",
            "events.csv,classes.csv",
        ],
    );
    ok(
        d,
        &[
            "classify",
            "--in",
            "disamb.csv",
            "--out",
            "assignments.csv,genders.csv",
        ],
    );
    ok(
        d,
        &[
            "metrics",
            "--in",
            "disamb.csv",
            "--events",
            "events.csv",
            "--classes",
            "classes.csv",
            "--assignments",
            "assignments.csv",
            "--focal",
            "DE",
            "--out-dir",
            "reports",
        ],
    );
    assert_eq!(
        first_line(&d.join("events.csv")),
        "researcher_id,year,origin,destination"
    );
    assert_eq!(
        first_line(&d.join("classes.csv")),
        "researcher_id,mobility_type,origin,destination"
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("disamb.json")).unwrap()).unwrap();
    assert!(report["n_suspicious"].as_u64().unwrap() >= 2);
    for f in [
        "flows_in.csv",
        "flows_out.csv",
        "nmr.csv",
        "citation_profiles.csv",
        "citation_groups_by_corridor.csv",
    ] {
        assert!(
            first_line(&d.join("reports").join(f)).starts_with("# run_manifest_sha256="),
            "{f}"
        );
    }
}

#[test]
fn country_model_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("spec.toml"),
        "n_researchers = 150\nseed = 2\nn_masked = 20\n",
    )
    .unwrap();
    ok(
        d,
        &[
            "synth",
            "--spec",
            "spec.toml",
            "--out",
            "corpus.csv",
            "--truth",
            "truth.json",
        ],
    );
    ok(
        d,
        &[
            "train-country",
            "--in",
            "corpus.csv",
            "--out",
            "model.bin",
            "--seed",
            "3",
        ],
    );
    ok(
        d,
        &[
            "fill-country",
            "--in",
            "corpus.csv",
            "--model",
            "model.bin",
            "--out",
            "filled.csv",
            "--report",
            "fill.json",
        ],
    );
    let fill: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("fill.json")).unwrap()).unwrap();
    assert_eq!(
        fill["filled"].as_u64().unwrap() + fill["unfillable"].as_u64().unwrap(),
        20
    );
}

#[test]
fn pipeline_reruns_match() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("run.toml"),
        "focal = \"DE\"\n[synth]\nn_researchers = 150\nseed = 4\n",
    )
    .unwrap();
    ok(d, &["pipeline", "--config", "run.toml", "--out-dir", "a"]);
    ok(d, &["pipeline", "--config", "run.toml", "--out-dir", "b"]);
    let names: Vec<_> = std::fs::read_dir(d.join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv") || n == "manifest.json")
        .collect();
    assert_eq!(names.len(), 9);
    for n in names {
        assert_eq!(
            std::fs::read(d.join("a").join(&n)).unwrap(),
            std::fs::read(d.join("b").join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(scholmig(d, &["--help"]).status.code(), Some(0));
    assert_eq!(scholmig(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        scholmig(d, &["mobility", "--in", "x.csv"]).status.code(),
        Some(1)
    );
    assert_eq!(
        scholmig(d, &["mobility", "--in", "x.csv", "--out", "only.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        scholmig(
            d,
            &["mobility", "--in", "missing.csv", "--out", "e.csv,c.csv"]
        )
        .status
        .code(),
        Some(2)
    );

    std::fs::write(d.join("bad.csv"), "record_id,author_id\n1,2\n").unwrap();
    let out = scholmig(d, &["mobility", "--in", "bad.csv", "--out", "e.csv,c.csv"]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    std::fs::write(d.join("run.toml"), "input = \"c.csv\"\nunknown_key = 1\n").unwrap();
    assert_eq!(
        scholmig(d, &["pipeline", "--config", "run.toml", "--out-dir", "o"])
            .status
            .code(),
        Some(1)
    );

    std::fs::write(d.join("run2.toml"), "input = \"nothere.csv\"\n").unwrap();
    let out = scholmig(d, &["pipeline", "--config", "run2.toml", "--out-dir", "o2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingest"));
    assert!(d.join("o2").join("STALE").exists());
}
