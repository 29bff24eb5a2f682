use std::path::Path;
use std::process::{Command, Output};

use covcrit_harness::figures::{reproduce_figure, Fidelity, FigureId};
use covcrit_harness::manifest::Manifest;
use covcrit_harness::{Kind, ScenarioConfig};

fn covcrit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covcrit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn meanfield_defaults_run_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = covcrit(&["meanfield", "--set", "integration.t_end=10", "-o", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["trajectory.csv", "phase_plane.svg", "config.toml", "manifest.txt"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let mut text = ScenarioConfig::default_for(Kind::FixedPoints).to_toml();
    text.push_str("\nbogus_key = 3\n");
    std::fs::write(&cfg, text).unwrap();
    let o = covcrit(&["fixed-points", "-c", path(&cfg), "-o", path(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bogus_key"), "{}", stderr(&o));
}

#[test]
fn positive_w_ie_rate_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = covcrit(&[
        "regulate",
        "--set",
        "regulation.w_ie={ eps = 0.01, theta = 0.01 }",
        "-o",
        path(dir.path()),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("w_ie.eps must be <= 0"), "{}", stderr(&o));
}

#[test]
fn verb_and_config_kind_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, ScenarioConfig::default_for(Kind::Meanfield).to_toml()).unwrap();
    let o = covcrit(&["scan", "-c", path(&cfg)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn divergent_integration_exits_3_with_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = covcrit(&[
        "regulate",
        "--set",
        "integration.dt=1000",
        "--set",
        "integration.t_end=1e7",
        "--set",
        "integration.sample_every=1000",
        "-o",
        path(dir.path()),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(dir.path().join("trace.csv").exists());
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn exit_code_mapping() {
    use covcrit_harness::HarnessError;
    assert_eq!(HarnessError::Config(String::new()).exit_code(), 2);
    assert_eq!(HarnessError::Numerical(String::new()).exit_code(), 3);
    assert_eq!(HarnessError::CheckFailed(String::new()).exit_code(), 4);
    let o = covcrit(&["figure", "99"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_set_which_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    let mut base = ScenarioConfig::default_for(Kind::FixedPoints);
    base.params.w_ee = 13.0;
    base.output_dir = dir.path().join("from_file");
    std::fs::write(&cfg, base.to_toml()).unwrap();
    let out = dir.path().join("from_flag");
    let o = covcrit(&[
        "fixed-points",
        "-c",
        path(&cfg),
        "--set",
        "params.w_ee=15",
        "--set",
        &format!("output_dir=\"{}\"", path(&dir.path().join("from_set"))),
        "-o",
        path(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = Manifest::parse(&std::fs::read_to_string(out.join("manifest.txt")).unwrap()).unwrap();
    assert_eq!(m.get("fixed_points"), Some("5"));
    assert!(!dir.path().join("from_set").exists());
    let saved = ScenarioConfig::load(&out.join("config.toml"), &[]).unwrap();
    assert_eq!(saved.params.w_ee, 15.0);
}

#[test]
fn rerun_from_saved_config_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = covcrit(&["regulate", "--set", "integration.t_end=300", "-o", path(&a)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let b = dir.path().join("b");
    let o = covcrit(&["regulate", "-c", path(&a.join("config.toml")), "-o", path(&b)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "trace.csv"), read(&b, "trace.csv"));
    let ma = Manifest::parse(&String::from_utf8(read(&a, "manifest.txt")).unwrap()).unwrap();
    let mb = Manifest::parse(&String::from_utf8(read(&b, "manifest.txt")).unwrap()).unwrap();
    assert_eq!(ma.get("config_hash"), mb.get("config_hash"));
    assert_eq!(ma.get("tool_version"), Some(env!("CARGO_PKG_VERSION")));
}

#[test]
fn seeded_network_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        let o = covcrit(&["simulate", "--set", "integration.t_end=5", "--set", "seed=7", "-o", path(&d)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(d.join("network.csv")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn plot_verb_renders_known_csv_and_rejects_others() {
    let dir = tempfile::tempdir().unwrap();
    let o = covcrit(&["meanfield", "--set", "integration.t_end=5", "-o", path(dir.path())]);
    assert_eq!(code(&o), 0);
    let svg = dir.path().join("re.svg");
    let o = covcrit(&["plot", path(&dir.path().join("trajectory.csv")), "-o", path(&svg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\n").unwrap();
    let o = covcrit(&["plot", path(&bad)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn dry_run_prints_round_trippable_config() {
    let o = covcrit(&["scan", "--dry-run", "--set", "scan.x.cells=12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let cfg = ScenarioConfig::parse(&text, &[]).unwrap();
    assert_eq!(cfg.scan.unwrap().x.cells, 12);
}

#[test]
fn every_figure_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    for id in FigureId::ALL {
        let out = reproduce_figure(id, Fidelity::Quick, &dir.path().join(id.as_str())).unwrap();
        let has = |ext: &str| out.run.files.iter().any(|f| f.ends_with(ext));
        assert!(has(".csv") && has(".svg"), "figure {id}: {:?}", out.run.files);
        assert!(!out.checks.is_empty(), "figure {id} has no checks");
    }
}
