use std::path::PathBuf;
use std::process::{Command, Output};

use choreo_cli::{CheckReport, RunReport};
use choreo_core::conformance::{RealizabilityReport, Verdict};
use choreo_core::oracle::OracleReport;
use choreo_core::sca::parse_sca;
use choreo_core::synthesis::SynthesisStats;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn choreo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_choreo")).args(args).output().expect("run choreo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn oracle_on_prodcons_holds() {
    let o = choreo(&["oracle", &fixture("prodcons.pltl"), "--bound", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("mismatches: 0"));
}

#[test]
fn oracle_json_round_trips() {
    let o = choreo(&["--json", "oracle", &fixture("prodcons.pltl"), "--bound", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r: OracleReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.holds());
    assert_eq!(r.bound, 1);
    assert_eq!(r.models, 1);
}

#[test]
fn c1_is_not_realized() {
    let o = choreo(&["realizes", &fixture("c1_impl.sca"), &fixture("c1.cp"), "--bounds", "1,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness: b a"), "{}", stdout(&o));

    let o = choreo(&["--json", "realizes", &fixture("c1_impl.sca"), &fixture("c1.cp"), "--bounds", "1,2"]);
    let r: RealizabilityReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(matches!(&r.verdict, Verdict::ScaExtra(w) if w.len() == 2));
}

#[test]
fn c0_is_realized() {
    let o = choreo(&["realizes", &fixture("c0_impl.sca"), &fixture("c0.cp")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn stats_reports_couplings() {
    let o = choreo(&["--json", "stats", &fixture("prodcons.pltl")]);
    assert_eq!(o.status.code(), Some(0));
    let s: SynthesisStats = serde_json::from_slice(&o.stdout).unwrap();
    assert!(s.couplings > 0);
    assert_eq!(s.formula_size, 16);
    let text = stdout(&choreo(&["stats", &fixture("prodcons.pltl")]));
    assert!(text.starts_with(SynthesisStats::HEADER));
}

#[test]
fn synth_writes_a_loadable_system() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.sca");
    let out_s = out.to_string_lossy().into_owned();
    let o = choreo(&["synth", &fixture("prodcons.pltl"), "-o", &out_s]);
    assert_eq!(o.status.code(), Some(0));
    parse_sca(&std::fs::read_to_string(&out).unwrap()).unwrap();

    let o = choreo(&["--json", "run", &out_s, &fixture("buffer1.ld")]);
    assert_eq!(o.status.code(), Some(0));
    let r: RunReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.accepted && r.witness.is_some());
    let empty = dir.path().join("empty.ld");
    std::fs::write(&empty, "services: p c\nmessages: a\n").unwrap();
    assert_eq!(choreo(&["run", &out_s, &empty.to_string_lossy()]).status.code(), Some(1));
    assert_eq!(choreo(&["check", &fixture("prodcons.pltl"), &empty.to_string_lossy()]).status.code(), Some(1));
}

#[test]
fn check_accepts_buffer_diagrams() {
    for ld in ["buffer1.ld", "buffer2.ld", "buffer3.ld"] {
        let o = choreo(&["--json", "check", &fixture("prodcons.pltl"), &fixture(ld)]);
        assert_eq!(o.status.code(), Some(0), "{ld}");
        let r: CheckReport = serde_json::from_slice(&o.stdout).unwrap();
        assert!(r.models);
    }
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pltl");
    std::fs::write(&bad, "X (snd(a,c) @ p").unwrap();
    let o = choreo(&["parse", &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:"));
    assert_eq!(choreo(&["parse", "/no/such/file.pltl"]).status.code(), Some(2));
    assert_eq!(choreo(&["export-dot", &fixture("prodcons.pltl")]).status.code(), Some(2));
    assert_eq!(choreo(&["realizes", "x", "y", "--bounds", "3"]).status.code(), Some(2));
}

#[test]
fn export_dot_handles_each_format() {
    for f in ["prodcons.sca", "buffer2.ld", "c0.cp"] {
        let o = choreo(&["export-dot", &fixture(f)]);
        assert_eq!(o.status.code(), Some(0), "{f}");
        assert!(stdout(&o).starts_with("digraph"), "{f}");
    }
}
