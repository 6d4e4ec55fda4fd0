//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().expect("test binary path");
    // target/<profile>/deps/<test binary>
    exe.parent().and_then(Path::parent).expect("profile directory").to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/d3net.h")).unwrap();
    for name in [
        "d3_network_new",
        "d3_network_free",
        "d3_neighbors",
        "d3_bfs_distance",
        "d3_header_for",
        "d3_simulate",
        "d3_metrics_summary",
        "d3_metrics_json",
        "d3_string_free",
        "d3_last_error",
        "D3_STATUS_PRECONDITION",
        "typedef struct D3Network D3Network",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("no C compiler on PATH; C link check not run");
        return;
    }
    let lib = profile_dir().join("libd3net_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "cc failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "smoke exited with {:?}", run.status);
    assert_eq!(
        String::from_utf8_lossy(&run.stdout).trim(),
        "rounds=32 delays=8 conflicts=0 deliveries=1024"
    );
}
