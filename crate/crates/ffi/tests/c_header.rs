// SPDX-License-Identifier: Apache-2.0

//! Compiles a C program against the generated header and the static
//! library, then runs it on the mux design.

use std::path::{Path, PathBuf};
use std::process::Command;

fn staticlib() -> PathBuf {
    // Test binaries live in <target>/<profile>/deps; the uplifted static
    // library sits one level up.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    profile_dir.join("librtlsym_ffi.a")
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = staticlib();
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc is available");
    assert!(status.success());
    let corpus = manifest.join("../core/tests/corpus");
    let out = Command::new(&exe)
        .arg(corpus.join("mux.v"))
        .arg(corpus.join("mux.harness"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "tests=2 stmt=1000 branch=1000\n"
    );
}
