//! Compiles a small C program against the generated header and, when the
//! static library is present, links and runs it. Skipped without `cc`.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "nhdyn.h"

int main(void) {
    NhdynComplex e[4] = {{0, 0}, {1, 0}, {0, 0}, {0, 0}};
    NhdynMatrix *a = NULL, *x = NULL;
    if (nhdyn_matrix_new(2, 2, e, &a) != NHDYN_STATUS_OK) return 1;
    if (nhdyn_expm(a, &x) != NHDYN_STATUS_OK) return 2;
    NhdynComplex out[4];
    if (nhdyn_matrix_copy(x, out, 4) != NHDYN_STATUS_OK) return 3;
    if (fabs(out[1].re - 1.0) > 1e-14 || fabs(out[0].re - 1.0) > 1e-14) return 4;
    double n = 0;
    if (nhdyn_op_norm(NULL, &n) != NHDYN_STATUS_NULL_POINTER || nhdyn_last_error() == NULL) return 5;
    nhdyn_matrix_free(x);
    nhdyn_matrix_free(a);
    printf("ok %s\n", nhdyn_version());
    return 0;
}
"#;

fn have_cc() -> bool {
    Command::new("cc")
        .arg("--version")
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/c_header-xxxx -> target/<profile>/libnhdyn.a
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libnhdyn.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_compiles_and_links() {
    if !have_cc() {
        eprintln!("cc not found, skipping");
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let mut cc = Command::new("cc");
    cc.args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src);
    match static_lib() {
        Some(lib) => {
            let exe = dir.path().join("smoke");
            let out = cc
                .arg(&lib)
                .args(["-lpthread", "-ldl", "-lm", "-o"])
                .arg(&exe)
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            let run = Command::new(&exe).output().unwrap();
            assert!(run.status.success(), "exit {:?}", run.status.code());
            assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
        }
        None => {
            let out = cc.arg("-fsyntax-only").output().unwrap();
            assert!(
                out.status.success(),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
}
