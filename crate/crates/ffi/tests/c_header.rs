//! Compiles and runs a C program against the generated header and the
//! shared library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "pca_ffi.h"

int main(void) {
    PcaGraph *g = NULL;
    if (pca_graph_torus(10, 4, false, &g) != PCA_STATUS_OK) return 1;
    double rho[51];
    if (pca_run(g, 0.1, NAN, 50, 3, rho, 51) != PCA_STATUS_OK) return 2;
    pca_graph_free(g);
    PcaMapParams params = { PCA_MAP_KIND_GRID, 0, 5, 0.0, 0.0, false };
    double pc = 0.0;
    if (pca_critical_point(&params, 1e-3, 0.5, 1e-9, &pc) != PCA_STATUS_OK) return 3;
    if (fabs(pc - 7.0 / 30.0) > 1e-6) return 4;
    if (pca_graph_torus(4, 5, false, &g) != PCA_STATUS_CONFIG) return 5;
    char msg[128];
    if (pca_last_error_message(msg, sizeof msg) == 0) return 6;
    printf("%.6f %s\n", pc, msg);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let lib_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    assert!(lib_dir.join("libpca_ffi.so").exists() || lib_dir.join("libpca_ffi.dylib").exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(&src)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-lpca_ffi")
        .arg("-lm")
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("0.233333"), "{text}");
    assert!(text.contains("gamma"), "{text}");
}
