use std::path::PathBuf;
use std::process::Command;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/locspec.h")).unwrap();
    for name in [
        "typedef struct LsData LsData",
        "typedef struct LsResult LsResult",
        "LS_STATUS_OK = 0",
        "LS_STATUS_INTERNAL = 6",
        "struct LsParams ls_params_default(void)",
        "enum LsStatus ls_search(const struct LsData *data",
        "void ls_result_free(struct LsResult *result)",
        "const char *ls_last_error_message(void)",
    ] {
        assert!(header.contains(name), "missing `{name}`");
    }
}

/// Builds the static library into `target/<profile>` and returns its path.
fn build_staticlib() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    // target/<profile>/deps/<test binary>
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let target_dir = profile_dir.parent().unwrap();
    let mut cmd = Command::new(env!("CARGO"));
    cmd.args(["build", "-p", "locspec-ffi", "--lib", "--target-dir"])
        .arg(target_dir);
    if profile_dir.file_name().unwrap() == "release" {
        cmd.arg("--release");
    }
    let status = cmd.status().expect("cargo should be runnable");
    assert!(status.success());
    let lib = profile_dir.join("liblocspec_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    lib
}

#[test]
fn c_program_links_and_runs() {
    let lib = build_staticlib();
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler (`cc`) is required");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(
        String::from_utf8_lossy(&run.stdout).trim(),
        format!("ok {}", env!("CARGO_PKG_VERSION"))
    );
}
