//! Keeps the hand-maintained C header honest: it must compile standalone
//! as C, and its declarations must cover exactly the exported symbols.

use std::path::PathBuf;
use std::process::Command;

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/congest_sim.h")
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("probe.c");
    std::fs::write(
        &main,
        format!(
            "#include \"{}\"\nint main(void) {{ return (int)CS_OK; }}\n",
            header_path().display()
        ),
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&main)
        .output()
        .expect("cc is available");
    assert!(
        out.status.success(),
        "header failed to compile:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn header_declares_every_exported_function() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    let lib = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs"),
    )
    .unwrap();
    let mut exported = Vec::new();
    for chunk in lib.split("#[no_mangle]").skip(1) {
        if let Some(pos) = chunk.find("fn ") {
            let rest = &chunk[pos + 3..];
            let name: String = rest
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            exported.push(name);
        }
    }
    assert!(!exported.is_empty());
    for name in exported {
        assert!(
            header.contains(&name),
            "header is missing declaration for {name}"
        );
    }
}
