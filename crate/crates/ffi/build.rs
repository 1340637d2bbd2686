//! Regenerates `include/testrec.h` from the exported declarations so the
//! committed header can never drift from the compiled ABI.

use std::path::Path;

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("cargo sets CARGO_MANIFEST_DIR");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let header = Path::new(&crate_dir).join("include/testrec.h");
    let mut rendered = Vec::new();
    cbindgen::generate(&crate_dir)
        .expect("cbindgen generation failed")
        .write(&mut rendered);

    // Only touch the file when the content moved, so clean rebuilds stay
    // clean and incremental builds do not loop.
    if std::fs::read(&header).ok().as_deref() != Some(rendered.as_slice()) {
        std::fs::create_dir_all(header.parent().unwrap()).expect("create include dir");
        std::fs::write(&header, &rendered).expect("write header");
    }
}
