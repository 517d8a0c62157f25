use std::path::PathBuf;

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("manifest dir");
    let header = PathBuf::from(std::env::var("OUT_DIR").expect("out dir")).join("qsd_thermo.h");
    cbindgen::generate(&crate_dir)
        .expect("header generation")
        .write_to_file(&header);
    // lets tests locate the generated header
    println!("cargo:rustc-env=QSDT_HEADER_PATH={}", header.display());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
