#![allow(dead_code)]

use host::{run_guest, run_script, GuestRun};
use kernel::driver::Driver;
use kernel::{Kernel, Vfs};
use std::path::PathBuf;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn read(rel: &str) -> Vec<u8> {
    std::fs::read(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn image_vfs() -> Vfs {
    Vfs::from_manifest(&String::from_utf8(read("fs/image.json")).unwrap()).unwrap()
}

pub fn kernel() -> Kernel {
    Kernel::with_vfs(image_vfs())
}

pub fn guest(name: &str) -> GuestRun {
    run_guest(&read(&format!("guests/{name}.wat")), kernel())
}

pub fn script(name: &str) -> Driver {
    let text = String::from_utf8(read(&format!("proofs/{name}.svs"))).unwrap();
    let mut d = Driver::new(kernel());
    if let Err(f) = run_script(&text, &mut d) {
        panic!("{name}: {}\n{}", f.error, f.transcript);
    }
    d
}

/// Syscall numbers and statuses, ignoring addresses, which differ between a
/// guest's memory layout and the harness's.
pub fn shape(kernel: &Kernel) -> Vec<(u32, u32)> {
    kernel.trace().iter().map(|e| (e.number, e.status)).collect()
}

pub const PAIRED: [&str; 3] = ["refl_truth", "open_read", "jail_bottom"];
