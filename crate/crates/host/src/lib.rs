//! Hosts for the supervisionary kernel: a WebAssembly guest runner and a
//! script harness that issue the same syscalls.

pub mod guest;
pub mod report;
pub mod script;

pub use guest::{load_image, run_guest, GuestEngine, GuestRun, LoadError, Wasmi};
pub use report::{ExitReport, ObligationReport};
pub use script::{run_script, Script, ScriptError, ScriptErrorKind, ScriptFailure, Transcript};
