//! Runs WebAssembly guests against the syscall boundary.
//!
//! Every syscall is imported from the `supervisionary` namespace under its
//! lower snake-case name, takes one `i64` per argument slot and returns the
//! `i32` status.  The guest must export its linear memory as `memory` and a
//! nullary entry point `main`, optionally returning an `i32` exit status.

use crate::report::{ExitReport, STATUS_LINK, STATUS_TRAP};
use kernel::{GuestMemory, Kernel, Syscall, SyscallFrame};
use thiserror::Error;
use wasmi::{Caller, Config, Engine, Extern, FuncType, Linker, Module, Store, Val, ValType};

pub const NAMESPACE: &str = "supervisionary";
pub const ENTRY: &str = "main";
pub const MEMORY: &str = "memory";
/// Instruction budget after which a guest is stopped as a trap.
pub const DEFAULT_FUEL: u64 = 1 << 32;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("image is neither WebAssembly binary nor text: {0}")]
    Text(String),
    #[error("link failure: {0}")]
    Link(String),
}

/// The narrow seam between the host and a WebAssembly engine: instantiate an
/// image against a kernel and call its entry point.
pub trait GuestEngine {
    /// Runs `image` to completion.  Returns the kernel together with the exit
    /// status and a host-side error, if any.
    fn run(&self, image: &[u8], kernel: Kernel) -> GuestRun;
}

/// Outcome of one guest run.
pub struct GuestRun {
    pub kernel: Kernel,
    pub status: i32,
    pub error: Option<String>,
    /// The guest's linear memory when it stopped, empty if it never started.
    pub memory: Vec<u8>,
}

impl GuestRun {
    pub fn report(&self) -> ExitReport {
        ExitReport::new(self.status, self.error.clone(), &self.kernel)
    }
}

/// Accepts both the binary format and the text format.
pub fn load_image(bytes: &[u8]) -> Result<Vec<u8>, LoadError> {
    wat::parse_bytes(bytes)
        .map(|b| b.into_owned())
        .map_err(|e| LoadError::Text(e.to_string()))
}

/// Engine backed by the `wasmi` interpreter.
#[derive(Clone, Debug)]
pub struct Wasmi {
    pub fuel: u64,
}

impl Default for Wasmi {
    fn default() -> Self {
        Wasmi { fuel: DEFAULT_FUEL }
    }
}

struct HostState {
    kernel: Kernel,
}

fn link_failure(kernel: Kernel, error: String) -> GuestRun {
    GuestRun {
        kernel,
        status: STATUS_LINK,
        error: Some(error),
        memory: Vec::new(),
    }
}

fn syscall_import(linker: &mut Linker<HostState>, call: Syscall) -> Result<(), wasmi::errors::LinkerError> {
    let ty = FuncType::new(vec![ValType::I64; call.arity()], [ValType::I32]);
    linker.func_new(NAMESPACE, call.import_name(), ty, move |mut caller: Caller<'_, HostState>, params, results| {
        let args: Vec<u64> = params
            .iter()
            .map(|v| match v {
                Val::I64(x) => *x as u64,
                other => unreachable!("signature is all i64, got {other:?}"),
            })
            .collect();
        let memory = match caller.get_export(MEMORY) {
            Some(Extern::Memory(m)) => m,
            _ => return Err(wasmi::Error::new("guest does not export its memory")),
        };
        let (bytes, state) = memory.data_and_store_mut(&mut caller);
        let mut mem = GuestMemory::new(bytes);
        let status = state.kernel.dispatch(&SyscallFrame::new(call.number(), args), &mut mem);
        results[0] = Val::I32(status.code() as i32);
        Ok(())
    })?;
    Ok(())
}

impl GuestEngine for Wasmi {
    fn run(&self, image: &[u8], kernel: Kernel) -> GuestRun {
        let mut config = Config::default();
        config.consume_fuel(true);
        let engine = Engine::new(&config);
        let module = match load_image(image).and_then(|wasm| {
            Module::new(&engine, &wasm).map_err(|e| LoadError::Link(e.to_string()))
        }) {
            Ok(m) => m,
            Err(e) => return link_failure(kernel, e.to_string()),
        };
        let mut store = Store::new(&engine, HostState { kernel });
        store.set_fuel(self.fuel).expect("fuel metering is enabled");
        let mut linker = Linker::new(&engine);
        for call in Syscall::ALL {
            syscall_import(&mut linker, *call).expect("import names are unique");
        }
        let instance = match linker.instantiate_and_start(&mut store, &module) {
            Ok(i) => i,
            Err(e) => {
                let error = LoadError::Link(e.to_string()).to_string();
                return link_failure(store.into_data().kernel, error);
            }
        };
        let memory = instance.get_memory(&store, MEMORY);
        let Some(main) = instance.get_func(&store, ENTRY) else {
            let error = LoadError::Link(format!("no exported function `{ENTRY}`")).to_string();
            return link_failure(store.into_data().kernel, error);
        };
        let ty = main.ty(&store);
        if !ty.params().is_empty() || !matches!(ty.results(), [] | [ValType::I32]) {
            let error = LoadError::Link(format!("`{ENTRY}` must be nullary returning nothing or i32")).to_string();
            return link_failure(store.into_data().kernel, error);
        }
        let mut results = vec![Val::I32(0); ty.results().len()];
        let (status, error) = match main.call(&mut store, &[], &mut results) {
            Ok(()) => match results.first() {
                Some(Val::I32(code)) => (*code, None),
                _ => (0, None),
            },
            Err(e) => (STATUS_TRAP, Some(format!("guest trapped: {e}"))),
        };
        let memory = memory.map(|m| m.data(&store).to_vec()).unwrap_or_default();
        GuestRun {
            kernel: store.into_data().kernel,
            status,
            error,
            memory,
        }
    }
}

/// Runs `image` on the default engine.
pub fn run_guest(image: &[u8], kernel: Kernel) -> GuestRun {
    Wasmi::default().run(image, kernel)
}
