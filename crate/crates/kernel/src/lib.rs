pub mod abi;
pub mod arena;
mod boot;
mod deep;
pub mod driver;
pub mod dump;
pub mod error;
pub mod handle;
pub mod kernel;
pub mod policy;
mod rewrite;
pub mod sexpr;
pub mod syntax;
pub mod term;
pub mod theorem;
pub mod types;
pub mod vfs;

pub use abi::{GuestMemory, Param, Syscall, SyscallFrame};
pub use arena::{Arena, Checkpoint, Heaps, KernelObject, Prelude};
pub use error::{KernelError, Result, Status};
pub use handle::{Handle, Kind};
pub use kernel::{Kernel, TraceEntry};
pub use policy::{Gate, Obligation, PolicyState, ReifiedState, SyscallMeta};
pub use term::{Term, TermNode, TermSubstitution};
pub use theorem::{Rule, Theorem};
pub use types::{Constant, Type, TypeFormer, TypeKey, TypeSubstitution};
pub use vfs::{ImageError, OpenMode, Vfs};
