//! Kernel errors and their bit-exact status codes.

use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Status word returned by every syscall.  Zero is success.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Status(u32);

impl Status {
    pub const SUCCESS: Status = Status(0);

    pub const fn code(self) -> u32 {
        self.0
    }

    pub fn is_success(self) -> bool {
        self.0 == 0
    }

    /// The error this status encodes, if any.
    pub fn error(self) -> Option<KernelError> {
        KernelError::ALL.iter().copied().find(|e| e.code() == self.0)
    }
}

impl From<KernelError> for Status {
    fn from(e: KernelError) -> Self {
        Status(e.code())
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.error() {
            None if self.0 == 0 => write!(f, "0 (success)"),
            None => write!(f, "{} (unassigned)", self.0),
            Some(e) => write!(f, "{} ({:?})", self.0, e),
        }
    }
}

/// Every failure a syscall can report.  Discriminants are the status codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Error)]
#[repr(u32)]
pub enum KernelError {
    #[error("unknown syscall number")]
    UnknownSyscall = 1,
    #[error("guest address range out of bounds")]
    InvalidAddress = 2,
    #[error("handle does not name a live object")]
    DanglingHandle = 3,
    #[error("handle names an object of a different kind")]
    KindMismatch = 4,
    #[error("name already registered")]
    NameCollision = 5,
    #[error("wrong number of type arguments")]
    ArityMismatch = 6,
    #[error("types do not match")]
    TypeMismatch = 7,
    #[error("term is not an application")]
    NotAnApplication = 8,
    #[error("conclusion is not an equality")]
    NotAnEquality = 9,
    #[error("term is not a proposition")]
    NotAProposition = 10,
    #[error("premise or argument has the wrong shape")]
    ShapeMismatch = 11,
    #[error("rule side condition violated")]
    SideConditionViolated = 12,
    #[error("obligation pending")]
    ObligationPending = 13,
    #[error("unknown obligation")]
    ObligationUnknown = 14,
    #[error("obligation was issued for a different call")]
    ObligationMismatch = 15,
    #[error("proof rejected")]
    ProofRejected = 16,
    #[error("refinement rejected")]
    RefinementRejected = 17,
    #[error("file not found")]
    FsNotFound = 18,
    #[error("bad file descriptor")]
    FsBadDescriptor = 19,
    #[error("bad open flags")]
    FsBadFlags = 20,
    #[error("kernel arena exhausted")]
    ArenaExhausted = 21,
}

impl KernelError {
    pub const ALL: [KernelError; 21] = [
        KernelError::UnknownSyscall,
        KernelError::InvalidAddress,
        KernelError::DanglingHandle,
        KernelError::KindMismatch,
        KernelError::NameCollision,
        KernelError::ArityMismatch,
        KernelError::TypeMismatch,
        KernelError::NotAnApplication,
        KernelError::NotAnEquality,
        KernelError::NotAProposition,
        KernelError::ShapeMismatch,
        KernelError::SideConditionViolated,
        KernelError::ObligationPending,
        KernelError::ObligationUnknown,
        KernelError::ObligationMismatch,
        KernelError::ProofRejected,
        KernelError::RefinementRejected,
        KernelError::FsNotFound,
        KernelError::FsBadDescriptor,
        KernelError::FsBadFlags,
        KernelError::ArenaExhausted,
    ];

    pub const fn code(self) -> u32 {
        self as u32
    }

    pub fn status(self) -> Status {
        Status::from(self)
    }
}

pub type Result<T, E = KernelError> = std::result::Result<T, E>;
