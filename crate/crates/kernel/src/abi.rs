//! The syscall table and bounds-checked access to guest memory.
//!
//! Every argument is a `u64` slot.  Addresses are 32-bit guest offsets widened
//! into a slot; results go out through 8-byte little-endian out-addresses.
//! Variable-length results use a `(count address, buffer address, capacity)`
//! triple: the required count is always written, and the buffer only when the
//! capacity suffices.

use crate::error::{KernelError, Result};

/// How one logical parameter is laid out in argument slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    /// A handle or integer, one slot.
    Value(&'static str),
    /// UTF-8 string input: `(address, length)`.
    Str(&'static str),
    /// Array of u64 handles: `(address, count)`.
    Array(&'static str),
    /// Array of `(key, image)` u64 pairs: `(address, pair count)`.
    Pairs(&'static str),
    /// Raw input bytes: `(address, length)`.
    Bytes(&'static str),
    /// Output byte buffer filled by the kernel: `(address, length)`.
    Buffer(&'static str),
    /// One 8-byte out-address.
    Out(&'static str),
    /// Variable-length u64 result: `(count address, buffer address, capacity)`.
    OutList(&'static str),
    /// Variable-length string result: `(length address, buffer address, capacity)`.
    OutStr(&'static str),
}

impl Param {
    pub fn slots(self) -> usize {
        match self {
            Param::Value(_) | Param::Out(_) => 1,
            Param::Str(_) | Param::Array(_) | Param::Pairs(_) | Param::Bytes(_) | Param::Buffer(_) => 2,
            Param::OutList(_) | Param::OutStr(_) => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::Value(n)
            | Param::Str(n)
            | Param::Array(n)
            | Param::Pairs(n)
            | Param::Bytes(n)
            | Param::Buffer(n)
            | Param::Out(n)
            | Param::OutList(n)
            | Param::OutStr(n) => n,
        }
    }

    pub fn is_output(self) -> bool {
        matches!(self, Param::Out(_) | Param::OutList(_) | Param::OutStr(_) | Param::Buffer(_))
    }
}

macro_rules! syscalls {
    ($($variant:ident = $number:literal, $import:literal, [$($param:expr),* $(,)?];)*) => {
        /// Every syscall, numbered as in the ABI.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Syscall {
            $($variant,)*
        }

        impl Syscall {
            pub const ALL: &'static [Syscall] = &[$(Syscall::$variant,)*];

            pub const fn number(self) -> u32 {
                match self {
                    $(Syscall::$variant => $number,)*
                }
            }

            /// Host import name under the `supervisionary` namespace.
            pub const fn import_name(self) -> &'static str {
                match self {
                    $(Syscall::$variant => $import,)*
                }
            }

            pub fn params(self) -> &'static [Param] {
                use Param::*;
                match self {
                    $(Syscall::$variant => &[$($param),*],)*
                }
            }
        }
    };
}

syscalls! {
    TypeFormerRegister = 0x010, "type_former_register", [Str("name"), Value("arity"), Out("handle")];
    TypeFormerResolve = 0x011, "type_former_resolve", [Value("former"), Out("arity"), OutStr("name")];
    TypeAllocateVariable = 0x020, "type_allocate_variable", [Str("name"), Out("handle")];
    TypeAllocateApplication = 0x021, "type_allocate_application", [Value("former"), Array("arguments"), Out("handle")];
    TypeAllocateFunction = 0x022, "type_allocate_function", [Value("domain"), Value("codomain"), Out("handle")];
    ConstantRegister = 0x030, "constant_register", [Str("name"), Value("type"), Out("handle")];
    TermAllocateVariable = 0x040, "term_allocate_variable", [Str("name"), Value("type"), Out("handle")];
    TermAllocateConstant = 0x041, "term_allocate_constant", [Value("constant"), Pairs("instantiation"), Out("handle")];
    TermAllocateApplication = 0x042, "term_allocate_application", [Value("left"), Value("right"), Out("handle")];
    TermAllocateLambda = 0x043, "term_allocate_lambda", [Str("name"), Value("type"), Value("body"), Out("handle")];
    TermIsApplication = 0x044, "term_is_application", [Value("term"), Out("result")];
    TermSplitApplication = 0x045, "term_split_application", [Value("term"), Out("left"), Out("right")];
    TermTypeOf = 0x046, "term_type_of", [Value("term"), Out("type")];
    TermAlphaEq = 0x047, "term_alpha_eq", [Value("left"), Value("right"), Out("result")];
    TermSubstitute = 0x048, "term_substitute", [Value("term"), Pairs("substitution"), Out("handle")];
    TermTypeSubstitute = 0x049, "term_type_substitute", [Value("term"), Pairs("substitution"), Out("handle")];
    TermBetaNormalize = 0x04A, "term_beta_normalize", [Value("term"), Out("handle")];
    TermFreeVariables = 0x04B, "term_free_variables", [Value("term"), OutList("variables")];
    TheoremAllocateSym = 0x060, "theorem_allocate_sym", [Value("premise"), Out("handle")];
    TheoremAllocateReflexivity = 0x061, "theorem_allocate_reflexivity", [Value("term"), Out("handle")];
    TheoremAllocateTransitivity = 0x062, "theorem_allocate_transitivity", [Value("left"), Value("right"), Out("handle")];
    TheoremAllocateCongruenceApp = 0x063, "theorem_allocate_congruence_app", [Value("function"), Value("argument"), Out("handle")];
    TheoremAllocateCongruenceLambda = 0x064, "theorem_allocate_congruence_lambda", [Str("name"), Value("type"), Value("premise"), Out("handle")];
    TheoremAllocateBeta = 0x065, "theorem_allocate_beta", [Value("term"), Out("handle")];
    TheoremAllocateEta = 0x066, "theorem_allocate_eta", [Value("term"), Out("handle")];
    TheoremAllocateAssume = 0x067, "theorem_allocate_assume", [Value("term"), Out("handle")];
    TheoremAllocateEqualityMp = 0x068, "theorem_allocate_equality_mp", [Value("equality"), Value("premise"), Out("handle")];
    TheoremAllocateDeductAntisym = 0x069, "theorem_allocate_deduct_antisym", [Value("left"), Value("right"), Out("handle")];
    TheoremAllocateInstTerm = 0x06A, "theorem_allocate_inst_term", [Value("premise"), Pairs("substitution"), Out("handle")];
    TheoremAllocateInstType = 0x06B, "theorem_allocate_inst_type", [Value("premise"), Pairs("substitution"), Out("handle")];
    TheoremAllocateTruthIntro = 0x06C, "theorem_allocate_truth_intro", [Out("handle")];
    TheoremAllocateFalsityElim = 0x06D, "theorem_allocate_falsity_elim", [Value("premise"), Value("proposition"), Out("handle")];
    TheoremAllocateImpIntro = 0x06E, "theorem_allocate_imp_intro", [Value("premise"), Value("hypothesis"), Out("handle")];
    TheoremAllocateImpElim = 0x06F, "theorem_allocate_imp_elim", [Value("implication"), Value("premise"), Out("handle")];
    TheoremAllocateForallIntro = 0x070, "theorem_allocate_forall_intro", [Value("premise"), Str("name"), Value("type"), Out("handle")];
    TheoremAllocateForallElim = 0x071, "theorem_allocate_forall_elim", [Value("premise"), Value("term"), Out("handle")];
    TheoremSplit = 0x072, "theorem_split", [Value("theorem"), Out("conclusion"), Out("axiom"), OutList("hypotheses")];
    PolicyCurrent = 0x080, "policy_current", [Out("policy")];
    PolicyInstall = 0x081, "policy_install", [Value("policy"), Value("refinement")];
    ObligationDischarge = 0x082, "obligation_discharge", [Value("obligation"), Value("theorem")];
    FsOpen = 0x090, "fs_open", [Str("path"), Value("flags"), Value("obligation"), Out("fd"), Out("obligation"), Out("challenge")];
    FsRead = 0x091, "fs_read", [Value("fd"), Buffer("data"), Value("obligation"), Out("count"), Out("obligation"), Out("challenge")];
    FsWrite = 0x092, "fs_write", [Value("fd"), Bytes("data"), Value("obligation"), Out("count"), Out("obligation"), Out("challenge")];
    FsClose = 0x093, "fs_close", [Value("fd")];
}

impl Syscall {
    pub fn from_number(number: u32) -> Option<Syscall> {
        Syscall::ALL.iter().copied().find(|s| s.number() == number)
    }

    pub fn from_import_name(name: &str) -> Option<Syscall> {
        Syscall::ALL.iter().copied().find(|s| s.import_name() == name)
    }

    /// Number of raw u64 argument slots.
    pub fn arity(self) -> usize {
        self.params().iter().map(|p| p.slots()).sum()
    }

    /// Gated syscalls need a discharged obligation to complete.
    pub fn is_gated(self) -> bool {
        matches!(self, Syscall::FsOpen | Syscall::FsRead | Syscall::FsWrite)
    }

    /// Upper-snake ABI name, e.g. `TERM_ALLOCATE_APPLICATION`.
    pub fn abi_name(self) -> String {
        self.import_name().to_ascii_uppercase()
    }
}

/// One syscall invocation: number and raw argument slots.  Missing slots read
/// as zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyscallFrame {
    pub number: u32,
    pub args: Vec<u64>,
}

impl SyscallFrame {
    pub fn new(number: u32, args: impl Into<Vec<u64>>) -> Self {
        SyscallFrame {
            number,
            args: args.into(),
        }
    }

    pub fn arg(&self, i: usize) -> u64 {
        self.args.get(i).copied().unwrap_or(0)
    }
}

/// Bounds-checked view of a guest's linear memory.
pub struct GuestMemory<'a> {
    bytes: &'a mut [u8],
}

impl<'a> GuestMemory<'a> {
    pub fn new(bytes: &'a mut [u8]) -> Self {
        GuestMemory { bytes }
    }

    pub fn size(&self) -> usize {
        self.bytes.len()
    }

    pub fn as_slice(&self) -> &[u8] {
        self.bytes
    }

    fn range(&self, offset: u64, len: u64) -> Result<std::ops::Range<usize>> {
        let offset = u32::try_from(offset).map_err(|_| KernelError::InvalidAddress)? as u64;
        let end = offset.checked_add(len).ok_or(KernelError::InvalidAddress)?;
        if end > self.bytes.len() as u64 {
            return Err(KernelError::InvalidAddress);
        }
        Ok(offset as usize..end as usize)
    }

    /// Fails unless `[offset, offset + len)` lies inside guest memory.
    pub fn check(&self, offset: u64, len: u64) -> Result<()> {
        self.range(offset, len).map(|_| ())
    }

    pub fn read_bytes(&self, offset: u64, len: u64) -> Result<&[u8]> {
        let r = self.range(offset, len)?;
        Ok(&self.bytes[r])
    }

    pub fn read_u64(&self, offset: u64) -> Result<u64> {
        let b = self.read_bytes(offset, 8)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    pub fn write_bytes(&mut self, offset: u64, data: &[u8]) -> Result<()> {
        let r = self.range(offset, data.len() as u64)?;
        self.bytes[r].copy_from_slice(data);
        Ok(())
    }

    pub fn write_u64(&mut self, offset: u64, value: u64) -> Result<()> {
        self.write_bytes(offset, &value.to_le_bytes())
    }
}
