//! Host-side convenience for issuing syscalls through [`Kernel::dispatch`].
//!
//! A [`Driver`] owns a kernel and a scratch guest memory.  Each call lays its
//! inputs out in memory, reserves space for its outputs, dispatches a real
//! frame, and decodes the results, so everything it does is visible in the
//! trace exactly as a guest's calls would be.

use crate::abi::{GuestMemory, Param, Syscall, SyscallFrame};
use crate::error::{KernelError, Status};
use crate::handle::Handle;
use crate::kernel::Kernel;
use crate::syntax::{build_term, parse_term_ast, Builder, SyntaxError};
use crate::theorem::Rule;

pub const SCRATCH_SIZE: usize = 1 << 20;
/// Capacity reserved for variable-length list results.
pub const LIST_CAPACITY: u64 = 4096;
/// Capacity reserved for variable-length string results.
pub const STRING_CAPACITY: u64 = 4096;

/// One input parameter, in the order of the syscall's non-output params.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Value(u64),
    Str(String),
    Handles(Vec<u64>),
    Pairs(Vec<(u64, u64)>),
    Bytes(Vec<u8>),
    /// Length of an output buffer the kernel fills.
    Buffer(u64),
}

impl From<Handle> for Input {
    fn from(h: Handle) -> Self {
        Input::Value(h.value())
    }
}

impl From<u64> for Input {
    fn from(v: u64) -> Self {
        Input::Value(v)
    }
}

impl From<&str> for Input {
    fn from(s: &str) -> Self {
        Input::Str(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Output {
    Value(u64),
    List(Vec<u64>),
    Bytes(Vec<u8>),
}

impl Output {
    pub fn value(&self) -> Option<u64> {
        match self {
            Output::Value(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    /// Output params in table order, named.  Present even on failure, holding
    /// whatever the kernel wrote (zero when untouched).
    pub outputs: Vec<(&'static str, Output)>,
}

impl Outcome {
    pub fn output(&self, name: &str) -> Option<&Output> {
        self.outputs.iter().find(|(n, _)| *n == name).map(|(_, o)| o)
    }

    pub fn value(&self, name: &str) -> Option<u64> {
        self.output(name).and_then(Output::value)
    }

    /// The first output as a handle, or the error status.
    pub fn handle(&self) -> Result<Handle, KernelError> {
        match self.status.error() {
            Some(e) => Err(e),
            None => Ok(Handle::new(self.outputs.first().and_then(|(_, o)| o.value()).unwrap_or(0))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Driver {
    kernel: Kernel,
    memory: Vec<u8>,
}

impl Default for Driver {
    fn default() -> Self {
        Self::new(Kernel::new())
    }
}

struct Layout {
    top: u64,
}

impl Layout {
    fn reserve(&mut self, len: u64) -> u64 {
        let at = self.top;
        self.top = (self.top + len + 7) & !7;
        assert!(self.top as usize <= SCRATCH_SIZE, "driver scratch memory exhausted");
        at
    }
}

impl Driver {
    pub fn new(kernel: Kernel) -> Self {
        Driver {
            kernel,
            memory: vec![0; SCRATCH_SIZE],
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn kernel_mut(&mut self) -> &mut Kernel {
        &mut self.kernel
    }

    pub fn into_kernel(self) -> Kernel {
        self.kernel
    }

    pub fn memory(&self) -> &[u8] {
        &self.memory
    }

    /// Dispatches a raw frame against the scratch memory.
    pub fn dispatch(&mut self, frame: &SyscallFrame) -> Status {
        let mut mem = GuestMemory::new(&mut self.memory);
        self.kernel.dispatch(frame, &mut mem)
    }

    /// Lays out `inputs`, dispatches `call`, and decodes its outputs.
    ///
    /// # Panics
    ///
    /// If `inputs` does not match the call's input params.
    pub fn call(&mut self, call: Syscall, inputs: &[Input]) -> Outcome {
        let mut layout = Layout { top: 0 };
        let mut args = Vec::with_capacity(call.arity());
        let mut outs = Vec::new();
        let mut inputs = inputs.iter();
        for p in call.params() {
            match *p {
                Param::Out(_) => {
                    let at = self.zeroed(&mut layout, 8);
                    args.push(at);
                    outs.push((*p, at, 0));
                }
                Param::OutList(_) => {
                    let count = self.zeroed(&mut layout, 8);
                    let buf = self.zeroed(&mut layout, 8 * LIST_CAPACITY);
                    args.extend([count, buf, LIST_CAPACITY]);
                    outs.push((*p, count, buf));
                }
                Param::OutStr(_) => {
                    let len = self.zeroed(&mut layout, 8);
                    let buf = self.zeroed(&mut layout, STRING_CAPACITY);
                    args.extend([len, buf, STRING_CAPACITY]);
                    outs.push((*p, len, buf));
                }
                _ => {
                    let input = inputs
                        .next()
                        .unwrap_or_else(|| panic!("{call:?}: missing input '{}'", p.name()));
                    self.place(&mut layout, *p, input, &mut args, &mut outs, call);
                }
            }
        }
        assert!(inputs.next().is_none(), "{call:?}: too many inputs");
        let status = self.dispatch(&SyscallFrame::new(call.number(), args));
        let outputs = outs
            .into_iter()
            .map(|(p, a, b)| (p.name(), self.decode(p, a, b)))
            .collect();
        Outcome { status, outputs }
    }

    /// Reserves `len` bytes and clears them, so untouched outputs read as 0.
    fn zeroed(&mut self, layout: &mut Layout, len: u64) -> u64 {
        let at = layout.reserve(len);
        self.memory[at as usize..(at + len) as usize].fill(0);
        at
    }

    fn place(
        &mut self,
        layout: &mut Layout,
        p: Param,
        input: &Input,
        args: &mut Vec<u64>,
        outs: &mut Vec<(Param, u64, u64)>,
        call: Syscall,
    ) {
        let mut put = |layout: &mut Layout, bytes: &[u8]| {
            let at = layout.reserve(bytes.len() as u64);
            self.memory[at as usize..at as usize + bytes.len()].copy_from_slice(bytes);
            args.extend([at, bytes.len() as u64]);
        };
        match (p, input) {
            (Param::Value(_), Input::Value(v)) => args.push(*v),
            (Param::Str(_), Input::Str(s)) => put(layout, s.as_bytes()),
            (Param::Bytes(_), Input::Bytes(b)) => put(layout, b),
            (Param::Array(_), Input::Handles(hs)) => {
                let bytes: Vec<u8> = hs.iter().flat_map(|h| h.to_le_bytes()).collect();
                put(layout, &bytes);
                *args.last_mut().expect("count slot") = hs.len() as u64;
            }
            (Param::Pairs(_), Input::Pairs(ps)) => {
                let bytes: Vec<u8> = ps
                    .iter()
                    .flat_map(|(k, v)| k.to_le_bytes().into_iter().chain(v.to_le_bytes()))
                    .collect();
                put(layout, &bytes);
                *args.last_mut().expect("count slot") = ps.len() as u64;
            }
            (Param::Buffer(_), Input::Buffer(len)) => {
                let at = self.zeroed(layout, *len);
                args.extend([at, *len]);
                outs.push((p, at, *len));
            }
            (p, i) => panic!("{call:?}: input {i:?} does not fit param {p:?}"),
        }
    }

    fn word(&self, at: u64) -> u64 {
        let at = at as usize;
        u64::from_le_bytes(self.memory[at..at + 8].try_into().expect("8 bytes"))
    }

    fn decode(&self, p: Param, a: u64, b: u64) -> Output {
        match p {
            Param::Out(_) => Output::Value(self.word(a)),
            Param::OutList(_) => {
                let n = self.word(a).min(LIST_CAPACITY);
                Output::List((0..n).map(|i| self.word(b + 8 * i)).collect())
            }
            Param::OutStr(_) => {
                let n = self.word(a).min(STRING_CAPACITY) as usize;
                Output::Bytes(self.memory[b as usize..b as usize + n].to_vec())
            }
            Param::Buffer(_) => Output::Bytes(self.memory[a as usize..(a + b) as usize].to_vec()),
            _ => unreachable!("not an output"),
        }
    }

    /// Calls a syscall whose first output is a handle.
    pub fn allocate(&mut self, call: Syscall, inputs: &[Input]) -> Result<Handle, KernelError> {
        self.call(call, inputs).handle()
    }

    /// Calls a syscall with no outputs of interest.
    pub fn invoke(&mut self, call: Syscall, inputs: &[Input]) -> Result<(), KernelError> {
        match self.call(call, inputs).status.error() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Parses and allocates a term through syscalls.
    pub fn parse_term(&mut self, text: &str) -> Result<Handle, SyntaxError> {
        let ast = parse_term_ast(text)?;
        build_term(self, &ast)
    }

    /// Applies `rule` through the matching theorem syscall.  Substitution
    /// keys are allocated as variables first.
    pub fn rule(&mut self, rule: &Rule) -> Result<Handle, KernelError> {
        use Syscall::*;
        let (call, inputs): (Syscall, Vec<Input>) = match rule {
            Rule::Symmetry(a) => (TheoremAllocateSym, vec![(*a).into()]),
            Rule::Reflexivity(a) => (TheoremAllocateReflexivity, vec![(*a).into()]),
            Rule::Transitivity(a, b) => (TheoremAllocateTransitivity, vec![(*a).into(), (*b).into()]),
            Rule::CongruenceApplication(a, b) => (TheoremAllocateCongruenceApp, vec![(*a).into(), (*b).into()]),
            Rule::CongruenceLambda { name, ty, theorem } => (
                TheoremAllocateCongruenceLambda,
                vec![name.as_str().into(), (*ty).into(), (*theorem).into()],
            ),
            Rule::Beta(a) => (TheoremAllocateBeta, vec![(*a).into()]),
            Rule::Eta(a) => (TheoremAllocateEta, vec![(*a).into()]),
            Rule::Assume(a) => (TheoremAllocateAssume, vec![(*a).into()]),
            Rule::EqualityMp(a, b) => (TheoremAllocateEqualityMp, vec![(*a).into(), (*b).into()]),
            Rule::DeductAntisym(a, b) => (TheoremAllocateDeductAntisym, vec![(*a).into(), (*b).into()]),
            Rule::InstTerm(th, sigma) => {
                let mut pairs = Vec::with_capacity(sigma.len());
                for ((name, ty), img) in sigma {
                    let key = self.variable(name, *ty)?;
                    pairs.push((key.value(), img.value()));
                }
                (TheoremAllocateInstTerm, vec![(*th).into(), Input::Pairs(pairs)])
            }
            Rule::InstType(th, theta) => {
                let mut pairs = Vec::with_capacity(theta.len());
                for (name, img) in theta {
                    let key = self.type_variable(name)?;
                    pairs.push((key.value(), img.value()));
                }
                (TheoremAllocateInstType, vec![(*th).into(), Input::Pairs(pairs)])
            }
            Rule::TruthIntro => (TheoremAllocateTruthIntro, vec![]),
            Rule::FalsityElim { theorem, proposition } => {
                (TheoremAllocateFalsityElim, vec![(*theorem).into(), (*proposition).into()])
            }
            Rule::ImpIntro { theorem, hypothesis } => {
                (TheoremAllocateImpIntro, vec![(*theorem).into(), (*hypothesis).into()])
            }
            Rule::ImpElim(a, b) => (TheoremAllocateImpElim, vec![(*a).into(), (*b).into()]),
            Rule::ForallIntro { theorem, name, ty } => (
                TheoremAllocateForallIntro,
                vec![(*theorem).into(), name.as_str().into(), (*ty).into()],
            ),
            Rule::ForallElim { theorem, term } => (TheoremAllocateForallElim, vec![(*theorem).into(), (*term).into()]),
        };
        self.allocate(call, &inputs)
    }
}

impl Builder for Driver {
    fn type_former_named(&self, name: &str) -> Option<Handle> {
        self.kernel.heaps().type_former_by_name(name)
    }

    fn constant_named(&self, name: &str) -> Option<Handle> {
        self.kernel.heaps().constant_by_name(name)
    }

    fn binding(&self, _: &str) -> Option<Handle> {
        None
    }

    fn type_variable(&mut self, name: &str) -> crate::Result<Handle> {
        self.allocate(Syscall::TypeAllocateVariable, &[name.into()])
    }

    fn type_application(&mut self, former: Handle, args: &[Handle]) -> crate::Result<Handle> {
        let args = args.iter().map(|h| h.value()).collect();
        self.allocate(Syscall::TypeAllocateApplication, &[former.into(), Input::Handles(args)])
    }

    fn variable(&mut self, name: &str, ty: Handle) -> crate::Result<Handle> {
        self.allocate(Syscall::TermAllocateVariable, &[name.into(), ty.into()])
    }

    fn constant(&mut self, constant: Handle, inst: &[(Handle, Handle)]) -> crate::Result<Handle> {
        let pairs = inst.iter().map(|(k, v)| (k.value(), v.value())).collect();
        self.allocate(Syscall::TermAllocateConstant, &[constant.into(), Input::Pairs(pairs)])
    }

    fn application(&mut self, left: Handle, right: Handle) -> crate::Result<Handle> {
        self.allocate(Syscall::TermAllocateApplication, &[left.into(), right.into()])
    }

    fn lambda(&mut self, name: &str, ty: Handle, body: Handle) -> crate::Result<Handle> {
        self.allocate(Syscall::TermAllocateLambda, &[name.into(), ty.into(), body.into()])
    }
}
