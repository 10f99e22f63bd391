//! The kernel state machine and syscall dispatch.
//!
//! [`Kernel::dispatch`] is the only entry point untrusted code reaches.  It is
//! total: every frame yields a [`Status`], and a failing frame leaves the heaps
//! exactly as they were.  The single exception is a gated call that stops at
//! `ObligationPending`, which keeps the obligation and challenge it created.

use crate::abi::{GuestMemory, Param, Syscall, SyscallFrame};
use crate::arena::Heaps;
use crate::error::{KernelError, Result, Status};
use crate::handle::Handle;
use crate::policy::{Gate, PolicyState, SyscallMeta};
use crate::term::{TermNode, TermSubstitution};
use crate::theorem::Rule;
use crate::types::{Type, TypeSubstitution};
use crate::vfs::{OpenMode, Vfs};
use serde::Serialize;

/// One dispatched frame as recorded in the trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub number: u32,
    pub args: Vec<u64>,
    pub status: u32,
}

#[derive(Clone, Debug)]
pub struct Kernel {
    pub(crate) heaps: Heaps,
    pub(crate) policy: PolicyState,
    pub(crate) vfs: Vfs,
    trace: Vec<TraceEntry>,
    pub(crate) gate_completions: u64,
}

impl Default for Kernel {
    fn default() -> Self {
        Self::new()
    }
}

impl Kernel {
    /// A booted kernel under the top policy with an empty filesystem.
    pub fn new() -> Self {
        Self::with_vfs(Vfs::new())
    }

    pub fn with_vfs(vfs: Vfs) -> Self {
        let heaps = Heaps::boot();
        let policy = PolicyState::new(heaps.prelude().top_policy);
        Kernel {
            heaps,
            policy,
            vfs,
            trace: Vec::new(),
            gate_completions: 0,
        }
    }

    pub fn heaps(&self) -> &Heaps {
        &self.heaps
    }

    /// Mutable heap access for trusted host code such as parsers and tests.
    /// Guests never get this.
    pub fn heaps_mut(&mut self) -> &mut Heaps {
        &mut self.heaps
    }

    pub fn policy(&self) -> &PolicyState {
        &self.policy
    }

    pub fn vfs(&self) -> &Vfs {
        &self.vfs
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn clear_trace(&mut self) {
        self.trace.clear();
    }

    /// Number of gated calls that completed under a discharged obligation.
    pub fn gate_completions(&self) -> u64 {
        self.gate_completions
    }

    /// Runs one syscall against `memory`.
    pub fn dispatch(&mut self, frame: &SyscallFrame, memory: &mut GuestMemory<'_>) -> Status {
        let cp = self.heaps.checkpoint();
        let status = match Syscall::from_number(frame.number) {
            None => KernelError::UnknownSyscall.status(),
            Some(call) => match self.execute(call, frame, memory) {
                Ok(()) => Status::SUCCESS,
                Err(Stop::Pending) => KernelError::ObligationPending.status(),
                Err(Stop::Error(e)) => {
                    self.heaps.rollback(cp);
                    e.status()
                }
            },
        };
        self.trace.push(TraceEntry {
            number: frame.number,
            args: frame.args.clone(),
            status: status.code(),
        });
        status
    }

    fn execute(&mut self, call: Syscall, frame: &SyscallFrame, mem: &mut GuestMemory<'_>) -> Result<(), Stop> {
        let mut a = Args::decode(call, frame, mem)?;
        let h = &mut self.heaps;
        match call {
            Syscall::TypeFormerRegister => {
                let name = a.string(mem)?;
                let arity = usize::try_from(a.value()).map_err(|_| KernelError::ArityMismatch)?;
                let out = h.register_type_former(&name, arity)?;
                a.handle_out(mem, out)
            }
            Syscall::TypeFormerResolve => {
                let f = h.type_former(a.handle())?;
                let arity = f.arity as u64;
                let name = f.name.clone();
                a.out(mem, arity)?;
                a.bytes_out(mem, name.as_bytes())
            }
            Syscall::TypeAllocateVariable => {
                let name = a.string(mem)?;
                let out = h.allocate_type_variable(&name)?;
                a.handle_out(mem, out)
            }
            Syscall::TypeAllocateApplication => {
                let former = a.handle();
                let args = a.handles(mem)?;
                let out = h.allocate_type_application(former, &args)?;
                a.handle_out(mem, out)
            }
            Syscall::TypeAllocateFunction => {
                let (d, c) = (a.handle(), a.handle());
                let out = h.allocate_function_type(d, c)?;
                a.handle_out(mem, out)
            }
            Syscall::ConstantRegister => {
                let name = a.string(mem)?;
                let out = h.register_constant(&name, a.handle())?;
                a.handle_out(mem, out)
            }
            Syscall::TermAllocateVariable => {
                let name = a.string(mem)?;
                let out = h.allocate_variable(&name, a.handle())?;
                a.handle_out(mem, out)
            }
            Syscall::TermAllocateConstant => {
                let c = a.handle();
                let theta = type_substitution(h, &a.pairs(mem)?)?;
                let out = h.allocate_constant(c, &theta)?;
                a.handle_out(mem, out)
            }
            Syscall::TermAllocateApplication => {
                let (l, r) = (a.handle(), a.handle());
                let out = h.allocate_application(l, r)?;
                a.handle_out(mem, out)
            }
            Syscall::TermAllocateLambda => {
                let name = a.string(mem)?;
                let (ty, body) = (a.handle(), a.handle());
                let out = h.allocate_lambda(&name, ty, body)?;
                a.handle_out(mem, out)
            }
            Syscall::TermIsApplication => {
                let b = h.is_application(a.handle())?;
                a.out(mem, b as u64)
            }
            Syscall::TermSplitApplication => {
                let (l, r) = h.split_application(a.handle())?;
                a.handle_out(mem, l)?;
                a.handle_out(mem, r)
            }
            Syscall::TermTypeOf => {
                let ty = h.type_of(a.handle())?;
                a.handle_out(mem, ty)
            }
            Syscall::TermAlphaEq => {
                let (l, r) = (a.handle(), a.handle());
                let b = h.alpha_equivalent(l, r)?;
                a.out(mem, b as u64)
            }
            Syscall::TermSubstitute => {
                let t = a.handle();
                let sigma = term_substitution(h, &a.pairs(mem)?)?;
                let out = h.substitute(t, &sigma)?;
                a.handle_out(mem, out)
            }
            Syscall::TermTypeSubstitute => {
                let t = a.handle();
                let theta = type_substitution(h, &a.pairs(mem)?)?;
                let out = h.instantiate_types(t, &theta)?;
                a.handle_out(mem, out)
            }
            Syscall::TermBetaNormalize => {
                let out = h.beta_normalize(a.handle())?;
                a.handle_out(mem, out)
            }
            Syscall::TermFreeVariables => {
                let vars = h.free_variables(a.handle())?;
                a.list_out(mem, &vars)
            }
            Syscall::TheoremSplit => {
                let (hyps, concl, axiom) = h.split_theorem(a.handle())?;
                a.handle_out(mem, concl)?;
                a.out(mem, axiom as u64)?;
                a.list_out(mem, &hyps)
            }
            Syscall::PolicyCurrent => {
                let p = self.policy.current();
                a.handle_out(mem, p)
            }
            Syscall::PolicyInstall => {
                let (p, th) = (a.handle(), a.handle());
                Ok(self.policy_install(p, th)?)
            }
            Syscall::ObligationDischarge => {
                let (id, th) = (a.value(), a.handle());
                Ok(self.obligation_discharge(id, th)?)
            }
            Syscall::FsOpen => self.fs_open(&mut a, mem),
            Syscall::FsRead => self.fs_read(&mut a, mem),
            Syscall::FsWrite => self.fs_write(&mut a, mem),
            Syscall::FsClose => Ok(self.vfs.close(a.value())?),
            rule => {
                let rule = a.rule(rule, h, mem)?;
                let out = h.apply_rule(&rule)?;
                a.handle_out(mem, out)
            }
        }
    }

    /// Gates `meta`, writing the obligation id and challenge on Pending.
    fn gate_call(&mut self, a: &mut Args, mem: &mut GuestMemory<'_>, meta: SyscallMeta, ob: u64) -> Result<u64, Stop> {
        match self.gate(meta, ob)? {
            Gate::Allow { obligation } => Ok(obligation),
            Gate::Pending {
                obligation,
                challenge,
            } => {
                a.skip_out();
                a.out(mem, obligation)?;
                a.handle_out(mem, challenge)?;
                Err(Stop::Pending)
            }
        }
    }

    fn fs_open(&mut self, a: &mut Args, mem: &mut GuestMemory<'_>) -> Result<(), Stop> {
        let path = a.string(mem)?;
        let flags = a.value();
        let ob = a.value();
        let mode = OpenMode::from_flags(flags)?;
        let id = self.vfs.intern(&path);
        let meta = SyscallMeta::new(Syscall::FsOpen.number() as u64, id, flags);
        let allowed = self.gate_call(a, mem, meta, ob)?;
        let fd = self.vfs.open(&path, mode)?;
        self.complete_gated(allowed, meta);
        a.out(mem, fd as u64)
    }

    fn fs_read(&mut self, a: &mut Args, mem: &mut GuestMemory<'_>) -> Result<(), Stop> {
        let fd = a.value();
        let (buf, len) = a.buffer();
        let ob = a.value();
        let fd32 = self.vfs.check_descriptor(fd, OpenMode::Read)?;
        let meta = SyscallMeta::new(Syscall::FsRead.number() as u64, fd, 0);
        let allowed = self.gate_call(a, mem, meta, ob)?;
        let data = self.vfs.read(fd32, len as usize)?;
        mem.write_bytes(buf, &data)?;
        self.complete_gated(allowed, meta);
        a.out(mem, data.len() as u64)
    }

    fn fs_write(&mut self, a: &mut Args, mem: &mut GuestMemory<'_>) -> Result<(), Stop> {
        let fd = a.value();
        let data = a.bytes(mem)?.to_vec();
        let ob = a.value();
        let fd32 = self.vfs.check_descriptor(fd, OpenMode::Write)?;
        let meta = SyscallMeta::new(Syscall::FsWrite.number() as u64, fd, 0);
        let allowed = self.gate_call(a, mem, meta, ob)?;
        let n = self.vfs.write(fd32, &data)?;
        self.complete_gated(allowed, meta);
        a.out(mem, n as u64)
    }
}

/// Why a syscall stopped short of success.
enum Stop {
    Error(KernelError),
    Pending,
}

impl From<KernelError> for Stop {
    fn from(e: KernelError) -> Self {
        Stop::Error(e)
    }
}

/// Cursor over a frame's argument slots.  Construction validates every
/// address the call may write, so later writes cannot fail halfway.
struct Args {
    slots: Vec<u64>,
    next: usize,
}

impl Args {
    fn decode(call: Syscall, frame: &SyscallFrame, mem: &GuestMemory<'_>) -> Result<Args> {
        let slots: Vec<u64> = (0..call.arity()).map(|i| frame.arg(i)).collect();
        let mut i = 0;
        for p in call.params() {
            match *p {
                Param::Out(_) => mem.check(slots[i], 8)?,
                Param::Buffer(_) => mem.check(slots[i], slots[i + 1])?,
                Param::OutList(_) => {
                    mem.check(slots[i], 8)?;
                    let bytes = slots[i + 2].checked_mul(8).ok_or(KernelError::InvalidAddress)?;
                    mem.check(slots[i + 1], bytes)?;
                }
                Param::OutStr(_) => {
                    mem.check(slots[i], 8)?;
                    mem.check(slots[i + 1], slots[i + 2])?;
                }
                _ => {}
            }
            i += p.slots();
        }
        Ok(Args { slots, next: 0 })
    }

    fn value(&mut self) -> u64 {
        let v = self.slots[self.next];
        self.next += 1;
        v
    }

    fn handle(&mut self) -> Handle {
        Handle::new(self.value())
    }

    fn range(&mut self) -> (u64, u64) {
        (self.value(), self.value())
    }

    fn bytes<'m>(&mut self, mem: &'m GuestMemory<'_>) -> Result<&'m [u8]> {
        let (addr, len) = self.range();
        mem.read_bytes(addr, len)
    }

    /// Input strings must be UTF-8; anything else is malformed input.
    fn string(&mut self, mem: &GuestMemory<'_>) -> Result<String> {
        let b = self.bytes(mem)?;
        std::str::from_utf8(b)
            .map(str::to_owned)
            .map_err(|_| KernelError::ShapeMismatch)
    }

    fn handles(&mut self, mem: &GuestMemory<'_>) -> Result<Vec<Handle>> {
        let (addr, count) = self.range();
        words(mem, addr, count).map(|w| w.into_iter().map(Handle::new).collect())
    }

    fn pairs(&mut self, mem: &GuestMemory<'_>) -> Result<Vec<(Handle, Handle)>> {
        let (addr, count) = self.range();
        let n = count.checked_mul(2).ok_or(KernelError::InvalidAddress)?;
        let w = words(mem, addr, n)?;
        Ok(w.chunks(2).map(|c| (Handle::new(c[0]), Handle::new(c[1]))).collect())
    }

    fn buffer(&mut self) -> (u64, u64) {
        self.range()
    }

    fn skip_out(&mut self) {
        self.next += 1;
    }

    fn out(&mut self, mem: &mut GuestMemory<'_>, v: u64) -> Result<(), Stop> {
        let addr = self.value();
        mem.write_u64(addr, v)?;
        Ok(())
    }

    fn handle_out(&mut self, mem: &mut GuestMemory<'_>, h: Handle) -> Result<(), Stop> {
        self.out(mem, h.value())
    }

    fn list_out(&mut self, mem: &mut GuestMemory<'_>, items: &[Handle]) -> Result<(), Stop> {
        let (count_addr, buf, cap) = (self.value(), self.value(), self.value());
        mem.write_u64(count_addr, items.len() as u64)?;
        if items.len() as u64 <= cap {
            for (i, h) in items.iter().enumerate() {
                mem.write_u64(buf + 8 * i as u64, h.value())?;
            }
        }
        Ok(())
    }

    fn bytes_out(&mut self, mem: &mut GuestMemory<'_>, data: &[u8]) -> Result<(), Stop> {
        let (len_addr, buf, cap) = (self.value(), self.value(), self.value());
        mem.write_u64(len_addr, data.len() as u64)?;
        if data.len() as u64 <= cap {
            mem.write_bytes(buf, data)?;
        }
        Ok(())
    }

    fn rule(&mut self, call: Syscall, h: &Heaps, mem: &GuestMemory<'_>) -> Result<Rule> {
        use Syscall::*;
        Ok(match call {
            TheoremAllocateSym => Rule::Symmetry(self.handle()),
            TheoremAllocateReflexivity => Rule::Reflexivity(self.handle()),
            TheoremAllocateTransitivity => Rule::Transitivity(self.handle(), self.handle()),
            TheoremAllocateCongruenceApp => Rule::CongruenceApplication(self.handle(), self.handle()),
            TheoremAllocateCongruenceLambda => Rule::CongruenceLambda {
                name: self.string(mem)?,
                ty: self.handle(),
                theorem: self.handle(),
            },
            TheoremAllocateBeta => Rule::Beta(self.handle()),
            TheoremAllocateEta => Rule::Eta(self.handle()),
            TheoremAllocateAssume => Rule::Assume(self.handle()),
            TheoremAllocateEqualityMp => Rule::EqualityMp(self.handle(), self.handle()),
            TheoremAllocateDeductAntisym => Rule::DeductAntisym(self.handle(), self.handle()),
            TheoremAllocateInstTerm => {
                let th = self.handle();
                Rule::InstTerm(th, term_substitution(h, &self.pairs(mem)?)?)
            }
            TheoremAllocateInstType => {
                let th = self.handle();
                Rule::InstType(th, type_substitution(h, &self.pairs(mem)?)?)
            }
            TheoremAllocateTruthIntro => Rule::TruthIntro,
            TheoremAllocateFalsityElim => Rule::FalsityElim {
                theorem: self.handle(),
                proposition: self.handle(),
            },
            TheoremAllocateImpIntro => Rule::ImpIntro {
                theorem: self.handle(),
                hypothesis: self.handle(),
            },
            TheoremAllocateImpElim => Rule::ImpElim(self.handle(), self.handle()),
            TheoremAllocateForallIntro => Rule::ForallIntro {
                theorem: self.handle(),
                name: self.string(mem)?,
                ty: self.handle(),
            },
            TheoremAllocateForallElim => Rule::ForallElim {
                theorem: self.handle(),
                term: self.handle(),
            },
            other => unreachable!("{other:?} is not a rule syscall"),
        })
    }
}

fn words(mem: &GuestMemory<'_>, addr: u64, count: u64) -> Result<Vec<u64>> {
    let len = count.checked_mul(8).ok_or(KernelError::InvalidAddress)?;
    let bytes = mem.read_bytes(addr, len)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

/// Pairs of (type-variable type, image type).  Repeated keys are malformed.
pub(crate) fn type_substitution(h: &Heaps, pairs: &[(Handle, Handle)]) -> Result<TypeSubstitution> {
    let mut theta = TypeSubstitution::new();
    for (key, image) in pairs {
        let name = match h.ty(*key)? {
            Type::Variable { name } => name.clone(),
            _ => return Err(KernelError::ShapeMismatch),
        };
        h.ty(*image)?;
        if theta.insert(name, *image).is_some() {
            return Err(KernelError::ShapeMismatch);
        }
    }
    Ok(theta)
}

/// Pairs of (variable term, image term).
pub(crate) fn term_substitution(h: &Heaps, pairs: &[(Handle, Handle)]) -> Result<TermSubstitution> {
    let mut sigma = TermSubstitution::new();
    for (key, image) in pairs {
        let var = match &h.term(*key)?.node {
            TermNode::Variable { name, ty } => (name.clone(), *ty),
            _ => return Err(KernelError::ShapeMismatch),
        };
        h.term(*image)?;
        sigma.push((var, *image));
    }
    Ok(sigma)
}
