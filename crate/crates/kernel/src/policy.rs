//! The prevailing policy, state reification, challenges, the obligation
//! protocol for gated syscalls, the syscall history, and jailing.
//!
//! A gated syscall runs in two phases.  Called with obligation id 0, it
//! reifies the current state as `(k, u, s)`, pins it in a fresh obligation
//! together with the β-normal challenge `policy k u s`, and reports
//! `ObligationPending`.  The guest proves the challenge, discharges the
//! obligation, and repeats the call with the obligation id; the call then
//! proceeds if its metadata matches what was pinned.

use crate::error::{KernelError, Result};
use crate::handle::{Handle, TYPE_HISTORY, TYPE_META, TYPE_NAT};
use crate::kernel::Kernel;
use serde::Serialize;
use std::collections::BTreeMap;

/// Packed metadata of one gated syscall invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SyscallMeta {
    pub number: u64,
    pub arg1: u64,
    pub arg2: u64,
}

impl SyscallMeta {
    pub fn new(number: u64, arg1: u64, arg2: u64) -> Self {
        SyscallMeta { number, arg1, arg2 }
    }
}

/// Reified `(k, u, s)` captured when an obligation was created.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReifiedState {
    pub kernel: Handle,
    pub history: Handle,
    pub syscall: Handle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obligation {
    pub id: u64,
    pub meta: SyscallMeta,
    pub pinned: ReifiedState,
    pub challenge: Handle,
    pub discharged: bool,
    /// Set once the gated syscall it was issued for has completed.
    pub consumed: bool,
}

/// Outcome of gating one syscall invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Allow { obligation: u64 },
    Pending { obligation: u64, challenge: Handle },
}

#[derive(Clone, Debug)]
pub struct PolicyState {
    current: Handle,
    obligations: BTreeMap<u64, Obligation>,
    next_obligation: u64,
    history: Vec<SyscallMeta>,
}

impl PolicyState {
    pub(crate) fn new(boot_policy: Handle) -> Self {
        PolicyState {
            current: boot_policy,
            obligations: BTreeMap::new(),
            next_obligation: 1,
            history: Vec::new(),
        }
    }

    pub fn current(&self) -> Handle {
        self.current
    }

    pub fn history(&self) -> &[SyscallMeta] {
        &self.history
    }

    pub fn obligations(&self) -> impl Iterator<Item = &Obligation> {
        self.obligations.values()
    }

    pub fn obligation(&self, id: u64) -> Option<&Obligation> {
        self.obligations.get(&id)
    }
}

impl Kernel {
    pub fn policy_current(&self) -> Handle {
        self.policy.current
    }

    /// `suc^n zero`, extending the cached numerals as needed.
    pub fn numeral(&mut self, n: usize) -> Result<Handle> {
        while self.heaps.memo.numerals.len() <= n {
            let prev = *self.heaps.memo.numerals.last().expect("zero is cached at boot");
            let suc = self.heaps.prelude.suc_term;
            let next = self.heaps.allocate_application(suc, prev)?;
            self.heaps.memo.numerals.push(next);
        }
        Ok(self.heaps.memo.numerals[n])
    }

    fn numeral_u64(&mut self, n: u64) -> Result<Handle> {
        let n = usize::try_from(n).map_err(|_| KernelError::ArenaExhausted)?;
        self.numeral(n)
    }

    /// `mkMeta n₁ n₂ n₃` for the syscall number and two argument slots.
    pub fn reify_meta(&mut self, meta: SyscallMeta) -> Result<Handle> {
        let a = self.numeral_u64(meta.number)?;
        let b = self.numeral_u64(meta.arg1)?;
        let c = self.numeral_u64(meta.arg2)?;
        let mk = self.heaps.prelude.mk_meta_term;
        let t = self.heaps.allocate_application(mk, a)?;
        let t = self.heaps.allocate_application(t, b)?;
        self.heaps.allocate_application(t, c)
    }

    /// The history as a `histCons` chain, most recent entry first.
    pub fn history_reify(&mut self) -> Result<Handle> {
        while self.heaps.memo.history.len() <= self.policy.history.len() {
            let i = self.heaps.memo.history.len() - 1;
            let meta = self.policy.history[i];
            let tail = self.heaps.memo.history[i];
            let head = self.reify_meta(meta)?;
            let cons = self.heaps.prelude.hist_cons_term;
            let t = self.heaps.allocate_application(cons, head)?;
            let chain = self.heaps.allocate_application(t, tail)?;
            self.heaps.memo.history.push(chain);
        }
        Ok(self.heaps.memo.history[self.policy.history.len()])
    }

    /// Reifies `(k, u, s)`: the object count before reification, the history,
    /// and the call's metadata.
    pub fn reify_state(&mut self, meta: SyscallMeta) -> Result<ReifiedState> {
        let count = self.heaps.object_count();
        let kernel = self.numeral(count)?;
        let history = self.history_reify()?;
        let syscall = self.reify_meta(meta)?;
        Ok(ReifiedState {
            kernel,
            history,
            syscall,
        })
    }

    /// β-normal form of `policy k u s`.
    pub fn challenge_build(&mut self, policy: Handle, state: ReifiedState) -> Result<Handle> {
        let t = self.heaps.allocate_application(policy, state.kernel)?;
        let t = self.heaps.allocate_application(t, state.history)?;
        let t = self.heaps.allocate_application(t, state.syscall)?;
        self.heaps.beta_normalize(t)
    }

    /// Decides whether a gated call may proceed.  `obligation == 0` requests a
    /// fresh challenge.
    pub fn gate(&mut self, meta: SyscallMeta, obligation: u64) -> Result<Gate> {
        if obligation == 0 {
            let pinned = self.reify_state(meta)?;
            let challenge = self.challenge_build(self.policy.current, pinned)?;
            let id = self.policy.next_obligation;
            self.policy.next_obligation += 1;
            self.policy.obligations.insert(
                id,
                Obligation {
                    id,
                    meta,
                    pinned,
                    challenge,
                    discharged: false,
                    consumed: false,
                },
            );
            return Ok(Gate::Pending {
                obligation: id,
                challenge,
            });
        }
        let ob = match self.policy.obligations.get(&obligation) {
            Some(ob) if !ob.consumed => ob,
            _ => return Err(KernelError::ObligationUnknown),
        };
        if ob.meta != meta {
            return Err(KernelError::ObligationMismatch);
        }
        if !ob.discharged {
            return Ok(Gate::Pending {
                obligation,
                challenge: ob.challenge,
            });
        }
        Ok(Gate::Allow { obligation })
    }

    /// Records completion of a gated call that was allowed under `obligation`.
    pub(crate) fn complete_gated(&mut self, obligation: u64, meta: SyscallMeta) {
        let ob = self
            .policy
            .obligations
            .get_mut(&obligation)
            .expect("allowed obligation exists");
        debug_assert!(ob.discharged && !ob.consumed && ob.meta == meta);
        ob.consumed = true;
        self.policy.history.push(meta);
        self.gate_completions += 1;
    }

    /// Accepts `proof` for obligation `id` iff it has no hypotheses and its
    /// conclusion normalizes to the pinned challenge.
    pub fn obligation_discharge(&mut self, id: u64, proof: Handle) -> Result<()> {
        let challenge = match self.policy.obligations.get(&id) {
            Some(ob) if !ob.consumed => ob.challenge,
            _ => return Err(KernelError::ObligationUnknown),
        };
        let th = self.heaps.theorem(proof)?;
        let (empty, conclusion) = (th.hypotheses().is_empty(), th.conclusion());
        let cp = self.heaps.checkpoint();
        let accepted = empty
            && matches!(
                self.heaps
                    .beta_normalize(conclusion)
                    .and_then(|n| self.heaps.alpha_equivalent(n, challenge)),
                Ok(true)
            );
        self.heaps.rollback(cp);
        if !accepted {
            return Err(KernelError::ProofRejected);
        }
        self.policy
            .obligations
            .get_mut(&id)
            .expect("checked above")
            .discharged = true;
        Ok(())
    }

    /// Replaces the policy with `new_policy` given a hypothesis-free proof of
    /// `∀k u s. new_policy k u s ==> current k u s`.
    pub fn policy_install(&mut self, new_policy: Handle, refinement: Handle) -> Result<()> {
        let pty = self.heaps.type_of(new_policy)?;
        if !self.heaps.types_equal(pty, self.heaps.prelude.policy_type)
            || !self.heaps.is_closed(new_policy)?
        {
            return Err(KernelError::TypeMismatch);
        }
        let th = self.heaps.theorem(refinement)?;
        let (empty, conclusion) = (th.hypotheses().is_empty(), th.conclusion());
        let current = self.policy.current;
        let cp = self.heaps.checkpoint();
        let accepted = empty
            && matches!(
                self.refinement_statement(new_policy, current)
                    .and_then(|e| self.heaps.beta_normalize(e))
                    .and_then(|e| {
                        let c = self.heaps.beta_normalize(conclusion)?;
                        self.heaps.alpha_equivalent(e, c)
                    }),
                Ok(true)
            );
        self.heaps.rollback(cp);
        if !accepted {
            return Err(KernelError::RefinementRejected);
        }
        self.policy.current = new_policy;
        Ok(())
    }

    /// `∀k u s. psi k u s ==> phi k u s`, unnormalized.
    pub fn refinement_statement(&mut self, psi: Handle, phi: Handle) -> Result<Handle> {
        let h = &mut self.heaps;
        let k = h.allocate_variable("k", TYPE_NAT)?;
        let u = h.allocate_variable("u", TYPE_HISTORY)?;
        let s = h.allocate_variable("s", TYPE_META)?;
        let mut apply = |f: Handle| -> Result<Handle> {
            let t = h.allocate_application(f, k)?;
            let t = h.allocate_application(t, u)?;
            h.allocate_application(t, s)
        };
        let lhs = apply(psi)?;
        let rhs = apply(phi)?;
        let body = h.mk_implication(lhs, rhs)?;
        let body = h.mk_forall("s", TYPE_META, body)?;
        let body = h.mk_forall("u", TYPE_HISTORY, body)?;
        h.mk_forall("k", TYPE_NAT, body)
    }
}
