//! Append-only kernel heaps.
//!
//! Each object kind lives in its own [`Arena`], but all arenas draw handle
//! values from one counter held by [`Heaps`], so a handle value names at most
//! one object across the whole kernel.  Entries are never removed or
//! overwritten once a syscall has succeeded; the only way entries disappear is
//! [`Heaps::rollback`], which undoes the allocations of a syscall that failed.

use crate::error::{KernelError, Result};
use crate::handle::{Handle, Kind, FIRST_FRESH};
use crate::term::Term;
use crate::theorem::Theorem;
use crate::types::{Constant, Type, TypeFormer};
use std::collections::BTreeMap;

/// A table of objects of one kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena<T> {
    kind: Kind,
    entries: BTreeMap<Handle, T>,
}

impl<T> Arena<T> {
    pub fn new(kind: Kind) -> Self {
        Arena {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn get(&self, h: Handle) -> Option<&T> {
        self.entries.get(&h)
    }

    pub fn contains(&self, h: Handle) -> bool {
        self.entries.contains_key(&h)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending handle order.
    pub fn iter(&self) -> impl Iterator<Item = (Handle, &T)> {
        self.entries.iter().map(|(h, t)| (*h, t))
    }

    fn insert(&mut self, h: Handle, payload: T) {
        let previous = self.entries.insert(h, payload);
        debug_assert!(previous.is_none(), "{} arena slot {h} reused", self.kind);
    }

    fn truncate_from(&mut self, mark: Handle) {
        self.entries.split_off(&mark);
    }
}

/// Implemented by every kernel object payload.
pub trait KernelObject: Sized {
    const KIND: Kind;

    fn arena(heaps: &Heaps) -> &Arena<Self>;

    fn arena_mut(heaps: &mut Heaps) -> &mut Arena<Self>;

    /// Every handle stored inside the payload, tagged with the kind of arena
    /// it must resolve in.
    fn references(&self, out: &mut Vec<(Kind, Handle)>);
}

/// Position in the allocation sequence that [`Heaps::rollback`] can return to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    next: u64,
}

/// Terms the kernel builds once and reuses, allocated at boot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Prelude {
    pub true_term: Handle,
    pub false_term: Handle,
    pub implies_term: Handle,
    pub zero_term: Handle,
    pub suc_term: Handle,
    pub mk_meta_term: Handle,
    pub hist_nil_term: Handle,
    pub hist_cons_term: Handle,
    pub top_policy: Handle,
    pub bottom_policy: Handle,
    /// `nat → history → meta → bool`.
    pub policy_type: Handle,
}

/// Derived terms cached across syscalls.  Truncated on rollback.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Memo {
    /// `numerals[n]` is `suc^n zero`.
    pub numerals: Vec<Handle>,
    /// `history[n]` reifies the first `n` history entries.
    pub history: Vec<Handle>,
}

impl Memo {
    fn truncate_from(&mut self, mark: Handle) {
        while self.numerals.last().is_some_and(|h| *h >= mark) {
            self.numerals.pop();
        }
        while self.history.last().is_some_and(|h| *h >= mark) {
            self.history.pop();
        }
    }
}

/// All kernel heaps plus the shared allocation counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Heaps {
    pub(crate) formers: Arena<TypeFormer>,
    pub(crate) types: Arena<Type>,
    pub(crate) constants: Arena<Constant>,
    pub(crate) terms: Arena<Term>,
    pub(crate) theorems: Arena<Theorem>,
    next: u64,
    pub(crate) former_names: BTreeMap<String, Handle>,
    pub(crate) constant_names: BTreeMap<String, Handle>,
    pub(crate) prelude: Prelude,
    pub(crate) memo: Memo,
}

impl Heaps {
    /// Heaps with nothing in them and the counter at [`FIRST_FRESH`].  Use
    /// [`Heaps::boot`] for a usable kernel.
    pub fn empty() -> Self {
        Heaps {
            formers: Arena::new(Kind::TypeFormer),
            types: Arena::new(Kind::Type),
            constants: Arena::new(Kind::Constant),
            terms: Arena::new(Kind::Term),
            theorems: Arena::new(Kind::Theorem),
            next: FIRST_FRESH,
            former_names: BTreeMap::new(),
            constant_names: BTreeMap::new(),
            prelude: Prelude::default(),
            memo: Memo::default(),
        }
    }

    pub fn prelude(&self) -> &Prelude {
        &self.prelude
    }

    /// Value the next allocation will receive.
    pub fn next_handle(&self) -> u64 {
        self.next
    }

    #[doc(hidden)]
    pub fn force_counter(&mut self, next: u64) {
        assert!(next >= self.next);
        self.next = next;
    }

    fn fresh(&mut self) -> Result<Handle> {
        if self.next == u64::MAX {
            return Err(KernelError::ArenaExhausted);
        }
        let h = Handle::new(self.next);
        self.next += 1;
        Ok(h)
    }

    /// Stores `payload` under a fresh handle.  The caller has checked that
    /// every handle inside `payload` is live.
    pub fn allocate<T: KernelObject>(&mut self, payload: T) -> Result<Handle> {
        let h = self.fresh()?;
        T::arena_mut(self).insert(h, payload);
        Ok(h)
    }

    /// Stores a boot object at a reserved handle value.
    pub(crate) fn place<T: KernelObject>(&mut self, h: Handle, payload: T) {
        debug_assert!(h.value() < FIRST_FRESH);
        debug_assert!(self.kind_of(h).is_none());
        T::arena_mut(self).insert(h, payload);
    }

    pub fn resolve<T: KernelObject>(&self, h: Handle) -> Result<&T> {
        match T::arena(self).get(h) {
            Some(payload) => Ok(payload),
            None if self.kind_of(h).is_some() => Err(KernelError::KindMismatch),
            None => Err(KernelError::DanglingHandle),
        }
    }

    pub fn is_live<T: KernelObject>(&self, h: Handle) -> bool {
        T::arena(self).contains(h)
    }

    /// Which arena, if any, `h` lives in.
    pub fn kind_of(&self, h: Handle) -> Option<Kind> {
        if self.formers.contains(h) {
            Some(Kind::TypeFormer)
        } else if self.types.contains(h) {
            Some(Kind::Type)
        } else if self.constants.contains(h) {
            Some(Kind::Constant)
        } else if self.terms.contains(h) {
            Some(Kind::Term)
        } else if self.theorems.contains(h) {
            Some(Kind::Theorem)
        } else {
            None
        }
    }

    pub fn is_live_kind(&self, kind: Kind, h: Handle) -> bool {
        self.kind_of(h) == Some(kind)
    }

    /// Total number of live kernel objects across all arenas.
    pub fn object_count(&self) -> usize {
        self.formers.len()
            + self.types.len()
            + self.constants.len()
            + self.terms.len()
            + self.theorems.len()
    }

    pub fn type_formers(&self) -> &Arena<TypeFormer> {
        &self.formers
    }

    pub fn types(&self) -> &Arena<Type> {
        &self.types
    }

    pub fn constants(&self) -> &Arena<Constant> {
        &self.constants
    }

    pub fn terms(&self) -> &Arena<Term> {
        &self.terms
    }

    pub fn theorems(&self) -> &Arena<Theorem> {
        &self.theorems
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { next: self.next }
    }

    /// Drops every object allocated since `cp`.
    pub fn rollback(&mut self, cp: Checkpoint) {
        if cp.next == self.next {
            return;
        }
        let mark = Handle::new(cp.next);
        self.formers.truncate_from(mark);
        self.types.truncate_from(mark);
        self.constants.truncate_from(mark);
        self.terms.truncate_from(mark);
        self.theorems.truncate_from(mark);
        self.former_names.retain(|_, h| *h < mark);
        self.constant_names.retain(|_, h| *h < mark);
        self.memo.truncate_from(mark);
        self.next = cp.next;
    }

    /// Every `(owner, kind, referenced handle)` edge in the object graph.
    pub fn references(&self) -> Vec<(Handle, Kind, Handle)> {
        fn collect<T: KernelObject>(
            arena: &Arena<T>,
            out: &mut Vec<(Handle, Kind, Handle)>,
        ) {
            let mut buf = Vec::new();
            for (h, payload) in arena.iter() {
                buf.clear();
                payload.references(&mut buf);
                out.extend(buf.iter().map(|(k, r)| (h, *k, *r)));
            }
        }
        let mut out = Vec::new();
        collect(&self.formers, &mut out);
        collect(&self.types, &mut out);
        collect(&self.constants, &mut out);
        collect(&self.terms, &mut out);
        collect(&self.theorems, &mut out);
        out
    }

    /// References that fail to resolve in the arena of their kind.  Empty for
    /// any reachable kernel state.
    pub fn dangling_references(&self) -> Vec<(Handle, Kind, Handle)> {
        self.references()
            .into_iter()
            .filter(|(_, kind, h)| !self.is_live_kind(*kind, *h))
            .collect()
    }
}

macro_rules! kernel_object {
    ($ty:ty, $kind:expr, $field:ident) => {
        impl KernelObject for $ty {
            const KIND: Kind = $kind;

            fn arena(heaps: &Heaps) -> &Arena<Self> {
                &heaps.$field
            }

            fn arena_mut(heaps: &mut Heaps) -> &mut Arena<Self> {
                &mut heaps.$field
            }

            fn references(&self, out: &mut Vec<(Kind, Handle)>) {
                self.collect_references(out)
            }
        }
    };
}

kernel_object!(TypeFormer, Kind::TypeFormer, formers);
kernel_object!(Type, Kind::Type, types);
kernel_object!(Constant, Kind::Constant, constants);
kernel_object!(Term, Kind::Term, terms);
kernel_object!(Theorem, Kind::Theorem, theorems);
