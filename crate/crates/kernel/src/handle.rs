//! Kernel handles and the table of preallocated, well-known objects.
//!
//! A handle is the only name a guest ever holds for a kernel object.  Values
//! below [`FIRST_FRESH`] are reserved for objects created at boot with stable,
//! documented values; everything else comes from the shared allocation
//! counter.

use serde::Serialize;
use std::fmt;

/// Opaque name of one kernel object.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Handle(u64);

impl Handle {
    pub const fn new(value: u64) -> Self {
        Handle(value)
    }

    pub const fn value(self) -> u64 {
        self.0
    }
}

impl From<u64> for Handle {
    fn from(value: u64) -> Self {
        Handle(value)
    }
}

impl From<Handle> for u64 {
    fn from(h: Handle) -> Self {
        h.0
    }
}

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// The five kinds of kernel object, each living in its own arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    TypeFormer,
    Type,
    Constant,
    Term,
    Theorem,
}

impl Kind {
    pub const ALL: [Kind; 5] = [
        Kind::TypeFormer,
        Kind::Type,
        Kind::Constant,
        Kind::Term,
        Kind::Theorem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::TypeFormer => "type-former",
            Kind::Type => "type",
            Kind::Constant => "constant",
            Kind::Term => "term",
            Kind::Theorem => "theorem",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// First handle value handed out by the allocation counter.
pub const FIRST_FRESH: u64 = 64;

// Type-formers.
pub const FORMER_PROP: Handle = Handle(0);
pub const FORMER_FUN: Handle = Handle(1);
pub const FORMER_NAT: Handle = Handle(2);
pub const FORMER_META: Handle = Handle(3);
pub const FORMER_HISTORY: Handle = Handle(4);

// Types.
pub const TYPE_BOOL: Handle = Handle(8);
pub const TYPE_ALPHA: Handle = Handle(9);
pub const TYPE_NAT: Handle = Handle(10);
pub const TYPE_META: Handle = Handle(11);
pub const TYPE_HISTORY: Handle = Handle(12);

/// Name of the type variable in the polymorphic constants' declared types.
pub const TYPE_VARIABLE_ALPHA: &str = "A";

// Constants.
pub const CONSTANT_EQUALITY: Handle = Handle(16);
pub const CONSTANT_TRUE: Handle = Handle(17);
pub const CONSTANT_FALSE: Handle = Handle(18);
pub const CONSTANT_IMPLIES: Handle = Handle(19);
pub const CONSTANT_FORALL: Handle = Handle(20);
pub const CONSTANT_ZERO: Handle = Handle(21);
pub const CONSTANT_SUC: Handle = Handle(22);
pub const CONSTANT_MK_META: Handle = Handle(23);
pub const CONSTANT_HIST_NIL: Handle = Handle(24);
pub const CONSTANT_HIST_CONS: Handle = Handle(25);

// Axioms.
pub const AXIOM_SUC_INJECTIVE: Handle = Handle(32);
pub const AXIOM_SUC_NOT_ZERO: Handle = Handle(33);
pub const AXIOM_MK_META_INJECTIVE_0: Handle = Handle(34);
pub const AXIOM_MK_META_INJECTIVE_1: Handle = Handle(35);
pub const AXIOM_MK_META_INJECTIVE_2: Handle = Handle(36);
pub const AXIOM_HIST_CONS_NOT_NIL: Handle = Handle(37);
pub const AXIOM_HIST_CONS_INJECTIVE: Handle = Handle(38);

pub const AXIOMS: [Handle; 7] = [
    AXIOM_SUC_INJECTIVE,
    AXIOM_SUC_NOT_ZERO,
    AXIOM_MK_META_INJECTIVE_0,
    AXIOM_MK_META_INJECTIVE_1,
    AXIOM_MK_META_INJECTIVE_2,
    AXIOM_HIST_CONS_NOT_NIL,
    AXIOM_HIST_CONS_INJECTIVE,
];
