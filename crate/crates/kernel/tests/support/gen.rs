//! Random well-typed terms over a small signature, built directly on heaps.

#![allow(dead_code)]

use kernel::handle::{TYPE_BOOL, TYPE_NAT};
use kernel::{Handle, Heaps, TypeSubstitution};
use rand::seq::SliceRandom;
use rand::Rng;

pub const NAMES: [&str; 3] = ["x", "y", "z"];

/// Types the generator draws from, as handles in one heap.
#[derive(Clone, Debug)]
pub struct Signature {
    pub bool_: Handle,
    pub nat: Handle,
    pub types: Vec<Handle>,
    /// `(type, constant term)` leaves.
    pub constants: Vec<(Handle, Handle)>,
}

impl Signature {
    pub fn new(h: &mut Heaps) -> Signature {
        let none = TypeSubstitution::new();
        let bb = h.allocate_function_type(TYPE_BOOL, TYPE_BOOL).unwrap();
        let nb = h.allocate_function_type(TYPE_NAT, TYPE_BOOL).unwrap();
        let nn = h.allocate_function_type(TYPE_NAT, TYPE_NAT).unwrap();
        let bbb = h.allocate_function_type(TYPE_BOOL, bb).unwrap();
        let nnb = h.allocate_function_type(TYPE_NAT, nb).unwrap();
        let named = |h: &mut Heaps, n: &str, theta: &TypeSubstitution| {
            let c = h.constant_by_name(n).unwrap();
            h.allocate_constant(c, theta).unwrap()
        };
        let at = |ty: Handle| TypeSubstitution::from([("A".to_string(), ty)]);
        let constants = vec![
            (TYPE_BOOL, named(h, "true", &none)),
            (TYPE_BOOL, named(h, "false", &none)),
            (TYPE_NAT, named(h, "zero", &none)),
            (nn, named(h, "suc", &none)),
            (bbb, named(h, "==>", &none)),
            (bbb, named(h, "=", &at(TYPE_BOOL))),
            (nnb, named(h, "=", &at(TYPE_NAT))),
        ];
        Signature {
            bool_: TYPE_BOOL,
            nat: TYPE_NAT,
            types: vec![TYPE_BOOL, TYPE_NAT, bb, nb, nn],
            constants,
        }
    }

    fn leaf(&self, h: &mut Heaps, rng: &mut impl Rng, ty: Handle) -> Handle {
        let consts: Vec<Handle> = self
            .constants
            .iter()
            .filter(|(t, _)| h.types_equal(*t, ty))
            .map(|(_, c)| *c)
            .collect();
        if !consts.is_empty() && rng.gen_bool(0.4) {
            *consts.choose(rng).unwrap()
        } else {
            h.allocate_variable(NAMES.choose(rng).unwrap(), ty).unwrap()
        }
    }

    /// A random term of type `ty` with at most `depth` levels.
    pub fn term(&self, h: &mut Heaps, rng: &mut impl Rng, ty: Handle, depth: u32) -> Handle {
        if depth == 0 || rng.gen_bool(0.25) {
            return self.leaf(h, rng, ty);
        }
        match (h.dest_function_type(ty), rng.gen_range(0..3)) {
            (Some((a, b)), 0) => {
                let body = self.term(h, rng, b, depth - 1);
                h.allocate_lambda(NAMES.choose(rng).unwrap(), a, body).unwrap()
            }
            _ => {
                let arg_ty = *[self.bool_, self.nat].choose(rng).unwrap();
                let fty = h.allocate_function_type(arg_ty, ty).unwrap();
                let f = self.term(h, rng, fty, depth - 1);
                let x = self.term(h, rng, arg_ty, depth - 1);
                h.allocate_application(f, x).unwrap()
            }
        }
    }

    /// A random term of a random type.
    pub fn any_term(&self, h: &mut Heaps, rng: &mut impl Rng, depth: u32) -> Handle {
        let ty = *self.types.choose(rng).unwrap();
        self.term(h, rng, ty, depth)
    }

    /// A random proposition.
    pub fn proposition(&self, h: &mut Heaps, rng: &mut impl Rng, depth: u32) -> Handle {
        self.term(h, rng, self.bool_, depth)
    }
}
