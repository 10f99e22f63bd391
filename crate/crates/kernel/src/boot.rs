//! Boot-time population of the heaps: the preallocated type-formers, types
//! and constants at their documented handle values, the reusable prelude
//! terms, the two reference policies and the constructor axioms.

use crate::arena::{Heaps, Prelude};
use crate::error::Result;
use crate::handle::*;
use crate::theorem::Theorem;
use crate::types::{Constant, Type, TypeFormer, TypeSubstitution};

impl Heaps {
    /// Heaps holding exactly the boot objects.
    pub fn boot() -> Heaps {
        let mut heaps = Heaps::empty();
        heaps.populate().expect("boot allocation cannot exhaust the counter");
        heaps
    }

    fn place_former(&mut self, h: Handle, name: &str, arity: usize) {
        self.place(
            h,
            TypeFormer {
                name: name.to_string(),
                arity,
            },
        );
        self.former_names.insert(name.to_string(), h);
    }

    fn place_constant(&mut self, h: Handle, name: &str, declared_type: Handle) {
        self.place(
            h,
            Constant {
                name: name.to_string(),
                declared_type,
            },
        );
        self.constant_names.insert(name.to_string(), h);
    }

    fn populate(&mut self) -> Result<()> {
        self.place_former(FORMER_PROP, "prop", 0);
        self.place_former(FORMER_FUN, "fun", 2);
        self.place_former(FORMER_NAT, "nat", 0);
        self.place_former(FORMER_META, "meta", 0);
        self.place_former(FORMER_HISTORY, "history", 0);

        let nullary = |former| Type::Application {
            former,
            args: Vec::new(),
        };
        self.place(TYPE_BOOL, nullary(FORMER_PROP));
        self.place(
            TYPE_ALPHA,
            Type::Variable {
                name: TYPE_VARIABLE_ALPHA.to_string(),
            },
        );
        self.place(TYPE_NAT, nullary(FORMER_NAT));
        self.place(TYPE_META, nullary(FORMER_META));
        self.place(TYPE_HISTORY, nullary(FORMER_HISTORY));

        let fun = |heaps: &mut Heaps, d, c| heaps.allocate_function_type(d, c);
        let a_bool = fun(self, TYPE_ALPHA, TYPE_BOOL)?;
        let a_a_bool = fun(self, TYPE_ALPHA, a_bool)?;
        let bool_bool = fun(self, TYPE_BOOL, TYPE_BOOL)?;
        let bool_bool_bool = fun(self, TYPE_BOOL, bool_bool)?;
        let quantifier = fun(self, a_bool, TYPE_BOOL)?;
        let nat_nat = fun(self, TYPE_NAT, TYPE_NAT)?;
        let nat_meta = fun(self, TYPE_NAT, TYPE_META)?;
        let nat2_meta = fun(self, TYPE_NAT, nat_meta)?;
        let nat3_meta = fun(self, TYPE_NAT, nat2_meta)?;
        let hist_hist = fun(self, TYPE_HISTORY, TYPE_HISTORY)?;
        let meta_hist_hist = fun(self, TYPE_META, hist_hist)?;

        self.place_constant(CONSTANT_EQUALITY, "=", a_a_bool);
        self.place_constant(CONSTANT_TRUE, "true", TYPE_BOOL);
        self.place_constant(CONSTANT_FALSE, "false", TYPE_BOOL);
        self.place_constant(CONSTANT_IMPLIES, "==>", bool_bool_bool);
        self.place_constant(CONSTANT_FORALL, "forall", quantifier);
        self.place_constant(CONSTANT_ZERO, "zero", TYPE_NAT);
        self.place_constant(CONSTANT_SUC, "suc", nat_nat);
        self.place_constant(CONSTANT_MK_META, "mkMeta", nat3_meta);
        self.place_constant(CONSTANT_HIST_NIL, "histNil", TYPE_HISTORY);
        self.place_constant(CONSTANT_HIST_CONS, "histCons", meta_hist_hist);

        let none = TypeSubstitution::new();
        let mut prelude = Prelude {
            true_term: self.allocate_constant(CONSTANT_TRUE, &none)?,
            false_term: self.allocate_constant(CONSTANT_FALSE, &none)?,
            implies_term: self.allocate_constant(CONSTANT_IMPLIES, &none)?,
            zero_term: self.allocate_constant(CONSTANT_ZERO, &none)?,
            suc_term: self.allocate_constant(CONSTANT_SUC, &none)?,
            mk_meta_term: self.allocate_constant(CONSTANT_MK_META, &none)?,
            hist_nil_term: self.allocate_constant(CONSTANT_HIST_NIL, &none)?,
            hist_cons_term: self.allocate_constant(CONSTANT_HIST_CONS, &none)?,
            ..Prelude::default()
        };
        let meta_bool = fun(self, TYPE_META, TYPE_BOOL)?;
        let hist_meta_bool = fun(self, TYPE_HISTORY, meta_bool)?;
        prelude.policy_type = fun(self, TYPE_NAT, hist_meta_bool)?;
        self.prelude = prelude;
        self.prelude.top_policy = self.constant_policy(prelude.true_term)?;
        self.prelude.bottom_policy = self.constant_policy(prelude.false_term)?;
        self.memo.numerals.push(prelude.zero_term);
        self.memo.history.push(prelude.hist_nil_term);

        self.place_axioms()
    }

    /// `λk:nat. λu:history. λs:meta. body`.
    pub(crate) fn constant_policy(&mut self, body: Handle) -> Result<Handle> {
        let s = self.allocate_lambda("s", TYPE_META, body)?;
        let u = self.allocate_lambda("u", TYPE_HISTORY, s)?;
        self.allocate_lambda("k", TYPE_NAT, u)
    }

    fn apply2(&mut self, f: Handle, a: Handle, b: Handle) -> Result<Handle> {
        let fa = self.allocate_application(f, a)?;
        self.allocate_application(fa, b)
    }

    fn apply3(&mut self, f: Handle, a: Handle, b: Handle, c: Handle) -> Result<Handle> {
        let fab = self.apply2(f, a, b)?;
        self.allocate_application(fab, c)
    }

    fn forall_all(&mut self, vars: &[(&str, Handle)], body: Handle) -> Result<Handle> {
        vars.iter()
            .rev()
            .try_fold(body, |acc, (name, ty)| self.mk_forall(name, *ty, acc))
    }

    fn place_axioms(&mut self) -> Result<()> {
        let p = self.prelude;
        let var = |heaps: &mut Heaps, n: &str, ty| heaps.allocate_variable(n, ty);

        // ∀n m. suc n = suc m ==> n = m
        let n = var(self, "n", TYPE_NAT)?;
        let m = var(self, "m", TYPE_NAT)?;
        let sn = self.allocate_application(p.suc_term, n)?;
        let sm = self.allocate_application(p.suc_term, m)?;
        let lhs = self.mk_equality(sn, sm)?;
        let rhs = self.mk_equality(n, m)?;
        let body = self.mk_implication(lhs, rhs)?;
        let ax = self.forall_all(&[("n", TYPE_NAT), ("m", TYPE_NAT)], body)?;
        self.place(AXIOM_SUC_INJECTIVE, Theorem::axiom(ax));

        // ∀n. suc n = zero ==> false
        let lhs = self.mk_equality(sn, p.zero_term)?;
        let body = self.mk_implication(lhs, p.false_term)?;
        let ax = self.forall_all(&[("n", TYPE_NAT)], body)?;
        self.place(AXIOM_SUC_NOT_ZERO, Theorem::axiom(ax));

        // ∀a b c d e f. mkMeta a b c = mkMeta d e f ==> a = d, and likewise
        // b = e and c = f
        let names = ["a", "b", "c", "d", "e", "f"];
        let mut vs = Vec::new();
        for name in names {
            vs.push(var(self, name, TYPE_NAT)?);
        }
        let left = self.apply3(p.mk_meta_term, vs[0], vs[1], vs[2])?;
        let right = self.apply3(p.mk_meta_term, vs[3], vs[4], vs[5])?;
        let premise = self.mk_equality(left, right)?;
        let binders: Vec<(&str, Handle)> = names.iter().map(|n| (*n, TYPE_NAT)).collect();
        for (i, slot) in [
            AXIOM_MK_META_INJECTIVE_0,
            AXIOM_MK_META_INJECTIVE_1,
            AXIOM_MK_META_INJECTIVE_2,
        ]
        .into_iter()
        .enumerate()
        {
            let eq = self.mk_equality(vs[i], vs[i + 3])?;
            let body = self.mk_implication(premise, eq)?;
            let ax = self.forall_all(&binders, body)?;
            self.place(slot, Theorem::axiom(ax));
        }

        // ∀m h. histCons m h = histNil ==> false
        let mv = var(self, "m", TYPE_META)?;
        let hv = var(self, "h", TYPE_HISTORY)?;
        let cons = self.apply2(p.hist_cons_term, mv, hv)?;
        let lhs = self.mk_equality(cons, p.hist_nil_term)?;
        let body = self.mk_implication(lhs, p.false_term)?;
        let ax = self.forall_all(&[("m", TYPE_META), ("h", TYPE_HISTORY)], body)?;
        self.place(AXIOM_HIST_CONS_NOT_NIL, Theorem::axiom(ax));

        // ∀m h n g. histCons m h = histCons n g ==> m = n
        let nv = var(self, "n", TYPE_META)?;
        let gv = var(self, "g", TYPE_HISTORY)?;
        let cons2 = self.apply2(p.hist_cons_term, nv, gv)?;
        let lhs = self.mk_equality(cons, cons2)?;
        let rhs = self.mk_equality(mv, nv)?;
        let body = self.mk_implication(lhs, rhs)?;
        let ax = self.forall_all(
            &[
                ("m", TYPE_META),
                ("h", TYPE_HISTORY),
                ("n", TYPE_META),
                ("g", TYPE_HISTORY),
            ],
            body,
        )?;
        self.place(AXIOM_HIST_CONS_INJECTIVE, Theorem::axiom(ax));
        Ok(())
    }
}
