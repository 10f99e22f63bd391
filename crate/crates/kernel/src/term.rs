//! HOL terms: allocation, typing, queries and α-equivalence.
//!
//! Terms are name-carrying.  Every term records its type when allocated, so
//! `type_of` is a field read, and a flag saying whether it is already in
//! β-normal form.

use crate::arena::Heaps;
use crate::error::{KernelError, Result};
use crate::handle::{
    Handle, Kind, CONSTANT_EQUALITY, CONSTANT_FALSE, CONSTANT_FORALL, CONSTANT_IMPLIES,
    CONSTANT_TRUE, TYPE_VARIABLE_ALPHA,
};
use crate::types::{TypeKey, TypeSubstitution};
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermNode {
    Variable {
        name: String,
        #[serde(rename = "type")]
        ty: Handle,
    },
    Constant {
        constant: Handle,
        instantiation: TypeSubstitution,
    },
    Application {
        left: Handle,
        right: Handle,
    },
    Lambda {
        name: String,
        #[serde(rename = "type")]
        ty: Handle,
        body: Handle,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub node: TermNode,
    #[serde(rename = "type")]
    pub ty: Handle,
    #[serde(skip)]
    pub(crate) normal: bool,
}

impl Term {
    pub(crate) fn collect_references(&self, out: &mut Vec<(Kind, Handle)>) {
        out.push((Kind::Type, self.ty));
        match &self.node {
            TermNode::Variable { ty, .. } => out.push((Kind::Type, *ty)),
            TermNode::Constant {
                constant,
                instantiation,
            } => {
                out.push((Kind::Constant, *constant));
                out.extend(instantiation.values().map(|h| (Kind::Type, *h)));
            }
            TermNode::Application { left, right } => {
                out.push((Kind::Term, *left));
                out.push((Kind::Term, *right));
            }
            TermNode::Lambda { ty, body, .. } => {
                out.push((Kind::Type, *ty));
                out.push((Kind::Term, *body));
            }
        }
    }
}

/// A free variable as it appears in a term: name plus type handle.
pub type Var = (String, Handle);

/// Term variable to replacement term.  Images must have their key's type.
pub type TermSubstitution = Vec<(Var, Handle)>;

impl Heaps {
    pub fn term(&self, h: Handle) -> Result<&Term> {
        self.resolve(h)
    }

    pub fn type_of(&self, h: Handle) -> Result<Handle> {
        Ok(self.term(h)?.ty)
    }

    /// Allocates a term whose typing the caller has already established.
    pub(crate) fn make_term(&mut self, node: TermNode, ty: Handle) -> Result<Handle> {
        let normal = match &node {
            TermNode::Variable { .. } | TermNode::Constant { .. } => true,
            TermNode::Application { left, right } => {
                let l = &self.terms.get(*left).expect("live left");
                l.normal
                    && !matches!(l.node, TermNode::Lambda { .. })
                    && self.terms.get(*right).expect("live right").normal
            }
            TermNode::Lambda { body, .. } => self.terms.get(*body).expect("live body").normal,
        };
        self.allocate(Term { node, ty, normal })
    }

    pub fn allocate_variable(&mut self, name: &str, ty: Handle) -> Result<Handle> {
        self.ty(ty)?;
        self.make_term(
            TermNode::Variable {
                name: name.to_string(),
                ty,
            },
            ty,
        )
    }

    /// Instantiates `constant`'s declared type with `instantiation`.  Keys that
    /// do not occur in the declared type are dropped.
    pub fn allocate_constant(&mut self, constant: Handle, instantiation: &TypeSubstitution) -> Result<Handle> {
        let declared = self.constant(constant)?.declared_type;
        for h in instantiation.values() {
            self.ty(*h)?;
        }
        let mut used = BTreeSet::new();
        self.type_variables(declared, &mut used);
        let instantiation: TypeSubstitution = instantiation
            .iter()
            .filter(|(k, _)| used.contains(*k))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        let ty = self.substitute_type(declared, &instantiation)?;
        self.make_term(
            TermNode::Constant {
                constant,
                instantiation,
            },
            ty,
        )
    }

    /// Succeeds exactly when `left : A → B` and `right : A`.
    pub fn allocate_application(&mut self, left: Handle, right: Handle) -> Result<Handle> {
        let lty = self.type_of(left)?;
        let rty = self.type_of(right)?;
        let (dom, cod) = self
            .dest_function_type(lty)
            .ok_or(KernelError::TypeMismatch)?;
        if !self.types_equal(dom, rty) {
            return Err(KernelError::TypeMismatch);
        }
        self.make_term(TermNode::Application { left, right }, cod)
    }

    pub fn allocate_lambda(&mut self, name: &str, ty: Handle, body: Handle) -> Result<Handle> {
        self.ty(ty)?;
        let bty = self.type_of(body)?;
        let fty = self.allocate_function_type(ty, bty)?;
        self.make_term(
            TermNode::Lambda {
                name: name.to_string(),
                ty,
                body,
            },
            fty,
        )
    }

    pub fn is_application(&self, h: Handle) -> Result<bool> {
        Ok(matches!(self.term(h)?.node, TermNode::Application { .. }))
    }

    pub fn split_application(&self, h: Handle) -> Result<(Handle, Handle)> {
        match self.term(h)?.node {
            TermNode::Application { left, right } => Ok((left, right)),
            _ => Err(KernelError::NotAnApplication),
        }
    }

    pub fn is_beta_normal(&self, h: Handle) -> Result<bool> {
        Ok(self.term(h)?.normal)
    }

    pub(crate) fn node(&self, h: Handle) -> &TermNode {
        &self.terms.get(h).expect("live term").node
    }

    pub fn dest_lambda(&self, h: Handle) -> Option<(&str, Handle, Handle)> {
        match &self.terms.get(h)?.node {
            TermNode::Lambda { name, ty, body } => Some((name, *ty, *body)),
            _ => None,
        }
    }

    pub fn dest_variable(&self, h: Handle) -> Option<(&str, Handle)> {
        match &self.terms.get(h)?.node {
            TermNode::Variable { name, ty } => Some((name, *ty)),
            _ => None,
        }
    }

    pub fn is_constant_term(&self, h: Handle, constant: Handle) -> bool {
        matches!(&self.terms.get(h).map(|t| &t.node), Some(TermNode::Constant { constant: c, .. }) if *c == constant)
    }

    /// `Some((l, r))` when `h` is `c l r` for the constant `c`.
    pub fn dest_binary(&self, constant: Handle, h: Handle) -> Option<(Handle, Handle)> {
        let TermNode::Application { left, right } = self.terms.get(h)?.node else {
            return None;
        };
        let TermNode::Application { left: op, right: l } = self.terms.get(left)?.node else {
            return None;
        };
        self.is_constant_term(op, constant).then_some((l, right))
    }

    pub fn dest_equality(&self, h: Handle) -> Option<(Handle, Handle)> {
        self.dest_binary(CONSTANT_EQUALITY, h)
    }

    pub fn dest_implication(&self, h: Handle) -> Option<(Handle, Handle)> {
        self.dest_binary(CONSTANT_IMPLIES, h)
    }

    /// `Some((name, type, body))` when `h` is `forall (λname:type. body)`.
    pub fn dest_forall(&self, h: Handle) -> Option<(String, Handle, Handle)> {
        let TermNode::Application { left, right } = self.terms.get(h)?.node else {
            return None;
        };
        if !self.is_constant_term(left, CONSTANT_FORALL) {
            return None;
        }
        let (name, ty, body) = self.dest_lambda(right)?;
        Some((name.to_string(), ty, body))
    }

    pub fn is_true(&self, h: Handle) -> bool {
        self.is_constant_term(h, CONSTANT_TRUE)
    }

    pub fn is_false(&self, h: Handle) -> bool {
        self.is_constant_term(h, CONSTANT_FALSE)
    }

    pub fn is_proposition(&self, h: Handle) -> Result<bool> {
        Ok(self.is_bool_type(self.type_of(h)?))
    }

    /// `l = r`, with `=` instantiated at the type of `l`.
    pub fn mk_equality(&mut self, l: Handle, r: Handle) -> Result<Handle> {
        let ty = self.type_of(l)?;
        let eq = self.allocate_constant(
            CONSTANT_EQUALITY,
            &TypeSubstitution::from([(TYPE_VARIABLE_ALPHA.to_string(), ty)]),
        )?;
        let partial = self.allocate_application(eq, l)?;
        self.allocate_application(partial, r)
    }

    pub fn mk_implication(&mut self, p: Handle, q: Handle) -> Result<Handle> {
        let imp = self.prelude.implies_term;
        let partial = self.allocate_application(imp, p)?;
        self.allocate_application(partial, q)
    }

    /// `forall (λname:ty. body)`.
    pub fn mk_forall(&mut self, name: &str, ty: Handle, body: Handle) -> Result<Handle> {
        let lambda = self.allocate_lambda(name, ty, body)?;
        let all = self.allocate_constant(
            CONSTANT_FORALL,
            &TypeSubstitution::from([(TYPE_VARIABLE_ALPHA.to_string(), ty)]),
        )?;
        self.allocate_application(all, lambda)
    }

    /// Free variables in first-occurrence order, each reported as the handle
    /// of its first occurrence.
    pub fn free_variables(&self, t: Handle) -> Result<Vec<Handle>> {
        self.term(t)?;
        enum Step {
            Visit(Handle),
            Unbind,
        }
        let mut found: Vec<Handle> = Vec::new();
        let mut bound: Vec<(&str, Handle)> = Vec::new();
        let mut stack = vec![Step::Visit(t)];
        while let Some(step) = stack.pop() {
            let h = match step {
                Step::Unbind => {
                    bound.pop();
                    continue;
                }
                Step::Visit(h) => h,
            };
            match self.node(h) {
                TermNode::Variable { name, ty } => {
                    let same = |n: &str, t: Handle| n == name && self.types_equal(t, *ty);
                    if !bound.iter().any(|(n, t)| same(n, *t))
                        && !found.iter().any(|f| {
                            let (n, t) = self.dest_variable(*f).expect("variable");
                            same(n, t)
                        })
                    {
                        found.push(h);
                    }
                }
                TermNode::Constant { .. } => {}
                TermNode::Application { left, right } => {
                    stack.push(Step::Visit(*right));
                    stack.push(Step::Visit(*left));
                }
                TermNode::Lambda { name, ty, body } => {
                    bound.push((name, *ty));
                    stack.push(Step::Unbind);
                    stack.push(Step::Visit(*body));
                }
            }
        }
        Ok(found)
    }

    /// Free variables as `(name, type)` pairs.
    pub fn free_vars(&self, t: Handle) -> Result<Vec<Var>> {
        Ok(self
            .free_variables(t)?
            .into_iter()
            .map(|h| {
                let (n, ty) = self.dest_variable(h).expect("variable");
                (n.to_string(), ty)
            })
            .collect())
    }

    pub fn free_names(&self, t: Handle) -> Result<BTreeSet<String>> {
        Ok(self.free_vars(t)?.into_iter().map(|(n, _)| n).collect())
    }

    pub fn is_free_in(&self, name: &str, ty: Handle, t: Handle) -> Result<bool> {
        Ok(self
            .free_vars(t)?
            .iter()
            .any(|(n, vt)| n == name && self.types_equal(*vt, ty)))
    }

    pub fn is_closed(&self, t: Handle) -> Result<bool> {
        Ok(self.free_variables(t)?.is_empty())
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_equivalent(&self, a: Handle, b: Handle) -> Result<bool> {
        self.term(a)?;
        self.term(b)?;
        let mut env = Vec::new();
        Ok(self.alpha_in(a, b, &mut env))
    }

    fn alpha_in<'a>(&'a self, a: Handle, b: Handle, env: &mut Vec<(&'a str, Handle, &'a str, Handle)>) -> bool {
        crate::deep::deep(|| {
            if a == b && env.iter().all(|(x, _, y, _)| x == y) {
                return true;
            }
            let ta = self.terms.get(a).expect("live term");
            let tb = self.terms.get(b).expect("live term");
            match (&ta.node, &tb.node) {
                (TermNode::Variable { name: x, ty: tx }, TermNode::Variable { name: y, ty: ty_ }) => {
                    let ia = env
                        .iter()
                        .rposition(|(n, t, _, _)| n == x && self.types_equal(*t, *tx));
                    let ib = env
                        .iter()
                        .rposition(|(_, _, n, t)| n == y && self.types_equal(*t, *ty_));
                    match (ia, ib) {
                        (None, None) => x == y && self.types_equal(*tx, *ty_),
                        (Some(i), Some(j)) => i == j,
                        _ => false,
                    }
                }
                (TermNode::Constant { constant: c, .. }, TermNode::Constant { constant: d, .. }) => {
                    c == d && self.types_equal(ta.ty, tb.ty)
                }
                (
                    TermNode::Application { left: l1, right: r1 },
                    TermNode::Application { left: l2, right: r2 },
                ) => self.alpha_in(*l1, *l2, env) && self.alpha_in(*r1, *r2, env),
                (
                    TermNode::Lambda { name: x, ty: tx, body: b1 },
                    TermNode::Lambda { name: y, ty: ty_, body: b2 },
                ) => {
                    if !self.types_equal(*tx, *ty_) {
                        return false;
                    }
                    env.push((x, *tx, y, *ty_));
                    let r = self.alpha_in(*b1, *b2, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        })
    }

    /// α-invariant structural rendering, used to order hypotheses.
    pub fn canonical_key(&self, t: Handle) -> Result<String> {
        self.term(t)?;
        let mut out = String::new();
        let mut binders = Vec::new();
        self.canonical_into(t, &mut binders, &mut out)?;
        Ok(out)
    }

    fn canonical_into<'a>(&'a self, t: Handle, binders: &mut Vec<(&'a str, TypeKey)>, out: &mut String) -> Result<()> {
        crate::deep::deep(|| {
            match self.node(t) {
                TermNode::Variable { name, ty } => {
                    let key = self.type_key(*ty)?;
                    match binders.iter().rposition(|(n, k)| n == name && *k == key) {
                        Some(i) => write!(out, "(b {})", binders.len() - 1 - i).unwrap(),
                        None => write!(out, "(v {name:?} {})", render_key(&key)).unwrap(),
                    }
                }
                TermNode::Constant { constant, .. } => {
                    let key = self.type_key(self.term(t)?.ty)?;
                    write!(out, "(c {} {})", constant.value(), render_key(&key)).unwrap();
                }
                TermNode::Application { left, right } => {
                    out.push_str("(a ");
                    self.canonical_into(*left, binders, out)?;
                    out.push(' ');
                    self.canonical_into(*right, binders, out)?;
                    out.push(')');
                }
                TermNode::Lambda { name, ty, body } => {
                    let key = self.type_key(*ty)?;
                    write!(out, "(l {} ", render_key(&key)).unwrap();
                    binders.push((name, key));
                    self.canonical_into(*body, binders, out)?;
                    binders.pop();
                    out.push(')');
                }
            }
            Ok(())
        })
    }
}

fn render_key(key: &TypeKey) -> String {
    match key {
        TypeKey::Variable(n) => format!("'{n}"),
        TypeKey::Application(f, args) if args.is_empty() => format!("{}", f.value()),
        TypeKey::Application(f, args) => {
            let args: Vec<_> = args.iter().map(render_key).collect();
            format!("({} {})", f.value(), args.join(" "))
        }
    }
}

/// Appends `'` to `base` until the result is not in `avoid`.
pub fn variant(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}
