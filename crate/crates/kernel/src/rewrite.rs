//! Capture-avoiding substitution, type instantiation and β-normalization.
//!
//! Results share every unchanged subterm with the input, so rewriting a term
//! that a substitution does not touch allocates nothing.

use crate::arena::Heaps;
use crate::error::{KernelError, Result};
use crate::handle::Handle;
use crate::term::{variant, TermNode, TermSubstitution, Var};
use crate::types::TypeSubstitution;

impl Heaps {
    /// Simultaneous capture-avoiding substitution.  Bound variables that would
    /// capture a free variable of an image are renamed by appending `'`.
    pub fn substitute(&mut self, t: Handle, sigma: &TermSubstitution) -> Result<Handle> {
        self.term(t)?;
        self.check_term_substitution(sigma)?;
        self.subst_rec(t, sigma)
    }

    pub(crate) fn check_term_substitution(&self, sigma: &TermSubstitution) -> Result<()> {
        for (i, ((name, ty), image)) in sigma.iter().enumerate() {
            self.ty(*ty)?;
            let ity = self.type_of(*image)?;
            if !self.types_equal(*ty, ity) {
                return Err(KernelError::TypeMismatch);
            }
            if sigma[..i]
                .iter()
                .any(|((n, t), _)| n == name && self.types_equal(*t, *ty))
            {
                return Err(KernelError::ShapeMismatch);
            }
        }
        Ok(())
    }

    fn lookup(&self, sigma: &[(Var, Handle)], name: &str, ty: Handle) -> Option<Handle> {
        sigma
            .iter()
            .find(|((n, t), _)| n == name && self.types_equal(*t, ty))
            .map(|(_, img)| *img)
    }

    pub(crate) fn subst_rec(&mut self, t: Handle, sigma: &[(Var, Handle)]) -> Result<Handle> {
        crate::deep::deep(|| {
            if sigma.is_empty() {
                return Ok(t);
            }
            let term = self.term(t)?.clone();
            match term.node {
                TermNode::Variable { name, ty } => Ok(self.lookup(sigma, &name, ty).unwrap_or(t)),
                TermNode::Constant { .. } => Ok(t),
                TermNode::Application { left, right } => {
                    let l = self.subst_rec(left, sigma)?;
                    let r = self.subst_rec(right, sigma)?;
                    if l == left && r == right {
                        Ok(t)
                    } else {
                        self.make_term(TermNode::Application { left: l, right: r }, term.ty)
                    }
                }
                TermNode::Lambda { name, ty, body } => {
                    let free = self.free_vars(body)?;
                    let relevant: Vec<(Var, Handle)> = sigma
                        .iter()
                        .filter(|((n, kt), _)| {
                            !(*n == name && self.types_equal(*kt, ty))
                                && free
                                    .iter()
                                    .any(|(m, mt)| m == n && self.types_equal(*mt, *kt))
                        })
                        .cloned()
                        .collect();
                    if relevant.is_empty() {
                        return Ok(t);
                    }
                    let mut captures = false;
                    for (_, img) in &relevant {
                        if self.is_free_in(&name, ty, *img)? {
                            captures = true;
                            break;
                        }
                    }
                    if captures {
                        let mut avoid = self.free_names(body)?;
                        for (_, img) in &relevant {
                            avoid.extend(self.free_names(*img)?);
                        }
                        let fresh = variant(&name, &avoid);
                        let renamed = self.allocate_variable(&fresh, ty)?;
                        let mut inner = relevant;
                        inner.push(((name, ty), renamed));
                        let body = self.subst_rec(body, &inner)?;
                        self.make_term(
                            TermNode::Lambda {
                                name: fresh,
                                ty,
                                body,
                            },
                            term.ty,
                        )
                    } else {
                        let new_body = self.subst_rec(body, &relevant)?;
                        if new_body == body {
                            Ok(t)
                        } else {
                            self.make_term(
                                TermNode::Lambda {
                                    name,
                                    ty,
                                    body: new_body,
                                },
                                term.ty,
                            )
                        }
                    }
                }
            }
        })
    }

    /// Instantiates type variables throughout `t`: variable types, binder
    /// types and constant instantiations.  Binders are renamed when two
    /// variables distinct before instantiation would become identical.
    pub fn instantiate_types(&mut self, t: Handle, theta: &TypeSubstitution) -> Result<Handle> {
        self.term(t)?;
        for h in theta.values() {
            self.ty(*h)?;
        }
        if theta.is_empty() {
            return Ok(t);
        }
        self.inst_rec(t, theta)
    }

    fn inst_rec(&mut self, t: Handle, theta: &TypeSubstitution) -> Result<Handle> {
        crate::deep::deep(|| {
            let term = self.term(t)?.clone();
            match term.node {
                TermNode::Variable { name, ty } => {
                    let nty = self.substitute_type(ty, theta)?;
                    if nty == ty {
                        Ok(t)
                    } else {
                        self.make_term(TermNode::Variable { name, ty: nty }, nty)
                    }
                }
                TermNode::Constant {
                    constant,
                    instantiation,
                } => {
                    let declared = self.constant(constant)?.declared_type;
                    let mut vars = Default::default();
                    self.type_variables(declared, &mut vars);
                    let mut new_inst = TypeSubstitution::new();
                    for v in vars {
                        let image = match instantiation.get(&v) {
                            Some(h) => Some(self.substitute_type(*h, theta)?),
                            None => theta.get(&v).copied(),
                        };
                        if let Some(image) = image {
                            new_inst.insert(v, image);
                        }
                    }
                    if new_inst == instantiation {
                        return Ok(t);
                    }
                    let ty = self.substitute_type(declared, &new_inst)?;
                    self.make_term(
                        TermNode::Constant {
                            constant,
                            instantiation: new_inst,
                        },
                        ty,
                    )
                }
                TermNode::Application { left, right } => {
                    let l = self.inst_rec(left, theta)?;
                    let r = self.inst_rec(right, theta)?;
                    if l == left && r == right {
                        return Ok(t);
                    }
                    let lty = self.type_of(l)?;
                    let (_, cod) = self
                        .dest_function_type(lty)
                        .expect("instantiation preserves function types");
                    self.make_term(TermNode::Application { left: l, right: r }, cod)
                }
                TermNode::Lambda { name, ty, body } => {
                    let keys = self.substitution_keys(theta)?;
                    let target = self.type_key(ty)?.substitute(&keys);
                    let mut capture = false;
                    for (n, vt) in self.free_vars(body)? {
                        if n == name
                            && !self.types_equal(vt, ty)
                            && self.type_key(vt)?.substitute(&keys) == target
                        {
                            capture = true;
                            break;
                        }
                    }
                    let (name, body) = if capture {
                        let fresh = variant(&name, &self.free_names(body)?);
                        let renamed = self.allocate_variable(&fresh, ty)?;
                        let body = self.subst_rec(body, &[((name, ty), renamed)])?;
                        (fresh, body)
                    } else {
                        (name, body)
                    };
                    let nty = self.substitute_type(ty, theta)?;
                    let nbody = self.inst_rec(body, theta)?;
                    if !capture && nty == ty && nbody == body {
                        return Ok(t);
                    }
                    let lam_ty = self.substitute_type(term.ty, theta)?;
                    self.make_term(
                        TermNode::Lambda {
                            name,
                            ty: nty,
                            body: nbody,
                        },
                        lam_ty,
                    )
                }
            }
        })
    }

    /// Contracts the redex `(λx. b) a` to `b[a/x]`.
    pub fn beta_contract(&mut self, t: Handle) -> Result<Handle> {
        let TermNode::Application { left, right } = self.term(t)?.node else {
            return Err(KernelError::ShapeMismatch);
        };
        let Some((name, ty, body)) = self.dest_lambda(left) else {
            return Err(KernelError::ShapeMismatch);
        };
        let name = name.to_string();
        self.subst_rec(body, &[((name, ty), right)])
    }

    /// Normal-order reduction to β-normal form.
    pub fn beta_normalize(&mut self, t: Handle) -> Result<Handle> {
        crate::deep::deep(|| {
            let term = self.term(t)?.clone();
            if term.normal {
                return Ok(t);
            }
            match term.node {
                TermNode::Application { left, right } => {
                    let l = self.beta_normalize(left)?;
                    if let Some((name, ty, body)) = self.dest_lambda(l) {
                        let name = name.to_string();
                        let reduced = self.subst_rec(body, &[((name, ty), right)])?;
                        return self.beta_normalize(reduced);
                    }
                    let r = self.beta_normalize(right)?;
                    if l == left && r == right {
                        return Ok(t);
                    }
                    self.make_term(TermNode::Application { left: l, right: r }, term.ty)
                }
                TermNode::Lambda { name, ty, body } => {
                    let b = self.beta_normalize(body)?;
                    if b == body {
                        return Ok(t);
                    }
                    self.make_term(TermNode::Lambda { name, ty, body: b }, term.ty)
                }
                _ => Ok(t),
            }
        })
    }
}
