//! Type-formers, types and term constants.

use crate::arena::Heaps;
use crate::error::{KernelError, Result};
use crate::handle::{Handle, Kind, FORMER_FUN, FORMER_PROP};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TypeFormer {
    pub name: String,
    pub arity: usize,
}

impl TypeFormer {
    pub(crate) fn collect_references(&self, _out: &mut Vec<(Kind, Handle)>) {}
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Type {
    Variable { name: String },
    Application { former: Handle, args: Vec<Handle> },
}

impl Type {
    pub(crate) fn collect_references(&self, out: &mut Vec<(Kind, Handle)>) {
        if let Type::Application { former, args } = self {
            out.push((Kind::TypeFormer, *former));
            out.extend(args.iter().map(|a| (Kind::Type, *a)));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constant {
    pub name: String,
    pub declared_type: Handle,
}

impl Constant {
    pub(crate) fn collect_references(&self, out: &mut Vec<(Kind, Handle)>) {
        out.push((Kind::Type, self.declared_type));
    }
}

/// Type-variable name to type handle.
pub type TypeSubstitution = BTreeMap<String, Handle>;

/// Owned structural image of a type.  Two type handles denote equal types iff
/// their keys are equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeKey {
    Variable(String),
    Application(Handle, Vec<TypeKey>),
}

impl TypeKey {
    pub fn substitute(&self, theta: &BTreeMap<String, TypeKey>) -> TypeKey {
        match self {
            TypeKey::Variable(n) => theta.get(n).cloned().unwrap_or_else(|| self.clone()),
            TypeKey::Application(f, args) => TypeKey::Application(
                *f,
                args.iter().map(|a| a.substitute(theta)).collect(),
            ),
        }
    }
}

impl Heaps {
    pub fn register_type_former(&mut self, name: &str, arity: usize) -> Result<Handle> {
        if name.is_empty() {
            return Err(KernelError::ShapeMismatch);
        }
        if self.former_names.contains_key(name) {
            return Err(KernelError::NameCollision);
        }
        let h = self.allocate(TypeFormer {
            name: name.to_string(),
            arity,
        })?;
        self.former_names.insert(name.to_string(), h);
        Ok(h)
    }

    pub fn type_former_by_name(&self, name: &str) -> Option<Handle> {
        self.former_names.get(name).copied()
    }

    pub fn type_former(&self, h: Handle) -> Result<&TypeFormer> {
        self.resolve(h)
    }

    pub fn ty(&self, h: Handle) -> Result<&Type> {
        self.resolve(h)
    }

    pub fn allocate_type_variable(&mut self, name: &str) -> Result<Handle> {
        self.allocate(Type::Variable {
            name: name.to_string(),
        })
    }

    pub fn allocate_type_application(&mut self, former: Handle, args: &[Handle]) -> Result<Handle> {
        let f = self.type_former(former)?;
        for a in args {
            self.ty(*a)?;
        }
        if f.arity != args.len() {
            return Err(KernelError::ArityMismatch);
        }
        self.allocate(Type::Application {
            former,
            args: args.to_vec(),
        })
    }

    pub fn allocate_function_type(&mut self, domain: Handle, codomain: Handle) -> Result<Handle> {
        self.allocate_type_application(FORMER_FUN, &[domain, codomain])
    }

    pub fn register_constant(&mut self, name: &str, declared_type: Handle) -> Result<Handle> {
        self.ty(declared_type)?;
        if name.is_empty() {
            return Err(KernelError::ShapeMismatch);
        }
        if self.constant_names.contains_key(name) {
            return Err(KernelError::NameCollision);
        }
        let h = self.allocate(Constant {
            name: name.to_string(),
            declared_type,
        })?;
        self.constant_names.insert(name.to_string(), h);
        Ok(h)
    }

    pub fn constant_by_name(&self, name: &str) -> Option<Handle> {
        self.constant_names.get(name).copied()
    }

    pub fn constant(&self, h: Handle) -> Result<&Constant> {
        self.resolve(h)
    }

    pub fn type_key(&self, h: Handle) -> Result<TypeKey> {
        crate::deep::deep(|| {
            Ok(match self.ty(h)? {
                Type::Variable { name } => TypeKey::Variable(name.clone()),
                Type::Application { former, args } => TypeKey::Application(
                    *former,
                    args.iter()
                        .map(|a| self.type_key(*a))
                        .collect::<Result<_>>()?,
                ),
            })
        })
    }

    /// Structural type equality.  Dangling handles are unequal to everything.
    pub fn types_equal(&self, a: Handle, b: Handle) -> bool {
        crate::deep::deep(|| {
            if a == b {
                return self.types.contains(a);
            }
            match (self.types.get(a), self.types.get(b)) {
                (Some(Type::Variable { name: x }), Some(Type::Variable { name: y })) => x == y,
                (
                    Some(Type::Application { former: f, args: xs }),
                    Some(Type::Application { former: g, args: ys }),
                ) => {
                    f == g
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| self.types_equal(*x, *y))
                }
                _ => false,
            }
        })
    }

    pub fn is_bool_type(&self, ty: Handle) -> bool {
        matches!(self.types.get(ty), Some(Type::Application { former, args }) if *former == FORMER_PROP && args.is_empty())
    }

    /// `Some((domain, codomain))` when `ty` is a function type.
    pub fn dest_function_type(&self, ty: Handle) -> Option<(Handle, Handle)> {
        match self.types.get(ty) {
            Some(Type::Application { former, args }) if *former == FORMER_FUN && args.len() == 2 => {
                Some((args[0], args[1]))
            }
            _ => None,
        }
    }

    pub fn type_variables(&self, ty: Handle, out: &mut BTreeSet<String>) {
        crate::deep::deep(|| {
            match self.types.get(ty) {
                Some(Type::Variable { name }) => {
                    out.insert(name.clone());
                }
                Some(Type::Application { args, .. }) => {
                    for a in args {
                        self.type_variables(*a, out);
                    }
                }
                None => {}
            }
        })
    }

    /// Applies `theta` to `ty`.  Returns `ty` itself when nothing changes.
    pub fn substitute_type(&mut self, ty: Handle, theta: &TypeSubstitution) -> Result<Handle> {
        crate::deep::deep(|| {
            if theta.is_empty() {
                self.ty(ty)?;
                return Ok(ty);
            }
            match self.ty(ty)?.clone() {
                Type::Variable { name } => Ok(theta.get(&name).copied().unwrap_or(ty)),
                Type::Application { former, args } => {
                    let mut changed = false;
                    let mut new_args = Vec::with_capacity(args.len());
                    for a in &args {
                        let b = self.substitute_type(*a, theta)?;
                        changed |= b != *a;
                        new_args.push(b);
                    }
                    if changed {
                        self.allocate(Type::Application {
                            former,
                            args: new_args,
                        })
                    } else {
                        Ok(ty)
                    }
                }
            }
        })
    }

    pub(crate) fn substitution_keys(&self, theta: &TypeSubstitution) -> Result<BTreeMap<String, TypeKey>> {
        theta
            .iter()
            .map(|(n, h)| Ok((n.clone(), self.type_key(*h)?)))
            .collect()
    }
}
