//! Independent reference semantics for terms, written against plain data.
//!
//! Kernel terms are read once into a nameless (de Bruijn) form.  Substitution,
//! β-normalization and typing are then computed here without touching the
//! kernel, and α-equivalence is plain structural equality of nameless terms.

#![allow(dead_code)]

use kernel::{Handle, Heaps, TermNode, Type};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Var(String),
    App(String, Vec<Ty>),
}

impl Ty {
    pub fn fun(a: Ty, b: Ty) -> Ty {
        Ty::App("fun".into(), vec![a, b])
    }

    pub fn bool() -> Ty {
        Ty::App("prop".into(), vec![])
    }

    fn dest_fun(&self) -> Option<(&Ty, &Ty)> {
        match self {
            Ty::App(f, args) if f == "fun" && args.len() == 2 => Some((&args[0], &args[1])),
            _ => None,
        }
    }

    fn subst(&self, theta: &BTreeMap<String, Ty>) -> Ty {
        match self {
            Ty::Var(n) => theta.get(n).cloned().unwrap_or_else(|| self.clone()),
            Ty::App(f, args) => Ty::App(f.clone(), args.iter().map(|a| a.subst(theta)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Db {
    Free(String, Ty),
    Bound(usize),
    /// Constant name and its instantiated type.
    Const(String, Ty),
    App(Box<Db>, Box<Db>),
    Lam(Ty, Box<Db>),
}

pub fn read_type(h: &Heaps, ty: Handle) -> Ty {
    match h.ty(ty).expect("live type") {
        Type::Variable { name } => Ty::Var(name.clone()),
        Type::Application { former, args } => Ty::App(
            h.type_former(*former).expect("live former").name.clone(),
            args.iter().map(|a| read_type(h, *a)).collect(),
        ),
    }
}

/// Reads a kernel term into nameless form.
pub fn read_term(h: &Heaps, t: Handle) -> Db {
    fn go(h: &Heaps, t: Handle, env: &mut Vec<(String, Ty)>) -> Db {
        match &h.term(t).expect("live term").node {
            TermNode::Variable { name, ty } => {
                let ty = read_type(h, *ty);
                match env.iter().rev().position(|(n, t)| n == name && *t == ty) {
                    Some(i) => Db::Bound(i),
                    None => Db::Free(name.clone(), ty),
                }
            }
            TermNode::Constant {
                constant,
                instantiation,
            } => {
                let c = h.constant(*constant).expect("live constant");
                let theta = instantiation
                    .iter()
                    .map(|(n, ty)| (n.clone(), read_type(h, *ty)))
                    .collect();
                Db::Const(c.name.clone(), read_type(h, c.declared_type).subst(&theta))
            }
            TermNode::Application { left, right } => {
                Db::App(Box::new(go(h, *left, env)), Box::new(go(h, *right, env)))
            }
            TermNode::Lambda { name, ty, body } => {
                let ty = read_type(h, *ty);
                env.push((name.clone(), ty.clone()));
                let body = go(h, *body, env);
                env.pop();
                Db::Lam(ty, Box::new(body))
            }
        }
    }
    go(h, t, &mut Vec::new())
}

/// Type of `t`, or `None` if it is ill-typed or has loose bound indices.
pub fn type_of(t: &Db) -> Option<Ty> {
    fn go(t: &Db, env: &mut Vec<Ty>) -> Option<Ty> {
        match t {
            Db::Free(_, ty) | Db::Const(_, ty) => Some(ty.clone()),
            Db::Bound(i) => env.len().checked_sub(i + 1).map(|j| env[j].clone()),
            Db::App(l, r) => {
                let lt = go(l, env)?;
                let rt = go(r, env)?;
                let (a, b) = lt.dest_fun()?;
                (*a == rt).then(|| b.clone())
            }
            Db::Lam(ty, body) => {
                env.push(ty.clone());
                let b = go(body, env);
                env.pop();
                Some(Ty::fun(ty.clone(), b?))
            }
        }
    }
    go(t, &mut Vec::new())
}

/// Reference application checker: `Some(result type)` iff `left right` is
/// well-typed.
pub fn apply_type(left: &Ty, right: &Ty) -> Option<Ty> {
    let (a, b) = left.dest_fun()?;
    (a == right).then(|| b.clone())
}

/// Adds `d` to every bound index at or above `cutoff`.
fn shift(t: &Db, d: isize, cutoff: usize) -> Db {
    match t {
        Db::Bound(i) if *i >= cutoff => Db::Bound((*i as isize + d) as usize),
        Db::App(l, r) => Db::App(Box::new(shift(l, d, cutoff)), Box::new(shift(r, d, cutoff))),
        Db::Lam(ty, b) => Db::Lam(ty.clone(), Box::new(shift(b, d, cutoff + 1))),
        other => other.clone(),
    }
}

/// Replaces bound index `j` by `s`.
fn subst_bound(t: &Db, j: usize, s: &Db) -> Db {
    match t {
        Db::Bound(i) if *i == j => s.clone(),
        Db::App(l, r) => Db::App(Box::new(subst_bound(l, j, s)), Box::new(subst_bound(r, j, s))),
        Db::Lam(ty, b) => Db::Lam(ty.clone(), Box::new(subst_bound(b, j + 1, &shift(s, 1, 0)))),
        other => other.clone(),
    }
}

/// Simultaneous substitution of free variables.  Images have no loose bound
/// indices, so nothing needs shifting and capture cannot occur.
pub fn substitute(t: &Db, sigma: &[((String, Ty), Db)]) -> Db {
    match t {
        Db::Free(n, ty) => sigma
            .iter()
            .find(|((m, u), _)| m == n && u == ty)
            .map(|(_, img)| img.clone())
            .unwrap_or_else(|| t.clone()),
        Db::App(l, r) => Db::App(Box::new(substitute(l, sigma)), Box::new(substitute(r, sigma))),
        Db::Lam(ty, b) => Db::Lam(ty.clone(), Box::new(substitute(b, sigma))),
        other => other.clone(),
    }
}

/// Contracts `(λ. b) a`.
pub fn contract(body: &Db, arg: &Db) -> Db {
    shift(&subst_bound(body, 0, &shift(arg, 1, 0)), -1, 0)
}

/// Normal-order β-normal form.
pub fn normalize(t: &Db) -> Db {
    match t {
        Db::App(l, r) => match normalize(l) {
            Db::Lam(_, b) => normalize(&contract(&b, r)),
            l => Db::App(Box::new(l), Box::new(normalize(r))),
        },
        Db::Lam(ty, b) => Db::Lam(ty.clone(), Box::new(normalize(b))),
        other => other.clone(),
    }
}

pub fn is_normal(t: &Db) -> bool {
    match t {
        Db::App(l, r) => !matches!(**l, Db::Lam(..)) && is_normal(l) && is_normal(r),
        Db::Lam(_, b) => is_normal(b),
        _ => true,
    }
}

pub fn free_variables(t: &Db) -> Vec<(String, Ty)> {
    fn go(t: &Db, out: &mut Vec<(String, Ty)>) {
        match t {
            Db::Free(n, ty) => {
                let v = (n.clone(), ty.clone());
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            Db::App(l, r) => {
                go(l, out);
                go(r, out);
            }
            Db::Lam(_, b) => go(b, out),
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(t, &mut out);
    out
}
