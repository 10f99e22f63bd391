//! Surface syntax for types and terms.
//!
//! ```text
//! type ::= (tyvar NAME) | (ty NAME type*) | REF
//! term ::= (var NAME type) | (const HANDLE-OR-NAME (inst NAME type)*)
//!        | (app term term) | (lam NAME type term) | (nat INT) | REF
//! ```
//!
//! `bool` is accepted for the `prop` former.  `(nat n)` expands to
//! `suc (… (suc zero))`.  A `REF` is a bare handle number or a name the
//! [`Builder`] resolves.  Parsing produces a positioned tree; building issues
//! one allocation per node through a [`Builder`], so the same text can be
//! realized directly on the heaps or as a stream of syscalls.

use crate::arena::Heaps;
use crate::error::{KernelError, Result};
use crate::handle::{Handle, CONSTANT_SUC, CONSTANT_ZERO, FORMER_PROP};
use crate::kernel::type_substitution;
use crate::sexpr::{self, is_atom_text, Pos, Sexpr};
use crate::term::TermNode;
use crate::types::{Type, TypeSubstitution};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ref {
    Handle(u64),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeAst {
    Variable(String, Pos),
    Application(Ref, Vec<TypeAst>, Pos),
    Ref(Ref, Pos),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermAst {
    Variable(String, TypeAst, Pos),
    Constant(Ref, Vec<(String, TypeAst)>, Pos),
    Application(Box<TermAst>, Box<TermAst>, Pos),
    Lambda(String, TypeAst, Box<TermAst>, Pos),
    Numeral(u64, Pos),
    Ref(Ref, Pos),
}

impl TypeAst {
    pub fn pos(&self) -> Pos {
        match self {
            TypeAst::Variable(_, p) | TypeAst::Application(_, _, p) | TypeAst::Ref(_, p) => *p,
        }
    }
}

impl TermAst {
    pub fn pos(&self) -> Pos {
        match self {
            TermAst::Variable(_, _, p)
            | TermAst::Constant(_, _, p)
            | TermAst::Application(_, _, p)
            | TermAst::Lambda(_, _, _, p)
            | TermAst::Numeral(_, p)
            | TermAst::Ref(_, p) => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Malformed(String),
    Unbound(String),
    Kernel(KernelError),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    pub pos: Pos,
    pub kind: SyntaxErrorKind,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SyntaxErrorKind::Malformed(m) => write!(f, "{}: {m}", self.pos),
            SyntaxErrorKind::Unbound(n) => write!(f, "{}: unbound name '{n}'", self.pos),
            SyntaxErrorKind::Kernel(e) => write!(f, "{}: {e} (status {})", self.pos, e.code()),
        }
    }
}

impl From<sexpr::ReadError> for SyntaxError {
    fn from(e: sexpr::ReadError) -> Self {
        SyntaxError {
            pos: e.pos,
            kind: SyntaxErrorKind::Malformed(e.message),
        }
    }
}

fn malformed<T>(pos: Pos, message: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError {
        pos,
        kind: SyntaxErrorKind::Malformed(message.into()),
    })
}

fn name(s: &Sexpr) -> Result<String, SyntaxError> {
    match s {
        Sexpr::Atom(a, _) | Sexpr::Str(a, _) => Ok(a.clone()),
        Sexpr::List(_, p) => malformed(*p, "expected a name"),
    }
}

/// An atom that is all digits is a handle; anything else is a name.
fn reference(s: &Sexpr) -> Result<Ref, SyntaxError> {
    match s {
        Sexpr::Atom(a, p) if a.bytes().all(|b| b.is_ascii_digit()) => a
            .parse()
            .map(Ref::Handle)
            .or_else(|_| malformed(*p, "handle out of range")),
        Sexpr::Atom(a, _) | Sexpr::Str(a, _) => Ok(Ref::Name(a.clone())),
        Sexpr::List(_, p) => malformed(*p, "expected a handle or name"),
    }
}

fn arity(items: &[Sexpr], n: usize, pos: Pos, form: &str) -> Result<(), SyntaxError> {
    if items.len() != n + 1 {
        return malformed(pos, format!("'{form}' takes {n} argument(s), found {}", items.len() - 1));
    }
    Ok(())
}

pub fn type_from_sexpr(s: &Sexpr) -> Result<TypeAst, SyntaxError> {
    crate::deep::deep(|| {
        let pos = s.pos();
        let items = match s {
            Sexpr::Atom(..) => return Ok(TypeAst::Ref(reference(s)?, pos)),
            Sexpr::Str(..) => return malformed(pos, "expected a type"),
            Sexpr::List(items, _) => items,
        };
        match s.head() {
            Some("tyvar") => {
                arity(items, 1, pos, "tyvar")?;
                Ok(TypeAst::Variable(name(&items[1])?, pos))
            }
            Some("ty") if items.len() >= 2 => {
                let former = match reference(&items[1])? {
                    Ref::Name(n) if n == "bool" => Ref::Handle(FORMER_PROP.value()),
                    r => r,
                };
                let args = items[2..].iter().map(type_from_sexpr).collect::<Result<_, _>>()?;
                Ok(TypeAst::Application(former, args, pos))
            }
            Some("ty") => malformed(pos, "'ty' needs a former"),
            _ => malformed(pos, "expected (tyvar NAME) or (ty NAME type*)"),
        }
    })
}

pub fn term_from_sexpr(s: &Sexpr) -> Result<TermAst, SyntaxError> {
    crate::deep::deep(|| {
        let pos = s.pos();
        let items = match s {
            Sexpr::Atom(..) => return Ok(TermAst::Ref(reference(s)?, pos)),
            Sexpr::Str(..) => return malformed(pos, "expected a term"),
            Sexpr::List(items, _) => items,
        };
        match s.head() {
            Some("var") => {
                arity(items, 2, pos, "var")?;
                Ok(TermAst::Variable(name(&items[1])?, type_from_sexpr(&items[2])?, pos))
            }
            Some("const") if items.len() >= 2 => {
                let c = reference(&items[1])?;
                let mut inst = Vec::new();
                for i in &items[2..] {
                    match i.as_list() {
                        Some([head, n, ty]) if head.as_atom() == Some("inst") => {
                            inst.push((name(n)?, type_from_sexpr(ty)?))
                        }
                        _ => return malformed(i.pos(), "expected (inst NAME type)"),
                    }
                }
                Ok(TermAst::Constant(c, inst, pos))
            }
            Some("const") => malformed(pos, "'const' needs a handle or name"),
            Some("app") => {
                arity(items, 2, pos, "app")?;
                Ok(TermAst::Application(
                    Box::new(term_from_sexpr(&items[1])?),
                    Box::new(term_from_sexpr(&items[2])?),
                    pos,
                ))
            }
            Some("lam") => {
                arity(items, 3, pos, "lam")?;
                Ok(TermAst::Lambda(
                    name(&items[1])?,
                    type_from_sexpr(&items[2])?,
                    Box::new(term_from_sexpr(&items[3])?),
                    pos,
                ))
            }
            Some("nat") => {
                arity(items, 1, pos, "nat")?;
                match items[1].as_atom().map(str::parse::<u64>) {
                    Some(Ok(n)) => Ok(TermAst::Numeral(n, pos)),
                    _ => malformed(items[1].pos(), "expected a natural number"),
                }
            }
            _ => malformed(pos, "expected var, const, app, lam or nat"),
        }
    })
}

pub fn parse_type_ast(text: &str) -> Result<TypeAst, SyntaxError> {
    type_from_sexpr(&sexpr::read_one(text)?)
}

pub fn parse_term_ast(text: &str) -> Result<TermAst, SyntaxError> {
    term_from_sexpr(&sexpr::read_one(text)?)
}

/// Allocation back end for [`build_term`].
pub trait Builder {
    fn type_former_named(&self, name: &str) -> Option<Handle>;
    fn constant_named(&self, name: &str) -> Option<Handle>;
    /// Resolves a bare name; `None` makes it an unbound-name error.
    fn binding(&self, name: &str) -> Option<Handle>;
    fn type_variable(&mut self, name: &str) -> Result<Handle>;
    fn type_application(&mut self, former: Handle, args: &[Handle]) -> Result<Handle>;
    fn variable(&mut self, name: &str, ty: Handle) -> Result<Handle>;
    fn constant(&mut self, constant: Handle, inst: &[(Handle, Handle)]) -> Result<Handle>;
    fn application(&mut self, left: Handle, right: Handle) -> Result<Handle>;
    fn lambda(&mut self, name: &str, ty: Handle, body: Handle) -> Result<Handle>;
}

fn at<T>(pos: Pos, r: Result<T>) -> Result<T, SyntaxError> {
    r.map_err(|e| SyntaxError {
        pos,
        kind: SyntaxErrorKind::Kernel(e),
    })
}

fn resolve(
    b: &impl Builder,
    r: &Ref,
    pos: Pos,
    named: impl Fn(&str) -> Option<Handle>,
) -> Result<Handle, SyntaxError> {
    match r {
        Ref::Handle(h) => Ok(Handle::new(*h)),
        Ref::Name(n) => named(n).or_else(|| b.binding(n)).ok_or_else(|| SyntaxError {
            pos,
            kind: SyntaxErrorKind::Unbound(n.clone()),
        }),
    }
}

pub fn build_type(b: &mut impl Builder, ast: &TypeAst) -> Result<Handle, SyntaxError> {
    crate::deep::deep(|| {
        match ast {
            TypeAst::Variable(n, p) => at(*p, b.type_variable(n)),
            TypeAst::Application(former, args, p) => {
                let f = resolve(b, former, *p, |n| b.type_former_named(n))?;
                let args = args.iter().map(|a| build_type(b, a)).collect::<Result<Vec<_>, _>>()?;
                at(*p, b.type_application(f, &args))
            }
            TypeAst::Ref(r, p) => resolve(b, r, *p, |_| None),
        }
    })
}

pub fn build_term(b: &mut impl Builder, ast: &TermAst) -> Result<Handle, SyntaxError> {
    crate::deep::deep(|| {
        match ast {
            TermAst::Variable(n, ty, p) => {
                let ty = build_type(b, ty)?;
                at(*p, b.variable(n, ty))
            }
            TermAst::Constant(c, inst, p) => {
                let c = resolve(b, c, *p, |n| b.constant_named(n))?;
                let mut pairs = Vec::with_capacity(inst.len());
                for (n, ty) in inst {
                    let key = at(ty.pos(), b.type_variable(n))?;
                    pairs.push((key, build_type(b, ty)?));
                }
                at(*p, b.constant(c, &pairs))
            }
            TermAst::Application(l, r, p) => {
                let l = build_term(b, l)?;
                let r = build_term(b, r)?;
                at(*p, b.application(l, r))
            }
            TermAst::Lambda(n, ty, body, p) => {
                let ty = build_type(b, ty)?;
                let body = build_term(b, body)?;
                at(*p, b.lambda(n, ty, body))
            }
            TermAst::Numeral(n, p) => {
                let mut t = at(*p, b.constant(CONSTANT_ZERO, &[]))?;
                if *n > 0 {
                    let suc = at(*p, b.constant(CONSTANT_SUC, &[]))?;
                    for _ in 0..*n {
                        t = at(*p, b.application(suc, t))?;
                    }
                }
                Ok(t)
            }
            TermAst::Ref(r, p) => resolve(b, r, *p, |_| None),
        }
    })
}

/// Builds straight on the heaps, with no name bindings.
impl Builder for Heaps {
    fn type_former_named(&self, name: &str) -> Option<Handle> {
        self.type_former_by_name(name)
    }

    fn constant_named(&self, name: &str) -> Option<Handle> {
        self.constant_by_name(name)
    }

    fn binding(&self, _: &str) -> Option<Handle> {
        None
    }

    fn type_variable(&mut self, name: &str) -> Result<Handle> {
        self.allocate_type_variable(name)
    }

    fn type_application(&mut self, former: Handle, args: &[Handle]) -> Result<Handle> {
        self.allocate_type_application(former, args)
    }

    fn variable(&mut self, name: &str, ty: Handle) -> Result<Handle> {
        self.allocate_variable(name, ty)
    }

    fn constant(&mut self, constant: Handle, inst: &[(Handle, Handle)]) -> Result<Handle> {
        let theta = type_substitution(self, inst)?;
        self.allocate_constant(constant, &theta)
    }

    fn application(&mut self, left: Handle, right: Handle) -> Result<Handle> {
        self.allocate_application(left, right)
    }

    fn lambda(&mut self, name: &str, ty: Handle, body: Handle) -> Result<Handle> {
        self.allocate_lambda(name, ty, body)
    }
}

impl Heaps {
    pub fn parse_type(&mut self, text: &str) -> Result<Handle, SyntaxError> {
        let ast = parse_type_ast(text)?;
        build_type(self, &ast)
    }

    pub fn parse_term(&mut self, text: &str) -> Result<Handle, SyntaxError> {
        let ast = parse_term_ast(text)?;
        build_term(self, &ast)
    }

    pub fn print_type(&self, ty: Handle) -> Result<String> {
        let mut out = String::new();
        self.write_type(ty, &mut out)?;
        Ok(out)
    }

    pub fn print_term(&self, t: Handle) -> Result<String> {
        let mut out = String::new();
        self.write_term(t, &mut out)?;
        Ok(out)
    }

    fn write_type(&self, ty: Handle, out: &mut String) -> Result<()> {
        crate::deep::deep(|| {
            match self.ty(ty)? {
                Type::Variable { name } => {
                    out.push_str("(tyvar ");
                    out.push_str(&sexpr::atom_or_string(name));
                    out.push(')');
                }
                Type::Application { former, args } => {
                    out.push_str("(ty ");
                    if *former == FORMER_PROP {
                        out.push_str("bool");
                    } else {
                        out.push_str(&name_text(&self.type_former(*former)?.name));
                    }
                    for a in args {
                        out.push(' ');
                        self.write_type(*a, out)?;
                    }
                    out.push(')');
                }
            }
            Ok(())
        })
    }

    /// `Some(n)` if `t` is `suc^n zero` with `n > 0`.
    fn numeral_value(&self, mut t: Handle) -> Option<u64> {
        let mut n = 0u64;
        loop {
            match self.node(t) {
                TermNode::Application { left, right } if self.is_constant_term(*left, CONSTANT_SUC) => {
                    n += 1;
                    t = *right;
                }
                _ if n > 0 && self.is_constant_term(t, CONSTANT_ZERO) => return Some(n),
                _ => return None,
            }
        }
    }

    fn write_term(&self, t: Handle, out: &mut String) -> Result<()> {
        crate::deep::deep(|| {
            self.term(t)?;
            if let Some(n) = self.numeral_value(t) {
                out.push_str(&format!("(nat {n})"));
                return Ok(());
            }
            match self.node(t) {
                TermNode::Variable { name, ty } => {
                    out.push_str("(var ");
                    out.push_str(&sexpr::atom_or_string(name));
                    out.push(' ');
                    self.write_type(*ty, out)?;
                    out.push(')');
                }
                TermNode::Constant {
                    constant,
                    instantiation,
                } => {
                    out.push_str("(const ");
                    out.push_str(&name_text(&self.constant(*constant)?.name));
                    self.write_instantiation(instantiation, out)?;
                    out.push(')');
                }
                TermNode::Application { left, right } => {
                    out.push_str("(app ");
                    self.write_term(*left, out)?;
                    out.push(' ');
                    self.write_term(*right, out)?;
                    out.push(')');
                }
                TermNode::Lambda { name, ty, body } => {
                    out.push_str("(lam ");
                    out.push_str(&sexpr::atom_or_string(name));
                    out.push(' ');
                    self.write_type(*ty, out)?;
                    out.push(' ');
                    self.write_term(*body, out)?;
                    out.push(')');
                }
            }
            Ok(())
        })
    }

    fn write_instantiation(&self, theta: &TypeSubstitution, out: &mut String) -> Result<()> {
        for (n, ty) in theta {
            out.push_str(" (inst ");
            out.push_str(&sexpr::atom_or_string(n));
            out.push(' ');
            self.write_type(*ty, out)?;
            out.push(')');
        }
        Ok(())
    }
}

/// Former and constant names print as atoms unless they would read back as
/// a handle number or are not atom text.
fn name_text(n: &str) -> String {
    if is_atom_text(n) && !n.bytes().all(|b| b.is_ascii_digit()) {
        n.to_string()
    } else {
        sexpr::quote(n)
    }
}
