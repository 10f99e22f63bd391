//! Exhaustive enumeration of small well-typed terms.
//!
//! The signature has three variables `x, y : bool` and `f : bool → bool`, two
//! constants `true : bool` and `c : bool → bool`, and binders named `x` or `y`
//! at type `bool`.  Every term of height at most the bound is produced exactly
//! once, with subterms shared.

#![allow(dead_code)]

use kernel::handle::TYPE_BOOL;
use kernel::{Handle, Heaps, TypeSubstitution};

pub struct Enumeration {
    /// `by_height[d]` holds `(bool terms, bool → bool terms)` of height `d + 1`.
    pub by_height: Vec<(Vec<Handle>, Vec<Handle>)>,
    pub bool_bool: Handle,
}

impl Enumeration {
    pub fn all(&self) -> impl Iterator<Item = Handle> + '_ {
        self.by_height.iter().flat_map(|(b, f)| b.iter().chain(f.iter()).copied())
    }

    pub fn len(&self) -> usize {
        self.by_height.iter().map(|(b, f)| b.len() + f.len()).sum()
    }
}

pub fn enumerate(h: &mut Heaps, max_height: usize) -> Enumeration {
    let bb = h.allocate_function_type(TYPE_BOOL, TYPE_BOOL).unwrap();
    let c = match h.constant_by_name("c") {
        Some(c) => c,
        None => h.register_constant("c", bb).unwrap(),
    };
    let none = TypeSubstitution::new();
    let t = h.constant_by_name("true").unwrap();
    let mut levels: Vec<(Vec<Handle>, Vec<Handle>)> = Vec::new();
    levels.push((
        vec![
            h.allocate_variable("x", TYPE_BOOL).unwrap(),
            h.allocate_variable("y", TYPE_BOOL).unwrap(),
            h.allocate_constant(t, &none).unwrap(),
        ],
        vec![
            h.allocate_variable("f", bb).unwrap(),
            h.allocate_constant(c, &none).unwrap(),
        ],
    ));
    for d in 1..max_height {
        let below = |k: usize| levels[..k].iter();
        let prev = &levels[d - 1];
        let mut pairs = Vec::new();
        // One child has height exactly d, the other at most d.
        for &fun in &prev.1 {
            for (b, _) in below(d) {
                pairs.extend(b.iter().map(|&a| (fun, a)));
            }
        }
        for (_, fs) in below(d - 1) {
            for &fun in fs {
                pairs.extend(prev.0.iter().map(|&a| (fun, a)));
            }
        }
        let bools: Vec<Handle> = pairs
            .into_iter()
            .map(|(f, a)| h.allocate_application(f, a).unwrap())
            .collect();
        let mut funs = Vec::new();
        for &body in &levels[d - 1].0.clone() {
            for name in ["x", "y"] {
                funs.push(h.allocate_lambda(name, TYPE_BOOL, body).unwrap());
            }
        }
        levels.push((bools, funs));
    }
    Enumeration {
        by_height: levels,
        bool_bool: bb,
    }
}

use super::oracle::{self, Db, Ty};

/// Substitutions exercised on every enumerated term: a rename, one that
/// would capture under `λx`, a simultaneous swap, and a lambda image.
pub fn substitutions(h: &mut Heaps, e: &Enumeration) -> Vec<kernel::TermSubstitution> {
    let x = h.allocate_variable("x", TYPE_BOOL).unwrap();
    let y = h.allocate_variable("y", TYPE_BOOL).unwrap();
    let f = h.allocate_variable("f", e.bool_bool).unwrap();
    let fx = h.allocate_application(f, x).unwrap();
    let ly_x = h.allocate_lambda("y", TYPE_BOOL, x).unwrap();
    let var = |n: &str, ty| (n.to_string(), ty);
    vec![
        vec![(var("x", TYPE_BOOL), y)],
        vec![(var("y", TYPE_BOOL), fx)],
        vec![(var("x", TYPE_BOOL), y), (var("y", TYPE_BOOL), x)],
        vec![(var("f", e.bool_bool), ly_x)],
    ]
}

/// Checks kernel substitution and normalization of `t` against the oracle,
/// including preservation of types.  Heap growth is rolled back.
pub fn check_term(h: &mut Heaps, t: Handle, sigmas: &[kernel::TermSubstitution]) -> Result<(), String> {
    let cp = h.checkpoint();
    let result = check_inner(h, t, sigmas);
    h.rollback(cp);
    result
}

fn check_inner(h: &mut Heaps, t: Handle, sigmas: &[kernel::TermSubstitution]) -> Result<(), String> {
    let db = oracle::read_term(h, t);
    let ty = oracle::type_of(&db).ok_or("enumerated term is ill-typed")?;
    for sigma in sigmas {
        let expected = oracle::substitute(&db, &oracle_substitution(h, sigma));
        let got = h.substitute(t, sigma).map_err(|e| e.to_string())?;
        let got_db = oracle::read_term(h, got);
        if got_db != expected {
            return Err(format!(
                "substitution disagrees on {}: kernel {}",
                h.print_term(t).unwrap(),
                h.print_term(got).unwrap()
            ));
        }
        if oracle::type_of(&got_db).as_ref() != Some(&ty) {
            return Err("substitution changed the type".into());
        }
    }
    let expected = oracle::normalize(&db);
    let got = h.beta_normalize(t).map_err(|e| e.to_string())?;
    let got_db = oracle::read_term(h, got);
    if got_db != expected {
        return Err(format!(
            "normal form disagrees on {}: kernel {}",
            h.print_term(t).unwrap(),
            h.print_term(got).unwrap()
        ));
    }
    if !oracle::is_normal(&got_db) || !h.is_beta_normal(got).unwrap() {
        return Err("result is not β-normal".into());
    }
    if oracle::type_of(&got_db).as_ref() != Some(&ty) || h.type_of(got).unwrap() != h.type_of(t).unwrap()
        && !h.types_equal(h.type_of(got).unwrap(), h.type_of(t).unwrap())
    {
        return Err("normalization changed the type".into());
    }
    Ok(())
}

fn oracle_substitution(h: &Heaps, sigma: &kernel::TermSubstitution) -> Vec<((String, Ty), Db)> {
    sigma
        .iter()
        .map(|((n, ty), img)| ((n.clone(), oracle::read_type(h, *ty)), oracle::read_term(h, *img)))
        .collect()
}
