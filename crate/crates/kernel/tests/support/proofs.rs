//! Random inference-rule applications over a growing pool of terms and
//! theorems.  Axiom handles are never used as premises.

#![allow(dead_code)]

use super::gen::{Signature, NAMES};
use kernel::handle::TYPE_ALPHA;
use kernel::{Handle, Heaps, Rule, TypeSubstitution};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct RuleFuzzer {
    pub sig: Signature,
    pub terms: Vec<Handle>,
    pub theorems: Vec<Handle>,
    /// Successful applications so far.
    pub applied: usize,
}

const POOL_LIMIT: usize = 4000;

impl RuleFuzzer {
    pub fn new(h: &mut Heaps, rng: &mut impl Rng) -> RuleFuzzer {
        let sig = Signature::new(h);
        let mut terms = Vec::new();
        for _ in 0..60 {
            terms.push(sig.proposition(h, rng, 3));
            terms.push(sig.any_term(h, rng, 3));
        }
        // Polymorphic material so type instantiation has something to do.
        let a = h.allocate_variable("x", TYPE_ALPHA).unwrap();
        terms.push(h.mk_equality(a, a).unwrap());
        RuleFuzzer {
            sig,
            terms,
            theorems: Vec::new(),
            applied: 0,
        }
    }

    fn term(&self, rng: &mut impl Rng) -> Handle {
        *self.terms.choose(rng).unwrap()
    }

    fn theorem(&self, h: &mut Heaps, rng: &mut impl Rng) -> Handle {
        match self.theorems.choose(rng) {
            Some(th) if rng.gen_bool(0.95) => *th,
            _ => h.apply_rule(&Rule::TruthIntro).unwrap(),
        }
    }

    fn name(rng: &mut impl Rng) -> String {
        NAMES.choose(rng).unwrap().to_string()
    }

    pub fn random_rule(&self, h: &mut Heaps, rng: &mut impl Rng) -> Rule {
        let ty = *self.sig.types.choose(rng).unwrap();
        match rng.gen_range(0..18) {
            0 => Rule::Symmetry(self.theorem(h, rng)),
            1 => Rule::Reflexivity(self.term(rng)),
            2 => Rule::Transitivity(self.theorem(h, rng), self.theorem(h, rng)),
            3 => Rule::CongruenceApplication(self.theorem(h, rng), self.theorem(h, rng)),
            4 => Rule::CongruenceLambda {
                name: Self::name(rng),
                ty,
                theorem: self.theorem(h, rng),
            },
            5 => Rule::Beta(self.term(rng)),
            6 => Rule::Eta(self.term(rng)),
            7 => Rule::Assume(self.term(rng)),
            8 => Rule::EqualityMp(self.theorem(h, rng), self.theorem(h, rng)),
            9 => Rule::DeductAntisym(self.theorem(h, rng), self.theorem(h, rng)),
            10 => {
                let mut sigma = Vec::new();
                for _ in 0..rng.gen_range(0..3) {
                    let image = self.term(rng);
                    let ity = h.type_of(image).unwrap();
                    sigma.push(((Self::name(rng), ity), image));
                }
                Rule::InstTerm(self.theorem(h, rng), sigma)
            }
            11 => Rule::InstType(
                self.theorem(h, rng),
                TypeSubstitution::from([("A".to_string(), ty)]),
            ),
            12 => Rule::TruthIntro,
            13 => Rule::FalsityElim {
                theorem: self.theorem(h, rng),
                proposition: self.term(rng),
            },
            14 => Rule::ImpIntro {
                theorem: self.theorem(h, rng),
                hypothesis: self.term(rng),
            },
            15 => Rule::ImpElim(self.theorem(h, rng), self.theorem(h, rng)),
            16 => Rule::ForallIntro {
                theorem: self.theorem(h, rng),
                name: Self::name(rng),
                ty,
            },
            _ => Rule::ForallElim {
                theorem: self.theorem(h, rng),
                term: self.term(rng),
            },
        }
    }

    fn remember_term(&mut self, t: Handle, rng: &mut impl Rng) {
        if self.terms.len() < POOL_LIMIT {
            self.terms.push(t);
        } else {
            let i = rng.gen_range(0..self.terms.len());
            self.terms[i] = t;
        }
    }

    /// Tries one random rule; on success records the theorem and feeds its
    /// parts back into the term pool.
    pub fn step(&mut self, h: &mut Heaps, rng: &mut impl Rng) -> Option<(Rule, Handle)> {
        let rule = self.random_rule(h, rng);
        let th = h.apply_rule(&rule).ok()?;
        self.applied += 1;
        if self.theorems.len() < POOL_LIMIT {
            self.theorems.push(th);
        } else {
            let i = rng.gen_range(0..self.theorems.len());
            self.theorems[i] = th;
        }
        let concl = h.theorem(th).unwrap().conclusion();
        self.remember_term(concl, rng);
        if let Some((l, r)) = h.dest_equality(concl) {
            self.remember_term(l, rng);
            self.remember_term(r, rng);
        }
        Some((rule, th))
    }
}
