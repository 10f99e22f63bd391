//! Theorems and the inference rules that are the only way to allocate them.
//!
//! A theorem records its hypotheses (deduplicated modulo α-equivalence and
//! kept in canonical order) and its conclusion.  No derivation is stored; the
//! checks in [`Heaps::apply_rule`] are what make a theorem trustworthy.

use crate::arena::Heaps;
use crate::error::{KernelError, Result};
use crate::handle::{Handle, Kind};
use crate::term::{TermNode, TermSubstitution};
use crate::types::TypeSubstitution;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem {
    hypotheses: Vec<Handle>,
    conclusion: Handle,
    axiom: bool,
}

impl Theorem {
    pub fn hypotheses(&self) -> &[Handle] {
        &self.hypotheses
    }

    pub fn conclusion(&self) -> Handle {
        self.conclusion
    }

    /// Set for the boot-time axioms only.
    pub fn is_axiom(&self) -> bool {
        self.axiom
    }

    pub(crate) fn axiom(conclusion: Handle) -> Self {
        Theorem {
            hypotheses: Vec::new(),
            conclusion,
            axiom: true,
        }
    }

    pub(crate) fn collect_references(&self, out: &mut Vec<(Kind, Handle)>) {
        out.extend(self.hypotheses.iter().map(|h| (Kind::Term, *h)));
        out.push((Kind::Term, self.conclusion));
    }
}

/// One inference-rule invocation with its premises and payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `Γ ⊢ r = s` gives `Γ ⊢ s = r`.
    Symmetry(Handle),
    Reflexivity(Handle),
    Transitivity(Handle, Handle),
    CongruenceApplication(Handle, Handle),
    CongruenceLambda {
        name: String,
        ty: Handle,
        theorem: Handle,
    },
    Beta(Handle),
    Eta(Handle),
    Assume(Handle),
    EqualityMp(Handle, Handle),
    DeductAntisym(Handle, Handle),
    InstTerm(Handle, TermSubstitution),
    InstType(Handle, TypeSubstitution),
    TruthIntro,
    FalsityElim {
        theorem: Handle,
        proposition: Handle,
    },
    ImpIntro {
        theorem: Handle,
        hypothesis: Handle,
    },
    ImpElim(Handle, Handle),
    ForallIntro {
        theorem: Handle,
        name: String,
        ty: Handle,
    },
    ForallElim {
        theorem: Handle,
        term: Handle,
    },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Symmetry(_) => "symmetry",
            Rule::Reflexivity(_) => "reflexivity",
            Rule::Transitivity(..) => "transitivity",
            Rule::CongruenceApplication(..) => "congruence_app",
            Rule::CongruenceLambda { .. } => "congruence_lambda",
            Rule::Beta(_) => "beta",
            Rule::Eta(_) => "eta",
            Rule::Assume(_) => "assume",
            Rule::EqualityMp(..) => "equality_mp",
            Rule::DeductAntisym(..) => "deduct_antisym",
            Rule::InstTerm(..) => "inst_term",
            Rule::InstType(..) => "inst_type",
            Rule::TruthIntro => "truth_intro",
            Rule::FalsityElim { .. } => "falsity_elim",
            Rule::ImpIntro { .. } => "imp_intro",
            Rule::ImpElim(..) => "imp_elim",
            Rule::ForallIntro { .. } => "forall_intro",
            Rule::ForallElim { .. } => "forall_elim",
        }
    }
}

impl Heaps {
    pub fn theorem(&self, h: Handle) -> Result<&Theorem> {
        self.resolve(h)
    }

    /// Hypotheses in canonical order, conclusion, and the axiom flag.
    pub fn split_theorem(&self, h: Handle) -> Result<(Vec<Handle>, Handle, bool)> {
        let th = self.theorem(h)?;
        Ok((th.hypotheses.clone(), th.conclusion, th.axiom))
    }

    fn contains_alpha(&self, set: &[Handle], t: Handle) -> Result<bool> {
        for h in set {
            if self.alpha_equivalent(*h, t)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn hyp_union(&self, a: &[Handle], b: &[Handle]) -> Result<Vec<Handle>> {
        let mut out = a.to_vec();
        for h in b {
            if !self.contains_alpha(&out, *h)? {
                out.push(*h);
            }
        }
        Ok(out)
    }

    fn hyp_remove(&self, a: &[Handle], p: Handle) -> Result<Vec<Handle>> {
        let mut out = Vec::with_capacity(a.len());
        for h in a {
            if !self.alpha_equivalent(*h, p)? {
                out.push(*h);
            }
        }
        Ok(out)
    }

    fn make_theorem(&mut self, hypotheses: Vec<Handle>, conclusion: Handle) -> Result<Handle> {
        debug_assert!(self.is_proposition(conclusion)?);
        let deduped = self.hyp_union(&[], &hypotheses)?;
        let mut keyed = deduped
            .into_iter()
            .map(|h| Ok((self.canonical_key(h)?, h)))
            .collect::<Result<Vec<_>>>()?;
        keyed.sort();
        self.allocate(Theorem {
            hypotheses: keyed.into_iter().map(|(_, h)| h).collect(),
            conclusion,
            axiom: false,
        })
    }

    fn premise(&self, h: Handle) -> Result<(Vec<Handle>, Handle)> {
        let th = self.theorem(h)?;
        Ok((th.hypotheses.clone(), th.conclusion))
    }

    fn premise_equality(&self, h: Handle) -> Result<(Vec<Handle>, Handle, Handle)> {
        let (hyps, c) = self.premise(h)?;
        let (l, r) = self.dest_equality(c).ok_or(KernelError::ShapeMismatch)?;
        Ok((hyps, l, r))
    }

    fn require_proposition(&self, p: Handle) -> Result<()> {
        if self.is_proposition(p)? {
            Ok(())
        } else {
            Err(KernelError::NotAProposition)
        }
    }

    fn require_alpha(&self, a: Handle, b: Handle) -> Result<()> {
        if self.alpha_equivalent(a, b)? {
            Ok(())
        } else {
            Err(KernelError::SideConditionViolated)
        }
    }

    fn require_not_free_in_hyps(&self, name: &str, ty: Handle, hyps: &[Handle]) -> Result<()> {
        for h in hyps {
            if self.is_free_in(name, ty, *h)? {
                return Err(KernelError::SideConditionViolated);
            }
        }
        Ok(())
    }

    pub fn allocate_symmetry(&mut self, pre: Handle) -> Result<Handle> {
        self.apply_rule(&Rule::Symmetry(pre))
    }

    /// Checks the rule's side conditions and allocates the resulting theorem.
    pub fn apply_rule(&mut self, rule: &Rule) -> Result<Handle> {
        match rule {
            Rule::Symmetry(pre) => {
                let (hyps, c) = self.premise(*pre)?;
                let (l, r) = self.dest_equality(c).ok_or(KernelError::NotAnEquality)?;
                let concl = self.mk_equality(r, l)?;
                self.make_theorem(hyps, concl)
            }
            Rule::Reflexivity(t) => {
                self.term(*t)?;
                let concl = self.mk_equality(*t, *t)?;
                self.make_theorem(Vec::new(), concl)
            }
            Rule::Transitivity(a, b) => {
                let (g, r, s) = self.premise_equality(*a)?;
                let (d, s2, t) = self.premise_equality(*b)?;
                self.require_alpha(s, s2)?;
                let hyps = self.hyp_union(&g, &d)?;
                let concl = self.mk_equality(r, t)?;
                self.make_theorem(hyps, concl)
            }
            Rule::CongruenceApplication(a, b) => {
                let (g, f, f2) = self.premise_equality(*a)?;
                let (d, x, y) = self.premise_equality(*b)?;
                let fty = self.type_of(f)?;
                let (dom, _) = self
                    .dest_function_type(fty)
                    .ok_or(KernelError::TypeMismatch)?;
                if !self.types_equal(dom, self.type_of(x)?) {
                    return Err(KernelError::TypeMismatch);
                }
                let hyps = self.hyp_union(&g, &d)?;
                let lhs = self.allocate_application(f, x)?;
                let rhs = self.allocate_application(f2, y)?;
                let concl = self.mk_equality(lhs, rhs)?;
                self.make_theorem(hyps, concl)
            }
            Rule::CongruenceLambda { name, ty, theorem } => {
                self.ty(*ty)?;
                let (g, r, s) = self.premise_equality(*theorem)?;
                self.require_not_free_in_hyps(name, *ty, &g)?;
                let lhs = self.allocate_lambda(name, *ty, r)?;
                let rhs = self.allocate_lambda(name, *ty, s)?;
                let concl = self.mk_equality(lhs, rhs)?;
                self.make_theorem(g, concl)
            }
            Rule::Beta(t) => {
                let (left, _) = match self.term(*t)?.node {
                    TermNode::Application { left, right } => (left, right),
                    _ => return Err(KernelError::ShapeMismatch),
                };
                if self.dest_lambda(left).is_none() {
                    return Err(KernelError::ShapeMismatch);
                }
                let reduced = self.beta_contract(*t)?;
                let concl = self.mk_equality(*t, reduced)?;
                self.make_theorem(Vec::new(), concl)
            }
            Rule::Eta(t) => {
                self.term(*t)?;
                let (name, ty, body) = self.dest_lambda(*t).ok_or(KernelError::ShapeMismatch)?;
                let name = name.to_string();
                let TermNode::Application { left: f, right: arg } = self.term(body)?.node else {
                    return Err(KernelError::ShapeMismatch);
                };
                match self.dest_variable(arg) {
                    Some((n, vt)) if n == name && self.types_equal(vt, ty) => {}
                    _ => return Err(KernelError::ShapeMismatch),
                }
                if self.is_free_in(&name, ty, f)? {
                    return Err(KernelError::SideConditionViolated);
                }
                let concl = self.mk_equality(*t, f)?;
                self.make_theorem(Vec::new(), concl)
            }
            Rule::Assume(p) => {
                self.require_proposition(*p)?;
                self.make_theorem(vec![*p], *p)
            }
            Rule::EqualityMp(a, b) => {
                let (g, p, q) = self.premise_equality(*a)?;
                let (d, p2) = self.premise(*b)?;
                self.require_alpha(p, p2)?;
                let hyps = self.hyp_union(&g, &d)?;
                self.make_theorem(hyps, q)
            }
            Rule::DeductAntisym(a, b) => {
                let (g, p) = self.premise(*a)?;
                let (d, q) = self.premise(*b)?;
                let left = self.hyp_remove(&g, q)?;
                let right = self.hyp_remove(&d, p)?;
                let hyps = self.hyp_union(&left, &right)?;
                let concl = self.mk_equality(p, q)?;
                self.make_theorem(hyps, concl)
            }
            Rule::InstTerm(th, sigma) => {
                let (g, c) = self.premise(*th)?;
                self.check_term_substitution(sigma)?;
                let mut hyps = Vec::with_capacity(g.len());
                for h in g {
                    hyps.push(self.subst_rec(h, sigma)?);
                }
                let concl = self.subst_rec(c, sigma)?;
                self.make_theorem(hyps, concl)
            }
            Rule::InstType(th, theta) => {
                let (g, c) = self.premise(*th)?;
                for t in theta.values() {
                    self.ty(*t)?;
                }
                let mut hyps = Vec::with_capacity(g.len());
                for h in g {
                    hyps.push(self.instantiate_types(h, theta)?);
                }
                let concl = self.instantiate_types(c, theta)?;
                self.make_theorem(hyps, concl)
            }
            Rule::TruthIntro => {
                let t = self.prelude.true_term;
                self.make_theorem(Vec::new(), t)
            }
            Rule::FalsityElim {
                theorem,
                proposition,
            } => {
                let (g, c) = self.premise(*theorem)?;
                self.require_proposition(*proposition)?;
                if !self.is_false(c) {
                    return Err(KernelError::ShapeMismatch);
                }
                self.make_theorem(g, *proposition)
            }
            Rule::ImpIntro {
                theorem,
                hypothesis,
            } => {
                let (g, q) = self.premise(*theorem)?;
                self.require_proposition(*hypothesis)?;
                let hyps = self.hyp_remove(&g, *hypothesis)?;
                let concl = self.mk_implication(*hypothesis, q)?;
                self.make_theorem(hyps, concl)
            }
            Rule::ImpElim(a, b) => {
                let (g, c) = self.premise(*a)?;
                let (p, q) = self.dest_implication(c).ok_or(KernelError::ShapeMismatch)?;
                let (d, p2) = self.premise(*b)?;
                self.require_alpha(p, p2)?;
                let hyps = self.hyp_union(&g, &d)?;
                self.make_theorem(hyps, q)
            }
            Rule::ForallIntro { theorem, name, ty } => {
                let (g, p) = self.premise(*theorem)?;
                self.ty(*ty)?;
                self.require_not_free_in_hyps(name, *ty, &g)?;
                let concl = self.mk_forall(name, *ty, p)?;
                self.make_theorem(g, concl)
            }
            Rule::ForallElim { theorem, term } => {
                let (g, c) = self.premise(*theorem)?;
                let tty = self.type_of(*term)?;
                let (name, ty, body) = self.dest_forall(c).ok_or(KernelError::ShapeMismatch)?;
                if !self.types_equal(ty, tty) {
                    return Err(KernelError::TypeMismatch);
                }
                let concl = self.subst_rec(body, &[((name, ty), *term)])?;
                self.make_theorem(g, concl)
            }
        }
    }
}
