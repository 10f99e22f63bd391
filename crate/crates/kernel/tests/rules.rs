//! Inference-rule behaviour: worked examples and properties over random
//! derivations.

mod support;

use kernel::handle::*;
use kernel::{Handle, Heaps, KernelError, Rule};
use support::proofs::RuleFuzzer;

fn concl(h: &Heaps, th: Handle) -> Handle {
    h.theorem(th).unwrap().conclusion()
}

fn hyps(h: &Heaps, th: Handle) -> Vec<Handle> {
    h.theorem(th).unwrap().hypotheses().to_vec()
}

fn alpha(h: &Heaps, a: Handle, b: Handle) -> bool {
    h.alpha_equivalent(a, b).unwrap()
}

#[test]
fn symmetry_swaps_sides_and_keeps_hypotheses() {
    let mut h = Heaps::boot();
    let p = h.parse_term("(var p (ty bool))").unwrap();
    let eq = h.parse_term("(app (app (const = (inst A (ty nat))) (var a (ty nat))) (var b (ty nat)))").unwrap();
    let (a, b) = h.dest_equality(eq).unwrap();
    // {p ==> a = b, p} ⊢ a = b by modus ponens.
    let imp = h.parse_term("(app (app (const ==>) (var p (ty bool))) (app (app (const = (inst A (ty nat))) (var a (ty nat))) (var b (ty nat))))").unwrap();
    let assume_imp = h.apply_rule(&Rule::Assume(imp)).unwrap();
    let assume_p = h.apply_rule(&Rule::Assume(p)).unwrap();
    let pre = h.apply_rule(&Rule::ImpElim(assume_imp, assume_p)).unwrap();
    let sym = h.allocate_symmetry(pre).unwrap();
    let (l, r) = h.dest_equality(concl(&h, sym)).unwrap();
    assert!(alpha(&h, l, b) && alpha(&h, r, a));
    assert_eq!(hyps(&h, sym), hyps(&h, pre));
    let back = h.allocate_symmetry(sym).unwrap();
    assert!(alpha(&h, concl(&h, back), concl(&h, pre)));
    assert_eq!(hyps(&h, back), hyps(&h, pre));
}

#[test]
fn symmetry_rejects_non_equations() {
    let mut h = Heaps::boot();
    let truth = h.apply_rule(&Rule::TruthIntro).unwrap();
    assert_eq!(h.allocate_symmetry(truth), Err(KernelError::NotAnEquality));
    assert_eq!(h.allocate_symmetry(Handle::new(9999)), Err(KernelError::DanglingHandle));
    assert_eq!(h.allocate_symmetry(TYPE_BOOL), Err(KernelError::KindMismatch));
}

#[test]
fn worked_examples() {
    let mut h = Heaps::boot();
    let truth = h.apply_rule(&Rule::TruthIntro).unwrap();
    assert_eq!(h.split_theorem(truth).unwrap(), (vec![], h.prelude().true_term, false));

    let redex = h.parse_term("(app (lam x (ty nat) (var x (ty nat))) (const zero))").unwrap();
    let beta = h.apply_rule(&Rule::Beta(redex)).unwrap();
    assert_eq!(
        h.print_term(concl(&h, beta)).unwrap(),
        "(app (app (const = (inst A (ty nat))) (app (lam x (ty nat) (var x (ty nat))) (const zero))) (const zero))"
    );

    let p = h.parse_term("(var p (ty bool))").unwrap();
    let assume = h.apply_rule(&Rule::Assume(p)).unwrap();
    assert_eq!(h.split_theorem(assume).unwrap(), (vec![p], p, false));
    let imp = h.apply_rule(&Rule::ImpIntro { theorem: assume, hypothesis: p }).unwrap();
    assert!(hyps(&h, imp).is_empty());
    let pp = h.mk_implication(p, p).unwrap();
    assert!(alpha(&h, concl(&h, imp), pp));

    let x = h.parse_term("(var x (ty nat))").unwrap();
    let xx = h.mk_equality(x, x).unwrap();
    let assume_xx = h.apply_rule(&Rule::Assume(xx)).unwrap();
    assert_eq!(
        h.apply_rule(&Rule::ForallIntro { theorem: assume_xx, name: "x".into(), ty: TYPE_NAT }),
        Err(KernelError::SideConditionViolated)
    );
    let refl = h.apply_rule(&Rule::Reflexivity(x)).unwrap();
    let all = h.apply_rule(&Rule::ForallIntro { theorem: refl, name: "x".into(), ty: TYPE_NAT }).unwrap();
    let z = h.prelude().zero_term;
    let inst = h.apply_rule(&Rule::ForallElim { theorem: all, term: z }).unwrap();
    let zz = h.mk_equality(z, z).unwrap();
    assert!(alpha(&h, concl(&h, inst), zz));
    assert_eq!(
        h.apply_rule(&Rule::ForallElim { theorem: all, term: p }),
        Err(KernelError::TypeMismatch)
    );
    assert_eq!(h.apply_rule(&Rule::Assume(x)), Err(KernelError::NotAProposition));
    assert_eq!(h.apply_rule(&Rule::Beta(x)), Err(KernelError::ShapeMismatch));
}

#[test]
fn split_orders_hypotheses_canonically_and_is_stable() {
    let mut h = Heaps::boot();
    let p = h.parse_term("(var p (ty bool))").unwrap();
    let q = h.parse_term("(var q (ty bool))").unwrap();
    let ap = h.apply_rule(&Rule::Assume(p)).unwrap();
    let aq = h.apply_rule(&Rule::Assume(q)).unwrap();
    let pq = h.apply_rule(&Rule::DeductAntisym(ap, aq)).unwrap();
    let qp = h.apply_rule(&Rule::DeductAntisym(aq, ap)).unwrap();
    let first = h.split_theorem(pq).unwrap();
    assert_eq!(first, h.split_theorem(pq).unwrap());
    assert_eq!(first.0, h.split_theorem(qp).unwrap().0);
}

#[test]
fn hypotheses_are_deduplicated_modulo_alpha() {
    let mut h = Heaps::boot();
    let a = h.parse_term("(app (const forall (inst A (ty bool))) (lam x (ty bool) (var x (ty bool))))").unwrap();
    let b = h.parse_term("(app (const forall (inst A (ty bool))) (lam y (ty bool) (var y (ty bool))))").unwrap();
    let ta = h.apply_rule(&Rule::Assume(a)).unwrap();
    let tb = h.apply_rule(&Rule::Assume(b)).unwrap();
    let both = h.apply_rule(&Rule::DeductAntisym(ta, tb)).unwrap();
    assert_eq!(hyps(&h, both), Vec::<Handle>::new());
    let refl = h.apply_rule(&Rule::Reflexivity(a)).unwrap();
    let mp = h.apply_rule(&Rule::EqualityMp(refl, ta)).unwrap();
    let mp2 = h.apply_rule(&Rule::EqualityMp(refl, tb)).unwrap();
    let joined = h.apply_rule(&Rule::DeductAntisym(mp, mp2)).unwrap();
    assert!(hyps(&h, joined).len() <= 1);
}

/// Every theorem the fuzzer derives keeps the sequent invariants, and no
/// axiom-free derivation reaches `⊢ false`.
#[test]
fn random_derivations_keep_invariants() {
    let mut h = Heaps::boot();
    let mut rng = support::rng(20);
    let mut f = RuleFuzzer::new(&mut h, &mut rng);
    let fal = h.prelude().false_term;
    while f.applied < 20_000 {
        let Some((rule, th)) = f.step(&mut h, &mut rng) else { continue };
        let t = h.theorem(th).unwrap().clone();
        assert!(!t.is_axiom());
        for (i, a) in t.hypotheses().iter().enumerate() {
            assert!(h.is_proposition(*a).unwrap());
            for b in &t.hypotheses()[i + 1..] {
                assert!(!alpha(&h, *a, *b), "{rule:?}");
            }
        }
        assert!(h.is_proposition(t.conclusion()).unwrap());
        assert!(
            !(t.hypotheses().is_empty() && alpha(&h, t.conclusion(), fal)),
            "{rule:?} derived false"
        );
    }
    assert!(h.dangling_references().is_empty());
}

#[test]
fn symmetry_is_an_involution_on_random_equations() {
    let mut h = Heaps::boot();
    let mut rng = support::rng(21);
    let mut f = RuleFuzzer::new(&mut h, &mut rng);
    let mut checked = 0;
    while checked < 2000 {
        let Some((_, th)) = f.step(&mut h, &mut rng) else { continue };
        let Some((l, r)) = h.dest_equality(concl(&h, th)) else {
            assert_eq!(h.allocate_symmetry(th), Err(KernelError::NotAnEquality));
            continue;
        };
        let s = h.allocate_symmetry(th).unwrap();
        let (l2, r2) = h.dest_equality(concl(&h, s)).unwrap();
        assert!(alpha(&h, l2, r) && alpha(&h, r2, l));
        assert_eq!(hyps(&h, s), hyps(&h, th));
        let ss = h.allocate_symmetry(s).unwrap();
        assert!(alpha(&h, concl(&h, ss), concl(&h, th)));
        checked += 1;
    }
}

#[test]
fn deduction_inverts_and_empty_instantiation_is_identity() {
    let mut h = Heaps::boot();
    let mut rng = support::rng(22);
    let mut f = RuleFuzzer::new(&mut h, &mut rng);
    let mut checked = 0;
    while checked < 2000 {
        let Some((_, th)) = f.step(&mut h, &mut rng) else { continue };
        let p = *f.terms.iter().find(|t| h.is_proposition(**t).unwrap()).unwrap();
        let p = if rand::Rng::gen_bool(&mut rng, 0.5) {
            p
        } else {
            hyps(&h, th).first().copied().unwrap_or(p)
        };
        let imp = h.apply_rule(&Rule::ImpIntro { theorem: th, hypothesis: p }).unwrap();
        let ap = h.apply_rule(&Rule::Assume(p)).unwrap();
        let back = h.apply_rule(&Rule::ImpElim(imp, ap)).unwrap();
        assert!(alpha(&h, concl(&h, back), concl(&h, th)));
        let allowed: Vec<Handle> = hyps(&h, th).into_iter().chain([p]).collect();
        for hyp in hyps(&h, back) {
            assert!(allowed.iter().any(|a| alpha(&h, *a, hyp)));
        }

        let same = h.apply_rule(&Rule::InstTerm(th, vec![])).unwrap();
        assert!(alpha(&h, concl(&h, same), concl(&h, th)));
        let (a, b) = (hyps(&h, same), hyps(&h, th));
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| alpha(&h, *x, *y)));
        checked += 1;
    }
}

#[test]
fn deep_terms_do_not_exhaust_the_stack() {
    // A numeral this deep needs far more stack than the thread has.
    let worker = std::thread::Builder::new().stack_size(256 * 1024);
    let handle = worker
        .spawn(|| {
            let mut h = Heaps::boot();
            let mut t = h.prelude().zero_term;
            let suc = h.prelude().suc_term;
            for _ in 0..200_000 {
                t = h.allocate_application(suc, t).unwrap();
            }
            let eq = h.mk_equality(t, t).unwrap();
            let th = h.apply_rule(&Rule::Assume(eq)).unwrap();
            let th = h.apply_rule(&Rule::ImpIntro { theorem: th, hypothesis: eq }).unwrap();
            assert!(h.alpha_equivalent(eq, eq).unwrap());
            let id = h.parse_term("(lam n (ty nat) (var n (ty nat)))").unwrap();
            let redex = h.allocate_application(id, t).unwrap();
            let n = h.beta_normalize(redex).unwrap();
            assert_eq!(n, t);
            assert!(h.print_term(t).unwrap().starts_with("(nat 200000)"));
            h.theorem(th).unwrap().hypotheses().len()
        })
        .unwrap();
    assert_eq!(handle.join().unwrap(), 0);
}
