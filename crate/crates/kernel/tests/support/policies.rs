//! Policy terms and scripted proofs, all issued through syscalls.

use kernel::driver::{Driver, Input};
use kernel::handle::*;
use kernel::syntax::Builder;
use kernel::{Handle, KernelError, Rule, Syscall};

pub const OPEN: u64 = 0x090;
pub const READ: u64 = 0x091;
pub const WRITE: u64 = 0x092;

/// `λk u s. body` with `k`, `u`, `s` free in `body`.
pub fn policy_text(body: &str) -> String {
    format!("(lam k (ty nat) (lam u (ty history) (lam s (ty meta) {body})))")
}

pub fn top() -> String {
    policy_text("(const true)")
}

pub fn bottom() -> String {
    policy_text("(const false)")
}

fn eq(ty: &str, l: &str, r: &str) -> String {
    format!("(app (app (const = (inst A {ty})) {l}) {r})")
}

fn imp(p: &str, q: &str) -> String {
    format!("(app (app (const ==>) {p}) {q})")
}

fn forall(name: &str, ty: &str, body: &str) -> String {
    format!("(app (const forall (inst A {ty})) (lam {name} {ty} {body}))")
}

fn mk_meta(a: &str, b: &str, c: &str) -> String {
    format!("(app (app (app (const mkMeta) {a}) {b}) {c})")
}

/// Bans syscall `number`: `λk u s. ∀a b. s = mkMeta number a b ==> false`.
pub fn seccomp(number: u64) -> String {
    let nat = "(ty nat)";
    let pinned = mk_meta(&format!("(nat {number})"), "(var a (ty nat))", "(var b (ty nat))");
    let body = imp(&eq("(ty meta)", "(var s (ty meta))", &pinned), "(const false)");
    policy_text(&forall("a", nat, &forall("b", nat, &body)))
}

/// A write must immediately follow a read:
/// `λk u s. ∀a b. s = mkMeta WRITE a b ==> ∃x y h. u = histCons (mkMeta READ x y) h`
/// with the existential encoded as `∀Q. (∀x y h. … ==> Q) ==> Q`.
pub fn write_after_read() -> String {
    let nat = "(ty nat)";
    let write = mk_meta(&format!("(nat {WRITE})"), "(var a (ty nat))", "(var b (ty nat))");
    let read = mk_meta(&format!("(nat {READ})"), "(var x (ty nat))", "(var y (ty nat))");
    let cons = format!("(app (app (const histCons) {read}) (var h (ty history)))");
    let witness = imp(&eq("(ty history)", "(var u (ty history))", &cons), "(var Q (ty bool))");
    let witness = forall("x", nat, &forall("y", nat, &forall("h", "(ty history)", &witness)));
    let exists = forall("Q", "(ty bool)", &imp(&witness, "(var Q (ty bool))"));
    let body = imp(&eq("(ty meta)", "(var s (ty meta))", &write), &exists);
    policy_text(&forall("a", nat, &forall("b", nat, &body)))
}

pub fn term(d: &mut Driver, text: &str) -> Handle {
    d.parse_term(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn rule(d: &mut Driver, r: Rule) -> Result<Handle, KernelError> {
    d.rule(&r)
}

fn forall_elims(d: &mut Driver, mut th: Handle, terms: &[Handle]) -> Result<Handle, KernelError> {
    for &t in terms {
        th = rule(d, Rule::ForallElim { theorem: th, term: t })?;
    }
    Ok(th)
}

fn forall_intros(d: &mut Driver, mut th: Handle, vars: &[(&str, Handle)]) -> Result<Handle, KernelError> {
    for &(name, ty) in vars.iter().rev() {
        th = rule(
            d,
            Rule::ForallIntro {
                theorem: th,
                name: name.into(),
                ty,
            },
        )?;
    }
    Ok(th)
}

pub fn beta_normalize(d: &mut Driver, t: Handle) -> Handle {
    d.allocate(Syscall::TermBetaNormalize, &[t.into()]).unwrap()
}

/// Shape of refinement proof to script.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refinement {
    /// `ψ k u s` is `φ k u s` up to α.
    Identity,
    /// `ψ k u s` normalizes to `false`.
    FromFalse,
    /// `φ k u s` normalizes to `true`.
    ToTrue,
}

/// Proves `∀k u s. psi k u s ==> phi k u s` in the given shape.
pub fn refinement_proof(d: &mut Driver, psi: Handle, phi: Handle, shape: Refinement) -> Result<Handle, KernelError> {
    let k = d.variable("k", TYPE_NAT)?;
    let u = d.variable("u", TYPE_HISTORY)?;
    let s = d.variable("s", TYPE_META)?;
    let apply = |d: &mut Driver, f: Handle| -> Result<Handle, KernelError> {
        let t = d.application(f, k)?;
        let t = d.application(t, u)?;
        let t = d.application(t, s)?;
        Ok(beta_normalize(d, t))
    };
    let l = apply(d, psi)?;
    let r = apply(d, phi)?;
    let body = match shape {
        Refinement::Identity => rule(d, Rule::Assume(l))?,
        Refinement::FromFalse => {
            let a = rule(d, Rule::Assume(l))?;
            rule(
                d,
                Rule::FalsityElim {
                    theorem: a,
                    proposition: r,
                },
            )?
        }
        Refinement::ToTrue => rule(d, Rule::TruthIntro)?,
    };
    let th = rule(
        d,
        Rule::ImpIntro {
            theorem: body,
            hypothesis: l,
        },
    )?;
    forall_intros(d, th, &[("k", TYPE_NAT), ("u", TYPE_HISTORY), ("s", TYPE_META)])
}

/// Installs `psi` with a scripted proof; returns the install status error.
pub fn install(d: &mut Driver, psi: Handle, shape: Refinement) -> Result<(), KernelError> {
    let phi = d.call(Syscall::PolicyCurrent, &[]).handle()?;
    let proof = refinement_proof(d, psi, phi, shape)?;
    d.invoke(Syscall::PolicyInstall, &[psi.into(), proof.into()])
}

/// Numerals `0..=max` built once through syscalls.
pub struct Numerals(Vec<Handle>);

impl Numerals {
    pub fn new(d: &mut Driver, max: usize) -> Numerals {
        let zero = term(d, "(const zero)");
        let suc = term(d, "(const suc)");
        let mut v = vec![zero];
        for i in 0..max {
            let next = d.application(suc, v[i]).unwrap();
            v.push(next);
        }
        Numerals(v)
    }

    pub fn get(&self, n: u64) -> Handle {
        self.0[n as usize]
    }
}

/// From `Γ ⊢ m = n` derives `Γ ⊢ false` by peeling `suc` with injectivity
/// and finishing with `suc x = zero ==> false`.  Fails in the kernel when
/// `m = n`.
pub fn numeral_disequality(d: &mut Driver, nums: &Numerals, eq: Handle, m: u64, n: u64) -> Result<Handle, KernelError> {
    let (mut eq, mut m, mut n) = if m < n {
        (rule(d, Rule::Symmetry(eq))?, n, m)
    } else {
        (eq, m, n)
    };
    while n > 0 {
        let inj = forall_elims(d, AXIOM_SUC_INJECTIVE, &[nums.get(m - 1), nums.get(n - 1)])?;
        eq = rule(d, Rule::ImpElim(inj, eq))?;
        m -= 1;
        n -= 1;
    }
    let ne = forall_elims(d, AXIOM_SUC_NOT_ZERO, &[nums.get(m.saturating_sub(1))])?;
    rule(d, Rule::ImpElim(ne, eq))
}

/// `⊢ (L = R) ==> false` where `L = mkMeta l₀ l₁ l₂`, `R = mkMeta r₀ r₁ r₂`
/// and slot `i` holds distinct numerals `m` and `n`.
pub fn meta_disequality(
    d: &mut Driver,
    nums: &Numerals,
    left: [Handle; 3],
    right: [Handle; 3],
    slot: usize,
    (m, n): (u64, u64),
) -> Result<Handle, KernelError> {
    let mk = term(d, "(const mkMeta)");
    let build = |d: &mut Driver, args: [Handle; 3]| -> Result<Handle, KernelError> {
        args.iter().try_fold(mk, |f, &a| d.application(f, a))
    };
    let l = build(d, left)?;
    let r = build(d, right)?;
    let equals = d.constant(CONSTANT_EQUALITY, &[(TYPE_ALPHA, TYPE_META)])?;
    let el = d.application(equals, l)?;
    let premise = d.application(el, r)?;
    let assumed = rule(d, Rule::Assume(premise))?;
    let axiom = [AXIOM_MK_META_INJECTIVE_0, AXIOM_MK_META_INJECTIVE_1, AXIOM_MK_META_INJECTIVE_2][slot];
    let all: Vec<Handle> = left.iter().chain(right.iter()).copied().collect();
    let inj = forall_elims(d, axiom, &all)?;
    let slot_eq = rule(d, Rule::ImpElim(inj, assumed))?;
    let falsity = numeral_disequality(d, nums, slot_eq, m, n)?;
    rule(
        d,
        Rule::ImpIntro {
            theorem: falsity,
            hypothesis: premise,
        },
    )
}

/// Splits `f a₁ … aₙ` into `f` and its arguments.
pub fn spine(d: &Driver, mut t: Handle) -> (Handle, Vec<Handle>) {
    let h = d.kernel().heaps();
    let mut args = Vec::new();
    while let Ok((f, a)) = h.split_application(t) {
        args.push(a);
        t = f;
    }
    args.reverse();
    (t, args)
}

/// Counts `suc` applications down to `zero`.
pub fn numeral_value(d: &Driver, mut t: Handle) -> Option<u64> {
    let h = d.kernel().heaps();
    let mut n = 0;
    loop {
        if h.is_constant_term(t, CONSTANT_ZERO) {
            return Some(n);
        }
        let (f, a) = h.split_application(t).ok()?;
        if !h.is_constant_term(f, CONSTANT_SUC) {
            return None;
        }
        n += 1;
        t = a;
    }
}

/// Opens `∀a b. P ==> C`, returning `(a, b, P, C)` with `a`, `b` free.
fn open_banned(d: &mut Driver, challenge: Handle) -> (Handle, Handle, Handle, Handle) {
    let h = d.kernel().heaps();
    let (na, ta, body) = h.dest_forall(challenge).expect("∀a");
    let (nb, tb, body) = h.dest_forall(body).expect("∀b");
    let (p, c) = h.dest_implication(body).expect("==>");
    let a = d.variable(&na, ta).unwrap();
    let b = d.variable(&nb, tb).unwrap();
    (a, b, p, c)
}

/// Scripted proof of a seccomp challenge `∀a b. s₀ = mkMeta banned a b ==> false`
/// for the call metadata `s₀ = mkMeta number arg₁ arg₂`.
pub fn seccomp_discharge(d: &mut Driver, nums: &Numerals, challenge: Handle, meta: [u64; 3], banned: u64) -> Result<Handle, KernelError> {
    let (a, b, _, _) = open_banned(d, challenge);
    let left = meta.map(|v| nums.get(v));
    let right = [nums.get(banned), a, b];
    let th = meta_disequality(d, nums, left, right, 0, (meta[0], banned))?;
    let (na, nb) = {
        let h = d.kernel().heaps();
        let (na, _, body) = h.dest_forall(challenge).unwrap();
        let (nb, _, _) = h.dest_forall(body).unwrap();
        (na, nb)
    };
    forall_intros(d, th, &[(&na, TYPE_NAT), (&nb, TYPE_NAT)])
}

/// Scripted proof for the write-after-read challenge of a call with
/// metadata `meta`.  Non-writes refute the premise; writes exhibit the head
/// of the pinned history, which must be a read.
pub fn write_after_read_discharge(d: &mut Driver, nums: &Numerals, challenge: Handle, meta: [u64; 3]) -> Result<Handle, KernelError> {
    let (a, b, premise, exists) = open_banned(d, challenge);
    let (na, nb) = {
        let h = d.kernel().heaps();
        let (na, _, body) = h.dest_forall(challenge).unwrap();
        let (nb, _, _) = h.dest_forall(body).unwrap();
        (na, nb)
    };
    let th = if meta[0] != WRITE {
        let left = meta.map(|v| nums.get(v));
        let right = [nums.get(WRITE), a, b];
        let dis = meta_disequality(d, nums, left, right, 0, (meta[0], WRITE))?;
        let assumed = rule(d, Rule::Assume(premise))?;
        let f = rule(d, Rule::ImpElim(dis, assumed))?;
        let e = rule(
            d,
            Rule::FalsityElim {
                theorem: f,
                proposition: exists,
            },
        )?;
        rule(
            d,
            Rule::ImpIntro {
                theorem: e,
                hypothesis: premise,
            },
        )?
    } else {
        let (nq, tq, body) = d.kernel().heaps().dest_forall(exists).expect("∀Q");
        let (witness, _) = d.kernel().heaps().dest_implication(body).expect("==>");
        // The pinned history is the right side of the equation inside the witness.
        let (_, inner) = d.kernel().heaps().dest_forall(witness).map(|(_, _, b)| ((), b)).unwrap();
        let (_, inner) = d.kernel().heaps().dest_forall(inner).map(|(_, _, b)| ((), b)).unwrap();
        let (_, inner) = d.kernel().heaps().dest_forall(inner).map(|(_, _, b)| ((), b)).unwrap();
        let (eqn, _) = d.kernel().heaps().dest_implication(inner).unwrap();
        let (history, _) = d.kernel().heaps().dest_equality(eqn).unwrap();
        let (_, cons_args) = spine(d, history);
        if cons_args.len() != 2 {
            // Empty history: nothing to exhibit, so the script gives up here.
            return Err(KernelError::ShapeMismatch);
        }
        let (_, meta_args) = spine(d, cons_args[0]);
        let assumed = rule(d, Rule::Assume(witness))?;
        let inst = forall_elims(d, assumed, &[meta_args[1], meta_args[2], cons_args[1]])?;
        let refl = rule(d, Rule::Reflexivity(history))?;
        let q = rule(d, Rule::ImpElim(inst, refl))?;
        let th = rule(
            d,
            Rule::ImpIntro {
                theorem: q,
                hypothesis: witness,
            },
        )?;
        let e = forall_intros(d, th, &[(&nq, tq)])?;
        rule(
            d,
            Rule::ImpIntro {
                theorem: e,
                hypothesis: premise,
            },
        )?
    };
    forall_intros(d, th, &[(&na, TYPE_NAT), (&nb, TYPE_NAT)])
}

/// Issues a gated call: requests a challenge, proves it with `prove`,
/// discharges, and retries.  Returns the final outcome or the first failure.
pub fn gated(
    d: &mut Driver,
    call: Syscall,
    inputs: &[Input],
    prove: impl FnOnce(&mut Driver, Handle) -> Result<Handle, KernelError>,
) -> Result<kernel::driver::Outcome, KernelError> {
    let mut first = inputs.to_vec();
    first.push(0u64.into());
    let out = d.call(call, &first);
    if out.status.error() != Some(KernelError::ObligationPending) {
        return Err(out.status.error().unwrap_or(KernelError::ShapeMismatch));
    }
    let ob = out.value("obligation").unwrap();
    let challenge = Handle::new(out.value("challenge").unwrap());
    let proof = prove(d, challenge)?;
    d.invoke(Syscall::ObligationDischarge, &[ob.into(), proof.into()])?;
    let mut retry = inputs.to_vec();
    retry.push(ob.into());
    let out = d.call(call, &retry);
    match out.status.error() {
        None => Ok(out),
        Some(e) => Err(e),
    }
}

pub fn truth(d: &mut Driver, _challenge: Handle) -> Result<Handle, KernelError> {
    rule(d, Rule::TruthIntro)
}

pub fn conclusion_of(d: &Driver, th: Handle) -> Handle {
    d.kernel().heaps().theorem(th).unwrap().conclusion()
}
