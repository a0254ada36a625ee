//! Seeded randomized checks of the calculus laws on small spaces
//! (one variable of size at most 4 on each side, or two booleans).
//! Each law draws from its own stream, so results do not depend on
//! scheduling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, Entry, Namespace, QName};
use crate::bits::Bits;
use crate::design::{self, lemma335_check};
use crate::domain::Domain;
use crate::error::Result;
use crate::exec;
use crate::leak::{infer_initials, refines};
use crate::predicate::Predicate;
use crate::view::{self, Healthiness, LocalRelation, Program, View, ViewedRelation};

#[derive(Debug, Clone)]
pub struct LawResult {
    pub name: &'static str,
    pub instances: usize,
    /// Description of the first failing instance.
    pub failure: Option<String>,
}

impl LawResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

struct Instance {
    view: View,
    prog: Arc<Alphabet>,
    local: Arc<Alphabet>,
}

fn bool_alphabet(ns: Namespace, names: [&str; 2]) -> Alphabet {
    Alphabet::new(names.map(|n| Entry::new(QName::new(ns, n, false), Domain::Bool))).expect("bools")
}

fn int_alphabet(q: QName, n: usize) -> Alphabet {
    Alphabet::new([Entry::new(q, Domain::range(0, n as i64 - 1).expect("range"))]).expect("ints")
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Bits {
    let density = [0.2, 0.5, 0.8][rng.random_range(0..3)];
    Bits::from_indices(len, (0..len).filter(|_| rng.random_bool(density)).collect::<Vec<_>>())
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let (sys, vu) = if rng.random_ratio(1, 4) {
        (
            bool_alphabet(Namespace::Sys, ["p", "q"]),
            bool_alphabet(Namespace::Vu, ["a", "b"]),
        )
    } else {
        (
            int_alphabet(QName::sys("x"), rng.random_range(1..=4)),
            int_alphabet(QName::vu("a"), rng.random_range(1..=4)),
        )
    };
    let alpha = Arc::new(sys.union(&vu).expect("disjoint"));
    let n = alpha.size() as usize;
    let bits = random_bits(rng, n);
    let view = View::new(Predicate::from_bits(&alpha, bits).expect("size")).expect("shape");
    let prog = view.program_alphabet().expect("prog");
    let local = view.local_alphabet().expect("local");
    Instance { view, prog, local }
}

fn random_pred(rng: &mut ChaCha8Rng, a: &Arc<Alphabet>) -> Predicate {
    Predicate::from_bits(a, random_bits(rng, a.size() as usize)).expect("size")
}

fn describe(inst: &Instance, extra: &[(&str, &Predicate)]) -> String {
    let mut s = format!("view {}", inst.view.predicate().to_dnf());
    for (name, p) in extra {
        s.push_str(&format!("; {name} = {}", p.to_dnf()));
    }
    s
}

fn local_cyl(inst: &Instance, u: &Predicate) -> Result<ViewedRelation> {
    ViewedRelation::new(&inst.view.viewed_alphabet()?, u.clone())
}

fn prog_cyl(inst: &Instance, p: &Predicate) -> Result<ViewedRelation> {
    ViewedRelation::new(&inst.view.viewed_alphabet()?, p.clone())
}

fn program(p: &Predicate) -> Program {
    Program::new(p.clone()).expect("program shape")
}

fn local(u: &Predicate) -> LocalRelation {
    LocalRelation::new(u.clone()).expect("local shape")
}

/// `∃ vu, vu′ · ΔV ∧ ψ` by direct enumeration over the view predicate.
fn image_loop(v: &View, psi: &Predicate, prog: &Arc<Alphabet>) -> Predicate {
    let (ns, nu) = (v.sys_size(), v.vu_size());
    Predicate::from_fn(prog, |i| {
        let (s, s2) = (i % ns, i / ns);
        (0..nu).any(|u| {
            (0..nu).any(|u2| v.relates(s, u) && v.relates(s2, u2) && psi.contains(u + nu * u2))
        })
    })
    .expect("size")
}

type Law = fn(&mut ChaCha8Rng) -> Result<Option<String>>;

fn galois(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let p = random_pred(rng, &inst.prog);
    let u = random_pred(rng, &inst.local);
    let l = view::localise(&inst.view, &program(&p))?;
    let g = view::globalise(&inst.view, &local(&u))?;
    let left = l.is_subset(&local_cyl(&inst, &u)?)?;
    let right = prog_cyl(&inst, &p)?.is_subset(&g)?;
    Ok((left != right).then(|| describe(&inst, &[("P", &p), ("U", &u)])))
}

fn unit_counit(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let p = random_pred(rng, &inst.prog);
    let u = random_pred(rng, &inst.local);
    let lp = view::localise(&inst.view, &program(&p))?.project(&inst.local)?;
    let unit = prog_cyl(&inst, &p)?.is_subset(&view::globalise(&inst.view, &local(&lp))?)?;
    let gu = view::globalise(&inst.view, &local(&u))?.project(&inst.prog)?;
    let counit = view::localise(&inst.view, &program(&gu))?.is_subset(&local_cyl(&inst, &u)?)?;
    Ok((!unit || !counit).then(|| describe(&inst, &[("P", &p), ("U", &u)])))
}

fn complement(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let psi = random_pred(rng, &inst.local);
    let g = view::globalise(&inst.view, &local(&psi.not()))?;
    let lhs = g.support().not();
    let rhs = image_loop(&inst.view, &psi, &inst.prog);
    Ok((lhs != rhs).then(|| describe(&inst, &[("psi", &psi)])))
}

fn vh1_totality(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let v = &inst.view;
    let total = (0..v.sys_size()).all(|s| (0..v.vu_size()).any(|u| v.relates(s, u)));
    let fix = view::is_healthy(Healthiness::Vh1, v)?.equal;
    Ok((total != fix).then(|| describe(&inst, &[])))
}

fn vh1_idempotent(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let once = view::vh1(&inst.view)?;
    let twice = view::vh1(&once)?;
    Ok((once != twice).then(|| describe(&inst, &[])))
}

fn monotone(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let p = random_pred(rng, &inst.prog);
    let q = p.or(&random_pred(rng, &inst.prog))?;
    let u = random_pred(rng, &inst.local);
    let w = u.or(&random_pred(rng, &inst.local))?;
    let l = view::localise(&inst.view, &program(&p))?
        .is_subset(&view::localise(&inst.view, &program(&q))?)?;
    let g = view::globalise(&inst.view, &local(&u))?
        .is_subset(&view::globalise(&inst.view, &local(&w))?)?;
    Ok((!l || !g).then(|| describe(&inst, &[("P", &p), ("Q", &q), ("U", &u), ("W", &w)])))
}

fn infer_within_program(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let p = random_pred(rng, &inst.prog);
    let psi = random_pred(rng, &inst.local);
    let i = view::infer(&program(&p), &inst.view, &local(&psi))?;
    let ok = i.is_subset(&prog_cyl(&inst, &p)?)?;
    Ok((!ok).then(|| describe(&inst, &[("P", &p), ("psi", &psi)])))
}

fn vhd_vh_vh1(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let a = design::vhd(&inst.view)?;
    let b = view::vh(&inst.view)?;
    let c = view::vh1(&inst.view)?;
    Ok((a != b || b != c).then(|| describe(&inst, &[])))
}

/// Kernel results against the literal formulas over the materialised
/// viewed alphabet.
fn kernels_match_formulas(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let p = random_pred(rng, &inst.prog);
    let u = random_pred(rng, &inst.local);
    let full = inst.view.viewed_alphabet()?;
    let delta = view::delta(&inst.view)?.to_predicate()?;
    let sys_names: Vec<QName> = full.names().filter(|n| n.ns == Namespace::Sys).cloned().collect();
    let vu_names: Vec<QName> = full.names().filter(|n| n.ns == Namespace::Vu).cloned().collect();
    let lit_l = delta.and(&p.lift(&full)?)?.exists(&sys_names)?;
    let lit_g = delta.implies(&u.lift(&full)?)?.forall(&vu_names)?;
    let fast_l = view::localise(&inst.view, &program(&p))?.to_predicate()?;
    let fast_g = view::globalise(&inst.view, &local(&u))?.to_predicate()?;
    Ok((lit_l != fast_l || lit_g != fast_g).then(|| describe(&inst, &[("P", &p), ("U", &u)])))
}

fn lemma_ok_slice(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let sys = inst.view.sys().clone();
    let pre = random_pred(rng, &sys);
    let post = random_pred(rng, &inst.prog);
    let r = lemma335_check(&inst.view, &pre, &post)?;
    // Index bit 0 is ok.
    let differs = (0..r.lhs.space_size()).any(|i| i & 1 == 1 && r.lhs.contains(i) != r.rhs.contains(i));
    Ok(differs.then(|| describe(&inst, &[("pre", &pre), ("post", &post)])))
}

fn refinement_order(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let a = random_pred(rng, &inst.prog);
    let b = a.or(&random_pred(rng, &inst.prog))?;
    let c = if rng.random_bool(0.5) { b.or(&random_pred(rng, &inst.prog))? } else { random_pred(rng, &inst.prog) };
    let r = |x: &Predicate, y: &Predicate| refines(&program(x), &program(y)).map(|r| r.holds);
    let reflexive = r(&a, &a)?;
    let transitive = !(r(&a, &b)? && r(&b, &c)?) || r(&a, &c)?;
    let antisym = !(r(&a, &c)? && r(&c, &a)?) || a == c;
    Ok((!reflexive || !transitive || !antisym).then(|| describe(&inst, &[("A", &a), ("B", &b), ("C", &c)])))
}

fn initials_recovered(rng: &mut ChaCha8Rng) -> Result<Option<String>> {
    let inst = random_instance(rng);
    let v = view::vh1(&inst.view)?;
    let p = random_pred(rng, &inst.prog);
    let prog = program(&p);
    let l = view::localise(&v, &prog)?.project(&inst.local)?;
    let mut union = Predicate::empty(v.sys())?;
    for w in l.states() {
        union = union.or(&infer_initials(&prog, &v, &w)?)?;
    }
    let ok = union == prog.initials()?;
    Ok((!ok).then(|| describe(&inst, &[("P", &p)])))
}

pub const LAWS: &[(&str, Law)] = &[
    ("galois adjunction", galois),
    ("unit and counit", unit_counit),
    ("complement identity", complement),
    ("VH1 fixpoint iff total", vh1_totality),
    ("VH1 idempotent", vh1_idempotent),
    ("localise and globalise monotone", monotone),
    ("infer within program", infer_within_program),
    ("VHD = VH = VH1", vhd_vh_vh1),
    ("kernels match formulas", kernels_match_formulas),
    ("designs agree on ok slices", lemma_ok_slice),
    ("refinement partial order", refinement_order),
    ("initials recovered by inference", initials_recovered),
];

/// Runs every law on `instances` random instances.
pub fn run_laws(instances: usize, seed: u64) -> Result<Vec<LawResult>> {
    let results = exec::map_slice(&(0..LAWS.len()).collect::<Vec<_>>(), |&k| -> Result<LawResult> {
        let (name, law) = LAWS[k];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for i in 0..instances {
            if let Some(msg) = law(&mut rng)? {
                return Ok(LawResult {
                    name,
                    instances: i + 1,
                    failure: Some(msg),
                });
            }
        }
        Ok(LawResult {
            name,
            instances,
            failure: None,
        })
    });
    results.into_iter().collect()
}
