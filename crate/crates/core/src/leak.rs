//! Refinement and confidentiality leak detection over point observations.

use std::sync::Arc;

use crate::alphabet::{Alphabet, State};
use crate::error::{AlgebraError, Result};
use crate::exec;
use crate::expr::{Compiled, Expr};
use crate::predicate::Predicate;
use crate::view::{self, LocalRelation, Program, View};

#[derive(Debug, Clone)]
pub struct Refinement {
    pub holds: bool,
    /// Least `sys ∪ sys′` pair of the implementation not allowed by the
    /// specification.
    pub witness: Option<State>,
}

/// `impl ⊆ spec` on extensions.
pub fn refines(imp: &Program, spec: &Program) -> Result<Refinement> {
    let witness = imp.predicate().subset_witness(spec.predicate())?;
    Ok(Refinement {
        holds: witness.is_none(),
        witness,
    })
}

/// Initial states consistent with observing the single view pair `omega`.
pub fn infer_initials(p: &Program, v: &View, omega: &State) -> Result<Predicate> {
    let local = v.local_alphabet()?;
    if **omega.alphabet() != *local {
        return Err(AlgebraError::AlphabetMismatch {
            left: omega.alphabet().to_string(),
            right: local.to_string(),
        });
    }
    let psi = LocalRelation::new(Predicate::point(omega)?)?;
    let inferred = view::infer(p, v, &psi)?;
    inferred.project(v.sys())
}

/// Total map from unprimed system states to secret tokens.
#[derive(Debug, Clone)]
pub struct SecretMap {
    sys: Arc<Alphabet>,
    tokens: Vec<String>,
    of_state: Vec<u32>,
}

impl SecretMap {
    /// Evaluates `expr` at every system state; tokens are the printed
    /// values, numbered by first appearance in ascending state order.
    pub fn from_expr(expr: &Expr, sys: &Arc<Alphabet>) -> Result<Self> {
        let size = sys.checked_size()?;
        let c = Compiled::new(expr, sys)?;
        Ok(Self::from_fn(sys, size, |i| c.eval_index(i).to_string()))
    }

    pub fn from_table(sys: &Arc<Alphabet>, f: impl Fn(&State) -> String) -> Result<Self> {
        let size = sys.checked_size()?;
        Ok(Self::from_fn(sys, size, |i| f(&sys.state(i))))
    }

    fn from_fn(sys: &Arc<Alphabet>, size: usize, f: impl Fn(usize) -> String) -> Self {
        let mut tokens: Vec<String> = Vec::new();
        let mut of_state = Vec::with_capacity(size);
        for i in 0..size {
            let t = f(i);
            let id = match tokens.iter().position(|x| *x == t) {
                Some(id) => id,
                None => {
                    tokens.push(t);
                    tokens.len() - 1
                }
            };
            of_state.push(id as u32);
        }
        SecretMap {
            sys: Arc::clone(sys),
            tokens,
            of_state,
        }
    }

    pub fn sys(&self) -> &Arc<Alphabet> {
        &self.sys
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token_of(&self, index: usize) -> &str {
        &self.tokens[self.of_state[index] as usize]
    }

    /// Token ids of the states in `states`, as a membership mask.
    fn image(&self, states: &Predicate) -> Vec<bool> {
        let mut out = vec![false; self.tokens.len()];
        for i in states.bits().ones() {
            out[self.of_state[i] as usize] = true;
        }
        out
    }

    fn names(&self, mask: &[bool]) -> Vec<String> {
        mask.iter()
            .zip(&self.tokens)
            .filter(|(m, _)| **m)
            .map(|(_, t)| t.clone())
            .collect()
    }
}

/// Which observations are in the threat model, and optionally which
/// secrets the attacker starts out unable to tell apart.
#[derive(Debug, Clone)]
pub struct Policy {
    pub filter: LocalRelation,
    pub baseline: Option<Vec<String>>,
}

impl Policy {
    pub fn new(filter: LocalRelation) -> Self {
        Policy {
            filter,
            baseline: None,
        }
    }

    pub fn with_baseline(mut self, tokens: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.baseline = Some(tokens.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Debug, Clone)]
pub struct LeakEntry {
    pub observation: State,
    pub inferred: Vec<String>,
    pub baseline: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakVerdict {
    Leaks,
    Clean,
}

impl LeakVerdict {
    pub fn name(self) -> &'static str {
        match self {
            LeakVerdict::Leaks => "leaks",
            LeakVerdict::Clean => "clean",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LeakReport {
    pub entries: Vec<LeakEntry>,
    pub baseline: Vec<String>,
    /// Filtered observations with at least one consistent initial state.
    pub consistent: usize,
    pub verdict: LeakVerdict,
}

/// Scans every filtered point observation and reports those whose secret
/// image is a nonempty proper subset of the baseline.
pub fn leak_check(p: &Program, v: &View, sigma: &SecretMap, policy: &Policy) -> Result<LeakReport> {
    if sigma.sys() != v.sys() || p.sys() != v.sys() {
        return Err(AlgebraError::AlphabetMismatch {
            left: sigma.sys().to_string(),
            right: v.sys().to_string(),
        });
    }
    let local = v.local_alphabet()?;
    let filter = policy.filter.predicate();
    if filter.alphabet() != &local {
        return Err(AlgebraError::AlphabetMismatch {
            left: filter.alphabet().to_string(),
            right: local.to_string(),
        });
    }
    let omegas: Vec<usize> = filter.bits().ones().collect();
    let images = exec::map_slice(&omegas, |&w| -> Result<Option<Vec<bool>>> {
        let init = infer_initials(p, v, &local.state(w))?;
        Ok((!init.is_empty()).then(|| sigma.image(&init)))
    });
    let mut scanned = Vec::new();
    for (w, img) in omegas.iter().zip(images) {
        if let Some(img) = img? {
            scanned.push((*w, img));
        }
    }

    let baseline: Vec<bool> = match &policy.baseline {
        Some(tokens) => {
            let mut mask = vec![false; sigma.tokens().len()];
            for t in tokens {
                let id = sigma.tokens().iter().position(|x| x == t).ok_or_else(|| {
                    AlgebraError::Type(format!("baseline token `{t}` is not a secret value"))
                })?;
                mask[id] = true;
            }
            mask
        }
        None => {
            let mut mask = vec![false; sigma.tokens().len()];
            for (_, img) in &scanned {
                for (m, i) in mask.iter_mut().zip(img) {
                    *m |= *i;
                }
            }
            mask
        }
    };
    if !baseline.iter().any(|b| *b) {
        return Err(AlgebraError::EmptyBaseline);
    }
    let base_names = sigma.names(&baseline);

    let entries: Vec<LeakEntry> = scanned
        .iter()
        .filter(|(_, img)| {
            let subset = img.iter().zip(&baseline).all(|(i, b)| !*i || *b);
            subset && img != &baseline
        })
        .map(|(w, img)| LeakEntry {
            observation: local.state(*w),
            inferred: sigma.names(img),
            baseline: base_names.clone(),
        })
        .collect();
    let verdict = if entries.is_empty() {
        LeakVerdict::Clean
    } else {
        LeakVerdict::Leaks
    };
    Ok(LeakReport {
        entries,
        baseline: base_names,
        consistent: scanned.len(),
        verdict,
    })
}
