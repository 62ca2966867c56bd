//! Stable, neat, ample and quasi-stable systems of a two-sided problem, and
//! the fixed-point procedures that compute them.
//!
//! Notation in comments: `W`, `F` are the Worker's and Firm's choice
//! functions, `D_W`, `D_F` their desirability operators.

use std::sync::Arc;

use serde::Serialize;

use crate::choice::ChoiceFunction;
use crate::error::{Error, Result};
use crate::poset::{IdealLattice, Poset};
use crate::system::System;

/// A contract poset with the Worker's and Firm's choice functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    poset: Arc<Poset>,
    worker: ChoiceFunction,
    firm: ChoiceFunction,
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub acceptable_w: bool,
    pub acceptable_f: bool,
    pub stable: bool,
    pub neat: bool,
    pub ample: bool,
    pub quasi_stable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    /// B ↦ D_F(W(B))
    Descending,
    /// A ↦ A ∪ D_F(W(A))
    Increasing,
}

/// One step of the Worker-offers / Firm-responds dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    pub current: System,
    /// W(B)
    pub offered: System,
    /// F(W(B))
    pub retained: System,
    /// W(B) \ F(W(B))
    pub rejected: System,
    pub next: System,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationTrace {
    pub kind: TraceKind,
    pub rounds: Vec<Round>,
    pub fixpoint: System,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaOutcome {
    /// W(N(B))
    pub stable: System,
    /// N(B), the largest neat system inside B
    pub neat_core: System,
    pub trace: IterationTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extremes {
    pub s_max_w: System,
    pub s_min_w: System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeOp {
    /// Binary meet, folded left over the family.
    MeetW,
    /// Binary join, folded left over the family.
    JoinW,
    InfW,
    SupW,
}

impl Problem {
    /// Strict problem: both choice functions must be known Plott functions.
    pub fn new(worker: ChoiceFunction, firm: ChoiceFunction) -> Result<Self> {
        if !worker.is_plott() || !firm.is_plott() {
            return Err(Error::UncheckedChoiceFunction);
        }
        Problem::build(worker, firm, true)
    }

    /// Accepts unverified choice functions. No theorem guarantee applies.
    pub fn permissive(worker: ChoiceFunction, firm: ChoiceFunction) -> Result<Self> {
        Problem::build(worker, firm, false)
    }

    fn build(worker: ChoiceFunction, firm: ChoiceFunction, strict: bool) -> Result<Self> {
        if worker.poset() != firm.poset() {
            return Err(Error::PosetMismatch);
        }
        Ok(Problem {
            poset: worker.poset().clone(),
            worker,
            firm,
            strict,
        })
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn worker(&self) -> &ChoiceFunction {
        &self.worker
    }

    pub fn firm(&self) -> &ChoiceFunction {
        &self.firm
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// The same market with Worker and Firm exchanged.
    pub fn swapped(&self) -> Problem {
        Problem {
            poset: self.poset.clone(),
            worker: self.firm.clone(),
            firm: self.worker.clone(),
            strict: self.strict,
        }
    }

    pub(crate) fn w(&self, a: System) -> System {
        self.worker.apply(a)
    }

    pub(crate) fn f(&self, a: System) -> System {
        self.firm.apply(a)
    }

    pub(crate) fn dw(&self, a: System) -> System {
        self.worker.desire(a)
    }

    pub(crate) fn df(&self, a: System) -> System {
        self.firm.desire(a)
    }

    pub fn is_stable(&self, x: System) -> Result<bool> {
        self.poset.require_ideal(x)?;
        Ok(self.df(x).intersection(self.dw(x)) == x)
    }

    pub fn is_ample(&self, x: System) -> Result<bool> {
        self.poset.require_ideal(x)?;
        Ok(self.df(self.w(x)).is_subset(x))
    }

    pub fn classify(&self, x: System) -> Result<Classification> {
        self.poset.require_ideal(x)?;
        let dfx = self.df(x);
        let stable = dfx.intersection(self.dw(x)) == x;
        let stable_asym = self.w(dfx) == x;
        if stable != stable_asym && self.strict {
            return Err(Error::InternalInvariant(format!(
                "stability criteria disagree on {:?}",
                self.poset.names(x)
            )));
        }
        let dfw = self.df(self.w(x));
        Ok(Classification {
            acceptable_w: self.w(x) == x,
            acceptable_f: self.f(x) == x,
            stable,
            neat: dfw == x,
            ample: dfw.is_subset(x),
            quasi_stable: x.is_subset(self.w(dfx)),
        })
    }

    fn round(&self, current: System, next: impl Fn(System, System) -> System) -> Round {
        let offered = self.w(current);
        let retained = self.f(offered);
        let next = next(current, self.df(offered));
        Round {
            current,
            offered,
            retained,
            rejected: offered.difference(retained),
            next,
        }
    }

    fn iterate(&self, start: System, kind: TraceKind) -> Result<IterationTrace> {
        let mut rounds = Vec::new();
        let mut current = start;
        // a strictly monotone chain of subsets of E has at most |E| + 1 members
        for _ in 0..=self.poset.len() {
            let r = match kind {
                TraceKind::Descending => self.round(current, |_, d| d),
                TraceKind::Increasing => self.round(current, |b, d| b.union(d)),
            };
            rounds.push(r);
            let monotone = match kind {
                TraceKind::Descending => r.next.is_subset(current),
                TraceKind::Increasing => current.is_subset(r.next),
            };
            if !monotone {
                return Err(Error::InternalInvariant(format!(
                    "{kind:?} iteration is not monotone at {:?}",
                    self.poset.names(current)
                )));
            }
            if r.next == current {
                return Ok(IterationTrace {
                    kind,
                    rounds,
                    fixpoint: current,
                });
            }
            current = r.next;
        }
        Err(Error::InternalInvariant(format!(
            "{kind:?} iteration did not terminate"
        )))
    }

    /// Σ(B): iterates B ↦ D_F(W(B)) from an ample `b` down to the largest
    /// neat system inside it and returns its core W(N(B)).
    pub fn sigma(&self, b: System) -> Result<SigmaOutcome> {
        self.poset.require_ideal(b)?;
        let image = self.df(self.w(b));
        if !image.is_subset(b) {
            return Err(Error::NotAmple {
                system: self.poset.names(b),
                image: self.poset.names(image),
            });
        }
        let trace = self.iterate(b, TraceKind::Descending)?;
        Ok(SigmaOutcome {
            stable: self.w(trace.fixpoint),
            neat_core: trace.fixpoint,
            trace,
        })
    }

    /// Smallest fixed point above `a` of A ↦ A ∪ D_F(W(A)); always ample.
    pub fn ample_closure(&self, a: System) -> Result<IterationTrace> {
        self.poset.require_ideal(a)?;
        self.iterate(a, TraceKind::Increasing)
    }

    /// The ⪯_W-greatest and ⪯_W-least stable systems. The least one is the
    /// ⪯_F-greatest, obtained from the problem with the roles swapped.
    pub fn extremal_stable(&self) -> Result<Extremes> {
        let full = self.poset.full();
        Ok(Extremes {
            s_max_w: self.sigma(full)?.stable,
            s_min_w: self.swapped().sigma(full)?.stable,
        })
    }

    fn require_stable(&self, s: System) -> Result<()> {
        if self.is_stable(s)? {
            Ok(())
        } else {
            Err(Error::NotStable(self.poset.names(s)))
        }
    }

    /// ⪯_W-infimum: Σ(∩ D_F(S_i)).
    fn infimum(&self, family: &[System]) -> Result<System> {
        let shell = family
            .iter()
            .fold(self.poset.full(), |acc, &s| acc.intersection(self.df(s)));
        Ok(self.sigma(shell)?.stable)
    }

    pub fn lattice_op(&self, op: LatticeOp, family: &[System]) -> Result<System> {
        let (&first, rest) = family.split_first().ok_or(Error::EmptyFamily)?;
        for &s in family {
            self.require_stable(s)?;
        }
        match op {
            LatticeOp::InfW => self.infimum(family),
            LatticeOp::SupW => self.swapped().infimum(family),
            LatticeOp::MeetW => rest
                .iter()
                .try_fold(first, |acc, &t| self.infimum(&[acc, t])),
            LatticeOp::JoinW => {
                let dual = self.swapped();
                rest.iter()
                    .try_fold(first, |acc, &t| dual.infimum(&[acc, t]))
            }
        }
    }
}

/// Which half of the comparative hypothesis an ideal violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparativeViolation {
    /// D_{F'}(A) ⊄ D_F(A)
    FirmDesirability,
    /// W(A) ⊄ W'(A)
    WorkerChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comparison {
    pub holds: bool,
    pub witness: Option<(System, ComparativeViolation)>,
}

/// Checks that the modified problem has a more demanding Firm
/// (D_{F'} ⊆ D_F) and a more compliant Worker (W ⊆ W') on every ideal.
pub fn check_comparative(
    original: &Problem,
    modified: &Problem,
    max_ideals: usize,
) -> Result<Comparison> {
    if original.poset() != modified.poset() {
        return Err(Error::PosetMismatch);
    }
    for a in original.poset().enumerate_ideals(max_ideals)? {
        if !modified.df(a).is_subset(original.df(a)) {
            return Ok(Comparison {
                holds: false,
                witness: Some((a, ComparativeViolation::FirmDesirability)),
            });
        }
        if !original.w(a).is_subset(modified.w(a)) {
            return Ok(Comparison {
                holds: false,
                witness: Some((a, ComparativeViolation::WorkerChoice)),
            });
        }
    }
    Ok(Comparison {
        holds: true,
        witness: None,
    })
}

/// Maps a stable system S of `original` to Σ'(D_F(S)) in `modified`.
pub fn transfer(
    original: &Problem,
    modified: &Problem,
    s: System,
    max_ideals: usize,
) -> Result<System> {
    transfer_all(original, modified, &[s], max_ideals).map(|v| v[0])
}

/// [`transfer`] over several systems with a single hypothesis check.
pub fn transfer_all(
    original: &Problem,
    modified: &Problem,
    systems: &[System],
    max_ideals: usize,
) -> Result<Vec<System>> {
    let cmp = check_comparative(original, modified, max_ideals)?;
    if let Some((a, kind)) = cmp.witness {
        return Err(Error::PreconditionFailed(format!(
            "comparative hypothesis fails at {:?} ({kind:?})",
            original.poset().names(a)
        )));
    }
    systems
        .iter()
        .map(|&s| {
            original.require_stable(s)?;
            Ok(modified.sigma(original.df(s))?.stable)
        })
        .collect()
}

/// Ideals of `pr` that satisfy `pred`, in canonical order.
pub(crate) fn filter_ideals(
    lattice: &IdealLattice,
    mut pred: impl FnMut(System) -> Result<bool>,
) -> Result<Vec<System>> {
    let mut out = Vec::new();
    for &s in lattice.ideals() {
        if pred(s)? {
            out.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn s(pr: &Problem, names: &[&str]) -> System {
        pr.poset().system(names).unwrap()
    }

    #[test]
    fn classify_fix_ab() {
        let pr = fixtures::fix_ab();
        let c = pr.classify(s(&pr, &["b"])).unwrap();
        assert!(c.stable && c.neat && c.ample && c.quasi_stable);
        let c = pr.classify(s(&pr, &["a", "b"])).unwrap();
        assert!(!c.stable && c.neat && c.ample);
        let c = pr.classify(System::EMPTY).unwrap();
        assert!(c.quasi_stable && !c.ample && !c.stable);
    }

    #[test]
    fn sigma_fix_ab() {
        let pr = fixtures::fix_ab();
        let out = pr.sigma(pr.poset().full()).unwrap();
        assert_eq!(out.stable, s(&pr, &["a"]));
        assert_eq!(out.neat_core, pr.poset().full());
        assert_eq!(out.trace.rounds.len(), 1);
        let out = pr.sigma(s(&pr, &["b"])).unwrap();
        assert_eq!(
            (out.stable, out.neat_core),
            (s(&pr, &["b"]), s(&pr, &["b"]))
        );
        assert_eq!(
            pr.sigma(s(&pr, &["a"])),
            Err(Error::NotAmple {
                system: vec!["a".into()],
                image: vec!["a".into(), "b".into()]
            })
        );
    }

    #[test]
    fn sigma_trace_records_offers() {
        let pr = fixtures::fix_ab();
        let r = pr.sigma(pr.poset().full()).unwrap().trace.rounds[0];
        assert_eq!(r.offered, s(&pr, &["a"]));
        assert_eq!(r.retained, s(&pr, &["a"]));
        assert_eq!(r.rejected, System::EMPTY);
        assert_eq!(r.next, pr.poset().full());
    }

    #[test]
    fn ample_closure_examples() {
        let pr = fixtures::fix_ab();
        assert_eq!(
            pr.ample_closure(System::EMPTY).unwrap().fixpoint,
            pr.poset().full()
        );
        let t = pr.ample_closure(s(&pr, &["b"])).unwrap();
        assert_eq!((t.fixpoint, t.rounds.len()), (s(&pr, &["b"]), 1));
        let ch = fixtures::fix_chain();
        assert_eq!(
            ch.ample_closure(System::EMPTY).unwrap().fixpoint,
            s(&ch, &["x1"])
        );
    }

    #[test]
    fn extremes() {
        let pr = fixtures::fix_ab();
        let e = pr.extremal_stable().unwrap();
        assert_eq!((e.s_max_w, e.s_min_w), (s(&pr, &["a"]), s(&pr, &["b"])));
        let e = fixtures::fix_empty().extremal_stable().unwrap();
        assert_eq!((e.s_max_w, e.s_min_w), (System::EMPTY, System::EMPTY));
        let ch = fixtures::fix_chain();
        let e = ch.extremal_stable().unwrap();
        assert_eq!((e.s_max_w, e.s_min_w), (s(&ch, &["x1"]), s(&ch, &["x1"])));
    }

    #[test]
    fn lattice_ops_fix_ab() {
        let pr = fixtures::fix_ab();
        let (a, b) = (s(&pr, &["a"]), s(&pr, &["b"]));
        assert_eq!(pr.lattice_op(LatticeOp::MeetW, &[a, b]).unwrap(), b);
        assert_eq!(pr.lattice_op(LatticeOp::InfW, &[a, b]).unwrap(), b);
        assert_eq!(pr.lattice_op(LatticeOp::JoinW, &[a, b]).unwrap(), a);
        assert_eq!(pr.lattice_op(LatticeOp::SupW, &[a, b]).unwrap(), a);
        assert_eq!(pr.lattice_op(LatticeOp::MeetW, &[a, a]).unwrap(), a);
        assert_eq!(pr.lattice_op(LatticeOp::InfW, &[]), Err(Error::EmptyFamily));
        assert_eq!(
            pr.lattice_op(LatticeOp::InfW, &[a, pr.poset().full()]),
            Err(Error::NotStable(vec!["a".into(), "b".into()]))
        );
    }

    #[test]
    fn comparative_fix_cmp() {
        let (pr, pr2) = fixtures::fix_cmp();
        assert!(check_comparative(&pr, &pr2, 64).unwrap().holds);
        assert!(check_comparative(&pr, &pr, 64).unwrap().holds);
        let back = check_comparative(&pr2, &pr, 64).unwrap();
        assert!(!back.holds);
        // first violating ideal in canonical order
        assert_eq!(
            back.witness,
            Some((System::EMPTY, ComparativeViolation::FirmDesirability))
        );
        let a = s(&pr, &["a"]);
        assert!(!pr
            .firm()
            .desirability(a)
            .unwrap()
            .is_subset(pr2.firm().desirability(a).unwrap()));
        let (a, b) = (s(&pr, &["a"]), s(&pr, &["b"]));
        assert_eq!(transfer(&pr, &pr2, a, 64).unwrap(), b);
        assert_eq!(transfer(&pr, &pr2, b, 64).unwrap(), b);
        assert_eq!(transfer(&pr, &pr, a, 64).unwrap(), a);
        assert!(matches!(
            transfer(&pr2, &pr, b, 64),
            Err(Error::PreconditionFailed(_))
        ));
        assert!(matches!(
            transfer(&pr, &pr2, pr.poset().full(), 64),
            Err(Error::NotStable(_))
        ));
    }

    #[test]
    fn strict_mode_refuses_unchecked() {
        let bad = fixtures::t_bad();
        let f = fixtures::fix_ab().firm().clone();
        assert_eq!(
            Problem::new(bad.clone(), f.clone()),
            Err(Error::UncheckedChoiceFunction)
        );
        assert!(Problem::permissive(bad, f).is_ok());
    }
}
