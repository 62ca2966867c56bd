//! Choice functions on the ideal lattice of a poset.
//!
//! Three families are supported: explicit tables, quotas (top-`q` of the
//! acceptable elements by a strict priority, discrete posets only) and
//! aggregates that run one choice function per block of a partition. The
//! module also hosts the Plott-axiom validator, the Blair preorder and the
//! desirability operator `D`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Names, Result};
use crate::poset::{IdealLattice, Poset};
use crate::system::System;

/// Ideal count up to which quota functions are validated exhaustively when
/// constructed. Larger quota functions are Plott by the usual argument.
pub const QUOTA_VALIDATION_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceFunction {
    poset: Arc<Poset>,
    family: Family,
    validation: Validation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Table(Table),
    Quota(Quota),
    Aggregate(Aggregate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    entries: HashMap<System, System>,
}

impl Table {
    /// Entries sorted by key in canonical order.
    pub fn entries(&self) -> Vec<(System, System)> {
        let mut v: Vec<_> = self.entries.iter().map(|(&k, &v)| (k, v)).collect();
        v.sort_unstable_by_key(|&(k, _)| k);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quota {
    /// Acceptable elements, highest priority first.
    pub priority: Vec<usize>,
    pub quota: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    parts: Vec<Part>,
}

impl Aggregate {
    pub fn parts(&self) -> &[Part] {
        &self.parts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    mask: System,
    /// parent index of each child-local index
    members: Vec<usize>,
    choice: ChoiceFunction,
}

impl Part {
    pub fn mask(&self) -> System {
        self.mask
    }

    pub fn choice(&self) -> &ChoiceFunction {
        &self.choice
    }

    fn project(&self, a: System) -> System {
        self.members
            .iter()
            .enumerate()
            .filter(|&(_, &g)| a.contains(g))
            .map(|(l, _)| l)
            .collect()
    }

    fn lift(&self, local: System) -> System {
        local.iter().map(|l| self.members[l]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Validation {
    Unchecked,
    PlottVerified,
    /// Plott by a structural argument, without an exhaustive run.
    PlottByConstruction,
    PlottFailed(Box<PlottReport>),
}

/// Table construction options.
#[derive(Debug, Clone, Copy)]
pub struct TableOptions {
    pub validate: bool,
    /// Reject the table when validation finds a violation.
    pub strict: bool,
    pub max_ideals: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            validate: true,
            strict: true,
            max_ideals: crate::DEFAULT_MAX_IDEALS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Consistency,
    Substitutability,
    IdealValued,
    /// C(A ∪ B) ⊆ C(A) ∪ B
    UnionBound,
    /// C(A ∪ B) = C(C(A) ∪ B)
    PathIndependence,
}

/// A counterexample to one law. For the pair laws `a` and `b` are the two
/// ideals; `choice_a` is C(A) and `choice_b` is C(B) for consistency and
/// substitutability, C(A ∪ B) for the union laws. For `IdealValued` only
/// `a` and `choice_a` are meaningful.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlottWitness {
    pub law: Law,
    pub a: Names,
    pub b: Names,
    pub choice_a: Names,
    pub choice_b: Names,
}

impl PlottWitness {
    /// Re-evaluates the witness against `cf`; true if the violation is still there.
    pub fn reproduces(&self, cf: &ChoiceFunction) -> bool {
        let p = cf.poset();
        let (Ok(a), Ok(b)) = (p.system(&self.a), p.system(&self.b)) else {
            return false;
        };
        let Some(ca) = cf.eval(a) else { return false };
        match self.law {
            Law::IdealValued => !ca.is_subset(a) || !p.is_ideal(ca),
            Law::Substitutability => match cf.eval(b) {
                Some(cb) => a.is_subset(b) && !a.intersection(cb).is_subset(ca),
                None => false,
            },
            Law::Consistency => match cf.eval(b) {
                Some(cb) => ca.is_subset(b) && b.is_subset(a) && ca != cb,
                None => false,
            },
            Law::UnionBound => match cf.eval(a.union(b)) {
                Some(cu) => !cu.is_subset(ca.union(b)),
                None => false,
            },
            Law::PathIndependence => match (cf.eval(a.union(b)), cf.eval(ca.union(b))) {
                (Some(cu), Some(cc)) => cu != cc,
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlottReport {
    pub consistency_ok: bool,
    pub substitutability_ok: bool,
    pub ideal_valued_ok: bool,
    /// The derived union laws C(A∪B) ⊆ C(A)∪B and C(A∪B) = C(C(A)∪B).
    pub path_independence_ok: bool,
    pub ideals: usize,
    pub witnesses: Vec<PlottWitness>,
}

impl PlottReport {
    pub fn is_plott(&self) -> bool {
        self.consistency_ok
            && self.substitutability_ok
            && self.ideal_valued_ok
            && self.path_independence_ok
    }
}

impl ChoiceFunction {
    /// Builds a table family. `entries` must list every ideal of `poset`
    /// exactly once.
    pub fn table(
        poset: Arc<Poset>,
        entries: Vec<(System, System)>,
        opts: TableOptions,
    ) -> Result<Self> {
        let mut map = HashMap::with_capacity(entries.len());
        for (key, value) in entries {
            poset.require_ideal(key)?;
            poset.check_members(value)?;
            if !value.is_subset(key) {
                return Err(Error::ValueNotSubset {
                    ideal: poset.names(key),
                    choice: poset.names(value),
                });
            }
            if !poset.is_ideal(value) {
                return Err(Error::ValueNotIdeal {
                    ideal: poset.names(key),
                    choice: poset.names(value),
                });
            }
            if map.insert(key, value).is_some() {
                return Err(Error::DuplicateEntry(poset.names(key)));
            }
        }
        let ideals = poset.enumerate_ideals(opts.max_ideals)?;
        if let Some(&missing) = ideals.iter().find(|s| !map.contains_key(s)) {
            return Err(Error::TableIncomplete(poset.names(missing)));
        }
        let mut cf = ChoiceFunction {
            poset,
            family: Family::Table(Table { entries: map }),
            validation: Validation::Unchecked,
        };
        if opts.validate {
            let report = cf.validate(opts.max_ideals)?;
            if !report.is_plott() && opts.strict {
                return Err(Error::PlottFailed(Box::new(report)));
            }
        }
        Ok(cf)
    }

    /// Tabulates `f` over every ideal of `poset`.
    pub fn tabulate<F>(poset: Arc<Poset>, opts: TableOptions, mut f: F) -> Result<Self>
    where
        F: FnMut(System) -> System,
    {
        let entries = poset
            .enumerate_ideals(opts.max_ideals)?
            .into_iter()
            .map(|a| (a, f(a)))
            .collect();
        ChoiceFunction::table(poset, entries, opts)
    }

    /// C(A) = A.
    pub fn identity(poset: Arc<Poset>) -> Result<Self> {
        ChoiceFunction::tabulate(poset, TableOptions::default(), |a| a)
    }

    /// Top-`quota` elements of `A ∩ Acc`, where `Acc` is the set of elements
    /// listed in `priority` (highest first).
    pub fn quota<S: AsRef<str>>(poset: Arc<Poset>, priority: &[S], quota: usize) -> Result<Self> {
        if !poset.is_discrete() {
            return Err(Error::QuotaOnNontrivialPoset);
        }
        let mut seen = System::EMPTY;
        let mut order = Vec::with_capacity(priority.len());
        for name in priority {
            let i = poset.index_of(name.as_ref())?;
            if seen.contains(i) {
                return Err(Error::DuplicateElement(name.as_ref().to_owned()));
            }
            seen = seen.with(i);
            order.push(i);
        }
        let mut cf = ChoiceFunction {
            poset,
            family: Family::Quota(Quota {
                priority: order,
                quota,
            }),
            validation: Validation::PlottByConstruction,
        };
        if cf.poset.count_ideals(QUOTA_VALIDATION_LIMIT).is_ok() {
            let report = cf.validate(QUOTA_VALIDATION_LIMIT)?;
            if !report.is_plott() {
                return Err(Error::InternalInvariant(
                    "quota function failed Plott validation".into(),
                ));
            }
        }
        Ok(cf)
    }

    /// Runs one choice function per block of `parts`; each child lives on the
    /// sub-poset induced by its block.
    pub fn aggregate(
        poset: Arc<Poset>,
        parts: Vec<System>,
        children: Vec<ChoiceFunction>,
    ) -> Result<Self> {
        if parts.len() != children.len() {
            return Err(Error::NotAPartition);
        }
        let mut covered = System::EMPTY;
        for &part in &parts {
            poset.check_members(part)?;
            if !part.intersection(covered).is_empty() {
                return Err(Error::NotAPartition);
            }
            covered = covered.union(part);
        }
        if covered != poset.full() {
            return Err(Error::NotAPartition);
        }
        for (i, &part) in parts.iter().enumerate() {
            for e in part {
                let outside = poset
                    .principal_ideal(e)
                    .union(poset.principal_filter(e))
                    .difference(part);
                if let Some(f) = outside.first() {
                    let (lo, hi) = if poset.leq(f, e) { (f, e) } else { (e, f) };
                    return Err(Error::OrderCrossesParts(
                        poset.name(lo).into(),
                        poset.name(hi).into(),
                    ));
                }
            }
            if *children[i].poset != poset.induced(part) {
                return Err(Error::PosetMismatch);
            }
        }
        let validation = if children
            .iter()
            .all(|c| c.validation == Validation::PlottVerified)
        {
            Validation::PlottVerified
        } else if children.iter().all(ChoiceFunction::is_plott) {
            Validation::PlottByConstruction
        } else {
            Validation::Unchecked
        };
        let parts = parts
            .into_iter()
            .zip(children)
            .map(|(mask, choice)| Part {
                mask,
                members: mask.iter().collect(),
                choice,
            })
            .collect();
        Ok(ChoiceFunction {
            poset,
            family: Family::Aggregate(Aggregate { parts }),
            validation,
        })
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn validation(&self) -> &Validation {
        &self.validation
    }

    /// Verified exhaustively or Plott by construction.
    pub fn is_plott(&self) -> bool {
        matches!(
            self.validation,
            Validation::PlottVerified | Validation::PlottByConstruction
        )
    }

    /// Raw evaluation on an ideal; `None` only for a table without the entry.
    pub(crate) fn eval(&self, a: System) -> Option<System> {
        match &self.family {
            Family::Table(t) => t.entries.get(&a).copied(),
            Family::Quota(q) => Some(
                q.priority
                    .iter()
                    .copied()
                    .filter(|&e| a.contains(e))
                    .take(q.quota)
                    .collect(),
            ),
            Family::Aggregate(agg) => agg.parts.iter().try_fold(System::EMPTY, |acc, part| {
                let local = part.choice.eval(part.project(a))?;
                Some(acc.union(part.lift(local)))
            }),
        }
    }

    /// Evaluation on an ideal the caller already knows to be valid.
    pub(crate) fn apply(&self, a: System) -> System {
        self.eval(a)
            .expect("choice function evaluated outside its domain")
    }

    /// D(A) without the ideal check.
    pub(crate) fn desire(&self, a: System) -> System {
        (0..self.poset.len())
            .filter(|&e| {
                self.apply(a.union(self.poset.principal_ideal(e)))
                    .contains(e)
            })
            .collect()
    }

    /// C(A).
    pub fn choose(&self, a: System) -> Result<System> {
        self.poset.require_ideal(a)?;
        self.eval(a)
            .ok_or_else(|| Error::TableIncomplete(self.poset.names(a)))
    }

    /// D(A) = { e : e ∈ C(A ∪ ⟨e⟩) }.
    pub fn desirability(&self, a: System) -> Result<System> {
        self.poset.require_ideal(a)?;
        Ok(self.desire(a))
    }

    /// Blair relation: A ⪯ B iff C(A ∪ B) ⊆ B.
    pub fn blair_leq(&self, a: System, b: System) -> Result<bool> {
        self.poset.require_ideal(a)?;
        self.poset.require_ideal(b)?;
        Ok(self.apply(a.union(b)).is_subset(b))
    }

    /// Exhaustive check of the Plott axioms (and the derived union laws)
    /// over every ideal and every ordered pair of ideals.
    pub fn validate_plott(&self, max_ideals: usize) -> Result<PlottReport> {
        let lattice = IdealLattice::new(self.poset.clone(), max_ideals)?;
        let p = &*self.poset;
        let choice: Vec<System> = lattice
            .ideals()
            .iter()
            .map(|&a| {
                self.eval(a)
                    .ok_or_else(|| Error::TableIncomplete(p.names(a)))
            })
            .collect::<Result<_>>()?;

        let mut best: Vec<Option<(usize, PlottWitness)>> = vec![None; 5];
        let mut record = |law: Law, a: System, b: System, ca: System, cb: System| {
            let slot = &mut best[law as usize];
            let size = a.len() + b.len();
            if slot.as_ref().is_none_or(|(s, _)| size < *s) {
                *slot = Some((
                    size,
                    PlottWitness {
                        law,
                        a: p.names(a),
                        b: p.names(b),
                        choice_a: p.names(ca),
                        choice_b: p.names(cb),
                    },
                ));
            }
        };

        for (i, &a) in lattice.ideals().iter().enumerate() {
            let ca = choice[i];
            if !ca.is_subset(a) || !p.is_ideal(ca) {
                record(Law::IdealValued, a, System::EMPTY, ca, System::EMPTY);
            }
        }
        for (i, &a) in lattice.ideals().iter().enumerate() {
            let ca = choice[i];
            let ca_ideal = ca.is_subset(a) && p.is_ideal(ca);
            for (j, &b) in lattice.ideals().iter().enumerate() {
                let cb = choice[j];
                if a.is_subset(b) && !a.intersection(cb).is_subset(ca) {
                    record(Law::Substitutability, a, b, ca, cb);
                }
                if ca.is_subset(b) && b.is_subset(a) && ca != cb {
                    record(Law::Consistency, a, b, ca, cb);
                }
                let cu = choice[lattice.pos(a.union(b))];
                if !cu.is_subset(ca.union(b)) {
                    record(Law::UnionBound, a, b, ca, cu);
                }
                if ca_ideal && choice[lattice.pos(ca.union(b))] != cu {
                    record(Law::PathIndependence, a, b, ca, cu);
                }
            }
        }

        let failed = |law: Law| best[law as usize].is_some();
        let report = PlottReport {
            consistency_ok: !failed(Law::Consistency),
            substitutability_ok: !failed(Law::Substitutability),
            ideal_valued_ok: !failed(Law::IdealValued),
            path_independence_ok: !failed(Law::UnionBound) && !failed(Law::PathIndependence),
            ideals: lattice.len(),
            witnesses: best.into_iter().flatten().map(|(_, w)| w).collect(),
        };
        Ok(report)
    }

    /// Runs [`validate_plott`](Self::validate_plott) and records the outcome.
    pub fn validate(&mut self, max_ideals: usize) -> Result<PlottReport> {
        let report = self.validate_plott(max_ideals)?;
        self.validation = if report.is_plott() {
            Validation::PlottVerified
        } else {
            Validation::PlottFailed(Box::new(report.clone()))
        };
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Arc<Poset> {
        Arc::new(Poset::discrete(&["a", "b"]).unwrap())
    }

    fn sys(p: &Poset, names: &[&str]) -> System {
        p.system(names).unwrap()
    }

    fn t_bad(strict: bool) -> Result<ChoiceFunction> {
        let p = ab();
        let entries = vec![
            (sys(&p, &[]), sys(&p, &[])),
            (sys(&p, &["a"]), sys(&p, &[])),
            (sys(&p, &["b"]), sys(&p, &["b"])),
            (sys(&p, &["a", "b"]), sys(&p, &["a"])),
        ];
        ChoiceFunction::table(
            p,
            entries,
            TableOptions {
                strict,
                ..TableOptions::default()
            },
        )
    }

    fn chain_firm() -> ChoiceFunction {
        let p = Arc::new(Poset::new(&["x1", "x2"], &[("x1", "x2")]).unwrap());
        let keep = sys(&p, &["x1"]);
        ChoiceFunction::tabulate(p, TableOptions::default(), |a| a.intersection(keep)).unwrap()
    }

    #[test]
    fn quota_choices() {
        let p = ab();
        let w = ChoiceFunction::quota(p.clone(), &["a", "b"], 1).unwrap();
        let f = ChoiceFunction::quota(p.clone(), &["b", "a"], 1).unwrap();
        assert_eq!(w.choose(p.full()).unwrap(), sys(&p, &["a"]));
        assert_eq!(f.choose(p.full()).unwrap(), sys(&p, &["b"]));
        assert_eq!(w.validation(), &Validation::PlottVerified);
        let zero = ChoiceFunction::quota(p.clone(), &["a", "b"], 0).unwrap();
        assert_eq!(zero.choose(p.full()).unwrap(), System::EMPTY);
        assert!(zero.is_plott());
    }

    #[test]
    fn quota_rejects_nontrivial_order() {
        let p = Arc::new(Poset::new(&["x1", "x2"], &[("x1", "x2")]).unwrap());
        assert_eq!(
            ChoiceFunction::quota(p, &["x1", "x2"], 1),
            Err(Error::QuotaOnNontrivialPoset)
        );
        assert_eq!(
            ChoiceFunction::quota(ab(), &["a", "z"], 1),
            Err(Error::UnknownElement("z".into()))
        );
    }

    #[test]
    fn table_lookup_on_chain() {
        let f = chain_firm();
        let p = f.poset().clone();
        assert_eq!(f.choose(p.full()).unwrap(), sys(&p, &["x1"]));
        assert_eq!(f.validation(), &Validation::PlottVerified);
        assert!(matches!(
            f.choose(sys(&p, &["x2"])),
            Err(Error::NotAnIdeal(_))
        ));
    }

    #[test]
    fn desirability_examples() {
        let p = ab();
        let w = ChoiceFunction::quota(p.clone(), &["a", "b"], 1).unwrap();
        let f = ChoiceFunction::quota(p.clone(), &["b", "a"], 1).unwrap();
        assert_eq!(w.desirability(System::EMPTY).unwrap(), p.full());
        assert_eq!(f.desirability(sys(&p, &["a"])).unwrap(), p.full());
        let cf = chain_firm();
        assert_eq!(
            cf.desirability(System::EMPTY).unwrap(),
            System::singleton(0)
        );
    }

    #[test]
    fn blair_examples() {
        let p = ab();
        let w = ChoiceFunction::quota(p.clone(), &["a", "b"], 1).unwrap();
        let (a, b) = (sys(&p, &["a"]), sys(&p, &["b"]));
        assert!(w.blair_leq(b, a).unwrap());
        assert!(!w.blair_leq(a, b).unwrap());
        assert!(w.blair_leq(a, a).unwrap());
    }

    #[test]
    fn t_bad_is_rejected_with_witness() {
        let cf = t_bad(false).unwrap();
        let report = cf.validate_plott(1024).unwrap();
        assert!(!report.substitutability_ok);
        let w = report
            .witnesses
            .iter()
            .find(|w| w.law == Law::Substitutability)
            .unwrap();
        assert_eq!(w.a, vec!["a".to_string()]);
        assert_eq!(w.b, vec!["a".to_string(), "b".to_string()]);
        assert!(report.witnesses.iter().all(|w| w.reproduces(&cf)));
        assert!(matches!(cf.validation(), Validation::PlottFailed(_)));

        match t_bad(true) {
            Err(Error::PlottFailed(r)) => assert!(!r.substitutability_ok),
            other => panic!("expected PlottFailed, got {other:?}"),
        }
    }

    #[test]
    fn identity_is_plott() {
        let p = Arc::new(Poset::new(&["a", "b", "c"], &[("a", "b")]).unwrap());
        let id = ChoiceFunction::identity(p).unwrap();
        let r = id.validate_plott(1024).unwrap();
        assert!(r.is_plott() && r.witnesses.is_empty());
    }

    #[test]
    fn table_construction_errors() {
        let p = ab();
        let opts = TableOptions::default();
        let (e, a, b) = (System::EMPTY, sys(&p, &["a"]), sys(&p, &["b"]));
        let full = p.full();
        assert!(matches!(
            ChoiceFunction::table(p.clone(), vec![(e, e), (a, a), (b, b)], opts),
            Err(Error::TableIncomplete(_))
        ));
        assert!(matches!(
            ChoiceFunction::table(p.clone(), vec![(e, e), (a, b), (b, b), (full, full)], opts),
            Err(Error::ValueNotSubset { .. })
        ));
        let c = Arc::new(Poset::new(&["x1", "x2"], &[("x1", "x2")]).unwrap());
        let (x1, cf) = (System::singleton(0), c.full());
        assert!(matches!(
            ChoiceFunction::table(
                c.clone(),
                vec![(e, e), (x1, x1), (cf, System::singleton(1))],
                opts
            ),
            Err(Error::ValueNotIdeal { .. })
        ));
        assert!(matches!(
            ChoiceFunction::table(c, vec![(e, e), (System::singleton(1), e)], opts),
            Err(Error::NotAnIdeal(_))
        ));
    }

    #[test]
    fn aggregate_of_quotas() {
        let p = Arc::new(Poset::discrete(&["e11", "e12", "e21", "e22"]).unwrap());
        let m1 = p.system(&["e11", "e12"]).unwrap();
        let m2 = p.system(&["e21", "e22"]).unwrap();
        let c1 = ChoiceFunction::quota(Arc::new(p.induced(m1)), &["e11", "e12"], 1).unwrap();
        let c2 = ChoiceFunction::quota(Arc::new(p.induced(m2)), &["e22", "e21"], 1).unwrap();
        let w = ChoiceFunction::aggregate(p.clone(), vec![m1, m2], vec![c1.clone(), c2]).unwrap();
        assert_eq!(w.choose(m1).unwrap(), p.system(&["e11"]).unwrap());
        assert_eq!(
            w.choose(p.full()).unwrap(),
            p.system(&["e11", "e22"]).unwrap()
        );
        assert_eq!(w.validation(), &Validation::PlottVerified);
        assert!(w.validate_plott(1024).unwrap().is_plott());

        // one part: same as the child
        let whole = ChoiceFunction::aggregate(
            Arc::new(p.induced(m1)),
            vec![System::full(2)],
            vec![c1.clone()],
        )
        .unwrap();
        for a in whole.poset().enumerate_ideals(16).unwrap() {
            assert_eq!(whole.choose(a).unwrap(), c1.choose(a).unwrap());
        }
    }

    #[test]
    fn aggregate_errors() {
        let chain = Arc::new(Poset::new(&["a", "b"], &[("a", "b")]).unwrap());
        let parts = vec![System::singleton(0), System::singleton(1)];
        let kids = parts
            .iter()
            .map(|&m| ChoiceFunction::identity(Arc::new(chain.induced(m))).unwrap())
            .collect();
        assert_eq!(
            ChoiceFunction::aggregate(chain.clone(), parts, kids),
            Err(Error::OrderCrossesParts("a".into(), "b".into()))
        );
        let p = ab();
        let kid = ChoiceFunction::identity(Arc::new(p.induced(System::singleton(0)))).unwrap();
        assert_eq!(
            ChoiceFunction::aggregate(p.clone(), vec![System::singleton(0)], vec![kid.clone()]),
            Err(Error::NotAPartition)
        );
        assert_eq!(
            ChoiceFunction::aggregate(
                p,
                vec![System::singleton(1), System::singleton(0)],
                vec![kid.clone(), kid]
            ),
            Err(Error::PosetMismatch)
        );
    }
}
