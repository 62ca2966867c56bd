//! Finite posets of contracts and their lattices of order ideals.
//!
//! The order is stored fully closed as one "down-set" bitset per element, so
//! `e <= f` is a single bit test and the down-closure of a set is an OR over
//! its members. A discrete poset (empty order) is the plain set-of-contracts
//! case; every subset of it is an ideal.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Names, Result};
use crate::system::{System, MAX_ELEMENTS};

/// Default cap on the number of ideals any exhaustive operation may visit.
pub const DEFAULT_MAX_IDEALS: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct Poset {
    elements: Vec<String>,
    index: HashMap<String, usize>,
    /// `down[e]` = { x : x <= e }
    down: Vec<System>,
    /// `up[e]` = { x : e <= x }
    up: Vec<System>,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.down == other.down
    }
}

impl Eq for Poset {}

impl Poset {
    /// Builds the poset whose order is the reflexive-transitive closure of
    /// `covers`, given as `(lower, upper)` pairs.
    pub fn new<S, T>(elements: &[S], covers: &[(T, T)]) -> Result<Self>
    where
        S: AsRef<str>,
        T: AsRef<str>,
    {
        if elements.len() > MAX_ELEMENTS {
            return Err(Error::TooManyElements(elements.len()));
        }
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.as_ref().to_owned(), i).is_some() {
                return Err(Error::DuplicateElement(e.as_ref().to_owned()));
            }
        }
        let n = elements.len();
        let mut down: Vec<System> = (0..n).map(System::singleton).collect();
        for (lo, hi) in covers {
            let lo = lookup(&index, lo.as_ref())?;
            let hi = lookup(&index, hi.as_ref())?;
            down[hi] = down[hi].with(lo);
        }
        // Warshall on bit rows: if k <= j then everything below k is below j.
        for k in 0..n {
            for j in 0..n {
                if j != k && down[j].contains(k) {
                    down[j] = down[j].union(down[k]);
                }
            }
        }
        for j in 0..n {
            for i in down[j].without(j) {
                if down[i].contains(j) {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    return Err(Error::CycleDetected(
                        elements[a].as_ref().to_owned(),
                        elements[b].as_ref().to_owned(),
                    ));
                }
            }
        }
        let mut up = vec![System::EMPTY; n];
        for (j, d) in down.iter().enumerate() {
            for i in d.iter() {
                up[i] = up[i].with(j);
            }
        }
        Ok(Poset {
            elements: elements.iter().map(|e| e.as_ref().to_owned()).collect(),
            index,
            down,
            up,
        })
    }

    /// A poset with the empty order.
    pub fn discrete<S: AsRef<str>>(elements: &[S]) -> Result<Self> {
        Poset::new::<S, &str>(elements, &[])
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn name(&self, index: usize) -> &str {
        &self.elements[index]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        lookup(&self.index, name)
    }

    /// The whole ground set `E`.
    pub fn full(&self) -> System {
        System::full(self.len())
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.down[b].contains(a)
    }

    pub fn is_discrete(&self) -> bool {
        self.down.iter().all(|d| d.len() == 1)
    }

    /// Resolves identifiers to a system (no ideal check).
    pub fn system<S: AsRef<str>>(&self, names: &[S]) -> Result<System> {
        names
            .iter()
            .map(|n| self.index_of(n.as_ref()))
            .collect::<Result<System>>()
    }

    /// Resolves identifiers and requires the result to be an ideal.
    pub fn ideal<S: AsRef<str>>(&self, names: &[S]) -> Result<System> {
        let s = self.system(names)?;
        if self.is_ideal(s) {
            Ok(s)
        } else {
            Err(Error::NotAnIdeal(self.names(s)))
        }
    }

    /// Identifiers of a system, in element order.
    pub fn names(&self, s: System) -> Names {
        s.iter().map(|i| self.elements[i].clone()).collect()
    }

    /// Fails with `UnknownElement` when `s` mentions indices past the end.
    pub fn check_members(&self, s: System) -> Result<()> {
        match s.difference(self.full()).first() {
            None => Ok(()),
            Some(i) => Err(Error::UnknownElement(format!("#{i}"))),
        }
    }

    pub fn is_ideal(&self, s: System) -> bool {
        s.is_subset(self.full()) && s.iter().all(|e| self.down[e].is_subset(s))
    }

    pub fn require_ideal(&self, s: System) -> Result<()> {
        self.check_members(s)?;
        if self.is_ideal(s) {
            Ok(())
        } else {
            Err(Error::NotAnIdeal(self.names(s)))
        }
    }

    /// Smallest ideal containing `s`.
    pub fn down_closure(&self, s: System) -> System {
        s.iter()
            .fold(System::EMPTY, |acc, e| acc.union(self.down[e]))
    }

    /// `<e>` = { x : x <= e }.
    pub fn principal_ideal(&self, e: usize) -> System {
        self.down[e]
    }

    pub fn principal_filter(&self, e: usize) -> System {
        self.up[e]
    }

    /// Cover pairs `(lower, upper)` of the Hasse diagram, sorted by index.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for hi in 0..self.len() {
            let strict = self.down[hi].without(hi);
            for lo in strict {
                // lo is covered by hi unless some other strict lower element sits above it
                let between = strict.without(lo).iter().any(|m| self.leq(lo, m));
                if !between {
                    out.push((lo, hi));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The sub-poset induced on `part`, elements kept in their original order.
    pub fn induced(&self, part: System) -> Poset {
        let members: Vec<usize> = part.iter().collect();
        let local: HashMap<usize, usize> =
            members.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let elements: Vec<String> = members.iter().map(|&g| self.elements[g].clone()).collect();
        let down: Vec<System> = members
            .iter()
            .map(|&g| {
                self.down[g]
                    .intersection(part)
                    .iter()
                    .map(|x| local[&x])
                    .collect()
            })
            .collect();
        let mut up = vec![System::EMPTY; members.len()];
        for (j, d) in down.iter().enumerate() {
            for i in d.iter() {
                up[i] = up[i].with(j);
            }
        }
        let index = elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        Poset {
            elements,
            index,
            down,
            up,
        }
    }

    /// Number of ideals, or `DomainTooLarge` as soon as it passes `cap`.
    pub fn count_ideals(&self, cap: usize) -> Result<usize> {
        let mut count = 0usize;
        self.walk_ideals(self.full(), System::EMPTY, &mut |_| {
            count += 1;
            count <= cap
        });
        if count > cap {
            Err(Error::DomainTooLarge { cap })
        } else {
            Ok(count)
        }
    }

    /// Every ideal exactly once, in canonical order. The count is checked
    /// against `cap` before anything is materialized.
    pub fn enumerate_ideals(&self, cap: usize) -> Result<Vec<System>> {
        let n = self.count_ideals(cap)?;
        let mut out = Vec::with_capacity(n);
        self.walk_ideals(self.full(), System::EMPTY, &mut |s| {
            out.push(s);
            true
        });
        out.sort_unstable();
        Ok(out)
    }

    // `open` holds the undecided elements; everything below an open element
    // is either open or already in `acc`. Branching on a minimal open element
    // x: leave it out (and everything above it) or put it in.
    fn walk_ideals(
        &self,
        open: System,
        acc: System,
        visit: &mut dyn FnMut(System) -> bool,
    ) -> bool {
        let Some(x) = open
            .iter()
            .find(|&x| self.down[x].intersection(open) == System::singleton(x))
        else {
            return visit(acc);
        };
        self.walk_ideals(open.difference(self.up[x]), acc, visit)
            && self.walk_ideals(open.without(x), acc.with(x), visit)
    }
}

fn lookup(index: &HashMap<String, usize>, name: &str) -> Result<usize> {
    index
        .get(name)
        .copied()
        .ok_or_else(|| Error::UnknownElement(name.to_owned()))
}

/// The enumerated ideals of a poset with a reverse index, for exhaustive
/// checks that need to address ideals by position.
#[derive(Debug, Clone)]
pub struct IdealLattice {
    poset: Arc<Poset>,
    ideals: Vec<System>,
    index: IdealIndex,
}

#[derive(Debug, Clone)]
enum IdealIndex {
    Dense(Vec<u32>),
    Sparse(HashMap<System, u32>),
}

const DENSE_INDEX_BITS: usize = 16;

impl IdealLattice {
    pub fn new(poset: Arc<Poset>, cap: usize) -> Result<Self> {
        let ideals = poset.enumerate_ideals(cap)?;
        let index = if poset.len() <= DENSE_INDEX_BITS {
            let mut v = vec![u32::MAX; 1 << poset.len()];
            for (i, s) in ideals.iter().enumerate() {
                v[s.bits() as usize] = i as u32;
            }
            IdealIndex::Dense(v)
        } else {
            IdealIndex::Sparse(
                ideals
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| (s, i as u32))
                    .collect(),
            )
        };
        Ok(IdealLattice {
            poset,
            ideals,
            index,
        })
    }

    pub fn poset(&self) -> &Arc<Poset> {
        &self.poset
    }

    pub fn ideals(&self) -> &[System] {
        &self.ideals
    }

    pub fn len(&self) -> usize {
        self.ideals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ideals.is_empty()
    }

    pub fn get(&self, i: usize) -> System {
        self.ideals[i]
    }

    pub fn position(&self, s: System) -> Option<usize> {
        match &self.index {
            IdealIndex::Dense(v) => {
                let bits = s.bits();
                if bits >= v.len() as u128 {
                    return None;
                }
                let i = v[bits as usize];
                (i != u32::MAX).then_some(i as usize)
            }
            IdealIndex::Sparse(m) => m.get(&s).map(|&i| i as usize),
        }
    }

    /// Position of an ideal known to be in the lattice (unions and
    /// intersections of ideals).
    pub fn pos(&self, s: System) -> usize {
        self.position(s)
            .expect("system is not an ideal of this lattice")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Poset {
        Poset::new(&["x1", "x2"], &[("x1", "x2")]).unwrap()
    }

    #[test]
    fn build_examples() {
        let p = Poset::discrete(&["a", "b"]).unwrap();
        assert!(p.is_discrete());
        let c = chain();
        assert!(c.leq(0, 1) && !c.leq(1, 0));
        assert_eq!(
            Poset::new(&["p", "q"], &[("p", "q"), ("q", "p")]),
            Err(Error::CycleDetected("p".into(), "q".into()))
        );
        assert_eq!(
            Poset::discrete(&["a", "a"]),
            Err(Error::DuplicateElement("a".into()))
        );
        assert_eq!(
            Poset::new(&["a"], &[("a", "z")]),
            Err(Error::UnknownElement("z".into()))
        );
    }

    #[test]
    fn transitive_closure() {
        let p = Poset::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(p.leq(0, 2));
        assert_eq!(p.covers(), vec![(0, 1), (1, 2)]);
        let cyc = Poset::new(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]);
        assert!(matches!(cyc, Err(Error::CycleDetected(..))));
    }

    #[test]
    fn ideal_queries() {
        let c = chain();
        assert!(!c.is_ideal(c.system(&["x2"]).unwrap()));
        assert!(c.is_ideal(c.system(&["x1"]).unwrap()));
        let d = Poset::discrete(&["a", "b"]).unwrap();
        assert!(d.is_ideal(d.system(&["b"]).unwrap()));
        assert_eq!(c.down_closure(c.system(&["x2"]).unwrap()), c.full());
        assert_eq!(c.down_closure(System::EMPTY), System::EMPTY);
        assert_eq!(d.down_closure(System::singleton(0)), System::singleton(0));
        assert_eq!(c.principal_ideal(1), c.full());
        assert_eq!(c.principal_ideal(0), System::singleton(0));
        assert_eq!(d.principal_ideal(0), System::singleton(0));
        assert!(matches!(c.system(&["nope"]), Err(Error::UnknownElement(_))));
        assert!(matches!(
            c.check_members(System::singleton(5)),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn enumeration_examples() {
        let d = Poset::discrete(&["a", "b"]).unwrap();
        let got: Vec<Names> = d
            .enumerate_ideals(DEFAULT_MAX_IDEALS)
            .unwrap()
            .into_iter()
            .map(|s| d.names(s))
            .collect();
        assert_eq!(
            got,
            vec![
                vec![],
                vec!["a".to_string()],
                vec!["b".into()],
                vec!["a".into(), "b".into()]
            ]
        );
        let c = chain();
        assert_eq!(
            c.enumerate_ideals(DEFAULT_MAX_IDEALS).unwrap(),
            vec![System::EMPTY, System::singleton(0), c.full()]
        );
        let e = Poset::discrete::<&str>(&[]).unwrap();
        assert_eq!(
            e.enumerate_ideals(DEFAULT_MAX_IDEALS).unwrap(),
            vec![System::EMPTY]
        );
    }

    #[test]
    fn cap_is_enforced_before_enumeration() {
        let names: Vec<String> = (0..12).map(|i| format!("e{i}")).collect();
        let p = Poset::discrete(&names).unwrap();
        assert_eq!(p.count_ideals(4096).unwrap(), 4096);
        assert_eq!(
            p.enumerate_ideals(4095),
            Err(Error::DomainTooLarge { cap: 4095 })
        );
    }

    #[test]
    fn induced_subposet_keeps_order() {
        let p = Poset::new(&["a", "b", "c"], &[("a", "c")]).unwrap();
        let sub = p.induced(System::from_indices([0, 2]));
        assert_eq!(sub.elements(), &["a".to_string(), "c".to_string()]);
        assert!(sub.leq(0, 1));
        assert_eq!(sub, Poset::new(&["a", "c"], &[("a", "c")]).unwrap());
    }

    #[test]
    fn lattice_index_sparse_and_dense() {
        let names: Vec<String> = (0..20).map(|i| format!("e{i}")).collect();
        let covers: Vec<(String, String)> = (0..19)
            .map(|i| (names[i].clone(), names[i + 1].clone()))
            .collect();
        let p = Arc::new(Poset::new(&names, &covers).unwrap());
        let lat = IdealLattice::new(p.clone(), DEFAULT_MAX_IDEALS).unwrap();
        assert_eq!(lat.len(), 21);
        for (i, &s) in lat.ideals().iter().enumerate() {
            assert_eq!(lat.position(s), Some(i));
        }
        assert_eq!(lat.position(System::singleton(3)), None);
    }
}
