//! Seeded random instances for property runs.
//!
//! Choice functions are built from "atoms": take the first `k` elements of
//! `A ∩ J` along a fixed linear extension, for an ideal `J`. Every atom is a
//! Plott function on ideals, and so is any union of atoms (unions keep
//! substitutability and irrelevance of rejected contracts). Tables built
//! this way still go through `validate_plott` and are rejected on failure,
//! as are the occasional purely random tables tried first.
//!
//! Independent random preferences almost always give a single stable
//! system, so most instances draw the Firm's orders against the Worker's
//! (a noisy reversal along a linear extension) to get richer lattices.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::choice::{ChoiceFunction, TableOptions};
use crate::error::{Error, Result};
use crate::oracle::marriage::Marriage;
use crate::poset::Poset;
use crate::stability::{check_comparative, Problem};
use crate::system::System;

/// Ideal cap for generated non-discrete posets.
pub const MAX_GENERATED_IDEALS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Discrete, both sides quota functions.
    Quota,
    /// Discrete, both sides aggregates of quota functions.
    Aggregate,
    /// Discrete, tables from unions of atoms.
    DiscreteTable,
    /// Random cover relation (density up to 0.3), tables.
    PosetTable,
    /// Disjoint chains (graduated contracts), tables.
    Chains,
    /// Discrete grid of contracts; the Worker aggregates rows, the Firm
    /// columns, as in a many-to-many market.
    Market,
}

pub const SHAPES: [Shape; 6] = [
    Shape::Quota,
    Shape::Aggregate,
    Shape::DiscreteTable,
    Shape::PosetTable,
    Shape::Chains,
    Shape::Market,
];

/// Chance that a generated problem has opposed preferences.
const OPPOSED: f64 = 0.75;

#[derive(Debug, Clone)]
pub struct Generated {
    pub seed: u64,
    pub shape: Shape,
    pub problem: Problem,
}

/// First `quota` members of `A ∩ accept` along `order`.
#[derive(Debug, Clone)]
pub struct Atom {
    pub accept: System,
    pub order: Vec<usize>,
    pub quota: usize,
}

impl Atom {
    pub fn apply(&self, a: System) -> System {
        let avail = a.intersection(self.accept);
        self.order
            .iter()
            .copied()
            .filter(|&e| avail.contains(e))
            .take(self.quota)
            .collect()
    }
}

pub fn union_of(atoms: &[Atom], a: System) -> System {
    atoms
        .iter()
        .fold(System::EMPTY, |acc, at| acc.union(at.apply(a)))
}

fn names(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random linear extension: repeatedly take a random minimal element.
pub fn linear_extension(p: &Poset, rng: &mut impl Rng) -> Vec<usize> {
    let mut left = p.full();
    let mut out = Vec::with_capacity(p.len());
    while !left.is_empty() {
        let minimal: Vec<usize> = left
            .iter()
            .filter(|&x| p.principal_ideal(x).intersection(left) == System::singleton(x))
            .collect();
        let x = *minimal
            .choose(rng)
            .expect("nonempty poset has a minimal element");
        out.push(x);
        left = left.without(x);
    }
    out
}

/// Linear extension that goes against `reference`: among the minimal
/// elements left, takes the one latest in `reference`, except with
/// probability `noise` a random one.
pub fn opposed_extension(
    p: &Poset,
    reference: &[usize],
    noise: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let mut rank = vec![0; p.len()];
    for (i, &e) in reference.iter().enumerate() {
        rank[e] = i;
    }
    let mut left = p.full();
    let mut out = Vec::with_capacity(p.len());
    while !left.is_empty() {
        let minimal: Vec<usize> = left
            .iter()
            .filter(|&x| p.principal_ideal(x).intersection(left) == System::singleton(x))
            .collect();
        let x = if rng.gen_bool(noise) {
            *minimal
                .choose(rng)
                .expect("nonempty poset has a minimal element")
        } else {
            minimal
                .into_iter()
                .max_by_key(|&x| rank[x])
                .expect("nonempty poset has a minimal element")
        };
        out.push(x);
        left = left.without(x);
    }
    out
}

/// Worker's and Firm's preference orders, opposed with probability
/// [`OPPOSED`].
fn order_pair(p: &Poset, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
    let w = linear_extension(p, rng);
    let f = if rng.gen_bool(OPPOSED) {
        let noise = rng.gen_range(0.0..0.3);
        opposed_extension(p, &w, noise, rng)
    } else {
        linear_extension(p, rng)
    };
    (w, f)
}

pub fn random_ideal(p: &Poset, rng: &mut impl Rng) -> System {
    let keep = rng.gen_range(0.3..1.0);
    let s: System = (0..p.len()).filter(|_| rng.gen_bool(keep)).collect();
    p.down_closure(s)
}

pub fn random_atom(p: &Poset, rng: &mut impl Rng) -> Atom {
    let order = linear_extension(p, rng);
    atom_along(p, order, rng)
}

/// Atom with the given order, a random acceptable ideal and quota.
fn atom_along(p: &Poset, order: Vec<usize>, rng: &mut impl Rng) -> Atom {
    let accept = if rng.gen_bool(0.3) {
        p.full()
    } else {
        random_ideal(p, rng)
    };
    let quota = if rng.gen_bool(0.6) {
        rng.gen_range(1..=p.len().div_ceil(2).max(1))
    } else {
        rng.gen_range(0..=p.len().max(1))
    };
    Atom {
        accept,
        order,
        quota,
    }
}

pub fn random_atoms(p: &Poset, rng: &mut impl Rng) -> Vec<Atom> {
    let k = rng.gen_range(1..=3);
    (0..k).map(|_| random_atom(p, rng)).collect()
}

/// One to three atoms; the first follows `order`, the others follow
/// small perturbations of it.
fn atoms_along(p: &Poset, order: &[usize], rng: &mut impl Rng) -> Vec<Atom> {
    let k = rng.gen_range(1..=3);
    (0..k)
        .map(|i| {
            let o = if i == 0 {
                order.to_vec()
            } else {
                let reversed: Vec<usize> = order.iter().rev().copied().collect();
                opposed_extension(p, &reversed, 0.2, rng)
            };
            atom_along(p, o, rng)
        })
        .collect()
}

/// Worker and Firm atoms with opposed orders (see [`order_pair`]).
fn atom_pair(p: &Poset, rng: &mut impl Rng) -> (Vec<Atom>, Vec<Atom>) {
    let (wo, fo) = order_pair(p, rng);
    (atoms_along(p, &wo, rng), atoms_along(p, &fo, rng))
}

/// A poset with a random cover relation and at most `max_ideals` ideals.
pub fn random_poset(rng: &mut impl Rng, max_ideals: usize) -> Poset {
    loop {
        let n = rng.gen_range(2..=9);
        let density = rng.gen_range(0.0..=0.3);
        let ids = names(n, "e");
        let mut covers = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(density) {
                    covers.push((ids[i].clone(), ids[j].clone()));
                }
            }
        }
        let p = Poset::new(&ids, &covers).expect("forward covers are acyclic");
        if p.count_ideals(max_ideals).is_ok() {
            return p;
        }
    }
}

/// Disjoint chains `c<i>.<level>`, one per contract.
pub fn random_chains(rng: &mut impl Rng, max_ideals: usize) -> Poset {
    loop {
        let contracts = rng.gen_range(1..=4);
        let mut ids = Vec::new();
        let mut covers = Vec::new();
        for c in 0..contracts {
            let levels = rng.gen_range(1..=3);
            for l in 0..levels {
                ids.push(format!("c{c}.{l}"));
                if l > 0 {
                    covers.push((format!("c{c}.{}", l - 1), format!("c{c}.{l}")));
                }
            }
        }
        let p = Poset::new(&ids, &covers).expect("chains are acyclic");
        if p.count_ideals(max_ideals).is_ok() {
            return p;
        }
    }
}

fn table_of(poset: &Arc<Poset>, atoms: &[Atom]) -> Result<ChoiceFunction> {
    ChoiceFunction::tabulate(poset.clone(), TableOptions::default(), |a| {
        union_of(atoms, a)
    })
}

/// A uniformly random ideal-valued table, kept only if it is Plott.
fn random_plott_table(
    poset: &Arc<Poset>,
    rng: &mut impl Rng,
    attempts: usize,
) -> Option<ChoiceFunction> {
    let ideals = poset.enumerate_ideals(MAX_GENERATED_IDEALS).ok()?;
    for _ in 0..attempts {
        let entries = ideals
            .iter()
            .map(|&a| {
                let pick: System = a.iter().filter(|_| rng.gen_bool(0.5)).collect();
                // largest ideal inside the pick
                let inner = pick
                    .iter()
                    .filter(|&e| poset.principal_ideal(e).is_subset(pick))
                    .collect();
                (a, inner)
            })
            .collect();
        match ChoiceFunction::table(poset.clone(), entries, TableOptions::default()) {
            Ok(cf) => return Some(cf),
            Err(Error::PlottFailed(_)) => continue,
            Err(_) => return None,
        }
    }
    None
}

/// Both sides as tables; occasionally a purely random Plott table.
fn table_sides(poset: &Arc<Poset>, rng: &mut impl Rng) -> Result<(ChoiceFunction, ChoiceFunction)> {
    let (w_atoms, f_atoms) = atom_pair(poset, rng);
    Ok((
        table_side(poset, &w_atoms, rng)?,
        table_side(poset, &f_atoms, rng)?,
    ))
}

fn table_side(poset: &Arc<Poset>, atoms: &[Atom], rng: &mut impl Rng) -> Result<ChoiceFunction> {
    if poset.len() <= 3 && rng.gen_bool(0.2) {
        if let Some(cf) = random_plott_table(poset, rng, 20) {
            return Ok(cf);
        }
    }
    table_of(poset, atoms)
}

/// Quota function on `poset` (discrete) following `order`, which may
/// mention elements of a larger poset; those are skipped.
fn quota_along(poset: &Arc<Poset>, order: &[String], rng: &mut impl Rng) -> Result<ChoiceFunction> {
    let keep = rng.gen_range(0.7..=1.0);
    let priority: Vec<&String> = order
        .iter()
        .filter(|name| poset.index_of(name).is_ok() && rng.gen_bool(keep))
        .collect();
    let n = poset.len().max(1);
    let q = if rng.gen_bool(0.7) {
        rng.gen_range(1..=n.div_ceil(2))
    } else {
        rng.gen_range(0..=n)
    };
    ChoiceFunction::quota(poset.clone(), &priority, q)
}

fn random_partition(n: usize, rng: &mut impl Rng) -> Vec<System> {
    let blocks = rng.gen_range(1..=3usize);
    let mut parts = vec![System::EMPTY; blocks];
    for e in 0..n {
        let b = rng.gen_range(0..blocks);
        parts[b] = parts[b].with(e);
    }
    parts.retain(|p| !p.is_empty());
    parts
}

fn aggregate_along(
    poset: &Arc<Poset>,
    parts: Vec<System>,
    order: &[String],
    rng: &mut impl Rng,
) -> Result<ChoiceFunction> {
    let kids = parts
        .iter()
        .map(|&m| quota_along(&Arc::new(poset.induced(m)), order, rng))
        .collect::<Result<Vec<_>>>()?;
    ChoiceFunction::aggregate(poset.clone(), parts, kids)
}

/// Contracts `e<row><col>`; rows belong to the Worker, columns to the
/// Firm. Each cell has a value, random or cyclic; rows rank cells by it,
/// columns mostly against it.
fn market(rng: &mut impl Rng) -> Result<(ChoiceFunction, ChoiceFunction)> {
    let rows = rng.gen_range(2..=4usize);
    let cols = rng.gen_range(2..=(8 / rows).min(4));
    let names: Vec<String> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| format!("e{r}{c}")))
        .collect();
    let poset = Arc::new(Poset::discrete(&names).expect("distinct names"));
    // cyclic values: row r likes column r best, then r + 1, ...; columns
    // rank the other way round
    let cyclic = rng.gen_bool(0.7);
    let value: Vec<f64> = (0..names.len())
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            if cyclic {
                -(((c + cols - r % cols) % cols) as f64) + rng.gen_range(0.0..0.5)
            } else {
                rng.gen()
            }
        })
        .collect();
    let opposed = rng.gen_bool(OPPOSED);
    let firm_value: Vec<f64> = value
        .iter()
        .map(|&v| {
            if opposed {
                -v + rng.gen_range(0.0..0.3)
            } else {
                rng.gen()
            }
        })
        .collect();
    let by = |vals: &[f64]| -> Vec<String> {
        let mut idx: Vec<usize> = (0..names.len()).collect();
        idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        idx.into_iter().map(|i| names[i].clone()).collect()
    };
    let (w_order, f_order) = (by(&value), by(&firm_value));
    let row_parts: Vec<System> = (0..rows)
        .map(|r| (r * cols..(r + 1) * cols).collect())
        .collect();
    let col_parts: Vec<System> = (0..cols)
        .map(|c| (0..rows).map(|r| r * cols + c).collect())
        .collect();
    Ok((
        market_side(&poset, row_parts, &w_order, rng)?,
        market_side(&poset, col_parts, &f_order, rng)?,
    ))
}

/// One agent per part, mostly unit demand, dropping few partners.
fn market_side(
    poset: &Arc<Poset>,
    parts: Vec<System>,
    order: &[String],
    rng: &mut impl Rng,
) -> Result<ChoiceFunction> {
    let kids = parts
        .iter()
        .map(|&m| {
            let sub = Arc::new(poset.induced(m));
            let priority: Vec<&String> = order
                .iter()
                .filter(|name| sub.index_of(name).is_ok() && rng.gen_bool(0.97))
                .collect();
            let q = if rng.gen_bool(0.9) {
                1
            } else {
                rng.gen_range(1..=sub.len())
            };
            ChoiceFunction::quota(sub, &priority, q)
        })
        .collect::<Result<Vec<_>>>()?;
    ChoiceFunction::aggregate(poset.clone(), parts, kids)
}

pub fn random_problem(seed: u64, shape: Shape) -> Result<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let discrete = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(0..=8);
        Arc::new(Poset::discrete(&names(n, "e")).expect("distinct names"))
    };
    let named = |p: &Poset, order: &[usize]| -> Vec<String> {
        order.iter().map(|&e| p.name(e).to_owned()).collect()
    };
    let (w, f) = match shape {
        Shape::Quota => {
            let p = discrete(&mut rng);
            let (wo, fo) = order_pair(&p, &mut rng);
            let (wo, fo) = (named(&p, &wo), named(&p, &fo));
            (
                quota_along(&p, &wo, &mut rng)?,
                quota_along(&p, &fo, &mut rng)?,
            )
        }
        Shape::Aggregate => {
            let p = discrete(&mut rng);
            let (wo, fo) = order_pair(&p, &mut rng);
            let (wo, fo) = (named(&p, &wo), named(&p, &fo));
            let (wp, fp) = (
                random_partition(p.len(), &mut rng),
                random_partition(p.len(), &mut rng),
            );
            (
                aggregate_along(&p, wp, &wo, &mut rng)?,
                aggregate_along(&p, fp, &fo, &mut rng)?,
            )
        }
        Shape::DiscreteTable => table_sides(&discrete(&mut rng), &mut rng)?,
        Shape::PosetTable => table_sides(
            &Arc::new(random_poset(&mut rng, MAX_GENERATED_IDEALS)),
            &mut rng,
        )?,
        Shape::Chains => table_sides(
            &Arc::new(random_chains(&mut rng, MAX_GENERATED_IDEALS)),
            &mut rng,
        )?,
        Shape::Market => market(&mut rng)?,
    };
    Problem::new(w, f)
}

/// `count` problems cycling through every shape. Instance `i` uses seed
/// `base + i`; every other round of shapes instead takes the first derived seed whose
/// problem has at least two stable systems (see [`rich_problem`]). The
/// recorded seed always reproduces the problem through [`random_problem`].
pub fn corpus(base: u64, count: usize) -> Result<Vec<Generated>> {
    (0..count)
        .map(|i| {
            let seed = base.wrapping_add(i as u64);
            let shape = SHAPES[i % SHAPES.len()];
            if (i / SHAPES.len()) % 2 == 1 {
                return rich_problem(seed, shape);
            }
            Ok(Generated {
                seed,
                shape,
                problem: random_problem(seed, shape)?,
            })
        })
        .collect()
}

/// Seeds derived from `seed` are tried in turn until the problem has at
/// least two stable systems; after 256 misses the last one is kept.
pub fn rich_problem(seed: u64, shape: Shape) -> Result<Generated> {
    let mut last = None;
    for k in 0..256u64 {
        let s = seed ^ (k << 40);
        let problem = random_problem(s, shape)?;
        let stable =
            crate::oracle::enumerate_class(&problem, crate::oracle::ClassKind::Stable, 1 << 8)?;
        let rich = stable.len() >= 2;
        last = Some(Generated {
            seed: s,
            shape,
            problem,
        });
        if rich {
            break;
        }
    }
    Ok(last.expect("at least one attempt"))
}

/// A problem and a modification with a more demanding Firm and a more
/// compliant Worker: W' adds atoms to W, F' keeps a subset of F's atoms
/// with smaller quotas.
pub fn comparable_pair(seed: u64) -> Result<(Problem, Problem)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // half of the pairs insist on an original problem with several stable
    // systems, giving up on that after a few hundred draws
    let want_rich = rng.gen_bool(0.5);
    for attempt in 0.. {
        let poset = Arc::new(match rng.gen_range(0..3) {
            0 => Poset::discrete(&names(rng.gen_range(1..=7), "e")).expect("distinct names"),
            1 => random_poset(&mut rng, MAX_GENERATED_IDEALS),
            _ => random_chains(&mut rng, MAX_GENERATED_IDEALS),
        });
        let (w_atoms, f_atoms) = atom_pair(&poset, &mut rng);
        let mut w2_atoms = w_atoms.clone();
        for _ in 0..rng.gen_range(0..=2) {
            w2_atoms.push(random_atom(&poset, &mut rng));
        }
        let mut f2_atoms = Vec::new();
        for a in &f_atoms {
            if rng.gen_bool(0.7) {
                f2_atoms.push(Atom {
                    quota: rng.gen_range(0..=a.quota),
                    ..a.clone()
                });
            }
        }
        let original = Problem::new(table_of(&poset, &w_atoms)?, table_of(&poset, &f_atoms)?)?;
        let modified = Problem::new(table_of(&poset, &w2_atoms)?, table_of(&poset, &f2_atoms)?)?;
        if !check_comparative(&original, &modified, MAX_GENERATED_IDEALS)?.holds {
            continue;
        }
        let rich = || -> Result<bool> {
            let stable = crate::oracle::enumerate_class(
                &original,
                crate::oracle::ClassKind::Stable,
                MAX_GENERATED_IDEALS,
            )?;
            Ok(stable.len() >= 2)
        };
        if !want_rich || attempt >= 400 || rich()? {
            return Ok((original, modified));
        }
    }
    unreachable!("the attempt loop only exits by returning")
}

/// A random one-to-one market with 1..=`max` people per side; everyone
/// lists a random subset of the other side in random order.
pub fn random_marriage(rng: &mut impl Rng, max: usize) -> Marriage {
    let nm = rng.gen_range(1..=max);
    let nw = rng.gen_range(1..=max);
    let mut lists = |n: usize, others: usize| -> Vec<Vec<usize>> {
        (0..n)
            .map(|_| {
                let mut v: Vec<usize> = (0..others).filter(|_| rng.gen_bool(0.8)).collect();
                v.shuffle(rng);
                v
            })
            .collect()
    };
    let men = lists(nm, nw);
    let women = lists(nw, nm);
    Marriage::new(men, women).expect("generated lists are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_are_plott_on_posets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = Arc::new(random_poset(&mut rng, MAX_GENERATED_IDEALS));
            let atoms = random_atoms(&p, &mut rng);
            let cf = table_of(&p, &atoms).unwrap();
            assert!(cf.is_plott());
        }
    }

    #[test]
    fn linear_extensions_respect_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_poset(&mut rng, MAX_GENERATED_IDEALS);
        let ext = linear_extension(&p, &mut rng);
        let pos: Vec<usize> = {
            let mut v = vec![0; p.len()];
            for (i, &e) in ext.iter().enumerate() {
                v[e] = i;
            }
            v
        };
        for a in 0..p.len() {
            for b in 0..p.len() {
                if p.leq(a, b) {
                    assert!(pos[a] <= pos[b]);
                }
            }
        }
    }

    #[test]
    fn generation_is_reproducible() {
        for shape in SHAPES {
            let a = random_problem(11, shape).unwrap();
            let b = random_problem(11, shape).unwrap();
            assert_eq!(a, b);
        }
    }
}
