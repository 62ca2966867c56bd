use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Tables;
use crate::error::{Error, Names, Result};
use crate::poset::Poset;
use crate::stability::{self, LatticeOp, Problem};
use crate::system::System;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub max_ideals: usize,
    /// Seeds the sampling of three-member families of stable systems.
    pub seed: u64,
    /// Number of sampled three-member families when exhaustive listing is
    /// too large.
    pub family_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_ideals: crate::DEFAULT_MAX_IDEALS,
            seed: 0,
            family_samples: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Labeled {
    pub label: String,
    pub system: Names,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub systems: Vec<Labeled>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub id: String,
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassCounts {
    pub ideals: usize,
    pub stable: usize,
    pub neat: usize,
    pub ample: usize,
    pub quasi_stable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Findings {
    pub intersection_of_stable: Names,
    pub intersection_of_stable_is_ample: bool,
    pub intersection_of_ample: Names,
    pub intersections_differ: bool,
    pub minimal_ample_core: Names,
    pub ample_closure_of_empty: Names,
    pub closure_of_empty_is_minimal_ample: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub seed: u64,
    pub all_passed: bool,
    pub counts: ClassCounts,
    pub stable: Vec<Names>,
    pub checks: Vec<TheoremCheck>,
    pub findings: Findings,
}

impl TheoremReport {
    pub fn check(&self, id: &str) -> Option<&TheoremCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TheoremCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Collects cases of one statement and keeps the smallest counterexample.
struct Check<'a> {
    id: String,
    poset: &'a Poset,
    checked: usize,
    worst: Option<(usize, Vec<(&'static str, System)>)>,
}

impl<'a> Check<'a> {
    fn new(id: impl Into<String>, poset: &'a Poset) -> Self {
        Check {
            id: id.into(),
            poset,
            checked: 0,
            worst: None,
        }
    }

    fn case(&mut self, ok: bool, witness: impl FnOnce() -> Vec<(&'static str, System)>) {
        self.checked += 1;
        if ok {
            return;
        }
        let w = witness();
        let size = w.iter().map(|(_, s)| s.len()).sum();
        if self.worst.as_ref().is_none_or(|(best, _)| size < *best) {
            self.worst = Some((size, w));
        }
    }

    fn finish(self, out: &mut Vec<TheoremCheck>) {
        let poset = self.poset;
        out.push(TheoremCheck {
            id: self.id,
            passed: self.worst.is_none(),
            checked: self.checked,
            witness: self.worst.map(|(_, w)| Witness {
                systems: w
                    .into_iter()
                    .map(|(label, s)| Labeled {
                        label: label.to_owned(),
                        system: poset.names(s),
                    })
                    .collect(),
            }),
        });
    }
}

/// Square boolean matrix stored as bit rows.
struct BitMatrix {
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for i in 0..n {
            for j in 0..n {
                if f(i, j) {
                    bits[i * words + j / 64] |= 1 << (j % 64);
                }
            }
        }
        BitMatrix { words, bits }
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Some column in row `j` that is missing from row `i`.
    fn first_missing(&self, i: usize, j: usize) -> Option<usize> {
        self.row(j)
            .iter()
            .zip(self.row(i))
            .enumerate()
            .find_map(|(w, (&rj, &ri))| {
                let miss = rj & !ri;
                (miss != 0).then(|| w * 64 + miss.trailing_zeros() as usize)
            })
    }
}

/// Exhaustively checks the operator laws, the stability theorems and the
/// lattice structure of `pr`, and cross-checks the solvers against
/// brute-force answers.
pub fn verify_theorems(pr: &Problem, opts: VerifyOptions) -> Result<TheoremReport> {
    if !pr.worker().is_plott() || !pr.firm().is_plott() {
        return Err(Error::UncheckedChoiceFunction);
    }
    let t = Tables::new(pr, opts.max_ideals)?;
    let poset = &**pr.poset();
    let mut checks = Vec::new();

    operator_laws(&t, poset, &t.w, &t.dw, "w", &mut checks);
    operator_laws(&t, poset, &t.f, &t.df, "f", &mut checks);

    let stable = t.class(Tables::is_stable);
    let neat = t.class(Tables::is_neat);
    let ample = t.class(Tables::is_ample);
    let quasi = t.class(Tables::is_quasi_stable);

    let mut c = Check::new("classify_agreement", poset);
    for &x in t.lat.ideals() {
        let got = pr.classify(x)?;
        let ok = got.stable == t.is_stable(x)
            && got.neat == t.is_neat(x)
            && got.ample == t.is_ample(x)
            && got.quasi_stable == t.is_quasi_stable(x)
            && got.acceptable_w == (t.w_of(x) == x)
            && got.acceptable_f == (t.f_of(x) == x);
        c.case(ok, || vec![("system", x)]);
    }
    c.finish(&mut checks);

    let mut c = Check::new("existence", poset);
    c.case(!stable.is_empty(), Vec::new);
    c.finish(&mut checks);

    stability_theorems(&t, poset, &stable, &neat, &mut checks);
    ample_theorems(pr, &t, poset, &ample, &quasi, &neat, &mut checks)?;
    let b_min = lattice_theorems(pr, &t, poset, &stable, &ample, opts, &mut checks)?;

    let inter_stable = stable
        .iter()
        .copied()
        .reduce(System::intersection)
        .unwrap_or_default();
    let closure = pr.ample_closure(System::EMPTY)?.fixpoint;
    let findings = Findings {
        intersection_of_stable: poset.names(inter_stable),
        intersection_of_stable_is_ample: t.is_ample(inter_stable),
        intersection_of_ample: poset.names(b_min),
        intersections_differ: inter_stable != b_min,
        minimal_ample_core: poset.names(t.w_of(b_min)),
        ample_closure_of_empty: poset.names(closure),
        closure_of_empty_is_minimal_ample: closure == b_min,
    };

    Ok(TheoremReport {
        seed: opts.seed,
        all_passed: checks.iter().all(|c| c.passed),
        counts: ClassCounts {
            ideals: t.lat.len(),
            stable: stable.len(),
            neat: neat.len(),
            ample: ample.len(),
            quasi_stable: quasi.len(),
        },
        stable: stable.iter().map(|&s| poset.names(s)).collect(),
        checks,
        findings,
    })
}

fn operator_laws(
    t: &Tables,
    poset: &Poset,
    c: &[System],
    d: &[System],
    agent: &str,
    out: &mut Vec<TheoremCheck>,
) {
    let ideals = t.lat.ideals();
    let n = ideals.len();
    let id = |name: &str| format!("{name}_{agent}");
    let blair = BitMatrix::new(n, |i, j| {
        c[t.pos(ideals[i].union(ideals[j]))].is_subset(ideals[j])
    });

    let mut union_bound = Check::new(id("union_bound"), poset);
    let mut path_indep = Check::new(id("path_independence"), poset);
    let mut antitone = Check::new(id("desirability_antitone"), poset);
    for i in 0..n {
        let a = ideals[i];
        for j in 0..n {
            let b = ideals[j];
            let cu = c[t.pos(a.union(b))];
            union_bound.case(cu.is_subset(c[i].union(b)), || {
                vec![("A", a), ("B", b), ("C(A∪B)", cu)]
            });
            path_indep.case(cu == c[t.pos(c[i].union(b))], || vec![("A", a), ("B", b)]);
            antitone.case(!blair.get(i, j) || d[j].is_subset(d[i]), || {
                vec![("A", a), ("B", b)]
            });
        }
    }
    union_bound.finish(out);
    path_indep.finish(out);

    let mut equiv = Check::new(id("choice_equivalence"), poset);
    let mut via_d = Check::new(id("choice_from_desirability"), poset);
    let mut invariance = Check::new(id("desirability_invariance"), poset);
    let mut d_ideal = Check::new(id("desirability_ideal"), poset);
    for (i, &a) in ideals.iter().enumerate() {
        let ci = t.pos(c[i]);
        equiv.case(blair.get(i, ci) && blair.get(ci, i), || {
            vec![("A", a), ("C(A)", c[i])]
        });
        via_d.case(c[i] == a.intersection(d[i]), || vec![("A", a)]);
        invariance.case(d[i] == d[ci], || vec![("A", a), ("C(A)", c[i])]);
        let acceptable = c[i] == a;
        d_ideal.case(
            poset.is_ideal(d[i]) && acceptable == a.is_subset(d[i]),
            || vec![("A", a), ("D(A)", d[i])],
        );
    }
    equiv.finish(out);
    via_d.finish(out);
    invariance.finish(out);
    antitone.finish(out);

    let mut union_check = Check::new(id("desirability_union"), poset);
    for i in 0..n {
        for j in i..n {
            let uij = ideals[i].union(ideals[j]);
            let dij = d[i].intersection(d[j]);
            union_check.case(d[t.pos(uij)].is_subset(dij), || {
                vec![("A", ideals[i]), ("B", ideals[j])]
            });
            for k in j..n {
                let u = uij.union(ideals[k]);
                union_check.case(d[t.pos(u)].is_subset(dij.intersection(d[k])), || {
                    vec![("A", ideals[i]), ("B", ideals[j]), ("C", ideals[k])]
                });
            }
        }
    }
    union_check.finish(out);
    d_ideal.finish(out);

    let mut preorder = Check::new(id("blair_preorder"), poset);
    for i in 0..n {
        preorder.case(blair.get(i, i), || vec![("A", ideals[i])]);
        for j in 0..n {
            if blair.get(i, j) {
                let miss = blair.first_missing(i, j);
                preorder.case(miss.is_none(), || {
                    vec![
                        ("A", ideals[i]),
                        ("B", ideals[j]),
                        ("C", ideals[miss.unwrap_or(0)]),
                    ]
                });
                let both_acceptable = c[i] == ideals[i] && c[j] == ideals[j];
                if both_acceptable && i != j {
                    preorder.case(!blair.get(j, i), || {
                        vec![("A", ideals[i]), ("B", ideals[j])]
                    });
                }
            }
        }
    }
    preorder.finish(out);
}

fn stability_theorems(
    t: &Tables,
    poset: &Poset,
    stable: &[System],
    neat: &[System],
    out: &mut Vec<TheoremCheck>,
) {
    let ideals = t.lat.ideals();

    let mut c = Check::new("stability_via_shell", poset);
    for &x in ideals {
        c.case(t.is_stable(x) == (t.w_of(t.df_of(x)) == x), || {
            vec![("S", x)]
        });
    }
    c.finish(out);

    let mut c = Check::new("one_sided_improvement", poset);
    for &s in stable {
        for &a in ideals {
            if t.blair_f(s, a) {
                c.case(t.blair_w(t.f_of(a), s), || vec![("S", s), ("A", a)]);
            }
            if t.blair_w(s, a) {
                c.case(t.blair_f(t.w_of(a), s), || vec![("S", s), ("A", a)]);
            }
        }
    }
    c.finish(out);

    let mut pol = Check::new("polarization", poset);
    let mut c3 = Check::new("worker_order_via_shells", poset);
    for &s in stable {
        for &u in stable {
            pol.case(t.blair_f(s, u) == t.blair_w(u, s), || {
                vec![("S", s), ("T", u)]
            });
            c3.case(t.blair_w(s, u) == t.df_of(s).is_subset(t.df_of(u)), || {
                vec![("S", s), ("T", u)]
            });
        }
    }
    pol.finish(out);
    c3.finish(out);

    let mut c = Check::new("neat_stable_bijection", poset);
    c.case(stable.len() == neat.len(), Vec::new);
    for &s in stable {
        let shell = t.df_of(s);
        c.case(t.is_neat(shell) && t.w_of(shell) == s, || {
            vec![("S", s), ("D_F(S)", shell)]
        });
        // the shell is the smallest neat system containing S
        for &a in neat {
            if s.is_subset(a) {
                c.case(shell.is_subset(a), || vec![("S", s), ("A", a)]);
            }
        }
    }
    for &a in neat {
        let core = t.w_of(a);
        c.case(t.is_stable(core) && t.df_of(core) == a, || {
            vec![("A", a), ("W(A)", core)]
        });
    }
    c.finish(out);

    let mut c = Check::new("neat_inside_offer_shell", poset);
    for &a in neat {
        for &b in ideals {
            if a.is_subset(b) {
                c.case(a.is_subset(t.df_of(t.w_of(b))), || vec![("A", a), ("B", b)]);
            }
        }
    }
    c.finish(out);
}

fn ample_theorems(
    pr: &Problem,
    t: &Tables,
    poset: &Poset,
    ample: &[System],
    quasi: &[System],
    neat: &[System],
    out: &mut Vec<TheoremCheck>,
) -> Result<()> {
    let ideals = t.lat.ideals();

    let mut c = Check::new("ample_intersection", poset);
    for (i, &b1) in ample.iter().enumerate() {
        for &b2 in &ample[i..] {
            c.case(t.is_ample(b1.intersection(b2)), || {
                vec![("B1", b1), ("B2", b2)]
            });
        }
    }
    let all = ample.iter().copied().reduce(System::intersection);
    c.case(all.is_some_and(|b| t.is_ample(b)), Vec::new);
    c.finish(out);

    let mut c = Check::new("ample_step", poset);
    for &b in ample {
        let next = t.df_of(t.w_of(b));
        c.case(t.is_ample(next), || vec![("B", b), ("D_F(W(B))", next)]);
    }
    c.finish(out);

    let mut c = Check::new("ample_extension", poset);
    for &b in ample {
        for &b2 in ideals {
            if !b.is_subset(b2) {
                continue;
            }
            let (wb, wb2) = (t.w_of(b), t.w_of(b2));
            // for B ⊆ B', W(B) ⊆ W(B') and W(B') ∩ B = W(B) say the same thing
            c.case(wb.is_subset(wb2) == (wb2.intersection(b) == wb), || {
                vec![("B", b), ("B'", b2)]
            });
            if wb2.intersection(b) == wb {
                c.case(t.is_ample(b2), || vec![("B", b), ("B'", b2)]);
            }
        }
    }
    c.finish(out);

    let mut dynamics = Check::new("ample_dynamics_fixed_points", poset);
    let mut closure = Check::new("ample_closure", poset);
    for &x in ideals {
        let step = x.union(t.df_of(t.w_of(x)));
        dynamics.case((step == x) == t.is_ample(x), || vec![("A", x)]);
        let trace = pr.ample_closure(x)?;
        let fix = trace.fixpoint;
        let ok = t.is_ample(fix)
            && x.is_subset(fix)
            && fix.union(t.df_of(t.w_of(fix))) == fix
            && (!t.is_ample(x) || (fix == x && trace.rounds.len() == 1));
        closure.case(ok, || vec![("A", x), ("closure", fix)]);
    }
    dynamics.finish(out);
    closure.finish(out);

    let mut c = Check::new("quasi_stable_shell", poset);
    for &q in quasi {
        c.case(t.is_ample(t.df_of(q)), || vec![("Q", q)]);
    }
    c.finish(out);

    let mut core = Check::new("quasi_stable_core", poset);
    let mut not_reciprocal = Check::new("shell_of_retained_offer", poset);
    for &b in ample {
        let fwb = t.f_of(t.w_of(b));
        core.case(t.is_quasi_stable(fwb), || vec![("B", b), ("F(W(B))", fwb)]);
        not_reciprocal.case(t.df_of(fwb) == t.df_of(t.w_of(b)), || vec![("B", b)]);
    }
    core.finish(out);
    not_reciprocal.finish(out);

    let mut c = Check::new("sigma_iteration", poset);
    for &b in ideals {
        let got = pr.sigma(b);
        if !t.is_ample(b) {
            c.case(matches!(got, Err(Error::NotAmple { .. })), || {
                vec![("B", b)]
            });
            continue;
        }
        let out_ = got?;
        let inside: Vec<System> = neat.iter().copied().filter(|a| a.is_subset(b)).collect();
        let union = inside.iter().copied().fold(System::EMPTY, System::union);
        let largest = inside.contains(&union).then_some(union);
        let rounds_ok = out_.trace.rounds.iter().all(|r| {
            r.next.is_subset(r.current)
                && t.is_ample(r.current)
                && r.next == t.df_of(t.w_of(r.current))
        });
        let ok = rounds_ok
            && out_.trace.rounds.first().is_some_and(|r| r.current == b)
            && t.is_neat(out_.neat_core)
            && Some(out_.neat_core) == largest
            && out_.stable == t.w_of(out_.neat_core)
            && t.is_stable(out_.stable);
        c.case(ok, || vec![("B", b), ("N(B)", out_.neat_core)]);
    }
    c.finish(out);
    Ok(())
}

/// ⪯_W bounds found by brute force over the stable set.
struct Bounds {
    le: Vec<Vec<bool>>,
}

impl Bounds {
    fn greatest_lower(&self, family: &[usize]) -> Option<usize> {
        let n = self.le.len();
        let lower: Vec<usize> = (0..n)
            .filter(|&k| family.iter().all(|&i| self.le[k][i]))
            .collect();
        let mut it = lower
            .iter()
            .copied()
            .filter(|&g| lower.iter().all(|&k| self.le[k][g]));
        let g = it.next()?;
        it.next().is_none().then_some(g)
    }

    fn least_upper(&self, family: &[usize]) -> Option<usize> {
        let n = self.le.len();
        let upper: Vec<usize> = (0..n)
            .filter(|&k| family.iter().all(|&i| self.le[i][k]))
            .collect();
        let mut it = upper
            .iter()
            .copied()
            .filter(|&g| upper.iter().all(|&k| self.le[g][k]));
        let g = it.next()?;
        it.next().is_none().then_some(g)
    }
}

fn lattice_theorems(
    pr: &Problem,
    t: &Tables,
    poset: &Poset,
    stable: &[System],
    ample: &[System],
    opts: VerifyOptions,
    out: &mut Vec<TheoremCheck>,
) -> Result<System> {
    let n = stable.len();
    let bounds = Bounds {
        le: stable
            .iter()
            .map(|&s| stable.iter().map(|&u| t.blair_w(s, u)).collect())
            .collect(),
    };

    let mut families: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        for j in i..n {
            families.push(vec![i, j]);
        }
    }
    if n >= 3 {
        if n <= 12 {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        families.push(vec![i, j, k]);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            for _ in 0..opts.family_samples {
                families.push(sample(&mut rng, n, 3).into_vec());
            }
        }
    }
    if n > 0 {
        families.push((0..n).collect());
    }

    let mut complete = Check::new("complete_lattice", poset);
    let mut formulas = Check::new("lattice_formulas", poset);
    let mut upper = Check::new("minimal_ample_upper_bound", poset);
    for i in 0..n {
        complete.case(bounds.le[i][i], || vec![("S", stable[i])]);
        for j in 0..n {
            if i != j {
                complete.case(!(bounds.le[i][j] && bounds.le[j][i]), || {
                    vec![("S", stable[i]), ("T", stable[j])]
                });
            }
            for k in 0..n {
                if bounds.le[i][j] && bounds.le[j][k] {
                    complete.case(bounds.le[i][k], || {
                        vec![("S", stable[i]), ("T", stable[j]), ("U", stable[k])]
                    });
                }
            }
        }
    }
    for fam in &families {
        let members: Vec<System> = fam.iter().map(|&i| stable[i]).collect();
        let wit = || members.iter().map(|&s| ("member", s)).collect::<Vec<_>>();
        let glb = bounds.greatest_lower(fam);
        let lub = bounds.least_upper(fam);
        complete.case(glb.is_some() && lub.is_some(), wit);
        let (Some(glb), Some(lub)) = (glb, lub) else {
            continue;
        };
        let (glb, lub) = (stable[glb], stable[lub]);
        for (op, want) in [
            (LatticeOp::InfW, glb),
            (LatticeOp::SupW, lub),
            (LatticeOp::MeetW, glb),
            (LatticeOp::JoinW, lub),
        ] {
            let got = pr.lattice_op(op, &members)?;
            formulas.case(got == want, || {
                let mut w = wit();
                w.push(("got", got));
                w.push(("expected", want));
                w
            });
        }
        let union = members.iter().copied().fold(System::EMPTY, System::union);
        let m = t.minimal_ample_containing(union)?;
        upper.case(t.is_neat(m.system) && m.core == lub, wit);
    }
    complete.finish(out);
    formulas.finish(out);
    upper.finish(out);

    let mut c = Check::new("extremal_stable", poset);
    let all: Vec<usize> = (0..n).collect();
    let ext = pr.extremal_stable()?;
    let oracle_max = bounds.least_upper(&all).map(|i| stable[i]);
    let oracle_min = bounds.greatest_lower(&all).map(|i| stable[i]);
    c.case(oracle_max == Some(ext.s_max_w), || {
        vec![("s_max_w", ext.s_max_w)]
    });
    c.case(oracle_min == Some(ext.s_min_w), || {
        vec![("s_min_w", ext.s_min_w)]
    });
    c.finish(out);

    let mut c = Check::new("minimal_ample", poset);
    let b_min = ample
        .iter()
        .copied()
        .reduce(System::intersection)
        .unwrap_or_default();
    c.case(t.is_ample(b_min) && t.is_neat(b_min), || {
        vec![("B_min", b_min)]
    });
    c.case(Some(t.w_of(b_min)) == oracle_min, || {
        vec![("B_min", b_min), ("W(B_min)", t.w_of(b_min))]
    });
    let via_api = t.minimal_ample_containing(System::EMPTY)?.system;
    c.case(via_api == b_min, || {
        vec![("B_min", b_min), ("computed", via_api)]
    });
    for &b in ample {
        c.case(b_min.is_subset(b), || vec![("B_min", b_min), ("B", b)]);
    }
    c.finish(out);

    Ok(b_min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transfer {
    pub stable: Names,
    pub image: Names,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparativeReport {
    pub all_passed: bool,
    pub transfers: Vec<Transfer>,
    pub checks: Vec<TheoremCheck>,
    /// Counterexample to "A ⪯_W Y implies A ⪯_W' Y", if any.
    pub blair_entailment_counterexample: Option<Witness>,
    /// Counterexample to "S' ⪯_W' S", if any.
    pub modified_order_counterexample: Option<Witness>,
}

fn witness(poset: &Poset, items: &[(&str, System)]) -> Witness {
    Witness {
        systems: items
            .iter()
            .map(|&(label, s)| Labeled {
                label: label.to_owned(),
                system: poset.names(s),
            })
            .collect(),
    }
}

/// Checks the comparative-statics claims for a pair of problems related by
/// a more demanding Firm and a more compliant Worker.
pub fn verify_comparative(
    original: &Problem,
    modified: &Problem,
    opts: VerifyOptions,
) -> Result<ComparativeReport> {
    for pr in [original, modified] {
        if !pr.worker().is_plott() || !pr.firm().is_plott() {
            return Err(Error::UncheckedChoiceFunction);
        }
    }
    let stable_original = {
        let t = Tables::new(original, opts.max_ideals)?;
        t.class(Tables::is_stable)
    };
    let images = stability::transfer_all(original, modified, &stable_original, opts.max_ideals)?;
    let t1 = Tables::new(original, opts.max_ideals)?;
    let t2 = Tables::new(modified, opts.max_ideals)?;
    let poset = &**original.poset();
    let mut checks = Vec::new();

    let mut c = Check::new("ampleness_transfer", poset);
    for &b in t1.lat.ideals() {
        if t1.is_ample(b) {
            c.case(t2.is_ample(b), || vec![("B", b)]);
        }
    }
    c.finish(&mut checks);

    let mut stable_img = Check::new("transfer_stable", poset);
    let mut worse = Check::new("transfer_worse_for_worker", poset);
    let mut modified_cex = None;
    for (&s, &img) in stable_original.iter().zip(&images) {
        stable_img.case(t2.is_stable(img), || vec![("S", s), ("S'", img)]);
        worse.case(t1.blair_w(img, s), || vec![("S", s), ("S'", img)]);
        if modified_cex.is_none() && !t2.blair_w(img, s) {
            modified_cex = Some(witness(poset, &[("S", s), ("S'", img)]));
        }
    }
    stable_img.finish(&mut checks);
    worse.finish(&mut checks);

    let mut c = Check::new("transfer_morphism", poset);
    for (i, &s) in stable_original.iter().enumerate() {
        for (j, &u) in stable_original.iter().enumerate() {
            if t1.blair_w(s, u) {
                c.case(t2.blair_w(images[i], images[j]), || {
                    vec![("S", s), ("T", u), ("S'", images[i]), ("T'", images[j])]
                });
            }
        }
    }
    c.finish(&mut checks);

    let mut entailment = None;
    'outer: for &a in t1.lat.ideals() {
        for &y in t1.lat.ideals() {
            if t1.blair_w(a, y) && !t2.blair_w(a, y) {
                entailment = Some(witness(poset, &[("A", a), ("Y", y)]));
                break 'outer;
            }
        }
    }

    Ok(ComparativeReport {
        all_passed: checks.iter().all(|c| c.passed),
        transfers: stable_original
            .iter()
            .zip(&images)
            .map(|(&s, &img)| Transfer {
                stable: poset.names(s),
                image: poset.names(img),
            })
            .collect(),
        checks,
        blair_entailment_counterexample: entailment,
        modified_order_counterexample: modified_cex,
    })
}
