//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::thread;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contract_stability::oracle::generate::{self, Generated};
use contract_stability::oracle::marriage::{deferred_acceptance_oracle, Marriage};
use contract_stability::oracle::{self, ClassKind, TheoremReport, VerifyOptions};
use contract_stability::{fixtures, transfer, LatticeOp, Problem, System};

const CORPUS_SIZE: usize = 500;
const CORPUS_SEED: u64 = 0x5eed_0001;
const MARRIAGES: usize = 1000;
const PAIRS: usize = 200;
const CAP: usize = 1 << 12;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn report(n: usize, name: &str, v: &Verdict) {
    let status = if v.passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n:>2} {status} {name}: {}", v.detail);
}

fn by_cores<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism()
        .map_or(4, |n| n.get())
        .min(16);
    let chunk = items.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Stable set and its ⪯_W-extremes, recomputed from scratch from the
/// desirability operators and the Blair relation.
fn brute_extremes(pr: &Problem) -> (Vec<System>, Option<System>, Option<System>) {
    let ideals = pr
        .poset()
        .enumerate_ideals(CAP)
        .expect("corpus fits the cap");
    let stable: Vec<System> = ideals
        .into_iter()
        .filter(|&x| {
            let df = pr.firm().desirability(x).unwrap();
            let dw = pr.worker().desirability(x).unwrap();
            df.intersection(dw) == x
        })
        .collect();
    let le = |a: System, b: System| pr.worker().blair_leq(a, b).unwrap();
    let max = stable
        .iter()
        .copied()
        .find(|&s| stable.iter().all(|&t| le(t, s)));
    let min = stable
        .iter()
        .copied()
        .find(|&s| stable.iter().all(|&t| le(s, t)));
    (stable, max, min)
}

struct Instance {
    gen: Generated,
    stable: Vec<System>,
    extremes_ok: bool,
    report: TheoremReport,
}

fn failing(reports: &[&Instance], ids: &dyn Fn(&str) -> bool) -> Vec<String> {
    let mut out = Vec::new();
    for inst in reports {
        for c in inst
            .report
            .checks
            .iter()
            .filter(|c| ids(&c.id) && !c.passed)
        {
            out.push(format!("seed {} {}", inst.gen.seed, c.id));
        }
    }
    out
}

fn cases(reports: &[&Instance], ids: &dyn Fn(&str) -> bool) -> usize {
    reports
        .iter()
        .flat_map(|i| &i.report.checks)
        .filter(|c| ids(&c.id))
        .map(|c| c.checked)
        .sum()
}

fn summarize(reports: &[&Instance], ids: &dyn Fn(&str) -> bool) -> Verdict {
    let bad = failing(reports, ids);
    let n = cases(reports, ids);
    if bad.is_empty() {
        verdict(true, format!("{n} cases, 0 violations"))
    } else {
        verdict(
            false,
            format!("{} violations, first: {}", bad.len(), bad[0]),
        )
    }
}

const OPERATOR_LAWS: [&str; 9] = [
    "union_bound",
    "path_independence",
    "choice_equivalence",
    "choice_from_desirability",
    "desirability_invariance",
    "desirability_antitone",
    "desirability_union",
    "desirability_ideal",
    "blair_preorder",
];

const STRUCTURE: [&str; 19] = [
    "classify_agreement",
    "stability_via_shell",
    "one_sided_improvement",
    "worker_order_via_shells",
    "neat_stable_bijection",
    "neat_inside_offer_shell",
    "ample_intersection",
    "ample_step",
    "ample_extension",
    "ample_dynamics_fixed_points",
    "ample_closure",
    "quasi_stable_shell",
    "quasi_stable_core",
    "shell_of_retained_offer",
    "sigma_iteration",
    "minimal_ample_upper_bound",
    "minimal_ample",
    "extremal_stable",
    "existence",
];

fn is_operator_law(id: &str) -> bool {
    OPERATOR_LAWS
        .iter()
        .any(|law| id == format!("{law}_w") || id == format!("{law}_f"))
}

fn corpus_criteria(results: &mut Vec<(usize, &'static str, Verdict)>) {
    let start = Instant::now();
    let corpus = generate::corpus(CORPUS_SEED, CORPUS_SIZE).expect("corpus generation");
    let instances: Vec<Instance> = by_cores(&corpus, |g| {
        let (stable, max, min) = brute_extremes(&g.problem);
        let ext = g.problem.extremal_stable().expect("extremes");
        let opts = VerifyOptions {
            max_ideals: CAP,
            seed: g.seed,
            family_samples: 64,
        };
        Instance {
            gen: g.clone(),
            extremes_ok: max == Some(ext.s_max_w) && min == Some(ext.s_min_w),
            report: oracle::verify_theorems(&g.problem, opts).expect("verify"),
            stable,
        }
    });
    let elapsed = start.elapsed();
    let all: Vec<&Instance> = instances.iter().collect();

    // 1. existence
    let empty: Vec<u64> = instances
        .iter()
        .filter(|i| i.stable.is_empty())
        .map(|i| i.gen.seed)
        .collect();
    let enumerated_ok = by_cores(&corpus, |g| {
        !oracle::enumerate_class(&g.problem, ClassKind::Stable, CAP)
            .unwrap()
            .is_empty()
    })
    .into_iter()
    .all(|b| b);
    let max_ideals = instances
        .iter()
        .map(|i| i.report.counts.ideals)
        .max()
        .unwrap_or(0);
    let in_time = elapsed < Duration::from_secs(60);
    results.push((
        1,
        "existence",
        verdict(
            empty.is_empty() && enumerated_ok && in_time,
            format!(
                "{} instances (largest {} ideals), {} without a stable system, {:.1}s",
                instances.len(),
                max_ideals,
                empty.len(),
                elapsed.as_secs_f64()
            ),
        ),
    ));

    // 2. extremes
    let bad: Vec<u64> = instances
        .iter()
        .filter(|i| !i.extremes_ok)
        .map(|i| i.gen.seed)
        .collect();
    results.push((
        2,
        "extremes agree with oracle",
        verdict(
            bad.is_empty(),
            format!("{} mismatches of {}", bad.len(), instances.len()),
        ),
    ));

    // 3. complete lattice
    let lattice = |id: &str| matches!(id, "complete_lattice" | "lattice_formulas");
    results.push((3, "complete lattice", summarize(&all, &lattice)));

    // 4. polarization
    results.push((
        4,
        "polarization",
        summarize(&all, &|id| id == "polarization"),
    ));

    // 5. operator laws
    results.push((5, "operator laws", summarize(&all, &is_operator_law)));

    // 6. structural statements on ample, neat and quasi-stable systems
    results.push((
        6,
        "ample, neat and quasi-stable structure",
        summarize(&all, &|id| STRUCTURE.contains(&id)),
    ));
}

fn fixture_regression() -> Verdict {
    let mut errors = Vec::new();
    let mut expect = |what: &str, ok: bool| {
        if !ok {
            errors.push(what.to_owned());
        }
    };
    let pr = fixtures::fix_ab();
    let p = pr.poset();
    let s = |names: &[&str]| p.system(names).unwrap();
    let class = |k| oracle::enumerate_class(&pr, k, CAP).unwrap();
    expect(
        "stable",
        class(ClassKind::Stable) == vec![s(&["a"]), s(&["b"])],
    );
    expect(
        "ample",
        class(ClassKind::Ample) == vec![s(&["b"]), s(&["a", "b"])],
    );
    expect(
        "neat",
        class(ClassKind::Neat) == vec![s(&["b"]), s(&["a", "b"])],
    );
    expect(
        "quasi_stable",
        class(ClassKind::QuasiStable) == vec![System::EMPTY, s(&["a"]), s(&["b"])],
    );
    let min_ample = oracle::minimal_ample_containing(&pr, System::EMPTY, CAP).unwrap();
    expect("minimal ample", min_ample.system == s(&["b"]));
    expect(
        "ample closure of empty",
        pr.ample_closure(System::EMPTY).unwrap().fixpoint == s(&["a", "b"]),
    );
    let pair = [s(&["a"]), s(&["b"])];
    expect(
        "meet",
        pr.lattice_op(LatticeOp::MeetW, &pair).unwrap() == s(&["b"]),
    );
    expect(
        "join",
        pr.lattice_op(LatticeOp::JoinW, &pair).unwrap() == s(&["a"]),
    );

    let chain = fixtures::fix_chain();
    let x1 = chain.poset().system(&["x1"]).unwrap();
    expect(
        "chain stable",
        oracle::enumerate_class(&chain, ClassKind::Stable, CAP).unwrap() == vec![x1],
    );

    let (orig, modi) = fixtures::fix_cmp();
    let image = transfer(&orig, &modi, s(&["a"]), CAP).unwrap();
    expect("transfer", image == s(&["b"]));
    expect(
        "transfer worse for worker",
        orig.worker().blair_leq(image, s(&["a"])).unwrap(),
    );

    if errors.is_empty() {
        verdict(true, "fix_ab, fix_chain, fix_cmp exact")
    } else {
        verdict(false, format!("mismatched: {}", errors.join(", ")))
    }
}

fn marriage_crosscheck() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a77);
    let markets: Vec<Marriage> = (0..MARRIAGES)
        .map(|_| generate::random_marriage(&mut rng, 4))
        .collect();
    let outcomes = by_cores(&markets, |m| {
        let check = deferred_acceptance_oracle(m.men.clone(), m.women.clone()).unwrap();
        // women-proposing deferred acceptance is the Firm-best matching
        let swapped = Marriage::new(m.women.clone(), m.men.clone()).unwrap();
        let women_best: Vec<(usize, usize)> = swapped
            .deferred_acceptance()
            .into_iter()
            .map(|(w, h)| (h, w))
            .collect();
        (check.agrees, m.contracts(&women_best) == check.s_min_w)
    });
    let elapsed = start.elapsed();
    let max_bad = outcomes.iter().filter(|o| !o.0).count();
    let min_bad = outcomes.iter().filter(|o| !o.1).count();
    verdict(
        max_bad == 0 && min_bad == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{MARRIAGES} markets up to 4x4, {max_bad} men-proposing and {min_bad} women-proposing mismatches, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn comparative_statics() -> Verdict {
    let seeds: Vec<u64> = (0..PAIRS as u64).map(|i| 0xc0de_0000 + i).collect();
    let reports = by_cores(&seeds, |&seed| {
        let (orig, modi) = generate::comparable_pair(seed).unwrap();
        let opts = VerifyOptions {
            max_ideals: CAP,
            seed,
            family_samples: 64,
        };
        (
            seed,
            oracle::verify_comparative(&orig, &modi, opts).unwrap(),
        )
    });
    let violations: Vec<String> = reports
        .iter()
        .flat_map(|(seed, r)| {
            r.checks
                .iter()
                .filter(|c| !c.passed)
                .map(move |c| format!("seed {seed} {}", c.id))
        })
        .collect();
    let transfers: usize = reports.iter().map(|(_, r)| r.transfers.len()).sum();
    let entailment = reports
        .iter()
        .filter(|(_, r)| r.blair_entailment_counterexample.is_some())
        .count();
    let modified_order = reports
        .iter()
        .filter(|(_, r)| r.modified_order_counterexample.is_some())
        .count();
    let detail = format!(
        "{PAIRS} pairs, {transfers} transfers, {} violations; logged: {entailment} pairs where ⪯_W does not entail ⪯_W', {modified_order} where S' ⪯_W' S fails",
        violations.len()
    );
    match violations.first() {
        None => verdict(true, detail),
        Some(first) => verdict(false, format!("{detail}; first: {first}")),
    }
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_contract-stability");
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata");
    let fixtures = [
        "fix_empty",
        "fix_ab",
        "fix_chain",
        "fix_agg",
        "fix_marriage",
    ];
    let mut runs = 0;
    let mut differing = Vec::new();
    for name in fixtures {
        let file = data.join(format!("{name}.json"));
        for cmd in ["verify", "solve"] {
            let outputs: Vec<Vec<u8>> = (0..3)
                .map(|_| {
                    let out = Command::new(bin)
                        .arg(cmd)
                        .arg(&file)
                        .output()
                        .expect("binary runs");
                    assert!(
                        out.status.success(),
                        "{cmd} {name} exited with {}",
                        out.status
                    );
                    out.stdout
                })
                .collect();
            runs += outputs.len();
            let json_ok = serde_json::from_slice::<serde_json::Value>(&outputs[0]).is_ok();
            if !json_ok || outputs.windows(2).any(|w| w[0] != w[1]) {
                differing.push(format!("{cmd} {name}"));
            }
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "{runs} runs over {} fixtures, {} differing",
            fixtures.len(),
            differing.len()
        ),
    )
}

fn main() {
    let mut results = Vec::new();
    corpus_criteria(&mut results);
    results.push((7, "fixture regression", fixture_regression()));
    results.push((8, "marriage cross-check", marriage_crosscheck()));
    results.push((9, "comparative statics", comparative_statics()));
    results.push((10, "determinism", determinism()));
    results.sort_by_key(|r| r.0);
    for (n, name, v) in &results {
        report(*n, name, v);
    }
    let failed = results.iter().filter(|r| !r.2.passed).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
