//! Small named problems used by tests, examples and the documentation.

use std::sync::Arc;

use crate::choice::{ChoiceFunction, TableOptions};
use crate::poset::Poset;
use crate::stability::Problem;
use crate::system::System;

fn discrete(names: &[&str]) -> Arc<Poset> {
    Arc::new(Poset::discrete(names).expect("fixture poset"))
}

fn quota(p: &Arc<Poset>, priority: &[&str], q: usize) -> ChoiceFunction {
    ChoiceFunction::quota(p.clone(), priority, q).expect("fixture quota")
}

fn sub_quota(
    p: &Arc<Poset>,
    part: &[&str],
    priority: &[&str],
    q: usize,
) -> (System, ChoiceFunction) {
    let mask = p.system(part).expect("fixture part");
    (mask, quota(&Arc::new(p.induced(mask)), priority, q))
}

fn aggregate(p: &Arc<Poset>, parts: Vec<(System, ChoiceFunction)>) -> ChoiceFunction {
    let (masks, kids) = parts.into_iter().unzip();
    ChoiceFunction::aggregate(p.clone(), masks, kids).expect("fixture aggregate")
}

/// Empty poset; both agents choose nothing.
pub fn fix_empty() -> Problem {
    let p = discrete(&[]);
    let id = ChoiceFunction::identity(p).expect("fixture");
    Problem::new(id.clone(), id).expect("fixture")
}

/// E = {a, b}; Worker takes one of a > b, Firm one of b > a.
pub fn fix_ab() -> Problem {
    let p = discrete(&["a", "b"]);
    Problem::new(quota(&p, &["a", "b"], 1), quota(&p, &["b", "a"], 1)).expect("fixture")
}

/// Chain x1 < x2; Worker accepts everything, Firm never goes above x1.
pub fn fix_chain() -> Problem {
    let p = Arc::new(Poset::new(&["x1", "x2"], &[("x1", "x2")]).expect("fixture"));
    let keep = p.system(&["x1"]).expect("fixture");
    let w = ChoiceFunction::identity(p.clone()).expect("fixture");
    let f = ChoiceFunction::tabulate(p, TableOptions::default(), |a| a.intersection(keep))
        .expect("fixture");
    Problem::new(w, f).expect("fixture")
}

/// E = {a, b, c}; Firm aggregates a one-slot a > b desk with a c desk,
/// Worker takes two of c > b > a.
pub fn fix_agg() -> Problem {
    let p = discrete(&["a", "b", "c"]);
    let f = aggregate(
        &p,
        vec![
            sub_quota(&p, &["a", "b"], &["a", "b"], 1),
            sub_quota(&p, &["c"], &["c"], 1),
        ],
    );
    Problem::new(quota(&p, &["c", "b", "a"], 2), f).expect("fixture")
}

/// Two men, two women; `e_mw` is the contract between man m and woman w.
/// Worker = men (m1: w1 > w2, m2: w2 > w1), Firm = women (w1: m2 > m1,
/// w2: m1 > m2).
pub fn fix_marriage() -> Problem {
    let p = discrete(&["e11", "e12", "e21", "e22"]);
    let men = aggregate(
        &p,
        vec![
            sub_quota(&p, &["e11", "e12"], &["e11", "e12"], 1),
            sub_quota(&p, &["e21", "e22"], &["e22", "e21"], 1),
        ],
    );
    let women = aggregate(
        &p,
        vec![
            sub_quota(&p, &["e11", "e21"], &["e21", "e11"], 1),
            sub_quota(&p, &["e12", "e22"], &["e12", "e22"], 1),
        ],
    );
    Problem::new(men, women).expect("fixture")
}

/// [`fix_ab`] and a modified problem whose Firm only ever accepts b.
pub fn fix_cmp() -> (Problem, Problem) {
    let original = fix_ab();
    let p = original.poset().clone();
    let modified = Problem::new(original.worker().clone(), quota(&p, &["b"], 1)).expect("fixture");
    (original, modified)
}

/// A non-substitutable table on {a, b}: C({a,b}) = {a} but C({a}) = ∅.
/// Validated (and failed), not rejected.
pub fn t_bad() -> ChoiceFunction {
    let p = discrete(&["a", "b"]);
    let (a, b) = (System::singleton(0), System::singleton(1));
    let entries = vec![
        (System::EMPTY, System::EMPTY),
        (a, System::EMPTY),
        (b, b),
        (a.union(b), a),
    ];
    ChoiceFunction::table(
        p,
        entries,
        TableOptions {
            strict: false,
            ..TableOptions::default()
        },
    )
    .expect("fixture")
}
