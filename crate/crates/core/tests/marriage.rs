use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contract_stability::fixtures;
use contract_stability::oracle::generate;
use contract_stability::oracle::marriage::{deferred_acceptance_oracle, Marriage};
use contract_stability::oracle::{self, ClassKind};
use contract_stability::System;

#[test]
fn two_by_two_with_crossed_preferences() {
    // m1: w1 > w2, m2: w2 > w1; w1: m2 > m1, w2: m1 > m2
    let market = Marriage::new(vec![vec![0, 1], vec![1, 0]], vec![vec![1, 0], vec![0, 1]]).unwrap();
    assert_eq!(market.deferred_acceptance(), vec![(0, 0), (1, 1)]);
    let pr = market.to_problem().unwrap();
    assert_eq!(pr, fixtures::fix_marriage());
    let ext = pr.extremal_stable().unwrap();
    let p = pr.poset();
    assert_eq!(ext.s_max_w, p.system(&["e11", "e22"]).unwrap());
    assert_eq!(ext.s_min_w, p.system(&["e12", "e21"]).unwrap());
    let stable = oracle::enumerate_class(&pr, ClassKind::Stable, 64).unwrap();
    assert_eq!(stable.len(), 2);
}

#[test]
fn single_pair() {
    let check = deferred_acceptance_oracle(vec![vec![0]], vec![vec![0]]).unwrap();
    assert_eq!(check.matching, vec![(0, 0)]);
    assert!(check.agrees);
    assert_eq!(check.s_max_w, check.s_min_w);
}

#[test]
fn woman_with_empty_list_stays_single() {
    let check = deferred_acceptance_oracle(vec![vec![0]], vec![vec![]]).unwrap();
    assert!(check.matching.is_empty());
    assert_eq!(check.s_max_w, System::EMPTY);
    let market = Marriage::new(vec![vec![0]], vec![vec![]]).unwrap();
    let stable =
        oracle::enumerate_class(&market.to_problem().unwrap(), ClassKind::Stable, 64).unwrap();
    assert_eq!(stable, vec![System::EMPTY]);
}

#[test]
fn malformed_lists_are_rejected() {
    assert!(Marriage::new(vec![vec![3]], vec![vec![0]]).is_err());
    assert!(Marriage::new(vec![vec![0, 0]], vec![vec![0]]).is_err());
}

#[test]
fn random_markets_agree_on_both_extremes() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..300 {
        let m = generate::random_marriage(&mut rng, 3);
        let check = deferred_acceptance_oracle(m.men.clone(), m.women.clone()).unwrap();
        assert!(check.agrees, "{m:?}");
        let women_first = Marriage::new(m.women.clone(), m.men.clone()).unwrap();
        let pairs: Vec<(usize, usize)> = women_first
            .deferred_acceptance()
            .into_iter()
            .map(|(w, h)| (h, w))
            .collect();
        assert_eq!(m.contracts(&pairs), check.s_min_w, "{m:?}");
    }
}
