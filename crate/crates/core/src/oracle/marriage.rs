//! One-to-one marriage markets: textbook man-proposing deferred acceptance,
//! and the same market encoded as a two-agent contract problem by
//! aggregating each person's unit-demand choice.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::choice::ChoiceFunction;
use crate::error::{Error, Result};
use crate::poset::Poset;
use crate::stability::Problem;
use crate::system::System;

/// Preference lists, most preferred first; anyone absent is unacceptable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marriage {
    pub men: Vec<Vec<usize>>,
    pub women: Vec<Vec<usize>>,
}

impl Marriage {
    pub fn new(men: Vec<Vec<usize>>, women: Vec<Vec<usize>>) -> Result<Self> {
        check_lists(&men, women.len(), "man")?;
        check_lists(&women, men.len(), "woman")?;
        Ok(Marriage { men, women })
    }

    fn contract(&self, m: usize, w: usize) -> usize {
        m * self.women.len() + w
    }

    fn contract_name(&self, m: usize, w: usize) -> String {
        if self.men.len() < 10 && self.women.len() < 10 {
            format!("e{}{}", m + 1, w + 1)
        } else {
            format!("e{}_{}", m + 1, w + 1)
        }
    }

    /// Man-proposing deferred acceptance. Returns `(man, woman)` pairs
    /// sorted by man.
    pub fn deferred_acceptance(&self) -> Vec<(usize, usize)> {
        let rank: Vec<Vec<Option<usize>>> = self
            .women
            .iter()
            .map(|list| {
                let mut r = vec![None; self.men.len()];
                for (pos, &m) in list.iter().enumerate() {
                    r[m] = Some(pos);
                }
                r
            })
            .collect();
        let mut next = vec![0usize; self.men.len()];
        let mut held: Vec<Option<usize>> = vec![None; self.women.len()];
        let mut free: VecDeque<usize> = (0..self.men.len()).collect();
        while let Some(m) = free.pop_front() {
            let Some(&w) = self.men[m].get(next[m]) else {
                continue;
            };
            next[m] += 1;
            let Some(r) = rank[w][m] else {
                free.push_back(m);
                continue;
            };
            match held[w] {
                None => held[w] = Some(m),
                Some(cur) if r < rank[w][cur].expect("held man is acceptable") => {
                    held[w] = Some(m);
                    free.push_back(cur);
                }
                Some(_) => free.push_back(m),
            }
        }
        let mut pairs: Vec<(usize, usize)> = held
            .iter()
            .enumerate()
            .filter_map(|(w, m)| m.map(|m| (m, w)))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// Contracts `e_mw` for every man-woman pair; Worker aggregates the men,
    /// Firm the women, each choosing their best acceptable contract.
    pub fn to_problem(&self) -> Result<Problem> {
        let (nm, nw) = (self.men.len(), self.women.len());
        let names: Vec<String> = (0..nm)
            .flat_map(|m| (0..nw).map(move |w| (m, w)))
            .map(|(m, w)| self.contract_name(m, w))
            .collect();
        let poset = Arc::new(Poset::discrete(&names)?);
        let side =
            |lists: &[Vec<usize>], others: usize, contract: &dyn Fn(usize, usize) -> usize| {
                let mut parts = Vec::new();
                let mut kids = Vec::new();
                for (me, list) in lists.iter().enumerate() {
                    let mask: System = (0..others).map(|o| contract(me, o)).collect();
                    let priority: Vec<&str> = list
                        .iter()
                        .map(|&o| names[contract(me, o)].as_str())
                        .collect();
                    kids.push(ChoiceFunction::quota(
                        Arc::new(poset.induced(mask)),
                        &priority,
                        1,
                    )?);
                    parts.push(mask);
                }
                ChoiceFunction::aggregate(poset.clone(), parts, kids)
            };
        let men = side(&self.men, nw, &|m, w| self.contract(m, w))?;
        let women = side(&self.women, nm, &|w, m| self.contract(m, w))?;
        Problem::new(men, women)
    }

    /// The contracts of a matching.
    pub fn contracts(&self, pairs: &[(usize, usize)]) -> System {
        pairs.iter().map(|&(m, w)| self.contract(m, w)).collect()
    }
}

fn check_lists(lists: &[Vec<usize>], others: usize, who: &str) -> Result<()> {
    for (i, list) in lists.iter().enumerate() {
        let mut seen = vec![false; others];
        for &o in list {
            if o >= others {
                return Err(Error::MalformedPreferences(format!(
                    "{who} {i} lists unknown partner {o}"
                )));
            }
            if std::mem::replace(&mut seen[o], true) {
                return Err(Error::MalformedPreferences(format!(
                    "{who} {i} lists partner {o} twice"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeferredAcceptanceCheck {
    pub matching: Vec<(usize, usize)>,
    pub matching_contracts: System,
    pub s_max_w: System,
    pub s_min_w: System,
    pub agrees: bool,
}

/// Runs deferred acceptance and the contract solver on the same market and
/// compares the men-optimal outcome with the Worker-best stable system.
pub fn deferred_acceptance_oracle(
    men: Vec<Vec<usize>>,
    women: Vec<Vec<usize>>,
) -> Result<DeferredAcceptanceCheck> {
    let market = Marriage::new(men, women)?;
    let matching = market.deferred_acceptance();
    let matching_contracts = market.contracts(&matching);
    let ext = market.to_problem()?.extremal_stable()?;
    Ok(DeferredAcceptanceCheck {
        agrees: ext.s_max_w == matching_contracts,
        matching,
        matching_contracts,
        s_max_w: ext.s_max_w,
        s_min_w: ext.s_min_w,
    })
}
