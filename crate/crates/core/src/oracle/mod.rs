//! Brute-force ground truth over the whole ideal lattice.
//!
//! Everything here is recomputed from tabulated values of `W`, `F`, `D_W`
//! and `D_F`; the only code shared with the solvers is choice and
//! desirability evaluation.

pub mod generate;
pub mod marriage;
mod theorems;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poset::IdealLattice;
use crate::stability::Problem;
use crate::system::System;

pub use theorems::{
    verify_comparative, verify_theorems, ComparativeReport, Findings, Labeled, TheoremCheck,
    TheoremReport, VerifyOptions, Witness,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Stable,
    Neat,
    Ample,
    QuasiStable,
    AcceptableW,
    AcceptableF,
}

impl std::str::FromStr for ClassKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "stable" => ClassKind::Stable,
            "neat" => ClassKind::Neat,
            "ample" => ClassKind::Ample,
            "quasi_stable" | "quasi-stable" => ClassKind::QuasiStable,
            "acceptable_w" | "acceptable-w" => ClassKind::AcceptableW,
            "acceptable_f" | "acceptable-f" => ClassKind::AcceptableF,
            other => return Err(format!("unknown class `{other}`")),
        })
    }
}

/// All ideals of the given class, in canonical order.
pub fn enumerate_class(pr: &Problem, kind: ClassKind, max_ideals: usize) -> Result<Vec<System>> {
    let lattice = IdealLattice::new(pr.poset().clone(), max_ideals)?;
    crate::stability::filter_ideals(&lattice, |s| {
        let c = pr.classify(s)?;
        Ok(match kind {
            ClassKind::Stable => c.stable,
            ClassKind::Neat => c.neat,
            ClassKind::Ample => c.ample,
            ClassKind::QuasiStable => c.quasi_stable,
            ClassKind::AcceptableW => c.acceptable_w,
            ClassKind::AcceptableF => c.acceptable_f,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinimalAmple {
    pub system: System,
    /// W of the minimal ample system.
    pub core: System,
}

/// Intersection of every ample system that contains `u`.
pub fn minimal_ample_containing(
    pr: &Problem,
    u: System,
    max_ideals: usize,
) -> Result<MinimalAmple> {
    pr.poset().require_ideal(u)?;
    let tables = Tables::new(pr, max_ideals)?;
    tables.minimal_ample_containing(u)
}

/// W, F, D_W and D_F tabulated over every ideal.
pub(crate) struct Tables {
    pub lat: IdealLattice,
    pub w: Vec<System>,
    pub f: Vec<System>,
    pub dw: Vec<System>,
    pub df: Vec<System>,
}

impl Tables {
    pub fn new(pr: &Problem, max_ideals: usize) -> Result<Self> {
        let lat = IdealLattice::new(pr.poset().clone(), max_ideals)?;
        let eval = |cf: &crate::ChoiceFunction| -> Result<Vec<System>> {
            lat.ideals().iter().map(|&a| cf.choose(a)).collect()
        };
        let desire = |cf: &crate::ChoiceFunction| -> Result<Vec<System>> {
            lat.ideals().iter().map(|&a| cf.desirability(a)).collect()
        };
        let (w, f) = (eval(pr.worker())?, eval(pr.firm())?);
        let (dw, df) = (desire(pr.worker())?, desire(pr.firm())?);
        Ok(Tables { lat, w, f, dw, df })
    }

    pub fn pos(&self, s: System) -> usize {
        self.lat.pos(s)
    }

    pub fn w_of(&self, s: System) -> System {
        self.w[self.pos(s)]
    }

    pub fn f_of(&self, s: System) -> System {
        self.f[self.pos(s)]
    }

    pub fn df_of(&self, s: System) -> System {
        self.df[self.pos(s)]
    }

    pub fn dw_of(&self, s: System) -> System {
        self.dw[self.pos(s)]
    }

    pub fn is_stable(&self, s: System) -> bool {
        self.df_of(s).intersection(self.dw_of(s)) == s
    }

    pub fn is_neat(&self, s: System) -> bool {
        self.df_of(self.w_of(s)) == s
    }

    pub fn is_ample(&self, s: System) -> bool {
        self.df_of(self.w_of(s)).is_subset(s)
    }

    pub fn is_quasi_stable(&self, s: System) -> bool {
        s.is_subset(self.w_of(self.df_of(s)))
    }

    /// A ⪯_W B
    pub fn blair_w(&self, a: System, b: System) -> bool {
        self.w_of(a.union(b)).is_subset(b)
    }

    /// A ⪯_F B
    pub fn blair_f(&self, a: System, b: System) -> bool {
        self.f_of(a.union(b)).is_subset(b)
    }

    pub fn class(&self, pred: impl Fn(&Self, System) -> bool) -> Vec<System> {
        self.lat
            .ideals()
            .iter()
            .copied()
            .filter(|&s| pred(self, s))
            .collect()
    }

    pub fn minimal_ample_containing(&self, u: System) -> Result<MinimalAmple> {
        let system = self
            .lat
            .ideals()
            .iter()
            .copied()
            .filter(|&b| u.is_subset(b) && self.is_ample(b))
            .reduce(System::intersection)
            .ok_or_else(|| Error::InternalInvariant("no ample system contains the seed".into()))?;
        if !self.is_ample(system) || !u.is_subset(system) {
            return Err(Error::InternalInvariant(
                "intersection of ample systems is not ample".into(),
            ));
        }
        Ok(MinimalAmple {
            system,
            core: self.w_of(system),
        })
    }
}
