use thiserror::Error;

use crate::choice::PlottReport;

/// A system rendered by element identifiers, for diagnostics.
pub type Names = Vec<String>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("order relation has a cycle through `{0}` and `{1}`")]
    CycleDetected(String, String),
    #[error("poset has {0} elements, at most {max} are supported", max = crate::MAX_ELEMENTS)]
    TooManyElements(usize),
    #[error("ideal count exceeds the configured cap of {cap}")]
    DomainTooLarge { cap: usize },
    #[error("{0:?} is not an ideal")]
    NotAnIdeal(Names),
    #[error("table has no entry for ideal {0:?}")]
    TableIncomplete(Names),
    #[error("table entry for {ideal:?} chooses {choice:?}, which is not a subset")]
    ValueNotSubset { ideal: Names, choice: Names },
    #[error("table entry for {ideal:?} chooses {choice:?}, which is not an ideal")]
    ValueNotIdeal { ideal: Names, choice: Names },
    #[error("duplicate table entry for ideal {0:?}")]
    DuplicateEntry(Names),
    #[error("choice function is not a Plott function")]
    PlottFailed(Box<PlottReport>),
    #[error("quota family requires a discrete poset")]
    QuotaOnNontrivialPoset,
    #[error("parts do not partition the ground set")]
    NotAPartition,
    #[error("order relation {0} <= {1} crosses parts")]
    OrderCrossesParts(String, String),
    #[error("choice functions live on different posets")]
    PosetMismatch,
    #[error("choice function has not been verified as a Plott function")]
    UncheckedChoiceFunction,
    #[error("{system:?} is not ample: D_F(W(B)) = {image:?}")]
    NotAmple { system: Names, image: Names },
    #[error("{0:?} is not stable")]
    NotStable(Names),
    #[error("family of systems is empty")]
    EmptyFamily,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
    #[error("malformed preferences: {0}")]
    MalformedPreferences(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
