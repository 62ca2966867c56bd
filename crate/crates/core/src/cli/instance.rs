//! The JSON instance format and its conversion to and from [`Problem`].
//!
//! ```json
//! {
//!   "elements": ["a", "b"],
//!   "covers": [],
//!   "worker": {"family": "quota", "params": {"priority": ["a", "b"], "quota": 1}},
//!   "firm": {"family": "table", "params": [{"ideal": [], "choice": []}, ...]}
//! }
//! ```
//!
//! Table params are either a complete list of entries or
//! `{"entries": [...], "default": "identity" | "empty"}`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::de::value::{MapAccessDeserializer, SeqAccessDeserializer};
use serde::de::{Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::choice::{ChoiceFunction, Family, TableOptions};
use crate::error::Error;
use crate::poset::Poset;
use crate::stability::Problem;
use crate::system::System;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub elements: Vec<String>,
    /// `[lower, upper]` pairs; empty means the discrete order.
    #[serde(default)]
    pub covers: Vec<(String, String)>,
    pub worker: ChoiceSpec,
    pub firm: ChoiceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "family",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum ChoiceSpec {
    Table(TableParams),
    Quota(QuotaParams),
    Aggregate(AggregateParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableParams {
    pub entries: Vec<TableEntry>,
    /// Value for ideals without an entry. `None` requires a complete table.
    pub default: Option<TableDefault>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub ideal: Vec<String>,
    pub choice: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableDefault {
    Identity,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotaParams {
    pub priority: Vec<String>,
    pub quota: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregateParams {
    pub parts: Vec<Vec<String>>,
    pub children: Vec<ChoiceSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultedTable {
    entries: Vec<TableEntry>,
    default: TableDefault,
}

impl Serialize for TableParams {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.default {
            None => self.entries.serialize(s),
            Some(default) => DefaultedTable {
                entries: self.entries.clone(),
                default,
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for TableParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;

        impl<'de> Visitor<'de> for V {
            type Value = TableParams;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of table entries or an object with `entries` and `default`")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, seq: A) -> Result<TableParams, A::Error> {
                let entries = Vec::deserialize(SeqAccessDeserializer::new(seq))?;
                Ok(TableParams {
                    entries,
                    default: None,
                })
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<TableParams, A::Error> {
                let t = DefaultedTable::deserialize(MapAccessDeserializer::new(map))?;
                Ok(TableParams {
                    entries: t.entries,
                    default: Some(t.default),
                })
            }
        }

        d.deserialize_any(V)
    }
}

/// A failure to turn a document into a [`Problem`], located by a path
/// such as `worker.params.children[1].params.priority`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid { path: String, source: Error },
}

impl InstanceError {
    fn invalid(path: impl Into<String>) -> impl FnOnce(Error) -> InstanceError {
        let path = path.into();
        move |source| InstanceError::Invalid { path, source }
    }

    /// The underlying domain error, if the document was well-formed JSON.
    pub fn domain(&self) -> Option<&Error> {
        match self {
            InstanceError::Syntax { .. } => None,
            InstanceError::Invalid { source, .. } => Some(source),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    /// Reject tables that fail validation and require both functions to be
    /// known Plott functions.
    pub strict: bool,
    pub max_ideals: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            strict: true,
            max_ideals: crate::DEFAULT_MAX_IDEALS,
        }
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile =
            serde_path_to_error::deserialize(de).map_err(|e| InstanceError::Syntax {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Builds the poset and both choice functions.
    pub fn build(&self, opts: LoadOptions) -> Result<Problem, InstanceError> {
        let poset = Arc::new(
            Poset::new(&self.elements, &self.covers).map_err(InstanceError::invalid("elements"))?,
        );
        let worker = build_choice(&self.worker, &poset, "worker", opts)?;
        let firm = build_choice(&self.firm, &poset, "firm", opts)?;
        let problem = if opts.strict {
            Problem::new(worker, firm)
        } else {
            Problem::permissive(worker, firm)
        };
        problem.map_err(InstanceError::invalid("."))
    }

    /// The document describing `pr`. Tables are written out in full.
    pub fn of(pr: &Problem) -> InstanceFile {
        let p = pr.poset();
        InstanceFile {
            elements: p.elements().to_vec(),
            covers: p
                .covers()
                .into_iter()
                .map(|(lo, hi)| (p.name(lo).to_owned(), p.name(hi).to_owned()))
                .collect(),
            worker: spec_of(pr.worker()),
            firm: spec_of(pr.firm()),
        }
    }
}

/// Parses and builds in one step.
pub fn load(text: &str, opts: LoadOptions) -> Result<Problem, InstanceError> {
    InstanceFile::from_json(text)?.build(opts)
}

fn build_choice(
    spec: &ChoiceSpec,
    poset: &Arc<Poset>,
    path: &str,
    opts: LoadOptions,
) -> Result<ChoiceFunction, InstanceError> {
    match spec {
        ChoiceSpec::Quota(q) => ChoiceFunction::quota(poset.clone(), &q.priority, q.quota)
            .map_err(InstanceError::invalid(format!("{path}.params"))),
        ChoiceSpec::Table(t) => {
            let prefix = match t.default {
                None => format!("{path}.params"),
                Some(_) => format!("{path}.params.entries"),
            };
            let mut entries = Vec::with_capacity(t.entries.len());
            for (i, e) in t.entries.iter().enumerate() {
                let ideal = poset
                    .system(&e.ideal)
                    .map_err(InstanceError::invalid(format!("{prefix}[{i}].ideal")))?;
                let choice = poset
                    .system(&e.choice)
                    .map_err(InstanceError::invalid(format!("{prefix}[{i}].choice")))?;
                entries.push((ideal, choice));
            }
            if let Some(default) = t.default {
                let given: HashSet<System> = entries.iter().map(|&(k, _)| k).collect();
                let ideals = poset
                    .enumerate_ideals(opts.max_ideals)
                    .map_err(InstanceError::invalid(path))?;
                for a in ideals.into_iter().filter(|a| !given.contains(a)) {
                    let value = match default {
                        TableDefault::Identity => a,
                        TableDefault::Empty => System::EMPTY,
                    };
                    entries.push((a, value));
                }
            }
            let table_opts = TableOptions {
                validate: true,
                strict: opts.strict,
                max_ideals: opts.max_ideals,
            };
            ChoiceFunction::table(poset.clone(), entries, table_opts)
                .map_err(InstanceError::invalid(format!("{path}.params")))
        }
        ChoiceSpec::Aggregate(agg) => {
            if agg.parts.len() != agg.children.len() {
                return Err(InstanceError::invalid(format!("{path}.params"))(
                    Error::NotAPartition,
                ));
            }
            let mut masks = Vec::with_capacity(agg.parts.len());
            let mut children = Vec::with_capacity(agg.parts.len());
            for (i, (part, child)) in agg.parts.iter().zip(&agg.children).enumerate() {
                let mask = poset
                    .system(part)
                    .map_err(InstanceError::invalid(format!("{path}.params.parts[{i}]")))?;
                let sub = Arc::new(poset.induced(mask));
                children.push(build_choice(
                    child,
                    &sub,
                    &format!("{path}.params.children[{i}]"),
                    opts,
                )?);
                masks.push(mask);
            }
            ChoiceFunction::aggregate(poset.clone(), masks, children)
                .map_err(InstanceError::invalid(format!("{path}.params")))
        }
    }
}

fn spec_of(cf: &ChoiceFunction) -> ChoiceSpec {
    let p = cf.poset();
    match cf.family() {
        Family::Quota(q) => ChoiceSpec::Quota(QuotaParams {
            priority: q.priority.iter().map(|&i| p.name(i).to_owned()).collect(),
            quota: q.quota,
        }),
        Family::Table(t) => ChoiceSpec::Table(TableParams {
            entries: t
                .entries()
                .into_iter()
                .map(|(ideal, choice)| TableEntry {
                    ideal: p.names(ideal),
                    choice: p.names(choice),
                })
                .collect(),
            default: None,
        }),
        Family::Aggregate(agg) => ChoiceSpec::Aggregate(AggregateParams {
            parts: agg
                .parts()
                .iter()
                .map(|part| p.names(part.mask()))
                .collect(),
            children: agg
                .parts()
                .iter()
                .map(|part| spec_of(part.choice()))
                .collect(),
        }),
    }
}
