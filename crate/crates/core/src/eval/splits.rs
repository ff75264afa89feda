//! Query-based train/valid/test splits.
//!
//! A conversation with any turn of a held-out sub-type goes to test as a
//! whole, so no earlier turn of it leaks into training as context. The
//! rest is shuffled with a seeded ChaCha stream and cut by ratio.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::templates::{template_for, CatalogError, Conversation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitSpec {
    pub name: String,
    /// Canonical catalog names.
    pub held_out: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("split spec `{0}` holds out nothing")]
    EmptySpec(String),
    #[error("unknown split spec `{0}`: expected CountLogic, UnionMulti or Verify3")]
    UnknownSpec(String),
    #[error(transparent)]
    UnknownSubType(#[from] CatalogError),
    #[error("held-out sub-type `{0}` does not occur in the dataset")]
    Absent(String),
    #[error("split ratios must be finite, non-negative and not all zero")]
    Ratios,
}

impl SplitSpec {
    /// A spec over catalog names or aliases; every name must resolve.
    pub fn new<S: AsRef<str>>(name: &str, held_out: &[S]) -> Result<SplitSpec, SplitError> {
        if held_out.is_empty() {
            return Err(SplitError::EmptySpec(name.to_string()));
        }
        let held_out = held_out
            .iter()
            .map(|n| template_for(n.as_ref()).map(|s| s.name.to_string()))
            .collect::<Result<_, _>>()?;
        Ok(SplitSpec {
            name: name.to_string(),
            held_out,
        })
    }

    pub fn count_logic() -> SplitSpec {
        Self::new("CountLogic", &["Count | Logical operators", "Count | Logical operators (Coreference)"]).expect("catalog names")
    }

    pub fn union_multi() -> SplitSpec {
        Self::new("UnionMulti", &["Union | Multiple Relation"]).expect("catalog names")
    }

    pub fn verify3() -> SplitSpec {
        Self::new(
            "Verify3",
            &[
                "3 entities, 2 direct, 2(direct) are query entities, subject is indirect",
                "3 entities, all direct, 2 are query entities",
            ],
        )
        .expect("catalog names")
    }

    pub fn builtins() -> [SplitSpec; 3] {
        [Self::count_logic(), Self::union_multi(), Self::verify3()]
    }

    /// A built-in spec by name, case-insensitively.
    pub fn builtin(name: &str) -> Result<SplitSpec, SplitError> {
        Self::builtins()
            .into_iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| SplitError::UnknownSpec(name.to_string()))
    }

    /// Held-out sub-types among the conversation's annotated turns.
    pub fn hits<'a>(&'a self, c: &'a Conversation) -> impl Iterator<Item = &'static str> + 'a {
        c.turns
            .iter()
            .filter_map(|t| t.annotation.as_ref())
            .filter_map(|a| a.sub_type_entry().ok())
            .map(|s| s.name)
            .filter(|n| self.held_out.contains(*n))
    }

    pub fn touches(&self, c: &Conversation) -> bool {
        self.hits(c).next().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Splits {
    pub train: Vec<Conversation>,
    pub valid: Vec<Conversation>,
    pub test: Vec<Conversation>,
}

/// Conversation ids per partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitManifest {
    pub spec: SplitSpec,
    pub seed: u64,
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
}

impl Splits {
    pub fn manifest(&self, spec: &SplitSpec, seed: u64) -> SplitManifest {
        let ids = |v: &[Conversation]| v.iter().map(|c| c.id.clone()).collect();
        SplitManifest {
            spec: spec.clone(),
            seed,
            train: ids(&self.train),
            valid: ids(&self.valid),
            test: ids(&self.test),
        }
    }
}

/// Hold out every conversation touching `spec`, then split the rest.
pub fn make_splits(dataset: &[Conversation], spec: &SplitSpec, ratios: Ratios, seed: u64) -> Result<Splits, SplitError> {
    let Ratios { train, valid, test } = ratios;
    let total = train + valid + test;
    if [train, valid, test].iter().any(|r| !r.is_finite() || *r < 0.0) || total <= 0.0 {
        return Err(SplitError::Ratios);
    }
    if spec.held_out.is_empty() {
        return Err(SplitError::EmptySpec(spec.name.clone()));
    }
    for name in &spec.held_out {
        template_for(name)?;
    }
    let seen: BTreeSet<&str> = dataset.iter().flat_map(|c| spec.hits(c)).collect();
    if let Some(missing) = spec.held_out.iter().find(|n| !seen.contains(n.as_str())) {
        return Err(SplitError::Absent(missing.clone()));
    }

    let (mut held, mut rest): (Vec<&Conversation>, Vec<&Conversation>) = dataset.iter().partition(|c| spec.touches(c));
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n = rest.len() as f64;
    let n_train = ((n * train / total).round() as usize).min(rest.len());
    let n_valid = ((n * valid / total).round() as usize).min(rest.len() - n_train);
    let mut out = Splits::default();
    let mut it = rest.into_iter();
    out.train = it.by_ref().take(n_train).cloned().collect();
    out.valid = it.by_ref().take(n_valid).cloned().collect();
    held.extend(it);
    out.test = held.into_iter().cloned().collect();
    Ok(out)
}
