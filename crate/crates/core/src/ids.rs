//! Wikidata-style identifiers.
//!
//! Entity and property ids are stored by their numeric part so they are
//! `Copy`, cheap to index, and order by number (`Q9 < Q10`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {kind} id `{raw}`: expected `{prefix}` followed by decimal digits")]
pub struct IdError {
    pub kind: &'static str,
    pub prefix: char,
    pub raw: String,
}

fn parse_numeric(raw: &str, prefix: char, kind: &'static str) -> Result<u64, IdError> {
    let err = || IdError {
        kind,
        prefix,
        raw: raw.to_string(),
    };
    let digits = raw.strip_prefix(prefix).ok_or_else(err)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    // leading zeros would not survive a round trip through the numeric form
    if digits.len() > 1 && digits.starts_with('0') {
        return Err(err());
    }
    digits.parse().map_err(|_| err())
}

/// An entity id such as `Q650855`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u64);

/// A class id: an entity used as the object of a `P31` triple.
pub type TypeId = EntityId;

/// A property id such as `P1923`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropertyId(pub u64);

/// `instance of`.
pub const P31: PropertyId = PropertyId(31);

impl EntityId {
    pub fn parse(raw: &str) -> Result<Self, IdError> {
        parse_numeric(raw, 'Q', "entity").map(EntityId)
    }
}

impl PropertyId {
    pub fn parse(raw: &str) -> Result<Self, IdError> {
        parse_numeric(raw, 'P', "property").map(PropertyId)
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl FromStr for EntityId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl FromStr for PropertyId {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                <$ty>::parse(&raw).map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(EntityId);
string_serde!(PropertyId);

/// Either kind of KG symbol; used where labels of both live in one map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Entity(EntityId),
    Property(PropertyId),
}

impl Symbol {
    pub fn parse(raw: &str) -> Result<Self, IdError> {
        if raw.starts_with('P') {
            PropertyId::parse(raw).map(Symbol::Property)
        } else {
            EntityId::parse(raw).map(Symbol::Entity)
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Entity(e) => e.fmt(f),
            Symbol::Property(p) => p.fmt(f),
        }
    }
}

impl From<EntityId> for Symbol {
    fn from(e: EntityId) -> Self {
        Symbol::Entity(e)
    }
}

impl From<PropertyId> for Symbol {
    fn from(p: PropertyId) -> Self {
        Symbol::Property(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        let e = EntityId::parse("Q650855").unwrap();
        assert_eq!(e.0, 650855);
        assert_eq!(e.to_string(), "Q650855");
        assert_eq!(PropertyId::parse("P1923").unwrap().to_string(), "P1923");
        assert_eq!(Symbol::parse("P31").unwrap(), Symbol::Property(P31));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "Q", "P12", "Qx1", "Q01", "q5", "Q5 "] {
            assert!(EntityId::parse(bad).is_err(), "{bad}");
        }
        assert!(PropertyId::parse("Q5").is_err());
    }

    #[test]
    fn orders_numerically() {
        assert!(EntityId::parse("Q653772").unwrap() < EntityId::parse("Q7199360").unwrap());
        assert!(EntityId(9) < EntityId(10));
    }
}
