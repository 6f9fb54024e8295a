use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

/// Token distribution over places.
///
/// The representation is sparse: places that are absent hold zero tokens and
/// zero counts are never stored, so two markings compare equal exactly when
/// their nonzero counts agree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Marking {
    tokens: BTreeMap<String, u32>,
}

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    /// A marking with a single token on `place`.
    pub fn single(place: impl Into<String>) -> Self {
        let mut m = Self::new();
        m.set(place, 1);
        m
    }

    pub fn get(&self, place: &str) -> u32 {
        self.tokens.get(place).copied().unwrap_or(0)
    }

    pub fn set(&mut self, place: impl Into<String>, count: u32) {
        let place = place.into();
        if count == 0 {
            self.tokens.remove(&place);
        } else {
            self.tokens.insert(place, count);
        }
    }

    pub fn add(&mut self, place: &str, count: u32) {
        let current = self.get(place);
        self.set(place, current + count);
    }

    /// Removes `count` tokens from `place`. Returns `false` and leaves the
    /// marking untouched if the place holds fewer tokens.
    pub fn remove(&mut self, place: &str, count: u32) -> bool {
        let current = self.get(place);
        if current < count {
            return false;
        }
        self.set(place, current - count);
        true
    }

    /// Places holding at least one token, in id order.
    pub fn marked_places(&self) -> impl Iterator<Item = (&str, u32)> {
        self.tokens.iter().map(|(p, n)| (p.as_str(), *n))
    }

    pub fn total_tokens(&self) -> u64 {
        self.tokens.values().map(|&n| u64::from(n)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, u32)> for Marking {
    fn from_iter<I: IntoIterator<Item = (S, u32)>>(iter: I) -> Self {
        let mut m = Marking::new();
        for (place, count) in iter {
            let place = place.into();
            let current = m.get(&place);
            m.set(place, current + count);
        }
        m
    }
}

impl<'de> Deserialize<'de> for Marking {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, u32>::deserialize(deserializer)?;
        Ok(raw.into_iter().collect())
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (place, count)) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{place}:{count}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_zeros_do_not_affect_equality() {
        let a: Marking = [("p1", 1), ("p2", 0)].into_iter().collect();
        let b = Marking::single("p1");
        assert_eq!(a, b);
        assert_eq!(a.get("p2"), 0);
    }

    #[test]
    fn remove_refuses_to_go_negative() {
        let mut m = Marking::single("p");
        assert!(!m.remove("p", 2));
        assert_eq!(m, Marking::single("p"));
        assert!(m.remove("p", 1));
        assert!(m.is_empty());
    }

    #[test]
    fn deserializing_drops_zero_counts() {
        let m: Marking = serde_json::from_str(r#"{"a":0,"b":2}"#).unwrap();
        assert_eq!(m.to_string(), "{b:2}");
    }
}
