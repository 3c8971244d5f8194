//! Three-valued verdicts with evidence.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Truth {
    Holds,
    Fails,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::Holds
        } else {
            Truth::Fails
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        use Truth::*;
        match (self, other) {
            (Fails, _) | (_, Fails) => Fails,
            (Holds, Holds) => Holds,
            _ => Unknown,
        }
    }

    pub fn or(self, other: Truth) -> Truth {
        use Truth::*;
        match (self, other) {
            (Holds, _) | (_, Holds) => Holds,
            (Fails, Fails) => Fails,
            _ => Unknown,
        }
    }

    pub fn not(self) -> Truth {
        match self {
            Truth::Holds => Truth::Fails,
            Truth::Fails => Truth::Holds,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn is_definitive(self) -> bool {
        self != Truth::Unknown
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::Holds => "Holds",
            Truth::Fails => "Fails",
            Truth::Unknown => "Unknown",
        })
    }
}

/// One checkpoint of a numeric trail: an exact value and its rendering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrailPoint {
    pub n: u64,
    pub count: u64,
    pub value: String,
    pub approx: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub value: Truth,
    pub rule: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trail: Vec<TrailPoint>,
}

impl Verdict {
    pub fn new(value: Truth, rule: impl Into<String>) -> Verdict {
        Verdict { value, rule: rule.into(), notes: Vec::new(), trail: Vec::new() }
    }

    pub fn holds(rule: impl Into<String>) -> Verdict {
        Self::new(Truth::Holds, rule)
    }

    pub fn fails(rule: impl Into<String>) -> Verdict {
        Self::new(Truth::Fails, rule)
    }

    pub fn unknown(rule: impl Into<String>) -> Verdict {
        Self::new(Truth::Unknown, rule)
    }

    pub fn note(mut self, note: impl Into<String>) -> Verdict {
        self.notes.push(note.into());
        self
    }

    pub fn with_trail(mut self, trail: Vec<TrailPoint>) -> Verdict {
        self.trail = trail;
        self
    }

    pub fn is(&self, t: Truth) -> bool {
        self.value == t
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.value, self.rule)
    }
}

#[cfg(test)]
mod tests {
    use super::Truth::*;

    #[test]
    fn kleene_tables() {
        assert_eq!(Holds.and(Unknown), Unknown);
        assert_eq!(Fails.and(Unknown), Fails);
        assert_eq!(Holds.or(Unknown), Holds);
        assert_eq!(Fails.or(Unknown), Unknown);
        assert_eq!(Unknown.not(), Unknown);
    }
}
