use std::fmt;

use serde::Serialize;

/// Three-valued answer to a semi-decidable question.
///
/// `Yes` and `No` carry a short description of the derivation found; `Unknown`
/// says which bound stopped the search. `Yes` and `No` never change when bounds
/// grow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "evidence")]
pub enum Verdict {
    Yes(String),
    No(String),
    Unknown(String),
}

impl Verdict {
    pub fn yes(why: impl Into<String>) -> Verdict {
        Verdict::Yes(why.into())
    }

    pub fn no(why: impl Into<String>) -> Verdict {
        Verdict::No(why.into())
    }

    pub fn unknown(why: impl Into<String>) -> Verdict {
        Verdict::Unknown(why.into())
    }

    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn evidence(&self) -> &str {
        match self {
            Verdict::Yes(s) | Verdict::No(s) | Verdict::Unknown(s) => s,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "Yes",
            Verdict::No(_) => "No",
            Verdict::Unknown(_) => "Unknown",
        }
    }

    /// Conjunction: the first `No` wins, then any `Unknown`.
    pub fn all(items: impl IntoIterator<Item = Verdict>, yes: impl Into<String>) -> Verdict {
        let mut pending = None;
        for v in items {
            match v {
                Verdict::No(_) => return v,
                Verdict::Unknown(_) => {
                    if pending.is_none() {
                        pending = Some(v);
                    }
                }
                Verdict::Yes(_) => {}
            }
        }
        pending.unwrap_or_else(|| Verdict::Yes(yes.into()))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.evidence())
    }
}
