//! Outcome of a single verification.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// First mismatch found, in human-readable form.
    Fail(String),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn fail(msg: impl Into<String>) -> Verdict {
        Verdict::Fail(msg.into())
    }

    /// First failure, or `Pass` if there is none.
    pub fn all<I: IntoIterator<Item = Verdict>>(it: I) -> Verdict {
        for v in it {
            if !v.passed() {
                return v;
            }
        }
        Verdict::Pass
    }

    pub fn and(self, o: Verdict) -> Verdict {
        if self.passed() {
            o
        } else {
            self
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail(m) => write!(f, "fail: {m}"),
        }
    }
}
