use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of player indices, stored as a bitmask (at most 64 players).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct Coalition(u64);

pub const MAX_PLAYERS: usize = 64;

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_PLAYERS);
        Coalition(1 << i)
    }

    pub fn grand(n: usize) -> Self {
        assert!(n <= MAX_PLAYERS);
        if n == MAX_PLAYERS {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut bits = 0u64;
        for i in members {
            assert!(i < MAX_PLAYERS);
            bits |= 1 << i;
        }
        Coalition(bits)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_PLAYERS && self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn with(self, i: usize) -> Self {
        Coalition(self.0 | (1 << i))
    }

    pub fn union(self, other: Coalition) -> Self {
        Coalition(self.0 | other.0)
    }

    pub fn is_subset(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_PLAYERS).filter(move |i| bits & (1 << i) != 0)
    }

    /// All nonempty coalitions over `n` players, ordered by size and then
    /// lexicographically by member list.
    pub fn all_nonempty(n: usize) -> Vec<Coalition> {
        assert!(n < MAX_PLAYERS, "too many players to enumerate coalitions");
        let mut all: Vec<Coalition> = (1..(1u64 << n)).map(Coalition).collect();
        all.sort_by(|a, b| {
            a.len()
                .cmp(&b.len())
                .then_with(|| a.members().cmp(b.members()))
        });
        all
    }
}

impl From<Coalition> for Vec<usize> {
    fn from(c: Coalition) -> Self {
        c.members().collect()
    }
}

impl TryFrom<Vec<usize>> for Coalition {
    type Error = String;

    fn try_from(members: Vec<usize>) -> Result<Self, Self::Error> {
        if let Some(&bad) = members.iter().find(|&&i| i >= MAX_PLAYERS) {
            return Err(format!("player index {bad} exceeds {MAX_PLAYERS}"));
        }
        Ok(Coalition::from_members(members))
    }
}

/// Printed with 1-based player numbers, e.g. `{1,2}`.
impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_size_then_lex() {
        let all = Coalition::all_nonempty(3);
        let shown: Vec<String> = all.iter().map(|c| c.to_string()).collect();
        assert_eq!(
            shown,
            ["{1}", "{2}", "{3}", "{1,2}", "{1,3}", "{2,3}", "{1,2,3}"]
        );
    }

    #[test]
    fn serde_uses_member_list() {
        let c = Coalition::from_members([0, 2]);
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, "[0,2]");
        let back: Coalition = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<Coalition>("[70]").is_err());
    }
}
