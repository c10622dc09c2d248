use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::semantics::{Action, Marking};
use crate::syntax::Network;

/// Heuristic ordering of enabled actions during graph construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Random,
    LongestFirst,
    ShortestFirst,
    InteractionsFirst,
    ConditionalsFirst,
    UnmarkedFirst,
    UnmarkedThenInteractions,
    UnmarkedThenSelections,
    UnmarkedThenConditionals,
    UnmarkedThenRandom,
}

impl Strategy {
    pub const ALL: [Strategy; 10] = [
        Strategy::Random,
        Strategy::LongestFirst,
        Strategy::ShortestFirst,
        Strategy::InteractionsFirst,
        Strategy::ConditionalsFirst,
        Strategy::UnmarkedFirst,
        Strategy::UnmarkedThenInteractions,
        Strategy::UnmarkedThenSelections,
        Strategy::UnmarkedThenConditionals,
        Strategy::UnmarkedThenRandom,
    ];

    /// Short code: R, L, S, I, C, U, UI, US, UC, UR.
    pub fn code(self) -> &'static str {
        match self {
            Strategy::Random => "R",
            Strategy::LongestFirst => "L",
            Strategy::ShortestFirst => "S",
            Strategy::InteractionsFirst => "I",
            Strategy::ConditionalsFirst => "C",
            Strategy::UnmarkedFirst => "U",
            Strategy::UnmarkedThenInteractions => "UI",
            Strategy::UnmarkedThenSelections => "US",
            Strategy::UnmarkedThenConditionals => "UC",
            Strategy::UnmarkedThenRandom => "UR",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Strategy::Random | Strategy::UnmarkedThenRandom)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy `{0}` (expected one of R, L, S, I, C, U, UI, US, UC, UR)")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.code().eq_ignore_ascii_case(s) || format!("{st:?}").eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

fn kind_rank(a: &Action) -> u8 {
    match a {
        Action::Selection { .. } => 0,
        Action::Communication { .. } => 1,
        Action::Conditional { .. } => 2,
    }
}

fn unmarked(a: &Action, m: &Marking) -> usize {
    a.processes().into_iter().filter(|p| !m.is_marked(p)).count()
}

fn term_size(a: &Action, n: &Network) -> usize {
    a.processes().into_iter().filter_map(|p| n.get(p)).map(|t| t.size()).sum()
}

/// Stable sort of `actions` by the strategy's key. Randomized strategies
/// draw from `rng`.
pub fn sort_actions(
    actions: &mut [Action],
    strategy: Strategy,
    network: &Network,
    marking: &Marking,
    rng: &mut impl Rng,
) {
    let interaction = |a: &Action| u8::from(!a.is_interaction());
    match strategy {
        Strategy::Random => actions.shuffle(rng),
        Strategy::LongestFirst => actions.sort_by_cached_key(|a| std::cmp::Reverse(term_size(a, network))),
        Strategy::ShortestFirst => actions.sort_by_cached_key(|a| term_size(a, network)),
        Strategy::InteractionsFirst => actions.sort_by_key(interaction),
        Strategy::ConditionalsFirst => actions.sort_by_key(|a| u8::from(a.is_interaction())),
        Strategy::UnmarkedFirst => actions.sort_by_key(|a| std::cmp::Reverse(unmarked(a, marking))),
        Strategy::UnmarkedThenInteractions => {
            actions.sort_by_key(|a| (std::cmp::Reverse(unmarked(a, marking)), interaction(a)))
        }
        Strategy::UnmarkedThenSelections => {
            actions.sort_by_key(|a| (std::cmp::Reverse(unmarked(a, marking)), kind_rank(a)))
        }
        Strategy::UnmarkedThenConditionals => {
            actions.sort_by_key(|a| (std::cmp::Reverse(unmarked(a, marking)), u8::from(a.is_interaction())))
        }
        Strategy::UnmarkedThenRandom => {
            actions.shuffle(rng);
            actions.sort_by_key(|a| std::cmp::Reverse(unmarked(a, marking)));
        }
    }
}
