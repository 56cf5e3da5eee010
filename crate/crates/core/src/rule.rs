use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::fun::rv_put_winners;
use crate::graph::MarginGraph;
use crate::oracle::{brute_force_put_until, PutRule, DEFAULT_UNIVERSE_LIMIT};
use crate::profile::AltId;
use crate::river::{ranked_pairs, river, Tiebreaker};
use crate::rules::{beat_path_winners, split_cycle_winners};

/// Every winner-set rule the engine exposes, by its command-line name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    FunPut,
    River,
    RankedPairs,
    SplitCycle,
    BeatPath,
    RvPutBrute,
    RpPutBrute,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::FunPut,
        Rule::River,
        Rule::RankedPairs,
        Rule::SplitCycle,
        Rule::BeatPath,
        Rule::RvPutBrute,
        Rule::RpPutBrute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::FunPut => "fun-put",
            Rule::River => "river",
            Rule::RankedPairs => "ranked-pairs",
            Rule::SplitCycle => "split-cycle",
            Rule::BeatPath => "beat-path",
            Rule::RvPutBrute => "rv-put-brute",
            Rule::RpPutBrute => "rp-put-brute",
        }
    }

    pub fn needs_tiebreaker(self) -> bool {
        matches!(self, Rule::River | Rule::RankedPairs)
    }

    pub fn is_brute_force(self) -> bool {
        matches!(self, Rule::RvPutBrute | Rule::RpPutBrute)
    }

    pub fn winners(self, g: &MarginGraph, opts: &RuleOptions<'_>) -> Result<BTreeSet<AltId>> {
        let tiebreaker = || {
            opts.tiebreaker
                .ok_or_else(|| Error::InvalidConfig(format!("rule `{}` needs a tiebreaker", self.name())))
        };
        match self {
            Rule::FunPut => rv_put_winners(g),
            Rule::River => Ok(BTreeSet::from([river(g, tiebreaker()?)?.winner()])),
            Rule::RankedPairs => Ok(BTreeSet::from([ranked_pairs(g, tiebreaker()?)?.winner])),
            Rule::SplitCycle => Ok(split_cycle_winners(g)),
            Rule::BeatPath => Ok(beat_path_winners(g)),
            Rule::RvPutBrute => brute_force_put_until(g, PutRule::River, opts.universe_limit, opts.deadline),
            Rule::RpPutBrute => brute_force_put_until(g, PutRule::RankedPairs, opts.universe_limit, opts.deadline),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown rule `{s}`")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RuleOptions<'a> {
    pub tiebreaker: Option<&'a Tiebreaker>,
    pub universe_limit: u64,
    pub deadline: Option<Instant>,
}

impl Default for RuleOptions<'_> {
    fn default() -> Self {
        Self {
            tiebreaker: None,
            universe_limit: DEFAULT_UNIVERSE_LIMIT,
            deadline: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        assert!("borda".parse::<Rule>().is_err());
    }

    #[test]
    fn fixed_rules_need_a_tiebreaker() {
        let g = MarginGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        assert!(matches!(
            Rule::River.winners(&g, &RuleOptions::default()),
            Err(Error::InvalidConfig(_))
        ));
        let t = Tiebreaker::canonical(&g);
        let opts = RuleOptions {
            tiebreaker: Some(&t),
            ..Default::default()
        };
        assert_eq!(Rule::River.winners(&g, &opts).unwrap(), BTreeSet::from([0]));
        assert_eq!(Rule::RankedPairs.winners(&g, &opts).unwrap(), BTreeSet::from([0]));
        for r in [
            Rule::FunPut,
            Rule::SplitCycle,
            Rule::BeatPath,
            Rule::RvPutBrute,
            Rule::RpPutBrute,
        ] {
            assert_eq!(r.winners(&g, &opts).unwrap(), BTreeSet::from([0, 1, 2]), "{r}");
        }
    }
}
