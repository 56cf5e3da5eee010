//! Preference profiles: strict linear orders with integer multiplicities.
//!
//! Two text formats are understood. The native format has one ballot per line
//! (`a,b,c`) or a counted ballot (`3: a,b,c`); `#` starts a comment line. The
//! PrefLib `.soc` reader accepts `count: i1,i2,...` data lines with 1-based
//! alternative ids and picks up names from `# ALTERNATIVE NAME i: ...` headers.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::MarginGraph;

/// Dense alternative index in `0..m`.
pub type AltId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub id: AltId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub multiplicity: u64,
    /// Alternatives from most to least preferred.
    pub ranking: Vec<AltId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceProfile {
    alternatives: Vec<Alternative>,
    ballots: Vec<Ballot>,
}

impl PreferenceProfile {
    /// Builds a profile from names and ballots, checking every invariant.
    pub fn new(names: Vec<String>, ballots: Vec<Ballot>) -> Result<Self> {
        let m = names.len();
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            check_name(name, 0)?;
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::DuplicateAlternativeInRanking {
                    line: 0,
                    name: name.clone(),
                });
            }
        }
        if ballots.is_empty() {
            return Err(Error::EmptyProfile);
        }
        for (b, ballot) in ballots.iter().enumerate() {
            if ballot.multiplicity == 0 {
                return Err(Error::MalformedLine {
                    line: b + 1,
                    reason: "multiplicity must be positive".into(),
                });
            }
            let mut present = vec![false; m];
            for &id in &ballot.ranking {
                if id >= m {
                    return Err(Error::AlternativeOutOfRange(id));
                }
                if std::mem::replace(&mut present[id], true) {
                    return Err(Error::DuplicateAlternativeInRanking {
                        line: b + 1,
                        name: names[id].clone(),
                    });
                }
            }
            if ballot.ranking.len() != m {
                return Err(Error::IncompleteRanking { line: b + 1 });
            }
        }
        let alternatives = names
            .into_iter()
            .enumerate()
            .map(|(id, name)| Alternative { id, name })
            .collect();
        Ok(Self { alternatives, ballots })
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn names(&self) -> Vec<String> {
        self.alternatives.iter().map(|a| a.name.clone()).collect()
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    /// Number of alternatives.
    pub fn m(&self) -> usize {
        self.alternatives.len()
    }

    /// Total number of voters, counting multiplicities.
    pub fn voters(&self) -> u64 {
        self.ballots.iter().map(|b| b.multiplicity).sum()
    }

    pub fn id_of(&self, name: &str) -> Option<AltId> {
        self.alternatives.iter().find(|a| a.name == name).map(|a| a.id)
    }

    /// Multiplicity-weighted pairwise margins.
    pub fn margins(&self) -> MarginGraph {
        let m = self.m();
        // position[x] = rank of x on the current ballot
        let mut position = vec![0usize; m];
        let mut margin = vec![0i64; m * m];
        for ballot in &self.ballots {
            for (rank, &alt) in ballot.ranking.iter().enumerate() {
                position[alt] = rank;
            }
            let w = ballot.multiplicity as i64;
            for x in 0..m {
                for y in 0..m {
                    if x != y && position[x] < position[y] {
                        margin[x * m + y] += w;
                        margin[y * m + x] -= w;
                    }
                }
            }
        }
        MarginGraph::from_matrix(self.names(), margin).expect("profile margins are antisymmetric")
    }

    /// Serializes into the native profile format. For parsed profiles,
    /// parsing the output yields an identical profile.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ballot in &self.ballots {
            if ballot.multiplicity != 1 {
                let _ = write!(out, "{}: ", ballot.multiplicity);
            }
            let names: Vec<&str> = ballot
                .ranking
                .iter()
                .map(|&id| self.alternatives[id].name.as_str())
                .collect();
            out.push_str(&names.join(","));
            out.push('\n');
        }
        out
    }
}

fn check_name(name: &str, line: usize) -> Result<()> {
    if name.trim().is_empty() {
        return Err(Error::MalformedLine {
            line,
            reason: "empty alternative name".into(),
        });
    }
    if name.contains(',') {
        return Err(Error::MalformedLine {
            line,
            reason: format!("alternative name `{name}` contains a comma"),
        });
    }
    Ok(())
}

fn split_multiplicity(line: &str, lineno: usize) -> Result<(u64, &str)> {
    match line.split_once(':') {
        Some((count, rest)) => {
            let count = count.trim();
            let k: u64 = count.parse().map_err(|_| Error::MalformedLine {
                line: lineno,
                reason: format!("`{count}` is not a positive integer multiplicity"),
            })?;
            if k == 0 {
                return Err(Error::MalformedLine {
                    line: lineno,
                    reason: "multiplicity must be positive".into(),
                });
            }
            Ok((k, rest))
        }
        None => Ok((1, line)),
    }
}

/// Parses the native profile format.
pub fn parse_profile(text: &str) -> Result<PreferenceProfile> {
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, AltId> = HashMap::new();
    let mut ballots = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (multiplicity, rest) = split_multiplicity(line, lineno)?;
        let tokens: Vec<&str> = rest.split(',').map(str::trim).collect();
        for t in &tokens {
            check_name(t, lineno)?;
        }

        let first = names.is_empty();
        let mut ranking = Vec::with_capacity(tokens.len());
        let mut present = vec![false; if first { tokens.len() } else { names.len() }];
        for t in tokens {
            let id = if first {
                match index.get(t) {
                    Some(&id) => id,
                    None => {
                        index.insert(t.to_string(), names.len());
                        names.push(t.to_string());
                        names.len() - 1
                    }
                }
            } else {
                *index.get(t).ok_or_else(|| Error::UnknownAlternative {
                    line: lineno,
                    name: t.to_string(),
                })?
            };
            if std::mem::replace(&mut present[id], true) {
                return Err(Error::DuplicateAlternativeInRanking {
                    line: lineno,
                    name: t.to_string(),
                });
            }
            ranking.push(id);
        }
        if ranking.len() != names.len() {
            return Err(Error::IncompleteRanking { line: lineno });
        }
        ballots.push(Ballot { multiplicity, ranking });
    }

    if ballots.is_empty() {
        return Err(Error::EmptyProfile);
    }
    PreferenceProfile::new(names, ballots)
}

/// Reads a PrefLib strict-complete-order (`.soc`) file.
pub fn parse_soc(text: &str) -> Result<PreferenceProfile> {
    let mut declared_m: Option<usize> = None;
    let mut header_names: HashMap<usize, String> = HashMap::new();
    let mut rows: Vec<(usize, u64, Vec<usize>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            let header = header.trim();
            if let Some(v) = header.strip_prefix("NUMBER ALTERNATIVES:") {
                declared_m = v.trim().parse().ok();
            } else if let Some(v) = header.strip_prefix("ALTERNATIVE NAME") {
                if let Some((id, name)) = v.split_once(':') {
                    if let Ok(id) = id.trim().parse::<usize>() {
                        header_names.insert(id, name.trim().to_string());
                    }
                }
            }
            continue;
        }
        let (count, rest) = line.split_once(':').ok_or_else(|| Error::MalformedLine {
            line: lineno,
            reason: "expected `count: i1,i2,...`".into(),
        })?;
        let count: u64 = count.trim().parse().map_err(|_| Error::MalformedLine {
            line: lineno,
            reason: format!("`{}` is not a count", count.trim()),
        })?;
        if count == 0 {
            continue;
        }
        let ids = rest
            .split(',')
            .map(|t| {
                let t = t.trim();
                match t.parse::<usize>() {
                    Ok(id) if id >= 1 => Ok(id),
                    _ => Err(Error::MalformedLine {
                        line: lineno,
                        reason: format!("`{t}` is not a 1-based alternative id"),
                    }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((lineno, count, ids));
    }

    let m = match declared_m {
        Some(m) => m,
        None => rows.first().map(|r| r.2.len()).ok_or(Error::EmptyProfile)?,
    };
    let names: Vec<String> = (1..=m)
        .map(|id| header_names.get(&id).cloned().unwrap_or_else(|| id.to_string()))
        .collect();

    let mut ballots = Vec::with_capacity(rows.len());
    for (lineno, count, ids) in rows {
        let mut present = vec![false; m];
        let mut ranking = Vec::with_capacity(m);
        for id in ids {
            if id > m {
                return Err(Error::UnknownAlternative {
                    line: lineno,
                    name: id.to_string(),
                });
            }
            if std::mem::replace(&mut present[id - 1], true) {
                return Err(Error::DuplicateAlternativeInRanking {
                    line: lineno,
                    name: names[id - 1].clone(),
                });
            }
            ranking.push(id - 1);
        }
        if ranking.len() != m {
            return Err(Error::IncompleteRanking { line: lineno });
        }
        ballots.push(Ballot {
            multiplicity: count,
            ranking,
        });
    }
    PreferenceProfile::new(names, ballots)
}

/// Default display names `a, b, ..., z, aa, ab, ...` for `m` alternatives.
pub fn default_names(m: usize) -> Vec<String> {
    (0..m)
        .map(|mut i| {
            let mut chars = Vec::new();
            loop {
                chars.push((b'a' + (i % 26) as u8) as char);
                if i < 26 {
                    break;
                }
                i = i / 26 - 1;
            }
            chars.iter().rev().collect()
        })
        .collect()
}
