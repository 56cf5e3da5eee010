//! Mallows-model election generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::MarginGraph;
use crate::profile::{default_names, AltId, Ballot, PreferenceProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct MallowsConfig {
    pub m: usize,
    pub n: usize,
    /// Dispersion in `(0, 1]`; 1 is the uniform distribution.
    pub phi: f64,
    pub seed: u64,
    /// Central ranking; the identity when absent.
    pub reference: Option<Vec<AltId>>,
}

impl MallowsConfig {
    pub fn new(m: usize, n: usize, phi: f64, seed: u64) -> Self {
        Self {
            m,
            n,
            phi,
            seed,
            reference: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidConfig("need at least one alternative".into()));
        }
        if self.n < 1 {
            return Err(Error::InvalidConfig("need at least one voter".into()));
        }
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "phi must lie in (0, 1], got {}",
                self.phi
            )));
        }
        if let Some(r) = &self.reference {
            let mut seen = vec![false; self.m];
            if r.len() != self.m || r.iter().any(|&a| a >= self.m || std::mem::replace(&mut seen[a], true)) {
                return Err(Error::InvalidConfig(
                    "reference is not a permutation of the alternatives".into(),
                ));
            }
        }
        Ok(())
    }

    fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// Draws one ranking by repeated insertion: the `i`-th reference item goes to
/// position `j ∈ 0..=i` with probability proportional to `phi^(i - j)`.
fn insertion_ranking<R: Rng>(rng: &mut R, reference: &[AltId], phi: f64, weights: &mut Vec<f64>) -> Vec<AltId> {
    let mut ranking: Vec<AltId> = Vec::with_capacity(reference.len());
    for (i, &item) in reference.iter().enumerate() {
        weights.clear();
        // weights[j] = phi^(i - j), built from the back
        let mut w = 1.0;
        weights.resize(i + 1, 0.0);
        for j in (0..=i).rev() {
            weights[j] = w;
            w *= phi;
        }
        let total: f64 = weights.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut pos = i;
        for (j, &wj) in weights.iter().enumerate() {
            if u < wj {
                pos = j;
                break;
            }
            u -= wj;
        }
        ranking.insert(pos, item);
    }
    ranking
}

/// Samples `n` independent Mallows rankings; deterministic in the seed.
pub fn mallows_sample(cfg: &MallowsConfig) -> Result<PreferenceProfile> {
    cfg.validate()?;
    let reference: Vec<AltId> = cfg.reference.clone().unwrap_or_else(|| (0..cfg.m).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = Vec::with_capacity(cfg.m);
    let ballots = (0..cfg.n)
        .map(|_| Ballot {
            multiplicity: 1,
            ranking: insertion_ranking(&mut rng, &reference, cfg.phi, &mut weights),
        })
        .collect();
    PreferenceProfile::new(default_names(cfg.m), ballots)
}

/// Rejection-samples until `accept` holds for the margin graph; attempt `t`
/// uses seed `cfg.seed + t`. Returns the profile and the seed that produced it.
pub fn generate_where(
    cfg: &MallowsConfig,
    max_attempts: usize,
    mut accept: impl FnMut(&MarginGraph) -> bool,
) -> Result<(PreferenceProfile, u64)> {
    if max_attempts == 0 {
        return Err(Error::InvalidConfig("max_attempts must be at least 1".into()));
    }
    cfg.validate()?;
    for attempt in 0..max_attempts as u64 {
        let seed = cfg.seed.wrapping_add(attempt);
        let profile = mallows_sample(&cfg.with_seed(seed))?;
        if accept(&profile.margins()) {
            return Ok((profile, seed));
        }
    }
    Err(Error::AttemptsExhausted(max_attempts))
}

/// A profile whose margin graph has no Condorcet winner.
pub fn generate_no_condorcet(cfg: &MallowsConfig, max_attempts: usize) -> Result<PreferenceProfile> {
    generate_where(cfg, max_attempts, |g| g.condorcet_winner().is_none()).map(|(p, _)| p)
}

/// Expected number of discordant pairs with the reference under Mallows(`phi`).
pub fn expected_swaps(m: usize, phi: f64) -> f64 {
    // the i-th insertion adds k ∈ 0..i inversions with probability ∝ phi^k
    (1..=m)
        .map(|i| {
            let (mut num, mut den, mut w) = (0.0, 0.0, 1.0);
            for k in 0..i {
                num += k as f64 * w;
                den += w;
                w *= phi;
            }
            num / den
        })
        .sum()
}

/// Converts a normalized dispersion to raw `phi`. The normalized value is the
/// expected swap distance to the reference divided by its value under the
/// uniform distribution, `m(m-1)/4`.
pub fn phi_from_norm_phi(m: usize, norm_phi: f64) -> Result<f64> {
    if !(norm_phi > 0.0 && norm_phi <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "norm-phi must lie in (0, 1], got {norm_phi}"
        )));
    }
    if m < 2 || norm_phi == 1.0 {
        return Ok(norm_phi.max(f64::MIN_POSITIVE));
    }
    let target = norm_phi * (m * (m - 1)) as f64 / 4.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_swaps(m, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn inversions(p: &[usize]) -> usize {
        (0..p.len())
            .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count()
    }

    fn permutations(m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(m - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, m - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn expected_swaps_matches_enumeration() {
        for m in 1..=5 {
            for &phi in &[0.1f64, 0.35, 0.7, 1.0] {
                let perms = permutations(m);
                let z: f64 = perms.iter().map(|p| phi.powi(inversions(p) as i32)).sum();
                let e: f64 = perms
                    .iter()
                    .map(|p| inversions(p) as f64 * phi.powi(inversions(p) as i32))
                    .sum::<f64>()
                    / z;
                assert!((expected_swaps(m, phi) - e).abs() < 1e-9, "m={m} phi={phi}");
            }
        }
    }

    #[test]
    fn norm_phi_inverts() {
        for m in [3, 10, 50] {
            for &norm in &[0.2, 0.5, 0.7, 0.95] {
                let phi = phi_from_norm_phi(m, norm).unwrap();
                let back = expected_swaps(m, phi) / ((m * (m - 1)) as f64 / 4.0);
                assert!((back - norm).abs() < 1e-9);
            }
        }
        assert_eq!(phi_from_norm_phi(5, 1.0).unwrap(), 1.0);
        assert!(phi_from_norm_phi(5, 0.0).is_err());
    }

    #[test]
    fn zero_dispersion_returns_reference() {
        let p = mallows_sample(&MallowsConfig::new(4, 10, 1e-9, 3)).unwrap();
        assert!(p.ballots().iter().all(|b| b.ranking == vec![0, 1, 2, 3]));

        let cfg = MallowsConfig {
            reference: Some(vec![2, 0, 3, 1]),
            ..MallowsConfig::new(4, 10, 1e-9, 3)
        };
        let p = mallows_sample(&cfg).unwrap();
        assert!(p.ballots().iter().all(|b| b.ranking == vec![2, 0, 3, 1]));
    }

    #[test]
    fn deterministic_in_seed() {
        let cfg = MallowsConfig::new(6, 25, 0.6, 42);
        assert_eq!(
            mallows_sample(&cfg).unwrap().to_text(),
            mallows_sample(&cfg).unwrap().to_text()
        );
        let other = MallowsConfig::new(6, 25, 0.6, 43);
        assert_ne!(
            mallows_sample(&cfg).unwrap().to_text(),
            mallows_sample(&other).unwrap().to_text()
        );
    }

    #[test]
    fn follows_mallows_law() {
        // chi-square against P(pi) ∝ phi^inv(pi) for m = 3
        let phi = 0.5;
        let n = 6000;
        let p = mallows_sample(&MallowsConfig::new(3, n, phi, 11)).unwrap();
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for b in p.ballots() {
            *counts.entry(b.ranking.clone()).or_default() += 1;
        }
        let perms = permutations(3);
        let z: f64 = perms.iter().map(|q| phi.powi(inversions(q) as i32)).sum();
        let chi2: f64 = perms
            .iter()
            .map(|q| {
                let expected = n as f64 * phi.powi(inversions(q) as i32) / z;
                let observed = *counts.get(q).unwrap_or(&0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        // chi-square 0.999 quantile with 5 degrees of freedom
        assert!(chi2 < 20.515, "chi2 = {chi2}");
    }

    #[test]
    fn uniform_when_phi_is_one() {
        let n = 1000;
        let p = mallows_sample(&MallowsConfig::new(3, n, 1.0, 2024)).unwrap();
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for b in p.ballots() {
            *counts.entry(b.ranking.clone()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let mean = n as f64 / 6.0;
        let sigma = (n as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - mean).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(MallowsConfig::new(0, 1, 0.5, 0).validate().is_err());
        assert!(MallowsConfig::new(3, 0, 0.5, 0).validate().is_err());
        assert!(MallowsConfig::new(3, 1, 0.0, 0).validate().is_err());
        assert!(MallowsConfig::new(3, 1, 1.5, 0).validate().is_err());
        let bad_ref = MallowsConfig {
            reference: Some(vec![0, 0, 1]),
            ..MallowsConfig::new(3, 1, 0.5, 0)
        };
        assert!(bad_ref.validate().is_err());
    }

    #[test]
    fn no_condorcet_generation() {
        let p = generate_no_condorcet(&MallowsConfig::new(5, 10, 1.0, 1), 50_000).unwrap();
        assert_eq!(p.margins().condorcet_winner(), None);

        // two alternatives and an odd electorate always have a Condorcet winner
        assert!(matches!(
            generate_no_condorcet(&MallowsConfig::new(2, 5, 1.0, 1), 200),
            Err(Error::AttemptsExhausted(200))
        ));
        assert!(matches!(
            generate_no_condorcet(&MallowsConfig::new(5, 11, 1e-9, 1), 1),
            Err(Error::AttemptsExhausted(1))
        ));
    }
}
