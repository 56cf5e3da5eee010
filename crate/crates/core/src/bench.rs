//! Benchmark harness: a grid of Mallows elections without Condorcet winners,
//! each rule timed per instance in a seeded random order.

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::MarginGraph;
use crate::oracle::DEFAULT_UNIVERSE_LIMIT;
use crate::rule::{Rule, RuleOptions};
use crate::synth::{generate_where, phi_from_norm_phi, MallowsConfig};

pub const CSV_HEADER: &str = "rule,m,n,seed,phi,wall_seconds,winners,timed_out";
pub const DEFAULT_MAX_ATTEMPTS: usize = 50_000;
/// A rule is dropped for the rest of an `m` after this many timeouts.
pub const TIMEOUT_STRIKES: usize = 3;

/// Mallows dispersion, either raw or normalized per number of alternatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dispersion {
    Phi(f64),
    NormPhi(f64),
}

impl Dispersion {
    pub fn phi_for(self, m: usize) -> Result<f64> {
        match self {
            Dispersion::Phi(phi) => Ok(phi),
            Dispersion::NormPhi(norm) => phi_from_norm_phi(m, norm),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub rules: Vec<Rule>,
    pub alternatives: Vec<usize>,
    pub voters: Vec<usize>,
    pub instances: usize,
    pub dispersion: Dispersion,
    pub seed: u64,
    pub poly_timeout: Duration,
    pub brute_timeout: Duration,
    pub universe_limit: u64,
    pub max_attempts: usize,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            rules: Vec::new(),
            alternatives: Vec::new(),
            voters: Vec::new(),
            instances: 1,
            dispersion: Dispersion::Phi(1.0),
            seed: 0,
            poly_timeout: Duration::from_secs(5),
            brute_timeout: Duration::from_secs(60),
            universe_limit: DEFAULT_UNIVERSE_LIMIT,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub rule: Rule,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub phi: f64,
    pub wall_seconds: f64,
    /// Winner-set size; `None` when the run timed out or failed.
    pub winners: Option<usize>,
    pub timed_out: bool,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{},{}",
            self.rule,
            self.m,
            self.n,
            self.seed,
            self.phi,
            self.wall_seconds,
            self.winners.map(|w| w.to_string()).unwrap_or_default(),
            self.timed_out
        )
    }
}

pub fn write_csv<W: Write>(mut out: W, records: &[BenchRecord]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn instance_seed(base: u64, m: usize, n: usize, i: usize) -> u64 {
    [m as u64, n as u64, i as u64]
        .into_iter()
        .fold(splitmix64(base), |acc, x| splitmix64(acc ^ x))
}

/// Times one rule; polynomial rules run to completion and are flagged
/// afterwards if they overran.
pub fn time_rule(rule: Rule, g: &MarginGraph, cfg: &BenchConfig) -> (Duration, Result<usize>) {
    let timeout = if rule.is_brute_force() {
        cfg.brute_timeout
    } else {
        cfg.poly_timeout
    };
    let start = Instant::now();
    let opts = RuleOptions {
        tiebreaker: None,
        universe_limit: cfg.universe_limit,
        deadline: Some(start + timeout),
    };
    let outcome = if rule.needs_tiebreaker() {
        let t = crate::river::Tiebreaker::canonical(g);
        rule.winners(
            g,
            &RuleOptions {
                tiebreaker: Some(&t),
                ..opts
            },
        )
    } else {
        rule.winners(g, &opts)
    };
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(_) if elapsed > timeout => Err(Error::TimedOut),
        other => other.map(|w| w.len()),
    };
    (elapsed, outcome)
}

fn run_instance(cfg: &BenchConfig, rules: &[Rule], m: usize, n: usize, i: usize) -> Result<Vec<BenchRecord>> {
    let seed = instance_seed(cfg.seed, m, n, i);
    let phi = cfg.dispersion.phi_for(m)?;
    let mallows = MallowsConfig::new(m, n, phi, seed);
    let (profile, seed) = generate_where(&mallows, cfg.max_attempts, |g| {
        g.is_strict() && g.condorcet_winner().is_none()
    })?;
    let g = profile.margins();

    let mut order: Vec<usize> = (0..rules.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut records: Vec<Option<BenchRecord>> = vec![None; rules.len()];
    for k in order {
        let rule = rules[k];
        let (elapsed, outcome) = time_rule(rule, &g, cfg);
        let (winners, timed_out) = match outcome {
            Ok(w) => (Some(w), false),
            Err(Error::TimedOut | Error::UniverseLimitExceeded { .. }) => (None, true),
            Err(e) => {
                log::warn!("{rule} failed on m={m} n={n} seed={seed}: {e}");
                (None, false)
            }
        };
        records[k] = Some(BenchRecord {
            rule,
            m,
            n,
            seed,
            phi,
            wall_seconds: elapsed.as_secs_f64(),
            winners,
            timed_out,
        });
    }
    Ok(records.into_iter().flatten().collect())
}

/// Runs the grid. Records come out by `m`, then `n`, then instance, then the
/// configured rule order; instances whose generation runs out of attempts are
/// logged and skipped along with the rest of their cell.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.rules.is_empty() {
        return Ok(Vec::new());
    }
    if cfg.jobs == 0 {
        return Err(Error::InvalidConfig("jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut records = Vec::new();
    for &m in &cfg.alternatives {
        let mut strikes: HashMap<Rule, usize> = HashMap::new();
        for &n in &cfg.voters {
            if n % 2 == 0 {
                log::warn!("even voter count n={n}: margin graphs may be non-strict and will be resampled");
            }
            let mut i = 0;
            while i < cfg.instances {
                let active: Vec<Rule> = cfg
                    .rules
                    .iter()
                    .copied()
                    .filter(|r| strikes.get(r).copied().unwrap_or(0) < TIMEOUT_STRIKES)
                    .collect();
                if active.is_empty() {
                    break;
                }
                let batch: Vec<usize> = (i..cfg.instances.min(i + cfg.jobs)).collect();
                let results: Vec<Result<Vec<BenchRecord>>> = if cfg.jobs == 1 {
                    batch.iter().map(|&k| run_instance(cfg, &active, m, n, k)).collect()
                } else {
                    pool.install(|| batch.par_iter().map(|&k| run_instance(cfg, &active, m, n, k)).collect())
                };
                let mut exhausted = false;
                for result in results {
                    match result {
                        Ok(batch_records) => {
                            for r in &batch_records {
                                if r.timed_out {
                                    *strikes.entry(r.rule).or_default() += 1;
                                }
                            }
                            records.extend(batch_records);
                        }
                        Err(Error::AttemptsExhausted(k)) => {
                            log::warn!("no admissible profile for m={m} n={n} after {k} attempts; skipping cell");
                            exhausted = true;
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                if exhausted {
                    break;
                }
                i += batch.len();
            }
        }
    }
    Ok(records)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
