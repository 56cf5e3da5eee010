//! Winner sets for the River voting method under parallel-universe
//! tiebreaking, computed in polynomial time by fusing all tiebreaking
//! universes into one diagram.
//!
//! The crate also carries the brute-force universe enumerator used as a
//! reference, certificate extraction for individual winners, Split Cycle and
//! Beat Path for comparison, a Mallows election generator and a small
//! benchmark harness.
//!
//! ```
//! use river_put::{parse_profile, rv_put_winners};
//!
//! let profile = parse_profile("a,b,c\nb,c,a\nc,a,b\n").unwrap();
//! let winners = rv_put_winners(&profile.margins()).unwrap();
//! assert_eq!(winners.len(), 3);
//! ```

pub mod bench;
pub mod certificate;
pub mod error;
pub mod fun;
pub mod graph;
pub mod oracle;
pub mod profile;
pub mod river;
pub mod rule;
pub mod rules;
pub mod synth;

pub use certificate::{verify_certificate, Certificate, CertificateTree};
pub use error::{Error, Result};
pub use fun::{fun_diagram, rv_put_winners, EdgeState, FunDiagram, VertexState};
pub use graph::{Edge, MarginGraph};
pub use oracle::{brute_force_put, count_universes, PutRule};
pub use profile::{parse_profile, parse_soc, AltId, Ballot, PreferenceProfile};
pub use river::{ranked_pairs, river, RiverDiagram, Tiebreaker};
pub use rule::{Rule, RuleOptions};
pub use rules::{beat_path_winners, split_cycle_winners};
pub use synth::{generate_no_condorcet, mallows_sample, MallowsConfig};
