//! Self-checks over a whole network, shared by the `verify` command and
//! the test suites.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{build_embedding, EmbeddingSpec};
use crate::error::{Error, Result};
use crate::routing::{header_for, path_of, SourceVectorHeader};
use crate::sim::{conflict_predicate, run, Launch, Schedule, SimConfig, Slot, SlotKind};
use crate::topology::{bfs_distances, NetParams, RouterAddr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Diameter,
    Conflict,
    Parallel,
    Embedding,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "diameter" => Suite::Diameter,
            "conflict" => Suite::Conflict,
            "parallel" => Suite::Parallel,
            "embedding" => Suite::Embedding,
            "all" => Suite::All,
            other => return Err(Error::Parse(format!("unknown suite `{other}`"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Diameter => "diameter",
            Suite::Conflict => "conflict",
            Suite::Parallel => "parallel",
            Suite::Embedding => "embedding",
            Suite::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub passed: bool,
    pub cases: u64,
    pub failures: Vec<String>,
    /// Suite-specific measurements.
    pub detail: serde_json::Value,
}

impl SuiteResult {
    fn new(suite: Suite, cases: u64, failures: Vec<String>, detail: serde_json::Value) -> Self {
        SuiteResult {
            suite,
            passed: failures.is_empty(),
            cases,
            failures,
            detail,
        }
    }
}

/// Failure lists are capped so a broken build does not flood the report.
const MAX_REPORTED: usize = 20;

fn note(failures: &mut Vec<String>, msg: impl FnOnce() -> String) {
    if failures.len() < MAX_REPORTED {
        failures.push(msg());
    }
}

/// Breadth-first search from every router; passes when every pair is
/// connected within three hops.
pub fn diameter_suite(params: &NetParams) -> Result<SuiteResult> {
    let mut max = 0;
    let mut failures = Vec::new();
    let mut cases = 0;
    for src in params.routers() {
        for (i, &d) in bfs_distances(params, src)?.iter().enumerate() {
            cases += 1;
            if d == u32::MAX || d > 3 {
                note(&mut failures, || format!("{src} -> {} at distance {d}", params.addr_at(i)));
            }
            max = max.max(d);
        }
    }
    Ok(SuiteResult::new(
        Suite::Diameter,
        cases,
        failures,
        serde_json::json!({ "diameter": max }),
    ))
}

/// Whether two simultaneous minimal packets collide in strict mode.
pub fn simulated_pair_conflict(
    params: &NetParams,
    (src1, dst1): (RouterAddr, RouterAddr),
    (src2, dst2): (RouterAddr, RouterAddr),
) -> Result<bool> {
    let schedule = Schedule {
        slots: vec![Slot {
            step: 1,
            kind: SlotKind::Data,
            launches: vec![
                Launch::data(src1, header_for(params, src1, dst1)?, 0),
                Launch::data(src2, header_for(params, src2, dst2)?, 1),
            ],
        }],
    };
    Ok(!run(params, &schedule, &SimConfig::strict())?.conflicts.is_empty())
}

/// Strict-mode simulation against the drawer predicate: every pair of
/// distinct routers in a common drawer with every pair of distinct
/// destinations, plus `samples` random pairs from different drawers.
pub fn conflict_suite(params: &NetParams, samples: usize, seed: u64) -> Result<SuiteResult> {
    let n = params.router_count();
    if n < 2 {
        return Err(Error::InvalidParams("need at least two routers".into()));
    }
    let mut failures = Vec::new();
    let (mut exhaustive, mut predicted) = (0u64, 0u64);
    let mut check = |a: (RouterAddr, RouterAddr), b: (RouterAddr, RouterAddr)| -> Result<()> {
        let want = conflict_predicate(a.0, a.1, b.0, b.1)?;
        let got = simulated_pair_conflict(params, a, b)?;
        predicted += u64::from(want);
        if want != got {
            note(&mut failures, || {
                format!("{}->{} with {}->{}: predicted {want}, simulated {got}", a.0, a.1, b.0, b.1)
            });
        }
        Ok(())
    };
    for src1 in params.routers() {
        for q in src1.p + 1..params.m() {
            let src2 = RouterAddr::new(src1.c, src1.d, q);
            for dst1 in params.routers() {
                for dst2 in params.routers().filter(|&d| d != dst1) {
                    exhaustive += 1;
                    check((src1, dst1), (src2, dst2))?;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = 0u64;
    if params.k() * params.m() > 1 {
        while sampled < samples as u64 {
            let pick = |rng: &mut ChaCha8Rng| params.addr_at(rng.gen_range(0..n));
            let (src1, src2, dst1, dst2) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
            if (src1.c, src1.d) == (src2.c, src2.d) || dst1 == dst2 {
                continue;
            }
            sampled += 1;
            check((src1, dst1), (src2, dst2))?;
        }
    }
    Ok(SuiteResult::new(
        Suite::Conflict,
        exhaustive + sampled,
        failures,
        serde_json::json!({
            "same_drawer_pairs": exhaustive,
            "random_pairs": sampled,
            "predicted_conflicts": predicted,
        }),
    ))
}

/// Every vector `(3; gamma, pi, delta)` sent from all routers at once: the
/// paths never share a link in the same step, and a strict simulation of
/// the round is conflict-free.
pub fn parallel_suite(params: &NetParams) -> Result<SuiteResult> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for gamma in 0..params.k() {
        for pi in 0..params.m() {
            for delta in 0..params.m() {
                cases += 1;
                let h = SourceVectorHeader::new(3, gamma, pi, delta);
                let mut used = BTreeSet::new();
                let mut clash = None;
                for src in params.routers() {
                    let path = path_of(params, src, h)?;
                    for (step, (hop, _)) in path.steps.iter().enumerate() {
                        if let Some(link) = hop.link() {
                            if !used.insert((step, link)) && clash.is_none() {
                                clash = Some(format!("{h}: {link} reused at stage {}", step + 1));
                            }
                        }
                    }
                }
                if let Some(msg) = clash {
                    note(&mut failures, || msg);
                }
                let launches = params.routers().map(|src| Launch::data(src, h, 0)).collect();
                let schedule = Schedule {
                    slots: vec![Slot {
                        step: 1,
                        kind: SlotKind::Data,
                        launches,
                    }],
                };
                let metrics = run(params, &schedule, &SimConfig::strict())?;
                if !metrics.conflicts.is_empty() {
                    note(&mut failures, || format!("{h}: {} simulated conflicts", metrics.conflicts.len()));
                }
            }
        }
    }
    Ok(SuiteResult::new(
        Suite::Parallel,
        cases,
        failures,
        serde_json::json!({ "paths_per_vector": params.router_count() }),
    ))
}

/// Edge-set isomorphism and exhaustive vector translation for one
/// embedding. Returns the number of cases and the failures.
pub fn check_embedding(spec: &EmbeddingSpec) -> Result<(u64, Vec<String>)> {
    let mut failures = Vec::new();
    let mut cases = 1;
    let mapped = spec.host_links();
    let induced = spec.induced_links();
    if mapped != induced {
        let missing = induced.difference(&mapped).count();
        let extra = mapped.difference(&induced).count();
        note(&mut failures, || {
            format!("kappa {:?} lambda {:?}: {missing} induced links unmapped, {extra} mapped links not induced",
                spec.kappa(), spec.lambda())
        });
    }
    let logical = spec.logical();
    for src in logical.routers() {
        let host_src = spec.translate_addr(src)?;
        for gamma in 0..logical.k() {
            for pi in 0..logical.m() {
                for delta in 0..logical.m() {
                    cases += 1;
                    let h = SourceVectorHeader::new(3, gamma, pi, delta);
                    let want = spec.translate_addr(h.destination_from(logical, src))?;
                    let (g, p, d) = spec.translate_vector(src, gamma, pi, delta)?;
                    let got = path_of(spec.host(), host_src, SourceVectorHeader::new(3, g, p, d))?.end();
                    if got != want {
                        note(&mut failures, || format!("{src} {h}: host path ends at {got}, expected {want}"));
                    }
                }
            }
        }
    }
    Ok((cases, failures))
}

/// Embeddings of the host's own parameters: every non-empty cabinet subset
/// (up to 64 of them) with all local indices, and with the last local
/// index dropped when `M > 2`.
pub fn embedding_suite(params: &NetParams) -> Result<SuiteResult> {
    let all_local: Vec<u32> = (0..params.m()).collect();
    let mut lambdas = vec![all_local.clone()];
    if params.m() > 2 {
        lambdas.push(all_local[..all_local.len() - 1].to_vec());
    }
    let subsets = (1u64..(1u64 << params.k().min(63))).take(64);
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut embeddings = 0;
    for mask in subsets {
        let kappa: Vec<u32> = (0..params.k()).filter(|c| mask >> c & 1 == 1).collect();
        for lambda in &lambdas {
            let spec = build_embedding(params, &kappa, lambda)?;
            let (n, f) = check_embedding(&spec)?;
            embeddings += 1;
            cases += n;
            for msg in f {
                note(&mut failures, || msg);
            }
        }
    }
    Ok(SuiteResult::new(
        Suite::Embedding,
        cases,
        failures,
        serde_json::json!({ "embeddings": embeddings }),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub k: u32,
    pub m: u32,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// Largest network the exhaustive suites accept.
pub const MAX_ROUTERS: usize = 2000;

pub fn verify(params: &NetParams, suite: Suite, seed: u64) -> Result<VerifyReport> {
    if params.router_count() > MAX_ROUTERS {
        return Err(Error::InvalidParams(format!(
            "{} routers exceed the exhaustive-check limit of {MAX_ROUTERS}",
            params.router_count()
        )));
    }
    let wanted = |s: Suite| suite == Suite::All || suite == s;
    let mut suites = Vec::new();
    if wanted(Suite::Diameter) {
        suites.push(diameter_suite(params)?);
    }
    if wanted(Suite::Conflict) {
        suites.push(conflict_suite(params, 10_000, seed)?);
    }
    if wanted(Suite::Parallel) {
        suites.push(parallel_suite(params)?);
    }
    if wanted(Suite::Embedding) {
        suites.push(embedding_suite(params)?);
    }
    Ok(VerifyReport {
        k: params.k(),
        m: params.m(),
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_network_passes_everything() {
        let n = NetParams::new(1, 2).unwrap();
        let r = verify(&n, Suite::All, 3).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.suites.len(), 4);
    }

    #[test]
    fn diameter_of_three_four() {
        let r = diameter_suite(&NetParams::new(3, 4).unwrap()).unwrap();
        assert!(r.passed);
        assert_eq!(r.detail["diameter"], 3);
    }
}
