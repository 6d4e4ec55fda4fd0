//! Schedules for the collective primitives and the pipelining protocols.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::routing::{header_for, DeflectionPolicy, DestinationHeader, SourceVectorHeader};
use crate::sim::{Launch, Mode, PacketKind, Payload, Schedule, Slot, SlotKind};
use crate::topology::{NetParams, RouterAddr};

/// Pipelining pattern for a sequence of rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Protocol {
    /// One round per step.
    P1,
    /// Two rounds, one idle step.
    P2,
    /// Two rounds, two idle steps; local and global stages never overlap.
    P3,
}

impl Protocol {
    /// Idle steps following each pair of rounds.
    fn gap(self) -> u32 {
        match self {
            Protocol::P1 => 0,
            Protocol::P2 => 1,
            Protocol::P3 => 2,
        }
    }
}

/// Places rounds on consecutive steps starting at 1, inserting the
/// protocol's delay slots after every pair of rounds (including a trailing
/// partial pair).
pub fn apply_protocol(rounds: Vec<Vec<Launch>>, protocol: Protocol) -> Result<Schedule> {
    if rounds.is_empty() {
        return Err(Error::InvalidParams("a protocol needs at least one round".into()));
    }
    let mut out = Schedule::default();
    let mut step = 1;
    let n = rounds.len();
    for (r, launches) in rounds.into_iter().enumerate() {
        out.slots.push(Slot {
            step,
            kind: SlotKind::Data,
            launches,
        });
        step += 1;
        if r % 2 == 1 || r + 1 == n {
            for _ in 0..protocol.gap() {
                out.slots.push(Slot {
                    step,
                    kind: SlotKind::Delay,
                    launches: Vec::new(),
                });
                step += 1;
            }
        }
    }
    Ok(out)
}

/// Builder for schedules whose delay slots are placed one at a time.
#[derive(Default)]
struct Timeline {
    schedule: Schedule,
    next: u32,
}

impl Timeline {
    fn new() -> Self {
        Timeline {
            schedule: Schedule::default(),
            next: 1,
        }
    }

    fn push(&mut self, kind: SlotKind, launches: Vec<Launch>) {
        self.schedule.slots.push(Slot {
            step: self.next,
            kind,
            launches,
        });
        self.next += 1;
    }

    fn delay(&mut self) {
        self.push(SlotKind::Delay, Vec::new());
    }

    fn round(&mut self, launches: Vec<Launch>) {
        self.push(SlotKind::Data, launches);
    }
}

/// Expected data deliveries as `(src, dst, tag)`.
pub type Expected = Vec<(RouterAddr, RouterAddr, u64)>;

/// A schedule together with the deliveries it must produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub schedule: Schedule,
    pub expected: Expected,
    /// Mode the primitive is designed for.
    pub mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveOptions {
    /// Reproduce the published loops literally: one-to-all starts at round
    /// 1, all-to-one sends full request broadcasts and a networked reply
    /// from the sink to itself.
    pub paper_exact: bool,
    /// All-to-all delay test; disabling it is an ablation.
    pub insert_delays: bool,
}

impl Default for PrimitiveOptions {
    fn default() -> Self {
        PrimitiveOptions {
            paper_exact: false,
            insert_delays: true,
        }
    }
}

/// `n` broadcasts from `root`. A root on a swap fixed point needs
/// [`Protocol::P3`]; any other root pipelines at one round per step.
pub fn schedule_broadcast(params: &NetParams, root: RouterAddr, n: usize) -> Result<Plan> {
    params.check(root)?;
    if n == 0 {
        return Err(Error::InvalidParams("broadcast count must be at least 1".into()));
    }
    let rounds: Vec<Vec<Launch>> = (0..n as u64)
        .map(|tag| vec![Launch::data(root, SourceVectorHeader::broadcast(3), tag)])
        .collect();
    let protocol = if root.is_fixed_point() { Protocol::P3 } else { Protocol::P1 };
    let schedule = apply_protocol(rounds, protocol)?;
    let expected = (0..n as u64)
        .flat_map(|tag| params.routers().map(move |dst| (root, dst, tag)))
        .collect();
    Ok(Plan {
        schedule,
        expected,
        mode: Mode::Strict,
    })
}

/// Scatter from `root`: round `i = pi + gamma*M` sends `(3; gamma, pi, delta)`
/// for every `delta` at once; tag `i*M + delta`.
///
/// For a root on a swap fixed point the `gamma = 0` rounds would meet the
/// next-but-one round's first local stage at the root, so that block runs
/// as pairs separated by two delay slots.
pub fn schedule_one_to_all(params: &NetParams, root: RouterAddr, opts: PrimitiveOptions) -> Result<Plan> {
    params.check(root)?;
    let (k, m) = (params.k(), params.m());
    let first = if opts.paper_exact { 1 } else { 0 };
    let mut timeline = Timeline::new();
    let mut expected = Vec::new();
    let mut in_block = 0;
    for i in first..k * m {
        let (gamma, pi) = (i / m, i % m);
        let launches = (0..m)
            .map(|delta| {
                let tag = u64::from(i * m + delta);
                let h = SourceVectorHeader::new(3, gamma, pi, delta);
                expected.push((root, h.destination_from(params, root), tag));
                Launch::data(root, h, tag)
            })
            .collect();
        timeline.round(launches);
        if root.is_fixed_point() && gamma == 0 {
            in_block += 1;
            let block_done = i + 1 == m || i + 1 == k * m;
            if in_block % 2 == 0 || block_done {
                timeline.delay();
                timeline.delay();
            }
        }
    }
    if timeline.schedule.slots.is_empty() {
        return Err(Error::InvalidParams("no one-to-all rounds for D3(1,1)".into()));
    }
    Ok(Plan {
        schedule: timeline.schedule,
        expected,
        mode: Mode::Strict,
    })
}

/// Gather at `sink` by request broadcasts. Round `i = pi + gamma*M`
/// broadcasts a request that routers `(gamma, *, pi)` answer, one delay step
/// after reading it, with a minimal packet to the sink.
///
/// By default the request's last local stage skips the sink (which issued
/// it) and the sink's own contribution stays on its node; the literal
/// version collides replies with later requests.
pub fn schedule_all_to_one(params: &NetParams, sink: RouterAddr, opts: PrimitiveOptions) -> Result<Plan> {
    params.check(sink)?;
    if sink.is_fixed_point() {
        return Err(Error::Precondition {
            what: format!("sink {sink} has d = p"),
            hypothesis: "d != p",
        });
    }
    let (k, m) = (params.k(), params.m());
    let rounds: Vec<Vec<Launch>> = (0..k * m)
        .map(|i| {
            vec![Launch {
                kind: PacketKind::Control,
                payload: Payload::Request {
                    cabinet: i / m,
                    router: i % m,
                },
                prune_origin: !opts.paper_exact,
                ..Launch::data(sink, SourceVectorHeader::broadcast(3), u64::from(i))
            }]
        })
        .collect();
    let schedule = apply_protocol(rounds, Protocol::P1)?;
    let expected = params
        .routers()
        .map(|src| (src, sink, params.index_of(src) as u64))
        .collect();
    Ok(Plan {
        schedule,
        expected,
        mode: Mode::Strict,
    })
}

/// Vector of all-to-all round `i = pi + delta*M + gamma*M^2`, as
/// `(gamma, pi, delta)`.
pub fn all_to_all_vector(params: &NetParams, i: u32) -> (u32, u32, u32) {
    let m = params.m();
    (i / (m * m), i % m, (i / m) % m)
}

/// Every router sends one packet per round with the common vector of that
/// round; a delay slot precedes each round whose `delta` equals `pi - 2`.
pub fn schedule_all_to_all(params: &NetParams, opts: PrimitiveOptions) -> Result<Plan> {
    params.require_primitives()?;
    let m = params.m();
    let mut timeline = Timeline::new();
    let mut expected = Vec::new();
    for i in 0..params.k() * m * m {
        let (gamma, pi, delta) = all_to_all_vector(params, i);
        if opts.insert_delays && (pi + m - 2) % m == delta {
            timeline.delay();
        }
        let h = SourceVectorHeader::new(3, gamma, pi, delta);
        let launches = params
            .routers()
            .map(|src| {
                expected.push((src, h.destination_from(params, src), u64::from(i)));
                Launch::data(src, h, u64::from(i))
            })
            .collect();
        timeline.round(launches);
    }
    Ok(Plan {
        schedule: timeline.schedule,
        expected,
        mode: Mode::Strict,
    })
}

/// A bijection on the routers of one network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    params: NetParams,
    map: Vec<RouterAddr>,
}

impl Permutation {
    pub fn identity(params: &NetParams) -> Self {
        Permutation {
            params: *params,
            map: params.routers().collect(),
        }
    }

    pub fn from_fn(params: &NetParams, f: impl Fn(RouterAddr) -> RouterAddr) -> Result<Self> {
        Self::from_pairs(params, params.routers().map(|a| (a, f(a))))
    }

    /// Fails unless every router appears exactly once on each side.
    pub fn from_pairs(params: &NetParams, pairs: impl IntoIterator<Item = (RouterAddr, RouterAddr)>) -> Result<Self> {
        let n = params.router_count();
        let mut map: Vec<Option<RouterAddr>> = vec![None; n];
        let mut seen = BTreeSet::new();
        for (src, dst) in pairs {
            params.check(src)?;
            params.check(dst)?;
            let slot = &mut map[params.index_of(src)];
            if slot.is_some() {
                return Err(Error::InvalidParams(format!("{src} is mapped twice")));
            }
            if !seen.insert(dst) {
                return Err(Error::InvalidParams(format!("{dst} is the image of two routers")));
            }
            *slot = Some(dst);
        }
        let map = map
            .into_iter()
            .enumerate()
            .map(|(i, d)| d.ok_or_else(|| Error::InvalidParams(format!("{} has no image", params.addr_at(i)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Permutation { params: *params, map })
    }

    pub fn random(params: &NetParams, seed: u64) -> Self {
        let mut map: Vec<RouterAddr> = params.routers().collect();
        map.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Permutation { params: *params, map }
    }

    /// Parses `c.d.p -> c.d.p` lines; blank lines and `#` comments are skipped.
    pub fn parse(params: &NetParams, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("line {}: expected `src -> dst`", n + 1)))?;
            pairs.push((a.trim().parse()?, b.trim().parse()?));
        }
        Self::from_pairs(params, pairs)
    }

    pub fn get(&self, src: RouterAddr) -> RouterAddr {
        self.map[self.params.index_of(src)]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (RouterAddr, RouterAddr)> + '_ {
        self.params.routers().zip(self.map.iter().copied())
    }

    pub fn params(&self) -> &NetParams {
        &self.params
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in self.pairs() {
            writeln!(f, "{a} -> {b}")?;
        }
        Ok(())
    }
}

/// `(cabinet, drawer)`.
type Drawer = (u32, u32);

/// Routes a permutation. Step 1 is a one-hop exchange of destinations
/// inside every drawer. From step 2, packets that stay in their drawer take
/// one local hop (a hold for a self-send); packets between two drawers that
/// exchange two or more of them leave on a global link first (`b = 4`,
/// fixed-C detour); the rest take the minimal path. Meant for queued mode.
pub fn schedule_permutation(params: &NetParams, perm: &Permutation) -> Result<Plan> {
    if perm.params() != params {
        return Err(Error::InvalidParams("permutation built for a different network".into()));
    }
    let exchange = params
        .routers()
        .map(|src| Launch::control(src, SourceVectorHeader::broadcast(1), params.index_of(src) as u64))
        .collect();

    let mut per_pair: BTreeMap<(Drawer, Drawer), usize> = BTreeMap::new();
    for (src, dst) in perm.pairs() {
        *per_pair.entry(((src.c, src.d), (dst.c, dst.d))).or_insert(0) += 1;
    }
    let mut data = Vec::new();
    let mut expected = Vec::new();
    for (src, dst) in perm.pairs() {
        let tag = params.index_of(src) as u64;
        expected.push((src, dst, tag));
        let same_drawer = (src.c, src.d) == (dst.c, dst.d);
        let crowded = per_pair[&((src.c, src.d), (dst.c, dst.d))] >= 2;
        let launch = if same_drawer {
            let port = (dst.p + params.m() - src.p) % params.m();
            Launch::data(src, SourceVectorHeader::new(1, 0, port, 0), tag)
        } else if crowded {
            Launch {
                policy: Some(DeflectionPolicy::FixedC),
                ..Launch::data(src, DestinationHeader::new(4, dst, src), tag)
            }
        } else {
            Launch::data(src, header_for(params, src, dst)?, tag)
        };
        data.push(launch);
    }
    let schedule = Schedule {
        slots: vec![
            Slot {
                step: 1,
                kind: SlotKind::Control,
                launches: exchange,
            },
            Slot {
                step: 2,
                kind: SlotKind::Data,
                launches: data,
            },
        ],
    };
    Ok(Plan {
        schedule,
        expected,
        mode: Mode::Queued,
    })
}

/// The five primitives by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Broadcast,
    One2all,
    All2one,
    All2all,
    Perm,
}

impl FromStr for PrimitiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "broadcast" => PrimitiveKind::Broadcast,
            "one2all" => PrimitiveKind::One2all,
            "all2one" => PrimitiveKind::All2one,
            "all2all" => PrimitiveKind::All2all,
            "perm" => PrimitiveKind::Perm,
            other => return Err(Error::Parse(format!("unknown primitive `{other}`"))),
        })
    }
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimitiveKind::Broadcast => "broadcast",
            PrimitiveKind::One2all => "one2all",
            PrimitiveKind::All2one => "all2one",
            PrimitiveKind::All2all => "all2all",
            PrimitiveKind::Perm => "perm",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run, verify_delivery, Discipline, SimConfig};

    fn a(c: u32, d: u32, p: u32) -> RouterAddr {
        RouterAddr::new(c, d, p)
    }

    fn data_steps(rounds: usize, p: Protocol) -> Vec<u32> {
        let r = (0..rounds).map(|_| Vec::new()).collect();
        apply_protocol(r, p).unwrap().data_steps()
    }

    #[test]
    fn protocol_launch_steps() {
        assert_eq!(data_steps(4, Protocol::P1), [1, 2, 3, 4]);
        assert_eq!(data_steps(4, Protocol::P2), [1, 2, 4, 5]);
        assert_eq!(data_steps(4, Protocol::P3), [1, 2, 5, 6]);
        let r = (0..4).map(|_| Vec::new()).collect();
        assert_eq!(apply_protocol(r, Protocol::P3).unwrap().delays(), 4);
        assert!(apply_protocol(Vec::new(), Protocol::P1).is_err());
    }

    #[test]
    fn all_to_all_delay_count() {
        for (k, m) in [(2, 4), (3, 4), (2, 6)] {
            let n = NetParams::new(k, m).unwrap();
            let plan = schedule_all_to_all(&n, PrimitiveOptions::default()).unwrap();
            assert_eq!(plan.schedule.rounds() as u32, k * m * m);
            assert_eq!(plan.schedule.delays() as u32, k * m);
        }
    }

    #[test]
    fn all_to_all_needs_even_m() {
        let n = NetParams::new(2, 3).unwrap();
        assert!(matches!(
            schedule_all_to_all(&n, PrimitiveOptions::default()),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn all_to_one_rejects_fixed_point_sink() {
        let n = NetParams::new(2, 4).unwrap();
        let err = schedule_all_to_one(&n, a(0, 1, 1), PrimitiveOptions::default()).unwrap_err();
        assert!(err.to_string().contains("d != p"));
    }

    #[test]
    fn intra_drawer_permutations_stay_local() {
        let n = NetParams::new(2, 4).unwrap();
        let swap = Permutation::from_fn(&n, |r| RouterAddr::new(r.c, r.d, (r.p + 1) % 4)).unwrap();
        for perm in [Permutation::identity(&n), swap] {
            let plan = schedule_permutation(&n, &perm).unwrap();
            for cfg in [SimConfig::strict(), SimConfig::queued(Discipline::Lifo)] {
                let m = run(&n, &plan.schedule, &cfg).unwrap();
                assert!(verify_delivery(&m, &plan.expected).ok);
                assert!(m.conflicts.is_empty());
                assert_eq!(m.queue_wait_steps, 0);
                assert_eq!(m.total_steps, 2);
            }
        }
    }

    #[test]
    fn minimal_self_sends_share_the_fixed_point() {
        // every router of a drawer sending (3;0,p-d,d-p) meets at (c,d,d)
        let n = NetParams::new(2, 4).unwrap();
        let launches = (0..4)
            .map(|p| {
                let r = RouterAddr::new(0, 1, p);
                Launch::data(r, header_for(&n, r, r).unwrap(), u64::from(p))
            })
            .collect();
        let s = apply_protocol(vec![launches], Protocol::P1).unwrap();
        let m = run(&n, &s, &SimConfig::strict()).unwrap();
        assert_eq!(m.conflicts.len(), 1);
        assert!(m.conflicts[0].link.is_self_port());
        assert_eq!(m.conflicts[0].packets.len(), 4);
    }

    #[test]
    fn permutation_text_round_trip() {
        let n = NetParams::new(2, 4).unwrap();
        let p = Permutation::random(&n, 11);
        assert_eq!(Permutation::parse(&n, &p.to_string()).unwrap(), p);
        assert!(Permutation::parse(&n, "0.0.0 -> 0.0.1\n0.0.1 -> 0.0.1").is_err());
        assert!(Permutation::parse(&n, "0.0.0 => 0.0.1").is_err());
    }
}
