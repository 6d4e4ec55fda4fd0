//! Synchronous discrete-time simulator.
//!
//! Every directed link carries one packet per step in each direction. A
//! swap fixed point's global port 0 is treated as a resource of its own
//! (one send slot, no wire). Holds use no resource.
//!
//! In [`Mode::Strict`] contending packets all proceed and each contended
//! resource is reported as a conflict; a run with any conflict has failed.
//! In [`Mode::Queued`] one packet per resource moves and the rest wait
//! without decrementing their counter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::routing::{
    header_for, port_tables, step_destination, step_source_vector, DeflectionPolicy, Detour, Header,
    PortTables, SourceVectorHeader,
};
use crate::topology::{global_hop, local_hop, Hop, LinkId, NetParams, RouterAddr};

pub type PacketId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketKind {
    /// Counted in deliveries.
    Data,
    /// Protocol traffic: requests, destination exchanges.
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    None,
    /// Asks routers `(cabinet, *, router)` to reply to the packet's source
    /// once the request has been read and one delay step has passed.
    Request { cabinet: u32, router: u32 },
}

/// One packet handed to a router by its attached node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Launch {
    pub src: RouterAddr,
    pub header: Header,
    pub tag: u64,
    pub kind: PacketKind,
    pub payload: Payload,
    /// Deflection choice for destination headers launched with `b >= 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<DeflectionPolicy>,
    /// Broadcast only: the final local stage does not send a copy back to
    /// the originating router, which already holds the message.
    #[serde(default)]
    pub prune_origin: bool,
}

impl Launch {
    pub fn data(src: RouterAddr, header: impl Into<Header>, tag: u64) -> Self {
        Launch {
            src,
            header: header.into(),
            tag,
            kind: PacketKind::Data,
            payload: Payload::None,
            policy: None,
            prune_origin: false,
        }
    }

    pub fn control(src: RouterAddr, header: impl Into<Header>, tag: u64) -> Self {
        Launch {
            kind: PacketKind::Control,
            ..Launch::data(src, header, tag)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Data,
    /// A "false" round: every node holds for a step, nothing is launched.
    Delay,
    Control,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    /// 1-based time step at which the launches enter the network.
    pub step: u32,
    pub kind: SlotKind,
    pub launches: Vec<Launch>,
}

/// Ordered launch plan for one primitive.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub slots: Vec<Slot>,
}

impl Schedule {
    pub fn rounds(&self) -> usize {
        self.count(SlotKind::Data)
    }

    pub fn delays(&self) -> usize {
        self.count(SlotKind::Delay)
    }

    fn count(&self, kind: SlotKind) -> usize {
        self.slots.iter().filter(|s| s.kind == kind).count()
    }

    pub fn last_step(&self) -> u32 {
        self.slots.iter().map(|s| s.step).max().unwrap_or(0)
    }

    /// Round index (among data slots) of each data slot's step.
    pub fn data_steps(&self) -> Vec<u32> {
        self.slots
            .iter()
            .filter(|s| s.kind == SlotKind::Data)
            .map(|s| s.step)
            .collect()
    }

    pub fn launches(&self) -> impl Iterator<Item = &Launch> {
        self.slots.iter().flat_map(|s| s.launches.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Queued,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "queued" => Ok(Mode::Queued),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Queued => "queued",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discipline {
    /// The packet that reached the router last goes first.
    Lifo,
    Fifo,
}

impl FromStr for Discipline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lifo" => Ok(Discipline::Lifo),
            "fifo" => Ok(Discipline::Fifo),
            other => Err(Error::Parse(format!("unknown discipline `{other}`"))),
        }
    }
}

impl fmt::Display for Discipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discipline::Lifo => "lifo",
            Discipline::Fifo => "fifo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: Mode,
    pub discipline: Discipline,
    pub seed: u64,
    /// `None` uses `4 * (slots + K*M + 16)`.
    pub max_steps: Option<u32>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            mode: Mode::Strict,
            discipline: Discipline::Lifo,
            seed: 0,
            max_steps: None,
        }
    }
}

impl SimConfig {
    pub fn strict() -> Self {
        Self::default()
    }

    pub fn queued(discipline: Discipline) -> Self {
        SimConfig {
            mode: Mode::Queued,
            discipline,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn step_limit(&self, params: &NetParams, schedule: &Schedule) -> u32 {
        self.max_steps
            .unwrap_or_else(|| 4 * (schedule.slots.len() as u32 + params.k() * params.m() + 16))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Delivery {
    pub step: u32,
    pub dst: RouterAddr,
    pub src: RouterAddr,
    pub tag: u64,
    /// Link traversals (self-ports included, holds excluded).
    pub hops: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub step: u32,
    pub link: LinkId,
    pub packets: Vec<PacketId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub rounds_launched: usize,
    pub delay_rounds: usize,
    pub control_rounds: usize,
    /// Step of the last arrival.
    pub total_steps: u32,
    pub total_hops: u64,
    pub packets_launched: usize,
    pub conflicts: Vec<Conflict>,
    /// Data deliveries, sorted by `(step, dst, src, tag)`.
    pub deliveries: Vec<Delivery>,
    pub control_deliveries: usize,
    /// Highest per-link load at each step, index 0 = step 1.
    pub max_link_load_per_step: Vec<u32>,
    /// Packet-steps spent waiting for a busy link (queued mode).
    pub queue_wait_steps: u64,
    pub failed: bool,
}

impl Metrics {
    /// Number of data arrivals at `dst` per step.
    pub fn arrivals_at(&self, dst: RouterAddr) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for d in self.deliveries.iter().filter(|d| d.dst == dst) {
            *out.entry(d.step).or_insert(0) += 1;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One hop taken by one packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedHop {
    pub step: u32,
    pub hop: Hop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub id: PacketId,
    pub src: RouterAddr,
    pub tag: u64,
    pub kind: PacketKind,
    pub hop_log: Vec<LoggedHop>,
}

/// Per-step link loads and per-packet hop logs, kept out of [`Metrics`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub link_loads: Vec<(u32, LinkId, u32)>,
    pub packets: BTreeMap<PacketId, PacketRecord>,
}

impl Trace {
    pub fn link_loads_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "link", "load"])?;
        for (step, link, load) in &self.link_loads {
            w.write_record([step.to_string(), link.to_string(), load.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Conflicts with the full hop logs of the colliding packets.
    pub fn conflict_report(&self, metrics: &Metrics) -> serde_json::Value {
        let items: Vec<_> = metrics
            .conflicts
            .iter()
            .map(|c| {
                let logs: Vec<_> = c.packets.iter().filter_map(|id| self.packets.get(id)).collect();
                serde_json::json!({
                    "step": c.step,
                    "link": c.link.to_string(),
                    "packets": logs,
                })
            })
            .collect();
        serde_json::Value::Array(items)
    }
}

#[derive(Debug, Clone, Copy)]
struct Planned {
    hop: Hop,
    addr: RouterAddr,
    header: Header,
}

#[derive(Debug, Clone)]
struct Packet {
    id: PacketId,
    src: RouterAddr,
    addr: RouterAddr,
    header: Header,
    tag: u64,
    kind: PacketKind,
    payload: Payload,
    prune_origin: bool,
    detour: Option<Detour>,
    ready_since: u32,
    hop_log: Vec<LoggedHop>,
    planned: Option<Planned>,
}

/// Copies produced by a broadcast packet for its next step.
///
/// Local stages (`b = 3`, `b = 1`) copy out of every local port and keep one
/// copy in the router; the global stage (`b = 2`) copies out of every global
/// port, except that a swap fixed point keeps its port-0 copy in the router.
pub fn broadcast_expand(params: &NetParams, addr: RouterAddr, header: Header) -> Result<Vec<(Hop, RouterAddr, Header)>> {
    let h = match header {
        Header::SourceVector(h) if h.broadcast => h,
        _ => {
            return Err(Error::InvalidHeader(
                "broadcast expansion needs a source-vector header with B = 1".into(),
            ))
        }
    };
    h.validate(params)?;
    params.check(addr)?;
    let child = Header::SourceVector(SourceVectorHeader {
        b: h.b.checked_sub(1)
            .ok_or_else(|| Error::InvalidHeader("packet has already arrived (b = 0)".into()))?,
        ..h
    });
    let mut out = Vec::new();
    match h.b {
        3 | 1 => {
            for port in 0..params.m() {
                let (next, hop) = local_hop(params, addr, port)?;
                out.push((hop, next, child));
            }
        }
        2 => {
            for port in 0..params.k() {
                if port == 0 && addr.is_fixed_point() {
                    out.push((Hop::Hold, addr, child));
                } else {
                    let (next, hop) = global_hop(params, addr, port)?;
                    out.push((hop, next, child));
                }
            }
        }
        _ => return Err(Error::InvalidHeader(format!("broadcast with b = {}", h.b))),
    }
    Ok(out)
}

/// Drawer-rule prediction for two simultaneous minimal (`b = 3`)
/// transmissions from distinct sources to distinct destinations: they
/// share a link iff both the source drawers and the destination drawers
/// coincide.
pub fn conflict_predicate(src1: RouterAddr, dst1: RouterAddr, src2: RouterAddr, dst2: RouterAddr) -> Result<bool> {
    if dst1 == dst2 {
        return Err(Error::Precondition {
            what: format!("both packets go to {dst1}"),
            hypothesis: "distinct destinations",
        });
    }
    if src1 == src2 {
        return Err(Error::Precondition {
            what: format!("both packets leave {src1}"),
            hypothesis: "distinct sources",
        });
    }
    Ok((src1.c, src1.d) == (src2.c, src2.d) && (dst1.c, dst1.d) == (dst2.c, dst2.d))
}

/// Outcome of comparing delivered `(src, dst, tag)` triples to an
/// expected multiset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DeliveryCheck {
    pub ok: bool,
    pub expected: usize,
    pub delivered: usize,
    pub missing: Vec<(RouterAddr, RouterAddr, u64)>,
    pub unexpected: Vec<(RouterAddr, RouterAddr, u64)>,
}

pub fn verify_delivery(metrics: &Metrics, expected: &[(RouterAddr, RouterAddr, u64)]) -> DeliveryCheck {
    let mut balance: BTreeMap<(RouterAddr, RouterAddr, u64), i64> = BTreeMap::new();
    for &e in expected {
        *balance.entry(e).or_insert(0) += 1;
    }
    for d in &metrics.deliveries {
        *balance.entry((d.src, d.dst, d.tag)).or_insert(0) -= 1;
    }
    let mut check = DeliveryCheck {
        expected: expected.len(),
        delivered: metrics.deliveries.len(),
        ..Default::default()
    };
    for (key, n) in balance {
        for _ in 0..n.max(0) {
            check.missing.push(key);
        }
        for _ in 0..(-n).max(0) {
            check.unexpected.push(key);
        }
    }
    check.ok = check.missing.is_empty() && check.unexpected.is_empty();
    check
}

pub fn run(params: &NetParams, schedule: &Schedule, config: &SimConfig) -> Result<Metrics> {
    run_traced(params, schedule, config).map(|(m, _)| m)
}

pub fn run_traced(params: &NetParams, schedule: &Schedule, config: &SimConfig) -> Result<(Metrics, Trace)> {
    let mut engine = Engine::new(params, schedule, config)?;
    engine.run()?;
    Ok(engine.finish())
}

struct Engine<'a> {
    params: &'a NetParams,
    config: &'a SimConfig,
    tables: PortTables,
    rng: ChaCha8Rng,
    step_limit: u32,
    next_id: PacketId,
    future: BTreeMap<u32, Vec<Launch>>,
    local_deliveries: BTreeMap<u32, Vec<Delivery>>,
    active: Vec<Packet>,
    metrics: Metrics,
    trace: Trace,
}

impl<'a> Engine<'a> {
    fn new(params: &'a NetParams, schedule: &Schedule, config: &'a SimConfig) -> Result<Self> {
        let mut future: BTreeMap<u32, Vec<Launch>> = BTreeMap::new();
        for slot in &schedule.slots {
            if slot.step == 0 {
                return Err(Error::InvalidHeader("slot steps start at 1".into()));
            }
            for l in &slot.launches {
                params.check(l.src)?;
                match l.header {
                    Header::SourceVector(h) => h.validate(params)?,
                    Header::Destination(h) => {
                        params.check(h.dest)?;
                        if h.b > 5 {
                            return Err(Error::InvalidHeader(format!("counter {} exceeds 5", h.b)));
                        }
                        if h.b >= 4 && l.policy.is_none() {
                            return Err(Error::InvalidHeader(format!(
                                "destination header with b = {} needs a deflection policy",
                                h.b
                            )));
                        }
                    }
                }
                if l.header.b() == 0 {
                    return Err(Error::InvalidHeader("cannot launch a packet with b = 0".into()));
                }
            }
            future.entry(slot.step).or_default().extend(slot.launches.iter().cloned());
        }
        let metrics = Metrics {
            rounds_launched: schedule.rounds(),
            delay_rounds: schedule.delays(),
            control_rounds: schedule.count(SlotKind::Control),
            total_steps: 0,
            total_hops: 0,
            packets_launched: 0,
            conflicts: Vec::new(),
            deliveries: Vec::new(),
            control_deliveries: 0,
            max_link_load_per_step: Vec::new(),
            queue_wait_steps: 0,
            failed: false,
        };
        Ok(Engine {
            params,
            config,
            tables: port_tables(params),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            step_limit: config.step_limit(params, schedule),
            next_id: 0,
            future,
            local_deliveries: BTreeMap::new(),
            active: Vec::new(),
            metrics,
            trace: Trace::default(),
        })
    }

    fn fresh_id(&mut self) -> PacketId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn launch(&mut self, step: u32, l: Launch) -> Result<()> {
        let mut header = l.header;
        let mut detour = None;
        if let Header::Destination(ref mut h) = header {
            h.loc = l.src;
            if h.b >= 4 {
                let policy = l.policy.expect("checked at construction");
                detour = Some(policy.resolve(self.params, l.src, h.dest, &mut self.rng)?);
            }
        }
        let id = self.fresh_id();
        self.metrics.packets_launched += 1;
        self.active.push(Packet {
            id,
            src: l.src,
            addr: l.src,
            header,
            tag: l.tag,
            kind: l.kind,
            payload: l.payload,
            prune_origin: l.prune_origin,
            detour,
            ready_since: step,
            hop_log: Vec::new(),
            planned: None,
        });
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        let mut step = 1u32;
        loop {
            if let Some(launches) = self.future.remove(&step) {
                for l in launches {
                    self.launch(step, l)?;
                }
            }
            if let Some(local) = self.local_deliveries.remove(&step) {
                for d in local {
                    self.metrics.total_steps = self.metrics.total_steps.max(d.step);
                    self.metrics.deliveries.push(d);
                }
            }
            if self.active.is_empty() && self.future.is_empty() && self.local_deliveries.is_empty() {
                break;
            }
            if step > self.step_limit {
                return Err(Error::StepLimit {
                    max_steps: self.step_limit,
                    in_flight: self.active.len(),
                });
            }
            self.advance(step)?;
            step += 1;
        }
        Ok(())
    }

    /// Splits broadcast packets into per-port copies and fixes the next hop
    /// of every packet that does not have one yet.
    fn plan(&mut self, step: u32) -> Result<()> {
        let mut expanded = Vec::with_capacity(self.active.len());
        let current = std::mem::take(&mut self.active);
        for mut pkt in current {
            if pkt.planned.is_some() {
                expanded.push(pkt);
                continue;
            }
            if pkt.header.is_broadcast() {
                for (hop, addr, header) in broadcast_expand(self.params, pkt.addr, pkt.header)? {
                    if pkt.prune_origin && header.b() == 0 && addr == pkt.src {
                        // The origin already has its own message.
                        self.arrive(step, &pkt, pkt.src, pkt.hop_log.len() as u32);
                        continue;
                    }
                    let id = self.fresh_id();
                    expanded.push(Packet {
                        id,
                        planned: Some(Planned { hop, addr, header }),
                        hop_log: pkt.hop_log.clone(),
                        ..pkt.clone()
                    });
                }
                continue;
            }
            let planned = match pkt.header {
                Header::SourceVector(h) => {
                    let s = step_source_vector(self.params, pkt.addr, h)?;
                    Planned {
                        hop: s.hop,
                        addr: s.addr,
                        header: Header::SourceVector(s.header),
                    }
                }
                Header::Destination(h) => {
                    let (next, hop) = step_destination(self.params, h, &self.tables, pkt.detour)?;
                    Planned {
                        hop,
                        addr: next.loc,
                        header: Header::Destination(next),
                    }
                }
            };
            pkt.planned = Some(planned);
            expanded.push(pkt);
        }
        self.active = expanded;
        Ok(())
    }

    fn advance(&mut self, step: u32) -> Result<()> {
        self.plan(step)?;

        let mut by_link: BTreeMap<LinkId, Vec<usize>> = BTreeMap::new();
        for (i, pkt) in self.active.iter().enumerate() {
            if let Some(link) = pkt.planned.expect("planned").hop.link() {
                by_link.entry(link).or_default().push(i);
            }
        }

        let mut blocked = BTreeSet::new();
        let mut max_load = 0u32;
        for (link, users) in &by_link {
            let moving: Vec<usize> = if users.len() > 1 {
                match self.config.mode {
                    Mode::Strict => {
                        self.metrics.conflicts.push(Conflict {
                            step,
                            link: *link,
                            packets: users.iter().map(|&i| self.active[i].id).collect(),
                        });
                        self.metrics.failed = true;
                        users.clone()
                    }
                    Mode::Queued => {
                        let key = |&i: &usize| (self.active[i].ready_since, self.active[i].id);
                        let winner = match self.config.discipline {
                            Discipline::Lifo => users.iter().copied().max_by_key(key),
                            Discipline::Fifo => users.iter().copied().min_by_key(key),
                        }
                        .expect("non-empty");
                        for &i in users {
                            if i != winner {
                                blocked.insert(i);
                            }
                        }
                        vec![winner]
                    }
                }
            } else {
                users.clone()
            };
            let load = moving.len() as u32;
            max_load = max_load.max(load);
            self.trace.link_loads.push((step, *link, load));
        }
        self.metrics.max_link_load_per_step.push(max_load);
        self.metrics.queue_wait_steps += blocked.len() as u64;

        let current = std::mem::take(&mut self.active);
        for (i, mut pkt) in current.into_iter().enumerate() {
            if blocked.contains(&i) {
                self.active.push(pkt);
                continue;
            }
            let planned = pkt.planned.take().expect("planned");
            if planned.hop != Hop::Hold {
                self.metrics.total_hops += 1;
            }
            pkt.hop_log.push(LoggedHop { step, hop: planned.hop });
            pkt.addr = planned.addr;
            pkt.header = planned.header;
            pkt.ready_since = step + 1;
            if pkt.header.b() == 0 {
                let hops = pkt.hop_log.iter().filter(|h| h.hop != Hop::Hold).count() as u32;
                self.arrive(step, &pkt, pkt.addr, hops);
                self.trace.packets.insert(
                    pkt.id,
                    PacketRecord {
                        id: pkt.id,
                        src: pkt.src,
                        tag: pkt.tag,
                        kind: pkt.kind,
                        hop_log: pkt.hop_log,
                    },
                );
            } else {
                self.active.push(pkt);
            }
        }
        Ok(())
    }

    fn arrive(&mut self, step: u32, pkt: &Packet, at: RouterAddr, hops: u32) {
        self.metrics.total_steps = self.metrics.total_steps.max(step);
        match pkt.kind {
            PacketKind::Data => self.metrics.deliveries.push(Delivery {
                step,
                dst: at,
                src: pkt.src,
                tag: pkt.tag,
                hops,
            }),
            PacketKind::Control => self.metrics.control_deliveries += 1,
        }
        if let Payload::Request { cabinet, router } = pkt.payload {
            if at.c == cabinet && at.p == router {
                let sink = pkt.src;
                let tag = self.params.index_of(at) as u64;
                if at == sink && pkt.prune_origin {
                    // The sink's own contribution never leaves its node; it
                    // is accounted with the rest of its round.
                    self.local_deliveries.entry(step + 4).or_default().push(Delivery {
                        step: step + 4,
                        dst: sink,
                        src: sink,
                        tag,
                        hops: 0,
                    });
                } else {
                    let header = header_for(self.params, at, sink).expect("addresses in range");
                    self.future.entry(step + 2).or_default().push(Launch::data(at, header, tag));
                }
            }
        }
    }

    fn finish(mut self) -> (Metrics, Trace) {
        for pkt in self.active.drain(..) {
            self.trace.packets.insert(
                pkt.id,
                PacketRecord {
                    id: pkt.id,
                    src: pkt.src,
                    tag: pkt.tag,
                    kind: pkt.kind,
                    hop_log: pkt.hop_log,
                },
            );
        }
        self.metrics.deliveries.sort();
        (self.metrics, self.trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::DestinationHeader;

    fn p(k: u32, m: u32) -> NetParams {
        NetParams::new(k, m).unwrap()
    }

    fn a(c: u32, d: u32, p: u32) -> RouterAddr {
        RouterAddr::new(c, d, p)
    }

    fn one_slot(launches: Vec<Launch>) -> Schedule {
        Schedule {
            slots: vec![Slot {
                step: 1,
                kind: SlotKind::Data,
                launches,
            }],
        }
    }

    fn minimal(n: &NetParams, src: RouterAddr, dst: RouterAddr, tag: u64) -> Launch {
        Launch::data(src, header_for(n, src, dst).unwrap(), tag)
    }

    #[test]
    fn single_packet_arrives_at_step_three() {
        let n = p(2, 4);
        let m = run(&n, &one_slot(vec![minimal(&n, a(0, 0, 0), a(1, 2, 3), 0)]), &SimConfig::strict()).unwrap();
        assert!(m.conflicts.is_empty());
        assert_eq!(m.deliveries.len(), 1);
        assert_eq!(m.deliveries[0].step, 3);
        assert_eq!(m.deliveries[0].dst, a(1, 2, 3));
        assert_eq!(m.total_steps, 3);
    }

    #[test]
    fn same_drawers_conflict_once_on_the_global_link() {
        let n = p(2, 4);
        let s = one_slot(vec![
            minimal(&n, a(0, 0, 1), a(1, 1, 0), 0),
            minimal(&n, a(0, 0, 2), a(1, 1, 3), 1),
        ]);
        let m = run(&n, &s, &SimConfig::strict()).unwrap();
        assert_eq!(m.conflicts.len(), 1);
        assert!(m.conflicts[0].link.is_global());
        assert!(m.failed);
        // still delivered
        assert_eq!(m.deliveries.len(), 2);
    }

    #[test]
    fn different_source_drawers_do_not_conflict() {
        let n = p(2, 4);
        let s = one_slot(vec![
            minimal(&n, a(0, 0, 1), a(1, 1, 0), 0),
            minimal(&n, a(0, 1, 2), a(1, 1, 3), 1),
        ]);
        let m = run(&n, &s, &SimConfig::strict()).unwrap();
        assert!(m.conflicts.is_empty());
        assert!(!m.failed);
    }

    #[test]
    fn queued_mode_serialises_and_delays() {
        let n = p(2, 4);
        let s = one_slot(vec![
            minimal(&n, a(0, 0, 1), a(1, 1, 0), 0),
            minimal(&n, a(0, 0, 2), a(1, 1, 3), 1),
        ]);
        for d in [Discipline::Lifo, Discipline::Fifo] {
            let m = run(&n, &s, &SimConfig::queued(d)).unwrap();
            assert!(m.conflicts.is_empty());
            assert_eq!(m.queue_wait_steps, 1);
            assert_eq!(m.total_steps, 4);
            assert!(m.max_link_load_per_step.iter().all(|&l| l <= 1));
        }
    }

    #[test]
    fn predicate_examples() {
        assert!(conflict_predicate(a(0, 0, 1), a(1, 1, 0), a(0, 0, 2), a(1, 1, 3)).unwrap());
        assert!(!conflict_predicate(a(0, 0, 1), a(1, 1, 0), a(0, 1, 2), a(1, 1, 3)).unwrap());
        assert!(conflict_predicate(a(0, 0, 1), a(1, 1, 0), a(0, 0, 2), a(1, 1, 0)).is_err());
    }

    #[test]
    fn broadcast_expand_stages() {
        let n = p(2, 4);
        let copies = broadcast_expand(&n, a(0, 0, 1), SourceVectorHeader::broadcast(3).into()).unwrap();
        let targets: BTreeSet<_> = copies.iter().map(|c| c.1).collect();
        assert_eq!(targets, (0..4).map(|q| a(0, 0, q)).collect());
        assert!(copies.iter().all(|c| c.2.b() == 2));
        // fixed point keeps its port-0 copy
        let g = broadcast_expand(&n, a(1, 2, 2), SourceVectorHeader::broadcast(2).into()).unwrap();
        assert_eq!(g[0].0, Hop::Hold);
        assert_eq!(g.len(), 2);
        let dh = Header::Destination(DestinationHeader::new(3, a(0, 0, 0), a(0, 0, 0)));
        assert!(broadcast_expand(&n, a(0, 0, 0), dh).is_err());
    }

    #[test]
    fn single_broadcast_reaches_everyone_once() {
        for (k, m) in [(2, 4), (1, 2), (3, 4)] {
            let n = p(k, m);
            for root in [a(0, 0, 1), a(0, 1, 1)] {
                let s = one_slot(vec![Launch::data(root, SourceVectorHeader::broadcast(3), 7)]);
                let out = run(&n, &s, &SimConfig::strict()).unwrap();
                assert!(out.conflicts.is_empty());
                assert_eq!(out.total_steps, 3);
                let dsts: BTreeSet<_> = out.deliveries.iter().map(|d| d.dst).collect();
                assert_eq!(out.deliveries.len(), n.router_count());
                assert_eq!(dsts.len(), n.router_count());
            }
        }
    }

    #[test]
    fn verify_delivery_reports_diff() {
        let n = p(2, 4);
        let m = run(&n, &one_slot(vec![minimal(&n, a(0, 0, 0), a(1, 2, 3), 5)]), &SimConfig::strict()).unwrap();
        assert!(verify_delivery(&m, &[(a(0, 0, 0), a(1, 2, 3), 5)]).ok);
        let bad = verify_delivery(&m, &[(a(0, 0, 0), a(1, 2, 2), 5)]);
        assert!(!bad.ok);
        assert_eq!(bad.missing.len(), 1);
        assert_eq!(bad.unexpected.len(), 1);
    }

    #[test]
    fn step_limit_is_an_error() {
        let n = p(2, 4);
        let mut cfg = SimConfig::strict();
        cfg.max_steps = Some(1);
        let err = run(&n, &one_slot(vec![minimal(&n, a(0, 0, 0), a(1, 2, 3), 0)]), &cfg).unwrap_err();
        assert!(matches!(err, Error::StepLimit { .. }));
    }

    #[test]
    fn invalid_launches_rejected() {
        let n = p(2, 4);
        let bad_port = one_slot(vec![Launch::data(a(0, 0, 0), SourceVectorHeader::new(3, 2, 0, 0), 0)]);
        assert!(run(&n, &bad_port, &SimConfig::strict()).is_err());
        let no_policy = one_slot(vec![Launch::data(
            a(0, 0, 0),
            DestinationHeader::new(5, a(1, 1, 1), a(0, 0, 0)),
            0,
        )]);
        assert!(run(&n, &no_policy, &SimConfig::strict()).is_err());
    }
}
