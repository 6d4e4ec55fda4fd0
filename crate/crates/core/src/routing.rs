//! Synchronized source-vector headers and destination/deflection headers.
//!
//! A source-vector header `(B,b; γ,π,δ)` is applied in the order `δ`
//! (local), `γ` (global), `π` (local) as the counter `b` runs 3, 2, 1. The
//! counter drops by one every step, holds included, so every minimal
//! delivery takes exactly three steps.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{global_hop, local_hop, Hop, NetParams, RouterAddr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceVectorHeader {
    /// Broadcast bit.
    pub broadcast: bool,
    /// Sync counter. 0 = arrived, 3..1 select δ, γ, π; 4 is the glgl variant.
    pub b: u8,
    /// γ: global port used at `b = 2` (or first, at `b = 4`).
    pub global_port: u32,
    /// π: local port used at `b = 1`.
    pub last_local: u32,
    /// δ: local port used at `b = 3`.
    pub first_local: u32,
}

impl SourceVectorHeader {
    pub const fn new(b: u8, global_port: u32, last_local: u32, first_local: u32) -> Self {
        SourceVectorHeader {
            broadcast: false,
            b,
            global_port,
            last_local,
            first_local,
        }
    }

    /// `(1,b;0,0,0)`.
    pub const fn broadcast(b: u8) -> Self {
        SourceVectorHeader {
            broadcast: true,
            b,
            global_port: 0,
            last_local: 0,
            first_local: 0,
        }
    }

    pub fn validate(&self, params: &NetParams) -> Result<()> {
        if self.b > 4 {
            return Err(Error::InvalidHeader(format!("counter {} exceeds 4", self.b)));
        }
        if self.broadcast && self.b > 3 {
            return Err(Error::InvalidHeader("broadcast headers use b <= 3".into()));
        }
        if self.global_port >= params.k() {
            return Err(Error::PortOutOfRange {
                kind: "global",
                port: self.global_port,
                limit: params.k(),
            });
        }
        for port in [self.last_local, self.first_local] {
            if port >= params.m() {
                return Err(Error::PortOutOfRange {
                    kind: "local",
                    port,
                    limit: params.m(),
                });
            }
        }
        Ok(())
    }

    /// Where a `b = 3` (or `b = 4`) header launched at `src` ends up:
    /// `(c+γ, p+δ, d+π)`.
    pub fn destination_from(&self, params: &NetParams, src: RouterAddr) -> RouterAddr {
        RouterAddr::new(
            params.add_k(src.c, self.global_port),
            params.add_m(src.p, self.first_local),
            params.add_m(src.d, self.last_local),
        )
    }
}

impl fmt::Display for SourceVectorHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sv:{},{},{},{},{}",
            self.broadcast as u8, self.b, self.global_port, self.last_local, self.first_local
        )
    }
}

/// `(b; dest, loc)`. `loc` names the router currently holding the packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DestinationHeader {
    pub b: u8,
    pub dest: RouterAddr,
    pub loc: RouterAddr,
}

impl DestinationHeader {
    pub fn new(b: u8, dest: RouterAddr, loc: RouterAddr) -> Self {
        DestinationHeader { b, dest, loc }
    }

    pub fn validate(&self, params: &NetParams) -> Result<()> {
        if self.b > 5 {
            return Err(Error::InvalidHeader(format!("counter {} exceeds 5", self.b)));
        }
        params.check(self.dest)?;
        params.check(self.loc)?;
        if self.b == 0 && self.loc != self.dest {
            return Err(Error::InvalidHeader("b = 0 but location is not the destination".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Header {
    SourceVector(SourceVectorHeader),
    Destination(DestinationHeader),
}

impl Header {
    pub fn b(&self) -> u8 {
        match self {
            Header::SourceVector(h) => h.b,
            Header::Destination(h) => h.b,
        }
    }

    pub fn is_broadcast(&self) -> bool {
        matches!(self, Header::SourceVector(h) if h.broadcast)
    }
}

impl From<SourceVectorHeader> for Header {
    fn from(h: SourceVectorHeader) -> Self {
        Header::SourceVector(h)
    }
}

impl From<DestinationHeader> for Header {
    fn from(h: DestinationHeader) -> Self {
        Header::Destination(h)
    }
}

/// Header literal as written on the command line: `sv:B,b,γ,π,δ` or
/// `dh:b,c.d.p` (the location is supplied by the launching router).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderLiteral {
    SourceVector(SourceVectorHeader),
    Destination { b: u8, dest: RouterAddr },
}

impl HeaderLiteral {
    pub fn at(self, src: RouterAddr) -> Header {
        match self {
            HeaderLiteral::SourceVector(h) => Header::SourceVector(h),
            HeaderLiteral::Destination { b, dest } => Header::Destination(DestinationHeader::new(b, dest, src)),
        }
    }
}

impl FromStr for HeaderLiteral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad header literal `{s}`"));
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        if let Some(rest) = s.strip_prefix("sv:") {
            let f: Vec<&str> = rest.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let broadcast = match num(f[0])? {
                0 => false,
                1 => true,
                _ => return Err(bad()),
            };
            let b = u8::try_from(num(f[1])?).map_err(|_| bad())?;
            Ok(HeaderLiteral::SourceVector(SourceVectorHeader {
                broadcast,
                b,
                global_port: num(f[2])?,
                last_local: num(f[3])?,
                first_local: num(f[4])?,
            }))
        } else if let Some(rest) = s.strip_prefix("dh:") {
            let (b, dest) = rest.split_once(',').ok_or_else(bad)?;
            Ok(HeaderLiteral::Destination {
                b: u8::try_from(num(b)?).map_err(|_| bad())?,
                dest: dest.parse()?,
            })
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for HeaderLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeaderLiteral::SourceVector(h) => h.fmt(f),
            HeaderLiteral::Destination { b, dest } => write!(f, "dh:{b},{dest}"),
        }
    }
}

/// The minimal lgl header from `src` to `dst`: `(3; c'-c, p'-d, d'-p)`.
pub fn header_for(params: &NetParams, src: RouterAddr, dst: RouterAddr) -> Result<SourceVectorHeader> {
    params.check(src)?;
    params.check(dst)?;
    Ok(SourceVectorHeader::new(
        3,
        params.sub_k(dst.c, src.c),
        params.sub_m(dst.p, src.d),
        params.sub_m(dst.d, src.p),
    ))
}

/// Result of advancing a packet by one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step<H> {
    pub addr: RouterAddr,
    pub header: H,
    pub hop: Hop,
}

/// Advances a unicast source-vector packet one step.
///
/// At `b = 4` the packet takes global port `γ` and the remaining three hops
/// are rewritten into the minimal header from the new location to the
/// destination the `b = 3` header would have reached. This is the only case
/// where header fields change in transit.
pub fn step_source_vector(
    params: &NetParams,
    addr: RouterAddr,
    header: SourceVectorHeader,
) -> Result<Step<SourceVectorHeader>> {
    header.validate(params)?;
    params.check(addr)?;
    let mut next_header = header;
    next_header.b = header
        .b
        .checked_sub(1)
        .ok_or_else(|| Error::InvalidHeader("packet has already arrived (b = 0)".into()))?;
    let (next, hop) = match header.b {
        4 => {
            let target = header.destination_from(params, addr);
            let (next, hop) = global_hop(params, addr, header.global_port)?;
            next_header = header_for(params, next, target)?;
            next_header.broadcast = header.broadcast;
            (next, hop)
        }
        3 => local_hop(params, addr, header.first_local)?,
        2 => global_hop(params, addr, header.global_port)?,
        1 => local_hop(params, addr, header.last_local)?,
        _ => unreachable!("validated"),
    };
    Ok(Step {
        addr: next,
        header: next_header,
        hop,
    })
}

/// A trajectory: the start router and each step taken from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub start: RouterAddr,
    pub steps: Vec<(Hop, RouterAddr)>,
}

impl Path {
    pub fn end(&self) -> RouterAddr {
        self.steps.last().map(|s| s.1).unwrap_or(self.start)
    }

    pub fn routers(&self) -> Vec<RouterAddr> {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.1)).collect()
    }

    pub fn links(&self) -> impl Iterator<Item = crate::topology::LinkId> + '_ {
        self.steps.iter().filter_map(|s| s.0.link())
    }

    /// `[{addr, link}, ...]`; the first entry has `link: null`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut out = vec![serde_json::json!({ "addr": self.start.to_string(), "link": null })];
        for (hop, addr) in &self.steps {
            let link = match hop {
                Hop::Hold => serde_json::Value::String("hold".into()),
                Hop::Link(l) => serde_json::Value::String(l.to_string()),
            };
            out.push(serde_json::json!({ "addr": addr.to_string(), "link": link }));
        }
        serde_json::Value::Array(out)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for (hop, addr) in &self.steps {
            write!(f, " -[{hop}]-> {addr}")?;
        }
        Ok(())
    }
}

/// Full trajectory of a unicast source-vector header until `b = 0`.
pub fn path_of(params: &NetParams, src: RouterAddr, header: SourceVectorHeader) -> Result<Path> {
    if header.broadcast {
        return Err(Error::InvalidHeader("path_of follows unicast headers only".into()));
    }
    let mut addr = src;
    let mut h = header;
    let mut steps = Vec::with_capacity(h.b as usize);
    while h.b > 0 {
        let s = step_source_vector(params, addr, h)?;
        steps.push((s.hop, s.addr));
        addr = s.addr;
        h = s.header;
    }
    Ok(Path { start: src, steps })
}

/// Local and global port lookup tables: entry `[row][col] = row - col`,
/// with the row taken from the destination and the column from the
/// current location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortTables {
    pub local: Vec<Vec<u32>>,
    pub global: Vec<Vec<u32>>,
}

pub fn port_tables(params: &NetParams) -> PortTables {
    let table = |n: u32| -> Vec<Vec<u32>> {
        (0..n).map(|row| (0..n).map(|col| (row + n - col) % n).collect()).collect()
    };
    PortTables {
        local: table(params.m()),
        global: table(params.k()),
    }
}

/// A resolved deflection choice: local port `D` for `b = 5`, global port
/// `C` for `b = 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Detour {
    pub local: u32,
    pub global: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum DeflectionPolicy {
    /// Uniform `D` and `C` drawn from the caller's generator.
    Random,
    /// `C = c' - c` and `D = 0`: the first global hop jumps straight to the
    /// destination cabinet.
    FixedC,
    Supplied { local: u32, global: u32 },
}

impl DeflectionPolicy {
    /// Fixes `D` and `C` at launch time.
    pub fn resolve<R: Rng + ?Sized>(
        &self,
        params: &NetParams,
        src: RouterAddr,
        dst: RouterAddr,
        rng: &mut R,
    ) -> Result<Detour> {
        match *self {
            DeflectionPolicy::Random => Ok(Detour {
                local: rng.gen_range(0..params.m()),
                global: rng.gen_range(0..params.k()),
            }),
            DeflectionPolicy::FixedC => Ok(Detour {
                local: 0,
                global: params.sub_k(dst.c, src.c),
            }),
            DeflectionPolicy::Supplied { local, global } => {
                if local >= params.m() {
                    return Err(Error::PortOutOfRange {
                        kind: "local",
                        port: local,
                        limit: params.m(),
                    });
                }
                if global >= params.k() {
                    return Err(Error::PortOutOfRange {
                        kind: "global",
                        port: global,
                        limit: params.k(),
                    });
                }
                Ok(Detour { local, global })
            }
        }
    }
}

/// Advances a destination-header packet one step by table lookup.
///
/// `detour` is only consulted at `b = 5` (local `D`) and `b = 4` (global `C`).
pub fn step_destination(
    params: &NetParams,
    header: DestinationHeader,
    tables: &PortTables,
    detour: Option<Detour>,
) -> Result<(DestinationHeader, Hop)> {
    header.validate(params)?;
    let loc = header.loc;
    let dest = header.dest;
    let need_detour = || {
        detour.ok_or_else(|| Error::InvalidHeader(format!("b = {} needs a deflection choice", header.b)))
    };
    let (next, hop) = match header.b {
        0 => return Err(Error::InvalidHeader("packet has already arrived (b = 0)".into())),
        5 => local_hop(params, loc, need_detour()?.local)?,
        4 => global_hop(params, loc, need_detour()?.global)?,
        3 => local_hop(params, loc, tables.local[dest.d as usize][loc.p as usize])?,
        2 => global_hop(params, loc, tables.global[dest.c as usize][loc.c as usize])?,
        1 => local_hop(params, loc, tables.local[dest.p as usize][loc.p as usize])?,
        _ => unreachable!("validated"),
    };
    Ok((DestinationHeader::new(header.b - 1, dest, next), hop))
}

/// Trajectory of a destination header started with counter `start_b`
/// (3, 4 or 5) under `policy`.
pub fn deflect_path<R: Rng + ?Sized>(
    params: &NetParams,
    src: RouterAddr,
    dst: RouterAddr,
    policy: DeflectionPolicy,
    start_b: u8,
    rng: &mut R,
) -> Result<Path> {
    if !(3..=5).contains(&start_b) {
        return Err(Error::InvalidHeader(format!("deflection starts at b in 3..=5, got {start_b}")));
    }
    let tables = port_tables(params);
    let detour = policy.resolve(params, src, dst, rng)?;
    let mut h = DestinationHeader::new(start_b, dst, src);
    h.validate(params)?;
    let mut steps = Vec::with_capacity(start_b as usize);
    while h.b > 0 {
        let (next, hop) = step_destination(params, h, &tables, Some(detour))?;
        steps.push((hop, next.loc));
        h = next;
    }
    Ok(Path { start: src, steps })
}
