//! Construction of the Swapped Dragonfly `D3(K,M)`.
//!
//! Routers are addressed `(c,d,p)` with `c mod K` (cabinet), `d mod M`
//! (drawer) and `p mod M` (router). Each drawer is a complete graph on its
//! `M` routers. Global port `γ` of `(c,d,p)` is wired to global port `-γ` of
//! `(c+γ,p,d)`; note the swap of `d` and `p`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a `D3(K,M)` network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetParams {
    k: u32,
    m: u32,
}

impl NetParams {
    /// Validates `K >= 1` and `M >= 2`. Odd `M` or `M < 4` is accepted, but
    /// such networks report `primitives_ok() == false`.
    pub fn new(k: u32, m: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParams(format!("K must be >= 1, got {k}")));
        }
        if m < 2 {
            return Err(Error::InvalidParams(format!("M must be >= 2, got {m}")));
        }
        // Router indices are dense usize; keep K*M^2 well inside u32 too.
        if (k as u64) * (m as u64) * (m as u64) > u32::MAX as u64 {
            return Err(Error::InvalidParams(format!("D3({k},{m}) is too large")));
        }
        Ok(NetParams { k, m })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn router_count(&self) -> usize {
        (self.k * self.m * self.m) as usize
    }

    /// The collective schedulers need an even drawer width of at least four.
    pub fn primitives_ok(&self) -> bool {
        self.m >= 4 && self.m.is_multiple_of(2)
    }

    pub fn require_primitives(&self) -> Result<()> {
        if self.primitives_ok() {
            Ok(())
        } else {
            Err(Error::Precondition {
                what: format!("D3({},{}) has M = {}", self.k, self.m, self.m),
                hypothesis: "M even and M >= 4",
            })
        }
    }

    pub fn contains(&self, addr: RouterAddr) -> bool {
        addr.c < self.k && addr.d < self.m && addr.p < self.m
    }

    pub fn check(&self, addr: RouterAddr) -> Result<()> {
        if self.contains(addr) {
            Ok(())
        } else {
            Err(Error::AddressOutOfRange {
                addr,
                k: self.k,
                m: self.m,
            })
        }
    }

    /// Dense index consistent with the `(c,d,p)` order.
    pub fn index_of(&self, addr: RouterAddr) -> usize {
        ((addr.c * self.m + addr.d) * self.m + addr.p) as usize
    }

    pub fn addr_at(&self, index: usize) -> RouterAddr {
        let m = self.m as usize;
        RouterAddr::new((index / (m * m)) as u32, ((index / m) % m) as u32, (index % m) as u32)
    }

    /// All routers in `(c,d,p)` order.
    pub fn routers(&self) -> impl Iterator<Item = RouterAddr> + '_ {
        (0..self.router_count()).map(move |i| self.addr_at(i))
    }

    pub(crate) fn add_k(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.k
    }

    pub(crate) fn sub_k(&self, a: u32, b: u32) -> u32 {
        (a + self.k - b % self.k) % self.k
    }

    pub(crate) fn add_m(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.m
    }

    pub(crate) fn sub_m(&self, a: u32, b: u32) -> u32 {
        (a + self.m - b % self.m) % self.m
    }
}

/// Router coordinate `(c,d,p)`. Ordering is lexicographic on `(c,d,p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct RouterAddr {
    pub c: u32,
    pub d: u32,
    pub p: u32,
}

impl RouterAddr {
    pub const fn new(c: u32, d: u32, p: u32) -> Self {
        RouterAddr { c, d, p }
    }

    /// Routers `(c,p,p)` are fixed by the swap: their global port 0 leads
    /// back to themselves.
    pub fn is_fixed_point(&self) -> bool {
        self.d == self.p
    }
}

impl From<RouterAddr> for String {
    fn from(a: RouterAddr) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for RouterAddr {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for RouterAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.c, self.d, self.p)
    }
}

impl FromStr for RouterAddr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split('.').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected address c.d.p, got `{s}`")));
        }
        let mut v = [0u32; 3];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Parse(format!("bad coordinate `{part}` in `{s}`")))?;
        }
        Ok(RouterAddr::new(v[0], v[1], v[2]))
    }
}

/// A directed link, the unit of capacity in the simulator.
///
/// `Global { c, d, p, port }` leaves `(c,d,p)` through global port `port`
/// and arrives at `(c+port, p, d)`. For the swap fixed points `(c,p,p)` with
/// `port == 0` the "link" is a self-port: it occupies the global send slot of
/// the router but goes nowhere. Holds (local port 0) have no `LinkId`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkId {
    Local { c: u32, d: u32, from: u32, to: u32 },
    Global { c: u32, d: u32, p: u32, port: u32 },
}

impl LinkId {
    pub fn source(&self) -> RouterAddr {
        match *self {
            LinkId::Local { c, d, from, .. } => RouterAddr::new(c, d, from),
            LinkId::Global { c, d, p, .. } => RouterAddr::new(c, d, p),
        }
    }

    pub fn target(&self, params: &NetParams) -> RouterAddr {
        match *self {
            LinkId::Local { c, d, to, .. } => RouterAddr::new(c, d, to),
            LinkId::Global { c, d, p, port } => RouterAddr::new(params.add_k(c, port), p, d),
        }
    }

    pub fn reverse(&self, params: &NetParams) -> LinkId {
        match *self {
            LinkId::Local { c, d, from, to } => LinkId::Local { c, d, from: to, to: from },
            LinkId::Global { c, d, p, port } => LinkId::Global {
                c: params.add_k(c, port),
                d: p,
                p: d,
                port: params.sub_k(0, port),
            },
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self, LinkId::Global { .. })
    }

    pub fn is_self_port(&self) -> bool {
        matches!(*self, LinkId::Global { d, p, port, .. } if port == 0 && d == p)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LinkId::Local { c, d, from, to } => write!(f, "l:{c}.{d}.{from}>{to}"),
            LinkId::Global { c, d, p, port } => write!(f, "g:{c}.{d}.{p}/{port}"),
        }
    }
}

/// What a packet does during one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "link", rename_all = "lowercase")]
pub enum Hop {
    /// Stays in the router (local port 0). Uses no link.
    Hold,
    Link(LinkId),
}

impl Hop {
    pub fn link(&self) -> Option<LinkId> {
        match self {
            Hop::Hold => None,
            Hop::Link(l) => Some(*l),
        }
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hop::Hold => f.write_str("hold"),
            Hop::Link(l) => l.fmt(f),
        }
    }
}

/// `(c,d,p) -> (c,d,p+port)`. Port 0 is the hold and returns `addr`.
pub fn local_neighbor(params: &NetParams, addr: RouterAddr, port: u32) -> Result<RouterAddr> {
    params.check(addr)?;
    if port >= params.m {
        return Err(Error::PortOutOfRange {
            kind: "local",
            port,
            limit: params.m,
        });
    }
    Ok(RouterAddr::new(addr.c, addr.d, params.add_m(addr.p, port)))
}

/// `(c,d,p) -> (c+port,p,d)` together with the port it arrives on.
pub fn global_neighbor(params: &NetParams, addr: RouterAddr, port: u32) -> Result<(RouterAddr, u32)> {
    params.check(addr)?;
    if port >= params.k {
        return Err(Error::PortOutOfRange {
            kind: "global",
            port,
            limit: params.k,
        });
    }
    Ok((
        RouterAddr::new(params.add_k(addr.c, port), addr.p, addr.d),
        params.sub_k(0, port),
    ))
}

pub fn local_hop(params: &NetParams, addr: RouterAddr, port: u32) -> Result<(RouterAddr, Hop)> {
    let next = local_neighbor(params, addr, port)?;
    let hop = if port == 0 {
        Hop::Hold
    } else {
        Hop::Link(LinkId::Local {
            c: addr.c,
            d: addr.d,
            from: addr.p,
            to: next.p,
        })
    };
    Ok((next, hop))
}

pub fn global_hop(params: &NetParams, addr: RouterAddr, port: u32) -> Result<(RouterAddr, Hop)> {
    let (next, _) = global_neighbor(params, addr, port)?;
    Ok((
        next,
        Hop::Link(LinkId::Global {
            c: addr.c,
            d: addr.d,
            p: addr.p,
            port,
        }),
    ))
}

/// Every directed link of the network, self-ports included, in sorted order.
pub fn directed_links(params: &NetParams) -> Vec<LinkId> {
    let mut links = Vec::with_capacity(params.router_count() * (params.m + params.k - 1) as usize);
    for r in params.routers() {
        for to in 0..params.m {
            if to != r.p {
                links.push(LinkId::Local {
                    c: r.c,
                    d: r.d,
                    from: r.p,
                    to,
                });
            }
        }
        for port in 0..params.k {
            links.push(LinkId::Global {
                c: r.c,
                d: r.d,
                p: r.p,
                port,
            });
        }
    }
    links.sort();
    links
}

/// Distinct neighbours of `addr` over local and global links.
pub fn neighbors(params: &NetParams, addr: RouterAddr) -> Vec<RouterAddr> {
    let mut out = BTreeSet::new();
    for q in 0..params.m {
        if q != addr.p {
            out.insert(RouterAddr::new(addr.c, addr.d, q));
        }
    }
    for port in 0..params.k {
        let next = RouterAddr::new(params.add_k(addr.c, port), addr.p, addr.d);
        if next != addr {
            out.insert(next);
        }
    }
    out.into_iter().collect()
}

/// Hop distances from `src` to every router, indexed by [`NetParams::index_of`].
pub fn bfs_distances(params: &NetParams, src: RouterAddr) -> Result<Vec<u32>> {
    params.check(src)?;
    let mut dist = vec![u32::MAX; params.router_count()];
    let mut queue = VecDeque::new();
    dist[params.index_of(src)] = 0;
    queue.push_back(src);
    while let Some(r) = queue.pop_front() {
        let next_dist = dist[params.index_of(r)] + 1;
        for n in neighbors(params, r) {
            let slot = &mut dist[params.index_of(n)];
            if *slot == u32::MAX {
                *slot = next_dist;
                queue.push_back(n);
            }
        }
    }
    Ok(dist)
}

pub fn bfs_distance(params: &NetParams, src: RouterAddr, dst: RouterAddr) -> Result<u32> {
    params.check(dst)?;
    Ok(bfs_distances(params, src)?[params.index_of(dst)])
}

/// Maximum BFS distance over all ordered pairs.
pub fn diameter(params: &NetParams) -> u32 {
    params
        .routers()
        .map(|r| {
            bfs_distances(params, r)
                .expect("router from params")
                .into_iter()
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// One ribbon cable: global port `port` of every router of drawer
/// `(cabinet, drawer)`, in router order, to column `target_column` of
/// cabinet `target_cabinet` on port `target_port`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RibbonBundle {
    pub cabinet: u32,
    pub drawer: u32,
    pub port: u32,
    pub target_cabinet: u32,
    pub target_column: u32,
    pub target_port: u32,
    pub width: u32,
}

impl RibbonBundle {
    /// The directed global links carried by this bundle, one per router.
    pub fn links(&self) -> Vec<LinkId> {
        (0..self.width)
            .map(|p| LinkId::Global {
                c: self.cabinet,
                d: self.drawer,
                p,
                port: self.port,
            })
            .collect()
    }
}

/// `K*M*K` bundles of width `M`, sorted by `(cabinet, drawer, port)`.
pub fn wiring_plan(params: &NetParams) -> Vec<RibbonBundle> {
    let mut plan = Vec::with_capacity((params.k * params.m * params.k) as usize);
    for cabinet in 0..params.k {
        for drawer in 0..params.m {
            for port in 0..params.k {
                plan.push(RibbonBundle {
                    cabinet,
                    drawer,
                    port,
                    target_cabinet: params.add_k(cabinet, port),
                    target_column: drawer,
                    target_port: params.sub_k(0, port),
                    width: params.m,
                });
            }
        }
    }
    plan
}

pub fn wiring_csv(plan: &[RibbonBundle]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for b in plan {
        w.serialize(b)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Directed links crossing a cut, split by class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CutSize {
    pub local: usize,
    pub global: usize,
}

impl CutSize {
    pub fn total(&self) -> usize {
        self.local + self.global
    }
}

/// Counts directed links with exactly one endpoint in `side_a`.
pub fn cut_size(params: &NetParams, side_a: &BTreeSet<RouterAddr>) -> Result<CutSize> {
    if side_a.is_empty() {
        return Err(Error::InvalidCut("side A is empty".into()));
    }
    for &a in side_a {
        params.check(a)?;
    }
    if side_a.len() == params.router_count() {
        return Err(Error::InvalidCut("side A contains every router".into()));
    }
    let mut inside = vec![false; params.router_count()];
    for &a in side_a {
        inside[params.index_of(a)] = true;
    }
    let mut cut = CutSize::default();
    for link in directed_links(params) {
        let s = inside[params.index_of(link.source())];
        let t = inside[params.index_of(link.target(params))];
        if s != t {
            if link.is_global() {
                cut.global += 1;
            } else {
                cut.local += 1;
            }
        }
    }
    Ok(cut)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    #[serde(rename = "edges", alias = "edge-list")]
    EdgeList,
    Dot,
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::EdgeList => "edges",
            GraphFormat::Dot => "dot",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edges" | "edge-list" | "edgelist" => Ok(GraphFormat::EdgeList),
            "dot" => Ok(GraphFormat::Dot),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// An undirected edge, `a < b`, labelled from `a`'s side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub a: RouterAddr,
    pub b: RouterAddr,
    pub label: EdgeLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeLabel {
    Global(u32),
    Local(u32),
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Global(g) => write!(f, "g:{g}"),
            EdgeLabel::Local(l) => write!(f, "l:{l}"),
        }
    }
}

/// Undirected simple edge set plus the list of swap fixed points (whose
/// global port 0 pairs with itself and is not an edge).
pub fn undirected_edges(params: &NetParams) -> (Vec<Edge>, Vec<RouterAddr>) {
    let mut edges = Vec::new();
    let mut fixed = Vec::new();
    for a in params.routers() {
        for q in (a.p + 1)..params.m {
            edges.push(Edge {
                a,
                b: RouterAddr::new(a.c, a.d, q),
                label: EdgeLabel::Local(q - a.p),
            });
        }
        for port in 0..params.k {
            let b = RouterAddr::new(params.add_k(a.c, port), a.p, a.d);
            if b == a {
                fixed.push(a);
            } else if a < b {
                edges.push(Edge {
                    a,
                    b,
                    label: EdgeLabel::Global(port),
                });
            }
        }
    }
    edges.sort();
    (edges, fixed)
}

pub fn export_graph(params: &NetParams, format: GraphFormat) -> String {
    let (edges, fixed) = undirected_edges(params);
    let mut out = String::new();
    match format {
        GraphFormat::EdgeList => {
            for e in &edges {
                out.push_str(&format!("{} {} {}\n", e.a, e.b, e.label));
            }
            for f in &fixed {
                out.push_str(&format!("# fixed {f} g:0\n"));
            }
        }
        GraphFormat::Dot => {
            out.push_str(&format!("graph \"D3({},{})\" {{\n", params.k, params.m));
            for r in params.routers() {
                if r.is_fixed_point() {
                    out.push_str(&format!("  \"{r}\" [shape=doublecircle, xlabel=\"g:0\"];\n"));
                } else {
                    out.push_str(&format!("  \"{r}\";\n"));
                }
            }
            for e in &edges {
                let style = match e.label {
                    EdgeLabel::Global(_) => ", style=bold",
                    EdgeLabel::Local(_) => "",
                };
                out.push_str(&format!("  \"{}\" -- \"{}\" [label=\"{}\"{style}];\n", e.a, e.b, e.label));
            }
            out.push_str("}\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: u32, m: u32) -> NetParams {
        NetParams::new(k, m).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(p(2, 4).primitives_ok());
        assert!(p(3, 4).primitives_ok());
        assert_eq!(p(3, 4).router_count(), 48);
        assert!(!p(2, 3).primitives_ok());
        assert!(!p(2, 2).primitives_ok());
        assert!(NetParams::new(0, 4).is_err());
        assert!(NetParams::new(2, 1).is_err());
        assert!(matches!(p(2, 5).require_primitives(), Err(Error::Precondition { .. })));
    }

    #[test]
    fn index_roundtrip() {
        let n = p(3, 4);
        for (i, r) in n.routers().enumerate() {
            assert_eq!(n.index_of(r), i);
        }
    }

    #[test]
    fn local_neighbor_examples() {
        let n = p(2, 4);
        assert_eq!(local_neighbor(&n, RouterAddr::new(0, 0, 1), 2).unwrap(), RouterAddr::new(0, 0, 3));
        assert_eq!(local_neighbor(&n, RouterAddr::new(0, 0, 3), 2).unwrap(), RouterAddr::new(0, 0, 1));
        assert_eq!(local_neighbor(&n, RouterAddr::new(0, 0, 1), 0).unwrap(), RouterAddr::new(0, 0, 1));
        assert!(local_neighbor(&n, RouterAddr::new(0, 0, 1), 4).is_err());
        assert_eq!(local_hop(&n, RouterAddr::new(0, 0, 1), 0).unwrap().1, Hop::Hold);
    }

    #[test]
    fn global_neighbor_examples() {
        let n6 = p(6, 6);
        assert_eq!(
            global_neighbor(&n6, RouterAddr::new(4, 5, 3), 4).unwrap(),
            (RouterAddr::new(2, 3, 5), 2)
        );
        let n2 = p(2, 4);
        assert_eq!(
            global_neighbor(&n2, RouterAddr::new(0, 1, 2), 1).unwrap(),
            (RouterAddr::new(1, 2, 1), 1)
        );
        assert_eq!(
            global_neighbor(&n2, RouterAddr::new(1, 3, 0), 0).unwrap(),
            (RouterAddr::new(1, 0, 3), 0)
        );
        assert!(global_neighbor(&n2, RouterAddr::new(0, 0, 0), 2).is_err());
        assert!(global_neighbor(&n2, RouterAddr::new(0, 4, 0), 0).is_err());
    }

    #[test]
    fn link_reverse_and_self_ports() {
        let n = p(3, 4);
        for l in directed_links(&n) {
            let r = l.reverse(&n);
            assert_eq!(r.source(), l.target(&n));
            assert_eq!(r.target(&n), l.source());
            assert_eq!(r.reverse(&n), l);
            assert_eq!(l.is_self_port(), l.source() == l.target(&n));
        }
        let self_ports = directed_links(&n).iter().filter(|l| l.is_self_port()).count();
        assert_eq!(self_ports, 3 * 4);
    }

    #[test]
    fn bfs_small_cases() {
        let n = p(2, 4);
        let a = RouterAddr::new(0, 1, 2);
        assert_eq!(bfs_distance(&n, a, a).unwrap(), 0);
        // d' != p, p' != d, distinct: unique shortest path of length 3
        assert_eq!(bfs_distance(&n, RouterAddr::new(0, 0, 1), RouterAddr::new(1, 2, 3)).unwrap(), 3);
        assert_eq!(diameter(&n), 3);
    }

    #[test]
    fn wiring_plan_shapes() {
        let one = wiring_plan(&p(1, 5));
        assert_eq!(one.len(), 5);
        assert!(one.iter().all(|b| b.port == 0 && b.target_column == b.drawer && b.target_cabinet == 0));

        let six = wiring_plan(&p(6, 6));
        assert!(six.contains(&RibbonBundle {
            cabinet: 4,
            drawer: 5,
            port: 4,
            target_cabinet: 2,
            target_column: 5,
            target_port: 2,
            width: 6,
        }));

        let csv = wiring_csv(&wiring_plan(&p(2, 4))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "cabinet,drawer,port,target_cabinet,target_column,target_port,width"
        );
        assert_eq!(lines.count(), 16);
    }

    #[test]
    fn cut_single_router() {
        let n = p(2, 4);
        // (0,0,1) is not a swap fixed point: full degree in both directions.
        let one: BTreeSet<_> = [RouterAddr::new(0, 0, 1)].into();
        assert_eq!(cut_size(&n, &one).unwrap().total(), 2 * 3 + 2 * 2);
        // (0,0,0) is: its global port 0 is a self-port and never crosses.
        let fixed: BTreeSet<_> = [RouterAddr::new(0, 0, 0)].into();
        assert_eq!(cut_size(&n, &fixed).unwrap().total(), 2 * 3 + 2);
    }

    #[test]
    fn cut_errors() {
        let n = p(1, 2);
        assert!(matches!(cut_size(&n, &BTreeSet::new()), Err(Error::InvalidCut(_))));
        let all: BTreeSet<_> = n.routers().collect();
        assert!(matches!(cut_size(&n, &all), Err(Error::InvalidCut(_))));
    }

    #[test]
    fn edge_list_d3_1_2() {
        let text = export_graph(&p(1, 2), GraphFormat::EdgeList);
        assert_eq!(
            text,
            "0.0.0 0.0.1 l:1\n0.0.1 0.1.0 g:0\n0.1.0 0.1.1 l:1\n# fixed 0.0.0 g:0\n# fixed 0.1.1 g:0\n"
        );
    }

    #[test]
    fn dot_vertex_count() {
        let dot = export_graph(&p(3, 4), GraphFormat::Dot);
        let vertices = dot.lines().filter(|l| l.trim_end().ends_with(';') && !l.contains("--")).count();
        assert_eq!(vertices, 48);
        assert!("svg".parse::<GraphFormat>().is_err());
    }

    #[test]
    fn address_parse() {
        assert_eq!("1.2.3".parse::<RouterAddr>().unwrap(), RouterAddr::new(1, 2, 3));
        assert!("1.2".parse::<RouterAddr>().is_err());
        assert!("1.x.3".parse::<RouterAddr>().is_err());
        assert_eq!(RouterAddr::new(4, 5, 3).to_string(), "4.5.3");
    }
}
