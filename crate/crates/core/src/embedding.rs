//! Sub-networks `D3(K,L)` carved out of a host `D3(N,M)` by choosing a
//! cabinet subset `kappa` and a local-index subset `lambda`.
//!
//! Logical cabinet `i` is host cabinet `k_i` and logical local index `d` is
//! host index `l_d`; both subsets are kept sorted so the logical index is
//! the rank. Logical global port `gamma` at cabinet `i` becomes host port
//! `a[i+gamma][i] = k_{i+gamma} - k_i mod N`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::routing::{DestinationHeader, Header, SourceVectorHeader};
use crate::sim::Schedule;
use crate::topology::{directed_links, wiring_plan, LinkId, NetParams, RibbonBundle, RouterAddr};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    host: NetParams,
    kappa: Vec<u32>,
    lambda: Vec<u32>,
    logical: NetParams,
}

fn sorted_subset(values: &[u32], limit: u32, what: &str) -> Result<Vec<u32>> {
    let set: BTreeSet<u32> = values.iter().copied().collect();
    if set.len() != values.len() {
        return Err(Error::Embedding(format!("{what} has duplicate entries")));
    }
    if let Some(&bad) = set.iter().find(|&&v| v >= limit) {
        return Err(Error::Embedding(format!("{what} entry {bad} is not below {limit}")));
    }
    if set.is_empty() {
        return Err(Error::Embedding(format!("{what} is empty")));
    }
    Ok(set.into_iter().collect())
}

pub fn build_embedding(host: &NetParams, kappa: &[u32], lambda: &[u32]) -> Result<EmbeddingSpec> {
    let kappa = sorted_subset(kappa, host.k(), "cabinet subset")?;
    let lambda = sorted_subset(lambda, host.m(), "local subset")?;
    let logical = NetParams::new(kappa.len() as u32, lambda.len() as u32)?;
    Ok(EmbeddingSpec {
        host: *host,
        kappa,
        lambda,
        logical,
    })
}

/// Embedding that keeps every local index.
pub fn cabinet_embedding(host: &NetParams, kappa: &[u32]) -> Result<EmbeddingSpec> {
    let all: Vec<u32> = (0..host.m()).collect();
    build_embedding(host, kappa, &all)
}

impl EmbeddingSpec {
    pub fn host(&self) -> &NetParams {
        &self.host
    }

    pub fn logical(&self) -> &NetParams {
        &self.logical
    }

    pub fn kappa(&self) -> &[u32] {
        &self.kappa
    }

    pub fn lambda(&self) -> &[u32] {
        &self.lambda
    }

    /// `a[j][i] = k_j - k_i mod N`.
    pub fn cabinet_port(&self, j: usize, i: usize) -> u32 {
        let n = self.host.k();
        (self.kappa[j] + n - self.kappa[i]) % n
    }

    /// `b[j][i] = l_j - l_i mod M`.
    pub fn local_port(&self, j: usize, i: usize) -> u32 {
        let m = self.host.m();
        (self.lambda[j] + m - self.lambda[i]) % m
    }

    /// Host global ports used by logical cabinet `i`, indexed by target `j`.
    pub fn table_row(&self, i: usize) -> Vec<u32> {
        (0..self.kappa.len()).map(|j| self.cabinet_port(j, i)).collect()
    }

    pub fn table(&self) -> Vec<TableRow> {
        (0..self.kappa.len())
            .map(|i| TableRow {
                i: i as u32,
                k: self.kappa[i],
                ports: self.table_row(i),
            })
            .collect()
    }

    pub fn translate_addr(&self, logical: RouterAddr) -> Result<RouterAddr> {
        self.logical.check(logical)?;
        Ok(RouterAddr::new(
            self.kappa[logical.c as usize],
            self.lambda[logical.d as usize],
            self.lambda[logical.p as usize],
        ))
    }

    /// Logical address of a host router, if it is part of the embedding.
    pub fn logical_addr(&self, host: RouterAddr) -> Option<RouterAddr> {
        let c = self.kappa.binary_search(&host.c).ok()?;
        let d = self.lambda.binary_search(&host.d).ok()?;
        let p = self.lambda.binary_search(&host.p).ok()?;
        Some(RouterAddr::new(c as u32, d as u32, p as u32))
    }

    /// Host routers of the embedding, in logical order.
    pub fn image(&self) -> Vec<RouterAddr> {
        self.logical
            .routers()
            .map(|r| self.translate_addr(r).expect("logical router in range"))
            .collect()
    }

    /// Host routers outside the embedding.
    pub fn offline(&self) -> Vec<RouterAddr> {
        self.host.routers().filter(|r| self.logical_addr(*r).is_none()).collect()
    }

    /// Host ports `(gamma', pi', delta')` for logical vector
    /// `(gamma, pi, delta)` launched at logical router `src`. The host
    /// path from `translate_addr(src)` ends at the translated logical
    /// destination.
    pub fn translate_vector(&self, src: RouterAddr, gamma: u32, pi: u32, delta: u32) -> Result<(u32, u32, u32)> {
        self.logical.check(src)?;
        let (k, l) = (self.logical.k(), self.logical.m());
        for (kind, port, limit) in [("global", gamma, k), ("local", pi, l), ("local", delta, l)] {
            if port >= limit {
                return Err(Error::PortOutOfRange { kind, port, limit });
            }
        }
        let (i, d, p) = (src.c as usize, src.d as usize, src.p as usize);
        let g = self.cabinet_port((i + gamma as usize) % k as usize, i);
        let pi_host = self.local_port((d + pi as usize) % l as usize, d);
        let delta_host = self.local_port((p + delta as usize) % l as usize, p);
        Ok((g, pi_host, delta_host))
    }

    pub fn translate_header(&self, src: RouterAddr, header: Header) -> Result<Header> {
        match header {
            Header::SourceVector(h) if !h.broadcast && h.b <= 3 => {
                let (g, pi, delta) = self.translate_vector(src, h.global_port, h.last_local, h.first_local)?;
                Ok(Header::SourceVector(SourceVectorHeader::new(h.b, g, pi, delta)))
            }
            Header::Destination(h) if h.b <= 3 => Ok(Header::Destination(DestinationHeader::new(
                h.b,
                self.translate_addr(h.dest)?,
                self.translate_addr(h.loc)?,
            ))),
            other => Err(Error::Embedding(format!(
                "only minimal unicast headers can be translated, got {other:?}"
            ))),
        }
    }

    /// Rewrites a logical schedule so it runs on the host: sources and
    /// headers are translated, slot timing is unchanged.
    pub fn translate_schedule(&self, schedule: &Schedule) -> Result<Schedule> {
        let mut out = schedule.clone();
        for slot in &mut out.slots {
            for launch in &mut slot.launches {
                launch.header = self.translate_header(launch.src, launch.header)?;
                launch.src = self.translate_addr(launch.src)?;
            }
        }
        Ok(out)
    }

    fn translate_link(&self, link: LinkId) -> LinkId {
        match link {
            LinkId::Local { c, d, from, to } => LinkId::Local {
                c: self.kappa[c as usize],
                d: self.lambda[d as usize],
                from: self.lambda[from as usize],
                to: self.lambda[to as usize],
            },
            LinkId::Global { c, d, p, port } => {
                let j = (c + port) % self.logical.k();
                LinkId::Global {
                    c: self.kappa[c as usize],
                    d: self.lambda[d as usize],
                    p: self.lambda[p as usize],
                    port: self.cabinet_port(j as usize, c as usize),
                }
            }
        }
    }

    /// Host links of the logical network, self-ports included.
    pub fn host_links(&self) -> BTreeSet<LinkId> {
        directed_links(&self.logical)
            .into_iter()
            .map(|l| self.translate_link(l))
            .collect()
    }

    /// Host links with both ends inside the embedding.
    pub fn induced_links(&self) -> BTreeSet<LinkId> {
        directed_links(&self.host)
            .into_iter()
            .filter(|l| {
                self.logical_addr(l.source()).is_some() && self.logical_addr(l.target(&self.host)).is_some()
            })
            .collect()
    }

    /// Host ribbon bundles that carry the embedding's global links.
    pub fn wiring_plan(&self) -> Vec<RibbonBundle> {
        wiring_plan(&self.host)
            .into_iter()
            .filter(|b| {
                self.kappa.binary_search(&b.cabinet).is_ok()
                    && self.kappa.binary_search(&b.target_cabinet).is_ok()
                    && self.lambda.binary_search(&b.drawer).is_ok()
            })
            .collect()
    }

    pub fn table_csv(&self) -> Result<String> {
        table_csv(&self.table())
    }

    /// Rebuilds a full-width embedding from table rows, checking every
    /// port entry against the cabinet list.
    pub fn from_table(host: &NetParams, rows: &[TableRow]) -> Result<Self> {
        let kappa: Vec<u32> = rows.iter().map(|r| r.k).collect();
        let spec = cabinet_embedding(host, &kappa)?;
        for row in rows {
            let i = row.i as usize;
            if spec.kappa.get(i) != Some(&row.k) {
                return Err(Error::Embedding(format!("row {} names cabinet {} out of order", row.i, row.k)));
            }
            let want = spec.table_row(i);
            if row.ports != want {
                return Err(Error::Embedding(format!(
                    "row {} ports {:?} disagree with computed {:?}",
                    row.i, row.ports, want
                )));
            }
        }
        Ok(spec)
    }
}

/// One row of the cabinet port table: logical index, host cabinet, and the
/// host global port towards each logical cabinet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub i: u32,
    pub k: u32,
    pub ports: Vec<u32>,
}

fn format_ports(ports: &[u32]) -> String {
    let inner: Vec<String> = ports.iter().map(u32::to_string).collect();
    format!("{{{}}}", inner.join(","))
}

pub fn table_csv(rows: &[TableRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "k_i", "ports"])?;
    for r in rows {
        w.write_record([r.i.to_string(), r.k.to_string(), format_ports(&r.ports)])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_table_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for record in reader.records() {
        let record = record?;
        let field = |n: usize| {
            record
                .get(n)
                .map(str::trim)
                .ok_or_else(|| Error::Parse(format!("table row has no column {n}")))
        };
        let num = |s: &str| s.trim().parse::<u32>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        let ports = field(2)?;
        let inner = ports
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("ports `{ports}` not in braces")))?;
        rows.push(TableRow {
            i: num(field(0)?)?,
            k: num(field(1)?)?,
            ports: inner.split(',').map(num).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

/// Splits the host's cabinets into disjoint full-width sub-networks.
pub fn partition_subnetworks(host: &NetParams, parts: &[Vec<u32>]) -> Result<Vec<EmbeddingSpec>> {
    let mut used = BTreeSet::new();
    for part in parts {
        for &c in part {
            if !used.insert(c) {
                return Err(Error::Embedding(format!("cabinet {c} is in two parts")));
            }
        }
    }
    parts.iter().map(|p| cabinet_embedding(host, p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Removal {
    /// Local index `d`: drawer `d` and router column `d` of every cabinet.
    LocalIndex(u32),
    Cabinet(u32),
}

/// The network left running while part of the host is serviced.
pub fn maintenance_view(host: &NetParams, removal: Removal) -> Result<EmbeddingSpec> {
    let keep = |n: u32, gone: u32, what: &str| -> Result<Vec<u32>> {
        if gone >= n {
            return Err(Error::Embedding(format!("{what} {gone} is not below {n}")));
        }
        Ok((0..n).filter(|&x| x != gone).collect())
    };
    match removal {
        Removal::LocalIndex(d) => {
            if host.m() <= 2 {
                return Err(Error::Embedding("removing a local index would leave M < 2".into()));
            }
            let lambda = keep(host.m(), d, "local index")?;
            build_embedding(host, &(0..host.k()).collect::<Vec<_>>(), &lambda)
        }
        Removal::Cabinet(c) => {
            if host.k() <= 1 {
                return Err(Error::Embedding("removing a cabinet would leave K = 0".into()));
            }
            let kappa = keep(host.k(), c, "cabinet")?;
            cabinet_embedding(host, &kappa)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host(k: u32, m: u32) -> NetParams {
        NetParams::new(k, m).unwrap()
    }

    #[test]
    fn table_rows() {
        let e = cabinet_embedding(&host(9, 4), &[1, 2, 5, 8]).unwrap();
        assert_eq!(e.table_row(0), [0, 1, 4, 7]);
        assert_eq!(e.table_row(2), [5, 6, 0, 3]);
        assert_eq!(e.table_row(3), [2, 3, 6, 0]);
        let f = cabinet_embedding(&host(9, 4), &[0, 3, 4, 6, 7]).unwrap();
        assert_eq!(f.table_row(4), [2, 5, 6, 8, 0]);
    }

    #[test]
    fn rejects_bad_subsets() {
        assert!(cabinet_embedding(&host(9, 4), &[1, 1]).is_err());
        assert!(cabinet_embedding(&host(9, 4), &[9]).is_err());
        assert!(build_embedding(&host(9, 4), &[0], &[4]).is_err());
    }

    #[test]
    fn address_translation() {
        let e = cabinet_embedding(&host(9, 4), &[1, 2, 5, 8]).unwrap();
        assert_eq!(e.translate_addr(RouterAddr::new(2, 3, 0)).unwrap(), RouterAddr::new(5, 3, 0));
        assert!(e.translate_addr(RouterAddr::new(4, 0, 0)).is_err());
        let half = build_embedding(&host(3, 4), &[0, 1, 2], &[0, 2]).unwrap();
        assert_eq!(half.translate_addr(RouterAddr::new(0, 1, 1)).unwrap(), RouterAddr::new(0, 2, 2));
        let id = cabinet_embedding(&host(3, 4), &[0, 1, 2]).unwrap();
        for r in host(3, 4).routers() {
            assert_eq!(id.translate_addr(r).unwrap(), r);
        }
    }

    #[test]
    fn vector_translation_examples() {
        let e = cabinet_embedding(&host(9, 4), &[1, 2, 5, 8]).unwrap();
        assert_eq!(e.translate_vector(RouterAddr::new(0, 0, 0), 2, 0, 0).unwrap().0, 4);
        for i in 0..4 {
            assert_eq!(e.translate_vector(RouterAddr::new(i, 1, 2), 0, 0, 0).unwrap(), (0, 0, 0));
        }
    }

    #[test]
    fn table_csv_round_trip() {
        let h = host(9, 4);
        let e = cabinet_embedding(&h, &[0, 3, 4, 6, 7]).unwrap();
        let text = e.table_csv().unwrap();
        assert!(text.contains("4,7,\"{2,5,6,8,0}\""));
        let rows = parse_table_csv(&text).unwrap();
        assert_eq!(EmbeddingSpec::from_table(&h, &rows).unwrap(), e);
        let mut bad = rows.clone();
        bad[1].ports = vec![8, 0, 1, 3, 4];
        assert!(EmbeddingSpec::from_table(&h, &bad).is_err());
    }

    #[test]
    fn maintenance_counts() {
        let v = maintenance_view(&host(2, 4), Removal::LocalIndex(1)).unwrap();
        assert_eq!(*v.logical(), host(2, 3));
        assert_eq!(v.offline().len(), 14);
        let c = maintenance_view(&host(3, 4), Removal::Cabinet(2)).unwrap();
        assert_eq!(*c.logical(), host(2, 4));
        assert_eq!(c.offline().len(), 16);
        assert!(maintenance_view(&host(1, 2), Removal::Cabinet(0)).is_err());
        assert!(maintenance_view(&host(1, 2), Removal::LocalIndex(0)).is_err());
    }

    #[test]
    fn partitions_are_disjoint() {
        let h = host(4, 4);
        let parts = partition_subnetworks(&h, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(parts[0].host_links().is_disjoint(&parts[1].host_links()));
        assert!(partition_subnetworks(&h, &[vec![0, 1], vec![1, 3]]).is_err());
        let singles = partition_subnetworks(&host(2, 4), &[vec![0], vec![1]]).unwrap();
        assert!(singles.iter().all(|s| s.logical().k() == 1));
    }
}
