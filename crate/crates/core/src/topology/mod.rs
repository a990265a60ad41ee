//! Multi-tier transport network: sites grouped in tiers, servers hosted at
//! sites, and directed links with bandwidth and propagation delay.

mod document;
mod generate;
mod paths;
mod small;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nf::PerNf;

pub use document::{load_topology, LinkEntry, ServerEntry, SiteEntry, TopologyDocument};
pub use generate::{generate_default_topology, LinkSpec, ServerSpec, TopologyParams};
pub use paths::{admissible_paths, k_shortest_paths, Path};
pub use small::generate_small_topology;

/// Distance class of a site; lower tiers are closer to users.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    CellSite,
    EdgeCloud,
    RegionalCloud,
    CoreCloud,
}

impl Tier {
    pub const ALL: [Tier; 4] = [
        Tier::CellSite,
        Tier::EdgeCloud,
        Tier::RegionalCloud,
        Tier::CoreCloud,
    ];

    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn from_level(level: u8) -> Option<Tier> {
        Tier::ALL.get(level as usize).copied()
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Tier::CellSite => "CS",
            Tier::EdgeCloud => "Edge",
            Tier::RegionalCloud => "Regional",
            Tier::CoreCloud => "Core",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl Serialize for Tier {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.level())
    }
}

impl<'de> Deserialize<'de> for Tier {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let level = u8::deserialize(d)?;
        Tier::from_level(level)
            .ok_or_else(|| serde::de::Error::custom(format!("tier must be 0..=3, got {level}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub id: String,
    pub tier: Tier,
    /// Indices into [`NetworkGraph::servers`], in document order.
    pub servers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Server {
    pub id: String,
    pub site: usize,
    /// Processing units.
    pub capacity: f64,
    /// Per-NF-type queueing capacity used by the queueing-delay term.
    pub proq_capacity: PerNf<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub id: String,
    /// Shared by both directions of a bidirectional physical link.
    pub physical_id: String,
    pub src: usize,
    pub dst: usize,
    pub capacity_mbps: f64,
    pub delay_ms: f64,
}

impl Link {
    /// Propagation delay in seconds.
    pub fn delay(&self) -> f64 {
        self.delay_ms * 1e-3
    }

    /// Integer picoseconds, used wherever path delays are compared for ordering.
    pub(crate) fn delay_ps(&self) -> i64 {
        (self.delay_ms * 1e9).round() as i64
    }
}

/// Immutable, validated network graph.
#[derive(Clone, Debug)]
pub struct NetworkGraph {
    sites: Vec<Site>,
    servers: Vec<Server>,
    links: Vec<Link>,
    out_links: Vec<Vec<usize>>,
    site_index: HashMap<String, usize>,
    server_index: HashMap<String, usize>,
    /// Rank of every site id in lexicographic order.
    site_rank: Vec<usize>,
    server_rank: Vec<usize>,
}

impl PartialEq for NetworkGraph {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites && self.servers == other.servers && self.links == other.links
    }
}

impl NetworkGraph {
    /// Builds and validates a graph. Errors name the offending element.
    pub fn new(sites: Vec<Site>, servers: Vec<Server>, links: Vec<Link>) -> Result<Self> {
        let mut site_index = HashMap::with_capacity(sites.len());
        for (i, site) in sites.iter().enumerate() {
            if site_index.insert(site.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "site",
                    id: site.id.clone(),
                });
            }
        }
        let mut server_index = HashMap::with_capacity(servers.len());
        for (i, server) in servers.iter().enumerate() {
            if server_index.insert(server.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "server",
                    id: server.id.clone(),
                });
            }
            if server.site >= sites.len() {
                return Err(Error::DanglingReference {
                    kind: "site",
                    id: format!("#{} (server {})", server.site, server.id),
                });
            }
            if !(server.capacity > 0.0) || !server.capacity.is_finite() {
                return Err(Error::Range {
                    field: format!("servers.{}.capacity", server.id),
                    value: server.capacity,
                    expected: "> 0",
                });
            }
            for (nf, cap) in [
                ("RU", server.proq_capacity.ru),
                ("DU", server.proq_capacity.du),
                ("CU", server.proq_capacity.cu),
            ] {
                if !(cap > 0.0) || !cap.is_finite() {
                    return Err(Error::Range {
                        field: format!("servers.{}.proq_capacity.{nf}", server.id),
                        value: cap,
                        expected: "> 0",
                    });
                }
            }
        }
        for (si, site) in sites.iter().enumerate() {
            for &x in &site.servers {
                match servers.get(x) {
                    Some(server) if server.site == si => {}
                    _ => {
                        return Err(Error::schema(
                            format!("sites.{}.servers", site.id),
                            format!("server #{x} does not belong to this site"),
                        ))
                    }
                }
            }
        }
        for (x, server) in servers.iter().enumerate() {
            if !sites[server.site].servers.contains(&x) {
                return Err(Error::schema(
                    format!("servers.{}", server.id),
                    "server missing from its site's server list",
                ));
            }
        }

        let mut link_ids = HashMap::with_capacity(links.len());
        let mut pairs = HashMap::with_capacity(links.len());
        let mut out_links = vec![Vec::new(); sites.len()];
        for (i, link) in links.iter().enumerate() {
            if link_ids.insert(link.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "link",
                    id: link.id.clone(),
                });
            }
            if link.src >= sites.len() || link.dst >= sites.len() {
                return Err(Error::DanglingReference {
                    kind: "site",
                    id: format!("#{} (link {})", link.src.max(link.dst), link.id),
                });
            }
            if link.src == link.dst {
                return Err(Error::schema(
                    format!("links.{}", link.id),
                    "link endpoints must differ",
                ));
            }
            if pairs.insert((link.src, link.dst), i).is_some() {
                return Err(Error::schema(
                    format!("links.{}", link.id),
                    "parallel directed links between the same sites are not supported",
                ));
            }
            if !(link.capacity_mbps > 0.0) || !link.capacity_mbps.is_finite() {
                return Err(Error::Range {
                    field: format!("links.{}.capacity_mbps", link.id),
                    value: link.capacity_mbps,
                    expected: "> 0",
                });
            }
            if !(link.delay_ms >= 0.0) || !link.delay_ms.is_finite() {
                return Err(Error::Range {
                    field: format!("links.{}.delay_ms", link.id),
                    value: link.delay_ms,
                    expected: ">= 0",
                });
            }
            out_links[link.src].push(i);
        }

        let site_rank = ranks(sites.iter().map(|s| s.id.as_str()));
        let server_rank = ranks(servers.iter().map(|s| s.id.as_str()));
        let graph = NetworkGraph {
            sites,
            servers,
            links,
            out_links,
            site_index,
            server_index,
            site_rank,
            server_rank,
        };
        graph.check_core_reachability()?;
        Ok(graph)
    }

    fn check_core_reachability(&self) -> Result<()> {
        for (s, site) in self.sites.iter().enumerate() {
            if site.tier != Tier::CellSite {
                continue;
            }
            let mut seen = vec![false; self.sites.len()];
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            let mut reached = false;
            while let Some(n) = queue.pop_front() {
                if self.sites[n].tier == Tier::CoreCloud {
                    reached = true;
                    break;
                }
                for &l in &self.out_links[n] {
                    let next = self.links[l].dst;
                    if !seen[next] {
                        seen[next] = true;
                        queue.push_back(next);
                    }
                }
            }
            if !reached {
                return Err(Error::Disconnected(site.id.clone()));
            }
        }
        Ok(())
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn servers(&self) -> &[Server] {
        &self.servers
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn site(&self, index: usize) -> &Site {
        &self.sites[index]
    }

    pub fn server(&self, index: usize) -> &Server {
        &self.servers[index]
    }

    pub fn link(&self, index: usize) -> &Link {
        &self.links[index]
    }

    pub fn outgoing(&self, site: usize) -> &[usize] {
        &self.out_links[site]
    }

    pub fn site_by_id(&self, id: &str) -> Option<usize> {
        self.site_index.get(id).copied()
    }

    pub fn server_by_id(&self, id: &str) -> Option<usize> {
        self.server_index.get(id).copied()
    }

    pub fn server_tier(&self, server: usize) -> Tier {
        self.sites[self.servers[server].site].tier
    }

    pub fn sites_in_tier(&self, tier: Tier) -> impl Iterator<Item = usize> + '_ {
        self.sites
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.tier == tier)
            .map(|(i, _)| i)
    }

    pub(crate) fn site_rank(&self, site: usize) -> usize {
        self.site_rank[site]
    }

    pub(crate) fn server_rank(&self, server: usize) -> usize {
        self.server_rank[server]
    }

    /// Number of physical (undirected) links, counting each physical id once.
    pub fn physical_link_count(&self) -> usize {
        let mut ids: Vec<&str> = self.links.iter().map(|l| l.physical_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

fn ranks<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<usize> {
    let ids: Vec<&str> = ids.collect();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(ids[b]));
    let mut rank = vec![0; ids.len()];
    for (r, i) in order.into_iter().enumerate() {
        rank[i] = r;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line_graph() -> NetworkGraph {
        let doc = r#"{
            "sites": [
                {"id": "CS1", "tier": 0, "servers": [{"id": "x1", "capacity": 100, "proq_capacity": {"RU": 10, "DU": 10, "CU": 10}}]},
                {"id": "CORE", "tier": 3, "servers": [{"id": "x2", "capacity": 2000, "proq_capacity": {"RU": 10, "DU": 10, "CU": 10}}]}
            ],
            "links": [{"id": "L1", "src": "CS1", "dst": "CORE", "capacity_mbps": 10000, "delay_ms": 0.1, "bidirectional": true}]
        }"#;
        TopologyDocument::from_json(doc).unwrap().into_graph().unwrap()
    }

    #[test]
    fn minimal_document_expands_bidirectional_link() {
        let g = line_graph();
        assert_eq!(g.sites().len(), 2);
        assert_eq!(g.links().len(), 2);
        assert_eq!(g.physical_link_count(), 1);
        assert_eq!(g.links()[0].physical_id, g.links()[1].physical_id);
        assert_eq!(g.links()[0].src, g.links()[1].dst);
    }

    #[test]
    fn unreachable_cell_site_is_rejected() {
        let doc = r#"{
            "sites": [
                {"id": "CS1", "tier": 0, "servers": [{"id": "x1", "capacity": 100, "proq_capacity": {"RU": 10, "DU": 10, "CU": 10}}]},
                {"id": "CS2", "tier": 0, "servers": [{"id": "x3", "capacity": 100, "proq_capacity": {"RU": 10, "DU": 10, "CU": 10}}]},
                {"id": "CORE", "tier": 3, "servers": []}
            ],
            "links": [{"id": "L1", "src": "CS1", "dst": "CORE", "capacity_mbps": 10000, "delay_ms": 0.1, "bidirectional": false}]
        }"#;
        let err = TopologyDocument::from_json(doc).unwrap().into_graph().unwrap_err();
        assert!(matches!(err, Error::Disconnected(ref id) if id == "CS2"), "{err}");
    }

    #[test]
    fn tier_levels_round_trip() {
        for tier in Tier::ALL {
            assert_eq!(Tier::from_level(tier.level()), Some(tier));
        }
        assert_eq!(Tier::from_level(4), None);
        assert!(Tier::CellSite < Tier::EdgeCloud && Tier::RegionalCloud < Tier::CoreCloud);
    }
}
