use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Link, NetworkGraph, Server, Site, Tier};
use crate::error::{Error, Result};
use crate::nf::PerNf;

/// On-disk topology schema (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    pub sites: Vec<SiteEntry>,
    pub links: Vec<LinkEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    pub id: String,
    pub tier: Tier,
    #[serde(default)]
    pub servers: Vec<ServerEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerEntry {
    pub id: String,
    pub capacity: f64,
    pub proq_capacity: PerNf<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub capacity_mbps: f64,
    pub delay_ms: f64,
    #[serde(default)]
    pub bidirectional: bool,
}

const FORWARD: &str = "/f";
const REVERSE: &str = "/r";

impl TopologyDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::schema(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates the document and builds the graph. Bidirectional entries expand
    /// into `<id>/f` and `<id>/r` sharing the physical id `<id>`.
    pub fn into_graph(self) -> Result<NetworkGraph> {
        let mut site_index = HashMap::new();
        for (i, entry) in self.sites.iter().enumerate() {
            if site_index.insert(entry.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "site",
                    id: entry.id.clone(),
                });
            }
        }
        let mut sites = Vec::with_capacity(self.sites.len());
        let mut servers = Vec::new();
        for (si, entry) in self.sites.into_iter().enumerate() {
            let mut ids = Vec::with_capacity(entry.servers.len());
            for server in entry.servers {
                ids.push(servers.len());
                servers.push(Server {
                    id: server.id,
                    site: si,
                    capacity: server.capacity,
                    proq_capacity: server.proq_capacity,
                });
            }
            sites.push(Site {
                id: entry.id,
                tier: entry.tier,
                servers: ids,
            });
        }
        let resolve = |id: &str| {
            site_index
                .get(id)
                .copied()
                .ok_or_else(|| Error::DanglingReference {
                    kind: "site",
                    id: id.to_string(),
                })
        };
        let mut links = Vec::with_capacity(self.links.len() * 2);
        for entry in &self.links {
            let src = resolve(&entry.src)?;
            let dst = resolve(&entry.dst)?;
            if entry.bidirectional {
                for (suffix, a, b) in [(FORWARD, src, dst), (REVERSE, dst, src)] {
                    links.push(Link {
                        id: format!("{}{suffix}", entry.id),
                        physical_id: entry.id.clone(),
                        src: a,
                        dst: b,
                        capacity_mbps: entry.capacity_mbps,
                        delay_ms: entry.delay_ms,
                    });
                }
            } else {
                links.push(Link {
                    id: entry.id.clone(),
                    physical_id: entry.id.clone(),
                    src,
                    dst,
                    capacity_mbps: entry.capacity_mbps,
                    delay_ms: entry.delay_ms,
                });
            }
        }
        NetworkGraph::new(sites, servers, links)
    }

    /// Inverse of [`into_graph`](Self::into_graph): forward/reverse pairs
    /// with equal parameters collapse back into one bidirectional entry.
    pub fn from_graph(graph: &NetworkGraph) -> Self {
        let sites = graph
            .sites()
            .iter()
            .map(|site| SiteEntry {
                id: site.id.clone(),
                tier: site.tier,
                servers: site
                    .servers
                    .iter()
                    .map(|&x| {
                        let s = graph.server(x);
                        ServerEntry {
                            id: s.id.clone(),
                            capacity: s.capacity,
                            proq_capacity: s.proq_capacity,
                        }
                    })
                    .collect(),
            })
            .collect();

        let by_id: HashMap<&str, &Link> = graph.links().iter().map(|l| (l.id.as_str(), l)).collect();
        let mut links = Vec::new();
        for link in graph.links() {
            let pair = link
                .id
                .strip_suffix(FORWARD)
                .filter(|base| *base == link.physical_id)
                .and_then(|base| by_id.get(format!("{base}{REVERSE}").as_str()))
                .filter(|rev| {
                    rev.physical_id == link.physical_id
                        && rev.src == link.dst
                        && rev.dst == link.src
                        && rev.capacity_mbps == link.capacity_mbps
                        && rev.delay_ms == link.delay_ms
                });
            let paired_reverse = link
                .id
                .strip_suffix(REVERSE)
                .filter(|base| *base == link.physical_id)
                .and_then(|base| by_id.get(format!("{base}{FORWARD}").as_str()))
                .is_some_and(|fwd| {
                    fwd.src == link.dst
                        && fwd.dst == link.src
                        && fwd.capacity_mbps == link.capacity_mbps
                        && fwd.delay_ms == link.delay_ms
                });
            if paired_reverse {
                continue;
            }
            let bidirectional = pair.is_some();
            links.push(LinkEntry {
                id: if bidirectional {
                    link.physical_id.clone()
                } else {
                    link.id.clone()
                },
                src: graph.site(link.src).id.clone(),
                dst: graph.site(link.dst).id.clone(),
                capacity_mbps: link.capacity_mbps,
                delay_ms: link.delay_ms,
                bidirectional,
            });
        }
        TopologyDocument { sites, links }
    }
}

/// Reads and validates a topology document from text.
pub fn load_topology(text: &str) -> Result<NetworkGraph> {
    TopologyDocument::from_json(text)?.into_graph()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_site_reference_is_named() {
        let doc = r#"{
            "sites": [{"id": "CS1", "tier": 0, "servers": []}, {"id": "C", "tier": 3}],
            "links": [{"id": "L1", "src": "CS1", "dst": "X9", "capacity_mbps": 10, "delay_ms": 0.1}]
        }"#;
        let err = load_topology(doc).unwrap_err();
        match err {
            Error::DanglingReference { id, .. } => assert_eq!(id, "X9"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn schema_violation_reports_location() {
        let err = load_topology(r#"{"sites": [{"id": "a", "tier": 7}], "links": []}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "{err}");
        let err = load_topology(r#"{"sites": [], "links": [], "extra": 1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }

    #[test]
    fn negative_capacity_is_a_range_error() {
        let doc = r#"{
            "sites": [{"id": "CS1", "tier": 0}, {"id": "C", "tier": 3}],
            "links": [{"id": "L1", "src": "CS1", "dst": "C", "capacity_mbps": -1, "delay_ms": 0.1}]
        }"#;
        assert!(matches!(load_topology(doc).unwrap_err(), Error::Range { .. }));
    }

    #[test]
    fn unidirectional_links_survive_serialization() {
        let doc = r#"{
            "sites": [{"id": "CS1", "tier": 0}, {"id": "C", "tier": 3}],
            "links": [
                {"id": "up", "src": "CS1", "dst": "C", "capacity_mbps": 10, "delay_ms": 0.1},
                {"id": "down", "src": "C", "dst": "CS1", "capacity_mbps": 20, "delay_ms": 0.1}
            ]
        }"#;
        let g = load_topology(doc).unwrap();
        let text = TopologyDocument::from_graph(&g).to_json().unwrap();
        assert_eq!(load_topology(&text).unwrap(), g);
    }
}
