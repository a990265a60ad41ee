use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Link, NetworkGraph, Server, Site, Tier};
use crate::error::{Error, Result};
use crate::nf::PerNf;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerSpec {
    pub count: usize,
    pub capacity: f64,
    pub proq_capacity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub delay_ms: f64,
    pub capacity_gbps: f64,
}

/// Parameters of the tiered reference topology.
///
/// Cell sites are cut into access rings of `ring_size`; both ends of a ring
/// attach to an edge cloud. Every edge cloud has one uplink to a regional
/// cloud and every regional cloud connects to every core cloud. Redundant
/// edge-to-regional uplinks are then added until the physical link count
/// reaches `target_links`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    /// Site count per tier, indexed by tier level.
    pub tier_counts: [usize; 4],
    pub ring_size: usize,
    /// Physical (bidirectional) link target; `None` keeps the mandatory links only.
    pub target_links: Option<usize>,
    /// Server layout per tier, indexed by tier level.
    pub servers: [ServerSpec; 4],
    pub ring_link: LinkSpec,
    pub access_link: LinkSpec,
    pub aggregation_link: LinkSpec,
    pub core_link: LinkSpec,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            tier_counts: [32, 12, 5, 2],
            ring_size: 4,
            target_links: Some(70),
            servers: [
                ServerSpec {
                    count: 1,
                    capacity: 100.0,
                    proq_capacity: 10.0,
                },
                ServerSpec {
                    count: 2,
                    capacity: 300.0,
                    proq_capacity: 30.0,
                },
                ServerSpec {
                    count: 4,
                    capacity: 800.0,
                    proq_capacity: 80.0,
                },
                ServerSpec {
                    count: 8,
                    capacity: 2000.0,
                    proq_capacity: 200.0,
                },
            ],
            ring_link: LinkSpec {
                delay_ms: 0.05,
                capacity_gbps: 10.0,
            },
            access_link: LinkSpec {
                delay_ms: 0.1,
                capacity_gbps: 40.0,
            },
            aggregation_link: LinkSpec {
                delay_ms: 0.3,
                capacity_gbps: 100.0,
            },
            core_link: LinkSpec {
                delay_ms: 1.0,
                capacity_gbps: 400.0,
            },
        }
    }
}

const PREFIX: [&str; 4] = ["CS", "EC", "RC", "CC"];

fn push(a: usize, b: usize, spec: LinkSpec, physical: &mut Vec<(usize, usize, LinkSpec)>) {
    let exists = physical
        .iter()
        .any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a));
    if !exists {
        physical.push((a, b, spec));
    }
}

/// Deterministically generates the tiered topology for `seed`.
pub fn generate_default_topology(params: &TopologyParams, seed: u64) -> Result<NetworkGraph> {
    let [n_cs, n_edge, n_reg, n_core] = params.tier_counts;
    if params.ring_size < 2 {
        return Err(Error::Generation(format!(
            "ring_size must be >= 2, got {}",
            params.ring_size
        )));
    }
    if n_cs == 0 || n_edge == 0 || n_reg == 0 || n_core == 0 {
        return Err(Error::Generation(format!(
            "every tier needs at least one site, got {:?}",
            params.tier_counts
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sites = Vec::new();
    let mut servers = Vec::new();
    let mut tier_sites: [Vec<usize>; 4] = Default::default();
    for tier in Tier::ALL {
        let level = tier.level() as usize;
        let spec = params.servers[level];
        for i in 0..params.tier_counts[level] {
            let site = sites.len();
            let id = format!("{}{:02}", PREFIX[level], i);
            let mut ids = Vec::with_capacity(spec.count);
            for j in 0..spec.count {
                ids.push(servers.len());
                servers.push(Server {
                    id: format!("{id}-x{j}"),
                    site,
                    capacity: spec.capacity,
                    proq_capacity: PerNf::splat(spec.proq_capacity),
                });
            }
            tier_sites[level].push(site);
            sites.push(Site {
                id,
                tier,
                servers: ids,
            });
        }
    }
    let [cs, edge, reg, core] = &tier_sites;

    let mut physical: Vec<(usize, usize, LinkSpec)> = Vec::new();

    let mut edge_order = edge.clone();
    edge_order.shuffle(&mut rng);
    for (r, ring) in cs.chunks(params.ring_size).enumerate() {
        for pair in ring.windows(2) {
            push(pair[0], pair[1], params.ring_link, &mut physical);
        }
        let head = edge_order[(2 * r) % n_edge];
        let tail = edge_order[(2 * r + 1) % n_edge];
        push(ring[0], head, params.access_link, &mut physical);
        push(ring[ring.len() - 1], tail, params.access_link, &mut physical);
    }

    let mut uplink_order = edge.clone();
    uplink_order.shuffle(&mut rng);
    let mut primary = vec![0usize; sites.len()];
    for (i, &e) in uplink_order.iter().enumerate() {
        let r = reg[i % n_reg];
        primary[e] = i % n_reg;
        push(e, r, params.aggregation_link, &mut physical);
    }
    for &r in reg {
        for &c in core {
            push(r, c, params.core_link, &mut physical);
        }
    }

    let base = physical.len();
    if let Some(target) = params.target_links {
        let mut extra: Vec<(usize, usize)> = if n_reg >= 2 {
            edge.iter()
                .map(|&e| (e, reg[(primary[e] + 1) % n_reg]))
                .collect()
        } else {
            Vec::new()
        };
        extra.shuffle(&mut rng);
        if target < base || target > base + extra.len() {
            return Err(Error::Generation(format!(
                "cannot reach {target} bidirectional links: mandatory structure has {base}, \
                 at most {} redundant uplinks are available",
                extra.len()
            )));
        }
        for &(e, r) in extra.iter().take(target - base) {
            push(e, r, params.aggregation_link, &mut physical);
        }
    }

    let mut links = Vec::with_capacity(physical.len() * 2);
    for (a, b, spec) in physical {
        let physical_id = format!("{}~{}", sites[a].id, sites[b].id);
        for (src, dst, suffix) in [(a, b, "/f"), (b, a, "/r")] {
            links.push(Link {
                id: format!("{physical_id}{suffix}"),
                physical_id: physical_id.clone(),
                src,
                dst,
                capacity_mbps: spec.capacity_gbps * 1000.0,
                delay_ms: spec.delay_ms,
            });
        }
    }
    NetworkGraph::new(sites, servers, links)
}
