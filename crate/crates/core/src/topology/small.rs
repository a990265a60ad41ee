use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinkEntry, NetworkGraph, ServerEntry, SiteEntry, Tier, TopologyDocument};
use crate::error::Result;
use crate::nf::PerNf;

/// Random 4–6 site topology with one or two servers per site, used for
/// checks against exhaustive enumeration. Some two-server sites hold
/// identical servers.
pub fn generate_small_topology(seed: u64) -> Result<NetworkGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cs = rng.gen_range(1..=2);
    let n_edge = rng.gen_range(1..=2);
    let mut n_reg = rng.gen_range(0..=1);
    if n_cs + n_edge + n_reg + 1 < 4 {
        n_reg = 1;
    }

    let mut sites = Vec::new();
    let mut add_tier = |rng: &mut ChaCha8Rng, tier: Tier, count: usize, base: f64| {
        let mut ids = Vec::new();
        for i in 0..count {
            let id = format!("{}{i}", tier.short_name());
            let n_servers = rng.gen_range(1..=2);
            let twins = rng.gen_bool(0.5);
            let mut servers = Vec::new();
            for j in 0..n_servers {
                let factor = if j > 0 && twins {
                    1.0
                } else {
                    *[0.5, 1.0, 1.5].choose(rng).expect("non-empty")
                };
                let capacity = base * factor;
                servers.push(ServerEntry {
                    id: format!("{id}-x{j}"),
                    capacity,
                    proq_capacity: PerNf::splat(capacity / 10.0),
                });
            }
            if twins && servers.len() == 2 {
                servers[1].capacity = servers[0].capacity;
                servers[1].proq_capacity = servers[0].proq_capacity;
            }
            sites.push(SiteEntry {
                id: id.clone(),
                tier,
                servers,
            });
            ids.push(id);
        }
        ids
    };
    let cs = add_tier(&mut rng, Tier::CellSite, n_cs, 100.0);
    let edge = add_tier(&mut rng, Tier::EdgeCloud, n_edge, 200.0);
    let reg = add_tier(&mut rng, Tier::RegionalCloud, n_reg, 400.0);
    let core = add_tier(&mut rng, Tier::CoreCloud, 1, 800.0);

    let mut links = Vec::new();
    let mut link = |rng: &mut ChaCha8Rng, a: &str, b: &str| {
        links.push(LinkEntry {
            id: format!("{a}~{b}"),
            src: a.to_string(),
            dst: b.to_string(),
            capacity_mbps: *[50.0, 100.0, 1000.0].choose(rng).expect("non-empty"),
            delay_ms: *[0.05, 0.1, 0.2, 0.3].choose(rng).expect("non-empty"),
            bidirectional: true,
        });
    };
    for (i, c) in cs.iter().enumerate() {
        link(&mut rng, c, &edge[i % n_edge]);
    }
    if n_cs == 2 {
        link(&mut rng, &cs[0], &cs[1]);
    }
    if n_edge == 2 {
        link(&mut rng, &edge[0], &edge[1]);
    }
    for e in &edge {
        match reg.first() {
            Some(r) => {
                link(&mut rng, e, r);
                if rng.gen_bool(0.5) {
                    link(&mut rng, e, &core[0]);
                }
            }
            None => link(&mut rng, e, &core[0]),
        }
    }
    for r in &reg {
        link(&mut rng, r, &core[0]);
    }
    TopologyDocument { sites, links }.into_graph()
}
