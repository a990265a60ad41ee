//! Per-slice candidate enumeration for the structured search.

use std::collections::{BTreeMap, HashSet};

use crate::nf::{NfType, PerNf};
use crate::scenario::Scenario;
use crate::topology::NetworkGraph;
use crate::validator::{carried_links, link_delay_to, FEASIBILITY_TOL};

/// One way to place a slice: servers for RU/DU/CU and a route per demand.
#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub servers: PerNf<usize>,
    pub demand_paths: Vec<usize>,
    /// Processing units added per distinct server.
    pub server_delta: Vec<(usize, f64)>,
    /// Mbps added per carried link.
    pub link_delta: Vec<(usize, f64)>,
    /// Load-independent processing delay per NF (queueing and minimum terms).
    pub static_delay: PerNf<f64>,
    /// Largest propagation delay to the CU over the slice's demands.
    pub max_link_delay: f64,
    /// Lexicographic tie-break: server id ranks, then path id ranks.
    pub tie: ([usize; 3], Vec<usize>),
}

impl Candidate {
    pub fn added_load(&self, server: usize) -> f64 {
        self.server_delta
            .iter()
            .find(|(x, _)| *x == server)
            .map_or(0.0, |(_, d)| *d)
    }
}

pub(crate) struct SliceCandidates {
    pub slice: usize,
    pub max_delay: f64,
    pub d_prox: PerNf<f64>,
    pub d_pro_max: PerNf<f64>,
    /// The only server able to host the RU, with the RU's load, when the
    /// source site has a single server.
    pub forced_ru: Option<(usize, f64)>,
    pub candidates: Vec<Candidate>,
}

impl SliceCandidates {
    /// Delay and per-NF processing checks for `c` at the given server
    /// utilizations.
    pub fn delay_ok(&self, c: &Candidate, util: impl Fn(usize) -> f64) -> bool {
        let mut total = c.max_link_delay;
        for nf in NfType::CHAIN {
            let d = c.static_delay[nf] + self.d_prox[nf] * util(c.servers[nf]);
            if d > self.d_pro_max[nf] + FEASIBILITY_TOL {
                return false;
            }
            total += d;
        }
        total <= self.max_delay + FEASIBILITY_TOL
    }
}

/// Enumerates candidates of slice `s`, dropping those that are infeasible
/// even on an otherwise empty network and merging routes that load the same
/// links with the same delay.
pub(crate) fn enumerate(scenario: &Scenario, s: usize) -> SliceCandidates {
    let g = &scenario.graph;
    let slice = &scenario.slices[s];
    let profiles = &scenario.nf_profiles;
    let scope = scenario.options.link_load_scope;
    let queue_units = scenario.queue_units(s);
    let rate = slice.total_rate();

    let mut path_rank: Vec<usize> = (0..slice.paths.len()).collect();
    path_rank.sort_by(|&a, &b| slice.paths[a].id.cmp(&slice.paths[b].id));
    let mut rank_of_path = vec![0; slice.paths.len()];
    for (r, &p) in path_rank.iter().enumerate() {
        rank_of_path[p] = r;
    }

    let mut seen = HashSet::new();
    let mut triples = Vec::new();
    for path in &slice.paths {
        for i in 0..path.sites.len() {
            for j in i..path.sites.len() {
                for &ru in &g.site(path.sites[0]).servers {
                    for &du in &g.site(path.sites[i]).servers {
                        for &cu in &g.site(path.sites[j]).servers {
                            if seen.insert((ru, du, cu)) {
                                triples.push(PerNf::new(ru, du, cu));
                            }
                        }
                    }
                }
            }
        }
    }

    let out = SliceCandidates {
        slice: s,
        max_delay: slice.max_delay(),
        d_prox: profiles.map(|p| p.d_prox),
        d_pro_max: profiles.map(|p| p.d_pro_max),
        forced_ru: match g.site(slice.source).servers.as_slice() {
            &[x] => Some((x, profiles.ru.load_ratio * rate)),
            _ => None,
        },
        candidates: Vec::new(),
    };
    let mut candidates = Vec::new();
    for servers in triples {
        // Distinct (carried links, delay) routes, first path index wins.
        let mut routes: Vec<(usize, &[usize], f64)> = Vec::new();
        for (p, path) in slice.paths.iter().enumerate() {
            let du = path.position(g.server(servers.du).site);
            let cu = path.position(g.server(servers.cu).site);
            let (Some(du), Some(cu)) = (du, cu) else { continue };
            if du > cu {
                continue;
            }
            let links = carried_links(path, Some(cu), scope);
            let delay = link_delay_to(path, Some(cu));
            if !routes.iter().any(|r| r.1 == links && r.2 == delay) {
                routes.push((p, links, delay));
            }
        }
        if routes.is_empty() {
            continue;
        }
        let static_delay = PerNf::new(
            static_processing(scenario, NfType::Ru, servers.ru, queue_units),
            static_processing(scenario, NfType::Du, servers.du, queue_units),
            static_processing(scenario, NfType::Cu, servers.cu, queue_units),
        );
        let mut server_delta: Vec<(usize, f64)> = Vec::with_capacity(3);
        for nf in NfType::CHAIN {
            let add = profiles[nf].load_ratio * rate;
            match server_delta.iter_mut().find(|(x, _)| *x == servers[nf]) {
                Some(entry) => entry.1 += add,
                None => server_delta.push((servers[nf], add)),
            }
        }
        let ranks = [servers.ru, servers.du, servers.cu].map(|x| g.server_rank(x));

        for choice in product(routes.len(), slice.demands.len()) {
            let mut link_delta: BTreeMap<usize, f64> = BTreeMap::new();
            let mut max_link_delay = 0.0_f64;
            for (demand, &r) in slice.demands.iter().zip(&choice) {
                for &l in routes[r].1 {
                    *link_delta.entry(l).or_default() += demand.rate_mbps;
                }
                max_link_delay = max_link_delay.max(routes[r].2);
            }
            let demand_paths: Vec<usize> = choice.iter().map(|&r| routes[r].0).collect();
            let cand = Candidate {
                servers,
                tie: (ranks, demand_paths.iter().map(|&p| rank_of_path[p]).collect()),
                demand_paths,
                server_delta: server_delta.clone(),
                link_delta: link_delta.into_iter().collect(),
                static_delay,
                max_link_delay,
            };
            if fits_alone(g, &out, &cand) {
                candidates.push(cand);
            }
        }
    }
    candidates.sort_by(|a, b| a.tie.cmp(&b.tie));
    SliceCandidates { candidates, ..out }
}

fn static_processing(scenario: &Scenario, nf: NfType, server: usize, queue_units: f64) -> f64 {
    let p = &scenario.nf_profiles[nf];
    p.d_proq * p.load_ratio * queue_units / scenario.graph.server(server).proq_capacity[nf] + p.d_pro_min
}

fn fits_alone(g: &NetworkGraph, sc: &SliceCandidates, c: &Candidate) -> bool {
    let tol = 1.0 + FEASIBILITY_TOL;
    c.server_delta.iter().all(|&(x, d)| d / g.server(x).capacity <= tol)
        && c.link_delta.iter().all(|&(l, d)| d / g.link(l).capacity_mbps <= tol)
        && sc.delay_ok(c, |x| c.added_load(x) / g.server(x).capacity)
}

/// All tuples in `0..base` of length `len`, lexicographic.
fn product(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..base).map(move |i| {
                    let mut t = prefix.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Groups servers that are interchangeable: same site, capacity and queue
/// capacities. Members of each group are sorted by id.
pub(crate) fn twin_groups(g: &NetworkGraph) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = vec![usize::MAX; g.servers().len()];
    for site in g.sites() {
        for &x in &site.servers {
            let sx = g.server(x);
            let found = site.servers.iter().find(|&&y| {
                group_of[y] != usize::MAX
                    && g.server(y).capacity == sx.capacity
                    && g.server(y).proq_capacity == sx.proq_capacity
            });
            match found {
                Some(&y) => {
                    group_of[x] = group_of[y];
                    groups[group_of[y]].push(x);
                }
                None => {
                    group_of[x] = groups.len();
                    groups.push(vec![x]);
                }
            }
        }
    }
    for members in &mut groups {
        members.sort_by_key(|&x| g.server_rank(x));
    }
    (group_of, groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validator::tests::chain_scenario;

    #[test]
    fn chain_candidates_respect_order_and_source() {
        let sc = chain_scenario(&["mMTC1"]);
        let c = enumerate(&sc, 0);
        // RU pinned at the single CS server; (DU, CU) ordered over 3 sites.
        assert_eq!(c.candidates.len(), 6);
        for cand in &c.candidates {
            assert_eq!(cand.servers.ru, 0);
            assert!(cand.servers.du <= cand.servers.cu);
        }
    }

    #[test]
    fn product_is_lexicographic() {
        assert_eq!(product(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(product(3, 0), vec![Vec::<usize>::new()]);
    }
}
