use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use super::{NetworkGraph, Tier};

/// A simple routed path starting at a cell site.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    /// Site ids joined by `>`; unique because parallel links are rejected.
    pub id: String,
    pub sites: Vec<usize>,
    pub links: Vec<usize>,
    /// Servers of every visited site, in site order.
    pub servers: Vec<usize>,
    /// `cumulative_delay[i]` is the propagation delay (s) from the first site to `sites[i]`.
    pub cumulative_delay: Vec<f64>,
}

impl Path {
    pub(crate) fn from_links(graph: &NetworkGraph, source: usize, links: Vec<usize>) -> Path {
        let mut sites = Vec::with_capacity(links.len() + 1);
        sites.push(source);
        let mut cumulative_delay = Vec::with_capacity(links.len() + 1);
        cumulative_delay.push(0.0);
        let mut acc = 0.0;
        for &l in &links {
            let link = graph.link(l);
            debug_assert_eq!(link.src, *sites.last().unwrap());
            acc += link.delay();
            sites.push(link.dst);
            cumulative_delay.push(acc);
        }
        let servers = sites
            .iter()
            .flat_map(|&s| graph.site(s).servers.iter().copied())
            .collect();
        let id = sites
            .iter()
            .map(|&s| graph.site(s).id.as_str())
            .collect::<Vec<_>>()
            .join(">");
        Path {
            id,
            sites,
            links,
            servers,
            cumulative_delay,
        }
    }

    pub fn source(&self) -> usize {
        self.sites[0]
    }

    pub fn target(&self) -> usize {
        *self.sites.last().expect("paths are never empty")
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    /// Total propagation delay in seconds.
    pub fn delay(&self) -> f64 {
        *self.cumulative_delay.last().expect("paths are never empty")
    }

    /// Position of `site` along the path.
    pub fn position(&self, site: usize) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }

    /// Traversal indicator: whether the path uses `link`.
    pub fn traverses(&self, link: usize) -> bool {
        self.links.contains(&link)
    }

    /// Whether both sites lie on the path with `from` visited no later than `to`.
    pub fn connects(&self, from: usize, to: usize) -> bool {
        match (self.position(from), self.position(to)) {
            (Some(a), Some(b)) => a <= b,
            _ => false,
        }
    }

    fn delay_ps(&self, graph: &NetworkGraph) -> i64 {
        self.links.iter().map(|&l| graph.link(l).delay_ps()).sum()
    }
}

/// Ordering key: total delay, then hop count, then the site-id sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct PathKey {
    delay_ps: i64,
    hops: usize,
    ranks: Vec<usize>,
    links: Vec<usize>,
}

fn key(graph: &NetworkGraph, source: usize, links: &[usize]) -> PathKey {
    let mut ranks = Vec::with_capacity(links.len() + 1);
    ranks.push(graph.site_rank(source));
    ranks.extend(links.iter().map(|&l| graph.site_rank(graph.link(l).dst)));
    PathKey {
        delay_ps: links.iter().map(|&l| graph.link(l).delay_ps()).sum(),
        hops: links.len(),
        ranks,
        links: links.to_vec(),
    }
}

/// Dijkstra over (delay, hops) with deterministic tie-breaking by site rank.
/// Returns the link sequence from `source` to `target`.
fn shortest(
    graph: &NetworkGraph,
    source: usize,
    target: usize,
    blocked_sites: &[bool],
    blocked_links: &[bool],
) -> Option<Vec<usize>> {
    let n = graph.sites().len();
    let mut best: Vec<Option<(i64, usize)>> = vec![None; n];
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source] = Some((0, 0));
    heap.push(Reverse((0i64, 0usize, graph.site_rank(source), source)));
    while let Some(Reverse((d, h, _, site))) = heap.pop() {
        if done[site] {
            continue;
        }
        done[site] = true;
        if site == target {
            break;
        }
        for &l in graph.outgoing(site) {
            let link = graph.link(l);
            if blocked_links[l] || blocked_sites[link.dst] || done[link.dst] {
                continue;
            }
            let cand = (d + link.delay_ps(), h + 1);
            let better = match best[link.dst] {
                None => true,
                Some(cur) => match cand.cmp(&cur) {
                    Ordering::Less => true,
                    Ordering::Equal => via[link.dst]
                        .is_some_and(|prev| graph.site_rank(graph.link(prev).src) > graph.site_rank(site)),
                    Ordering::Greater => false,
                },
            };
            if better {
                best[link.dst] = Some(cand);
                via[link.dst] = Some(l);
                heap.push(Reverse((cand.0, cand.1, graph.site_rank(link.dst), link.dst)));
            }
        }
    }
    if !done[target] {
        return None;
    }
    let mut links = Vec::new();
    let mut cur = target;
    while cur != source {
        let l = via[cur]?;
        links.push(l);
        cur = graph.link(l).src;
    }
    links.reverse();
    Some(links)
}

/// Up to `k` loop-free paths from `source` to `target`, ordered by total
/// link delay, then hop count, then site-id sequence.
pub fn k_shortest_paths(graph: &NetworkGraph, source: usize, target: usize, k: usize) -> Vec<Path> {
    if k == 0 || source == target {
        return Vec::new();
    }
    let n_sites = graph.sites().len();
    let n_links = graph.links().len();
    let Some(first) = shortest(graph, source, target, &vec![false; n_sites], &vec![false; n_links])
    else {
        return Vec::new();
    };

    let mut accepted: Vec<Vec<usize>> = vec![first];
    let mut candidates: BTreeSet<PathKey> = BTreeSet::new();
    while accepted.len() < k {
        let last = accepted.last().unwrap().clone();
        let last_sites: Vec<usize> = std::iter::once(source)
            .chain(last.iter().map(|&l| graph.link(l).dst))
            .collect();
        for i in 0..last.len() {
            let spur = last_sites[i];
            let root = &last[..i];
            let mut blocked_links = vec![false; n_links];
            for p in &accepted {
                if p.len() > i && p[..i] == *root {
                    blocked_links[p[i]] = true;
                }
            }
            let mut blocked_sites = vec![false; n_sites];
            for &s in &last_sites[..i] {
                blocked_sites[s] = true;
            }
            if let Some(tail) = shortest(graph, spur, target, &blocked_sites, &blocked_links) {
                let mut full = root.to_vec();
                full.extend(tail);
                if !accepted.contains(&full) {
                    candidates.insert(key(graph, source, &full));
                }
            }
        }
        match candidates.pop_first() {
            Some(next) => accepted.push(next.links),
            None => break,
        }
    }

    let mut paths: Vec<(PathKey, Vec<usize>)> = accepted
        .into_iter()
        .map(|links| (key(graph, source, &links), links))
        .collect();
    paths.sort_by(|a, b| a.0.cmp(&b.0));
    paths
        .into_iter()
        .map(|(_, links)| Path::from_links(graph, source, links))
        .collect()
}

/// Union of the `k` shortest paths from `source` towards every core cloud
/// site, deduplicated and sorted by the same key as [`k_shortest_paths`].
pub fn admissible_paths(graph: &NetworkGraph, source: usize, k: usize) -> Vec<Path> {
    let mut all: Vec<Path> = graph
        .sites_in_tier(Tier::CoreCloud)
        .flat_map(|core| k_shortest_paths(graph, source, core, k))
        .collect();
    all.sort_by(|a, b| {
        (a.delay_ps(graph), a.hops())
            .cmp(&(b.delay_ps(graph), b.hops()))
            .then_with(|| {
                let ra = a.sites.iter().map(|&s| graph.site_rank(s));
                let rb = b.sites.iter().map(|&s| graph.site_rank(s));
                ra.cmp(rb)
            })
    });
    all.dedup_by(|a, b| a.links == b.links);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::load_topology;

    fn diamond() -> NetworkGraph {
        load_topology(
            r#"{
            "sites": [
                {"id": "S", "tier": 0}, {"id": "B", "tier": 1}, {"id": "A", "tier": 1}, {"id": "T", "tier": 3}
            ],
            "links": [
                {"id": "sb", "src": "S", "dst": "B", "capacity_mbps": 10, "delay_ms": 0.1, "bidirectional": true},
                {"id": "sa", "src": "S", "dst": "A", "capacity_mbps": 10, "delay_ms": 0.2, "bidirectional": true},
                {"id": "bt", "src": "B", "dst": "T", "capacity_mbps": 10, "delay_ms": 0.2, "bidirectional": true},
                {"id": "at", "src": "A", "dst": "T", "capacity_mbps": 10, "delay_ms": 0.1, "bidirectional": true}
            ]
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn diamond_ties_are_ordered_by_site_ids() {
        let g = diamond();
        let s = g.site_by_id("S").unwrap();
        let t = g.site_by_id("T").unwrap();
        let paths = k_shortest_paths(&g, s, t, 2);
        let ids: Vec<&str> = paths.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, vec!["S>A>T", "S>B>T"]);
        assert!((paths[0].delay() - paths[1].delay()).abs() < 1e-12);
    }

    #[test]
    fn chain_has_a_single_path() {
        let g = load_topology(
            r#"{
            "sites": [{"id": "CS", "tier": 0}, {"id": "E", "tier": 1}, {"id": "C", "tier": 3}],
            "links": [
                {"id": "a", "src": "CS", "dst": "E", "capacity_mbps": 10, "delay_ms": 0.1, "bidirectional": true},
                {"id": "b", "src": "E", "dst": "C", "capacity_mbps": 10, "delay_ms": 0.3, "bidirectional": true}
            ]
        }"#,
        )
        .unwrap();
        let paths = k_shortest_paths(&g, 0, 2, 3);
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].hops(), 2);
        assert_eq!(paths[0].id, "CS>E>C");
        assert!((paths[0].delay() - 0.0004).abs() < 1e-15);
        assert_eq!(paths[0].cumulative_delay.len(), 3);
    }

    #[test]
    fn path_accessors_follow_site_order() {
        let g = diamond();
        let p = &k_shortest_paths(&g, 0, 3, 1)[0];
        assert!(p.connects(p.source(), p.target()));
        assert!(!p.connects(p.target(), p.source()));
        assert!(p.traverses(p.links[0]));
        let expected: Vec<usize> = p
            .sites
            .iter()
            .flat_map(|&s| g.site(s).servers.clone())
            .collect();
        assert_eq!(p.servers, expected);
    }

    #[test]
    fn unreachable_target_yields_empty_list() {
        let g = load_topology(
            r#"{
            "sites": [{"id": "CS", "tier": 0}, {"id": "C", "tier": 3}, {"id": "X", "tier": 2}],
            "links": [{"id": "a", "src": "CS", "dst": "C", "capacity_mbps": 10, "delay_ms": 0.1}]
        }"#,
        )
        .unwrap();
        assert!(k_shortest_paths(&g, 0, 2, 3).is_empty());
        assert!(k_shortest_paths(&g, 0, 1, 0).is_empty());
    }
}
