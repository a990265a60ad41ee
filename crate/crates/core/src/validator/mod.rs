//! Direct evaluation of placements: utilizations, delays, objective and
//! constraint checks, computed from the decoded structure without the IR.

mod metrics;

pub use metrics::{
    aggregate_metrics, replication_metrics, ClassDelay, MetricsReport, ReplicationMetrics, Stat,
    TierOccupancy,
};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nf::NfType;
use crate::placement::{Placement, SlicePlacement};
use crate::scenario::{LinkLoadScope, Scenario};
use crate::topology::Path;

/// Absolute slack allowed on every constraint before it counts as violated.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Links of `path` that carry a demand whose CU sits at site position `cu_pos`.
pub(crate) fn carried_links(path: &Path, cu_pos: Option<usize>, scope: LinkLoadScope) -> &[usize] {
    match (scope, cu_pos) {
        (LinkLoadScope::ToCu, Some(pos)) => &path.links[..pos],
        _ => &path.links,
    }
}

/// Propagation delay from the source to the CU's site, or the whole path
/// when the CU is not on it.
pub(crate) fn link_delay_to(path: &Path, cu_pos: Option<usize>) -> f64 {
    match cu_pos {
        Some(pos) => path.cumulative_delay[pos],
        None => path.delay(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Utilizations {
    /// Per server, indexed like `NetworkGraph::servers`.
    pub server: Vec<f64>,
    /// Per directed link.
    pub link: Vec<f64>,
}

fn cu_position(scenario: &Scenario, path: &Path, sp: &SlicePlacement) -> Option<usize> {
    path.position(scenario.graph.server(sp.servers.cu).site)
}

/// Server utilization from NF processing loads and link utilization from
/// routed demand rates.
pub fn utilizations(placement: &Placement, scenario: &Scenario) -> Result<Utilizations> {
    placement.check_shape(scenario)?;
    let g = &scenario.graph;
    let mut server_load = vec![0.0; g.servers().len()];
    let mut link_load = vec![0.0; g.links().len()];
    for (s, sp) in placement.placed() {
        let slice = &scenario.slices[s];
        let rate = slice.total_rate();
        for nf in NfType::CHAIN {
            server_load[sp.servers[nf]] += scenario.nf_profiles[nf].load_ratio * rate;
        }
        for (demand, &p) in slice.demands.iter().zip(&sp.demand_paths) {
            let path = &slice.paths[p];
            let cu_pos = cu_position(scenario, path, sp);
            for &l in carried_links(path, cu_pos, scenario.options.link_load_scope) {
                link_load[l] += demand.rate_mbps;
            }
        }
    }
    Ok(Utilizations {
        server: server_load
            .iter()
            .zip(g.servers())
            .map(|(load, x)| load / x.capacity)
            .collect(),
        link: link_load
            .iter()
            .zip(g.links())
            .map(|(load, l)| load / l.capacity_mbps)
            .collect(),
    })
}

/// Processing delay of NF `nf` of slice `slice` hosted on `server` at
/// server utilization `u`.
pub fn processing_delay(scenario: &Scenario, slice: usize, nf: NfType, server: usize, u: f64) -> f64 {
    let profile = &scenario.nf_profiles[nf];
    let proq = scenario.graph.server(server).proq_capacity[nf];
    profile.d_proq * profile.load_ratio * scenario.queue_units(slice) / proq
        + profile.d_pro_min
        + profile.d_prox * u
}

fn delay_with(
    scenario: &Scenario,
    util: &Utilizations,
    slice: usize,
    sp: &SlicePlacement,
    demand: usize,
) -> f64 {
    let path = &scenario.slices[slice].paths[sp.demand_paths[demand]];
    let links = link_delay_to(path, cu_position(scenario, path, sp));
    let processing: f64 = NfType::CHAIN
        .iter()
        .map(|&nf| {
            let x = sp.servers[nf];
            processing_delay(scenario, slice, nf, x, util.server[x])
        })
        .sum();
    links + processing
}

/// End-to-end delay of one demand: propagation up to the CU's site plus the
/// processing delay of the three NFs.
pub fn service_delay(placement: &Placement, scenario: &Scenario, slice: usize, demand: usize) -> Result<f64> {
    let util = utilizations(placement, scenario)?;
    let sp = placement
        .slices
        .get(slice)
        .and_then(Option::as_ref)
        .ok_or_else(|| Error::MalformedPlacement(format!("slice #{slice} is not placed")))?;
    if demand >= sp.demand_paths.len() {
        return Err(Error::MalformedPlacement(format!("demand #{demand} is not routed")));
    }
    Ok(delay_with(scenario, &util, slice, sp, demand))
}

/// Delay of every demand of every placed slice, `None` for unplaced slices.
pub fn all_service_delays(placement: &Placement, scenario: &Scenario) -> Result<Vec<Option<Vec<f64>>>> {
    let util = utilizations(placement, scenario)?;
    Ok(placement
        .slices
        .iter()
        .enumerate()
        .map(|(s, sp)| {
            sp.as_ref().map(|sp| {
                (0..sp.demand_paths.len())
                    .map(|d| delay_with(scenario, &util, s, sp, d))
                    .collect()
            })
        })
        .collect())
}

/// Unweighted sums of piecewise costs over servers and over links.
pub fn cost_sums(placement: &Placement, scenario: &Scenario) -> Result<(f64, f64)> {
    let util = utilizations(placement, scenario)?;
    let pw = &scenario.piecewise;
    Ok((
        util.server.iter().map(|&u| pw.value(u)).sum(),
        util.link.iter().map(|&u| pw.value(u)).sum(),
    ))
}

/// Normalized weighted objective recomputed from scratch.
pub fn objective_of(placement: &Placement, scenario: &Scenario) -> Result<f64> {
    let (servers, links) = cost_sums(placement, scenario)?;
    Ok(combine_costs(scenario, servers, links))
}

pub(crate) fn combine_costs(scenario: &Scenario, server_sum: f64, link_sum: f64) -> f64 {
    let g = &scenario.graph;
    let mut obj = 0.0;
    if !g.servers().is_empty() {
        obj += scenario.alpha / g.servers().len() as f64 * server_sum;
    }
    if !g.links().is_empty() {
        obj += (1.0 - scenario.alpha) / g.links().len() as f64 * link_sum;
    }
    obj
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// Constraint family, e.g. `chain_order`.
    pub label: &'static str,
    pub entities: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Signed distance to satisfaction; negative when violated.
    pub slack: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}]: lhs={:.9} rhs={:.9} slack={:.3e}",
            self.label, self.entities, self.lhs, self.rhs, self.slack
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.violations.iter().map(|v| v.label)
    }

    /// Records `lhs <= rhs` if violated; `entities` is only built then.
    fn upper(&mut self, label: &'static str, lhs: f64, rhs: f64, entities: impl FnOnce() -> String) {
        if lhs > rhs + FEASIBILITY_TOL {
            self.violations.push(Violation {
                label,
                entities: entities(),
                lhs,
                rhs,
                slack: rhs - lhs,
            });
        }
    }
}

/// Checks every constraint family directly on the placement.
pub fn validate(placement: &Placement, scenario: &Scenario) -> Result<ViolationReport> {
    let util = utilizations(placement, scenario)?;
    let g = &scenario.graph;
    let mut report = ViolationReport::default();
    for (s, slice) in scenario.slices.iter().enumerate() {
        let Some(sp) = &placement.slices[s] else {
            for d in &slice.demands {
                report.upper("path_selection", 1.0, 0.0, || format!("s={},d={}", slice.id, d.id));
            }
            continue;
        };
        for (d, demand) in slice.demands.iter().enumerate() {
            let path = &slice.paths[sp.demand_paths[d]];
            let ent = |extra: &str| format!("s={},d={},p={}{extra}", slice.id, demand.id, path.id);
            let pos = sp.servers.map(|&x| path.position(g.server(x).site));
            for nf in NfType::CHAIN {
                if pos[nf].is_none() {
                    let x = &g.server(sp.servers[nf]).id;
                    report.upper("nf_on_path", 1.0, 0.0, || ent(&format!(",v={nf},x={x}")));
                }
            }
            // Position of the RU's site on the path; off-path counts as past the end.
            let ru_at = pos.ru.unwrap_or(path.sites.len());
            let x = &g.server(sp.servers.ru).id;
            report.upper("ru_at_source", ru_at as f64, 0.0, || ent(&format!(",x={x}")));
            for (prev, nf) in [(NfType::Ru, NfType::Du), (NfType::Du, NfType::Cu)] {
                if let (Some(a), Some(b)) = (pos[prev], pos[nf]) {
                    report.upper("chain_order", a as f64, b as f64, || ent(&format!(",v={nf}")));
                }
            }
            let delay = delay_with(scenario, &util, s, sp, d);
            report.upper("service_delay", delay, slice.max_delay(), || ent(""));
        }
        for nf in NfType::CHAIN {
            let x = sp.servers[nf];
            let dpro = processing_delay(scenario, s, nf, x, util.server[x]);
            report.upper("processing_delay_max", dpro, scenario.nf_profiles[nf].d_pro_max, || {
                format!("s={},v={nf},x={}", slice.id, g.server(x).id)
            });
        }
    }
    for (x, &u) in util.server.iter().enumerate() {
        report.upper("server_capacity", u, 1.0, || format!("x={}", g.server(x).id));
    }
    for (l, &u) in util.link.iter().enumerate() {
        report.upper("link_capacity", u, 1.0, || format!("l={}", g.link(l).id));
    }
    Ok(report)
}

#[cfg(test)]
pub(crate) mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::nf::PerNf;
    use crate::scenario::{build_scenario, slice_type_by_name, GeneratorConfig};
    use crate::topology::load_topology;

    /// CS -> EC -> CC chain; 0.1 ms per hop, 10 Gbps links.
    pub(crate) fn chain_scenario(types: &[&str]) -> Scenario {
        let topo = r#"{
            "sites": [
                {"id": "CS", "tier": 0, "servers": [{"id": "xa", "capacity": 100, "proq_capacity": {"RU": 10, "DU": 10, "CU": 10}}]},
                {"id": "EC", "tier": 1, "servers": [{"id": "xb", "capacity": 300, "proq_capacity": {"RU": 30, "DU": 30, "CU": 30}}]},
                {"id": "CC", "tier": 3, "servers": [{"id": "xc", "capacity": 2000, "proq_capacity": {"RU": 200, "DU": 200, "CU": 200}}]}
            ],
            "links": [
                {"id": "a", "src": "CS", "dst": "EC", "capacity_mbps": 10000, "delay_ms": 0.1, "bidirectional": true},
                {"id": "b", "src": "EC", "dst": "CC", "capacity_mbps": 10000, "delay_ms": 0.1, "bidirectional": true}
            ]
        }"#;
        let g = Arc::new(load_topology(topo).unwrap());
        let picks = types
            .iter()
            .map(|t| (slice_type_by_name(t).unwrap(), 0))
            .collect();
        build_scenario(g, picks, &GeneratorConfig::default()).unwrap()
    }

    pub(crate) fn place(servers: [usize; 3]) -> Option<SlicePlacement> {
        Some(SlicePlacement {
            demand_paths: vec![0],
            servers: PerNf::new(servers[0], servers[1], servers[2]),
        })
    }

    #[test]
    fn empty_placement_is_all_zero() {
        let sc = chain_scenario(&[]);
        let util = utilizations(&Placement::unplaced(0), &sc).unwrap();
        assert!(util.server.iter().chain(&util.link).all(|&u| u == 0.0));
        assert_eq!(objective_of(&Placement::unplaced(0), &sc).unwrap(), 0.0);
    }

    #[test]
    fn ru_only_server_utilization_and_delay() {
        let sc = chain_scenario(&["URLLC_RO1"]);
        let p = Placement {
            slices: vec![place([0, 1, 1])],
        };
        let util = utilizations(&p, &sc).unwrap();
        assert_abs_diff_eq!(util.server[0], 2.16 * 4.0 / 100.0, epsilon = 1e-15);
        let prof = &sc.nf_profiles.ru;
        let expected = prof.d_proq * 2.16 * 1.0 / 10.0 + prof.d_pro_min + prof.d_prox * 0.0864;
        assert_abs_diff_eq!(processing_delay(&sc, 0, NfType::Ru, 0, util.server[0]), expected, epsilon = 1e-15);
    }

    #[test]
    fn link_utilization_of_small_demand() {
        let sc = chain_scenario(&["URLLC_RO2"]);
        let p = Placement {
            slices: vec![place([0, 1, 1])],
        };
        let util = utilizations(&p, &sc).unwrap();
        let cs_ec = sc.slices[0].paths[0].links[0];
        assert_abs_diff_eq!(util.link[cs_ec], 0.0025, epsilon = 1e-15);
        // The CU sits at EC, so EC -> CC carries nothing.
        let ec_cc = sc.slices[0].paths[0].links[1];
        assert_eq!(util.link[ec_cc], 0.0);
    }

    #[test]
    fn moving_cu_one_hop_adds_that_link_delay() {
        let sc = chain_scenario(&["URLLC_RO1"]);
        // Colocated: no link term.
        let local = Placement { slices: vec![place([0, 0, 0])] };
        let d0 = service_delay(&local, &sc, 0, 0).unwrap();
        let util = utilizations(&local, &sc).unwrap();
        let proc_only: f64 = NfType::CHAIN
            .iter()
            .map(|&nf| processing_delay(&sc, 0, nf, 0, util.server[0]))
            .sum();
        assert_abs_diff_eq!(d0, proc_only, epsilon = 1e-15);

        let near = Placement { slices: vec![place([0, 0, 1])] };
        let far = Placement { slices: vec![place([0, 0, 2])] };
        // Loads on xa change, so compare with the CU moving between two
        // servers whose utilization is irrelevant for the RU/DU terms.
        let dn = service_delay(&near, &sc, 0, 0).unwrap();
        let df = service_delay(&far, &sc, 0, 0).unwrap();
        let un = utilizations(&near, &sc).unwrap();
        let uf = utilizations(&far, &sc).unwrap();
        let cu = &sc.nf_profiles.cu;
        let link = 1e-4;
        let expected = link + cu.d_proq * 0.9 / 200.0 - cu.d_proq * 0.9 / 30.0
            + cu.d_prox * (uf.server[2] - un.server[1]);
        assert_abs_diff_eq!(df - dn, expected, epsilon = 1e-15);
    }

    #[test]
    fn order_and_source_violations() {
        let sc = chain_scenario(&["mMTC1"]);
        let reversed = Placement { slices: vec![place([0, 2, 1])] };
        let r = validate(&reversed, &sc).unwrap();
        assert_eq!(r.labels().collect::<Vec<_>>(), vec!["chain_order"]);

        let ru_late = Placement { slices: vec![place([1, 1, 2])] };
        let r = validate(&ru_late, &sc).unwrap();
        assert!(r.labels().any(|l| l == "ru_at_source"));

        let ok = Placement { slices: vec![place([0, 1, 2])] };
        assert!(validate(&ok, &sc).unwrap().is_feasible());

        let unplaced = Placement::unplaced(1);
        assert_eq!(validate(&unplaced, &sc).unwrap().labels().collect::<Vec<_>>(), vec!["path_selection"]);
    }

    #[test]
    fn overload_and_budget_violations() {
        // 10 Gbps eMBB demand cannot fit a 100 PU cell-site server.
        let sc = chain_scenario(&["eMBB1"]);
        let p = Placement { slices: vec![place([0, 2, 2])] };
        let r = validate(&p, &sc).unwrap();
        assert!(r.labels().any(|l| l == "server_capacity"));
        assert!(r.violations.iter().all(|v| v.slack < 0.0));
    }

    #[test]
    fn alpha_reweights_cost_sums_linearly() {
        let mut sc = chain_scenario(&["URLLC_RO2", "mMTC1"]);
        let p = Placement { slices: vec![place([0, 1, 1]), place([0, 2, 2])] };
        let (xs, ls) = cost_sums(&p, &sc).unwrap();
        let nx = sc.graph.servers().len() as f64;
        let nl = sc.graph.links().len() as f64;
        for alpha in [0.49, 0.98] {
            sc.alpha = alpha;
            let expected = alpha / nx * xs + (1.0 - alpha) / nl * ls;
            assert_abs_diff_eq!(objective_of(&p, &sc).unwrap(), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn malformed_placements_are_errors() {
        let sc = chain_scenario(&["mMTC1"]);
        assert!(matches!(utilizations(&Placement::unplaced(2), &sc), Err(Error::MalformedPlacement(_))));
        let mut p = Placement { slices: vec![place([0, 1, 9])] };
        assert!(validate(&p, &sc).is_err());
        p.slices[0].as_mut().unwrap().demand_paths = vec![4];
        assert!(validate(&p, &sc).is_err());
    }
}
