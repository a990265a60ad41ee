//! First-fit baseline: slices in order of tightening delay budget, each put
//! on the first path whose servers in the preferred tiers can take it.

use std::time::Instant;

use crate::nf::{NfType, PerNf};
use crate::placement::{Placement, SlicePlacement, SolveResult, SolveStatus};
use crate::scenario::{Scenario, ServiceClass};
use crate::topology::Tier;
use crate::validator::{carried_links, objective_of, FEASIBILITY_TOL};

/// Tier sets tried in order for the DU and CU of a slice class.
pub fn tier_preference(class: ServiceClass) -> Vec<Vec<Tier>> {
    use Tier::*;
    match class {
        ServiceClass::Urllc => vec![vec![CellSite, EdgeCloud]],
        ServiceClass::Embb => vec![vec![RegionalCloud], vec![EdgeCloud], vec![CellSite]],
        ServiceClass::Mmtc => vec![vec![CoreCloud]],
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HeuristicOptions {
    /// Keep going after a slice fails instead of stopping there.
    pub skip_failed: bool,
}

pub fn solve_first_fit(scenario: &Scenario) -> SolveResult {
    solve_first_fit_with(scenario, &HeuristicOptions::default())
}

/// Delay budgets are not checked: the returned placement may violate them.
pub fn solve_first_fit_with(scenario: &Scenario, options: &HeuristicOptions) -> SolveResult {
    let start = Instant::now();
    let g = &scenario.graph;
    let mut order: Vec<usize> = (0..scenario.slices.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&scenario.slices[a], &scenario.slices[b]);
        sa.max_delay().total_cmp(&sb.max_delay()).then_with(|| sa.id.cmp(&sb.id))
    });

    let mut state = Residual {
        server: g.servers().iter().map(|x| x.capacity).collect(),
        proq: g.servers().iter().map(|x| x.proq_capacity).collect(),
        link: g.links().iter().map(|l| l.capacity_mbps).collect(),
    };
    let mut placement = Placement::unplaced(scenario.slices.len());
    let mut failed = false;
    for s in order {
        match place_slice(scenario, s, &state) {
            Some((sp, next)) => {
                placement.slices[s] = Some(sp);
                state = next;
            }
            None => {
                failed = true;
                if !options.skip_failed {
                    break;
                }
            }
        }
    }
    let objective = objective_of(&placement, scenario).expect("first-fit output is well formed");
    SolveResult {
        status: if failed { SolveStatus::Infeasible } else { SolveStatus::Feasible },
        placement: Some(placement),
        objective,
        bound: 0.0,
        runtime: start.elapsed().as_secs_f64(),
        nodes_explored: 0,
    }
}

#[derive(Clone)]
struct Residual {
    server: Vec<f64>,
    proq: Vec<PerNf<f64>>,
    link: Vec<f64>,
}

fn place_slice(scenario: &Scenario, s: usize, state: &Residual) -> Option<(SlicePlacement, Residual)> {
    let slice = &scenario.slices[s];
    for tiers in tier_preference(slice.service_class()) {
        for (p, _) in slice.paths.iter().enumerate() {
            if let Some(found) = first_fit_on_path(scenario, s, p, &tiers, state) {
                return Some(found);
            }
        }
    }
    None
}

/// RU on the first fitting server of the source site, then DU and CU on the
/// first fitting server at or after the previous NF's site within `tiers`.
fn first_fit_on_path(
    scenario: &Scenario,
    s: usize,
    p: usize,
    tiers: &[Tier],
    state: &Residual,
) -> Option<(SlicePlacement, Residual)> {
    let g = &scenario.graph;
    let slice = &scenario.slices[s];
    let path = &slice.paths[p];
    let rate = slice.total_rate();
    let queue = scenario.queue_units(s);
    let mut next = state.clone();
    let mut servers = [0usize; 3];
    let mut from = 0;
    for nf in NfType::CHAIN {
        let profile = &scenario.nf_profiles[nf];
        let need = profile.load_ratio * rate;
        let need_q = profile.load_ratio * queue;
        let candidates = path.sites.iter().enumerate().skip(from).filter(|&(i, &site)| {
            if nf == NfType::Ru {
                i == 0
            } else {
                tiers.contains(&g.site(site).tier)
            }
        });
        let mut chosen = None;
        'sites: for (i, &site) in candidates {
            for &x in &g.site(site).servers {
                if next.server[x] + FEASIBILITY_TOL >= need && next.proq[x][nf] + FEASIBILITY_TOL >= need_q {
                    chosen = Some((i, x));
                    break 'sites;
                }
            }
        }
        let (i, x) = chosen?;
        next.server[x] -= need;
        next.proq[x][nf] -= need_q;
        servers[nf.index()] = x;
        from = i;
    }
    let cu_pos = Some(from);
    for demand in &slice.demands {
        for &l in carried_links(path, cu_pos, scenario.options.link_load_scope) {
            if next.link[l] + FEASIBILITY_TOL < demand.rate_mbps {
                return None;
            }
            next.link[l] -= demand.rate_mbps;
        }
    }
    let sp = SlicePlacement {
        demand_paths: vec![p; slice.demands.len()],
        servers: PerNf::new(servers[0], servers[1], servers[2]),
    };
    Some((sp, next))
}
