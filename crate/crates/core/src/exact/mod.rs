//! Exact placement by depth-first branch-and-bound over per-slice
//! candidates, plus an exhaustive enumeration oracle for tiny instances.

mod brute;
mod candidates;

pub use brute::{brute_force, DEFAULT_HARD_CAP};
pub use crate::validator::objective_of;

use std::time::Instant;

use candidates::{enumerate, twin_groups, Candidate, SliceCandidates};

use crate::nf::NfType;
use crate::placement::{Placement, SlicePlacement, SolveResult, SolveStatus};
use crate::scenario::Scenario;
use crate::validator::FEASIBILITY_TOL;

/// Objective improvements smaller than this are treated as ties.
pub const OBJECTIVE_TOL: f64 = 1e-9;
pub const DEFAULT_TIME_LIMIT: f64 = 600.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactOptions {
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
    /// Relative gap at which a subtree counts as unable to improve.
    pub gap_tolerance: f64,
    pub node_limit: Option<u64>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            time_limit: DEFAULT_TIME_LIMIT,
            gap_tolerance: 0.0,
            node_limit: None,
        }
    }
}

pub fn solve_exact(scenario: &Scenario, time_limit: f64, gap_tolerance: f64) -> SolveResult {
    solve_exact_with(
        scenario,
        &ExactOptions {
            time_limit,
            gap_tolerance,
            node_limit: None,
        },
    )
}

pub fn solve_exact_with(scenario: &Scenario, options: &ExactOptions) -> SolveResult {
    let start = Instant::now();
    let mut order: Vec<usize> = (0..scenario.slices.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&scenario.slices[a], &scenario.slices[b]);
        sa.max_delay().total_cmp(&sb.max_delay()).then_with(|| sa.id.cmp(&sb.id))
    });
    let slices: Vec<SliceCandidates> = order.iter().map(|&s| enumerate(scenario, s)).collect();
    let mut search = Search::new(scenario, slices, options, start);
    let outcome = search.dfs(0, 0.0);

    let runtime = start.elapsed().as_secs_f64();
    let placement = search.best.as_ref().map(|(_, chosen)| search.placement(chosen));
    let objective = match &placement {
        Some(p) => objective_of(p, scenario).expect("search output is well formed"),
        None => f64::INFINITY,
    };
    let (status, bound) = match outcome {
        Flow::Done => match &placement {
            Some(_) => (SolveStatus::Optimal, search.gap_bound.min(objective)),
            None => (SolveStatus::Infeasible, f64::INFINITY),
        },
        Flow::Abort(status) => (status, search.frontier.min(objective)),
    };
    SolveResult {
        status,
        placement,
        objective,
        bound,
        runtime,
        nodes_explored: search.nodes,
    }
}

enum Flow {
    Done,
    Abort(SolveStatus),
}

struct Search<'a> {
    scenario: &'a Scenario,
    slices: Vec<SliceCandidates>,
    options: &'a ExactOptions,
    start: Instant,
    w_server: f64,
    w_link: f64,
    capacity: Vec<f64>,
    link_capacity: Vec<f64>,
    load: Vec<f64>,
    link_load: Vec<f64>,
    hosted: Vec<u32>,
    /// `floor[d][x]`: RU load that slices deeper than `d` must put on `x`.
    floor: Vec<Vec<f64>>,
    /// Search depths of the slices with an NF on each server.
    residents: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    groups: Vec<Vec<usize>>,
    chosen: Vec<usize>,
    cost: f64,
    best: Option<(f64, Vec<usize>)>,
    nodes: u64,
    /// Smallest bound among subtrees cut only by the gap tolerance.
    gap_bound: f64,
    /// Smallest bound among subtrees left open by an abort.
    frontier: f64,
}

impl<'a> Search<'a> {
    fn new(
        scenario: &'a Scenario,
        slices: Vec<SliceCandidates>,
        options: &'a ExactOptions,
        start: Instant,
    ) -> Self {
        let g = &scenario.graph;
        let n_x = g.servers().len();
        let n_l = g.links().len();
        let (group_of, groups) = twin_groups(g);
        let mut floor = vec![vec![0.0; n_x]; slices.len()];
        for d in (0..slices.len().saturating_sub(1)).rev() {
            floor[d] = floor[d + 1].clone();
            if let Some((x, load)) = slices[d + 1].forced_ru {
                floor[d][x] += load;
            }
        }
        Search {
            scenario,
            options,
            start,
            w_server: if n_x > 0 { scenario.alpha / n_x as f64 } else { 0.0 },
            w_link: if n_l > 0 { (1.0 - scenario.alpha) / n_l as f64 } else { 0.0 },
            capacity: g.servers().iter().map(|x| x.capacity).collect(),
            link_capacity: g.links().iter().map(|l| l.capacity_mbps).collect(),
            load: vec![0.0; n_x],
            link_load: vec![0.0; n_l],
            hosted: vec![0; n_x],
            floor,
            residents: vec![Vec::new(); n_x],
            group_of,
            groups,
            chosen: Vec::with_capacity(slices.len()),
            slices,
            cost: 0.0,
            best: None,
            nodes: 0,
            gap_bound: f64::INFINITY,
            frontier: f64::INFINITY,
        }
    }

    fn placement(&self, chosen: &[usize]) -> Placement {
        let mut p = Placement::unplaced(self.scenario.slices.len());
        for (sc, &ci) in self.slices.iter().zip(chosen) {
            let c = &sc.candidates[ci];
            p.slices[sc.slice] = Some(SlicePlacement {
                demand_paths: c.demand_paths.clone(),
                servers: c.servers,
            });
        }
        p
    }

    fn cutoff(&self) -> f64 {
        match &self.best {
            Some((best, _)) => best - OBJECTIVE_TOL.max(self.options.gap_tolerance * best.abs()),
            None => f64::INFINITY,
        }
    }

    /// Records a subtree with lower bound `lb` that is not explored.
    fn cut(&mut self, lb: f64) {
        if let Some((best, _)) = &self.best {
            if lb < best - OBJECTIVE_TOL {
                self.gap_bound = self.gap_bound.min(lb);
            }
        }
    }

    /// Only the lowest-id empty server of a twin group may receive a new NF,
    /// so equivalent placements are explored once.
    fn canonical(&self, c: &Candidate) -> bool {
        let mut claimed = [usize::MAX; 3];
        let mut n = 0;
        for nf in NfType::CHAIN {
            let x = c.servers[nf];
            if self.hosted[x] > 0 || claimed[..n].contains(&x) {
                continue;
            }
            let group = &self.groups[self.group_of[x]];
            if group.len() > 1 {
                let first_free = group
                    .iter()
                    .find(|&&y| self.hosted[y] == 0 && !claimed[..n].contains(&y));
                if first_free != Some(&x) {
                    return false;
                }
            }
            claimed[n] = x;
            n += 1;
        }
        true
    }

    /// Objective increase of placing candidate `ci` of the slice at `depth`,
    /// or `None` when it breaks a capacity or delay constraint of this or an
    /// already placed slice.
    fn evaluate(&self, depth: usize, ci: usize) -> Option<f64> {
        let sc = &self.slices[depth];
        let c = &sc.candidates[ci];
        let floor = &self.floor[depth];
        let cap = 1.0 + FEASIBILITY_TOL;
        for &(x, d) in &c.server_delta {
            if (self.load[x] + d + floor[x]) / self.capacity[x] > cap {
                return None;
            }
        }
        for &(l, d) in &c.link_delta {
            if (self.link_load[l] + d) / self.link_capacity[l] > cap {
                return None;
            }
        }
        // Delays only grow with load, so checking against the forced future
        // RU loads prunes nothing that a completion could satisfy.
        let util = |x: usize| (self.load[x] + c.added_load(x) + floor[x]) / self.capacity[x];
        if !sc.delay_ok(c, util) {
            return None;
        }
        // A slice resident on several touched servers is simply rechecked.
        for &(x, _) in &c.server_delta {
            for &other in &self.residents[x] {
                let osc = &self.slices[other];
                if !osc.delay_ok(&osc.candidates[self.chosen[other]], util) {
                    return None;
                }
            }
        }
        let pw = &self.scenario.piecewise;
        let mut delta = 0.0;
        for &(x, d) in &c.server_delta {
            let u0 = self.load[x] / self.capacity[x];
            let u1 = (self.load[x] + d) / self.capacity[x];
            delta += self.w_server * (pw.value(u1) - pw.value(u0));
        }
        for &(l, d) in &c.link_delta {
            let u0 = self.link_load[l] / self.link_capacity[l];
            let u1 = (self.link_load[l] + d) / self.link_capacity[l];
            delta += self.w_link * (pw.value(u1) - pw.value(u0));
        }
        Some(delta)
    }

    /// Feasible canonical candidates of the slice at `depth`, cheapest first.
    fn options_at(&self, depth: usize) -> Vec<(f64, usize)> {
        let sc = &self.slices[depth];
        let mut out: Vec<(f64, usize)> = (0..sc.candidates.len())
            .filter(|&ci| self.canonical(&sc.candidates[ci]))
            .filter_map(|ci| self.evaluate(depth, ci).map(|d| (d, ci)))
            .collect();
        // Candidates are pre-sorted by tie key, so a stable sort keeps it.
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    fn cheapest(&self, depth: usize) -> Option<f64> {
        let sc = &self.slices[depth];
        (0..sc.candidates.len())
            .filter(|&ci| self.canonical(&sc.candidates[ci]))
            .filter_map(|ci| self.evaluate(depth, ci))
            .min_by(f64::total_cmp)
    }

    /// Lower bound on the cost still to be added by slices at `from..`.
    ///
    /// Each slice contributes its cheapest feasible increment at the current
    /// loads. Where a slice's RU can only go to one server, the RU loads of
    /// all remaining slices on that server are charged jointly instead, which
    /// is tighter because the cost is convex.
    fn remaining_bound(&self, from: usize) -> Option<f64> {
        let pw = &self.scenario.piecewise;
        let mut bound = 0.0;
        let mut forced: Vec<(usize, f64)> = Vec::new();
        for j in from..self.slices.len() {
            let cheapest = self.cheapest(j)?;
            match self.slices[j].forced_ru {
                Some((x, d)) => {
                    let u0 = self.load[x] / self.capacity[x];
                    let alone = self.w_server * (pw.value((self.load[x] + d) / self.capacity[x]) - pw.value(u0));
                    bound += cheapest - alone;
                    match forced.iter_mut().find(|(y, _)| *y == x) {
                        Some(entry) => entry.1 += d,
                        None => forced.push((x, d)),
                    }
                }
                None => bound += cheapest,
            }
        }
        for (x, d) in forced {
            let u1 = (self.load[x] + d) / self.capacity[x];
            if u1 > 1.0 + FEASIBILITY_TOL {
                return None;
            }
            bound += self.w_server * (pw.value(u1) - pw.value(self.load[x] / self.capacity[x]));
        }
        Some(bound)
    }

    fn apply(&mut self, depth: usize, ci: usize) -> Saved {
        let c = &self.slices[depth].candidates[ci];
        let saved = Saved {
            load: c.server_delta.iter().map(|&(x, _)| self.load[x]).collect(),
            link_load: c.link_delta.iter().map(|&(l, _)| self.link_load[l]).collect(),
            cost: self.cost,
        };
        for &(x, d) in &c.server_delta {
            self.load[x] += d;
            self.residents[x].push(depth);
        }
        for nf in NfType::CHAIN {
            self.hosted[c.servers[nf]] += 1;
        }
        for &(l, d) in &c.link_delta {
            self.link_load[l] += d;
        }
        self.chosen.push(ci);
        saved
    }

    fn undo(&mut self, depth: usize, ci: usize, saved: Saved) {
        let c = &self.slices[depth].candidates[ci];
        for (&(x, _), old) in c.server_delta.iter().zip(saved.load) {
            self.load[x] = old;
            self.residents[x].pop();
        }
        for nf in NfType::CHAIN {
            self.hosted[c.servers[nf]] -= 1;
        }
        for (&(l, _), old) in c.link_delta.iter().zip(saved.link_load) {
            self.link_load[l] = old;
        }
        self.chosen.pop();
        self.cost = saved.cost;
    }

    fn out_of_budget(&self) -> Option<SolveStatus> {
        if self.options.node_limit.is_some_and(|n| self.nodes > n) {
            return Some(SolveStatus::Incomplete);
        }
        if self.nodes.is_multiple_of(64) && self.start.elapsed().as_secs_f64() > self.options.time_limit {
            return Some(SolveStatus::TimeLimit);
        }
        None
    }

    /// Explores the subtree at `depth`; `lb` is the bound it was entered with.
    fn dfs(&mut self, depth: usize, lb: f64) -> Flow {
        self.nodes += 1;
        if let Some(status) = self.out_of_budget() {
            self.frontier = self.frontier.min(lb);
            return Flow::Abort(status);
        }
        if depth == self.slices.len() {
            if self.best.as_ref().is_none_or(|(b, _)| self.cost < b - OBJECTIVE_TOL) {
                self.best = Some((self.cost, self.chosen.clone()));
            }
            return Flow::Done;
        }
        let options = self.options_at(depth);
        if options.is_empty() {
            return Flow::Done;
        }
        let Some(rest) = self.remaining_bound(depth + 1) else {
            return Flow::Done;
        };
        for (i, &(delta, ci)) in options.iter().enumerate() {
            let child_lb = self.cost + delta + rest;
            if child_lb >= self.cutoff() {
                self.cut(child_lb);
                break;
            }
            let saved = self.apply(depth, ci);
            self.cost += delta;
            let flow = self.dfs(depth + 1, child_lb);
            self.undo(depth, ci, saved);
            if let Flow::Abort(status) = flow {
                if let Some(&(next, _)) = options.get(i + 1) {
                    let next_lb = self.cost + next + rest;
                    if next_lb < self.cutoff() {
                        self.frontier = self.frontier.min(next_lb);
                    }
                }
                return Flow::Abort(status);
            }
        }
        Flow::Done
    }
}

struct Saved {
    load: Vec<f64>,
    link_load: Vec<f64>,
    cost: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validator::tests::chain_scenario;
    use crate::validator::validate;

    #[test]
    fn no_slices_is_trivially_optimal() {
        let sc = chain_scenario(&[]);
        let r = solve_exact(&sc, 10.0, 0.0);
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.placement.unwrap().slices.len(), 0);
    }

    #[test]
    fn urllc_on_chain_pins_ru_to_cell_site() {
        let sc = chain_scenario(&["URLLC_RO1"]);
        let r = solve_exact(&sc, 10.0, 0.0);
        assert_eq!(r.status, SolveStatus::Optimal);
        let p = r.placement.unwrap();
        assert_eq!(p.slices[0].as_ref().unwrap().servers.ru, 0);
        assert!(validate(&p, &sc).unwrap().is_feasible());
        assert!((r.objective - r.bound).abs() <= 1e-6);
    }

    #[test]
    fn oversized_demand_is_infeasible() {
        let sc = chain_scenario(&["eMBB2"]);
        let r = solve_exact(&sc, 10.0, 0.0);
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.placement.is_none());
    }

    #[test]
    fn node_limit_reports_incomplete() {
        let sc = chain_scenario(&["mMTC1", "mMTC2", "URLLC_RO1"]);
        let r = solve_exact_with(
            &sc,
            &ExactOptions {
                node_limit: Some(2),
                ..ExactOptions::default()
            },
        );
        assert_eq!(r.status, SolveStatus::Incomplete);
        assert!(r.bound <= r.objective);
    }
}
