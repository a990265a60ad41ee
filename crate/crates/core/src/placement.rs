//! Decoded placement decisions and solver results.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nf::{NfType, PerNf};
use crate::scenario::Scenario;

/// Placement of one slice: a path per demand and one server per NF.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SlicePlacement {
    /// Index into the slice's admissible paths, one entry per demand.
    pub demand_paths: Vec<usize>,
    pub servers: PerNf<usize>,
}

impl SlicePlacement {
    pub fn server(&self, nf: NfType) -> usize {
        self.servers[nf]
    }
}

/// Placement of a whole scenario, aligned with `Scenario::slices`.
/// `None` marks a slice that was not placed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Placement {
    pub slices: Vec<Option<SlicePlacement>>,
}

impl Placement {
    pub fn unplaced(n_slices: usize) -> Self {
        Placement {
            slices: vec![None; n_slices],
        }
    }

    pub fn is_complete(&self) -> bool {
        self.slices.iter().all(Option::is_some)
    }

    pub fn placed(&self) -> impl Iterator<Item = (usize, &SlicePlacement)> {
        self.slices
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.as_ref().map(|p| (i, p)))
    }

    pub fn placed_count(&self) -> usize {
        self.slices.iter().filter(|p| p.is_some()).count()
    }

    /// Checks indices and shapes against the scenario.
    pub fn check_shape(&self, scenario: &Scenario) -> Result<()> {
        if self.slices.len() != scenario.slices.len() {
            return Err(Error::MalformedPlacement(format!(
                "placement covers {} slices, scenario has {}",
                self.slices.len(),
                scenario.slices.len()
            )));
        }
        let n_servers = scenario.graph.servers().len();
        for (s, sp) in self.placed() {
            let slice = &scenario.slices[s];
            if sp.demand_paths.len() != slice.demands.len() {
                return Err(Error::MalformedPlacement(format!(
                    "slice {} routes {} demands, expected {}",
                    slice.id,
                    sp.demand_paths.len(),
                    slice.demands.len()
                )));
            }
            if let Some(&p) = sp.demand_paths.iter().find(|&&p| p >= slice.paths.len()) {
                return Err(Error::MalformedPlacement(format!(
                    "slice {} uses path #{p}, only {} admissible",
                    slice.id,
                    slice.paths.len()
                )));
            }
            for nf in NfType::CHAIN {
                if sp.servers[nf] >= n_servers {
                    return Err(Error::MalformedPlacement(format!(
                        "slice {} places {nf} on unknown server #{}",
                        slice.id, sp.servers[nf]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// Complete placement without an optimality proof (heuristics).
    Feasible,
    Infeasible,
    TimeLimit,
    /// Search stopped by the node limit.
    Incomplete,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Incomplete => "incomplete",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub placement: Option<Placement>,
    pub objective: f64,
    /// Best proven lower bound on the optimal objective.
    pub bound: f64,
    /// Wall time in seconds.
    pub runtime: f64,
    pub nodes_explored: u64,
}

/// JSON form of a placement, keyed by entity ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementDocument {
    pub slices: Vec<SlicePlacementEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlicePlacementEntry {
    pub slice: String,
    pub servers: PerNf<String>,
    pub demands: Vec<DemandRouteEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandRouteEntry {
    pub demand: String,
    pub path: String,
}

impl PlacementDocument {
    pub fn from_placement(placement: &Placement, scenario: &Scenario) -> Self {
        let g = &scenario.graph;
        let slices = placement
            .placed()
            .map(|(s, sp)| {
                let slice = &scenario.slices[s];
                SlicePlacementEntry {
                    slice: slice.id.clone(),
                    servers: sp.servers.map(|&x| g.server(x).id.clone()),
                    demands: slice
                        .demands
                        .iter()
                        .zip(&sp.demand_paths)
                        .map(|(d, &p)| DemandRouteEntry {
                            demand: d.id.clone(),
                            path: slice.paths[p].id.clone(),
                        })
                        .collect(),
                }
            })
            .collect();
        PlacementDocument { slices }
    }

    /// Resolves ids against `scenario`; unknown ids are reference errors.
    pub fn to_placement(&self, scenario: &Scenario) -> Result<Placement> {
        let g = &scenario.graph;
        let mut placement = Placement::unplaced(scenario.slices.len());
        let index: HashMap<&str, usize> = scenario
            .slices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        for entry in &self.slices {
            let &s = index
                .get(entry.slice.as_str())
                .ok_or_else(|| Error::DanglingReference {
                    kind: "slice",
                    id: entry.slice.clone(),
                })?;
            let slice = &scenario.slices[s];
            if placement.slices[s].is_some() {
                return Err(Error::DuplicateId {
                    kind: "slice placement",
                    id: entry.slice.clone(),
                });
            }
            let server = |id: &String| {
                g.server_by_id(id).ok_or_else(|| Error::DanglingReference {
                    kind: "server",
                    id: id.clone(),
                })
            };
            let servers = PerNf::new(
                server(&entry.servers.ru)?,
                server(&entry.servers.du)?,
                server(&entry.servers.cu)?,
            );
            let mut demand_paths = vec![usize::MAX; slice.demands.len()];
            for route in &entry.demands {
                let d = slice
                    .demands
                    .iter()
                    .position(|d| d.id == route.demand)
                    .ok_or_else(|| Error::DanglingReference {
                        kind: "demand",
                        id: format!("{}/{}", slice.id, route.demand),
                    })?;
                let p = slice
                    .paths
                    .iter()
                    .position(|p| p.id == route.path)
                    .ok_or_else(|| Error::DanglingReference {
                        kind: "path",
                        id: route.path.clone(),
                    })?;
                demand_paths[d] = p;
            }
            if let Some(d) = demand_paths.iter().position(|&p| p == usize::MAX) {
                return Err(Error::MalformedPlacement(format!(
                    "demand {} of slice {} is not routed",
                    slice.demands[d].id, slice.id
                )));
            }
            placement.slices[s] = Some(SlicePlacement {
                demand_paths,
                servers,
            });
        }
        Ok(placement)
    }
}
