use std::time::Instant;

use crate::error::{Error, Result};
use crate::nf::PerNf;
use crate::placement::{Placement, SlicePlacement, SolveResult, SolveStatus};
use crate::scenario::Scenario;
use crate::validator::{objective_of, validate};

pub const DEFAULT_HARD_CAP: u64 = 10_000_000;

/// Exhaustive search: every route per demand and every server triple for
/// each slice, judged by the validator alone. A choice that violates a
/// constraint with its slice placed alone is dropped up front, since further
/// slices only add load. Errors when the product of the remaining per-slice
/// choices exceeds `hard_cap`.
pub fn brute_force(scenario: &Scenario, hard_cap: u64) -> Result<SolveResult> {
    let start = Instant::now();
    let n = scenario.slices.len();
    let mut per_slice: Vec<Vec<SlicePlacement>> = Vec::with_capacity(n);
    let mut size = 1.0_f64;
    for (s, slice) in scenario.slices.iter().enumerate() {
        let mut servers: Vec<usize> = slice.paths.iter().flat_map(|p| p.servers.iter().copied()).collect();
        servers.sort_unstable();
        servers.dedup();
        let mut options = Vec::new();
        for routes in tuples(slice.paths.len(), slice.demands.len()) {
            for &ru in &servers {
                for &du in &servers {
                    for &cu in &servers {
                        let sp = SlicePlacement {
                            demand_paths: routes.clone(),
                            servers: PerNf::new(ru, du, cu),
                        };
                        let mut alone = Placement::unplaced(n);
                        alone.slices[s] = Some(sp.clone());
                        let report = validate(&alone, scenario)?;
                        // Other slices are unplaced here and always report path_selection.
                        if report.labels().all(|l| l == "path_selection") {
                            options.push(sp);
                        }
                    }
                }
            }
        }
        size *= options.len() as f64;
        per_slice.push(options);
    }
    if size > hard_cap as f64 {
        return Err(Error::EnumerationTooLarge { size, cap: hard_cap });
    }

    let mut search = Enumeration {
        scenario,
        options: &per_slice,
        placement: Placement::unplaced(n),
        best: None,
        evaluated: 0,
    };
    search.descend(0)?;
    let Enumeration { best, evaluated, .. } = search;
    let runtime = start.elapsed().as_secs_f64();
    Ok(match best {
        Some((objective, placement)) => SolveResult {
            status: SolveStatus::Optimal,
            placement: Some(placement),
            objective,
            bound: objective,
            runtime,
            nodes_explored: evaluated,
        },
        None => SolveResult {
            status: SolveStatus::Infeasible,
            placement: None,
            objective: f64::INFINITY,
            bound: f64::INFINITY,
            runtime,
            nodes_explored: evaluated,
        },
    })
}

struct Enumeration<'a> {
    scenario: &'a Scenario,
    options: &'a [Vec<SlicePlacement>],
    placement: Placement,
    best: Option<(f64, Placement)>,
    evaluated: u64,
}

impl Enumeration<'_> {
    /// Depth-first over slices. A partial placement that already violates a
    /// constraint is abandoned: placing more slices never removes a violation.
    fn descend(&mut self, s: usize) -> Result<()> {
        if s == self.options.len() {
            self.evaluated += 1;
            if validate(&self.placement, self.scenario)?.is_feasible() {
                let obj = objective_of(&self.placement, self.scenario)?;
                if self.best.as_ref().is_none_or(|(b, _)| obj < *b) {
                    self.best = Some((obj, self.placement.clone()));
                }
            }
            return Ok(());
        }
        for option in &self.options[s] {
            self.placement.slices[s] = Some(option.clone());
            let last = s + 1 == self.options.len();
            if last || validate(&self.placement, self.scenario)?.labels().all(|l| l == "path_selection") {
                self.descend(s + 1)?;
            }
        }
        self.placement.slices[s] = None;
        Ok(())
    }
}

fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .iter()
            .flat_map(|t| {
                (0..base).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}
