//! Replicated runs and slice-count sweeps on generated scenarios.
//!
//! Replication `i` of a point uses scenario seed `seed + i`. Replications run
//! on the rayon pool; results are returned in (count, replication, solver)
//! order regardless of completion order.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{solve_exact_with, ExactOptions};
use crate::heuristic::solve_first_fit;
use crate::nf::NfType;
use crate::placement::SolveResult;
use crate::scenario::{builtin_nf_profiles, generate_scenario_with, GeneratorConfig, NfProfiles, Scenario};
use crate::topology::{generate_default_topology, NetworkGraph, TopologyParams};
use crate::validator::{replication_metrics, validate, MetricsReport, ReplicationMetrics};

/// Demand scale under which the exact solver handles the default topology
/// comfortably.
pub const TREND_DEMAND_SCALE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Heuristic,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Heuristic => "heuristic",
        }
    }
}

/// Delay constants and topology placeholders used together.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub name: &'static str,
    pub topology: TopologyParams,
    pub nf_profiles: NfProfiles,
}

impl Profile {
    /// Builtin link delays and NF constants.
    pub fn standard() -> Self {
        Profile {
            name: "standard",
            topology: TopologyParams::default(),
            nf_profiles: builtin_nf_profiles(),
        }
    }

    /// Longer access and ring links and larger fixed processing delays, so
    /// that URLLC budgets bind: an off-site CU costs a noticeable share of
    /// the 1 ms budget and a loaded cell-site server pushes co-located
    /// URLLC chains over it.
    pub fn calibrated() -> Self {
        let mut topology = TopologyParams::default();
        topology.access_link.delay_ms = 0.2;
        topology.ring_link.delay_ms = 0.1;
        let mut nf_profiles = builtin_nf_profiles();
        for (nf, min_ms) in NfType::CHAIN.into_iter().zip([0.15, 0.3, 0.3]) {
            nf_profiles[nf].d_pro_min = min_ms * 1e-3;
            nf_profiles[nf].d_pro_max = 0.8e-3;
        }
        Profile {
            name: "calibrated",
            topology,
            nf_profiles,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "standard" => Ok(Profile::standard()),
            "calibrated" => Ok(Profile::calibrated()),
            other => Err(Error::Parse(format!(
                "unknown profile `{other}` (expected `standard` or `calibrated`)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub solvers: Vec<SolverKind>,
    pub replications: usize,
    /// Scenario seed of replication 0.
    pub seed: u64,
    /// Generator settings; `n_slices` and `seed` are set per run.
    pub generator: GeneratorConfig,
    pub exact: ExactOptions,
    /// Confidence level of the aggregated intervals.
    pub confidence: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            solvers: vec![SolverKind::Exact, SolverKind::Heuristic],
            replications: 10,
            seed: 1,
            generator: GeneratorConfig {
                demand_scale: TREND_DEMAND_SCALE,
                ..GeneratorConfig::default()
            },
            exact: ExactOptions::default(),
            confidence: 0.95,
        }
    }
}

impl ExperimentConfig {
    pub fn with_profile(mut self, profile: &Profile) -> Self {
        self.generator.nf_profiles = profile.nf_profiles;
        self
    }
}

/// One solver run on one replication.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub slice_count: usize,
    pub replication: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub result: SolveResult,
    pub metrics: ReplicationMetrics,
    /// Constraint violations reported by the validator (0 when no placement).
    pub violations: usize,
}

/// Aggregate of all replications of one (count, solver) point.
#[derive(Clone, Debug)]
pub struct PointSummary {
    pub slice_count: usize,
    pub solver: SolverKind,
    pub report: MetricsReport,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub runs: Vec<RunRecord>,
    pub points: Vec<PointSummary>,
}

impl SweepResult {
    pub fn point(&self, slice_count: usize, solver: SolverKind) -> Option<&MetricsReport> {
        self.points
            .iter()
            .find(|p| p.slice_count == slice_count && p.solver == solver)
            .map(|p| &p.report)
    }
}

pub fn solve_with(kind: SolverKind, scenario: &Scenario, exact: &ExactOptions) -> SolveResult {
    match kind {
        SolverKind::Exact => solve_exact_with(scenario, exact),
        SolverKind::Heuristic => solve_first_fit(scenario),
    }
}

/// Runs every configured solver on `scenario` and measures the outcome.
pub fn run_scenario(
    scenario: &Scenario,
    solvers: &[SolverKind],
    exact: &ExactOptions,
) -> Result<Vec<(SolverKind, SolveResult, ReplicationMetrics, usize)>> {
    solvers
        .iter()
        .map(|&kind| {
            let result = solve_with(kind, scenario, exact);
            let metrics = replication_metrics(scenario, &result)?;
            let violations = match &result.placement {
                Some(p) => validate(p, scenario)?.violations.len(),
                None => 0,
            };
            Ok((kind, result, metrics, violations))
        })
        .collect()
}

pub fn generate_replication(graph: &Arc<NetworkGraph>, config: &ExperimentConfig, n: usize, rep: usize) -> Result<Scenario> {
    let gen = GeneratorConfig {
        n_slices: n,
        seed: config.seed + rep as u64,
        ..config.generator.clone()
    };
    generate_scenario_with(graph.clone(), &gen)
}

/// Runs all replications of every slice count.
pub fn sweep(graph: &Arc<NetworkGraph>, config: &ExperimentConfig, slice_counts: &[usize]) -> Result<SweepResult> {
    if config.replications == 0 {
        return Err(Error::Range {
            field: "replications".into(),
            value: 0.0,
            expected: ">= 1",
        });
    }
    let jobs: Vec<(usize, usize)> = slice_counts
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |r| (n, r)))
        .collect();
    let per_job: Vec<Vec<RunRecord>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let scenario = generate_replication(graph, config, n, rep)?;
            let runs = run_scenario(&scenario, &config.solvers, &config.exact)?;
            Ok(runs
                .into_iter()
                .map(|(solver, result, metrics, violations)| RunRecord {
                    slice_count: n,
                    replication: rep,
                    seed: scenario.seed,
                    solver,
                    result,
                    metrics,
                    violations,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let runs: Vec<RunRecord> = per_job.into_iter().flatten().collect();

    let mut points = Vec::new();
    for &n in slice_counts {
        for &solver in &config.solvers {
            let reps: Vec<ReplicationMetrics> = runs
                .iter()
                .filter(|r| r.slice_count == n && r.solver == solver)
                .map(|r| r.metrics.clone())
                .collect();
            points.push(PointSummary {
                slice_count: n,
                solver,
                report: MetricsReport::from_replications(&reps, config.confidence)?,
            });
        }
    }
    Ok(SweepResult { runs, points })
}

/// The reference topology for a profile.
pub fn profile_topology(profile: &Profile, seed: u64) -> Result<Arc<NetworkGraph>> {
    Ok(Arc::new(generate_default_topology(&profile.topology, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::SolveStatus;

    fn small_config(reps: usize) -> ExperimentConfig {
        ExperimentConfig {
            replications: reps,
            ..ExperimentConfig::default()
        }
        .with_profile(&Profile::calibrated())
    }

    #[test]
    fn sweep_shape_and_order() {
        let g = profile_topology(&Profile::calibrated(), 1).unwrap();
        let res = sweep(&g, &small_config(2), &[5, 10]).unwrap();
        assert_eq!(res.runs.len(), 2 * 2 * 2);
        let order: Vec<(usize, usize, SolverKind)> =
            res.runs.iter().map(|r| (r.slice_count, r.replication, r.solver)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        assert_eq!(res.points.len(), 4);
        assert!(res.runs.iter().all(|r| r.seed == 1 + r.replication as u64));
    }

    #[test]
    fn sweep_is_deterministic() {
        let g = profile_topology(&Profile::calibrated(), 1).unwrap();
        let a = sweep(&g, &small_config(3), &[8]).unwrap();
        let b = sweep(&g, &small_config(3), &[8]).unwrap();
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.result.placement, y.result.placement);
            assert_eq!(x.result.objective, y.result.objective);
        }
    }

    #[test]
    fn exact_runs_are_clean() {
        let g = profile_topology(&Profile::calibrated(), 1).unwrap();
        let res = sweep(&g, &small_config(3), &[10]).unwrap();
        for r in res.runs.iter().filter(|r| r.solver == SolverKind::Exact) {
            assert_eq!(r.result.status, SolveStatus::Optimal);
            assert_eq!(r.violations, 0);
        }
    }

    #[test]
    fn zero_replications_rejected() {
        let g = profile_topology(&Profile::standard(), 1).unwrap();
        assert!(sweep(&g, &small_config(0), &[5]).is_err());
        assert!(Profile::by_name("nope").is_err());
    }
}
