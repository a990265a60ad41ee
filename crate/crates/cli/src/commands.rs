use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use ran_slice_core::exact::ExactOptions;
use ran_slice_core::experiment::{
    generate_replication, profile_topology, run_scenario, sweep as run_sweep, ExperimentConfig, PointSummary,
    Profile, RunRecord, SolverKind, SweepResult,
};
use ran_slice_core::model::{build_model, model_stats};
use ran_slice_core::mps::export_mps as write_mps;
use ran_slice_core::placement::{PlacementDocument, SolveStatus};
use ran_slice_core::scenario::{generate_scenario_with, load_scenario, save_scenario, GeneratorConfig, Scenario};
use ran_slice_core::topology::{load_topology, NetworkGraph, TopologyDocument};
use ran_slice_core::validator::{validate as check, MetricsReport};

use crate::args::{CommonArgs, ExportArgs, GenTopologyArgs, ProfileChoice, RunArgs, SolverChoice, SweepArgs, ValidateArgs};
use crate::output::{self, Echo};
use crate::{EXIT_INFEASIBLE, EXIT_NO_INCUMBENT, EXIT_OK};

fn solvers(choice: SolverChoice) -> Vec<SolverKind> {
    match choice {
        SolverChoice::Exact => vec![SolverKind::Exact],
        SolverChoice::Heuristic => vec![SolverKind::Heuristic],
        SolverChoice::Both => vec![SolverKind::Exact, SolverKind::Heuristic],
    }
}

fn profile(choice: ProfileChoice) -> Profile {
    match choice {
        ProfileChoice::Standard => Profile::standard(),
        ProfileChoice::Calibrated => Profile::calibrated(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_scenario(path: &Path) -> Result<Scenario> {
    load_scenario(&read(path)?, path.parent()).with_context(|| format!("loading scenario {}", path.display()))
}

fn graph(common: &CommonArgs) -> Result<(Arc<NetworkGraph>, String)> {
    match &common.topology {
        Some(path) => {
            let g = load_topology(&read(path)?).with_context(|| format!("loading topology {}", path.display()))?;
            Ok((Arc::new(g), path.display().to_string()))
        }
        None => Ok((
            profile_topology(&profile(common.profile), common.topology_seed)?,
            format!("generated:{}", common.topology_seed),
        )),
    }
}

fn check_common(common: &CommonArgs, replications: usize) -> Result<()> {
    if replications < 1 {
        bail!("--replications must be at least 1");
    }
    if !(0.0..=1.0).contains(&common.alpha) {
        bail!("--alpha must lie in [0, 1], got {}", common.alpha);
    }
    if !(common.confidence > 0.0 && common.confidence < 1.0) {
        bail!("--confidence must lie in (0, 1)");
    }
    Ok(())
}

fn experiment_config(common: &CommonArgs, replications: usize) -> ExperimentConfig {
    ExperimentConfig {
        solvers: solvers(common.solver),
        replications,
        seed: common.seed,
        generator: GeneratorConfig {
            alpha: common.alpha,
            demand_scale: common.demand_scale,
            k_paths: common.k_paths,
            demands_per_slice: common.demands_per_slice,
            ..GeneratorConfig::default()
        },
        exact: exact_options(common),
        confidence: common.confidence,
    }
    .with_profile(&profile(common.profile))
}

fn exact_options(common: &CommonArgs) -> ExactOptions {
    ExactOptions {
        time_limit: common.time_limit,
        gap_tolerance: common.gap,
        ..ExactOptions::default()
    }
}

fn echo(common: &CommonArgs, topology: String) -> Echo {
    Echo {
        profile: common.profile.name().to_string(),
        alpha: common.alpha,
        demand_scale: common.demand_scale,
        k_paths: common.k_paths,
        demands_per_slice: common.demands_per_slice,
        time_limit: common.time_limit,
        gap: common.gap,
        topology,
    }
}

/// Exit status from the exact runs (or the heuristic ones when the exact
/// solver was not requested).
fn exit_code(runs: &[RunRecord]) -> u8 {
    let primary = if runs.iter().any(|r| r.solver == SolverKind::Exact) {
        SolverKind::Exact
    } else {
        SolverKind::Heuristic
    };
    let mine = || runs.iter().filter(move |r| r.solver == primary);
    if mine().any(|r| r.result.status == SolveStatus::Infeasible) {
        EXIT_INFEASIBLE
    } else if mine().any(|r| r.result.placement.is_none()) {
        EXIT_NO_INCUMBENT
    } else {
        EXIT_OK
    }
}

fn print_summary(runs: &[RunRecord]) {
    for r in runs {
        println!(
            "slices={} rep={} solver={} status={} objective={:.9} violations={} runtime={:.3}s",
            r.slice_count,
            r.replication,
            r.solver.name(),
            r.result.status.name(),
            r.result.objective,
            r.metrics.sla_violations,
            r.result.runtime
        );
    }
}

fn write_placements(dir: &Path, tag: &str, scenario: &Scenario, runs: &[&RunRecord]) -> Result<()> {
    write(&dir.join(format!("scenario{tag}.json")), save_scenario(scenario)?)?;
    for r in runs {
        let Some(p) = &r.result.placement else { continue };
        let doc = PlacementDocument::from_placement(p, scenario);
        write(
            &dir.join(format!("placement_{}{tag}.json", r.solver.name())),
            serde_json::to_string_pretty(&doc)?,
        )?;
    }
    Ok(())
}

pub fn run(a: &RunArgs) -> Result<u8> {
    let common = &a.common;
    check_common(common, a.replications)?;
    fs::create_dir_all(&common.output_dir)
        .with_context(|| format!("creating {}", common.output_dir.display()))?;
    let dir = common.output_dir.as_path();

    let (result, echo, scenarios) = match &a.scenario {
        Some(path) => {
            if a.replications != 1 {
                bail!("--replications applies to generated scenarios only");
            }
            let sc = read_scenario(path)?;
            let runs: Vec<RunRecord> = run_scenario(&sc, &solvers(common.solver), &exact_options(common))?
                .into_iter()
                .map(|(solver, result, metrics, violations)| RunRecord {
                    slice_count: sc.slices.len(),
                    replication: 0,
                    seed: sc.seed,
                    solver,
                    result,
                    metrics,
                    violations,
                })
                .collect();
            let points = summarize(&runs, &solvers(common.solver), common.confidence)?;
            let mut echo = echo(common, path.display().to_string());
            echo.alpha = sc.alpha;
            echo.demand_scale = sc.demand_scale;
            echo.k_paths = sc.k_paths;
            echo.demands_per_slice = sc.demands_per_slice;
            echo.profile = "file".into();
            (SweepResult { runs, points }, echo, vec![sc])
        }
        None => {
            let (g, topo) = graph(common)?;
            let config = experiment_config(common, a.replications);
            let result = run_sweep(&g, &config, &[a.slices])?;
            let scenarios = (0..a.replications)
                .map(|rep| generate_replication(&g, &config, a.slices, rep))
                .collect::<Result<Vec<_>, _>>()?;
            (result, echo(common, topo), scenarios)
        }
    };

    for (rep, sc) in scenarios.iter().enumerate() {
        let runs: Vec<&RunRecord> = result.runs.iter().filter(|r| r.replication == rep).collect();
        let tag = if scenarios.len() == 1 { String::new() } else { format!("_r{rep}") };
        write_placements(dir, &tag, sc, &runs)?;
        if rep == 0 {
            if let Some(first) = runs.iter().find(|r| r.result.placement.is_some()) {
                let doc = PlacementDocument::from_placement(first.result.placement.as_ref().unwrap(), sc);
                write(&dir.join("placement.json"), serde_json::to_string_pretty(&doc)?)?;
            }
        }
    }
    output::write_all(dir, &result, &echo, common.seed, common.deterministic_output)?;
    print_summary(&result.runs);
    Ok(exit_code(&result.runs))
}

fn summarize(runs: &[RunRecord], solvers: &[SolverKind], level: f64) -> Result<Vec<PointSummary>> {
    let mut points = Vec::new();
    for &solver in solvers {
        let reps: Vec<_> = runs.iter().filter(|r| r.solver == solver).map(|r| r.metrics.clone()).collect();
        if let Some(first) = runs.first() {
            points.push(PointSummary {
                slice_count: first.slice_count,
                solver,
                report: MetricsReport::from_replications(&reps, level)?,
            });
        }
    }
    Ok(points)
}

pub fn sweep(a: &SweepArgs) -> Result<u8> {
    let common = &a.common;
    check_common(common, a.replications)?;
    if a.counts.is_empty() {
        bail!("--counts must list at least one slice count");
    }
    fs::create_dir_all(&common.output_dir)
        .with_context(|| format!("creating {}", common.output_dir.display()))?;
    let (g, topo) = graph(common)?;
    let config = experiment_config(common, a.replications);
    let result = run_sweep(&g, &config, &a.counts)?;
    output::write_all(&common.output_dir, &result, &echo(common, topo), common.seed, common.deterministic_output)?;
    for p in &result.points {
        let r = &p.report;
        println!(
            "slices={} solver={} server_util={:.6} link_util={:.6} sla_violations={:.2} objective={:.9}",
            p.slice_count,
            p.solver.name(),
            r.avg_server_utilization.mean,
            r.avg_link_utilization.mean,
            r.sla_violations.mean,
            r.objective.mean
        );
    }
    Ok(EXIT_OK)
}

pub fn validate(a: &ValidateArgs) -> Result<u8> {
    let sc = read_scenario(&a.scenario)?;
    let doc: PlacementDocument = serde_json::from_str(&read(&a.placement)?)
        .with_context(|| format!("parsing placement {}", a.placement.display()))?;
    let placement = doc.to_placement(&sc).context("resolving placement against scenario")?;
    let report = check(&placement, &sc)?;
    if report.is_feasible() {
        println!("feasible: no violations");
        return Ok(EXIT_OK);
    }
    println!("{} violation(s):", report.violations.len());
    for v in &report.violations {
        println!("  {v}");
    }
    Ok(EXIT_INFEASIBLE)
}

pub fn export_mps(a: &ExportArgs) -> Result<u8> {
    let sc = match &a.scenario {
        Some(path) => read_scenario(path)?,
        None => {
            let p = profile(a.profile);
            let g = profile_topology(&p, a.topology_seed)?;
            let gen = GeneratorConfig {
                n_slices: a.slices,
                seed: a.seed,
                demand_scale: a.demand_scale,
                nf_profiles: p.nf_profiles,
                ..GeneratorConfig::default()
            };
            generate_scenario_with(g, &gen)?
        }
    };
    let model = build_model(&sc)?;
    let text = write_mps(&model, "RANSLICE")?;
    write(&a.out, text)?;
    let stats = model_stats(&model);
    println!("rows: {}", stats.constraints());
    println!("columns: {} ({} binary, {} continuous)", stats.binaries + stats.continuous, stats.binaries, stats.continuous);
    for (family, n) in &stats.constraints_by_family {
        println!("  {family}: {n}");
    }
    Ok(EXIT_OK)
}

pub fn gen_topology(a: &GenTopologyArgs) -> Result<u8> {
    let g = profile_topology(&profile(a.profile), a.seed)?;
    let json = TopologyDocument::from_graph(&g).to_json()?;
    match &a.out {
        Some(path) => write(path, json)?,
        None => println!("{json}"),
    }
    Ok(EXIT_OK)
}
