//! CSV and figure files of a batch of runs.

use std::path::Path;

use anyhow::{Context, Result};
use csv::Writer;

use ran_slice_core::experiment::{PointSummary, SolverKind, SweepResult};
use ran_slice_core::scenario::{builtin_slice_catalog, ServiceClass};
use ran_slice_core::topology::Tier;
use ran_slice_core::validator::Stat;

use crate::plot::{line_chart, Series};

/// Configuration repeated on every row so each row can be reproduced.
#[derive(Clone, Debug)]
pub struct Echo {
    pub profile: String,
    pub alpha: f64,
    pub demand_scale: f64,
    pub k_paths: usize,
    pub demands_per_slice: usize,
    pub time_limit: f64,
    pub gap: f64,
    pub topology: String,
}

const ECHO_HEADER: [&str; 8] = [
    "profile",
    "alpha",
    "demand_scale",
    "k_paths",
    "demands_per_slice",
    "time_limit_s",
    "gap",
    "topology",
];

impl Echo {
    fn fields(&self) -> Vec<String> {
        vec![
            self.profile.clone(),
            num(self.alpha),
            num(self.demand_scale),
            self.k_paths.to_string(),
            self.demands_per_slice.to_string(),
            num(self.time_limit),
            num(self.gap),
            self.topology.clone(),
        ]
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn writer(dir: &Path, name: &str) -> Result<Writer<std::fs::File>> {
    let path = dir.join(name);
    Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))
}

fn header(fields: &[&str]) -> Vec<String> {
    fields.iter().chain(ECHO_HEADER.iter()).map(|s| s.to_string()).collect()
}

const CLASSES: [ServiceClass; 3] = [ServiceClass::Urllc, ServiceClass::Embb, ServiceClass::Mmtc];

/// Delay budget of each service class in the builtin catalog.
pub fn class_budget(class: ServiceClass) -> f64 {
    builtin_slice_catalog()
        .iter()
        .find(|t| t.service_class == class)
        .map_or(f64::NAN, |t| t.max_delay)
}

pub fn write_all(dir: &Path, result: &SweepResult, echo: &Echo, seed: u64, deterministic: bool) -> Result<()> {
    let runtime = |t: f64| if deterministic { 0.0 } else { t };

    let mut w = writer(dir, "results.csv")?;
    w.write_record(header(&[
        "slice_count",
        "solver",
        "replication",
        "seed",
        "status",
        "objective",
        "bound",
        "runtime_s",
        "nodes",
        "placed_slices",
        "violations",
    ]))?;
    for r in &result.runs {
        let placed = r.result.placement.as_ref().map_or(0, |p| p.placed_count());
        let mut row = vec![
            r.slice_count.to_string(),
            r.solver.name().into(),
            r.replication.to_string(),
            r.seed.to_string(),
            r.result.status.name().into(),
            num(r.result.objective),
            num(r.result.bound),
            num(runtime(r.result.runtime)),
            r.result.nodes_explored.to_string(),
            placed.to_string(),
            r.violations.to_string(),
        ];
        row.extend(echo.fields());
        w.write_record(row)?;
    }
    w.flush()?;

    let mut w = writer(dir, "metrics.csv")?;
    w.write_record(header(&[
        "slice_count",
        "solver",
        "replication",
        "avg_server_util",
        "avg_link_util",
        "delay_urllc_s",
        "delay_embb_s",
        "delay_mmtc_s",
        "sla_violations",
        "urllc_fully_at_cs",
        "objective",
        "runtime_s",
        "seed",
    ]))?;
    for r in &result.runs {
        let m = &r.metrics;
        let delay = |c| opt(m.delay_by_class.get(&c).copied());
        let mut row = vec![
            r.slice_count.to_string(),
            r.solver.name().into(),
            r.replication.to_string(),
            num(m.avg_server_utilization),
            num(m.avg_link_utilization),
            delay(ServiceClass::Urllc),
            delay(ServiceClass::Embb),
            delay(ServiceClass::Mmtc),
            m.sla_violations.to_string(),
            opt(m.urllc_fully_at_cs),
            num(m.objective),
            num(runtime(m.runtime)),
            r.seed.to_string(),
        ];
        row.extend(echo.fields());
        w.write_record(row)?;
    }
    w.flush()?;

    let mut w = writer(dir, "aggregate.csv")?;
    w.write_record(header(&["slice_count", "solver", "metric", "n", "mean", "ci_halfwidth", "base_seed"]))?;
    for p in &result.points {
        for (metric, stat) in point_stats(p, deterministic) {
            let mut row = vec![
                p.slice_count.to_string(),
                p.solver.name().into(),
                metric,
                stat.n.to_string(),
                num(stat.mean),
                opt(stat.ci_halfwidth),
                seed.to_string(),
            ];
            row.extend(echo.fields());
            w.write_record(row)?;
        }
    }
    w.flush()?;

    write_figures(dir, &result.points)
}

fn point_stats(p: &PointSummary, deterministic: bool) -> Vec<(String, Stat)> {
    let r = &p.report;
    let mut out = vec![
        ("avg_server_util".to_string(), r.avg_server_utilization),
        ("avg_link_util".to_string(), r.avg_link_utilization),
    ];
    for class in CLASSES {
        if let Some(s) = r.delay(class) {
            out.push((format!("delay_{}_s", class.name().to_lowercase()), *s));
        }
    }
    out.push(("sla_violations".into(), r.sla_violations));
    if let Some(s) = &r.urllc_fully_at_cs {
        out.push(("urllc_fully_at_cs".into(), *s));
    }
    out.push(("objective".into(), r.objective));
    let runtime = if deterministic {
        Stat { mean: 0.0, ci_halfwidth: Some(0.0), n: r.runtime.n }
    } else {
        r.runtime
    };
    out.push(("runtime_s".into(), runtime));
    for t in &r.tier_occupancy {
        let tier = t.tier.short_name();
        out.push((format!("du_count_{tier}"), t.du));
        out.push((format!("cu_count_{tier}"), t.cu));
        out.push((format!("utilization_{tier}"), t.utilization));
    }
    out
}

fn solvers_in(points: &[PointSummary]) -> Vec<SolverKind> {
    let mut s: Vec<SolverKind> = points.iter().map(|p| p.solver).collect();
    s.sort();
    s.dedup();
    s
}

fn write_figures(dir: &Path, points: &[PointSummary]) -> Result<()> {
    let solvers = solvers_in(points);
    let counts = {
        let mut c: Vec<usize> = points.iter().map(|p| p.slice_count).collect();
        c.sort_unstable();
        c.dedup();
        c
    };

    // Utilization per solver.
    type Pick = fn(&PointSummary) -> &Stat;
    let util: [(&str, &str, Pick); 2] = [
        ("fig4_server_utilization", "Average server utilization", |p| &p.report.avg_server_utilization),
        ("fig5_link_utilization", "Average link utilization", |p| &p.report.avg_link_utilization),
    ];
    for (file, title, pick) in util {
        let mut w = writer(dir, &format!("{file}.csv"))?;
        w.write_record(["slice_count", "solver", "mean", "ci_halfwidth"])?;
        let mut series = Vec::new();
        for &solver in &solvers {
            let mut pts = Vec::new();
            for p in points.iter().filter(|p| p.solver == solver) {
                let s = pick(p);
                w.write_record([p.slice_count.to_string(), solver.name().into(), num(s.mean), opt(s.ci_halfwidth)])?;
                pts.push((p.slice_count as f64, s.mean));
            }
            series.push(Series { name: solver.name().into(), points: pts, dashed: false });
        }
        w.flush()?;
        write_svg(dir, file, title, "utilization", &series)?;
    }

    // Delay per class, with budgets as reference series.
    for (file, solver) in [("fig6_delay_exact", SolverKind::Exact), ("fig7_delay_heuristic", SolverKind::Heuristic)] {
        if !solvers.contains(&solver) {
            continue;
        }
        let mut w = writer(dir, &format!("{file}.csv"))?;
        w.write_record(["slice_count", "series", "mean_s", "ci_halfwidth_s"])?;
        let mut series = Vec::new();
        for class in CLASSES {
            let mut pts = Vec::new();
            for p in points.iter().filter(|p| p.solver == solver) {
                if let Some(s) = p.report.delay(class) {
                    w.write_record([p.slice_count.to_string(), class.name().into(), num(s.mean), opt(s.ci_halfwidth)])?;
                    pts.push((p.slice_count as f64, s.mean * 1e3));
                }
            }
            series.push(Series { name: class.name().into(), points: pts, dashed: false });
        }
        for class in CLASSES {
            let budget = class_budget(class);
            let name = format!("budget_{}", class.name());
            for &n in &counts {
                w.write_record([n.to_string(), name.clone(), num(budget), String::new()])?;
            }
            let pts = counts.iter().map(|&n| (n as f64, budget * 1e3)).collect();
            series.push(Series { name, points: pts, dashed: true });
        }
        w.flush()?;
        let title = format!("Mean service delay by class ({})", solver.name());
        write_svg(dir, file, &title, "delay (ms)", &series)?;
    }

    // DU/CU counts and utilization per tier.
    let mut w = writer(dir, "fig8_tier_occupancy.csv")?;
    w.write_record([
        "slice_count",
        "solver",
        "tier",
        "du_mean",
        "du_ci_halfwidth",
        "cu_mean",
        "cu_ci_halfwidth",
        "utilization_mean",
        "utilization_ci_halfwidth",
    ])?;
    let mut series = Vec::new();
    for &solver in &solvers {
        for tier in Tier::ALL {
            let mut pts = Vec::new();
            for p in points.iter().filter(|p| p.solver == solver) {
                let Some(t) = p.report.tier_occupancy.iter().find(|t| t.tier == tier) else {
                    continue;
                };
                w.write_record([
                    p.slice_count.to_string(),
                    solver.name().into(),
                    tier.level().to_string(),
                    num(t.du.mean),
                    opt(t.du.ci_halfwidth),
                    num(t.cu.mean),
                    opt(t.cu.ci_halfwidth),
                    num(t.utilization.mean),
                    opt(t.utilization.ci_halfwidth),
                ])?;
                pts.push((p.slice_count as f64, t.du.mean + t.cu.mean));
            }
            series.push(Series {
                name: format!("{} {}", solver.name(), tier.short_name()),
                points: pts,
                dashed: solver == SolverKind::Heuristic,
            });
        }
    }
    w.flush()?;
    write_svg(dir, "fig8_tier_occupancy", "DU and CU instances per tier", "instances", &series)
}

fn write_svg(dir: &Path, file: &str, title: &str, y_label: &str, series: &[Series]) -> Result<()> {
    let path = dir.join(format!("{file}.svg"));
    std::fs::write(&path, line_chart(title, "slices", y_label, series))
        .with_context(|| format!("writing {}", path.display()))
}
