use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{all_service_delays, utilizations, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::nf::NfType;
use crate::placement::{Placement, SolveResult};
use crate::scenario::{Scenario, ServiceClass};
use crate::topology::Tier;

/// DU/CU counts and mean server utilization of one tier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TierOccupancy<T> {
    pub tier: Tier,
    pub du: T,
    pub cu: T,
    pub utilization: T,
}

/// Mean delay of one service class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassDelay<T> {
    pub class: ServiceClass,
    pub delay_s: T,
}

/// Metrics of one solved scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationMetrics {
    pub slice_count: usize,
    pub avg_server_utilization: f64,
    pub avg_link_utilization: f64,
    /// Mean demand delay per class over demands meeting their budget;
    /// absent when the class has no such demand.
    pub delay_by_class: BTreeMap<ServiceClass, f64>,
    pub tier_occupancy: Vec<TierOccupancy<f64>>,
    /// Fraction of placed URLLC slices with RU, DU and CU all at tier 0.
    pub urllc_fully_at_cs: Option<f64>,
    /// Slices with a demand over budget plus unplaced slices.
    pub sla_violations: usize,
    pub objective: f64,
    pub runtime: f64,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Metrics of one placement. A result without placement counts every slice
/// as an SLA violation.
pub fn replication_metrics(scenario: &Scenario, result: &SolveResult) -> Result<ReplicationMetrics> {
    let n = scenario.slices.len();
    let empty = Placement::unplaced(n);
    let placement = result.placement.as_ref().unwrap_or(&empty);
    let util = utilizations(placement, scenario)?;
    let delays = all_service_delays(placement, scenario)?;
    let g = &scenario.graph;

    let mut per_class: BTreeMap<ServiceClass, Vec<f64>> = BTreeMap::new();
    let mut sla_violations = 0;
    for (slice, delays) in scenario.slices.iter().zip(&delays) {
        let Some(delays) = delays else {
            sla_violations += 1;
            continue;
        };
        let budget = slice.max_delay() + FEASIBILITY_TOL;
        if delays.iter().any(|&d| d > budget) {
            sla_violations += 1;
        }
        per_class
            .entry(slice.service_class())
            .or_default()
            .extend(delays.iter().filter(|&&d| d <= budget));
    }
    let delay_by_class = per_class
        .into_iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(c, v)| (c, mean(&v)))
        .collect();

    let tier_occupancy = Tier::ALL
        .iter()
        .map(|&tier| {
            let count = |nf: NfType| {
                placement
                    .placed()
                    .filter(|(_, sp)| g.server_tier(sp.servers[nf]) == tier)
                    .count() as f64
            };
            let utils: Vec<f64> = g
                .sites_in_tier(tier)
                .flat_map(|s| g.site(s).servers.iter().map(|&x| util.server[x]))
                .collect();
            TierOccupancy {
                tier,
                du: count(NfType::Du),
                cu: count(NfType::Cu),
                utilization: mean(&utils),
            }
        })
        .collect();

    let urllc: Vec<bool> = placement
        .placed()
        .filter(|(s, _)| scenario.slices[*s].service_class() == ServiceClass::Urllc)
        .map(|(_, sp)| {
            NfType::CHAIN
                .iter()
                .all(|&nf| g.server_tier(sp.servers[nf]) == Tier::CellSite)
        })
        .collect();
    let urllc_fully_at_cs = (!urllc.is_empty())
        .then(|| urllc.iter().filter(|&&b| b).count() as f64 / urllc.len() as f64);

    Ok(ReplicationMetrics {
        slice_count: n,
        avg_server_utilization: mean(&util.server),
        avg_link_utilization: mean(&util.link),
        delay_by_class,
        tier_occupancy,
        urllc_fully_at_cs,
        sla_violations,
        objective: result.objective,
        runtime: result.runtime,
    })
}

/// Sample mean with a Student-t confidence half-width (absent below two
/// samples).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub ci_halfwidth: Option<f64>,
    pub n: usize,
}

impl Stat {
    pub fn from_samples(samples: &[f64], level: f64) -> Stat {
        let n = samples.len();
        let m = mean(samples);
        let ci_halfwidth = (n >= 2).then(|| {
            if samples.iter().all(|&x| x == samples[0]) {
                return 0.0;
            }
            let var = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
                .expect("degrees of freedom are positive")
                .inverse_cdf(1.0 - (1.0 - level) / 2.0);
            t * var.sqrt() / (n as f64).sqrt()
        });
        Stat {
            mean: m,
            ci_halfwidth,
            n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub replications: usize,
    pub avg_server_utilization: Stat,
    pub avg_link_utilization: Stat,
    pub delay_by_class: Vec<ClassDelay<Stat>>,
    pub tier_occupancy: Vec<TierOccupancy<Stat>>,
    pub urllc_fully_at_cs: Option<Stat>,
    pub sla_violations: Stat,
    pub objective: Stat,
    pub runtime: Stat,
}

impl MetricsReport {
    pub fn delay(&self, class: ServiceClass) -> Option<&Stat> {
        self.delay_by_class
            .iter()
            .find(|c| c.class == class)
            .map(|c| &c.delay_s)
    }

    /// Aggregates per-replication metrics at confidence `level`.
    pub fn from_replications(reps: &[ReplicationMetrics], level: f64) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::Empty("replications"));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Range {
                field: "level".into(),
                value: level,
                expected: "(0, 1)",
            });
        }
        let stat = |f: &dyn Fn(&ReplicationMetrics) -> f64| {
            Stat::from_samples(&reps.iter().map(f).collect::<Vec<_>>(), level)
        };
        let delay_by_class = ServiceClass::ALL
            .iter()
            .filter_map(|class| {
                let v: Vec<f64> = reps
                    .iter()
                    .filter_map(|r| r.delay_by_class.get(class).copied())
                    .collect();
                (!v.is_empty()).then(|| ClassDelay {
                    class: *class,
                    delay_s: Stat::from_samples(&v, level),
                })
            })
            .collect();
        let tier_occupancy = Tier::ALL
            .iter()
            .enumerate()
            .map(|(i, &tier)| TierOccupancy {
                tier,
                du: stat(&|r| r.tier_occupancy[i].du),
                cu: stat(&|r| r.tier_occupancy[i].cu),
                utilization: stat(&|r| r.tier_occupancy[i].utilization),
            })
            .collect();
        let urllc: Vec<f64> = reps.iter().filter_map(|r| r.urllc_fully_at_cs).collect();
        Ok(MetricsReport {
            replications: reps.len(),
            avg_server_utilization: stat(&|r| r.avg_server_utilization),
            avg_link_utilization: stat(&|r| r.avg_link_utilization),
            delay_by_class,
            tier_occupancy,
            urllc_fully_at_cs: (!urllc.is_empty()).then(|| Stat::from_samples(&urllc, level)),
            sla_violations: stat(&|r| r.sla_violations as f64),
            objective: stat(&|r| r.objective),
            runtime: stat(&|r| r.runtime),
        })
    }
}

/// Means and Student-t intervals across replications.
pub fn aggregate_metrics(results: &[(Scenario, SolveResult)], level: f64) -> Result<MetricsReport> {
    let reps = results
        .iter()
        .map(|(sc, r)| replication_metrics(sc, r))
        .collect::<Result<Vec<_>>>()?;
    MetricsReport::from_replications(&reps, level)
}
