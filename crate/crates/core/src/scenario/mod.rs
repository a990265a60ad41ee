//! Slice catalog, NF processing profiles and randomized experiment scenarios.

mod document;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nf::{NfType, PerNf};
use crate::piecewise::PiecewiseCost;
use crate::topology::{admissible_paths, generate_small_topology, NetworkGraph, Path, Tier};

pub use document::{load_scenario, save_scenario, ScenarioDocument, SliceEntry, SliceTypeRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ServiceClass {
    #[serde(rename = "URLLC")]
    Urllc,
    #[serde(rename = "eMBB")]
    Embb,
    #[serde(rename = "mMTC")]
    Mmtc,
}

impl ServiceClass {
    pub const ALL: [ServiceClass; 3] = [ServiceClass::Urllc, ServiceClass::Embb, ServiceClass::Mmtc];

    pub fn name(self) -> &'static str {
        match self {
            ServiceClass::Urllc => "URLLC",
            ServiceClass::Embb => "eMBB",
            ServiceClass::Mmtc => "mMTC",
        }
    }
}

impl fmt::Display for ServiceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceType {
    pub name: String,
    pub service_class: ServiceClass,
    /// Per-demand bandwidth in Mbps.
    pub bandwidth_mbps: f64,
    /// End-to-end delay budget in seconds.
    pub max_delay: f64,
    pub ran_isolation: bool,
}

/// Processing characteristics of one NF type. Delays are in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfProfile {
    pub nf_type: NfType,
    /// Processing units consumed per Mbps.
    pub load_ratio: f64,
    pub d_proq: f64,
    pub d_pro_min: f64,
    pub d_prox: f64,
    pub d_pro_max: f64,
}

pub type NfProfiles = PerNf<NfProfile>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demand {
    pub id: String,
    pub rate_mbps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceRequest {
    pub id: String,
    pub slice_type: SliceType,
    /// Cell site where the slice's traffic originates.
    pub source: usize,
    pub demands: Vec<Demand>,
    pub paths: Vec<Path>,
    /// Campus-network tag; has no effect on placement.
    pub campus: Option<String>,
}

impl SliceRequest {
    pub fn max_delay(&self) -> f64 {
        self.slice_type.max_delay
    }

    pub fn service_class(&self) -> ServiceClass {
        self.slice_type.service_class
    }

    pub fn total_rate(&self) -> f64 {
        self.demands.iter().map(|d| d.rate_mbps).sum()
    }
}

/// How the queueing-delay term counts the demands mapped to an NF.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueWeighting {
    /// Number of demands.
    #[default]
    Count,
    /// Sum of demand rates (Mbps).
    Rate,
}

/// Which links of a routed path carry a demand's traffic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkLoadScope {
    /// Only links before the site hosting the CU.
    #[default]
    ToCu,
    /// Every link of the path.
    FullPath,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOptions {
    #[serde(default)]
    pub queue_weighting: QueueWeighting,
    #[serde(default)]
    pub link_load_scope: LinkLoadScope,
}

pub const DEFAULT_ALPHA: f64 = 0.98;
pub const DEFAULT_K_PATHS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub graph: Arc<NetworkGraph>,
    pub slices: Vec<SliceRequest>,
    pub alpha: f64,
    pub piecewise: PiecewiseCost,
    pub nf_profiles: NfProfiles,
    pub seed: u64,
    pub k_paths: usize,
    pub demands_per_slice: usize,
    /// Multiplier applied to catalog bandwidths when demands are created.
    pub demand_scale: f64,
    pub options: ModelOptions,
}

/// The eight slice types with bandwidths and delay budgets of the reference
/// evaluation.
pub fn builtin_slice_catalog() -> Vec<SliceType> {
    let row = |name: &str, class, mbps: f64, ms: f64, iso| SliceType {
        name: name.to_string(),
        service_class: class,
        bandwidth_mbps: mbps,
        max_delay: ms * 1e-3,
        ran_isolation: iso,
    };
    use ServiceClass::*;
    vec![
        row("URLLC_RO1", Urllc, 4.0, 1.0, true),
        row("URLLC_RO2", Urllc, 25.0, 1.0, true),
        row("URLLC_AW1", Urllc, 100.0, 1.0, true),
        row("URLLC_AW2", Urllc, 1000.0, 1.0, true),
        row("eMBB1", Embb, 10_000.0, 4.0, false),
        row("eMBB2", Embb, 20_000.0, 4.0, false),
        row("mMTC1", Mmtc, 1.0, 15.0, false),
        row("mMTC2", Mmtc, 2.0, 15.0, false),
    ]
}

pub fn slice_type_by_name(name: &str) -> Option<SliceType> {
    builtin_slice_catalog().into_iter().find(|t| t.name == name)
}

/// Load ratios per NF type plus the default delay constants.
pub fn builtin_nf_profiles() -> NfProfiles {
    let ms = 1e-3;
    PerNf::new(
        NfProfile {
            nf_type: NfType::Ru,
            load_ratio: 2.16,
            d_proq: 0.10 * ms,
            d_pro_min: 0.01 * ms,
            d_prox: 0.10 * ms,
            d_pro_max: 0.5 * ms,
        },
        NfProfile {
            nf_type: NfType::Du,
            load_ratio: 1.44,
            d_proq: 0.20 * ms,
            d_pro_min: 0.02 * ms,
            d_prox: 0.20 * ms,
            d_pro_max: 0.5 * ms,
        },
        NfProfile {
            nf_type: NfType::Cu,
            load_ratio: 0.9,
            d_proq: 0.25 * ms,
            d_pro_min: 0.02 * ms,
            d_prox: 0.20 * ms,
            d_pro_max: 0.5 * ms,
        },
    )
}

/// Knobs of [`generate_scenario_with`]; everything except the slice draw.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub n_slices: usize,
    pub seed: u64,
    pub k_paths: usize,
    pub demands_per_slice: usize,
    pub demand_scale: f64,
    pub alpha: f64,
    pub piecewise: PiecewiseCost,
    pub nf_profiles: NfProfiles,
    pub options: ModelOptions,
    pub catalog: Vec<SliceType>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_slices: 5,
            seed: 1,
            k_paths: DEFAULT_K_PATHS,
            demands_per_slice: 1,
            demand_scale: 1.0,
            alpha: DEFAULT_ALPHA,
            piecewise: PiecewiseCost::default(),
            nf_profiles: builtin_nf_profiles(),
            options: ModelOptions::default(),
            catalog: builtin_slice_catalog(),
        }
    }
}

/// Draws `n_slices` slices with uniformly random source cell site and
/// uniformly random type from the built-in catalog.
pub fn generate_scenario(
    graph: Arc<NetworkGraph>,
    n_slices: usize,
    seed: u64,
    k: usize,
    demands_per_slice: usize,
) -> Result<Scenario> {
    generate_scenario_with(
        graph,
        &GeneratorConfig {
            n_slices,
            seed,
            k_paths: k,
            demands_per_slice,
            ..GeneratorConfig::default()
        },
    )
}

pub fn generate_scenario_with(graph: Arc<NetworkGraph>, config: &GeneratorConfig) -> Result<Scenario> {
    let sources: Vec<usize> = graph.sites_in_tier(Tier::CellSite).collect();
    if sources.is_empty() {
        return Err(Error::schema("topology", "no cell site (tier 0) to draw sources from"));
    }
    if graph.sites_in_tier(Tier::CoreCloud).next().is_none() {
        return Err(Error::schema("topology", "no core cloud (tier 3) site"));
    }
    if config.catalog.is_empty() {
        return Err(Error::Empty("slice catalog"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draws: Vec<(usize, usize)> = (0..config.n_slices)
        .map(|_| {
            let source = sources[rng.gen_range(0..sources.len())];
            let ty = rng.gen_range(0..config.catalog.len());
            (source, ty)
        })
        .collect();
    let picks = draws
        .into_iter()
        .map(|(source, ty)| (config.catalog[ty].clone(), source))
        .collect();
    build_scenario(graph, picks, config)
}

/// Demand scale of [`generate_small_scenario`]: keeps broadband slices
/// within reach of small cell-site servers so capacities bind.
pub const SMALL_DEMAND_SCALE: f64 = 0.002;

/// A tiny random instance (1..=`max_slices` slices on a 4–6 site topology)
/// small enough for exhaustive enumeration.
pub fn generate_small_scenario(seed: u64, max_slices: usize) -> Result<Scenario> {
    let graph = Arc::new(generate_small_topology(seed)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let config = GeneratorConfig {
        n_slices: rng.gen_range(1..=max_slices.max(1)),
        seed,
        k_paths: 2,
        demands_per_slice: if rng.gen_bool(0.25) { 2 } else { 1 },
        demand_scale: SMALL_DEMAND_SCALE,
        ..GeneratorConfig::default()
    };
    generate_scenario_with(graph, &config)
}

/// Assembles a scenario from explicit `(type, source)` picks, filling
/// demands and admissible paths.
pub fn build_scenario(
    graph: Arc<NetworkGraph>,
    picks: Vec<(SliceType, usize)>,
    config: &GeneratorConfig,
) -> Result<Scenario> {
    let width = picks.len().saturating_sub(1).to_string().len().max(3);
    let mut path_cache: HashMap<usize, Vec<Path>> = HashMap::new();
    let mut slices = Vec::with_capacity(picks.len());
    for (i, (slice_type, source)) in picks.into_iter().enumerate() {
        let paths = path_cache
            .entry(source)
            .or_insert_with(|| admissible_paths(&graph, source, config.k_paths))
            .clone();
        let demands = (0..config.demands_per_slice)
            .map(|j| Demand {
                id: format!("d{j}"),
                rate_mbps: slice_type.bandwidth_mbps * config.demand_scale,
            })
            .collect();
        slices.push(SliceRequest {
            id: format!("s{i:0width$}"),
            slice_type,
            source,
            demands,
            paths,
            campus: None,
        });
    }
    let scenario = Scenario {
        graph,
        slices,
        alpha: config.alpha,
        piecewise: config.piecewise.clone(),
        nf_profiles: config.nf_profiles,
        seed: config.seed,
        k_paths: config.k_paths,
        demands_per_slice: config.demands_per_slice,
        demand_scale: config.demand_scale,
        options: config.options,
    };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    /// Checks every scenario invariant.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Range {
                field: "alpha".into(),
                value: self.alpha,
                expected: "[0, 1]",
            });
        }
        if !(self.demand_scale > 0.0) || !self.demand_scale.is_finite() {
            return Err(Error::Range {
                field: "demand_scale".into(),
                value: self.demand_scale,
                expected: "> 0",
            });
        }
        for nf in NfType::CHAIN {
            let p = &self.nf_profiles[nf];
            let field = |name: &str| format!("nf_profiles.{nf}.{name}");
            if p.nf_type != nf {
                return Err(Error::schema(field("nf_type"), format!("expected {nf}")));
            }
            if !(p.load_ratio > 0.0) {
                return Err(Error::Range {
                    field: field("load_ratio"),
                    value: p.load_ratio,
                    expected: "> 0",
                });
            }
            for (name, v) in [
                ("d_proq", p.d_proq),
                ("d_pro_min", p.d_pro_min),
                ("d_prox", p.d_prox),
                ("d_pro_max", p.d_pro_max),
            ] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Range {
                        field: field(name),
                        value: v,
                        expected: ">= 0",
                    });
                }
            }
            if p.d_pro_min > p.d_pro_max {
                return Err(Error::Range {
                    field: field("d_pro_min"),
                    value: p.d_pro_min,
                    expected: "<= d_pro_max",
                });
            }
        }
        let mut ids = std::collections::HashSet::new();
        for (i, s) in self.slices.iter().enumerate() {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "slice",
                    id: s.id.clone(),
                });
            }
            if s.source >= self.graph.sites().len()
                || self.graph.site(s.source).tier != Tier::CellSite
            {
                return Err(Error::schema(
                    format!("slices[{i}].source"),
                    "source must be a tier-0 site",
                ));
            }
            if !(s.slice_type.bandwidth_mbps > 0.0) || !(s.slice_type.max_delay > 0.0) {
                return Err(Error::schema(
                    format!("slices[{i}].type"),
                    "bandwidth and max_delay must be positive",
                ));
            }
            if s.demands.is_empty() {
                return Err(Error::schema(format!("slices[{i}].demands"), "no demands"));
            }
            for d in &s.demands {
                if !(d.rate_mbps > 0.0) || !d.rate_mbps.is_finite() {
                    return Err(Error::Range {
                        field: format!("slices[{i}].demands.{}.rate_mbps", d.id),
                        value: d.rate_mbps,
                        expected: "> 0",
                    });
                }
            }
            if let Some(p) = s.paths.iter().find(|p| p.source() != s.source) {
                return Err(Error::schema(
                    format!("slices[{i}].paths"),
                    format!("path {} does not start at the slice source", p.id),
                ));
            }
        }
        Ok(())
    }

    pub fn slice_index(&self, id: &str) -> Option<usize> {
        self.slices.iter().position(|s| s.id == id)
    }

    /// Amount the queueing-delay numerator counts for one slice.
    pub fn queue_units(&self, slice: usize) -> f64 {
        let s = &self.slices[slice];
        match self.options.queue_weighting {
            QueueWeighting::Count => s.demands.len() as f64,
            QueueWeighting::Rate => s.total_rate(),
        }
    }

    /// A copy with one more slice appended (used by monotonicity checks).
    pub fn with_extra_slice(&self, slice_type: SliceType, source: usize) -> Result<Scenario> {
        let mut picks: Vec<(SliceType, usize)> = self
            .slices
            .iter()
            .map(|s| (s.slice_type.clone(), s.source))
            .collect();
        picks.push((slice_type, source));
        build_scenario(self.graph.clone(), picks, &self.generator_config())
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            n_slices: self.slices.len(),
            seed: self.seed,
            k_paths: self.k_paths,
            demands_per_slice: self.demands_per_slice,
            demand_scale: self.demand_scale,
            alpha: self.alpha,
            piecewise: self.piecewise.clone(),
            nf_profiles: self.nf_profiles,
            options: self.options,
            catalog: builtin_slice_catalog(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_default_topology, TopologyParams};

    fn default_graph() -> Arc<NetworkGraph> {
        Arc::new(generate_default_topology(&TopologyParams::default(), 1).unwrap())
    }

    #[test]
    fn catalog_matches_reference_table() {
        let cat = builtin_slice_catalog();
        assert_eq!(cat.len(), 8);
        let bw: Vec<f64> = cat.iter().map(|t| t.bandwidth_mbps).collect();
        assert_eq!(bw, vec![4.0, 25.0, 100.0, 1000.0, 10_000.0, 20_000.0, 1.0, 2.0]);
        let ms: Vec<f64> = cat.iter().map(|t| t.max_delay * 1e3).collect();
        for (got, want) in ms.iter().zip([1.0, 1.0, 1.0, 1.0, 4.0, 4.0, 15.0, 15.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let iso: Vec<bool> = cat.iter().map(|t| t.ran_isolation).collect();
        assert_eq!(iso, vec![true, true, true, true, false, false, false, false]);
    }

    #[test]
    fn catalog_lookups() {
        let ro1 = slice_type_by_name("URLLC_RO1").unwrap();
        assert_eq!((ro1.bandwidth_mbps, ro1.max_delay, ro1.ran_isolation), (4.0, 1e-3, true));
        let embb2 = slice_type_by_name("eMBB2").unwrap();
        assert_eq!((embb2.bandwidth_mbps, embb2.max_delay, embb2.ran_isolation), (20_000.0, 4e-3, false));
        let mmtc1 = slice_type_by_name("mMTC1").unwrap();
        assert_eq!((mmtc1.bandwidth_mbps, mmtc1.max_delay, mmtc1.ran_isolation), (1.0, 15e-3, false));
        assert!(slice_type_by_name("nope").is_none());
    }

    #[test]
    fn load_ratios() {
        let p = builtin_nf_profiles();
        assert_eq!(p[NfType::Ru].load_ratio, 2.16);
        assert_eq!(p[NfType::Du].load_ratio, 1.44);
        assert_eq!(p[NfType::Cu].load_ratio, 0.9);
    }

    #[test]
    fn generation_is_deterministic() {
        let g = default_graph();
        let a = generate_scenario(g.clone(), 5, 7, 3, 1).unwrap();
        let b = generate_scenario(g, 5, 7, 3, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn paths_start_at_slice_source_and_end_at_core() {
        let g = default_graph();
        let sc = generate_scenario(g.clone(), 20, 3, 3, 2).unwrap();
        for s in &sc.slices {
            assert!(!s.paths.is_empty());
            assert_eq!(s.demands.len(), 2);
            for p in &s.paths {
                assert_eq!(p.source(), s.source);
                assert_eq!(g.site(p.target()).tier, Tier::CoreCloud);
            }
        }
    }

    #[test]
    fn type_frequencies_are_uniform() {
        let g = default_graph();
        let sc = generate_scenario(g, 1000, 11, 1, 1).unwrap();
        let mut counts: HashMap<String, usize> = HashMap::new();
        for s in &sc.slices {
            *counts.entry(s.slice_type.name.clone()).or_default() += 1;
        }
        assert_eq!(counts.len(), 8);
        for (name, c) in counts {
            let share = c as f64 / 1000.0;
            assert!((share - 0.125).abs() <= 0.05, "{name}: {share}");
        }
    }

    #[test]
    fn demand_rate_is_type_bandwidth() {
        let g = default_graph();
        let cfg = GeneratorConfig::default();
        let source = g.sites_in_tier(Tier::CellSite).next().unwrap();
        let sc = build_scenario(g, vec![(slice_type_by_name("URLLC_AW2").unwrap(), source)], &cfg).unwrap();
        assert_eq!(sc.slices[0].demands.len(), 1);
        assert_eq!(sc.slices[0].demands[0].rate_mbps, 1000.0);
    }

    #[test]
    fn invalid_alpha_is_rejected() {
        let g = default_graph();
        let cfg = GeneratorConfig {
            alpha: 1.5,
            ..GeneratorConfig::default()
        };
        assert!(matches!(
            generate_scenario_with(g, &cfg),
            Err(Error::Range { ref field, .. }) if field == "alpha"
        ));
    }
}
