use std::path::Path as FsPath;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    builtin_nf_profiles, slice_type_by_name, Demand, GeneratorConfig, ModelOptions, NfProfiles,
    Scenario, SliceRequest, SliceType, DEFAULT_ALPHA, DEFAULT_K_PATHS,
};
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseCost;
use crate::topology::{admissible_paths, TopologyDocument};

/// On-disk scenario schema (JSON). The topology is either embedded or
/// referenced by a path relative to the scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology_file: Option<String>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k_paths: usize,
    #[serde(default = "default_one")]
    pub demands_per_slice: usize,
    #[serde(default = "default_scale")]
    pub demand_scale: f64,
    /// Number of randomly drawn slices when `slices` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_slices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slices: Option<Vec<SliceEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nf_profiles: Option<NfProfiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub piecewise: Option<PiecewiseCost>,
    #[serde(default, flatten)]
    pub options: ModelOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "type")]
    pub slice_type: SliceTypeRef,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<Demand>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub campus: Option<String>,
}

/// A catalog name or a full inline slice type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SliceTypeRef {
    Name(String),
    Inline(SliceType),
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}
fn default_k() -> usize {
    DEFAULT_K_PATHS
}
fn default_one() -> usize {
    1
}
fn default_scale() -> f64 {
    1.0
}

impl ScenarioDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::schema(path, e.into_inner().to_string())
        })
    }

    /// Resolves the document into a scenario. `base_dir` anchors a relative
    /// `topology_file`.
    pub fn into_scenario(self, base_dir: Option<&FsPath>) -> Result<Scenario> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Range {
                field: "alpha".into(),
                value: self.alpha,
                expected: "[0, 1]",
            });
        }
        let topology = match (self.topology, self.topology_file) {
            (Some(doc), None) => doc,
            (None, Some(file)) => {
                let path = match base_dir {
                    Some(dir) => dir.join(&file),
                    None => file.into(),
                };
                TopologyDocument::from_json(&std::fs::read_to_string(&path)?)?
            }
            (Some(_), Some(_)) => {
                return Err(Error::schema(
                    "topology_file",
                    "give either `topology` or `topology_file`, not both",
                ))
            }
            (None, None) => {
                return Err(Error::schema("topology", "missing topology or topology_file"))
            }
        };
        let graph = Arc::new(topology.into_graph()?);
        let config = GeneratorConfig {
            n_slices: self.n_slices.unwrap_or(0),
            seed: self.seed,
            k_paths: self.k_paths,
            demands_per_slice: self.demands_per_slice,
            demand_scale: self.demand_scale,
            alpha: self.alpha,
            piecewise: self.piecewise.unwrap_or_default(),
            nf_profiles: self.nf_profiles.unwrap_or_else(builtin_nf_profiles),
            options: self.options,
            ..GeneratorConfig::default()
        };
        let Some(entries) = self.slices else {
            return super::generate_scenario_with(graph, &config);
        };

        let mut slices = Vec::with_capacity(entries.len());
        for (i, entry) in entries.into_iter().enumerate() {
            let slice_type = match entry.slice_type {
                SliceTypeRef::Name(name) => slice_type_by_name(&name).ok_or_else(|| {
                    Error::schema(format!("slices[{i}].type"), format!("unknown slice type `{name}`"))
                })?,
                SliceTypeRef::Inline(t) => t,
            };
            let source = graph
                .site_by_id(&entry.source)
                .ok_or_else(|| Error::DanglingReference {
                    kind: "site",
                    id: entry.source.clone(),
                })?;
            let demands = entry.demands.unwrap_or_else(|| {
                (0..config.demands_per_slice)
                    .map(|j| Demand {
                        id: format!("d{j}"),
                        rate_mbps: slice_type.bandwidth_mbps * config.demand_scale,
                    })
                    .collect()
            });
            slices.push(SliceRequest {
                id: entry.id.unwrap_or_else(|| format!("s{i:03}")),
                slice_type,
                source,
                demands,
                paths: admissible_paths(&graph, source, config.k_paths),
                campus: entry.campus,
            });
        }
        let scenario = Scenario {
            graph,
            slices,
            alpha: config.alpha,
            piecewise: config.piecewise,
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

    /// Fully explicit document: embedded topology and every slice with its demands.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let graph = &scenario.graph;
        let slices = scenario
            .slices
            .iter()
            .map(|s| SliceEntry {
                id: Some(s.id.clone()),
                slice_type: match slice_type_by_name(&s.slice_type.name) {
                    Some(t) if t == s.slice_type => SliceTypeRef::Name(t.name),
                    _ => SliceTypeRef::Inline(s.slice_type.clone()),
                },
                source: graph.site(s.source).id.clone(),
                demands: Some(s.demands.clone()),
                campus: s.campus.clone(),
            })
            .collect();
        ScenarioDocument {
            topology: Some(TopologyDocument::from_graph(graph)),
            topology_file: None,
            alpha: scenario.alpha,
            seed: scenario.seed,
            k_paths: scenario.k_paths,
            demands_per_slice: scenario.demands_per_slice,
            demand_scale: scenario.demand_scale,
            n_slices: None,
            slices: Some(slices),
            nf_profiles: Some(scenario.nf_profiles),
            piecewise: Some(scenario.piecewise.clone()),
            options: scenario.options,
        }
    }
}

pub fn load_scenario(text: &str, base_dir: Option<&FsPath>) -> Result<Scenario> {
    ScenarioDocument::from_json(text)?.into_scenario(base_dir)
}

pub fn save_scenario(scenario: &Scenario) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ScenarioDocument::from_scenario(scenario))?)
}
