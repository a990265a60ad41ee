//! Solver-agnostic linear model of the placement problem.
//!
//! `build_model` emits every variable and constraint family explicitly,
//! including the linearizations of the delay and link-load terms. The model
//! can be evaluated on an assignment (`ModelIR::violations`), produced from a
//! placement (`encode_placement`) and decoded back (`decode`).

mod expr;

pub use expr::{LinearExpr, Sense};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::nf::{NfType, PerNf};
use crate::placement::{Placement, SlicePlacement};
use crate::scenario::{LinkLoadScope, QueueWeighting, Scenario};
use crate::validator::{carried_links, utilizations};

/// Distance from 0 or 1 a binary value may have and still decode.
pub const BINARY_TOL: f64 = 1e-6;

pub type VarId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// Semantic meaning of a variable. Indices refer to `Scenario::slices`,
/// the slice's demands and admissible paths, and the graph's servers and links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarTag {
    /// `z[p,s]`: slice `s` uses path `p`.
    PathSlice { s: usize, p: usize },
    /// `z[p,λ,s]`: demand `d` of slice `s` is routed on path `p`.
    PathDemand { s: usize, d: usize, p: usize },
    /// `f[x]`: server hosts at least one NF.
    ServerUsed { x: usize },
    /// `f[x,v,s]`: NF `v` of slice `s` runs on server `x`.
    NfSlice { s: usize, v: NfType, x: usize },
    /// `f[x,λ,v,s]`: demand `d` is processed by NF `v` on server `x`.
    NfDemand { s: usize, d: usize, v: NfType, x: usize },
    /// `k[x]`
    ServerCost { x: usize },
    /// `k[l]`
    LinkCost { l: usize },
    /// `u[x]`
    ServerUtil { x: usize },
    /// `u[l]`
    LinkUtil { l: usize },
    /// `dpro[x,v,s]`: processing delay NF `v` of slice `s` would see on `x`.
    ProcDelay { s: usize, v: NfType, x: usize },
    /// `dsel[x,v,s,λ]`: `dpro` if demand `d` uses that placement, else 0.
    DelaySel { s: usize, d: usize, v: NfType, x: usize },
    /// `c[l,λ,s]`: demand `d` of slice `s` loads link `l`.
    Carry { s: usize, d: usize, l: usize },
}

impl VarTag {
    /// Short family name, e.g. `f[x,v,s]`.
    pub fn family(&self) -> &'static str {
        match self {
            VarTag::PathSlice { .. } => "z[p,s]",
            VarTag::PathDemand { .. } => "z[p,λ,s]",
            VarTag::ServerUsed { .. } => "f[x]",
            VarTag::NfSlice { .. } => "f[x,v,s]",
            VarTag::NfDemand { .. } => "f[x,λ,v,s]",
            VarTag::ServerCost { .. } => "k[x]",
            VarTag::LinkCost { .. } => "k[l]",
            VarTag::ServerUtil { .. } => "u[x]",
            VarTag::LinkUtil { .. } => "u[l]",
            VarTag::ProcDelay { .. } => "dpro[x,v,s]",
            VarTag::DelaySel { .. } => "dsel[x,v,s,λ]",
            VarTag::Carry { .. } => "c[l,λ,s]",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Var {
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
    pub tag: VarTag,
    /// Letter of the variable family: `z`, `f`, `k`, `u`, `dpro`, `dsel` or `c`.
    pub symbol: &'static str,
    /// `(key, entity id)` pairs, e.g. `[("x", "EC01a"), ("v", "DU"), ("s", "s3")]`.
    pub ids: Vec<(&'static str, String)>,
    /// Readable name built from the above, e.g. `f[x=EC01a,v=DU,s=s3]`.
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub expr: LinearExpr,
    pub sense: Sense,
    pub rhs: f64,
    /// Family name followed by the entity indices, e.g. `chain_order[s=s1,d=d0,p=A>B,v=CU]`.
    pub label: String,
}

impl Constraint {
    pub fn family(&self) -> &str {
        self.label.split('[').next().unwrap_or(&self.label)
    }
}

#[derive(Clone, Debug)]
pub struct ModelIR {
    pub vars: Vec<Var>,
    pub constraints: Vec<Constraint>,
    /// Minimized.
    pub objective: LinearExpr,
    index: HashMap<VarTag, VarId>,
    shape: Shape,
}

/// Sizes needed to decode without the scenario.
#[derive(Clone, Debug, PartialEq)]
struct Shape {
    /// `(demands, paths)` per slice.
    slices: Vec<(usize, usize)>,
    servers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelStats {
    pub binaries: usize,
    pub continuous: usize,
    /// Variable counts per tag family.
    pub vars_by_family: BTreeMap<String, usize>,
    /// Constraint counts per label family.
    pub constraints_by_family: BTreeMap<String, usize>,
}

impl ModelStats {
    pub fn constraints(&self) -> usize {
        self.constraints_by_family.values().sum()
    }

    pub fn vars(&self, family: &str) -> usize {
        self.vars_by_family.get(family).copied().unwrap_or(0)
    }

    pub fn rows(&self, family: &str) -> usize {
        self.constraints_by_family.get(family).copied().unwrap_or(0)
    }
}

/// A constraint not satisfied by an assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct RowViolation {
    pub row: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl ModelIR {
    pub fn var(&self, tag: &VarTag) -> Option<VarId> {
        self.index.get(tag).copied()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len()).filter(|&i| self.vars[i].kind == VarKind::Binary)
    }

    /// Rows violated by `values`. A row holds when it
    /// is within `tol` scaled by the magnitude of its terms; this keeps
    /// capacity rows with large coefficients from failing on rounding.
    pub fn violations(&self, values: &[f64], tol: f64) -> Result<Vec<RowViolation>> {
        self.check_len(values)?;
        let mut out = Vec::new();
        for (row, c) in self.constraints.iter().enumerate() {
            let lhs = c.expr.eval(values);
            let scale = c.expr.magnitude(values).max(c.rhs.abs()).max(1.0);
            let slack = tol * scale;
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs + slack,
                Sense::Ge => lhs >= c.rhs - slack,
                Sense::Eq => (lhs - c.rhs).abs() <= slack,
            };
            if !ok {
                out.push(RowViolation { row, lhs, rhs: c.rhs });
            }
        }
        Ok(out)
    }

    /// Whether `values` respects all bounds, integrality and rows.
    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> Result<bool> {
        self.check_len(values)?;
        let bounds_ok = self.vars.iter().zip(values).all(|(v, &x)| {
            x >= v.lo - tol
                && x <= v.hi + tol
                && (v.kind == VarKind::Continuous || x.abs() <= tol || (x - 1.0).abs() <= tol)
        });
        Ok(bounds_ok && self.violations(values, tol)?.is_empty())
    }

    pub fn objective_value(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        Ok(self.objective.eval(values))
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.vars.len() {
            return Err(Error::Inconsistent(format!(
                "assignment has {} values, model has {} variables",
                values.len(),
                self.vars.len()
            )));
        }
        Ok(())
    }
}

struct Builder<'a> {
    sc: &'a Scenario,
    vars: Vec<Var>,
    index: HashMap<VarTag, VarId>,
    constraints: Vec<Constraint>,
}

impl<'a> Builder<'a> {
    fn add_var(&mut self, tag: VarTag, kind: VarKind, lo: f64, hi: f64) -> VarId {
        let id = self.vars.len();
        let (symbol, ids) = self.ids(&tag);
        let name = format!(
            "{symbol}[{}]",
            ids.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
        );
        self.vars.push(Var { kind, lo, hi, tag, symbol, ids, name });
        self.index.insert(tag, id);
        id
    }

    fn binary(&mut self, tag: VarTag) -> VarId {
        self.add_var(tag, VarKind::Binary, 0.0, 1.0)
    }

    fn continuous(&mut self, tag: VarTag, hi: f64) -> VarId {
        self.add_var(tag, VarKind::Continuous, 0.0, hi)
    }

    fn v(&self, tag: VarTag) -> VarId {
        self.index[&tag]
    }

    fn row(&mut self, label: String, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint {
            expr: LinearExpr::new(terms, 0.0),
            sense,
            rhs,
            label,
        });
    }

    /// Symbol and `(key, entity id)` pairs naming `tag`.
    fn ids(&self, tag: &VarTag) -> (&'static str, Vec<(&'static str, String)>) {
        let g = &self.sc.graph;
        let sid = |s: usize| ("s", self.sc.slices[s].id.clone());
        let did = |s: usize, d: usize| ("d", self.sc.slices[s].demands[d].id.clone());
        let pid = |s: usize, p: usize| ("p", self.sc.slices[s].paths[p].id.clone());
        let xid = |x: usize| ("x", g.server(x).id.clone());
        let lid = |l: usize| ("l", g.link(l).id.clone());
        let vid = |v: NfType| ("v", v.name().to_string());
        match *tag {
            VarTag::PathSlice { s, p } => ("z", vec![pid(s, p), sid(s)]),
            VarTag::PathDemand { s, d, p } => ("z", vec![pid(s, p), did(s, d), sid(s)]),
            VarTag::ServerUsed { x } => ("f", vec![xid(x)]),
            VarTag::NfSlice { s, v, x } => ("f", vec![xid(x), vid(v), sid(s)]),
            VarTag::NfDemand { s, d, v, x } => ("f", vec![xid(x), did(s, d), vid(v), sid(s)]),
            VarTag::ServerCost { x } => ("k", vec![xid(x)]),
            VarTag::LinkCost { l } => ("k", vec![lid(l)]),
            VarTag::ServerUtil { x } => ("u", vec![xid(x)]),
            VarTag::LinkUtil { l } => ("u", vec![lid(l)]),
            VarTag::ProcDelay { s, v, x } => ("dpro", vec![xid(x), vid(v), sid(s)]),
            VarTag::DelaySel { s, d, v, x } => ("dsel", vec![xid(x), vid(v), sid(s), did(s, d)]),
            VarTag::Carry { s, d, l } => ("c", vec![lid(l), did(s, d), sid(s)]),
        }
    }
}

/// Upper bound on `dpro[x,v,s]` for any utilization up to 1.
fn proc_delay_bound(sc: &Scenario, s: usize, v: NfType, x: usize) -> f64 {
    let prof = &sc.nf_profiles[v];
    prof.d_proq * prof.load_ratio * sc.queue_units(s) / sc.graph.server(x).proq_capacity[v]
        + prof.d_pro_min
        + prof.d_prox
}

/// Builds the full linear model of `scenario`.
pub fn build_model(scenario: &Scenario) -> Result<ModelIR> {
    let sc = scenario;
    let g = &*sc.graph;
    for slice in &sc.slices {
        if slice.paths.is_empty() {
            return Err(Error::NoAdmissiblePath(slice.id.clone()));
        }
    }
    let n_x = g.servers().len();
    let n_l = g.links().len();
    let mut b = Builder {
        sc,
        vars: Vec::new(),
        index: HashMap::new(),
        constraints: Vec::new(),
    };

    // Variables, family by family.
    for (s, slice) in sc.slices.iter().enumerate() {
        for p in 0..slice.paths.len() {
            b.binary(VarTag::PathSlice { s, p });
        }
        for d in 0..slice.demands.len() {
            for p in 0..slice.paths.len() {
                b.binary(VarTag::PathDemand { s, d, p });
            }
        }
    }
    for x in 0..n_x {
        b.binary(VarTag::ServerUsed { x });
    }
    for (s, slice) in sc.slices.iter().enumerate() {
        for v in NfType::CHAIN {
            for x in 0..n_x {
                b.binary(VarTag::NfSlice { s, v, x });
            }
        }
        for d in 0..slice.demands.len() {
            for v in NfType::CHAIN {
                for x in 0..n_x {
                    b.binary(VarTag::NfDemand { s, d, v, x });
                }
            }
        }
    }
    for x in 0..n_x {
        b.continuous(VarTag::ServerCost { x }, f64::INFINITY);
        b.continuous(VarTag::ServerUtil { x }, f64::INFINITY);
    }
    for l in 0..n_l {
        b.continuous(VarTag::LinkCost { l }, f64::INFINITY);
        b.continuous(VarTag::LinkUtil { l }, f64::INFINITY);
    }
    // Links that some admissible path of the slice traverses.
    let slice_links: Vec<Vec<usize>> = sc
        .slices
        .iter()
        .map(|slice| {
            let mut ls: Vec<usize> = slice.paths.iter().flat_map(|p| p.links.iter().copied()).collect();
            ls.sort_unstable();
            ls.dedup();
            ls
        })
        .collect();
    for (s, slice) in sc.slices.iter().enumerate() {
        for v in NfType::CHAIN {
            for x in 0..n_x {
                b.continuous(VarTag::ProcDelay { s, v, x }, f64::INFINITY);
            }
        }
        for d in 0..slice.demands.len() {
            for v in NfType::CHAIN {
                for x in 0..n_x {
                    b.continuous(VarTag::DelaySel { s, d, v, x }, f64::INFINITY);
                }
            }
            for &l in &slice_links[s] {
                b.continuous(VarTag::Carry { s, d, l }, 1.0);
            }
        }
    }

    // Constraints.
    for (s, slice) in sc.slices.iter().enumerate() {
        let sid = &slice.id;
        let n_p = slice.paths.len();
        for (d, demand) in slice.demands.iter().enumerate() {
            let did = &demand.id;
            let terms = (0..n_p).map(|p| (b.v(VarTag::PathDemand { s, d, p }), 1.0)).collect();
            b.row(format!("path_selection[s={sid},d={did}]"), terms, Sense::Eq, 1.0);
            for (p, path) in slice.paths.iter().enumerate() {
                let terms = vec![
                    (b.v(VarTag::PathDemand { s, d, p }), 1.0),
                    (b.v(VarTag::PathSlice { s, p }), -1.0),
                ];
                b.row(format!("path_activation[s={sid},d={did},p={}]", path.id), terms, Sense::Le, 0.0);
            }
            for v in NfType::CHAIN {
                let terms = (0..n_x).map(|x| (b.v(VarTag::NfDemand { s, d, v, x }), 1.0)).collect();
                b.row(format!("nf_assignment[s={sid},d={did},v={v}]"), terms, Sense::Eq, 1.0);
            }
            for v in NfType::CHAIN {
                for x in 0..n_x {
                    let xid = &g.server(x).id;
                    let f = b.v(VarTag::NfDemand { s, d, v, x });
                    let terms = vec![(f, 1.0), (b.v(VarTag::NfSlice { s, v, x }), -1.0)];
                    b.row(format!("nf_activation[s={sid},d={did},v={v},x={xid}]"), terms, Sense::Le, 0.0);
                    let site = g.server(x).site;
                    let mut terms = vec![(f, 1.0)];
                    for (p, path) in slice.paths.iter().enumerate() {
                        if path.position(site).is_some() {
                            terms.push((b.v(VarTag::PathDemand { s, d, p }), -1.0));
                        }
                    }
                    b.row(format!("nf_on_path[s={sid},d={did},v={v},x={xid}]"), terms, Sense::Le, 0.0);
                }
            }
            for (p, path) in slice.paths.iter().enumerate() {
                let big_m = (path.sites.len() - 1) as f64;
                if big_m == 0.0 {
                    continue;
                }
                for (prev, v) in [(NfType::Ru, NfType::Du), (NfType::Du, NfType::Cu)] {
                    let mut terms = vec![(b.v(VarTag::PathDemand { s, d, p }), big_m)];
                    for &x in &path.servers {
                        let pos = path.position(g.server(x).site).unwrap() as f64;
                        terms.push((b.v(VarTag::NfDemand { s, d, v: prev, x }), pos));
                        terms.push((b.v(VarTag::NfDemand { s, d, v, x }), -pos));
                    }
                    b.row(
                        format!("chain_order[s={sid},d={did},p={},v={v}]", path.id),
                        terms,
                        Sense::Le,
                        big_m,
                    );
                }
            }
            let terms = g
                .site(slice.source)
                .servers
                .iter()
                .map(|&x| (b.v(VarTag::NfDemand { s, d, v: NfType::Ru, x }), 1.0))
                .collect();
            b.row(format!("ru_at_source[s={sid},d={did}]"), terms, Sense::Ge, 1.0);
        }
        for v in NfType::CHAIN {
            let terms = (0..n_x).map(|x| (b.v(VarTag::NfSlice { s, v, x }), 1.0)).collect();
            b.row(format!("single_instance[s={sid},v={v}]"), terms, Sense::Le, 1.0);
        }
    }
    for x in 0..n_x {
        let xid = &g.server(x).id;
        for (s, slice) in sc.slices.iter().enumerate() {
            for v in NfType::CHAIN {
                let terms = vec![
                    (b.v(VarTag::NfSlice { s, v, x }), 1.0),
                    (b.v(VarTag::ServerUsed { x }), -1.0),
                ];
                b.row(format!("server_usage[x={xid},v={v},s={}]", slice.id), terms, Sense::Le, 0.0);
            }
        }
    }

    // Processing delays: dpro = queueing share + minimum + utilization term.
    for (s, slice) in sc.slices.iter().enumerate() {
        for v in NfType::CHAIN {
            let prof = &sc.nf_profiles[v];
            for x in 0..n_x {
                let ent = format!("x={},v={v},s={}", g.server(x).id, slice.id);
                let q = prof.d_proq * prof.load_ratio / g.server(x).proq_capacity[v];
                let dpro = b.v(VarTag::ProcDelay { s, v, x });
                let mut terms = vec![(dpro, 1.0), (b.v(VarTag::ServerUtil { x }), -prof.d_prox)];
                for (d, demand) in slice.demands.iter().enumerate() {
                    let units = match sc.options.queue_weighting {
                        QueueWeighting::Count => 1.0,
                        QueueWeighting::Rate => demand.rate_mbps,
                    };
                    terms.push((b.v(VarTag::NfDemand { s, d, v, x }), -q * units));
                }
                b.row(format!("processing_delay[{ent}]"), terms, Sense::Eq, prof.d_pro_min);

                let slack_m = (proc_delay_bound(sc, s, v, x) - prof.d_pro_max).max(0.0);
                let terms = vec![(dpro, 1.0), (b.v(VarTag::NfSlice { s, v, x }), slack_m)];
                b.row(format!("processing_delay_max[{ent}]"), terms, Sense::Le, prof.d_pro_max + slack_m);
            }
        }
    }

    // Utilizations.
    for x in 0..n_x {
        let server = g.server(x);
        let mut terms = vec![(b.v(VarTag::ServerUtil { x }), server.capacity)];
        for (s, slice) in sc.slices.iter().enumerate() {
            let rate = slice.total_rate();
            for v in NfType::CHAIN {
                terms.push((b.v(VarTag::NfSlice { s, v, x }), -sc.nf_profiles[v].load_ratio * rate));
            }
        }
        b.row(format!("server_util[x={}]", server.id), terms, Sense::Eq, 0.0);
    }
    let mut link_terms: Vec<Vec<(VarId, f64)>> = (0..n_l)
        .map(|l| vec![(b.v(VarTag::LinkUtil { l }), g.link(l).capacity_mbps)])
        .collect();
    for (s, slice) in sc.slices.iter().enumerate() {
        for (d, demand) in slice.demands.iter().enumerate() {
            for &l in &slice_links[s] {
                let c = b.v(VarTag::Carry { s, d, l });
                link_terms[l].push((c, -demand.rate_mbps));
                // c >= z[p] AND (CU after the link on p), for every path using l.
                for (p, path) in slice.paths.iter().enumerate() {
                    let Some(i) = path.links.iter().position(|&pl| pl == l) else {
                        continue;
                    };
                    let mut terms = vec![(c, 1.0), (b.v(VarTag::PathDemand { s, d, p }), -1.0)];
                    let rhs = match sc.options.link_load_scope {
                        LinkLoadScope::FullPath => 0.0,
                        LinkLoadScope::ToCu => {
                            for &site in &path.sites[i + 1..] {
                                for &x in &g.site(site).servers {
                                    terms.push((b.v(VarTag::NfDemand { s, d, v: NfType::Cu, x }), -1.0));
                                }
                            }
                            -1.0
                        }
                    };
                    b.row(
                        format!("link_carry[s={},d={},l={},p={}]", slice.id, demand.id, g.link(l).id, path.id),
                        terms,
                        Sense::Ge,
                        rhs,
                    );
                }
            }
        }
    }
    for (l, terms) in link_terms.into_iter().enumerate() {
        b.row(format!("link_util[l={}]", g.link(l).id), terms, Sense::Eq, 0.0);
    }

    // Delay of each demand on its selected path.
    for (s, slice) in sc.slices.iter().enumerate() {
        for (d, demand) in slice.demands.iter().enumerate() {
            for v in NfType::CHAIN {
                for x in 0..n_x {
                    let big_m = proc_delay_bound(sc, s, v, x);
                    let terms = vec![
                        (b.v(VarTag::DelaySel { s, d, v, x }), 1.0),
                        (b.v(VarTag::ProcDelay { s, v, x }), -1.0),
                        (b.v(VarTag::NfDemand { s, d, v, x }), -big_m),
                    ];
                    b.row(
                        format!("delay_select[x={},v={v},s={},d={}]", g.server(x).id, slice.id, demand.id),
                        terms,
                        Sense::Ge,
                        -big_m,
                    );
                }
            }
            for (p, path) in slice.paths.iter().enumerate() {
                let big_m = path.delay();
                let mut terms = vec![(b.v(VarTag::PathDemand { s, d, p }), big_m)];
                for &x in &path.servers {
                    let pos = path.position(g.server(x).site).unwrap();
                    let delay = path.cumulative_delay[pos];
                    if delay > 0.0 {
                        terms.push((b.v(VarTag::NfDemand { s, d, v: NfType::Cu, x }), delay));
                    }
                }
                for v in NfType::CHAIN {
                    for x in 0..n_x {
                        terms.push((b.v(VarTag::DelaySel { s, d, v, x }), 1.0));
                    }
                }
                b.row(
                    format!("service_delay[s={},d={},p={}]", slice.id, demand.id, path.id),
                    terms,
                    Sense::Le,
                    slice.max_delay() + big_m,
                );
            }
        }
    }

    // Capacity caps and cost epigraphs.
    let segments = sc.piecewise.segments().to_vec();
    for x in 0..n_x {
        let xid = g.server(x).id.clone();
        let u = b.v(VarTag::ServerUtil { x });
        b.row(format!("server_capacity[x={xid}]"), vec![(u, 1.0)], Sense::Le, 1.0);
        let k = b.v(VarTag::ServerCost { x });
        for (i, seg) in segments.iter().enumerate() {
            b.row(format!("cost_server[x={xid},i={i}]"), vec![(k, 1.0), (u, -seg.slope)], Sense::Ge, -seg.intercept);
        }
    }
    for l in 0..n_l {
        let lid = g.link(l).id.clone();
        let u = b.v(VarTag::LinkUtil { l });
        b.row(format!("link_capacity[l={lid}]"), vec![(u, 1.0)], Sense::Le, 1.0);
        let k = b.v(VarTag::LinkCost { l });
        for (i, seg) in segments.iter().enumerate() {
            b.row(format!("cost_link[l={lid},i={i}]"), vec![(k, 1.0), (u, -seg.slope)], Sense::Ge, -seg.intercept);
        }
    }

    let mut objective = Vec::with_capacity(n_x + n_l);
    for x in 0..n_x {
        objective.push((b.v(VarTag::ServerCost { x }), sc.alpha / n_x as f64));
    }
    for l in 0..n_l {
        objective.push((b.v(VarTag::LinkCost { l }), (1.0 - sc.alpha) / n_l as f64));
    }

    Ok(ModelIR {
        objective: LinearExpr::new(objective, 0.0),
        vars: b.vars,
        constraints: b.constraints,
        index: b.index,
        shape: Shape {
            slices: sc.slices.iter().map(|s| (s.demands.len(), s.paths.len())).collect(),
            servers: n_x,
        },
    })
}

/// Variable and row counts of a model.
pub fn model_stats(m: &ModelIR) -> ModelStats {
    let mut vars_by_family = BTreeMap::new();
    let mut binaries = 0;
    for v in &m.vars {
        *vars_by_family.entry(v.tag.family().to_string()).or_insert(0) += 1;
        if v.kind == VarKind::Binary {
            binaries += 1;
        }
    }
    let mut constraints_by_family = BTreeMap::new();
    for c in &m.constraints {
        *constraints_by_family.entry(c.family().to_string()).or_insert(0) += 1;
    }
    ModelStats {
        binaries,
        continuous: m.vars.len() - binaries,
        vars_by_family,
        constraints_by_family,
    }
}

fn rounded(m: &ModelIR, values: &[f64], id: VarId) -> Result<bool> {
    let value = values[id];
    if value.abs() <= BINARY_TOL {
        Ok(false)
    } else if (value - 1.0).abs() <= BINARY_TOL {
        Ok(true)
    } else {
        Err(Error::FractionalBinary {
            name: m.vars[id].name.clone(),
            value,
        })
    }
}

/// Reads the placement out of an integral assignment aligned with `m.vars`.
pub fn decode(m: &ModelIR, values: &[f64]) -> Result<Placement> {
    m.check_len(values)?;
    for id in m.binaries() {
        rounded(m, values, id)?;
    }
    let mut placement = Placement::unplaced(m.shape.slices.len());
    for (s, &(n_d, n_p)) in m.shape.slices.iter().enumerate() {
        let mut demand_paths = Vec::with_capacity(n_d);
        for d in 0..n_d {
            let chosen: Vec<usize> = (0..n_p)
                .filter(|&p| values[m.index[&VarTag::PathDemand { s, d, p }]] > 0.5)
                .collect();
            match chosen[..] {
                [p] => demand_paths.push(p),
                _ => {
                    return Err(Error::Inconsistent(format!(
                        "slice #{s} demand #{d} selects {} paths",
                        chosen.len()
                    )))
                }
            }
        }
        let mut servers = PerNf::splat(0);
        for v in NfType::CHAIN {
            let chosen: Vec<usize> = (0..m.shape.servers)
                .filter(|&x| values[m.index[&VarTag::NfSlice { s, v, x }]] > 0.5)
                .collect();
            match chosen[..] {
                [x] => servers[v] = x,
                _ => {
                    return Err(Error::Inconsistent(format!(
                        "{v} of slice #{s} is active on {} servers",
                        chosen.len()
                    )))
                }
            }
        }
        placement.slices[s] = Some(SlicePlacement { demand_paths, servers });
    }
    Ok(placement)
}

/// The assignment that represents `placement` in `m`, with every auxiliary
/// variable at its tightest value. Unplaced slices get all-zero binaries.
pub fn encode_placement(m: &ModelIR, scenario: &Scenario, placement: &Placement) -> Result<Vec<f64>> {
    let sc = scenario;
    let g = &*sc.graph;
    let util = utilizations(placement, sc)?;
    let mut values = vec![0.0; m.vars.len()];
    let mut set = |tag: VarTag, value: f64| -> Result<()> {
        let id = m
            .var(&tag)
            .ok_or_else(|| Error::Inconsistent(format!("model has no variable {tag:?}")))?;
        values[id] = value;
        Ok(())
    };
    for x in 0..g.servers().len() {
        set(VarTag::ServerUtil { x }, util.server[x])?;
        set(VarTag::ServerCost { x }, sc.piecewise.value(util.server[x]))?;
    }
    for l in 0..g.links().len() {
        set(VarTag::LinkUtil { l }, util.link[l])?;
        set(VarTag::LinkCost { l }, sc.piecewise.value(util.link[l]))?;
    }
    for (s, slice) in sc.slices.iter().enumerate() {
        for v in NfType::CHAIN {
            for x in 0..g.servers().len() {
                let prof = &sc.nf_profiles[v];
                let units = match &placement.slices[s] {
                    Some(sp) if sp.servers[v] == x => sc.queue_units(s),
                    _ => 0.0,
                };
                let dpro = prof.d_proq * prof.load_ratio * units / g.server(x).proq_capacity[v]
                    + prof.d_pro_min
                    + prof.d_prox * util.server[x];
                set(VarTag::ProcDelay { s, v, x }, dpro)?;
                if units > 0.0 {
                    set(VarTag::NfSlice { s, v, x }, 1.0)?;
                    set(VarTag::ServerUsed { x }, 1.0)?;
                    for d in 0..slice.demands.len() {
                        set(VarTag::NfDemand { s, d, v, x }, 1.0)?;
                        set(VarTag::DelaySel { s, d, v, x }, dpro)?;
                    }
                }
            }
        }
        let Some(sp) = &placement.slices[s] else {
            continue;
        };
        for (d, &p) in sp.demand_paths.iter().enumerate() {
            set(VarTag::PathSlice { s, p }, 1.0)?;
            set(VarTag::PathDemand { s, d, p }, 1.0)?;
            let path = &slice.paths[p];
            let cu_pos = path.position(g.server(sp.servers.cu).site);
            for &l in carried_links(path, cu_pos, sc.options.link_load_scope) {
                set(VarTag::Carry { s, d, l }, 1.0)?;
            }
        }
    }
    Ok(values)
}

impl fmt::Display for ModelStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "variables: {} ({} binary, {} continuous)",
            self.binaries + self.continuous,
            self.binaries,
            self.continuous
        )?;
        writeln!(f, "constraints: {}", self.constraints())?;
        for (family, n) in &self.constraints_by_family {
            writeln!(f, "  {family}: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
