use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;

use ran_slice_core::exact::solve_exact;
use ran_slice_core::experiment::{profile_topology, Profile};
use ran_slice_core::heuristic::solve_first_fit;
use ran_slice_core::model::{build_model, LinearExpr, VarKind};
use ran_slice_core::placement::SolveStatus;
use ran_slice_core::scenario::{
    builtin_slice_catalog, generate_scenario_with, generate_small_scenario, GeneratorConfig, Scenario,
};
use ran_slice_core::topology::{generate_default_topology, generate_small_topology, NetworkGraph, Tier, TopologyParams};
use ran_slice_core::validator::{aggregate_metrics, replication_metrics, validate};
use ran_slice_core::NfType;

fn check_graph(g: &NetworkGraph) -> Result<(), TestCaseError> {
    let mut ids = HashSet::new();
    for x in g.servers() {
        prop_assert!(x.capacity > 0.0);
        prop_assert!(NfType::CHAIN.iter().all(|&v| x.proq_capacity[v] > 0.0));
        prop_assert!(g.site(x.site).servers.iter().any(|&y| g.server(y).id == x.id));
        prop_assert!(ids.insert(x.id.clone()));
    }
    for l in g.links() {
        prop_assert!(l.capacity_mbps > 0.0 && l.delay_ms >= 0.0);
        prop_assert_ne!(l.src, l.dst);
        let twins: Vec<_> = g.links().iter().filter(|m| m.physical_id == l.physical_id).collect();
        if twins.len() == 2 {
            let (a, b) = (twins[0], twins[1]);
            prop_assert_eq!((a.src, a.dst), (b.dst, b.src));
            prop_assert_eq!((a.capacity_mbps, a.delay_ms), (b.capacity_mbps, b.delay_ms));
        }
    }
    // Every cell site reaches some core site.
    for cs in g.sites_in_tier(Tier::CellSite) {
        let mut seen = vec![false; g.sites().len()];
        let mut stack = vec![cs];
        seen[cs] = true;
        while let Some(n) = stack.pop() {
            for &l in g.outgoing(n) {
                let d = g.link(l).dst;
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        prop_assert!(g.sites_in_tier(Tier::CoreCloud).any(|c| seen[c]), "cell site {} is cut off", cs);
    }
    Ok(())
}

fn check_paths(sc: &Scenario) -> Result<(), TestCaseError> {
    let g = &sc.graph;
    for slice in &sc.slices {
        prop_assert!(!slice.demands.is_empty());
        prop_assert!(!slice.paths.is_empty());
        for p in &slice.paths {
            prop_assert_eq!(p.sites[0], slice.source);
            prop_assert_eq!(g.site(p.sites[0]).tier, Tier::CellSite);
            prop_assert_eq!(p.links.len() + 1, p.sites.len());
            for (i, &l) in p.links.iter().enumerate() {
                prop_assert_eq!((g.link(l).src, g.link(l).dst), (p.sites[i], p.sites[i + 1]));
            }
            let unique: HashSet<_> = p.sites.iter().collect();
            prop_assert_eq!(unique.len(), p.sites.len());
            prop_assert!(p.cumulative_delay.windows(2).all(|w| w[1] >= w[0]));
        }
    }
    Ok(())
}

fn reference_scenario(topology_seed: u64, seed: u64, n: usize) -> Scenario {
    let g = Arc::new(generate_default_topology(&TopologyParams::default(), topology_seed).unwrap());
    let cfg = GeneratorConfig {
        n_slices: n,
        seed,
        demand_scale: 1e-3,
        ..GeneratorConfig::default()
    };
    generate_scenario_with(g, &cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_topologies_are_well_formed(seed in any::<u64>()) {
        check_graph(&generate_default_topology(&TopologyParams::default(), seed).unwrap())?;
        check_graph(&generate_small_topology(seed).unwrap())?;
    }

    #[test]
    fn admissible_paths_are_simple_and_start_at_the_source(seed in 0u64..10_000, n in 1usize..20) {
        check_paths(&reference_scenario(seed % 4, seed, n))?;
        check_paths(&generate_small_scenario(seed, 3).unwrap())?;
    }

    #[test]
    fn normalized_expressions_have_distinct_variables(
        terms in prop::collection::vec((0usize..12, -5.0f64..5.0), 0..40),
        constant in -3.0f64..3.0,
    ) {
        let e = LinearExpr::new(terms.clone(), constant);
        let vars: Vec<usize> = e.terms().iter().map(|t| t.0).collect();
        let unique: HashSet<_> = vars.iter().collect();
        prop_assert_eq!(unique.len(), vars.len());
        prop_assert!(e.terms().iter().all(|t| t.1 != 0.0));
        let values: Vec<f64> = (0..12).map(|i| i as f64 * 0.5 - 2.0).collect();
        let direct: f64 = terms.iter().map(|&(v, c)| c * values[v]).sum::<f64>() + constant;
        prop_assert!((e.eval(&values) - direct).abs() < 1e-9);
    }

    #[test]
    fn model_structure(seed in 0u64..5_000) {
        let sc = generate_small_scenario(seed, 3).unwrap();
        let m = build_model(&sc).unwrap();
        let labels: HashSet<_> = m.constraints.iter().map(|c| c.label.as_str()).collect();
        prop_assert_eq!(labels.len(), m.constraints.len());
        prop_assert!(m.constraints.iter().all(|c| !c.label.is_empty()));
        for v in &m.vars {
            if v.kind == VarKind::Binary {
                prop_assert_eq!((v.lo, v.hi), (0.0, 1.0));
            }
        }
        let n = m.vars.len();
        prop_assert!(m.constraints.iter().all(|c| c.expr.terms().iter().all(|t| t.0 < n)));
        for &(v, _) in m.objective.terms() {
            prop_assert!(m.vars[v].symbol == "k", "objective uses {}", m.vars[v].name);
        }
    }

    #[test]
    fn exact_results_are_consistent(seed in 0u64..5_000) {
        let sc = generate_small_scenario(seed, 3).unwrap();
        let r = solve_exact(&sc, 30.0, 0.0);
        if r.status == SolveStatus::Optimal {
            let p = r.placement.as_ref().unwrap();
            prop_assert!((r.objective - r.bound).abs() <= 1e-6);
            prop_assert!(p.is_complete());
            let g = &sc.graph;
            for (s, sp) in p.placed() {
                for &d in &sp.demand_paths {
                    let path = &sc.slices[s].paths[d];
                    prop_assert_eq!(g.server(sp.servers.ru).site, path.sites[0]);
                    let pos: Vec<usize> = NfType::CHAIN
                        .iter()
                        .map(|&v| path.position(g.server(sp.servers[v]).site).unwrap())
                        .collect();
                    prop_assert!(pos.windows(2).all(|w| w[0] <= w[1]));
                }
            }
            prop_assert!(validate(p, &sc).unwrap().is_feasible());
        } else {
            prop_assert_eq!(r.status, SolveStatus::Infeasible);
        }
    }

    #[test]
    fn metric_fractions_stay_in_range(seed in 0u64..2_000, n in 1usize..15) {
        let sc = reference_scenario(1, seed, n);
        let r = solve_first_fit(&sc);
        let m = replication_metrics(&sc, &r).unwrap();
        if let Some(f) = m.urllc_fully_at_cs {
            prop_assert!((0.0..=1.0).contains(&f));
        }
        prop_assert!(m.sla_violations <= n);
        let single = aggregate_metrics(&[(sc.clone(), r.clone())], 0.95).unwrap();
        prop_assert!(single.objective.ci_halfwidth.is_none());
        let double = aggregate_metrics(&[(sc.clone(), r.clone()), (sc, r)], 0.95).unwrap();
        prop_assert!(double.objective.ci_halfwidth.is_some());
    }
}

/// An extra slice can only raise the optimum or make the instance infeasible.
#[test]
fn adding_a_slice_never_lowers_the_optimum() {
    let catalog = builtin_slice_catalog();
    let mut compared = 0;
    for seed in 0..40u64 {
        let sc = generate_small_scenario(seed, 2).unwrap();
        let base = solve_exact(&sc, 30.0, 0.0);
        let t = catalog[seed as usize % catalog.len()].clone();
        let source = sc.graph.sites_in_tier(Tier::CellSite).next().unwrap();
        let bigger = sc.with_extra_slice(t, source).unwrap();
        let more = solve_exact(&bigger, 30.0, 0.0);
        match (base.status, more.status) {
            (SolveStatus::Infeasible, s) => assert_eq!(s, SolveStatus::Infeasible, "seed {seed}"),
            (_, SolveStatus::Infeasible) => {}
            _ => {
                assert!(more.objective >= base.objective - 1e-9, "seed {seed}");
                compared += 1;
            }
        }
    }
    assert!(compared >= 10, "{compared}");
}

/// The exact solver finds a placement whenever the heuristic finds a clean one,
/// and it is never more expensive.
#[test]
fn exact_dominates_clean_heuristic_placements() {
    let g = profile_topology(&Profile::calibrated(), 1).unwrap();
    let mut clean = 0;
    for seed in 0..30u64 {
        let cfg = GeneratorConfig {
            n_slices: 3 + (seed as usize % 12),
            seed,
            demand_scale: 1e-3,
            nf_profiles: Profile::calibrated().nf_profiles,
            ..GeneratorConfig::default()
        };
        let sc = generate_scenario_with(g.clone(), &cfg).unwrap();
        let h = solve_first_fit(&sc);
        let e = solve_exact(&sc, 60.0, 0.0);
        let hp = h.placement.as_ref().unwrap();
        if h.status == SolveStatus::Feasible && validate(hp, &sc).unwrap().is_feasible() {
            clean += 1;
            assert_eq!(e.status, SolveStatus::Optimal, "seed {seed}");
            assert!(e.objective <= h.objective + 1e-9, "seed {seed}");
        }
        if e.status == SolveStatus::Infeasible {
            assert!(h.status == SolveStatus::Infeasible || !validate(hp, &sc).unwrap().is_feasible());
        }
    }
    assert!(clean >= 10, "{clean}");
}

#[test]
fn solvers_are_deterministic() {
    for seed in 0..10 {
        let sc = reference_scenario(2, seed, 12);
        let (a, b) = (solve_exact(&sc, 60.0, 0.0), solve_exact(&sc, 60.0, 0.0));
        assert_eq!((a.status, &a.placement, a.objective), (b.status, &b.placement, b.objective));
        let (a, b) = (solve_first_fit(&sc), solve_first_fit(&sc));
        assert_eq!((a.status, &a.placement), (b.status, &b.placement));
    }
}
