use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exact::solve_exact;
use crate::scenario::generate_small_scenario;
use crate::validator::tests::{chain_scenario, place};
use crate::validator::{objective_of, validate};

const TOL: f64 = 1e-9;

#[test]
fn single_path_example_counts() {
    let sc = chain_scenario(&["mMTC1"]);
    assert_eq!(sc.slices[0].paths.len(), 1);
    let st = model_stats(&build_model(&sc).unwrap());
    assert_eq!(st.vars("z[p,s]"), 1);
    assert_eq!(st.vars("z[p,λ,s]"), 1);
    assert_eq!(st.vars("f[x]"), 3);
    assert_eq!(st.vars("f[x,v,s]"), 9);
    assert_eq!(st.vars("f[x,λ,v,s]"), 9);
    assert_eq!(st.binaries, 1 + 1 + 3 + 9 + 9);
    assert_eq!(st.rows("path_selection"), 1);
    assert_eq!(st.rows("single_instance"), 3);
    // RU->DU and DU->CU on the one path.
    assert_eq!(st.rows("chain_order"), 2);
}

#[test]
fn empty_scenario_has_no_placement_binaries() {
    let st = model_stats(&build_model(&chain_scenario(&[])).unwrap());
    for family in ["z[p,s]", "z[p,λ,s]", "f[x,v,s]", "f[x,λ,v,s]"] {
        assert_eq!(st.vars(family), 0);
    }
    assert_eq!(st.binaries, 3);
}

#[test]
fn family_counts_follow_index_sets() {
    for seed in 0..20 {
        let sc = generate_small_scenario(seed, 3).unwrap();
        let st = model_stats(&build_model(&sc).unwrap());
        let demands: usize = sc.slices.iter().map(|s| s.demands.len()).sum();
        assert_eq!(st.rows("path_selection"), demands);
        assert_eq!(st.rows("single_instance"), 3 * sc.slices.len());
        let n_x = sc.graph.servers().len();
        assert_eq!(st.vars("f[x,λ,v,s]"), 3 * n_x * demands);
        assert_eq!(st.rows("server_capacity"), n_x);
        assert_eq!(st.rows("link_capacity"), sc.graph.links().len());
    }
}

#[test]
fn identical_slice_doubles_placement_families() {
    let one = model_stats(&build_model(&chain_scenario(&["URLLC_RO1"])).unwrap());
    let two = model_stats(&build_model(&chain_scenario(&["URLLC_RO1", "URLLC_RO1"])).unwrap());
    for family in ["z[p,s]", "z[p,λ,s]", "f[x,v,s]", "f[x,λ,v,s]", "dpro[x,v,s]", "dsel[x,v,s,λ]"] {
        assert_eq!(two.vars(family), 2 * one.vars(family), "{family}");
    }
    assert_eq!(two.vars("f[x]"), one.vars("f[x]"));
}

#[test]
fn build_is_deterministic() {
    let sc = generate_small_scenario(7, 3).unwrap();
    let a = build_model(&sc).unwrap();
    let b = build_model(&sc).unwrap();
    assert_eq!(model_stats(&a), model_stats(&b));
    assert_eq!(a.vars, b.vars);
    assert_eq!(a.constraints, b.constraints);
}

#[test]
fn labels_are_unique_and_objective_uses_costs_only() {
    let sc = generate_small_scenario(3, 3).unwrap();
    let m = build_model(&sc).unwrap();
    let mut labels: Vec<&str> = m.constraints.iter().map(|c| c.label.as_str()).collect();
    labels.sort_unstable();
    let n = labels.len();
    labels.dedup();
    assert_eq!(labels.len(), n);
    for &(v, _) in m.objective.terms() {
        assert!(matches!(m.vars[v].tag, VarTag::ServerCost { .. } | VarTag::LinkCost { .. }));
    }
}

#[test]
fn decode_rejects_fractional_and_empty() {
    let sc = chain_scenario(&["mMTC1"]);
    let m = build_model(&sc).unwrap();
    let zeros = vec![0.0; m.vars.len()];
    assert!(matches!(decode(&m, &zeros), Err(Error::Inconsistent(_))));

    let p = Placement { slices: vec![place([0, 1, 2])] };
    let mut values = encode_placement(&m, &sc, &p).unwrap();
    let z = m.var(&VarTag::PathDemand { s: 0, d: 0, p: 0 }).unwrap();
    values[z] = 0.4;
    assert!(matches!(decode(&m, &values), Err(Error::FractionalBinary { .. })));

    let mut values = encode_placement(&m, &sc, &p).unwrap();
    values[m.var(&VarTag::NfSlice { s: 0, v: NfType::Du, x: 2 }).unwrap()] = 1.0;
    assert!(matches!(decode(&m, &values), Err(Error::Inconsistent(_))));
}

#[test]
fn encode_decode_round_trip_and_objective() {
    let sc = chain_scenario(&["URLLC_RO1", "mMTC1"]);
    let m = build_model(&sc).unwrap();
    let p = Placement { slices: vec![place([0, 0, 1]), place([0, 1, 2])] };
    let values = encode_placement(&m, &sc, &p).unwrap();
    assert!(m.is_satisfied(&values, TOL).unwrap());
    assert_eq!(decode(&m, &values).unwrap(), p);
    let obj = m.objective_value(&values).unwrap();
    assert!((obj - objective_of(&p, &sc).unwrap()).abs() < 1e-12);
}

#[test]
fn corrupted_cu_off_path_breaks_the_path_rows() {
    // Only the core site is reachable from the source path here, so put the
    // CU on a server whose site the path does not visit by swapping paths.
    let sc = generate_small_scenario(11, 2).unwrap();
    let m = build_model(&sc).unwrap();
    let slice = &sc.slices[0];
    let path = &slice.paths[0];
    let off = (0..sc.graph.servers().len()).find(|&x| path.position(sc.graph.server(x).site).is_none());
    let Some(off) = off else { return };
    let mut p = Placement::unplaced(sc.slices.len());
    p.slices[0] = Some(SlicePlacement {
        demand_paths: vec![0; slice.demands.len()],
        servers: PerNf::new(path.servers[0], path.servers[0], off),
    });
    let values = encode_placement(&m, &sc, &p).unwrap();
    let broken: Vec<&str> = m
        .violations(&values, TOL)
        .unwrap()
        .iter()
        .map(|v| m.constraints[v.row].family())
        .collect();
    assert!(broken.contains(&"nf_on_path"));
}

/// Random placements, about half of them drawn along the path so that a
/// good share is feasible.
pub(crate) fn random_placement(sc: &Scenario, rng: &mut impl Rng) -> Placement {
    let n_x = sc.graph.servers().len();
    let mut p = Placement::unplaced(sc.slices.len());
    for (s, slice) in sc.slices.iter().enumerate() {
        if rng.gen_bool(0.05) {
            continue;
        }
        let path_idx = rng.gen_range(0..slice.paths.len());
        let demand_paths = (0..slice.demands.len())
            .map(|_| if rng.gen_bool(0.8) { path_idx } else { rng.gen_range(0..slice.paths.len()) })
            .collect();
        let path = &slice.paths[path_idx];
        let servers = if rng.gen_bool(0.6) {
            let mut picks: Vec<usize> = (0..3).map(|_| rng.gen_range(0..path.servers.len())).collect();
            picks.sort_unstable();
            if rng.gen_bool(0.7) {
                // RU at the source site.
                let at_source = path.servers.iter().take_while(|&&x| sc.graph.server(x).site == path.sites[0]).count();
                picks[0] = rng.gen_range(0..at_source);
                picks.sort_unstable();
            }
            PerNf::new(path.servers[picks[0]], path.servers[picks[1]], path.servers[picks[2]])
        } else {
            PerNf::new(rng.gen_range(0..n_x), rng.gen_range(0..n_x), rng.gen_range(0..n_x))
        };
        p.slices[s] = Some(SlicePlacement { demand_paths, servers });
    }
    p
}

#[test]
fn ir_agrees_with_validator_on_random_assignments() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut feasible, mut infeasible) = (0, 0);
    for seed in 0..100 {
        let sc = generate_small_scenario(seed, 3).unwrap();
        let m = build_model(&sc).unwrap();
        for _ in 0..3 {
            let p = random_placement(&sc, &mut rng);
            let values = encode_placement(&m, &sc, &p).unwrap();
            let ir = m.is_satisfied(&values, TOL).unwrap();
            let direct = validate(&p, &sc).unwrap().is_feasible();
            assert_eq!(ir, direct, "seed {seed}: {p:?}");
            if direct {
                feasible += 1;
            } else {
                infeasible += 1;
            }
        }
    }
    assert!(feasible >= 20 && infeasible >= 20, "{feasible} feasible, {infeasible} infeasible");
}

#[test]
fn solver_optimum_is_tight_in_the_model() {
    for seed in 0..15 {
        let sc = generate_small_scenario(seed, 3).unwrap();
        let res = solve_exact(&sc, 10.0, 0.0);
        let Some(p) = res.placement else { continue };
        let m = build_model(&sc).unwrap();
        let values = encode_placement(&m, &sc, &p).unwrap();
        assert!(m.is_satisfied(&values, TOL).unwrap(), "seed {seed}");
        assert!((m.objective_value(&values).unwrap() - res.objective).abs() < 1e-6);
        // Epigraph tightness: k equals the piecewise cost of u.
        for x in 0..sc.graph.servers().len() {
            let k = values[m.var(&VarTag::ServerCost { x }).unwrap()];
            let u = values[m.var(&VarTag::ServerUtil { x }).unwrap()];
            assert!((k - sc.piecewise.eval(u).unwrap()).abs() < 1e-6);
        }
    }
}
