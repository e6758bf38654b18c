use proptest::prelude::*;

use ucvrp::algorithms::{run_algorithm, AlgorithmId, SolveOptions};
use ucvrp::big_matching::{serve_big_by_matching, subalg1, subalg1_bound};
use ucvrp::generate::{gen_instance, DemandLaw, MetricKind};
use ucvrp::instance::{radial_lower_bound, DemandProfile};
use ucvrp::io::{instance_from_json, instance_to_json};
use ucvrp::itp::{delta_itp, delta_itp_plus, itp_bound, BoundVariant};
use ucvrp::lp_round::{enumerate_tours, round_tours, solve_covering_lp, CatalogVariant, DEFAULT_CATALOG_CAP};
use ucvrp::oracle::exact_cvrp;
use ucvrp::tsp::{approx_tsp, best_available_tour, exact_tsp, shortcut};
use ucvrp::{check_feasible, Instance, Rational, DEPOT};

fn arb_instance(max_n: usize, max_k: u32) -> impl Strategy<Value = Instance> {
    (any::<bool>(), 1..=max_n, 1..=max_k, any::<bool>(), any::<u64>()).prop_map(|(euc, n, k, heavy, seed)| {
        let kind = if euc { MetricKind::Euclidean } else { MetricKind::RandomMetric };
        let law = if heavy { DemandLaw::HeavyTail } else { DemandLaw::Uniform };
        gen_instance(kind, n, k, law, seed)
    })
}

fn arb_delta() -> impl Strategy<Value = Rational> {
    (0i64..50).prop_map(|p| Rational::new(p, 100))
}

fn tol(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

fn subset_of(inst: &Instance, mask: u64) -> Vec<usize> {
    let s: Vec<usize> = inst.customers().filter(|v| mask >> (v - 1) & 1 == 1).collect();
    if s.is_empty() {
        inst.customers().collect()
    } else {
        s
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trip_is_lossless(inst in arb_instance(12, 10)) {
        let text = instance_to_json(&inst);
        let back = instance_from_json(&text).unwrap();
        prop_assert_eq!(instance_to_json(&back), text);
        prop_assert!(Instance::validate(back.to_raw()).is_ok());
    }

    #[test]
    fn radial_mass_integrates_to_one(inst in arb_instance(12, 10)) {
        if let Ok(p) = DemandProfile::new(&inst) {
            let v = p.integral(Rational::from_integer(0), Rational::from_integer(1), 1).unwrap();
            prop_assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn interval_integrals_are_sandwiched(inst in arb_instance(12, 10), a in 0usize..5, b in 0usize..5) {
        let points = [Rational::new(0, 1), Rational::new(1, 5), Rational::new(1, 3), Rational::new(1, 2), Rational::new(1, 1)];
        let (l, r) = (points[a.min(b)], points[a.max(b)]);
        prop_assume!(l < r);
        if let Ok(p) = DemandProfile::new(&inst) {
            let mass = p.raw(l, r, 0);
            let first = p.raw(l, r, 1);
            let (lf, rf) = (*l.numer() as f64 / *l.denom() as f64, *r.numer() as f64 / *r.denom() as f64);
            prop_assert!(lf * mass <= first + 1e-12);
            prop_assert!(first <= rf * mass + 1e-12);
        }
    }

    #[test]
    fn shortcutting_never_lengthens_a_walk(
        inst in arb_instance(10, 6),
        steps in proptest::collection::vec(0usize..11, 0..20),
        keep_mask in any::<u64>(),
    ) {
        let mut walk = vec![DEPOT];
        walk.extend(steps.iter().map(|s| s % (inst.n() + 1)));
        walk.extend(inst.customers());
        walk.push(DEPOT);
        let keep = subset_of(&inst, keep_mask);
        let t = shortcut(&inst, &walk, &keep).unwrap();
        prop_assert!(t.cost <= inst.walk_cost(&walk) + tol(t.cost));
        let mut seen = t.customers().to_vec();
        seen.sort_unstable();
        prop_assert_eq!(seen, keep);
    }

    #[test]
    fn tour_approximations_are_ordered(inst in arb_instance(9, 5)) {
        let all: Vec<usize> = inst.customers().collect();
        let exact = exact_tsp(&inst, &all).unwrap().cost;
        let approx = approx_tsp(&inst, &all).unwrap().cost;
        prop_assert!(exact <= approx + tol(approx));
        prop_assert!(approx <= 2.0 * exact + tol(exact));
    }

    #[test]
    fn delta_itp_respects_its_bounds(inst in arb_instance(30, 10), delta in arb_delta(), mask in any::<u64>()) {
        let subset = subset_of(&inst, mask);
        let tour = best_available_tour(&inst, &subset).unwrap();
        let (sol, trace) = delta_itp(&inst, &subset, &tour, delta).unwrap();
        prop_assert_eq!(check_feasible_on(&inst, &subset, &sol), Ok(()));
        let l3 = itp_bound(&inst, &subset, tour.cost, delta, BoundVariant::Threshold);
        prop_assert!(sol.cost() <= l3 + tol(l3));
        prop_assert!(sol.cost() <= trace.mean_candidate_cost + tol(sol.cost()));
        prop_assert!(sol.cost() <= trace.expected_cost + tol(sol.cost()));

        let (plus, _) = delta_itp_plus(&inst, &subset, &tour, delta).unwrap();
        prop_assert_eq!(check_feasible_on(&inst, &subset, &plus), Ok(()));
        let l4 = itp_bound(&inst, &subset, tour.cost, delta, BoundVariant::ThresholdPlus);
        prop_assert!(plus.cost() <= l4 + tol(l4));
        prop_assert!(l4 <= l3 + tol(l3));
    }

    #[test]
    fn subalg1_respects_its_bound(inst in arb_instance(30, 10)) {
        let all: Vec<usize> = inst.customers().collect();
        let tour = best_available_tour(&inst, &all).unwrap();
        let (sol, plan) = subalg1(&inst, &tour).unwrap();
        prop_assert_eq!(check_feasible(&inst, &sol), Ok(()));
        let b = subalg1_bound(&inst, tour.cost, plan.cost);
        prop_assert!(sol.cost() <= b + tol(b));
    }

    #[test]
    fn matching_cost_ignores_labels(inst in arb_instance(14, 9), rot in 0usize..14) {
        let n = inst.n();
        // relabel customer v as ((v - 1 + rot) mod n) + 1
        let map = |v: usize| if v == DEPOT { DEPOT } else { (v - 1 + rot) % n + 1 };
        let mut inv = vec![0usize; n + 1];
        for v in 0..=n {
            inv[map(v)] = v;
        }
        let raw = inst.to_raw();
        let demands = (1..=n).map(|v| raw.demands[inv[v] - 1]).collect();
        let matrix = (0..=n).map(|x| (0..=n).map(|y| raw.matrix[inv[x]][inv[y]]).collect()).collect();
        let relabeled = Instance::from_matrix("relabeled", inst.capacity(), demands, matrix).unwrap();
        let a = serve_big_by_matching(&inst).0.cost;
        let b = serve_big_by_matching(&relabeled).0.cost;
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lower_bounds_and_algorithms_bracket_the_optimum(inst in arb_instance(7, 4), seed in 0u64..1000) {
        let opt = exact_cvrp(&inst).unwrap().opt_cost;
        let all: Vec<usize> = inst.customers().collect();
        prop_assert!(radial_lower_bound(&inst) <= opt + 1e-6);
        prop_assert!(exact_tsp(&inst, &all).unwrap().cost <= opt + 1e-6);
        prop_assert!(serve_big_by_matching(&inst).0.cost <= opt + 1e-6);
        for variant in [CatalogVariant::Lp1, CatalogVariant::Lp2 { delta: Rational::new(1, 5) }] {
            let cat = enumerate_tours(&inst, variant, DEFAULT_CATALOG_CAP).unwrap();
            let lp = solve_covering_lp(&cat).unwrap();
            prop_assert!(lp.objective <= opt + 1e-6);
            prop_assert!((lp.objective - lp.dual_objective).abs() <= 1e-6 * opt.max(1.0));
        }
        for alg in AlgorithmId::ALL {
            let out = run_algorithm(&inst, alg, &SolveOptions { seed, ..SolveOptions::default() }).unwrap();
            prop_assert!(out.report.feasible, "{} infeasible", alg);
            prop_assert!(out.report.cost >= opt - 1e-6, "{} below the optimum", alg);
            prop_assert!(out.report.bound_checks.iter().all(|b| b.holds), "{} broke a bound", alg);
        }
    }

    #[test]
    fn rounding_is_a_function_of_the_seed(inst in arb_instance(7, 4), seed in any::<u64>(), gamma in 0.0f64..3.0) {
        let cat = enumerate_tours(&inst, CatalogVariant::Lp1, DEFAULT_CATALOG_CAP).unwrap();
        let lp = solve_covering_lp(&cat).unwrap();
        let a = round_tours(&cat, &lp, gamma, seed);
        let b = round_tours(&cat, &lp, gamma, seed);
        prop_assert_eq!(a, b);
    }
}

/// Feasibility of a solution that serves exactly `subset`.
fn check_feasible_on(inst: &Instance, subset: &[usize], sol: &ucvrp::Solution) -> Result<(), String> {
    let mut served: Vec<usize> = sol.served.iter().flatten().copied().collect();
    served.sort_unstable();
    if served != subset {
        return Err(format!("served {served:?}, expected {subset:?}"));
    }
    for (t, s) in sol.tours.iter().zip(&sol.served) {
        if inst.load(s) > inst.capacity() as u64 {
            return Err(format!("overloaded tour {:?}", t.vertices));
        }
        if let Some(v) = s.iter().find(|&&v| !t.visits(v)) {
            return Err(format!("{v} served off its tour"));
        }
    }
    Ok(())
}
