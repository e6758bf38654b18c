//! Invariant suite run by `ucvrp check`.

use std::path::Path;

use serde::Serialize;

use ucvrp::algorithms::{run_algorithm, AlgorithmId, SolveOptions};
use ucvrp::big_matching::{serve_big_by_matching, subalg1, subalg1_bound};
use ucvrp::instance::{radial_lower_bound, DemandProfile};
use ucvrp::itp::{delta_itp, delta_itp_plus, itp_bound, BoundVariant};
use ucvrp::lp_round::{enumerate_tours, solve_covering_lp, CatalogVariant, DEFAULT_CATALOG_CAP};
use ucvrp::oracle::{exact_cvrp, DEFAULT_ORACLE_CAP};
use ucvrp::tsp::{best_available_tour, exact_tsp};
use ucvrp::{check_feasible, Instance, Rational, Solution};

use crate::{load_instance, Failure};

const LB_TOL: f64 = 1e-6;

#[derive(Debug, Serialize)]
pub struct Finding {
    pub instance: String,
    pub invariant: String,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct CheckOutcome {
    pub instances: usize,
    pub checks: usize,
    pub violations: Vec<Finding>,
}

struct Checker<'a> {
    name: &'a str,
    checks: usize,
    findings: Vec<Finding>,
}

impl Checker<'_> {
    fn expect(&mut self, ok: bool, invariant: &str, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.findings.push(Finding { instance: self.name.to_string(), invariant: invariant.into(), detail: detail() });
        }
    }

    fn le(&mut self, invariant: &str, lhs: f64, rhs: f64, tol: f64) {
        self.expect(lhs <= rhs + tol, invariant, || format!("{lhs} > {rhs}"));
    }

    fn feasible(&mut self, inst: &Instance, invariant: &str, sol: &Solution) {
        let r = check_feasible(inst, sol);
        self.expect(r.is_ok(), invariant, || format!("{:?}", r.err()));
    }
}

fn rel(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

/// Every per-instance invariant; exact comparisons only when `n` is small
/// enough for the oracle.
pub fn check_instance(inst: &Instance) -> Result<(usize, Vec<Finding>), ucvrp::Error> {
    let mut c = Checker { name: inst.name(), checks: 0, findings: Vec::new() };
    let all: Vec<usize> = inst.customers().collect();

    if let Ok(profile) = DemandProfile::new(inst) {
        let v = profile.integral(Rational::from_integer(0), Rational::from_integer(1), 1)?;
        c.expect(v == 1.0, "mass_identity", || format!("integral of x dF = {v}"));
    }

    let tour = best_available_tour(inst, &all)?;
    for delta in [Rational::new(0, 1), Rational::new(1, 10), Rational::new(1, 3), Rational::new(49, 100)] {
        let (sol, trace) = delta_itp(inst, &all, &tour, delta)?;
        c.feasible(inst, &format!("delta_itp_feasible[{delta}]"), &sol);
        let l3 = itp_bound(inst, &all, tour.cost, delta, BoundVariant::Threshold);
        c.le(&format!("delta_itp_bound[{delta}]"), sol.cost(), l3, rel(l3));
        c.le(&format!("offset_min_le_mean[{delta}]"), sol.cost(), trace.mean_candidate_cost, rel(sol.cost()));
        if delta == Rational::new(0, 1) {
            let l1 = itp_bound(inst, &all, tour.cost, delta, BoundVariant::Classic);
            c.le("itp_classic_bound", sol.cost(), l1, rel(l1));
        }
        let (plus, _) = delta_itp_plus(inst, &all, &tour, delta)?;
        c.feasible(inst, &format!("delta_itp_plus_feasible[{delta}]"), &plus);
        let l4 = itp_bound(inst, &all, tour.cost, delta, BoundVariant::ThresholdPlus);
        c.le(&format!("delta_itp_plus_bound[{delta}]"), plus.cost(), l4, rel(l4));
        c.le(&format!("plus_bound_le_delta_bound[{delta}]"), l4, l3, rel(l3));
    }

    let (s1, plan) = subalg1(inst, &tour)?;
    c.feasible(inst, "subalg1_feasible", &s1);
    let b = subalg1_bound(inst, tour.cost, plan.cost);
    c.le("subalg1_bound", s1.cost(), b, rel(b));

    if inst.n() <= DEFAULT_ORACLE_CAP {
        let opt = exact_cvrp(inst)?.opt_cost;
        c.le("radial_le_opt", radial_lower_bound(inst), opt, LB_TOL);
        c.le("tsp_le_opt", exact_tsp(inst, &all)?.cost, opt, LB_TOL);
        c.le("matching_le_opt", serve_big_by_matching(inst).0.cost, opt, LB_TOL);
        for variant in [CatalogVariant::Lp1, CatalogVariant::Lp2 { delta: Rational::new(1, 5) }] {
            if let Ok(cat) = enumerate_tours(inst, variant, DEFAULT_CATALOG_CAP) {
                let lp = solve_covering_lp(&cat)?;
                c.le(&format!("lp_le_opt[{variant:?}]"), lp.objective, opt, LB_TOL);
            }
        }
        for alg in AlgorithmId::ALL {
            let out = run_algorithm(inst, alg, &SolveOptions::default())?;
            c.expect(out.report.feasible, &format!("{alg}_feasible"), || out.report.violation.clone().unwrap_or_default());
            c.le(&format!("{alg}_not_below_opt"), opt, out.report.cost, LB_TOL);
            for b in out.report.bound_checks.iter() {
                c.expect(b.holds, &format!("{alg}_{}", b.name), || format!("{} > {}", b.cost, b.bound));
            }
        }
    }
    Ok((c.checks, c.findings))
}

pub fn check_dir(dir: &Path) -> Result<CheckOutcome, Failure> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|x| x.to_str()), Some("json" | "vrp")))
        .collect();
    files.sort();
    let mut outcome = CheckOutcome { instances: 0, checks: 0, violations: Vec::new() };
    for path in files {
        let inst = load_instance(&path, false)?;
        let (checks, findings) = check_instance(&inst)?;
        outcome.instances += 1;
        outcome.checks += checks;
        outcome.violations.extend(findings);
    }
    Ok(outcome)
}
