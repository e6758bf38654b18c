//! Composed solvers: the LP-rounding pipelines, the two meta-algorithms
//! that keep the best of several branches, and a dispatcher by name.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::big_matching::{subalg1, subalg1_bound};
use crate::constants::{self, default_gammas};
use crate::error::{Error, Result};
use crate::instance::{radial_lower_bound, Instance, Rational};
use crate::itp::{delta_itp, delta_itp_plus, itp_bound, BoundVariant};
use crate::lp_round::{
    cover_set, enumerate_tours, round_tours, solve_covering_lp, CatalogVariant, LpSolution, TourCatalog,
    DEFAULT_CATALOG_CAP,
};
use crate::solution::{check_feasible, Solution};
use crate::tsp::{best_available_tour, Tour, TourQuality};

/// Default threshold of the general-capacity algorithm.
pub fn default_delta() -> Rational {
    Rational::new(1, 5)
}

fn third() -> Rational {
    Rational::new(1, 3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmId {
    Itp,
    Ditp,
    #[serde(rename = "ditp+")]
    DitpPlus,
    Subalg1,
    Subalg2,
    Subalg3,
    Subalg4,
    Alg1,
    Alg2,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 9] = [
        AlgorithmId::Itp,
        AlgorithmId::Ditp,
        AlgorithmId::DitpPlus,
        AlgorithmId::Subalg1,
        AlgorithmId::Subalg2,
        AlgorithmId::Subalg3,
        AlgorithmId::Subalg4,
        AlgorithmId::Alg1,
        AlgorithmId::Alg2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::Itp => "itp",
            AlgorithmId::Ditp => "ditp",
            AlgorithmId::DitpPlus => "ditp+",
            AlgorithmId::Subalg1 => "subalg1",
            AlgorithmId::Subalg2 => "subalg2",
            AlgorithmId::Subalg3 => "subalg3",
            AlgorithmId::Subalg4 => "subalg4",
            AlgorithmId::Alg1 => "alg1",
            AlgorithmId::Alg2 => "alg2",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm `{s}`")))
    }
}

/// A closed-form guarantee evaluated on the run, `cost <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub cost: f64,
    pub bound: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(name: &str, cost: f64, bound: f64) -> Self {
        let holds = cost <= bound + 1e-9 * bound.abs().max(1.0);
        BoundCheck { name: name.to_string(), cost, bound, holds }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(with = "crate::instance::opt_rational_str", default)]
    pub delta: Option<Rational>,
    pub gamma: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LowerBounds {
    pub radial: f64,
    /// Valid only when the tour is optimal (cost) or 2-approximate (cost / 2).
    pub tsp: Option<f64>,
    /// Objective of the covering LP when one was solved over an exactly priced catalog.
    pub lp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub algorithm: AlgorithmId,
    pub params: Params,
    pub cost: f64,
    pub branch_costs: BTreeMap<String, f64>,
    pub lower_bounds: LowerBounds,
    pub bound_checks: Vec<BoundCheck>,
    pub feasible: bool,
    pub violation: Option<String>,
    pub alpha_tag: TourQuality,
    pub tour_cost: f64,
    pub seed: u64,
    pub lp_solved: bool,
    /// Worst-case ratio guarantee for the tour's alpha, when it applies.
    pub theoretical_ratio: Option<f64>,
    pub notes: Vec<String>,
}

/// Catalog and LP solution shared by pipelines using the same variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpStage {
    pub catalog: TourCatalog,
    pub lp: LpSolution,
}

pub fn prepare_lp(inst: &Instance, variant: CatalogVariant) -> Result<LpStage> {
    let catalog = enumerate_tours(inst, variant, DEFAULT_CATALOG_CAP)?;
    let lp = solve_covering_lp(&catalog)?;
    Ok(LpStage { catalog, lp })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub lp_solved: bool,
    pub lp_objective: Option<f64>,
    pub rounded_cost: f64,
    pub selected: usize,
    pub leftover: Vec<usize>,
    pub itp_cost: f64,
    pub itp_bound: f64,
}

/// Rounded LP tours plus delta-ITP+ for what they leave over. `stage` must
/// be given when `gamma > 0` and the cover set is non-empty.
fn pipeline_with(
    inst: &Instance,
    variant: CatalogVariant,
    stage: Option<&LpStage>,
    gamma: f64,
    delta_itp: Rational,
    seed: u64,
    tour: &Tour,
) -> Result<(Solution, PipelineRun)> {
    let cover = cover_set(inst, variant);
    let mut sol = Solution::default();
    let mut assigned = vec![false; inst.n() + 1];
    let mut rounded_cost = 0.0;
    let mut selected = 0;
    let mut uncovered = cover.clone();
    let use_lp = gamma > 0.0 && !cover.is_empty();
    if use_lp {
        let stage = stage.expect("LP stage prepared by the caller");
        let outcome = round_tours(&stage.catalog, &stage.lp, gamma, seed);
        let quality = if stage.catalog.exact { TourQuality::Exact } else { TourQuality::TwoApprox };
        for &t in &outcome.selected {
            let ct = &stage.catalog.tours[t];
            let served: Vec<usize> = ct.order.iter().copied().filter(|&v| !assigned[v]).collect();
            for &v in &served {
                assigned[v] = true;
            }
            sol.push(Tour::new(inst, &ct.order, quality), served);
        }
        rounded_cost = outcome.cost;
        selected = outcome.selected.len();
        uncovered = outcome.uncovered;
    }
    let mut leftover = uncovered;
    if let CatalogVariant::Lp2 { delta } = variant {
        leftover.extend(inst.customers().filter(|&v| inst.dhat(v) <= delta));
    }
    leftover.sort_unstable();
    leftover.dedup();
    let (mut itp_cost, mut bound) = (0.0, 0.0);
    if !leftover.is_empty() {
        let restricted = tour.restrict(inst, &leftover)?;
        let (part, _) = delta_itp_plus(inst, &leftover, &restricted, delta_itp)?;
        itp_cost = part.cost();
        bound = itp_bound(inst, &leftover, restricted.cost, delta_itp, BoundVariant::ThresholdPlus);
        sol.extend(part);
    }
    let run = PipelineRun {
        lp_solved: use_lp,
        lp_objective: stage.filter(|_| use_lp).map(|s| s.lp.objective),
        rounded_cost,
        selected,
        leftover,
        itp_cost,
        itp_bound: bound,
    };
    Ok((sol, run))
}

/// LP rounding followed by delta-ITP+ on the leftover customers. With
/// `gamma = 0` (or nothing to cover) no catalog or LP is built at all.
pub fn lp_itp_pipeline(
    inst: &Instance,
    variant: CatalogVariant,
    gamma: f64,
    delta_itp: Rational,
    seed: u64,
    tour: &Tour,
) -> Result<(Solution, PipelineRun)> {
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::Parse(format!("gamma = {gamma} must be a non-negative number")));
    }
    let stage = if gamma > 0.0 && !cover_set(inst, variant).is_empty() {
        Some(prepare_lp(inst, variant)?)
    } else {
        None
    };
    pipeline_with(inst, variant, stage.as_ref(), gamma, delta_itp, seed, tour)
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub delta: Option<Rational>,
    pub gamma: Option<f64>,
    pub seed: u64,
    /// Tour over all customers; the best available one is computed otherwise.
    pub tour: Option<Tour>,
}

/// Everything a run produced, including a JSON trace of its internals.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub solution: Solution,
    pub report: SolveReport,
    pub trace: serde_json::Value,
}

struct Ctx<'a> {
    inst: &'a Instance,
    tour: Tour,
    report: SolveReport,
    trace: serde_json::Map<String, serde_json::Value>,
}

impl<'a> Ctx<'a> {
    fn new(inst: &'a Instance, algorithm: AlgorithmId, opts: &SolveOptions) -> Result<Self> {
        let all: Vec<usize> = inst.customers().collect();
        let tour = match &opts.tour {
            Some(t) => {
                let mut seen: Vec<usize> = t.customers().to_vec();
                seen.sort_unstable();
                if seen != all {
                    return Err(Error::TourMismatch);
                }
                t.clone()
            }
            None => best_available_tour(inst, &all)?,
        };
        let tsp = match tour.quality {
            TourQuality::Exact => Some(tour.cost),
            TourQuality::TwoApprox => Some(tour.cost / 2.0),
            TourQuality::External => None,
        };
        let report = SolveReport {
            algorithm,
            params: Params { delta: opts.delta, gamma: opts.gamma, seed: opts.seed, ..Params::default() },
            cost: 0.0,
            branch_costs: BTreeMap::new(),
            lower_bounds: LowerBounds { radial: radial_lower_bound(inst), tsp, lp: None },
            bound_checks: Vec::new(),
            feasible: false,
            violation: None,
            alpha_tag: tour.quality,
            tour_cost: tour.cost,
            seed: opts.seed,
            lp_solved: false,
            theoretical_ratio: None,
            notes: Vec::new(),
        };
        Ok(Ctx { inst, tour, report, trace: serde_json::Map::new() })
    }

    fn trace<T: Serialize>(&mut self, key: &str, value: &T) {
        self.trace.insert(key.to_string(), serde_json::to_value(value).expect("trace serializes"));
    }

    fn check(&mut self, name: &str, cost: f64, bound: f64) {
        self.report.bound_checks.push(BoundCheck::new(name, cost, bound));
    }

    fn subalg1(&mut self) -> Result<Solution> {
        let (sol, plan) = subalg1(self.inst, &self.tour)?;
        let bound = subalg1_bound(self.inst, self.tour.cost, plan.cost);
        self.check("subalg1", sol.cost(), bound);
        self.report.branch_costs.insert("subalg1".into(), sol.cost());
        self.trace("matching", &plan);
        Ok(sol)
    }

    fn pipeline(
        &mut self,
        name: &str,
        variant: CatalogVariant,
        stage: Option<&LpStage>,
        gamma: f64,
        delta_itp: Rational,
    ) -> Result<Solution> {
        let (sol, run) = pipeline_with(self.inst, variant, stage, gamma, delta_itp, self.report.seed, &self.tour)?;
        if run.lp_solved {
            self.report.lp_solved = true;
            if stage.is_some_and(|s| s.catalog.exact) {
                self.report.lower_bounds.lp = run.lp_objective;
            }
        }
        self.check(&format!("{name}_leftover_itp"), run.itp_cost, run.itp_bound);
        self.report.branch_costs.insert(name.to_string(), sol.cost());
        self.trace(name, &run);
        Ok(sol)
    }

    /// LP stage for `variant`, or `None` when it is not needed. A catalog
    /// over the size cap is reported back to the caller.
    fn stage(&mut self, variant: CatalogVariant, gammas: &[f64]) -> Result<Option<LpStage>> {
        if gammas.iter().all(|&g| g == 0.0) || cover_set(self.inst, variant).is_empty() {
            return Ok(None);
        }
        let stage = prepare_lp(self.inst, variant)?;
        self.trace("lp", &serde_json::json!({
            "tours": stage.catalog.tours.len(),
            "objective": stage.lp.objective,
            "dual_objective": stage.lp.dual_objective,
            "pivots": stage.lp.pivots,
            "exact_pricing": stage.catalog.exact,
        }));
        Ok(Some(stage))
    }

    fn finish(mut self, sol: Solution) -> SolveOutput {
        self.report.cost = sol.cost();
        match check_feasible(self.inst, &sol) {
            Ok(()) => self.report.feasible = true,
            Err(v) => self.report.violation = Some(v.to_string()),
        }
        SolveOutput { solution: sol, report: self.report, trace: serde_json::Value::Object(self.trace) }
    }
}

fn cheapest(branches: Vec<Solution>) -> Solution {
    let mut best: Option<Solution> = None;
    for s in branches {
        if best.as_ref().is_none_or(|b| s.cost() < b.cost()) {
            best = Some(s);
        }
    }
    best.expect("at least one branch")
}

fn check_delta(delta: Rational, lo_inclusive: bool) -> Result<Rational> {
    let ok_lo = if lo_inclusive { delta >= Rational::zero() } else { delta > Rational::zero() };
    if ok_lo && delta < Rational::new(1, 2) {
        Ok(delta)
    } else {
        Err(Error::BadDelta(delta.to_string()))
    }
}

/// Runs one algorithm of the family on `inst`.
pub fn run_algorithm(inst: &Instance, algorithm: AlgorithmId, opts: &SolveOptions) -> Result<SolveOutput> {
    let mut ctx = Ctx::new(inst, algorithm, opts)?;
    let all: Vec<usize> = inst.customers().collect();
    let alpha = ctx.tour.quality.alpha();
    let (g_star, g1, g2) = default_gammas();
    let sol = match algorithm {
        AlgorithmId::Itp | AlgorithmId::Ditp => {
            let delta = if algorithm == AlgorithmId::Itp {
                Rational::zero()
            } else {
                check_delta(opts.delta.unwrap_or_else(third), true)?
            };
            ctx.report.params.delta = Some(delta);
            let (sol, trace) = delta_itp(inst, &all, &ctx.tour, delta)?;
            let variant = if delta.is_zero() { BoundVariant::Classic } else { BoundVariant::Threshold };
            ctx.check(
                if delta.is_zero() { "itp_bound" } else { "delta_itp_bound" },
                sol.cost(),
                itp_bound(inst, &all, ctx.tour.cost, delta, variant),
            );
            ctx.trace("partition", &trace);
            sol
        }
        AlgorithmId::DitpPlus => {
            let delta = check_delta(opts.delta.unwrap_or_else(third), true)?;
            ctx.report.params.delta = Some(delta);
            let (sol, trace) = delta_itp_plus(inst, &all, &ctx.tour, delta)?;
            let l4 = itp_bound(inst, &all, ctx.tour.cost, delta, BoundVariant::ThresholdPlus);
            let l3 = itp_bound(inst, &all, ctx.tour.cost, delta, BoundVariant::Threshold);
            ctx.check("delta_itp_plus_bound", sol.cost(), l4);
            ctx.check("plus_bound_le_delta_bound", l4, l3);
            ctx.trace("partition", &trace);
            sol
        }
        AlgorithmId::Subalg1 => ctx.subalg1()?,
        AlgorithmId::Subalg2 => {
            let gamma = opts.gamma.unwrap_or(g_star);
            ctx.report.params.gamma = Some(gamma);
            let stage = ctx.stage(CatalogVariant::Lp1, &[gamma])?;
            ctx.pipeline("subalg2", CatalogVariant::Lp1, stage.as_ref(), gamma, third())?
        }
        AlgorithmId::Subalg3 | AlgorithmId::Subalg4 => {
            let delta = check_delta(opts.delta.unwrap_or_else(default_delta), false)?;
            let variant = CatalogVariant::Lp2 { delta };
            ctx.report.params.delta = Some(delta);
            let (name, gamma, d_itp) = if algorithm == AlgorithmId::Subalg3 {
                ctx.report.params.gamma1 = Some(opts.gamma.unwrap_or(g1));
                ("subalg3", opts.gamma.unwrap_or(g1), third())
            } else {
                ctx.report.params.gamma2 = Some(opts.gamma.unwrap_or(g2));
                ("subalg4", opts.gamma.unwrap_or(g2), delta)
            };
            let stage = ctx.stage(variant, &[gamma])?;
            ctx.pipeline(name, variant, stage.as_ref(), gamma, d_itp)?
        }
        AlgorithmId::Alg1 => {
            let mut gamma = opts.gamma.unwrap_or(g_star);
            let a = ctx.subalg1()?;
            let stage = match ctx.stage(CatalogVariant::Lp1, &[gamma]) {
                Err(Error::CatalogTooLarge { estimate, cap }) => {
                    ctx.report.notes.push(format!(
                        "tour catalog too large ({estimate} > {cap}); fell back to gamma = 0 without LP"
                    ));
                    gamma = 0.0;
                    None
                }
                other => other?,
            };
            ctx.report.params.gamma = Some(gamma);
            let b = ctx.pipeline("subalg2", CatalogVariant::Lp1, stage.as_ref(), gamma, third())?;
            ctx.report.theoretical_ratio = alpha.map(|a| a + 1.0 + constants::gamma_star(constants_y0()));
            cheapest(vec![a, b])
        }
        AlgorithmId::Alg2 => {
            let delta = check_delta(opts.delta.unwrap_or_else(default_delta), false)?;
            if delta >= third() {
                ctx.report.notes.push(format!("delta = {delta} is at least 1/3, outside the analysed range"));
            }
            let variant = CatalogVariant::Lp2 { delta };
            let (gamma1, gamma2) = (opts.gamma.unwrap_or(g1), opts.gamma.unwrap_or(g2));
            ctx.report.params.delta = Some(delta);
            ctx.report.params.gamma1 = Some(gamma1);
            ctx.report.params.gamma2 = Some(gamma2);
            let a = ctx.subalg1()?;
            let stage = ctx.stage(variant, &[gamma1, gamma2])?;
            let b = ctx.pipeline("subalg3", variant, stage.as_ref(), gamma1, third())?;
            let c = ctx.pipeline("subalg4", variant, stage.as_ref(), gamma2, delta)?;
            let y1 = constants_y1();
            let d = crate::itp::to_f64(delta);
            ctx.report.theoretical_ratio = alpha.map(|a| a + 1.0 + y1 + constants::gamma2(y1) + 2.0 * d);
            cheapest(vec![a, b, c])
        }
    };
    Ok(ctx.finish(sol))
}

fn constants_y0() -> f64 {
    constants::solve_y0().expect("y0 root is bracketed").value
}

fn constants_y1() -> f64 {
    constants::solve_y1().expect("y1 root is bracketed").0.value
}

/// Fixed-capacity meta-algorithm: the better of matching+ITP and LP-1 rounding.
pub fn alg1(inst: &Instance, seed: u64, gamma: Option<f64>, tour: Option<Tour>) -> Result<SolveOutput> {
    run_algorithm(inst, AlgorithmId::Alg1, &SolveOptions { delta: None, gamma, seed, tour })
}

/// General-capacity meta-algorithm: the best of matching+ITP and the two
/// LP-2 pipelines.
pub fn alg2(inst: &Instance, delta: Rational, seed: u64, tour: Option<Tour>) -> Result<SolveOutput> {
    run_algorithm(inst, AlgorithmId::Alg2, &SolveOptions { delta: Some(delta), gamma: None, seed, tour })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{line3, line_instance};
    use crate::tsp::exact_tsp;

    fn line3_tour() -> Tour {
        exact_tsp(&line3(), &[1, 2, 3]).unwrap()
    }

    #[test]
    fn zero_gamma_pipeline_is_pure_itp() {
        let inst = line3();
        let (sol, run) = lp_itp_pipeline(&inst, CatalogVariant::Lp1, 0.0, third(), 9, &line3_tour()).unwrap();
        assert!(!run.lp_solved);
        assert_eq!(run.leftover, vec![1, 2, 3]);
        assert_eq!(sol.cost(), 8.0);
    }

    #[test]
    fn large_gamma_covers_everything() {
        let inst = line3();
        let mut empty = 0;
        for seed in 0..200 {
            let (sol, run) = lp_itp_pipeline(&inst, CatalogVariant::Lp1, 10.0, third(), seed, &line3_tour()).unwrap();
            assert!(run.lp_solved);
            assert_eq!(check_feasible(&inst, &sol), Ok(()));
            if run.leftover.is_empty() {
                empty += 1;
            }
        }
        assert!(empty as f64 >= 200.0 * (1.0 - 3.0 * (-10f64).exp()) - 1.0);
    }

    #[test]
    fn lp2_wide_delta() {
        let inst = line3();
        let variant = CatalogVariant::Lp2 { delta: Rational::new(2, 5) };
        assert_eq!(cover_set(&inst, variant), vec![1, 2, 3]);
        let (sol, run) = lp_itp_pipeline(&inst, variant, 0.0, Rational::new(2, 5), 1, &line3_tour()).unwrap();
        assert_eq!(check_feasible(&inst, &sol), Ok(()));
        assert!(run.itp_cost <= run.itp_bound + 1e-9);
    }

    #[test]
    fn meta_algorithms_on_line3() {
        let inst = line3();
        for seed in 0..10 {
            let out = alg1(&inst, seed, None, Some(line3_tour())).unwrap();
            assert_eq!(out.report.cost, 8.0);
            assert!(out.report.feasible);
            let out = alg2(&inst, default_delta(), seed, Some(line3_tour())).unwrap();
            assert_eq!(out.report.cost, 8.0);
            assert_eq!(out.report.branch_costs["subalg1"], 8.0);
        }
    }

    #[test]
    fn single_customer() {
        let inst = line_instance("one", 1, vec![1], &[5.0]).unwrap();
        for alg in AlgorithmId::ALL {
            let out = run_algorithm(&inst, alg, &SolveOptions::default()).unwrap();
            assert_eq!(out.report.cost, 10.0, "{alg}");
            assert!(out.report.feasible);
        }
    }

    #[test]
    fn all_small_cover_set_empty() {
        let inst = line_instance("small", 10, vec![1, 2, 1], &[1.0, 2.0, 4.0]).unwrap();
        let out = alg2(&inst, default_delta(), 0, None).unwrap();
        assert!(!out.report.lp_solved);
        let tour = exact_tsp(&inst, &[1, 2, 3]).unwrap();
        let (plain, _) = delta_itp_plus(&inst, &[1, 2, 3], &tour, third()).unwrap();
        assert_eq!(out.report.branch_costs["subalg3"], plain.cost());
        let (plain, _) = delta_itp_plus(&inst, &[1, 2, 3], &tour, default_delta()).unwrap();
        assert_eq!(out.report.branch_costs["subalg4"], plain.cost());
        assert!(out.report.feasible);
    }

    #[test]
    fn names_round_trip() {
        for a in AlgorithmId::ALL {
            assert_eq!(a.name().parse::<AlgorithmId>().unwrap(), a);
            assert_eq!(serde_json::to_value(a).unwrap(), serde_json::Value::String(a.name().into()));
        }
    }
}
