//! Exact optimum by dynamic programming over customer subsets, and ratio
//! measurement against it.

use serde::{Deserialize, Serialize};

use crate::algorithms::{run_algorithm, AlgorithmId, SolveOptions};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::solution::Solution;
use crate::tsp::{HeldKarp, Tour};

pub const DEFAULT_ORACLE_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub opt_cost: f64,
    /// Optimal tours, one per group of the partition.
    pub tours: Vec<Tour>,
}

impl OracleResult {
    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.tours
            .iter()
            .map(|t| {
                let mut g = t.customers().to_vec();
                g.sort_unstable();
                g
            })
            .collect()
    }

    pub fn to_solution(&self) -> Solution {
        let mut sol = Solution::default();
        for t in &self.tours {
            sol.push(t.clone(), t.customers().to_vec());
        }
        sol
    }
}

pub fn exact_cvrp(inst: &Instance) -> Result<OracleResult> {
    exact_cvrp_capped(inst, DEFAULT_ORACLE_CAP)
}

/// `best[S] = min_T tsp(T) + best[S \ T]` over demand-feasible `T ⊆ S`
/// containing the lowest customer of `S`; one Held-Karp table prices all `T`.
pub fn exact_cvrp_capped(inst: &Instance, cap: usize) -> Result<OracleResult> {
    let n = inst.n();
    if n > cap {
        return Err(Error::InstanceTooLarge { n, cap });
    }
    let all: Vec<usize> = inst.customers().collect();
    let hk = HeldKarp::with_cap(inst, &all, n)?;
    let full = (1usize << n) - 1;
    let k = inst.capacity() as u64;
    let mut load = vec![0u64; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        load[mask] = load[mask & (mask - 1)] + inst.demand(low + 1) as u64;
    }
    let mut tsp = vec![f64::NAN; full + 1];
    let mut best = vec![f64::INFINITY; full + 1];
    let mut pick = vec![0usize; full + 1];
    best[0] = 0.0;
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        // all submasks of `rest`, each joined with `low`
        let mut sub = rest;
        loop {
            let t = sub | low;
            if load[t] <= k {
                if tsp[t].is_nan() {
                    tsp[t] = hk.tour_cost(t);
                }
                let cand = tsp[t] + best[s ^ t];
                if cand < best[s] {
                    best[s] = cand;
                    pick[s] = t;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut tours = Vec::new();
    let mut s = full;
    while s != 0 {
        tours.push(hk.tour(pick[s]));
        s ^= pick[s];
    }
    let opt_cost = tours.iter().map(|t| t.cost).sum();
    Ok(OracleResult { opt_cost, tours })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub opt: f64,
    pub runs: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Worst-case guarantee reported by the algorithm, if any.
    pub bound: Option<f64>,
    pub all_feasible: bool,
}

/// Runs `algorithm` once per seed and compares the costs against the optimum.
pub fn empirical_ratio(inst: &Instance, algorithm: AlgorithmId, seeds: &[u64], base: &SolveOptions) -> Result<RatioStats> {
    let opt = exact_cvrp(inst)?.opt_cost;
    let mut ratios = Vec::with_capacity(seeds.len());
    let mut bound = None;
    let mut all_feasible = true;
    for &seed in seeds {
        let opts = SolveOptions { seed, ..base.clone() };
        let out = run_algorithm(inst, algorithm, &opts)?;
        all_feasible &= out.report.feasible;
        bound = out.report.theoretical_ratio;
        ratios.push(if opt > 0.0 { out.report.cost / opt } else { 1.0 });
    }
    let runs = ratios.len();
    Ok(RatioStats {
        opt,
        runs,
        min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        mean: ratios.iter().sum::<f64>() / runs.max(1) as f64,
        max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        bound,
        all_feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{line3, line_instance};
    use crate::solution::check_feasible;

    #[test]
    fn line3_optimum() {
        let r = exact_cvrp(&line3()).unwrap();
        assert_eq!(r.opt_cost, 8.0);
        let mut g = r.groups();
        g.sort();
        assert_eq!(g, vec![vec![1], vec![2, 3]]);
        assert_eq!(check_feasible(&line3(), &r.to_solution()), Ok(()));
    }

    #[test]
    fn forced_singletons() {
        let inst = line_instance("full", 3, vec![3, 3], &[2.0, 5.0]).unwrap();
        assert_eq!(exact_cvrp(&inst).unwrap().opt_cost, 14.0);
        let one = line_instance("one", 2, vec![2], &[5.0]).unwrap();
        assert_eq!(exact_cvrp(&one).unwrap().opt_cost, 10.0);
    }

    #[test]
    fn too_large() {
        let inst = crate::generate::gen_instance(
            crate::generate::MetricKind::Euclidean,
            15,
            3,
            crate::generate::DemandLaw::Uniform,
            1,
        );
        assert_eq!(exact_cvrp(&inst), Err(Error::InstanceTooLarge { n: 15, cap: 14 }));
    }

    #[test]
    fn line3_ratios() {
        let seeds: Vec<u64> = (0..20).collect();
        let s = empirical_ratio(&line3(), AlgorithmId::Alg1, &seeds, &SolveOptions::default()).unwrap();
        assert_eq!((s.min, s.mean, s.max), (1.0, 1.0, 1.0));
        let s = empirical_ratio(&line3(), AlgorithmId::Subalg1, &[0], &SolveOptions::default()).unwrap();
        assert_eq!(s.mean, 1.0);
    }
}
