//! Serving customers of normalized demand above 1/3 with pairs and solos,
//! and the matching-plus-ITP solver built on top of it.
//!
//! No tour can carry three such customers, so any solution restricted to
//! them is a cover by pairs and singletons. The cheapest cover is a
//! maximum-savings matching: pairing `u` and `v` saves
//! `c(r,u) + c(r,v) - c(u,v)` over two trivial tours.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::{Instance, Rational};
use crate::itp::delta_itp;
use crate::matching::max_weight_matching;
use crate::solution::Solution;
use crate::tsp::{Tour, TourQuality};

/// Up to this many big customers the cover is found by exhaustive subset DP.
pub const EXHAUSTIVE_CAP: usize = 12;

/// Savings are scaled to integers of about this magnitude for the blossom
/// solver; relative rounding error is then around `1e-12`.
const WEIGHT_SCALE: f64 = (1u64 << 40) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingMethod {
    Exhaustive,
    Blossom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingPlan {
    pub pairs: Vec<(usize, usize)>,
    pub solos: Vec<usize>,
    pub cost: f64,
    pub method: MatchingMethod,
}

impl MatchingPlan {
    fn from_parts(inst: &Instance, mut pairs: Vec<(usize, usize)>, mut solos: Vec<usize>, method: MatchingMethod) -> Self {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        solos.sort_unstable();
        let cost = pairs.iter().map(|&(u, v)| pair_cost(inst, u, v)).sum::<f64>()
            + solos.iter().map(|&v| 2.0 * inst.radius(v)).sum::<f64>();
        MatchingPlan { pairs, solos, cost, method }
    }

    pub fn to_solution(&self, inst: &Instance) -> Solution {
        let mut sol = Solution::default();
        for &(u, v) in &self.pairs {
            sol.push(Tour::new(inst, &[u, v], TourQuality::Exact), vec![u, v]);
        }
        for &v in &self.solos {
            sol.push(Tour::trivial(inst, v), vec![v]);
        }
        sol
    }
}

fn pair_cost(inst: &Instance, u: usize, v: usize) -> f64 {
    inst.radius(u) + inst.cost(u, v) + inst.radius(v)
}

/// Customers with normalized demand strictly above 1/3, ascending.
pub fn big_customers(inst: &Instance) -> Vec<usize> {
    let third = Rational::new(1, 3);
    inst.customers().filter(|&v| inst.dhat(v) > third).collect()
}

fn pair_fits(inst: &Instance, u: usize, v: usize) -> bool {
    inst.demand(u) as u64 + inst.demand(v) as u64 <= inst.capacity() as u64
}

/// Exact cheapest pair/solo cover of `bigs` by DP over subsets, anchoring
/// each step at the lowest remaining element.
pub fn cover_exhaustive(inst: &Instance, bigs: &[usize]) -> MatchingPlan {
    let m = bigs.len();
    assert!(m <= 24, "exhaustive cover limited to 24 customers");
    let full = (1usize << m) - 1;
    // best[mask] = cheapest cover of the elements in mask; choice = partner
    let mut best = vec![f64::INFINITY; 1 << m];
    let mut choice = vec![usize::MAX; 1 << m];
    best[0] = 0.0;
    for mask in 1..=full {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut b = best[rest] + 2.0 * inst.radius(bigs[i]);
        let mut c = i;
        let mut others = rest;
        while others != 0 {
            let j = others.trailing_zeros() as usize;
            others &= others - 1;
            if pair_fits(inst, bigs[i], bigs[j]) {
                let cand = best[rest & !(1 << j)] + pair_cost(inst, bigs[i], bigs[j]);
                if cand < b {
                    b = cand;
                    c = j;
                }
            }
        }
        best[mask] = b;
        choice[mask] = c;
    }
    let mut pairs = Vec::new();
    let mut solos = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let j = choice[mask];
        mask &= !(1 << i);
        if j == i {
            solos.push(bigs[i]);
        } else {
            pairs.push((bigs[i], bigs[j]));
            mask &= !(1 << j);
        }
    }
    MatchingPlan::from_parts(inst, pairs, solos, MatchingMethod::Exhaustive)
}

/// Cheapest cover via maximum-savings matching (blossom algorithm).
pub fn cover_blossom(inst: &Instance, bigs: &[usize]) -> MatchingPlan {
    let mut raw = Vec::new();
    for a in 0..bigs.len() {
        for b in a + 1..bigs.len() {
            let (u, v) = (bigs[a], bigs[b]);
            if pair_fits(inst, u, v) {
                let saving = inst.radius(u) + inst.radius(v) - inst.cost(u, v);
                if saving > 0.0 {
                    raw.push((a, b, saving));
                }
            }
        }
    }
    let top = raw.iter().map(|e| e.2).fold(0.0, f64::max);
    let edges: Vec<(usize, usize, i64)> = raw
        .iter()
        .map(|&(a, b, s)| (a, b, (s / top * WEIGHT_SCALE).round() as i64))
        .filter(|e| e.2 > 0)
        .collect();
    let mate = max_weight_matching(bigs.len(), &edges);
    let mut pairs = Vec::new();
    let mut solos = Vec::new();
    for (a, m) in mate.iter().enumerate() {
        match m {
            Some(b) if *b > a => pairs.push((bigs[a], bigs[*b])),
            Some(_) => {}
            None => solos.push(bigs[a]),
        }
    }
    MatchingPlan::from_parts(inst, pairs, solos, MatchingMethod::Blossom)
}

/// Cheapest pair/solo service of every customer with demand above 1/3.
pub fn serve_big_by_matching(inst: &Instance) -> (MatchingPlan, Solution) {
    let bigs = big_customers(inst);
    let plan = if bigs.len() <= EXHAUSTIVE_CAP {
        cover_exhaustive(inst, &bigs)
    } else {
        cover_blossom(inst, &bigs)
    };
    let sol = plan.to_solution(inst);
    (plan, sol)
}

/// Matching for the big customers, 1/3-ITP along the shortcut tour for the rest.
pub fn subalg1(inst: &Instance, tour: &Tour) -> Result<(Solution, MatchingPlan)> {
    let (plan, mut sol) = serve_big_by_matching(inst);
    let third = Rational::new(1, 3);
    let rest: Vec<usize> = inst.customers().filter(|&v| inst.dhat(v) <= third).collect();
    if !rest.is_empty() {
        let restricted = tour.restrict(inst, &rest)?;
        let (part, _) = delta_itp(inst, &rest, &restricted, third)?;
        sol.extend(part);
    }
    Ok((sol, plan))
}

/// `c(A) + (3/2) sum_{small} 2 d_v c(r,v) + matching_cost`.
pub fn subalg1_bound(inst: &Instance, tour_cost: f64, matching_cost: f64) -> f64 {
    let third = Rational::new(1, 3);
    let small = crate::instance::radial_mass(inst, inst.customers().filter(|&v| inst.dhat(v) <= third));
    tour_cost + 1.5 * small + matching_cost
}
