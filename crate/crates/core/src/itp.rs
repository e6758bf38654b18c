//! Iterated tour partitioning: classic ITP, delta-ITP and delta-ITP+.
//!
//! The customers of a tour are laid end to end on a line, customer `i`
//! occupying `[D_{i-1}, D_i)` with `D_i` the prefix sum of normalized
//! demands. Breakpoints sit at `eta + m (1 - delta)`. A customer whose
//! interval strictly contains one breakpoint is absorbed whole into a
//! neighbouring segment when its demand fits there, otherwise it gets a
//! trivial tour; a customer containing two breakpoints always gets a trivial
//! tour. Each remaining segment becomes one tour.
//!
//! Charging every cut to the customer owning the breakpoint gives, per
//! offset, `cost <= c(A) + sum_v charge_v` with `charge_v` in
//! `{0, 2 c(r,v), 4 c(r,v)}`. The right-hand segment always has room when
//! the left overhang is at most `delta`, so averaging over a uniform offset
//! yields the delta-ITP guarantee. Cost is piecewise constant in the offset
//! with jumps only at `D_i mod (1 - delta)`, so the minimum over one offset
//! per piece is no larger than the expectation.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{radial_mass, Instance, Rational};
use crate::solution::Solution;
use crate::tsp::Tour;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    InSegment,
    AbsorbedLeft,
    AbsorbedRight,
    TrivialTour,
}

/// Witness of the partition chosen for the returned solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionTrace {
    pub delta: Rational,
    pub offset: Rational,
    pub breakpoints: Vec<Rational>,
    /// `(customer, disposition)` in tour order.
    pub dispositions: Vec<(usize, Disposition)>,
    pub segments: Vec<Vec<usize>>,
    pub trivial: Vec<usize>,
    pub candidates: usize,
    /// Unweighted mean over the candidate offsets.
    pub mean_candidate_cost: f64,
    /// Exact expectation over a uniform offset in `[0, 1 - delta)`.
    pub expected_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Classic ITP: `c(A) + sum 4 d_v c(r,v)`.
    Classic,
    /// delta-ITP.
    Threshold,
    /// delta-ITP+ (large customers on trivial tours).
    ThresholdPlus,
}

struct Partition {
    breakpoints: Vec<Rational>,
    dispositions: Vec<(usize, Disposition)>,
    segments: Vec<Vec<usize>>,
    trivial: Vec<usize>,
    cost: f64,
}

/// Cost of splitting the tour between `u` and `w` (either may be the depot).
fn cut_overhead(inst: &Instance, u: usize, w: usize) -> f64 {
    inst.radius(u) + inst.radius(w) - inst.cost(u, w)
}

fn floor_div(a: Rational, b: Rational) -> i64 {
    (a / b).floor().to_integer()
}

fn partition_at(inst: &Instance, order: &[usize], dhat: &[Rational], delta: Rational, eta: Rational) -> Partition {
    let n = order.len();
    let len = Rational::one() - delta;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(Rational::zero());
    for d in dhat {
        let last = *prefix.last().unwrap();
        prefix.push(last + *d);
    }
    let total = prefix[n];
    let mut breakpoints = Vec::new();
    let mut b = eta;
    while b < total {
        breakpoints.push(b);
        b += len;
    }
    // Segment s covers [b_{s-1}, b_s) with b_{-1} = 0.
    let seg_of = |x: Rational| -> usize {
        if x < eta {
            0
        } else {
            (floor_div(x - eta, len) + 1) as usize
        }
    };
    let nseg = breakpoints.len() + 1;
    // Number of breakpoints strictly inside each customer's interval.
    let mut interior = vec![0usize; n];
    let mut home = vec![0usize; n];
    let mut inside = vec![Rational::zero(); nseg];
    for i in 0..n {
        let (lo, hi) = (prefix[i], prefix[i + 1]);
        let s_lo = seg_of(lo);
        // breakpoints b with lo < b < hi: those with index in [s_lo, seg_of(hi-)).
        // seg_of(hi) counts breakpoints <= hi; drop one if hi itself is a breakpoint.
        let mut s_hi = seg_of(hi);
        if hi >= eta && (hi - eta) % len == Rational::zero() {
            s_hi -= 1;
        }
        interior[i] = s_hi - s_lo;
        home[i] = s_lo;
        if interior[i] == 0 {
            inside[s_lo] += dhat[i];
        }
    }
    let one = Rational::one();
    let mut absorbed = vec![Rational::zero(); nseg];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nseg];
    let mut dispositions = Vec::with_capacity(n);
    let mut trivial = Vec::new();
    for i in 0..n {
        let v = order[i];
        let disp = match interior[i] {
            0 => {
                members[home[i]].push(v);
                Disposition::InSegment
            }
            1 => {
                let (left, right) = (home[i], home[i] + 1);
                let fits_left = inside[left] + absorbed[left] + dhat[i] <= one;
                let fits_right = inside[right] + absorbed[right] + dhat[i] <= one;
                let choose_left = match (fits_left, fits_right) {
                    (true, true) => {
                        // Prefer the cheaper cut: after v (left) or before v (right).
                        let prev = if i == 0 { 0 } else { order[i - 1] };
                        let next = if i + 1 == n { 0 } else { order[i + 1] };
                        cut_overhead(inst, v, next) <= cut_overhead(inst, prev, v)
                    }
                    (l, _) => l,
                };
                if choose_left {
                    absorbed[left] += dhat[i];
                    members[left].push(v);
                    Disposition::AbsorbedLeft
                } else if fits_right {
                    absorbed[right] += dhat[i];
                    members[right].push(v);
                    Disposition::AbsorbedRight
                } else {
                    trivial.push(v);
                    Disposition::TrivialTour
                }
            }
            _ => {
                trivial.push(v);
                Disposition::TrivialTour
            }
        };
        dispositions.push((v, disp));
    }
    let segments: Vec<Vec<usize>> = members.into_iter().filter(|m| !m.is_empty()).collect();
    let cost = segments
        .iter()
        .map(|s| {
            let path: f64 = s.windows(2).map(|w| inst.cost(w[0], w[1])).sum();
            inst.radius(s[0]) + path + inst.radius(s[s.len() - 1])
        })
        .sum::<f64>()
        + trivial.iter().map(|&v| 2.0 * inst.radius(v)).sum::<f64>();
    Partition { breakpoints, dispositions, segments, trivial, cost }
}

fn partition_solution(inst: &Instance, p: &Partition) -> Solution {
    let mut sol = Solution::default();
    for seg in &p.segments {
        sol.push(Tour::new(inst, seg, crate::tsp::TourQuality::External), seg.clone());
    }
    for &v in &p.trivial {
        sol.push(Tour::trivial(inst, v), vec![v]);
    }
    sol
}

fn check_tour_covers(tour: &Tour, subset: &[usize]) -> Result<()> {
    let mut a: Vec<usize> = tour.customers().to_vec();
    let mut b = subset.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    b.dedup();
    if a != b {
        return Err(Error::TourMismatch);
    }
    Ok(())
}

/// delta-ITP over the customers of `tour` (which must visit exactly
/// `subset`). `delta = 0` is the classic ITP.
pub fn delta_itp(inst: &Instance, subset: &[usize], tour: &Tour, delta: Rational) -> Result<(Solution, PartitionTrace)> {
    if delta < Rational::zero() || delta >= Rational::new(1, 2) {
        return Err(Error::BadDelta(delta.to_string()));
    }
    check_tour_covers(tour, subset)?;
    let order = tour.customers().to_vec();
    let dhat: Vec<Rational> = order.iter().map(|&v| inst.dhat(v)).collect();
    if let Some(i) = dhat.iter().position(|d| *d > Rational::one()) {
        return Err(Error::DemandExceedsCapacity { v: order[i] });
    }
    if order.is_empty() {
        let trace = PartitionTrace {
            delta,
            offset: Rational::zero(),
            breakpoints: vec![],
            dispositions: vec![],
            segments: vec![],
            trivial: vec![],
            candidates: 0,
            mean_candidate_cost: 0.0,
            expected_cost: 0.0,
        };
        return Ok((Solution::default(), trace));
    }
    let len = Rational::one() - delta;
    let mut residues: Vec<Rational> = Vec::with_capacity(order.len() + 1);
    let mut acc = Rational::zero();
    residues.push(acc);
    for d in &dhat {
        acc += *d;
        residues.push(acc - len * Rational::from_integer(floor_div(acc, len)));
    }
    residues.sort();
    residues.dedup();
    // One representative per open piece, plus the piece endpoints.
    let mut candidates: Vec<(Rational, Rational)> = Vec::new();
    for (i, &r) in residues.iter().enumerate() {
        let next = residues.get(i + 1).copied().unwrap_or(len);
        candidates.push((r, Rational::zero()));
        candidates.push(((r + next) / Rational::from_integer(2), next - r));
    }
    let mut best: Option<(Partition, Rational)> = None;
    let mut sum = 0.0;
    let mut expected = 0.0;
    let len_f = to_f64(len);
    for &(eta, weight) in &candidates {
        let p = partition_at(inst, &order, &dhat, delta, eta);
        sum += p.cost;
        expected += p.cost * to_f64(weight) / len_f;
        let better = match &best {
            None => true,
            Some((b, b_eta)) => p.cost < b.cost || (p.cost == b.cost && eta < *b_eta),
        };
        if better {
            best = Some((p, eta));
        }
    }
    let (p, eta) = best.expect("at least one candidate offset");
    let trace = PartitionTrace {
        delta,
        offset: eta,
        breakpoints: p.breakpoints.clone(),
        dispositions: p.dispositions.clone(),
        segments: p.segments.clone(),
        trivial: p.trivial.clone(),
        candidates: candidates.len(),
        mean_candidate_cost: sum / candidates.len() as f64,
        expected_cost: expected,
    };
    Ok((partition_solution(inst, &p), trace))
}

/// delta-ITP+: large customers (`d_v > 1/2`) on trivial tours, delta-ITP on
/// the rest. The tour is shortcut to the non-large part of `subset`.
pub fn delta_itp_plus(inst: &Instance, subset: &[usize], tour: &Tour, delta: Rational) -> Result<(Solution, PartitionTrace)> {
    let class = inst.classify_subset(subset, delta.min(Rational::new(1, 2)));
    let rest: Vec<usize> = class.small.iter().chain(class.big.iter()).copied().collect();
    let restricted = tour.restrict(inst, &rest)?;
    let (mut sol, trace) = delta_itp(inst, &rest, &restricted, delta)?;
    let mut large = class.large;
    large.sort_unstable();
    for v in large {
        sol.push(Tour::trivial(inst, v), vec![v]);
    }
    Ok((sol, trace))
}

pub(crate) fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Closed-form ITP guarantees over `subset`.
pub fn itp_bound(inst: &Instance, subset: &[usize], tour_cost: f64, delta: Rational, variant: BoundVariant) -> f64 {
    match variant {
        BoundVariant::Classic => tour_cost + 2.0 * radial_mass(inst, subset.iter().copied()),
        BoundVariant::Threshold | BoundVariant::ThresholdPlus => {
            let class = inst.classify_subset(subset, delta);
            let small = radial_mass(inst, class.small.iter().copied());
            let mut non_small = class.big.clone();
            let mut large_term = 0.0;
            if variant == BoundVariant::Threshold {
                non_small.extend(class.large.iter().copied());
            } else {
                large_term = class.large.iter().map(|&v| 2.0 * inst.radius(v)).sum();
            }
            let ns_mass = radial_mass(inst, non_small.iter().copied());
            let ns_plain: f64 = non_small.iter().map(|&v| 2.0 * inst.radius(v)).sum();
            let inv = to_f64(Rational::one() / (Rational::one() - delta));
            let ratio = to_f64(delta / (Rational::one() - delta));
            tour_cost + inv * small + 2.0 * inv * ns_mass - ratio * ns_plain + large_term
        }
    }
}

/// Per-customer dispositions as a map, handy for assertions.
pub fn disposition_map(trace: &PartitionTrace) -> BTreeMap<usize, Disposition> {
    trace.dispositions.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{line3, line_instance};
    use crate::solution::check_feasible;
    use crate::tsp::exact_tsp;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    /// Expected cost over a uniform offset, by brute-force sampling of a
    /// fine grid, for comparison with the piecewise computation.
    fn grid_expectation(inst: &Instance, tour: &Tour, delta: Rational, steps: i64) -> f64 {
        let order = tour.customers().to_vec();
        let dhat: Vec<Rational> = order.iter().map(|&v| inst.dhat(v)).collect();
        let len = Rational::one() - delta;
        let mut sum = 0.0;
        for s in 0..steps {
            let eta = len * Rational::new(2 * s + 1, 2 * steps);
            sum += partition_at(inst, &order, &dhat, delta, eta).cost;
        }
        sum / steps as f64
    }

    #[test]
    fn line3_best_offset() {
        let inst = line3();
        let tour = exact_tsp(&inst, &[1, 2, 3]).unwrap();
        let (sol, trace) = delta_itp(&inst, &[1, 2, 3], &tour, r(1, 3)).unwrap();
        assert_eq!(sol.cost(), 8.0);
        assert!(check_feasible(&inst, &sol).is_ok());
        let mut groups: Vec<Vec<usize>> = sol.served.clone();
        groups.sort();
        assert_eq!(groups, vec![vec![1], vec![2, 3]]);
        assert_eq!(itp_bound(&inst, &[1, 2, 3], 6.0, r(1, 3), BoundVariant::Threshold), 18.0);
        assert!(trace.mean_candidate_cost >= sol.cost());
        assert!(trace.expected_cost >= sol.cost());
    }

    #[test]
    fn line3_offset_half_absorbs_left() {
        let inst = line3();
        let order = [1, 2, 3];
        let dhat = [r(1, 2); 3];
        let p = partition_at(&inst, &order, &dhat, r(1, 3), r(1, 2));
        assert_eq!(p.breakpoints, vec![r(1, 2), r(7, 6)]);
        assert_eq!(p.dispositions[2], (3, Disposition::AbsorbedLeft));
        assert_eq!(p.cost, 8.0);
    }

    #[test]
    fn classic_itp_bound() {
        let inst = line3();
        let tour = exact_tsp(&inst, &[1, 2, 3]).unwrap();
        let (sol, _) = delta_itp(&inst, &[1, 2, 3], &tour, Rational::zero()).unwrap();
        let b = itp_bound(&inst, &[1, 2, 3], 6.0, Rational::zero(), BoundVariant::Classic);
        assert_eq!(b, 18.0);
        assert_eq!(itp_bound(&inst, &[1, 2, 3], 6.0, Rational::zero(), BoundVariant::Threshold), 18.0);
        assert!(sol.cost() <= b);
    }

    #[test]
    fn single_customer_trivial() {
        let inst = line3();
        let tour = exact_tsp(&inst, &[2]).unwrap();
        let (sol, _) = delta_itp(&inst, &[2], &tour, r(1, 3)).unwrap();
        assert_eq!(sol.cost(), 4.0);
        assert_eq!(sol.tours.len(), 1);
    }

    #[test]
    fn plus_serves_large_trivially() {
        let inst = line_instance("k4", 4, vec![1, 3], &[1.0, 2.0]).unwrap();
        let tour = exact_tsp(&inst, &[1]).unwrap();
        let (sol, _) = delta_itp_plus(&inst, &[1, 2], &tour, r(1, 3)).unwrap();
        assert_eq!(sol.cost(), 6.0);
        let b4 = itp_bound(&inst, &[1, 2], 2.0, r(1, 3), BoundVariant::ThresholdPlus);
        assert!((b4 - 6.75).abs() < 1e-12);
        assert!(check_feasible(&inst, &sol).is_ok());
    }

    #[test]
    fn plus_all_large() {
        let inst = line_instance("k4", 4, vec![3, 4], &[1.0, 2.0]).unwrap();
        let tour = exact_tsp(&inst, &[1, 2]).unwrap();
        let (sol, _) = delta_itp_plus(&inst, &[1, 2], &tour, r(1, 3)).unwrap();
        assert_eq!(sol.cost(), 6.0);
    }

    #[test]
    fn plus_equals_plain_without_large() {
        let inst = line3();
        let tour = exact_tsp(&inst, &[1, 2, 3]).unwrap();
        let (a, _) = delta_itp(&inst, &[1, 2, 3], &tour, r(1, 3)).unwrap();
        let (b, _) = delta_itp_plus(&inst, &[1, 2, 3], &tour, r(1, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bound_examples() {
        let inst = line_instance("one", 4, vec![3], &[1.0]).unwrap();
        let b3 = itp_bound(&inst, &[1], 0.0, r(1, 3), BoundVariant::Threshold);
        let b4 = itp_bound(&inst, &[1], 0.0, r(1, 3), BoundVariant::ThresholdPlus);
        assert!((b3 - 3.5).abs() < 1e-12);
        assert_eq!(b4, 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        let inst = line3();
        let tour = exact_tsp(&inst, &[1, 2]).unwrap();
        assert_eq!(delta_itp(&inst, &[1, 2, 3], &tour, r(1, 3)).unwrap_err(), Error::TourMismatch);
        assert!(matches!(delta_itp(&inst, &[1, 2], &tour, r(1, 2)), Err(Error::BadDelta(_))));
    }

    #[test]
    fn piecewise_expectation_matches_grid() {
        use crate::generate::{gen_instance, DemandLaw, MetricKind};
        use crate::tsp::approx_tsp;
        for seed in 0..5 {
            let inst = gen_instance(MetricKind::Euclidean, 12, 7, DemandLaw::Uniform, seed);
            let all: Vec<usize> = inst.customers().collect();
            let tour = approx_tsp(&inst, &all).unwrap();
            for delta in [r(0, 1), r(1, 10), r(1, 3)] {
                let (_, trace) = delta_itp(&inst, &all, &tour, delta).unwrap();
                let grid = grid_expectation(&inst, &tour, delta, 4000);
                assert!((trace.expected_cost - grid).abs() < 0.02 * grid, "{} vs {grid}", trace.expected_cost);
            }
        }
    }
}
