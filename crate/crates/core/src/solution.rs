//! Solutions and the unsplittable feasibility check.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, DEPOT};
use crate::tsp::Tour;

/// A set of tours; `served[t]` lists the customers whose whole demand is
/// delivered by `tours[t]`. A tour may pass customers it does not serve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub tours: Vec<Tour>,
    pub served: Vec<Vec<usize>>,
}

impl Solution {
    pub fn push(&mut self, tour: Tour, served: Vec<usize>) {
        self.tours.push(tour);
        self.served.push(served);
    }

    pub fn extend(&mut self, other: Solution) {
        self.tours.extend(other.tours);
        self.served.extend(other.served);
    }

    pub fn cost(&self) -> f64 {
        self.tours.iter().map(|t| t.cost).sum()
    }

    /// Customer -> index of the serving tour (last one wins on duplicates).
    pub fn assignment(&self) -> BTreeMap<usize, usize> {
        let mut map = BTreeMap::new();
        for (t, list) in self.served.iter().enumerate() {
            for &v in list {
                map.insert(v, t);
            }
        }
        map
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MalformedTour { tour: usize },
    CostMismatch { tour: usize, stated: f64, actual: f64 },
    UnknownCustomer { v: usize },
    CapacityExceeded { tour: usize, load: u64 },
    CustomerUnserved { v: usize },
    CustomerMultiplyServed { v: usize },
    ServedOffTour { v: usize, tour: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MalformedTour { tour } => write!(f, "tour {tour} does not start and end at the depot"),
            Violation::CostMismatch { tour, stated, actual } => {
                write!(f, "tour {tour} states cost {stated} but its edges sum to {actual}")
            }
            Violation::UnknownCustomer { v } => write!(f, "vertex {v} is not a customer"),
            Violation::CapacityExceeded { tour, load } => write!(f, "tour {tour} carries load {load}"),
            Violation::CustomerUnserved { v } => write!(f, "customer {v} is not served"),
            Violation::CustomerMultiplyServed { v } => write!(f, "customer {v} is served more than once"),
            Violation::ServedOffTour { v, tour } => write!(f, "customer {v} is assigned to tour {tour} which does not visit it"),
        }
    }
}

/// Checks tours are well formed and every customer is served, in full, by
/// exactly one tour that visits it without exceeding the capacity.
pub fn check_feasible(inst: &Instance, sol: &Solution) -> Result<(), Violation> {
    if sol.served.len() != sol.tours.len() {
        return Err(Violation::MalformedTour { tour: sol.tours.len().min(sol.served.len()) });
    }
    for (t, tour) in sol.tours.iter().enumerate() {
        let vs = &tour.vertices;
        if vs.len() < 2 || vs[0] != DEPOT || vs[vs.len() - 1] != DEPOT {
            return Err(Violation::MalformedTour { tour: t });
        }
        if let Some(&v) = tour.customers().iter().find(|&&v| !inst.is_customer(v)) {
            return Err(Violation::UnknownCustomer { v });
        }
        let actual = inst.walk_cost(vs);
        if (actual - tour.cost).abs() > 1e-9 * actual.abs().max(1.0) {
            return Err(Violation::CostMismatch { tour: t, stated: tour.cost, actual });
        }
    }
    let mut count = vec![0usize; inst.n() + 1];
    for (t, list) in sol.served.iter().enumerate() {
        let mut load = 0u64;
        for &v in list {
            if !inst.is_customer(v) {
                return Err(Violation::UnknownCustomer { v });
            }
            if !sol.tours[t].visits(v) {
                return Err(Violation::ServedOffTour { v, tour: t });
            }
            count[v] += 1;
            load += inst.demand(v) as u64;
        }
        if load > inst.capacity() as u64 {
            return Err(Violation::CapacityExceeded { tour: t, load });
        }
    }
    for v in inst.customers() {
        match count[v] {
            0 => return Err(Violation::CustomerUnserved { v }),
            1 => {}
            _ => return Err(Violation::CustomerMultiplyServed { v }),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::line3;

    fn line3_solution() -> Solution {
        let inst = line3();
        let mut sol = Solution::default();
        sol.push(Tour::new(&inst, &[1], crate::tsp::TourQuality::External), vec![1]);
        sol.push(Tour::new(&inst, &[2, 3], crate::tsp::TourQuality::External), vec![2, 3]);
        sol
    }

    #[test]
    fn natural_assignment_passes() {
        assert_eq!(check_feasible(&line3(), &line3_solution()), Ok(()));
        assert_eq!(line3_solution().cost(), 8.0);
    }

    #[test]
    fn off_tour_assignment() {
        let mut sol = line3_solution();
        sol.served = vec![vec![1, 2], vec![3]];
        assert_eq!(check_feasible(&line3(), &sol), Err(Violation::ServedOffTour { v: 2, tour: 0 }));
    }

    #[test]
    fn unserved_and_duplicated() {
        let mut sol = line3_solution();
        sol.served[1] = vec![2];
        assert_eq!(check_feasible(&line3(), &sol), Err(Violation::CustomerUnserved { v: 3 }));
        let mut sol = line3_solution();
        sol.push(Tour::trivial(&line3(), 1), vec![1]);
        assert_eq!(check_feasible(&line3(), &sol), Err(Violation::CustomerMultiplyServed { v: 1 }));
    }

    #[test]
    fn capacity_and_cost() {
        let inst = line3();
        let mut sol = Solution::default();
        sol.push(Tour::new(&inst, &[1, 2, 3], crate::tsp::TourQuality::External), vec![1, 2, 3]);
        assert_eq!(check_feasible(&inst, &sol), Err(Violation::CapacityExceeded { tour: 0, load: 3 }));
        let mut sol = line3_solution();
        sol.tours[0].cost = 1.0;
        assert!(matches!(check_feasible(&inst, &sol), Err(Violation::CostMismatch { tour: 0, .. })));
    }
}
