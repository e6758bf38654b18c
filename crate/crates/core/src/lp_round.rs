//! Tour catalogs, the covering LP over them, and independent randomized
//! rounding of its fractional solution.
//!
//! The covering LP `min sum c_T x_T  s.t.  sum_{T ∋ v} x_T >= 1, x >= 0` is
//! solved through its dual `max sum y_v  s.t.  sum_{v ∈ T} y_v <= c_T,
//! y >= 0`, whose all-slack basis is feasible, so a single simplex phase
//! with Bland's rule suffices. The optimal primal is read off the reduced
//! costs of the slack columns and both solutions are checked against each
//! other before anything is returned.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, Rational};
use crate::tsp::{approx_tsp, heldkarp_cap, HeldKarp, Tour};

pub const DEFAULT_CATALOG_CAP: u128 = 5_000_000;

/// Tolerance of the LP certificate (coverage, dual feasibility, gap).
pub const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogVariant {
    /// Every demand-feasible customer set.
    Lp1,
    /// Demand-feasible sets of customers with normalized demand above `delta`.
    Lp2 { delta: Rational },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogTour {
    /// Customers in visiting order of the priced tour.
    pub order: Vec<usize>,
    pub cost: f64,
}

impl CatalogTour {
    pub fn customers_sorted(&self) -> Vec<usize> {
        let mut c = self.order.clone();
        c.sort_unstable();
        c
    }

    pub fn covers(&self, v: usize) -> bool {
        self.order.contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourCatalog {
    pub variant: CatalogVariant,
    pub tours: Vec<CatalogTour>,
    pub cover_set: Vec<usize>,
    /// False when some set was too large for Held-Karp and priced by MST doubling.
    pub exact: bool,
}

/// Number of non-empty subsets of `ground` with total demand at most `k`,
/// counting stops once `cap` is exceeded.
fn count_feasible(demands: &[u64], k: u64, cap: u128) -> u128 {
    fn rec(i: usize, load: u64, demands: &[u64], k: u64, cap: u128, count: &mut u128) {
        for j in i..demands.len() {
            if *count > cap {
                return;
            }
            if load + demands[j] <= k {
                *count += 1;
                rec(j + 1, load + demands[j], demands, k, cap, count);
            }
        }
    }
    let mut count = 0;
    rec(0, 0, demands, k, cap, &mut count);
    count
}

fn collect_feasible(ground: &[usize], demands: &[u64], k: u64) -> Vec<Vec<usize>> {
    fn rec(i: usize, load: u64, cur: &mut Vec<usize>, g: &[usize], d: &[u64], k: u64, out: &mut Vec<Vec<usize>>) {
        for j in i..g.len() {
            if load + d[j] <= k {
                cur.push(g[j]);
                out.push(cur.clone());
                rec(j + 1, load + d[j], cur, g, d, k, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, 0, &mut Vec::new(), ground, demands, k, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Ground set of a catalog variant, ascending.
pub fn cover_set(inst: &Instance, variant: CatalogVariant) -> Vec<usize> {
    match variant {
        CatalogVariant::Lp1 => inst.customers().collect(),
        CatalogVariant::Lp2 { delta } => inst.customers().filter(|&v| inst.dhat(v) > delta).collect(),
    }
}

/// Every demand-feasible set of the variant's ground set, priced by an
/// optimal tour, ordered by size and then lexicographically.
pub fn enumerate_tours(inst: &Instance, variant: CatalogVariant, size_cap: u128) -> Result<TourCatalog> {
    if let CatalogVariant::Lp2 { delta } = variant {
        if delta <= Rational::zero() || delta >= Rational::new(1, 2) {
            return Err(Error::BadDelta(delta.to_string()));
        }
    }
    let ground = cover_set(inst, variant);
    let demands: Vec<u64> = ground.iter().map(|&v| inst.demand(v) as u64).collect();
    let k = inst.capacity() as u64;
    let count = count_feasible(&demands, k, size_cap);
    if count > size_cap {
        return Err(Error::CatalogTooLarge { estimate: count, cap: size_cap });
    }
    let cap = heldkarp_cap();
    let mut exact = true;
    let mut tours = Vec::with_capacity(count as usize);
    for set in collect_feasible(&ground, &demands, k) {
        let tour: Tour = if set.len() <= cap {
            let hk = HeldKarp::with_cap(inst, &set, cap)?;
            hk.tour((1 << set.len()) - 1)
        } else {
            exact = false;
            approx_tsp(inst, &set)?
        };
        tours.push(CatalogTour { order: tour.customers().to_vec(), cost: tour.cost });
    }
    Ok(TourCatalog { variant, tours, cover_set: ground, exact })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    /// One value per catalog tour, in catalog order.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Dual prices, one per cover-set customer.
    pub duals: Vec<f64>,
    pub dual_objective: f64,
    /// Largest coverage shortfall `max_v (1 - sum_{T ∋ v} x_T)^+`.
    pub coverage_residual: f64,
    /// Largest dual constraint violation.
    pub dual_residual: f64,
    pub pivots: usize,
}

/// Condensed simplex tableau for `max d·x` over `A x <= b`, `x >= 0`, `b >= 0`.
struct Tableau {
    a: Vec<f64>,
    b: Vec<f64>,
    d: Vec<f64>,
    z: f64,
    rows: usize,
    cols: usize,
    /// Variable labels: `0..cols` are originals, `cols..cols + rows` slacks.
    row_var: Vec<usize>,
    col_var: Vec<usize>,
}

const PIVOT_EPS: f64 = 1e-12;

impl Tableau {
    fn pivot(&mut self, p: usize, q: usize) {
        let (rows, cols) = (self.rows, self.cols);
        let piv = self.a[p * cols + q];
        let prow: Vec<f64> = self.a[p * cols..(p + 1) * cols].to_vec();
        let bp = self.b[p] / piv;
        for i in 0..rows {
            if i == p {
                continue;
            }
            let f = self.a[i * cols + q];
            if f == 0.0 {
                continue;
            }
            let f = f / piv;
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for j in 0..cols {
                row[j] -= f * prow[j];
            }
            row[q] = -f;
            self.b[i] -= f * self.b[p];
            if self.b[i] < 0.0 && self.b[i] > -1e-11 {
                self.b[i] = 0.0;
            }
        }
        let dq = self.d[q] / piv;
        for j in 0..cols {
            self.d[j] -= dq * prow[j];
        }
        self.d[q] = -dq;
        self.z += dq * self.b[p];
        let row = &mut self.a[p * cols..(p + 1) * cols];
        for x in row.iter_mut() {
            *x /= piv;
        }
        row[q] = 1.0 / piv;
        self.b[p] = bp;
        std::mem::swap(&mut self.row_var[p], &mut self.col_var[q]);
    }

    /// Bland's rule: lowest-labelled improving column, lowest-labelled
    /// minimum-ratio row.
    fn solve(&mut self, max_pivots: usize) -> Result<usize> {
        let mut pivots = 0;
        loop {
            let q = (0..self.cols).filter(|&j| self.d[j] > PIVOT_EPS).min_by_key(|&j| self.col_var[j]);
            let Some(q) = q else { return Ok(pivots) };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.rows {
                let aiq = self.a[i * self.cols + q];
                if aiq > PIVOT_EPS {
                    let ratio = self.b[i] / aiq;
                    best = match best {
                        None => Some((ratio, i)),
                        Some((r, bi)) => {
                            if ratio < r - 1e-15 || (ratio <= r + 1e-15 && self.row_var[i] < self.row_var[bi]) {
                                Some((ratio, i))
                            } else {
                                Some((r, bi))
                            }
                        }
                    };
                }
            }
            let Some((_, p)) = best else {
                // Unbounded dual: some customer lies in no tour.
                return Err(Error::Numerical(format!("dual unbounded along column {}", self.col_var[q])));
            };
            self.pivot(p, q);
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::Numerical(format!("no convergence after {pivots} pivots")));
            }
        }
    }
}

/// Optimal fractional cover of `cover_set` by catalog tours, certified by
/// its dual solution to [`LP_TOL`].
pub fn solve_covering_lp(catalog: &TourCatalog) -> Result<LpSolution> {
    let n = catalog.cover_set.len();
    let m = catalog.tours.len();
    if n == 0 {
        return Ok(LpSolution {
            x: vec![0.0; m],
            objective: 0.0,
            duals: vec![],
            dual_objective: 0.0,
            coverage_residual: 0.0,
            dual_residual: 0.0,
            pivots: 0,
        });
    }
    let index = |v: usize| catalog.cover_set.binary_search(&v).ok();
    for &v in &catalog.cover_set {
        if !catalog.tours.iter().any(|t| t.covers(v)) {
            return Err(Error::Infeasible { v });
        }
    }
    let mut a = vec![0.0; m * n];
    for (t, tour) in catalog.tours.iter().enumerate() {
        for &v in &tour.order {
            if let Some(j) = index(v) {
                a[t * n + j] = 1.0;
            }
        }
    }
    let mut tab = Tableau {
        a,
        b: catalog.tours.iter().map(|t| t.cost).collect(),
        d: vec![1.0; n],
        z: 0.0,
        rows: m,
        cols: n,
        row_var: (n..n + m).collect(),
        col_var: (0..n).collect(),
    };
    let pivots = tab.solve(50 * (m + n) + 1000)?;

    let mut y = vec![0.0; n];
    for (i, &var) in tab.row_var.iter().enumerate() {
        if var < n {
            y[var] = tab.b[i].max(0.0);
        }
    }
    let mut x = vec![0.0; m];
    for (j, &var) in tab.col_var.iter().enumerate() {
        if var >= n {
            x[var - n] = (-tab.d[j]).clamp(0.0, 1.0);
        }
    }
    let objective: f64 = x.iter().zip(&catalog.tours).map(|(xt, t)| xt * t.cost).sum();
    let dual_objective: f64 = y.iter().sum();
    let mut coverage = vec![0.0; n];
    let mut dual_residual: f64 = 0.0;
    for (t, tour) in catalog.tours.iter().enumerate() {
        let mut load = 0.0;
        for &v in &tour.order {
            if let Some(j) = index(v) {
                coverage[j] += x[t];
                load += y[j];
            }
        }
        dual_residual = dual_residual.max(load - tour.cost);
    }
    let coverage_residual = coverage.iter().map(|c| (1.0 - c).max(0.0)).fold(0.0, f64::max);
    let scale = objective.abs().max(1.0);
    let gap = (objective - dual_objective).abs();
    if coverage_residual > LP_TOL || dual_residual > LP_TOL * scale || gap > LP_TOL * scale {
        return Err(Error::Numerical(format!(
            "certificate failed: coverage residual {coverage_residual:e}, dual residual {dual_residual:e}, gap {gap:e}"
        )));
    }
    Ok(LpSolution { x, objective, duals: y, dual_objective, coverage_residual, dual_residual, pivots })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingOutcome {
    /// Selected catalog indices, ascending.
    pub selected: Vec<usize>,
    /// Cover-set customers not visited by any selected tour.
    pub uncovered: Vec<usize>,
    pub cost: f64,
}

/// FNV-1a over the sorted customer ids; identifies a tour independently of
/// where it sits in the catalog.
pub fn tour_key(customers: &[usize]) -> u64 {
    let mut sorted = customers.to_vec();
    sorted.sort_unstable();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in sorted {
        for byte in (v as u64).to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// The uniform draw in `[0, 1)` that decides tour `customers` under `seed`.
pub fn tour_draw(seed: u64, customers: &[usize]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tour_key(customers));
    rng.gen::<f64>()
}

/// Selects each tour independently with probability `min(1, gamma x_T)`.
pub fn round_tours(catalog: &TourCatalog, lp: &LpSolution, gamma: f64, seed: u64) -> RoundingOutcome {
    let mut selected = Vec::new();
    if gamma > 0.0 {
        for (t, tour) in catalog.tours.iter().enumerate() {
            let p = (gamma * lp.x[t]).min(1.0);
            if p > 0.0 && tour_draw(seed, &tour.order) < p {
                selected.push(t);
            }
        }
    }
    let uncovered =
        catalog.cover_set.iter().copied().filter(|&v| !selected.iter().any(|&t| catalog.tours[t].covers(v))).collect();
    let cost = selected.iter().map(|&t| catalog.tours[t].cost).sum();
    RoundingOutcome { selected, uncovered, cost }
}
