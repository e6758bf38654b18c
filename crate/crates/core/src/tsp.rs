//! TSP tours through the depot: Held-Karp, MST doubling, shortcutting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, DEPOT};

/// Default cap on the number of customers handed to Held-Karp.
pub const DEFAULT_HELDKARP_CAP: usize = 18;

/// Held-Karp cap, overridable through `UCVRP_HELDKARP_CAP`.
pub fn heldkarp_cap() -> usize {
    std::env::var("UCVRP_HELDKARP_CAP")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_HELDKARP_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TourQuality {
    Exact,
    TwoApprox,
    External,
}

impl TourQuality {
    /// The TSP ratio that applies to a tour of this quality, if known.
    pub fn alpha(self) -> Option<f64> {
        match self {
            TourQuality::Exact => Some(1.0),
            TourQuality::TwoApprox => Some(2.0),
            TourQuality::External => None,
        }
    }
}

/// A cycle `(r, v_1, ..., v_l, r)`. The empty tour is `(r, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub vertices: Vec<usize>,
    pub cost: f64,
    pub quality: TourQuality,
}

impl Tour {
    pub fn new(inst: &Instance, customers: &[usize], quality: TourQuality) -> Tour {
        let mut vertices = Vec::with_capacity(customers.len() + 2);
        vertices.push(DEPOT);
        vertices.extend_from_slice(customers);
        vertices.push(DEPOT);
        let cost = inst.walk_cost(&vertices);
        Tour { vertices, cost, quality }
    }

    pub fn trivial(inst: &Instance, v: usize) -> Tour {
        Tour::new(inst, &[v], TourQuality::Exact)
    }

    pub fn customers(&self) -> &[usize] {
        &self.vertices[1..self.vertices.len() - 1]
    }

    pub fn visits(&self, v: usize) -> bool {
        self.customers().contains(&v)
    }

    /// Restriction of this tour to `keep`, preserving its quality tag.
    pub fn restrict(&self, inst: &Instance, keep: &[usize]) -> Result<Tour> {
        let mut t = shortcut(inst, &self.vertices, keep)?;
        t.quality = self.quality;
        Ok(t)
    }
}

/// Skips every vertex not in `keep` (and repeated visits), giving a cycle
/// that visits `keep` in first-appearance order.
pub fn shortcut(inst: &Instance, walk: &[usize], keep: &[usize]) -> Result<Tour> {
    if walk.len() < 2 || walk[0] != DEPOT || walk[walk.len() - 1] != DEPOT {
        return Err(Error::WalkNotClosed);
    }
    let mut wanted = vec![false; inst.n() + 1];
    for &v in keep {
        if !inst.is_customer(v) {
            return Err(Error::UnknownCustomer { v });
        }
        wanted[v] = true;
    }
    let mut seen = vec![false; inst.n() + 1];
    let mut order = Vec::with_capacity(keep.len());
    for &v in walk {
        if v != DEPOT && v < wanted.len() && wanted[v] && !seen[v] {
            seen[v] = true;
            order.push(v);
        }
    }
    if let Some(&v) = keep.iter().find(|&&v| !seen[v]) {
        return Err(Error::KeepNotVisited { v });
    }
    Ok(Tour::new(inst, &order, TourQuality::External))
}

/// Held-Karp table over a fixed ground set of customers.
///
/// `best[mask][j]` is the cheapest path that leaves the depot, visits the
/// customers in `mask` and ends at ground element `j` (which is in `mask`).
pub struct HeldKarp<'a> {
    inst: &'a Instance,
    ground: Vec<usize>,
    best: Vec<f64>,
}

impl<'a> HeldKarp<'a> {
    pub fn new(inst: &'a Instance, subset: &[usize]) -> Result<Self> {
        Self::with_cap(inst, subset, heldkarp_cap())
    }

    pub fn with_cap(inst: &'a Instance, subset: &[usize], cap: usize) -> Result<Self> {
        let mut ground = subset.to_vec();
        ground.sort_unstable();
        ground.dedup();
        if let Some(&v) = ground.iter().find(|&&v| !inst.is_customer(v)) {
            return Err(Error::UnknownCustomer { v });
        }
        let m = ground.len();
        if m > cap || m >= usize::BITS as usize - 1 {
            return Err(Error::SubsetTooLarge { size: m, cap });
        }
        let full = 1usize << m;
        let mut best = vec![f64::INFINITY; full * m.max(1)];
        for j in 0..m {
            best[(1 << j) * m + j] = inst.cost(DEPOT, ground[j]);
        }
        for mask in 1..full {
            for j in 0..m {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let here = best[mask * m + j];
                if !here.is_finite() {
                    continue;
                }
                let vj = ground[j];
                let mut rest = !mask & (full - 1);
                while rest != 0 {
                    let l = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    let next = mask | (1 << l);
                    let cand = here + inst.cost(vj, ground[l]);
                    let slot = &mut best[next * m + l];
                    if cand < *slot {
                        *slot = cand;
                    }
                }
            }
        }
        Ok(HeldKarp { inst, ground, best })
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    /// Bit mask of a customer set relative to the ground set.
    pub fn mask_of(&self, set: &[usize]) -> Option<usize> {
        set.iter().try_fold(0usize, |acc, v| self.ground.binary_search(v).ok().map(|i| acc | (1 << i)))
    }

    fn path(&self, mask: usize, j: usize) -> f64 {
        self.best[mask * self.ground.len() + j]
    }

    /// Optimal tour cost through the depot and the customers in `mask`.
    pub fn tour_cost(&self, mask: usize) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        (0..self.ground.len())
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| self.path(mask, j) + self.inst.cost(self.ground[j], DEPOT))
            .fold(f64::INFINITY, f64::min)
    }

    /// Optimal tour over `mask`; among (near-)ties the lexicographically
    /// smallest vertex sequence is returned.
    pub fn tour(&self, mask: usize) -> Tour {
        let opt = self.tour_cost(mask);
        let tol = 1e-9 * opt.abs().max(1.0);
        let mut order = Vec::new();
        let mut visited = 0usize;
        let mut cur = DEPOT;
        let mut spent = 0.0;
        while visited != mask {
            let remaining = mask & !visited;
            // The completion from j back to the depot covering `remaining` is
            // the reverse of a depot path over `remaining` ending at j.
            let pick = (0..self.ground.len())
                .filter(|j| remaining & (1 << j) != 0)
                .find(|&j| spent + self.inst.cost(cur, self.ground[j]) + self.path(remaining, j) <= opt + tol)
                .expect("Held-Karp table admits a completion");
            spent += self.inst.cost(cur, self.ground[pick]);
            cur = self.ground[pick];
            visited |= 1 << pick;
            order.push(cur);
        }
        Tour::new(self.inst, &order, TourQuality::Exact)
    }
}

/// Minimum-cost tour through the depot and `subset` (Held-Karp).
pub fn exact_tsp(inst: &Instance, subset: &[usize]) -> Result<Tour> {
    let hk = HeldKarp::new(inst, subset)?;
    let full = (1usize << hk.ground().len()) - 1;
    Ok(hk.tour(full))
}

/// Minimum spanning tree doubling followed by shortcutting; at most twice
/// the optimal tour cost.
pub fn approx_tsp(inst: &Instance, subset: &[usize]) -> Result<Tour> {
    let mut nodes = vec![DEPOT];
    let mut rest: Vec<usize> = subset.to_vec();
    rest.sort_unstable();
    rest.dedup();
    if let Some(&v) = rest.iter().find(|&&v| !inst.is_customer(v)) {
        return Err(Error::UnknownCustomer { v });
    }
    nodes.extend(rest);
    let m = nodes.len();
    // Prim from the depot.
    let mut in_tree = vec![false; m];
    let mut dist = vec![f64::INFINITY; m];
    let mut parent = vec![usize::MAX; m];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    dist[0] = 0.0;
    for _ in 0..m {
        let u = (0..m)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)))
            .expect("a vertex remains");
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            children[parent[u]].push(u);
        }
        for w in 0..m {
            if !in_tree[w] {
                let c = inst.cost(nodes[u], nodes[w]);
                if c < dist[w] {
                    dist[w] = c;
                    parent[w] = u;
                }
            }
        }
    }
    let mut order = Vec::with_capacity(m - 1);
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        if u != 0 {
            order.push(nodes[u]);
        }
        let mut kids = children[u].clone();
        kids.sort_unstable();
        stack.extend(kids.into_iter().rev());
    }
    Ok(Tour::new(inst, &order, TourQuality::TwoApprox))
}

/// Exact tour when the subset fits under the Held-Karp cap, MST doubling
/// otherwise.
pub fn best_available_tour(inst: &Instance, subset: &[usize]) -> Result<Tour> {
    if subset.len() <= heldkarp_cap() {
        exact_tsp(inst, subset)
    } else {
        approx_tsp(inst, subset)
    }
}
