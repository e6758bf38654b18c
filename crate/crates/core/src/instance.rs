//! Instance data model.
//!
//! Vertex `0` is the depot; customers are `1..=n`. Demands are integers in
//! `[1, capacity]` and every comparison involving a normalized demand
//! `d_v / k` is done on exact rationals, while costs stay `f64`.

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for normalized demands, thresholds and offsets.
pub type Rational = Ratio<i64>;

/// Additive tolerance for metric checks on floating costs.
pub const METRIC_TOL: f64 = 1e-9;

pub const DEPOT: usize = 0;

/// Unchecked instance data, as read from a file or produced by a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub name: String,
    pub capacity: u32,
    /// One entry per customer; the depot carries no demand.
    pub demands: Vec<u32>,
    /// Full `(n+1) x (n+1)` matrix with the depot in row/column 0.
    pub matrix: Vec<Vec<f64>>,
    pub coords: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    capacity: u32,
    demands: Vec<u32>,
    dim: usize,
    cost: Vec<f64>,
    coords: Option<Vec<[f64; 2]>>,
}

/// Normalized demand `d_v / k`, always in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NormalizedDemand(Rational);

impl NormalizedDemand {
    pub fn value(self) -> Rational {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

/// Three-way split of a customer set by normalized demand relative to `delta`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandClass {
    /// `d_v <= delta`
    pub small: Vec<usize>,
    /// `delta < d_v <= 1/2`
    pub big: Vec<usize>,
    /// `1/2 < d_v <= 1`
    pub large: Vec<usize>,
}

impl Instance {
    /// Checks every instance invariant and reports the first violation.
    pub fn validate(raw: RawInstance) -> Result<Instance> {
        let n = raw.demands.len();
        if n == 0 {
            return Err(Error::NoCustomers);
        }
        if raw.capacity == 0 {
            return Err(Error::ZeroCapacity);
        }
        let dim = n + 1;
        if raw.matrix.len() != dim {
            return Err(Error::DimensionMismatch { rows: raw.matrix.len(), expected: dim });
        }
        for (row, r) in raw.matrix.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::RaggedMatrix { row, len: r.len(), expected: dim });
            }
        }
        for (i, &d) in raw.demands.iter().enumerate() {
            if d == 0 || d > raw.capacity {
                return Err(Error::DemandOutOfRange { v: i + 1 });
            }
        }
        let m = &raw.matrix;
        for x in 0..dim {
            for y in 0..dim {
                let value = m[x][y];
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidCost { x, y, value });
                }
            }
            if m[x][x] != 0.0 {
                return Err(Error::NonZeroDiagonal { x });
            }
        }
        for x in 0..dim {
            for y in x + 1..dim {
                if (m[x][y] - m[y][x]).abs() > METRIC_TOL {
                    return Err(Error::AsymmetricCost { x, y });
                }
            }
        }
        for x in 0..dim {
            for y in x + 1..dim {
                for via in 0..dim {
                    if via == x || via == y {
                        continue;
                    }
                    if m[x][y] > m[x][via] + m[via][y] + METRIC_TOL {
                        return Err(Error::TriangleViolation { x, y, via });
                    }
                }
            }
        }
        if let Some(c) = &raw.coords {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { rows: c.len(), expected: dim });
            }
        }
        let cost = raw.matrix.iter().flatten().copied().collect();
        Ok(Instance {
            name: raw.name,
            capacity: raw.capacity,
            demands: raw.demands,
            dim,
            cost,
            coords: raw.coords,
        })
    }

    /// Builds and validates an instance from an explicit matrix.
    pub fn from_matrix(
        name: impl Into<String>,
        capacity: u32,
        demands: Vec<u32>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Instance> {
        Instance::validate(RawInstance { name: name.into(), capacity, demands, matrix, coords: None })
    }

    /// Builds an instance from planar points (depot first) using exact
    /// Euclidean lengths.
    pub fn from_points(
        name: impl Into<String>,
        capacity: u32,
        demands: Vec<u32>,
        points: Vec<[f64; 2]>,
    ) -> Result<Instance> {
        let matrix = euclidean_matrix(&points);
        Instance::validate(RawInstance {
            name: name.into(),
            capacity,
            demands,
            matrix,
            coords: Some(points),
        })
    }

    pub fn to_raw(&self) -> RawInstance {
        let matrix = (0..self.dim).map(|x| self.cost[x * self.dim..(x + 1) * self.dim].to_vec()).collect();
        RawInstance {
            name: self.name.clone(),
            capacity: self.capacity,
            demands: self.demands.clone(),
            matrix,
            coords: self.coords.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of customers.
    pub fn n(&self) -> usize {
        self.dim - 1
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    pub fn customers(&self) -> impl Iterator<Item = usize> + Clone {
        1..self.dim
    }

    #[inline]
    pub fn cost(&self, x: usize, y: usize) -> f64 {
        self.cost[x * self.dim + y]
    }

    /// Distance from the depot.
    #[inline]
    pub fn radius(&self, v: usize) -> f64 {
        self.cost(DEPOT, v)
    }

    /// Integer demand of customer `v` (1-based).
    pub fn demand(&self, v: usize) -> u32 {
        self.demands[v - 1]
    }

    pub fn demands(&self) -> &[u32] {
        &self.demands
    }

    pub fn normalized(&self, v: usize) -> NormalizedDemand {
        NormalizedDemand(Rational::new(self.demand(v) as i64, self.capacity as i64))
    }

    /// `d_v / k` as an exact rational.
    pub fn dhat(&self, v: usize) -> Rational {
        self.normalized(v).value()
    }

    pub fn is_customer(&self, v: usize) -> bool {
        v >= 1 && v < self.dim
    }

    /// Total integer demand of a customer set.
    pub fn load(&self, set: &[usize]) -> u64 {
        set.iter().map(|&v| self.demand(v) as u64).sum()
    }

    /// Cost of walking the given vertex sequence.
    pub fn walk_cost(&self, walk: &[usize]) -> f64 {
        walk.windows(2).map(|w| self.cost(w[0], w[1])).sum()
    }

    pub fn classify(&self, delta: Rational) -> DemandClass {
        self.classify_subset(&self.customers().collect::<Vec<_>>(), delta)
    }

    pub fn classify_subset(&self, subset: &[usize], delta: Rational) -> DemandClass {
        let half = Rational::new(1, 2);
        let mut class = DemandClass::default();
        for &v in subset {
            let d = self.dhat(v);
            if d <= delta {
                class.small.push(v);
            } else if d <= half {
                class.big.push(v);
            } else {
                class.large.push(v);
            }
        }
        class
    }
}

/// Partition of the customers into small / big / large relative to `delta`.
pub fn classify(inst: &Instance, delta: Rational) -> Result<DemandClass> {
    if delta < Rational::zero() || delta > Rational::new(1, 2) {
        return Err(Error::BadDelta(delta.to_string()));
    }
    Ok(inst.classify(delta))
}

/// `sum_v 2 (d_v / k) c(r, v)`, a lower bound on the optimum.
pub fn radial_lower_bound(inst: &Instance) -> f64 {
    radial_mass(inst, inst.customers())
}

pub(crate) fn radial_mass(inst: &Instance, set: impl IntoIterator<Item = usize>) -> f64 {
    set.into_iter().map(|v| 2.0 * inst.normalized(v).to_f64() * inst.radius(v)).sum()
}

/// The multiset of `(d_v / k, c(r, v))` pairs, normalized by the total
/// radial mass. Integrals use the half-open interval `(l, r]`.
#[derive(Debug, Clone)]
pub struct DemandProfile {
    entries: Vec<(Rational, f64)>,
    total: f64,
}

impl DemandProfile {
    pub fn new(inst: &Instance) -> Result<Self> {
        let entries: Vec<_> = inst.customers().map(|v| (inst.dhat(v), inst.radius(v))).collect();
        let total = Self::mass(&entries, Rational::zero(), Rational::one(), 1);
        if total <= 0.0 {
            return Err(Error::ZeroRadialMass);
        }
        Ok(DemandProfile { entries, total })
    }

    fn mass(entries: &[(Rational, f64)], l: Rational, r: Rational, t: u8) -> f64 {
        entries
            .iter()
            .filter(|(d, _)| *d > l && *d <= r)
            .map(|&(d, c)| {
                let w = if t == 0 { 1.0 } else { *d.numer() as f64 / *d.denom() as f64 };
                2.0 * w * c
            })
            .sum()
    }

    /// Total radial mass `sum_v 2 d_v c(r, v)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Numerator of the integral: `sum_{l < d_v <= r} 2 d_v^t c(r, v)`.
    pub fn raw(&self, l: Rational, r: Rational, t: u8) -> f64 {
        Self::mass(&self.entries, l, r, t)
    }

    pub fn integral(&self, l: Rational, r: Rational, t: u8) -> Result<f64> {
        if l < Rational::zero() || r > Rational::one() || l > r {
            return Err(Error::BadInterval { l: l.to_string(), r: r.to_string() });
        }
        Ok(self.raw(l, r, t) / self.total)
    }

    /// Whether some customer has normalized demand in `(l, r]`.
    pub fn occupied(&self, l: Rational, r: Rational) -> bool {
        self.entries.iter().any(|(d, _)| *d > l && *d <= r)
    }
}

/// `int_l^r x^t dF(x)` for the instance's demand profile.
pub fn f_integral(inst: &Instance, l: Rational, r: Rational, t: u8) -> Result<f64> {
    DemandProfile::new(inst)?.integral(l, r, t)
}

pub(crate) fn euclidean_matrix(points: &[[f64; 2]]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| points.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).collect())
        .collect()
}

/// Serde adapter writing an optional rational as `"p/q"`.
pub mod opt_rational_str {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_str(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.49` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational number"));
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || frac.len() > 15 || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let r = Rational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Depot at 0 and three unit-demand customers at 1, 2, 3 on a line, `k = 2`.
pub fn line3() -> Instance {
    let pos = [0.0f64, 1.0, 2.0, 3.0];
    let matrix = pos.iter().map(|a| pos.iter().map(|b| (a - b).abs()).collect()).collect();
    Instance::from_matrix("LINE3", 2, vec![1, 1, 1], matrix).expect("LINE3 is a valid instance")
}

/// Customers on a line at the given positions (depot at 0).
pub fn line_instance(name: &str, capacity: u32, demands: Vec<u32>, positions: &[f64]) -> Result<Instance> {
    let pos: Vec<f64> = std::iter::once(0.0).chain(positions.iter().copied()).collect();
    let matrix = pos.iter().map(|a| pos.iter().map(|b| (a - b).abs()).collect()).collect();
    Instance::from_matrix(name, capacity, demands, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("1/5").unwrap(), r(1, 5));
        assert_eq!(parse_rational("0.49").unwrap(), r(49, 100));
        assert_eq!(parse_rational("2").unwrap(), r(2, 1));
        assert_eq!(parse_rational(".1").unwrap(), r(1, 10));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1e-3").is_err());
    }

    #[test]
    fn line3_is_valid() {
        let inst = line3();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.cost(1, 3), 2.0);
    }

    #[test]
    fn triangle_violation_is_reported() {
        let mut raw = line3().to_raw();
        raw.matrix[1][3] = 3.5;
        raw.matrix[3][1] = 3.5;
        assert_eq!(Instance::validate(raw), Err(Error::TriangleViolation { x: 1, y: 3, via: 2 }));
    }

    #[test]
    fn asymmetry_and_demand_errors() {
        let mut raw = line3().to_raw();
        raw.matrix[1][2] = 0.5;
        assert_eq!(Instance::validate(raw), Err(Error::AsymmetricCost { x: 1, y: 2 }));
        let mut raw = line3().to_raw();
        raw.demands[1] = 3;
        assert_eq!(Instance::validate(raw), Err(Error::DemandOutOfRange { v: 2 }));
        let mut raw = line3().to_raw();
        raw.demands[0] = 0;
        assert_eq!(Instance::validate(raw), Err(Error::DemandOutOfRange { v: 1 }));
    }

    #[test]
    fn dimension_errors() {
        let mut raw = line3().to_raw();
        raw.matrix.pop();
        assert!(matches!(Instance::validate(raw), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn single_customer_accepted() {
        let inst = Instance::from_matrix("one", 1, vec![1], vec![vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
        assert_eq!(radial_lower_bound(&inst), 10.0);
    }

    #[test]
    fn radial_bound_examples() {
        assert_eq!(radial_lower_bound(&line3()), 6.0);
        let inst = Instance::from_matrix("z", 2, vec![1, 2], vec![vec![0.0; 3]; 3]).unwrap();
        assert_eq!(radial_lower_bound(&inst), 0.0);
        assert_eq!(f_integral(&inst, r(0, 1), r(1, 1), 1).unwrap_err(), Error::ZeroRadialMass);
    }

    #[test]
    fn f_integral_examples() {
        let inst = line3();
        assert_eq!(f_integral(&inst, r(0, 1), r(1, 1), 1).unwrap(), 1.0);
        assert_eq!(f_integral(&inst, r(1, 3), r(1, 2), 0).unwrap(), 2.0);
        assert_eq!(f_integral(&inst, r(1, 2), r(1, 1), 0).unwrap(), 0.0);
        assert!(f_integral(&inst, r(1, 2), r(1, 3), 0).is_err());
    }

    #[test]
    fn classify_examples() {
        let inst = line3();
        let c = classify(&inst, r(1, 3)).unwrap();
        assert_eq!((c.small.len(), c.big, c.large.len()), (0, vec![1, 2, 3], 0));
        let c = classify(&inst, r(1, 2)).unwrap();
        assert_eq!(c.small, vec![1, 2, 3]);
        let inst = line_instance("k4", 4, vec![1, 2, 3], &[1.0, 2.0, 3.0]).unwrap();
        let c = classify(&inst, r(1, 3)).unwrap();
        assert_eq!((c.small, c.big, c.large), (vec![1], vec![2], vec![3]));
        assert!(classify(&inst, r(3, 5)).is_err());
    }
}
