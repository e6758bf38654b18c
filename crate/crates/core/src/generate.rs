//! Seeded instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{euclidean_matrix, Instance, RawInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Uniform points in the unit square, exact Euclidean lengths.
    Euclidean,
    /// Uniform `(0, 1]` edge weights closed under shortest paths.
    RandomMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandLaw {
    /// Uniform on `[1, k]`.
    Uniform,
    /// Mostly small demands (`<= k/4`) with a 30% share of large ones (`> k/2`).
    HeavyTail,
}

impl std::str::FromStr for MetricKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "random_metric" | "random-metric" => Ok(MetricKind::RandomMetric),
            _ => Err(format!("unknown metric kind `{s}`")),
        }
    }
}

impl std::str::FromStr for DemandLaw {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(DemandLaw::Uniform),
            "heavy_tail" | "heavy-tail" => Ok(DemandLaw::HeavyTail),
            _ => Err(format!("unknown demand law `{s}`")),
        }
    }
}

fn draw_demand(rng: &mut ChaCha8Rng, k: u32, law: DemandLaw) -> u32 {
    match law {
        DemandLaw::Uniform => rng.gen_range(1..=k),
        DemandLaw::HeavyTail => {
            if rng.gen_bool(0.3) {
                rng.gen_range(k / 2 + 1..=k)
            } else {
                rng.gen_range(1..=(k / 4).max(1))
            }
        }
    }
}

/// Generates a valid instance; identical arguments give identical output.
///
/// # Panics
/// If `n == 0` or `k == 0`.
pub fn gen_instance(kind: MetricKind, n: usize, k: u32, law: DemandLaw, seed: u64) -> Instance {
    assert!(n >= 1 && k >= 1, "need at least one customer and positive capacity");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = match kind {
        MetricKind::Euclidean => "euc",
        MetricKind::RandomMetric => "rnd",
    };
    let name = format!("{tag}-n{n}-k{k}-s{seed}");
    let (matrix, coords) = match kind {
        MetricKind::Euclidean => {
            let pts: Vec<[f64; 2]> = (0..=n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            (euclidean_matrix(&pts), Some(pts))
        }
        MetricKind::RandomMetric => {
            let dim = n + 1;
            let mut m = vec![vec![0.0; dim]; dim];
            for x in 0..dim {
                for y in x + 1..dim {
                    // gen::<f64>() is in [0, 1); flip it onto (0, 1].
                    let w = 1.0 - rng.gen::<f64>();
                    m[x][y] = w;
                    m[y][x] = w;
                }
            }
            shortest_path_closure(&mut m);
            (m, None)
        }
    };
    let demands = (0..n).map(|_| draw_demand(&mut rng, k, law)).collect();
    Instance::validate(RawInstance { name, capacity: k, demands, matrix, coords })
        .expect("generated instances satisfy the metric invariants")
}

/// Floyd-Warshall closure; keeps the matrix exactly symmetric.
pub fn shortest_path_closure(m: &mut [Vec<f64>]) {
    let dim = m.len();
    for via in 0..dim {
        for x in 0..dim {
            for y in x + 1..dim {
                let alt = m[x][via] + m[via][y];
                if alt < m[x][y] {
                    m[x][y] = alt;
                    m[y][x] = alt;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::instance_to_json;

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = gen_instance(MetricKind::Euclidean, 5, 3, DemandLaw::Uniform, 7);
        let b = gen_instance(MetricKind::Euclidean, 5, 3, DemandLaw::Uniform, 7);
        assert_eq!(instance_to_json(&a), instance_to_json(&b));
        let c = gen_instance(MetricKind::Euclidean, 5, 3, DemandLaw::Uniform, 8);
        assert_ne!(instance_to_json(&a), instance_to_json(&c));
    }

    #[test]
    fn random_metric_is_valid() {
        for seed in 0..20 {
            let inst = gen_instance(MetricKind::RandomMetric, 8, 4, DemandLaw::Uniform, seed);
            assert!(Instance::validate(inst.to_raw()).is_ok());
        }
    }

    #[test]
    fn single_customer() {
        let inst = gen_instance(MetricKind::Euclidean, 1, 1, DemandLaw::Uniform, 0);
        assert_eq!(inst.demands(), &[1]);
    }

    #[test]
    fn heavy_tail_demands_in_range() {
        let inst = gen_instance(MetricKind::Euclidean, 30, 10, DemandLaw::HeavyTail, 3);
        assert!(inst.demands().iter().all(|&d| (1..=10).contains(&d)));
        assert!(inst.demands().iter().any(|&d| d > 5));
    }
}
