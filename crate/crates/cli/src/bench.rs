//! Benchmark suites: fixed generated instances, every row reproducible from
//! the instance parameters and the seed.

use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use ucvrp::algorithms::{run_algorithm, AlgorithmId, SolveOptions};
use ucvrp::generate::{gen_instance, DemandLaw, MetricKind};
use ucvrp::oracle::exact_cvrp;
use ucvrp::Instance;

#[derive(Clone, Copy, ValueEnum)]
pub enum Suite {
    /// Twelve small instances, every algorithm.
    Small,
    /// Thirty oracle-solvable instances, the two meta-algorithms.
    Ratio,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    pub k: u32,
    pub algorithm: String,
    pub delta: Option<String>,
    pub gamma: Option<f64>,
    pub seed: u64,
    pub cost: f64,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub radial: f64,
    pub tsp_lb: Option<f64>,
    pub lp_lb: Option<f64>,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

fn instances(suite: Suite) -> Vec<Instance> {
    match suite {
        Suite::Small => (0..12u64)
            .map(|i| {
                let kind = if i % 2 == 0 { MetricKind::Euclidean } else { MetricKind::RandomMetric };
                let law = if i % 4 < 2 { DemandLaw::Uniform } else { DemandLaw::HeavyTail };
                gen_instance(kind, 4 + (i as usize % 6), 2 + (i as u32 % 3), law, i)
            })
            .collect(),
        Suite::Ratio => (0..30u64)
            .map(|i| {
                let kind = if i % 3 == 2 { MetricKind::RandomMetric } else { MetricKind::Euclidean };
                gen_instance(kind, 6 + (i as usize % 4), 3 + (i as u32 % 2), DemandLaw::Uniform, 1000 + i)
            })
            .collect(),
    }
}

fn algorithms(suite: Suite) -> Vec<AlgorithmId> {
    match suite {
        Suite::Small => AlgorithmId::ALL.to_vec(),
        Suite::Ratio => vec![AlgorithmId::Alg1, AlgorithmId::Alg2],
    }
}

fn rows_for(inst: &Instance, algs: &[AlgorithmId], seeds: u64, timing: bool) -> Result<Vec<BenchRow>, ucvrp::Error> {
    let opt = exact_cvrp(inst).ok().map(|r| r.opt_cost);
    let mut rows = Vec::new();
    for &alg in algs {
        for seed in 0..seeds {
            let start = Instant::now();
            let out = run_algorithm(inst, alg, &SolveOptions { seed, ..SolveOptions::default() })?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let r = out.report;
            rows.push(BenchRow {
                instance: inst.name().to_string(),
                n: inst.n(),
                k: inst.capacity(),
                algorithm: alg.to_string(),
                delta: r.params.delta.map(|d| d.to_string()),
                gamma: r.params.gamma.or(r.params.gamma1),
                seed,
                cost: r.cost,
                opt,
                ratio: opt.filter(|&o| o > 0.0).map(|o| r.cost / o),
                bound: r.theoretical_ratio,
                radial: r.lower_bounds.radial,
                tsp_lb: r.lower_bounds.tsp,
                lp_lb: r.lower_bounds.lp,
                feasible: r.feasible,
                wall_ms: timing.then_some(elapsed),
            });
        }
    }
    Ok(rows)
}

/// Instances run in parallel; rows come back in instance order.
pub fn run(suite: Suite, seeds: u64, timing: bool) -> Result<Vec<BenchRow>, ucvrp::Error> {
    let algs = algorithms(suite);
    let per_instance: Result<Vec<Vec<BenchRow>>, _> =
        instances(suite).par_iter().map(|inst| rows_for(inst, &algs, seeds, timing)).collect();
    Ok(per_instance?.into_iter().flatten().collect())
}

fn opt_field<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(rows: &[BenchRow], timing: bool) -> String {
    let mut out = String::from("instance,n,k,algorithm,delta,gamma,seed,cost,opt,ratio,bound,radial,tsp_lb,lp_lb,feasible");
    if timing {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    for r in rows {
        let mut fields = vec![
            r.instance.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.algorithm.clone(),
            opt_field(&r.delta),
            opt_field(&r.gamma),
            r.seed.to_string(),
            r.cost.to_string(),
            opt_field(&r.opt),
            opt_field(&r.ratio),
            opt_field(&r.bound),
            r.radial.to_string(),
            opt_field(&r.tsp_lb),
            opt_field(&r.lp_lb),
            r.feasible.to_string(),
        ];
        if timing {
            fields.push(opt_field(&r.wall_ms));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
