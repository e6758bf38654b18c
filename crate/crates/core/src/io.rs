//! Canonical instance JSON and a TSPLIB-CVRP subset reader.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{euclidean_matrix, Instance, RawInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MetricSpec {
    Explicit { matrix: Vec<Vec<f64>> },
    Euc2d { coords: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub name: String,
    pub capacity: u32,
    pub demands: Vec<u32>,
    pub metric: MetricSpec,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        let raw = inst.to_raw();
        let metric = match raw.coords {
            Some(coords) => MetricSpec::Euc2d { coords },
            None => MetricSpec::Explicit { matrix: raw.matrix },
        };
        InstanceFile { name: raw.name, capacity: raw.capacity, demands: raw.demands, metric }
    }
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let (matrix, coords) = match self.metric {
            MetricSpec::Explicit { matrix } => (matrix, None),
            MetricSpec::Euc2d { coords } => (euclidean_matrix(&coords), Some(coords)),
        };
        Instance::validate(RawInstance {
            name: self.name,
            capacity: self.capacity,
            demands: self.demands,
            matrix,
            coords,
        })
    }
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from(inst)).expect("instance serializes")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_instance()
}

/// Reads the supported TSPLIB-CVRP subset. With `round_euc` the EUC_2D
/// lengths are rounded to the nearest integer as TSPLIB prescribes;
/// otherwise exact lengths are kept.
pub fn parse_tsplib(text: &str, round_euc: bool) -> Result<Instance> {
    let mut name = String::from("tsplib");
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<u32> = None;
    let mut weight_type: Option<String> = None;
    let mut coords: HashMap<usize, [f64; 2]> = HashMap::new();
    let mut demands: HashMap<usize, u32> = HashMap::new();
    let mut depots: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();

    #[derive(PartialEq)]
    enum Section {
        Header,
        Coords,
        Demand,
        Depot,
        Weights,
    }
    let mut section = Section::Header;
    let bad = |msg: String| Error::Parse(msg);

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if let Some((key, value)) = line.split_once(':') {
            let key = key.trim();
            let value = value.trim();
            match key {
                "NAME" => name = value.to_string(),
                "TYPE" => {
                    if value != "CVRP" {
                        return Err(bad(format!("unsupported TYPE `{value}`")));
                    }
                }
                "COMMENT" => {}
                "DIMENSION" => {
                    dimension = Some(value.parse().map_err(|_| bad(format!("bad DIMENSION `{value}`")))?)
                }
                "CAPACITY" => {
                    capacity = Some(value.parse().map_err(|_| bad(format!("bad CAPACITY `{value}`")))?)
                }
                "EDGE_WEIGHT_TYPE" => match value {
                    "EUC_2D" | "EXPLICIT" => weight_type = Some(value.to_string()),
                    _ => return Err(bad(format!("unsupported EDGE_WEIGHT_TYPE `{value}`"))),
                },
                "EDGE_WEIGHT_FORMAT" => {
                    if value != "FULL_MATRIX" {
                        return Err(bad(format!("unsupported EDGE_WEIGHT_FORMAT `{value}`")));
                    }
                }
                _ => return Err(bad(format!("unsupported keyword `{key}`"))),
            }
            section = Section::Header;
            continue;
        }
        match line {
            "NODE_COORD_SECTION" => {
                section = Section::Coords;
                continue;
            }
            "DEMAND_SECTION" => {
                section = Section::Demand;
                continue;
            }
            "DEPOT_SECTION" => {
                section = Section::Depot;
                continue;
            }
            "EDGE_WEIGHT_SECTION" => {
                section = Section::Weights;
                continue;
            }
            _ => {}
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
        let id = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad node id `{s}`")));
        match section {
            Section::Coords => {
                if fields.len() != 3 {
                    return Err(bad(format!("bad coordinate line `{line}`")));
                }
                coords.insert(id(fields[0])?, [num(fields[1])?, num(fields[2])?]);
            }
            Section::Demand => {
                if fields.len() != 2 {
                    return Err(bad(format!("bad demand line `{line}`")));
                }
                let d = fields[1].parse::<u32>().map_err(|_| bad(format!("bad demand `{}`", fields[1])))?;
                demands.insert(id(fields[0])?, d);
            }
            Section::Depot => {
                for f in fields {
                    let v: i64 = f.parse().map_err(|_| bad(format!("bad depot `{f}`")))?;
                    if v >= 0 {
                        depots.push(v as usize);
                    }
                }
            }
            Section::Weights => {
                for f in fields {
                    weights.push(num(f)?);
                }
            }
            Section::Header => return Err(bad(format!("unexpected line `{line}`"))),
        }
    }

    let dim = dimension.ok_or_else(|| bad("missing DIMENSION".into()))?;
    let capacity = capacity.ok_or_else(|| bad("missing CAPACITY".into()))?;
    let weight_type = weight_type.ok_or_else(|| bad("missing EDGE_WEIGHT_TYPE".into()))?;
    if depots.len() != 1 {
        return Err(bad(format!("expected exactly one depot, found {}", depots.len())));
    }
    let depot = depots[0];
    if depot == 0 || depot > dim {
        return Err(bad(format!("depot id {depot} out of range")));
    }
    // TSPLIB ids are 1-based; put the depot first and keep the others in order.
    let order: Vec<usize> = std::iter::once(depot).chain((1..=dim).filter(|&i| i != depot)).collect();
    let mut demand_list = Vec::with_capacity(dim - 1);
    for &node in &order[1..] {
        demand_list.push(*demands.get(&node).ok_or_else(|| bad(format!("missing demand for node {node}")))?);
    }

    let (matrix, coords_out) = if weight_type == "EUC_2D" {
        let pts: Vec<[f64; 2]> = order
            .iter()
            .map(|i| coords.get(i).copied().ok_or_else(|| bad(format!("missing coordinates for node {i}"))))
            .collect::<Result<_>>()?;
        let mut m = euclidean_matrix(&pts);
        if round_euc {
            m.iter_mut().flatten().for_each(|x| *x = x.round());
            (m, None)
        } else {
            (m, Some(pts))
        }
    } else {
        if weights.len() != dim * dim {
            return Err(bad(format!("FULL_MATRIX needs {} weights, found {}", dim * dim, weights.len())));
        }
        let m = order.iter().map(|&i| order.iter().map(|&j| weights[(i - 1) * dim + (j - 1)]).collect()).collect();
        (m, None)
    };
    Instance::validate(RawInstance { name, capacity, demands: demand_list, matrix, coords: coords_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::line3;

    const SMALL: &str = "NAME : toy\nTYPE : CVRP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EUC_2D\nCAPACITY : 2\n\
NODE_COORD_SECTION\n1 0 0\n2 3 0\n3 3 4\n4 0 4\nDEMAND_SECTION\n1 0\n2 1\n3 1\n4 2\nDEPOT_SECTION\n1\n-1\nEOF\n";

    #[test]
    fn json_round_trip_is_byte_identical() {
        let inst = line3();
        let text = instance_to_json(&inst);
        let back = instance_from_json(&text).unwrap();
        assert_eq!(instance_to_json(&back), text);
        assert_eq!(back, inst);
    }

    #[test]
    fn tsplib_euc2d() {
        let inst = parse_tsplib(SMALL, false).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.capacity(), 2);
        assert_eq!(inst.demands(), &[1, 1, 2]);
        assert_eq!(inst.cost(0, 2), 5.0);
        assert!(inst.coords().is_some());
    }

    #[test]
    fn tsplib_depot_not_first() {
        let text = SMALL.replace("DEPOT_SECTION\n1\n", "DEPOT_SECTION\n3\n").replace("3 1\n4 2", "3 0\n4 2").replace("1 0\n2 1", "1 1\n2 1");
        let inst = parse_tsplib(&text, true).unwrap();
        // depot is node 3 at (3, 4); node 1 at the origin is now customer 1
        assert_eq!(inst.cost(0, 1), 5.0);
        assert_eq!(inst.demands(), &[1, 1, 2]);
        assert!(inst.coords().is_none());
    }

    #[test]
    fn tsplib_explicit() {
        let text = "NAME : m\nTYPE : CVRP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\n\
CAPACITY : 5\nEDGE_WEIGHT_SECTION\n0 1 2\n1 0 1\n2 1 0\nDEMAND_SECTION\n1 0\n2 3\n3 4\nDEPOT_SECTION\n1\n-1\nEOF";
        let inst = parse_tsplib(text, false).unwrap();
        assert_eq!(inst.cost(0, 2), 2.0);
        assert_eq!(inst.demands(), &[3, 4]);
    }

    #[test]
    fn tsplib_rejects_unsupported() {
        let text = SMALL.replace("EUC_2D", "GEO");
        assert!(matches!(parse_tsplib(&text, false), Err(Error::Parse(_))));
        let text = SMALL.replace("NAME : toy", "NAME : toy\nDISTANCE : 10");
        assert!(matches!(parse_tsplib(&text, false), Err(Error::Parse(_))));
    }
}
