//! Power-network cases: ingestion, lossless lowering to an oscillator
//! network, and critical-coupling ratios of the synchronization tests.

pub mod critical;
pub mod matpower;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sync_tests::OscillatorSystem;

pub use critical::{
    critical_coupling, exists_in_half_pi, test_thresholds, CriticalConfig, CriticalCoupling,
    CriticalRatioReport, RatioEntry,
};
pub use matpower::parse_matpower;

/// How voltage magnitudes entering the edge weights were obtained.
pub const VOLTAGE_PROVENANCE: &str = "case_file";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Load,
    Generator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBus {
    pub id: usize,
    pub kind: BusKind,
    /// Voltage magnitude, p.u.
    pub vm: f64,
    /// Net active injection (generation − demand), p.u.
    pub p_nom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBranch {
    pub from: usize,
    pub to: usize,
    /// Series reactance, p.u.
    pub x: f64,
}

/// A validated case: connected, positive voltages and reactances, and only
/// in-service branches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<PowerBus>,
    pub branches: Vec<PowerBranch>,
    /// Data present in the file but dropped by the lossless model.
    pub ignored: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonBus {
    id: usize,
    #[serde(rename = "type")]
    kind: BusKind,
    vm: f64,
    #[serde(default)]
    pg: f64,
    #[serde(default)]
    pd: f64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonBranch {
    from: usize,
    to: usize,
    x: f64,
    #[serde(default = "default_true")]
    in_service: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonCase {
    name: String,
    base_mva: f64,
    buses: Vec<JsonBus>,
    branches: Vec<JsonBranch>,
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        field: field.into(),
        message: message.into(),
    }
}

/// Native JSON case format. Powers are in MW and converted with `base_mva`.
pub fn parse_json_case(text: &str) -> Result<PowerCase> {
    let raw: JsonCase = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        field: "json".into(),
        message: e.to_string(),
    })?;
    if !(raw.base_mva > 0.0) {
        return Err(field_error("base_mva", "must be positive"));
    }
    for (k, br) in raw.branches.iter().enumerate() {
        if !(br.x > 0.0) {
            return Err(field_error(format!("branches[{k}].x"), format!("reactance {} must be positive", br.x)));
        }
    }
    let buses = raw
        .buses
        .iter()
        .map(|b| PowerBus {
            id: b.id,
            kind: b.kind,
            vm: b.vm,
            p_nom: (b.pg - b.pd) / raw.base_mva,
        })
        .collect();
    let branches = raw
        .branches
        .iter()
        .filter(|b| b.in_service)
        .map(|b| PowerBranch {
            from: b.from,
            to: b.to,
            x: b.x,
        })
        .collect();
    PowerCase {
        name: raw.name,
        base_mva: raw.base_mva,
        buses,
        branches,
        ignored: Vec::new(),
    }
    .validated()
}

/// Reads a case, choosing the reader by extension (`.json` or `.m`).
pub fn parse_case(path: &Path) -> Result<PowerCase> {
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "case".into());
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => parse_json_case(&text),
        Some("m") => parse_matpower(&text, &stem),
        _ if text.trim_start().starts_with('{') => parse_json_case(&text),
        _ => parse_matpower(&text, &stem),
    }
}

impl PowerCase {
    fn validated(self) -> Result<Self> {
        let mut index = HashMap::new();
        for (k, bus) in self.buses.iter().enumerate() {
            if index.insert(bus.id, k).is_some() {
                return Err(field_error(format!("buses[{k}].id"), format!("duplicate bus id {}", bus.id)));
            }
            if !(bus.vm > 0.0) {
                return Err(field_error(format!("buses[{k}].vm"), format!("voltage {} must be positive", bus.vm)));
            }
            if !bus.p_nom.is_finite() {
                return Err(field_error(format!("buses[{k}]"), "injection is not finite"));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            for end in [br.from, br.to] {
                if !index.contains_key(&end) {
                    return Err(field_error(format!("branches[{k}]"), format!("unknown bus id {end}")));
                }
            }
            if br.from == br.to {
                return Err(field_error(format!("branches[{k}]"), "branch connects a bus to itself"));
            }
        }
        match self.graph() {
            Ok(_) => Ok(self),
            Err(Error::Disconnected) => Err(Error::DisconnectedCase),
            Err(e) => Err(e),
        }
    }

    pub fn n(&self) -> usize {
        self.buses.len()
    }

    /// Lossless network graph: `a_jl = Vm_j·Vm_l / x_jl`, parallel branches
    /// summed. Nodes follow the order of `buses`.
    pub fn graph(&self) -> Result<Graph> {
        let index: HashMap<usize, usize> = self.buses.iter().enumerate().map(|(k, b)| (b.id, k)).collect();
        let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for br in &self.branches {
            let (i, j) = (index[&br.from], index[&br.to]);
            let key = (i.min(j), i.max(j));
            *weights.entry(key).or_insert(0.0) += self.buses[i].vm * self.buses[j].vm / br.x;
        }
        let edges: Vec<_> = weights.into_iter().map(|((i, j), w)| (i, j, w)).collect();
        Graph::new(self.n(), &edges)
    }

    pub fn injections(&self) -> Vec<f64> {
        self.buses.iter().map(|b| b.p_nom).collect()
    }
}

/// `(Graph, ω)` with `ω` the centered nominal injections.
pub fn lower_to_oscillators(case: &PowerCase) -> Result<OscillatorSystem> {
    OscillatorSystem::new(case.graph()?, &case.injections())
}
