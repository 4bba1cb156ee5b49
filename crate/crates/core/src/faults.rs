//! Fault models and the faulty circuit variants `C^i`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, PlacedGate, RotationConvention, CUSTOM_UNITARY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};

/// What a faulty gate does instead of its intended operation.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum FaultModel {
    /// Single missing gate: the gate acts as the identity.
    #[default]
    Smgf,
    /// The gate is replaced by a known unitary of the same size.
    Replace(CMatrix),
}

/// Fault model per gate index (1-based). Gates without an override use the default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FaultSpec {
    default: FaultModel,
    overrides: BTreeMap<usize, FaultModel>,
}

impl FaultSpec {
    /// Every gate under the single-missing-gate model.
    pub fn smgf() -> Self {
        FaultSpec::default()
    }

    pub fn with_override(mut self, gate: usize, model: FaultModel) -> Self {
        self.overrides.insert(gate, model);
        self
    }

    pub fn model(&self, gate: usize) -> &FaultModel {
        self.overrides.get(&gate).unwrap_or(&self.default)
    }

    /// Checks override indices and replacement sizes against a circuit.
    pub fn validate(&self, c: &Circuit) -> Result<()> {
        for (&i, model) in &self.overrides {
            let g = c.gate(i).map_err(|_| {
                Error::FaultSpec(format!("override for gate {i}, but the circuit has {} gates", c.len()))
            })?;
            if let FaultModel::Replace(m) = model {
                check_replacement(g, m)?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::FaultSpec(e.to_string()))?;
        raw.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawSpec::from(self)).expect("fault spec serializes")
    }
}

fn check_replacement(g: &PlacedGate, m: &CMatrix) -> Result<()> {
    let dim = 1usize << g.kind.arity();
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}x{dim} replacement for `{}`", g.kind.name()),
            got: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let deviation = linalg::unitarity_deviation(m);
    if deviation > CUSTOM_UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// The operator a faulty gate applies on its own qubits.
pub fn fault_operator(g: &PlacedGate, m: &FaultModel, _conv: RotationConvention) -> Result<CMatrix> {
    match m {
        FaultModel::Smgf => Ok(CMatrix::identity(1 << g.kind.arity())),
        FaultModel::Replace(r) => {
            check_replacement(g, r)?;
            Ok(r.clone())
        }
    }
}

/// `C^i`: the circuit with only gate `i` faulty. `i = 0` gives the fault-free circuit.
pub fn faulty_variant(c: &Circuit, spec: &FaultSpec, i: usize) -> Result<Circuit> {
    if i == 0 {
        return Ok(c.clone());
    }
    let g = c.gate(i)?.clone();
    let mut out = c.clone();
    match spec.model(i) {
        FaultModel::Smgf => out.remove_gate(i),
        FaultModel::Replace(m) => {
            check_replacement(&g, m)?;
            out.replace_gate(i, PlacedGate { kind: GateKind::Custom(m.clone()), qubits: g.qubits });
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default = "default_kind")]
    default: String,
    #[serde(default)]
    overrides: BTreeMap<String, RawModel>,
}

fn default_kind() -> String {
    "smgf".into()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
}

impl TryFrom<RawSpec> for FaultSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        if !raw.default.eq_ignore_ascii_case("smgf") {
            return Err(Error::FaultSpec(format!("unsupported default model `{}`", raw.default)));
        }
        let mut spec = FaultSpec::smgf();
        for (key, model) in raw.overrides {
            let index: usize = key
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| Error::FaultSpec(format!("invalid gate index `{key}`")))?;
            let model = match (model.kind.to_ascii_lowercase().as_str(), model.matrix) {
                ("smgf", None) => FaultModel::Smgf,
                ("replace", Some(rows)) => {
                    let rows =
                        rows.into_iter().map(|row| row.into_iter().map(|[re, im]| c(re, im)).collect()).collect();
                    FaultModel::Replace(CMatrix::from_rows(rows)?)
                }
                ("replace", None) => return Err(Error::FaultSpec(format!("gate {index}: `replace` needs a matrix"))),
                ("smgf", Some(_)) => return Err(Error::FaultSpec(format!("gate {index}: `smgf` takes no matrix"))),
                (other, _) => return Err(Error::FaultSpec(format!("unknown fault kind `{other}`"))),
            };
            spec.overrides.insert(index, model);
        }
        Ok(spec)
    }
}

impl From<&FaultSpec> for RawSpec {
    fn from(spec: &FaultSpec) -> Self {
        let overrides = spec
            .overrides
            .iter()
            .map(|(i, m)| {
                let raw = match m {
                    FaultModel::Smgf => RawModel { kind: "smgf".into(), matrix: None },
                    FaultModel::Replace(r) => RawModel {
                        kind: "replace".into(),
                        matrix: Some(
                            r.to_rows().iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect(),
                        ),
                    },
                };
                (i.to_string(), raw)
            })
            .collect();
        RawSpec { default: "smgf".into(), overrides }
    }
}
