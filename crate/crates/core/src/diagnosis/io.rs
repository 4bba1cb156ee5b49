//! JSON, CSV and text forms of diagnostic tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{circuit_hash, fault_spec_hash, DiagnosticTable};
use crate::circuit::{Circuit, RotationConvention};
use crate::error::{Error, Result};
use crate::faults::FaultSpec;
use crate::helstrom::OutcomeTriplet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub tool_version: String,
    pub convention: RotationConvention,
    pub circuit_hash: String,
    pub fault_spec_hash: String,
    pub qubits: usize,
    pub gates: usize,
}

impl TableMetadata {
    pub fn for_inputs(c: &Circuit, spec: &FaultSpec, conv: RotationConvention) -> Self {
        TableMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            convention: conv,
            circuit_hash: circuit_hash(c),
            fault_spec_hash: fault_spec_hash(spec),
            qubits: c.num_qubits(),
            gates: c.len(),
        }
    }

    /// Checks that the table was built for exactly these inputs.
    pub fn check_inputs(&self, c: &Circuit, spec: &FaultSpec, conv: RotationConvention) -> Result<()> {
        let expected = TableMetadata::for_inputs(c, spec, conv);
        let mismatch = |what: &str| Err(Error::TableMismatch(format!("{what} differs from the table metadata")));
        if self.circuit_hash != expected.circuit_hash {
            return mismatch("circuit hash");
        }
        if self.fault_spec_hash != expected.fault_spec_hash {
            return mismatch("fault spec hash");
        }
        if self.convention != conv {
            return mismatch("rotation convention");
        }
        Ok(())
    }
}

type Cells = Vec<Option<Vec<[f64; 3]>>>;

#[derive(Serialize, Deserialize)]
struct TableDoc {
    metadata: TableMetadata,
    deltas: Vec<Option<f64>>,
    undetectable: Vec<usize>,
    cells: Cells,
    #[serde(default, skip_deserializing)]
    rounded: Cells,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl DiagnosticTable {
    fn cells_as_arrays(&self, map: impl Fn(f64) -> f64 + Copy) -> Cells {
        self.cells
            .iter()
            .map(|row| row.as_ref().map(|row| row.iter().map(|t| t.as_array().map(map)).collect()))
            .collect()
    }

    /// Full-precision JSON with a 2-decimal `rounded` mirror.
    pub fn to_json(&self) -> String {
        let doc = TableDoc {
            metadata: self.metadata.clone(),
            deltas: self.deltas.clone(),
            undetectable: self.undetectable(),
            cells: self.cells_as_arrays(|x| x),
            rounded: self.cells_as_arrays(round2),
        };
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDoc =
            serde_json::from_str(text).map_err(|e| Error::TableMismatch(format!("unreadable table: {e}")))?;
        let cells = doc
            .cells
            .into_iter()
            .map(|row| row.map(|row| row.into_iter().map(|[a, b, c]| OutcomeTriplet::new(a, b, c)).collect()))
            .collect();
        DiagnosticTable::new(doc.metadata, doc.deltas, cells)
    }

    /// CSV with header `test,variant,p0,p1,punknown`; undetectable rows are omitted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("test,variant,p0,p1,punknown\n");
        for q in 1..=self.gates() {
            if let Some(row) = self.row(q) {
                for (r, t) in row.iter().enumerate() {
                    writeln!(out, "{q},{r},{},{},{}", t.p0, t.p1, t.p_unknown).expect("string write");
                }
            }
        }
        out
    }

    /// Human-readable grid rounded to 2 decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write!(out, "{:<10}", "Test").expect("string write");
        for r in 0..=self.gates() {
            write!(out, " {:>18}", format!("C{r}")).expect("string write");
        }
        out.push('\n');
        for q in 1..=self.gates() {
            write!(out, "{:<10}", format!("Test(F{q})")).expect("string write");
            match self.row(q) {
                Some(row) => {
                    for t in row {
                        let cell = format!("({:.2},{:.2},{:.2})", t.p0, t.p1, t.p_unknown);
                        write!(out, " {cell:>18}").expect("string write");
                    }
                }
                None => out.push_str(" undetectable"),
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::three_qubit_cnot;
    use crate::diagnosis::build_table;

    #[test]
    fn json_round_trip() {
        let c0 = three_qubit_cnot();
        let t = build_table(&c0, &FaultSpec::smgf(), RotationConvention::FullAngle).unwrap();
        let json = t.to_json();
        assert!(json.contains("\"rounded\""));
        assert_eq!(DiagnosticTable::from_json(&json).unwrap(), t);
        assert!(DiagnosticTable::from_json("{}").is_err());
    }

    #[test]
    fn csv_layout() {
        let c0 = three_qubit_cnot();
        let t = build_table(&c0, &FaultSpec::smgf(), RotationConvention::FullAngle).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "test,variant,p0,p1,punknown");
        assert_eq!(lines.len(), 1 + 6 * 7);
        assert!(lines[1].starts_with("1,0,"));
    }

    #[test]
    fn metadata_detects_changes() {
        let c0 = three_qubit_cnot();
        let spec = FaultSpec::smgf();
        let m = TableMetadata::for_inputs(&c0, &spec, RotationConvention::FullAngle);
        assert!(m.check_inputs(&c0, &spec, RotationConvention::FullAngle).is_ok());
        assert!(m.check_inputs(&c0, &spec, RotationConvention::HalfAngle).is_err());
        let other = c0.clone().with(crate::circuit::GateKind::X, &[1]);
        assert!(m.check_inputs(&other, &spec, RotationConvention::FullAngle).is_err());
    }
}
