//! JSON scenario files.
//!
//! Matrices are lists of rows, each entry a `[re, im]` pair:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "states": [{"label": "rho1", "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}, ...],
//!   "priors": [0.5, 0.5],
//!   "povms": [{"name": "z", "elements": [<matrix>, <matrix>]}],
//!   "options": {"psd_tol": 1e-10, "sum_tol": 1e-10, "seed": 7}
//! }
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use bedqsd::linalg::{ComplexMatrix, PSD_TOL, C64};
use bedqsd::{DensityMatrix, Hermitian, Povm, Scenario};

use crate::error::{CliError, CliResult};

const EXAMPLE1: &str = include_str!("../fixtures/example1.json");
const FIG1: &str = include_str!("../fixtures/fig1.json");

/// Names that resolve to a bundled scenario when no such file exists.
pub const BUNDLED: &[&str] = &["example1", "fig1"];

/// Default completeness tolerance for POVMs read from files.
pub const SUM_TOL: f64 = 1e-10;

pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "example1" => Some(EXAMPLE1),
        "fig1" => Some(FIG1),
        _ => None,
    }
}

type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub dim: usize,
    pub states: Vec<StateEntry>,
    pub priors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub povms: Vec<PovmEntry>,
    #[serde(default)]
    pub options: FileOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub label: String,
    pub matrix: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmEntry {
    pub name: String,
    pub elements: Vec<Rows>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct NamedPovm {
    pub name: String,
    pub povm: Povm,
}

/// A validated scenario file.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    /// File stem or bundled name, used as the scenario id in result tables.
    pub id: String,
    pub scenario: Scenario,
    pub labels: Vec<String>,
    pub povms: Vec<NamedPovm>,
    pub seed: Option<u64>,
}

impl LoadedScenario {
    pub fn povm(&self, name: &str) -> CliResult<&Povm> {
        self.povms
            .iter()
            .find(|p| p.name == name)
            .map(|p| &p.povm)
            .ok_or_else(|| {
                let known: Vec<&str> = self.povms.iter().map(|p| p.name.as_str()).collect();
                CliError::Validation(format!(
                    "{}: no POVM named '{name}' (known: {})",
                    self.id,
                    if known.is_empty() { "none".into() } else { known.join(", ") }
                ))
            })
    }

    pub fn label(&self, message: usize) -> &str {
        &self.labels[message]
    }
}

/// Reads a scenario from `path`, or from the bundled fixture of that name
/// when no such file exists.
pub fn parse_scenario(path: &str) -> CliResult<LoadedScenario> {
    parse_scenario_with(path, None)
}

/// As [`parse_scenario`]; `tol` overrides both validation tolerances.
pub fn parse_scenario_with(path: &str, tol: Option<f64>) -> CliResult<LoadedScenario> {
    let p = Path::new(path);
    if !p.exists() {
        if let Some(text) = bundled(path) {
            return parse_scenario_str(text, path, tol);
        }
    }
    let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
    let id = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string());
    parse_scenario_str(&text, &id, tol)
}

pub fn parse_scenario_str(text: &str, id: &str, tol: Option<f64>) -> CliResult<LoadedScenario> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            CliError::Validation(format!("{id}: {inner}"))
        } else {
            CliError::Validation(format!("{id}: field `{path}`: {inner}"))
        }
    })?;
    validate(file, id, tol)
}

fn validate(file: ScenarioFile, id: &str, tol: Option<f64>) -> CliResult<LoadedScenario> {
    let fail = |msg: String| CliError::Validation(format!("{id}: {msg}"));
    let psd_tol = tol.or(file.options.psd_tol).unwrap_or(PSD_TOL);
    let sum_tol = tol.or(file.options.sum_tol).unwrap_or(SUM_TOL);
    if file.dim == 0 {
        return Err(fail("`dim` must be at least 1".into()));
    }
    if file.states.is_empty() {
        return Err(fail("`states` is empty".into()));
    }

    let mut states = Vec::with_capacity(file.states.len());
    for (i, s) in file.states.iter().enumerate() {
        let at = format!("states[{i}] ({})", s.label);
        let h = hermitian(&s.matrix, file.dim).map_err(|m| fail(format!("{at}: {m}")))?;
        let rho = DensityMatrix::with_tolerance(h, psd_tol).map_err(|e| fail(format!("{at}: {e}")))?;
        states.push(rho);
    }
    let scenario = Scenario::new(states, file.priors.clone()).map_err(|e| fail(e.to_string()))?;

    let mut povms: Vec<NamedPovm> = Vec::with_capacity(file.povms.len());
    for (k, p) in file.povms.iter().enumerate() {
        if povms.iter().any(|q| q.name == p.name) {
            return Err(fail(format!("povms[{k}]: duplicate name '{}'", p.name)));
        }
        let mut elements = Vec::with_capacity(p.elements.len());
        for (y, rows) in p.elements.iter().enumerate() {
            let h = hermitian(rows, file.dim)
                .map_err(|m| fail(format!("povms[{k}] ({}).elements[{y}]: {m}", p.name)))?;
            elements.push(h);
        }
        let povm = Povm::with_tolerance(elements, psd_tol, sum_tol)
            .map_err(|e| fail(format!("povms[{k}] ({}): {e}", p.name)))?;
        povms.push(NamedPovm {
            name: p.name.clone(),
            povm,
        });
    }

    Ok(LoadedScenario {
        id: id.to_string(),
        scenario,
        labels: file.states.into_iter().map(|s| s.label).collect(),
        povms,
        seed: file.options.seed,
    })
}

fn hermitian(rows: &Rows, dim: usize) -> Result<Hermitian, String> {
    if rows.len() != dim {
        return Err(format!("{} rows, expected {dim}", rows.len()));
    }
    if let Some(r) = rows.iter().position(|row| row.len() != dim) {
        return Err(format!("row {r} has {} entries, expected {dim}", rows[r].len()));
    }
    let m = ComplexMatrix::from_fn(dim, dim, |r, c| C64::new(rows[r][c][0], rows[r][c][1]));
    Hermitian::new(m).map_err(|e| e.to_string())
}

fn rows_of(h: &Hermitian) -> Rows {
    let m = h.matrix();
    (0..h.dim())
        .map(|r| (0..h.dim()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

impl ScenarioFile {
    pub fn from_parts(labels: &[String], scenario: &Scenario, povms: &[NamedPovm], seed: Option<u64>) -> Self {
        ScenarioFile {
            dim: scenario.dim(),
            states: labels
                .iter()
                .zip(scenario.states())
                .map(|(l, s)| StateEntry {
                    label: l.clone(),
                    matrix: rows_of(s.matrix()),
                })
                .collect(),
            priors: scenario.priors().to_vec(),
            povms: povms
                .iter()
                .map(|p| PovmEntry {
                    name: p.name.clone(),
                    elements: p.povm.elements().iter().map(rows_of).collect(),
                })
                .collect(),
            options: FileOptions {
                seed,
                ..FileOptions::default()
            },
        }
    }

    /// Pretty JSON with one matrix row per line. Numbers use the shortest
    /// representation that parses back to the same `f64`.
    pub fn render(&self) -> String {
        let num = |x: f64| serde_json::to_string(&x).expect("finite number");
        let text = |s: &str| serde_json::to_string(s).expect("string");
        let matrix = |rows: &Rows, indent: &str| {
            let lines: Vec<String> = rows
                .iter()
                .map(|row| {
                    let cells: Vec<String> =
                        row.iter().map(|[re, im]| format!("[{}, {}]", num(*re), num(*im))).collect();
                    format!("{indent}  [{}]", cells.join(", "))
                })
                .collect();
            format!("[\n{}\n{indent}]", lines.join(",\n"))
        };

        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"dim\": {},", self.dim);
        out.push_str("  \"states\": [\n");
        let states: Vec<String> = self
            .states
            .iter()
            .map(|s| format!("    {{\"label\": {}, \"matrix\": {}}}", text(&s.label), matrix(&s.matrix, "    ")))
            .collect();
        out.push_str(&states.join(",\n"));
        out.push_str("\n  ],\n");
        let priors: Vec<String> = self.priors.iter().map(|&q| num(q)).collect();
        let _ = write!(out, "  \"priors\": [{}]", priors.join(", "));
        if !self.povms.is_empty() {
            out.push_str(",\n  \"povms\": [\n");
            let povms: Vec<String> = self
                .povms
                .iter()
                .map(|p| {
                    let elements: Vec<String> = p
                        .elements
                        .iter()
                        .map(|e| format!("      {}", matrix(e, "      ")))
                        .collect();
                    format!(
                        "    {{\"name\": {}, \"elements\": [\n{}\n    ]}}",
                        text(&p.name),
                        elements.join(",\n")
                    )
                })
                .collect();
            out.push_str(&povms.join(",\n"));
            out.push_str("\n  ]");
        }
        let o = &self.options;
        let mut fields = Vec::new();
        if let Some(t) = o.psd_tol {
            fields.push(format!("\"psd_tol\": {}", num(t)));
        }
        if let Some(t) = o.sum_tol {
            fields.push(format!("\"sum_tol\": {}", num(t)));
        }
        if let Some(s) = o.seed {
            fields.push(format!("\"seed\": {s}"));
        }
        if !fields.is_empty() {
            let _ = write!(out, ",\n  \"options\": {{{}}}", fields.join(", "));
        }
        out.push_str("\n}\n");
        out
    }
}
