//! Scenario file schema (version 1) and conversion to core systems.
//!
//! Complex numbers are `[re, im]` pairs, matrices row-major nested arrays.
//! See `docs/scenario-schema.md` for the full format documentation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qot_core::finalg::{AlgElement, BlockAlgebra, FaithfulState, SuperOp, SuperOpFlags};
use qot_core::systems::SystemVN;

pub type Mat = Vec<Vec<[f64; 2]>>;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub systems: BTreeMap<String, SystemSpec>,
    #[serde(default)]
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// Block dimensions of the algebra, `{"blocks": [2, 1]}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    /// Sugar for classical chains: probabilities and a row-stochastic
    /// transition matrix, expanded to 1×1 blocks with identity reversal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSpec>,
    /// Blockwise density matrices of the state (non-classical systems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<Mat>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dynamics: Vec<DynamicsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reversing: Option<ReversingSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coords: Vec<CoordSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalSpec {
    pub p: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub name: String,
    /// Kraus operators, each a blockwise element; the map is
    /// `a ↦ Σ_s K_s† a K_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<Mat>>>,
    /// Raw superoperator matrix in the documented element basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Mat>,
    /// Classical transition matrix (abelian systems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReversingSpec {
    Named(String),
    Matrix { matrix: Mat },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordSpec {
    /// Scalar values on an abelian algebra.
    Flat(Vec<f64>),
    /// Blockwise complex matrices.
    Blocks(Vec<Mat>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Distance(DistanceTask),
    Plan(PlanTask),
    Dual(DualTask),
    CheckDb(CheckDbTask),
    Bound(BoundTask),
    PaperExample(PaperExampleTask),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceTask {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanTask {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// When present, evaluate this coupling (blocks over pair indices)
    /// instead of solving for an optimal one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<Mat>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualTask {
    pub system: String,
    /// `prime`, `kms` or `reverse`.
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDbTask {
    pub system: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundTask {
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaperExampleTask {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Debug)]
pub struct SchemaError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn err(field: &str, message: impl Into<String>) -> SchemaError {
    SchemaError { field: field.into(), message: message.into() }
}

pub fn mat_from_rep(rep: &Mat, field: &str) -> Result<nalgebra::DMatrix<Complex64>, SchemaError> {
    let nr = rep.len();
    if nr == 0 {
        return Err(err(field, "empty matrix"));
    }
    let nc = rep[0].len();
    if rep.iter().any(|r| r.len() != nc) {
        return Err(err(field, "ragged matrix rows"));
    }
    let mut m = nalgebra::DMatrix::zeros(nr, nc);
    for (i, row) in rep.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

pub fn mat_to_rep(m: &nalgebra::DMatrix<Complex64>) -> Mat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, SchemaError> {
        let deserializer = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(deserializer)
            .map_err(|e| err(&e.path().to_string(), e.inner().to_string()))?;
        if scenario.version != SCHEMA_VERSION {
            return Err(err(
                "version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", scenario.version),
            ));
        }
        Ok(scenario)
    }

    /// Build every declared system, in declaration order.
    pub fn build_systems(
        &self,
    ) -> Result<BTreeMap<String, SystemVN>, (String, qot_core::QotError)> {
        let mut out = BTreeMap::new();
        for (name, spec) in &self.systems {
            let sys = spec
                .build()
                .map_err(|e| (name.clone(), e))?;
            out.insert(name.clone(), sys);
        }
        Ok(out)
    }
}

impl SystemSpec {
    pub fn build(&self) -> qot_core::Result<SystemVN> {
        if let Some(classical) = &self.classical {
            let n = classical.p.len();
            let t = DMatrix::from_fn(n, n, |i, j| classical.t[i][j]);
            let coords: Vec<Vec<f64>> = self
                .coords
                .iter()
                .map(|c| match c {
                    CoordSpec::Flat(v) => Ok(v.clone()),
                    CoordSpec::Blocks(_) => Err(qot_core::QotError::ShapeMismatch(
                        "classical systems take flat coordinate lists".into(),
                    )),
                })
                .collect::<qot_core::Result<_>>()?;
            return SystemVN::classical_chain(&classical.p, &t, coords);
        }

        let blocks = self.blocks.clone().ok_or_else(|| {
            qot_core::QotError::ShapeMismatch("system needs either 'classical' or 'blocks'".into())
        })?;
        let algebra = BlockAlgebra::new(blocks)?;
        let state_mats = self.state.as_ref().ok_or_else(|| {
            qot_core::QotError::ShapeMismatch("non-classical system needs 'state'".into())
        })?;
        let rho = state_mats
            .iter()
            .map(|m| mat_from_rep(m, "state").map_err(|e| qot_core::QotError::ShapeMismatch(e.to_string())))
            .collect::<qot_core::Result<Vec<_>>>()?;
        let state = FaithfulState::new(algebra.clone(), rho)?;

        let mut dynamics = Vec::with_capacity(self.dynamics.len());
        for d in &self.dynamics {
            let map = d.build(&algebra)?;
            dynamics.push((d.name.clone(), map));
        }

        let reversing = match &self.reversing {
            None => None,
            Some(ReversingSpec::Named(n)) if n == "transpose" => {
                Some(SuperOp::transpose_map(&algebra))
            }
            Some(ReversingSpec::Named(n)) if n == "identity" => Some(
                SuperOp::identity(&algebra).with_flags(SuperOpFlags {
                    unital: true,
                    positive: true,
                    cp: true,
                    anti: algebra.abelian(),
                })?,
            ),
            Some(ReversingSpec::Named(n)) => {
                return Err(qot_core::QotError::ShapeMismatch(format!(
                    "unknown reversing operation '{n}' (use 'transpose', 'identity' or a matrix)"
                )))
            }
            Some(ReversingSpec::Matrix { matrix }) => {
                let m = mat_from_rep(matrix, "reversing.matrix")
                    .map_err(|e| qot_core::QotError::ShapeMismatch(e.to_string()))?;
                Some(SuperOp::from_matrix(algebra.clone(), algebra.clone(), m)?.with_flags(
                    SuperOpFlags { unital: true, positive: true, cp: false, anti: true },
                )?)
            }
        };

        let coords = self
            .coords
            .iter()
            .map(|c| match c {
                CoordSpec::Flat(v) => {
                    if algebra.abelian() && v.len() == algebra.n_blocks() {
                        Ok(AlgElement::classical(v))
                    } else {
                        Err(qot_core::QotError::ShapeMismatch(
                            "flat coordinates only fit abelian algebras".into(),
                        ))
                    }
                }
                CoordSpec::Blocks(mats) => {
                    let blocks = mats
                        .iter()
                        .map(|m| {
                            mat_from_rep(m, "coords").map_err(|e| {
                                qot_core::QotError::ShapeMismatch(e.to_string())
                            })
                        })
                        .collect::<qot_core::Result<Vec<_>>>()?;
                    AlgElement::new(&algebra, blocks)
                }
            })
            .collect::<qot_core::Result<Vec<_>>>()?;

        SystemVN::new(state, dynamics, reversing, coords)
    }

    /// Canonical serialized form of a constructed system (matrix-based).
    pub fn from_system(sys: &SystemVN) -> SystemSpec {
        SystemSpec {
            blocks: Some(sys.algebra().block_dims().to_vec()),
            classical: None,
            state: Some(sys.state().rho().iter().map(mat_to_rep).collect()),
            dynamics: sys
                .dynamics()
                .iter()
                .map(|(name, map)| DynamicsSpec {
                    name: name.clone(),
                    kraus: None,
                    matrix: Some(mat_to_rep(map.matrix())),
                    transition: None,
                })
                .collect(),
            reversing: sys
                .reversing()
                .map(|theta| ReversingSpec::Matrix { matrix: mat_to_rep(theta.matrix()) }),
            coords: sys
                .coords()
                .iter()
                .map(|k| CoordSpec::Blocks(k.blocks().iter().map(mat_to_rep).collect()))
                .collect(),
        }
    }
}

impl DynamicsSpec {
    fn build(&self, algebra: &BlockAlgebra) -> qot_core::Result<SuperOp> {
        let provided =
            self.kraus.is_some() as u8 + self.matrix.is_some() as u8 + self.transition.is_some() as u8;
        if provided != 1 {
            return Err(qot_core::QotError::ShapeMismatch(format!(
                "dynamics '{}' needs exactly one of 'kraus', 'matrix', 'transition'",
                self.name
            )));
        }
        if let Some(t) = &self.transition {
            let n = algebra.n_blocks();
            let tm = DMatrix::from_fn(n, n, |i, j| t[i][j]);
            return SuperOp::classical_transition(algebra, &tm)?.with_flags(SuperOpFlags {
                unital: true,
                positive: true,
                cp: true,
                anti: false,
            });
        }
        if let Some(kraus) = &self.kraus {
            let ops: Vec<AlgElement> = kraus
                .iter()
                .map(|mats| {
                    let blocks = mats
                        .iter()
                        .map(|m| {
                            mat_from_rep(m, "dynamics.kraus").map_err(|e| {
                                qot_core::QotError::ShapeMismatch(e.to_string())
                            })
                        })
                        .collect::<qot_core::Result<Vec<_>>>()?;
                    AlgElement::new(algebra, blocks)
                })
                .collect::<qot_core::Result<_>>()?;
            let map = SuperOp::from_action(algebra, algebra, |a| {
                let mut acc = algebra.zero();
                for k in &ops {
                    acc = acc.add(&k.adjoint().mul(a).mul(k));
                }
                acc
            });
            return map.with_flags(SuperOpFlags {
                unital: true,
                positive: true,
                cp: true,
                anti: false,
            });
        }
        let m = mat_from_rep(self.matrix.as_ref().expect("checked above"), "dynamics.matrix")
            .map_err(|e| qot_core::QotError::ShapeMismatch(e.to_string()))?;
        let map = SuperOp::from_matrix(algebra.clone(), algebra.clone(), m)?;
        // raw matrices must still be unital positive dynamics; cp detected
        let cp = map.min_choi_eig() >= -1e-10;
        map.with_flags(SuperOpFlags { unital: true, positive: true, cp, anti: false })
    }
}
