//! Problem JSON:
//!
//! ```json
//! {"type": "maxcut", "n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]], "reference_cost": -2.0}
//! ```
//!
//! `type` is one of `ising` (`couplings`, `fields`, `constant`), `qubo`
//! (`terms`, `offset`), `maxcut` (`edges`) or `portfolio` (`spec`).

use std::path::Path;

use qite_core::ordering::HierarchyDims;
use qite_core::problem::{IsingModel, PortfolioSpec, QuboModel, WeightedGraph};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Problem {
    Ising {
        n: usize,
        couplings: Vec<(usize, usize, f64)>,
        #[serde(default)]
        fields: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    Qubo {
        n: usize,
        terms: Vec<(usize, usize, f64)>,
        #[serde(default)]
        offset: f64,
    },
    Maxcut {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
    Portfolio {
        n: usize,
        spec: PortfolioSpec,
    },
}

/// How an instance was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(flatten)]
    pub problem: Problem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Provenance>,
}

/// A validated instance ready for the solver.
#[derive(Clone, Debug)]
pub struct Instance {
    pub model: IsingModel,
    pub portfolio: Option<PortfolioSpec>,
    pub reference_cost: Option<f64>,
}

impl Instance {
    pub fn hierarchy(&self) -> Option<HierarchyDims> {
        self.portfolio.as_ref().map(|s| HierarchyDims { assets: s.assets, times: s.times, bits: s.bits })
    }
}

fn data(e: qite_core::Error) -> CliError {
    CliError::Data(e.to_string())
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::Ising { n, .. }
            | Problem::Qubo { n, .. }
            | Problem::Maxcut { n, .. }
            | Problem::Portfolio { n, .. } => *n,
        }
    }

    /// Cost model over bits, plus the portfolio spec when there is one.
    pub fn to_ising(&self) -> CliResult<(IsingModel, Option<PortfolioSpec>)> {
        if self.n() == 0 {
            return Err(CliError::Data("problem has no variables".into()));
        }
        match self {
            Problem::Ising { n, couplings, fields, constant } => {
                let mut m = IsingModel::new(*n);
                for &(i, j, v) in couplings {
                    m.add_coupling(i, j, v).map_err(data)?;
                }
                if !fields.is_empty() && fields.len() != *n {
                    return Err(CliError::Data(format!("{} fields for {n} spins", fields.len())));
                }
                for (q, &h) in fields.iter().enumerate() {
                    m.add_field(q, h).map_err(data)?;
                }
                m.set_constant(*constant);
                Ok((m, None))
            }
            Problem::Qubo { n, terms, offset } => {
                let mut q = QuboModel::new(*n);
                for &(i, j, v) in terms {
                    q.add_term(i, j, v).map_err(data)?;
                }
                q.add_offset(*offset);
                Ok((q.to_ising(), None))
            }
            Problem::Maxcut { n, edges } => {
                Ok((WeightedGraph::new(*n, edges.clone()).map_err(data)?.maxcut_ising(), None))
            }
            Problem::Portfolio { n, spec } => {
                if spec.n_vars() != *n {
                    return Err(CliError::Data(format!(
                        "portfolio spec has {} variables, file says {n}",
                        spec.n_vars()
                    )));
                }
                let qubo = spec.build_qubo().map_err(data)?;
                Ok((qubo.to_ising(), Some(spec.clone())))
            }
        }
    }
}

impl ProblemFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        crate::json::read(path)
    }

    pub fn instance(&self) -> CliResult<Instance> {
        let (model, portfolio) = self.problem.to_ising()?;
        if let Some(r) = self.reference_cost {
            if !r.is_finite() {
                return Err(CliError::Data("reference_cost is not finite".into()));
            }
        }
        Ok(Instance { model, portfolio, reference_cost: self.reference_cost })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_type() {
        let cases = [
            r#"{"type":"maxcut","n":3,"edges":[[0,1,1.0],[1,2,1.0],[0,2,1.0]],"reference_cost":-2}"#,
            r#"{"type":"ising","n":2,"couplings":[[0,1,1.0]],"fields":[0.5,0.0]}"#,
            r#"{"type":"qubo","n":2,"terms":[[0,0,1.0],[0,1,-2.0]],"offset":0.25}"#,
        ];
        for text in cases {
            let f: ProblemFile = serde_json::from_str(text).unwrap();
            f.instance().unwrap();
            let again: ProblemFile = serde_json::from_str(&crate::json::to_string(&f)).unwrap();
            assert_eq!(again, f);
        }
        let f: ProblemFile = serde_json::from_str(cases[0]).unwrap();
        assert_eq!(f.reference_cost, Some(-2.0));
    }

    #[test]
    fn rejects_bad_content() {
        for text in [
            r#"{"type":"maxcut","n":2,"edges":[[0,0,1.0]]}"#,
            r#"{"type":"ising","n":2,"couplings":[],"fields":[1.0]}"#,
            r#"{"type":"qubo","n":0,"terms":[]}"#,
        ] {
            let f: ProblemFile = serde_json::from_str(text).unwrap();
            assert!(matches!(f.instance(), Err(CliError::Data(_))), "{text}");
        }
        assert!(serde_json::from_str::<ProblemFile>(r#"{"type":"cubic","n":2}"#).is_err());
    }
}
