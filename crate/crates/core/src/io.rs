//! JSON model and update files, and a single entry point that repairs a
//! sample with whichever sampler fits the model type.
//!
//! Generic factor graphs have no `"type"` key:
//!
//! ```json
//! {"variables":[{"q":2,"phi":[0.5,0.5]}],"constraints":[{"scope":[0,1],"table":[1,0.5,0.5,1]}]}
//! ```
//!
//! Spin models are tagged: `{"type":"ising","edges":[[0,1,0.3]],"fields":[[0.5,0.5],...]}`,
//! `{"type":"potts","q":3,"edges":[[0,1,-0.2]]}` and
//! `{"type":"hardcore","edges":[[0,1]],"lambda":[0.3,0.3]}`. `"n"` is
//! optional for Ising and Potts; it defaults to the length of `"fields"` or
//! to one past the largest vertex. An update file is a JSON list whose
//! entries have the shape of `UpdateRequest`, `SpinUpdate` or
//! `HardcoreUpdate` for the respective model type.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::factor_graph::{Configuration, GraphicalModel, UpdateRequest, VarId};
use crate::resample_engine::{
    bootstrap_sample, dynamic_sample, EngineOptions, ResampleState, TraceStats,
};
use crate::rng::RngStream;
use crate::spin_models::{
    hardcore_dynamic_sample, ising_dynamic_sample, potts_dynamic_sample, HardcoreModel,
    HardcoreUpdate, IsingModel, PottsModel, SpinUpdate,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableSpec {
    q: usize,
    phi: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintSpec {
    scope: Vec<VarId>,
    table: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorGraphFile {
    variables: Vec<VariableSpec>,
    #[serde(default)]
    constraints: Vec<ConstraintSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsingFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default)]
    edges: Vec<(VarId, VarId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fields: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PottsFile {
    q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default)]
    edges: Vec<(VarId, VarId, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fields: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HardcoreFile {
    #[serde(default)]
    edges: Vec<(VarId, VarId)>,
    lambda: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum TaggedFile {
    Ising(IsingFile),
    Potts(PottsFile),
    Hardcore(HardcoreFile),
}

/// A model of any supported type.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    FactorGraph(GraphicalModel),
    Ising(IsingModel),
    Potts(PottsModel),
    Hardcore(HardcoreModel),
}

/// One update, matching the model type it applies to.
#[derive(Debug, Clone, PartialEq)]
pub enum Update {
    FactorGraph(UpdateRequest),
    Spin(SpinUpdate),
    Hardcore(HardcoreUpdate),
}

fn vertex_count(
    n: Option<usize>,
    fields: &Option<Vec<Vec<f64>>>,
    edges: &[(VarId, VarId, f64)],
) -> usize {
    n.or(fields.as_ref().map(Vec::len)).unwrap_or_else(|| {
        edges
            .iter()
            .map(|(u, v, _)| u.max(v) + 1)
            .max()
            .unwrap_or(0)
    })
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let value: Value = serde_json::from_str(text).map_err(parse_err)?;
    if value.get("type").is_none() {
        let file: FactorGraphFile = serde_json::from_value(value).map_err(parse_err)?;
        let mut weights = Vec::with_capacity(file.variables.len());
        for (v, spec) in file.variables.into_iter().enumerate() {
            if spec.q != spec.phi.len() {
                return Err(Error::LengthMismatch {
                    what: format!("phi of variable {v}"),
                    expected: spec.q,
                    actual: spec.phi.len(),
                });
            }
            weights.push(spec.phi);
        }
        let constraints = file
            .constraints
            .into_iter()
            .map(|c| (c.scope, c.table))
            .collect();
        return Ok(ModelSpec::FactorGraph(GraphicalModel::from_tables(
            weights,
            constraints,
        )?));
    }
    match serde_json::from_value(value).map_err(parse_err)? {
        TaggedFile::Ising(f) => {
            let n = vertex_count(f.n, &f.fields, &f.edges);
            let mut m = IsingModel::new(n, f.edges)?;
            if let Some(fields) = f.fields {
                m = m.with_fields(fields)?;
            }
            Ok(ModelSpec::Ising(m))
        }
        TaggedFile::Potts(f) => {
            let n = vertex_count(f.n, &f.fields, &f.edges);
            let mut m = PottsModel::new(n, f.q, f.edges)?;
            if let Some(fields) = f.fields {
                m = m.with_fields(fields)?;
            }
            Ok(ModelSpec::Potts(m))
        }
        TaggedFile::Hardcore(f) => Ok(ModelSpec::Hardcore(HardcoreModel::new(
            f.lambda.len(),
            f.edges,
            f.lambda,
        )?)),
    }
}

fn pairwise_edges(graph: &crate::spin_models::Graph, betas: &[f64]) -> Vec<(VarId, VarId, f64)> {
    graph
        .edges()
        .iter()
        .zip(betas)
        .map(|((u, v), b)| (*u, *v, *b))
        .collect()
}

/// Serializes a model in the format read by [`parse_model`].
pub fn model_to_json(model: &ModelSpec) -> String {
    let value = match model {
        ModelSpec::FactorGraph(m) => serde_json::to_value(FactorGraphFile {
            variables: m
                .variables()
                .iter()
                .map(|f| VariableSpec {
                    q: f.q(),
                    phi: f.weights().to_vec(),
                })
                .collect(),
            constraints: m
                .constraints()
                .map(|(_, c)| ConstraintSpec {
                    scope: c.scope().to_vec(),
                    table: c.table().to_vec(),
                })
                .collect(),
        }),
        ModelSpec::Ising(m) => serde_json::to_value(TaggedFile::Ising(IsingFile {
            n: Some(m.num_vertices()),
            edges: pairwise_edges(m.graph(), m.betas()),
            fields: Some(
                (0..m.num_vertices())
                    .map(|v| m.field(v).weights().to_vec())
                    .collect(),
            ),
        })),
        ModelSpec::Potts(m) => serde_json::to_value(TaggedFile::Potts(PottsFile {
            q: m.q(),
            n: Some(m.num_vertices()),
            edges: pairwise_edges(m.graph(), m.betas()),
            fields: Some(
                (0..m.num_vertices())
                    .map(|v| m.field(v).weights().to_vec())
                    .collect(),
            ),
        })),
        ModelSpec::Hardcore(m) => serde_json::to_value(TaggedFile::Hardcore(HardcoreFile {
            edges: m.active_edges().collect(),
            lambda: m.lambda().to_vec(),
        })),
    };
    value.expect("model serializes").to_string()
}

/// Parses a JSON list of updates in the shape that matches `model`.
pub fn parse_updates(model: &ModelSpec, text: &str) -> Result<Vec<Update>> {
    Ok(match model {
        ModelSpec::FactorGraph(_) => serde_json::from_str::<Vec<UpdateRequest>>(text)
            .map_err(parse_err)?
            .into_iter()
            .map(Update::FactorGraph)
            .collect(),
        ModelSpec::Ising(_) | ModelSpec::Potts(_) => serde_json::from_str::<Vec<SpinUpdate>>(text)
            .map_err(parse_err)?
            .into_iter()
            .map(Update::Spin)
            .collect(),
        ModelSpec::Hardcore(_) => serde_json::from_str::<Vec<HardcoreUpdate>>(text)
            .map_err(parse_err)?
            .into_iter()
            .map(Update::Hardcore)
            .collect(),
    })
}

pub fn updates_to_json(updates: &[Update]) -> String {
    let values: Vec<Value> = updates
        .iter()
        .map(|u| match u {
            Update::FactorGraph(r) => serde_json::to_value(r),
            Update::Spin(s) => serde_json::to_value(s),
            Update::Hardcore(h) => serde_json::to_value(h),
        })
        .collect::<std::result::Result<_, _>>()
        .expect("updates serialize");
    Value::Array(values).to_string()
}

fn mismatch(model: &ModelSpec) -> Error {
    Error::Parse(format!("update does not match a {} model", model.kind()))
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::FactorGraph(_) => "factor graph",
            ModelSpec::Ising(_) => "ising",
            ModelSpec::Potts(_) => "potts",
            ModelSpec::Hardcore(_) => "hardcore",
        }
    }

    pub fn num_variables(&self) -> usize {
        match self {
            ModelSpec::FactorGraph(m) => m.num_variables(),
            ModelSpec::Ising(m) => m.num_vertices(),
            ModelSpec::Potts(m) => m.num_vertices(),
            ModelSpec::Hardcore(m) => m.num_vertices(),
        }
    }

    /// The equivalent normalized factor graph.
    pub fn to_factor_graph(&self) -> GraphicalModel {
        match self {
            ModelSpec::FactorGraph(m) => m.normalize(),
            ModelSpec::Ising(m) => m.to_factor_graph(),
            ModelSpec::Potts(m) => m.to_factor_graph(),
            ModelSpec::Hardcore(m) => m.to_factor_graph(),
        }
    }

    /// The same update expressed on the converted factor graph.
    pub fn factor_update(&self, update: &Update) -> Result<UpdateRequest> {
        match (self, update) {
            (ModelSpec::FactorGraph(_), Update::FactorGraph(r)) => Ok(r.clone()),
            (ModelSpec::Ising(m), Update::Spin(s)) => Ok(m.factor_update(s)),
            (ModelSpec::Potts(m), Update::Spin(s)) => Ok(m.factor_update(s)),
            (ModelSpec::Hardcore(m), Update::Hardcore(h)) => Ok(m.factor_update(h)),
            _ => Err(mismatch(self)),
        }
    }

    pub fn apply_update(&self, update: &Update) -> Result<ModelSpec> {
        match (self, update) {
            (ModelSpec::FactorGraph(m), Update::FactorGraph(r)) => {
                Ok(ModelSpec::FactorGraph(m.normalize().apply_update(r)?))
            }
            (ModelSpec::Ising(m), Update::Spin(s)) => Ok(ModelSpec::Ising(m.apply_update(s)?)),
            (ModelSpec::Potts(m), Update::Spin(s)) => Ok(ModelSpec::Potts(m.apply_update(s)?)),
            (ModelSpec::Hardcore(m), Update::Hardcore(h)) => {
                Ok(ModelSpec::Hardcore(m.apply_update(h)?))
            }
            _ => Err(mismatch(self)),
        }
    }

    /// Exact sample built up from the product distribution.
    pub fn bootstrap_sample(&self, rng: &RngStream, opts: &EngineOptions) -> Result<Configuration> {
        match self {
            ModelSpec::FactorGraph(m) => bootstrap_sample(m, rng, opts),
            ModelSpec::Ising(m) => m.bootstrap_sample(rng, opts),
            ModelSpec::Potts(m) => m.bootstrap_sample(rng, opts),
            ModelSpec::Hardcore(m) => m.bootstrap_sample(rng, opts),
        }
    }

    /// Applies `update` and repairs `config`, an exact sample of `self`,
    /// into an exact sample of the updated model.
    pub fn step(
        &self,
        update: &Update,
        config: Configuration,
        rng: &RngStream,
        opts: &EngineOptions,
    ) -> Result<(ModelSpec, Configuration, TraceStats)> {
        let next = self.apply_update(update)?;
        let (x, stats) = match (&next, update) {
            (ModelSpec::FactorGraph(m), Update::FactorGraph(r)) => {
                dynamic_sample(m, ResampleState::new(config, m.vbl(r)), rng, opts)?
            }
            (ModelSpec::Ising(m), Update::Spin(s)) => {
                ising_dynamic_sample(m, ResampleState::new(config, s.vbl()), rng, opts)?
            }
            (ModelSpec::Potts(m), Update::Spin(s)) => {
                potts_dynamic_sample(m, ResampleState::new(config, s.vbl()), rng, opts)?
            }
            (ModelSpec::Hardcore(m), Update::Hardcore(h)) => {
                hardcore_dynamic_sample(m, ResampleState::new(config, h.vbl()), rng, opts)?
            }
            _ => return Err(mismatch(self)),
        };
        Ok((next, x, stats))
    }

    /// Threads `config` through `updates`; update `i` draws from
    /// `rng.split("update", i)`.
    pub fn run_updates(
        &self,
        config: Configuration,
        updates: &[Update],
        rng: &RngStream,
        opts: &EngineOptions,
    ) -> Result<(ModelSpec, Configuration, Vec<TraceStats>)> {
        let mut model = self.clone();
        let mut x = config;
        let mut all = Vec::with_capacity(updates.len());
        for (index, update) in updates.iter().enumerate() {
            let (m, next, stats) = model
                .step(update, x, &rng.split("update", index as u64), opts)
                .map_err(|source| Error::Stream {
                    index,
                    source: Box::new(source),
                })?;
            model = m;
            x = next;
            all.push(stats);
        }
        Ok((model, x, all))
    }
}
