//! Specialized samplers for Ising, Potts and hardcore models.
//!
//! Spins are stored as `0..q`. For Ising models value `0` is the spin `−1`
//! and value `1` is `+1`; local fields are weight vectors in that order.
//! An edge with `β = 0` (or a removed hardcore edge) stays in the graph with
//! its id, so edge ids always match constraint ids of the converted model.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::convergence::set_cover;
use crate::error::{BudgetExceeded, Error, Result};
use crate::factor_graph::{
    Configuration, GraphicalModel, UpdateRequest, VarId, VarSet, VariableFactor, VariableUpdate,
};
use crate::resample_engine::{
    default_budget, EngineOptions, ExpandStrategy, ResampleState, RoundStats, TraceStats,
};
use crate::rng::{DrawKind, RngStream};

pub type EdgeId = usize;

/// Simple undirected graph with stable edge ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Graph {
    n: usize,
    edges: Vec<(VarId, VarId)>,
    incident: Vec<Vec<EdgeId>>,
    index: HashMap<(VarId, VarId), EdgeId>,
}

fn edge_key(u: VarId, v: VarId) -> (VarId, VarId) {
    (u.min(v), u.max(v))
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            incident: vec![Vec::new(); n],
            index: HashMap::new(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (VarId, VarId)>) -> Result<Self> {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.insert(u, v)?;
        }
        Ok(g)
    }

    fn check_pair(&self, u: VarId, v: VarId) -> Result<()> {
        for w in [u, v] {
            if w >= self.n {
                return Err(Error::UnknownVariable { id: w, n: self.n });
            }
        }
        if u == v {
            return Err(Error::InvalidModel(format!("self-loop at vertex {u}")));
        }
        Ok(())
    }

    /// Adds a new edge; duplicates are rejected.
    pub fn insert(&mut self, u: VarId, v: VarId) -> Result<EdgeId> {
        self.check_pair(u, v)?;
        let key = edge_key(u, v);
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateScope {
                scope: vec![key.0, key.1],
            });
        }
        let id = self.edges.len();
        self.edges.push((u, v));
        self.incident[u].push(id);
        self.incident[v].push(id);
        self.index.insert(key, id);
        Ok(id)
    }

    pub fn find(&self, u: VarId, v: VarId) -> Option<EdgeId> {
        self.index.get(&edge_key(u, v)).copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VarId, VarId)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (VarId, VarId) {
        self.edges[e]
    }

    pub fn incident(&self, v: VarId) -> &[EdgeId] {
        &self.incident[v]
    }

    fn other(&self, e: EdgeId, v: VarId) -> VarId {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    fn max_degree_by(&self, active: impl Fn(EdgeId) -> bool) -> usize {
        self.incident
            .iter()
            .map(|es| es.iter().filter(|e| active(**e)).count())
            .max()
            .unwrap_or(0)
    }

    /// Edges with at least one endpoint in `set`, ascending.
    fn incident_edges(&self, set: &VarSet, active: impl Fn(EdgeId) -> bool) -> Vec<EdgeId> {
        let es: BTreeSet<EdgeId> = set
            .iter()
            .flat_map(|v| self.incident[*v].iter().copied())
            .filter(|e| active(*e))
            .collect();
        es.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Interaction {
    /// `σ_u σ_v` with `0 ↦ −1`, `1 ↦ +1`.
    Product,
    /// `2δ(σ_u, σ_v) − 1`.
    Kronecker,
}

impl Interaction {
    fn eval(self, a: usize, b: usize) -> f64 {
        match self {
            Interaction::Product => spin(a) * spin(b),
            Interaction::Kronecker => {
                if a == b {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// The Ising spin of a stored value.
pub fn spin(value: usize) -> f64 {
    if value == 0 {
        -1.0
    } else {
        1.0
    }
}

/// A set of edge couplings and local-field changes for an Ising or Potts
/// model. An edge that does not exist yet is added; `β = 0` deletes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinUpdate {
    #[serde(default)]
    pub edges: Vec<(VarId, VarId, f64)>,
    #[serde(default)]
    pub fields: Vec<VariableUpdate>,
}

impl SpinUpdate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_edge(mut self, u: VarId, v: VarId, beta: f64) -> Self {
        self.edges.push((u, v, beta));
        self
    }

    pub fn set_field(mut self, id: VarId, phi: Vec<f64>) -> Self {
        self.fields.push(VariableUpdate { id, phi });
        self
    }

    /// Endpoints of the touched edges and the vertices with new fields.
    pub fn vbl(&self) -> VarSet {
        self.edges
            .iter()
            .flat_map(|(u, v, _)| [*u, *v])
            .chain(self.fields.iter().map(|f| f.id))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Pairwise {
    q: usize,
    kind: Interaction,
    graph: Graph,
    beta: Vec<f64>,
    fields: Vec<VariableFactor>,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidEntry {
            what: "edge coupling".into(),
        })
    }
}

impl Pairwise {
    fn new(n: usize, q: usize, kind: Interaction, edges: Vec<(VarId, VarId, f64)>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidModel(format!("q = {q} must be at least 2")));
        }
        let mut graph = Graph::new(n);
        let mut beta = Vec::with_capacity(edges.len());
        for (u, v, b) in edges {
            check_beta(b)?;
            graph.insert(u, v)?;
            beta.push(b);
        }
        Ok(Self {
            q,
            kind,
            graph,
            beta,
            fields: vec![VariableFactor::uniform(q); n],
        })
    }

    fn set_fields(&mut self, fields: Vec<Vec<f64>>) -> Result<()> {
        let n = self.graph.num_vertices();
        if fields.len() != n {
            return Err(Error::LengthMismatch {
                what: "local fields".into(),
                expected: n,
                actual: fields.len(),
            });
        }
        self.fields = fields
            .into_iter()
            .map(|w| self.field_factor(w))
            .collect::<Result<_>>()?;
        Ok(())
    }

    fn field_factor(&self, w: Vec<f64>) -> Result<VariableFactor> {
        if w.len() != self.q {
            return Err(Error::LengthMismatch {
                what: "local field".into(),
                expected: self.q,
                actual: w.len(),
            });
        }
        Ok(VariableFactor::new(w)?.normalized())
    }

    fn active(&self, e: EdgeId) -> bool {
        self.beta[e] != 0.0
    }

    fn max_degree(&self) -> usize {
        self.graph.max_degree_by(|e| self.active(e))
    }

    fn beta_star(&self) -> f64 {
        self.beta.iter().map(|b| b.abs()).fold(0.0, f64::max)
    }

    /// Normalized weight `exp(β·s(a,b) − |β|)`.
    fn edge_weight(&self, beta: f64, a: usize, b: usize) -> f64 {
        (beta * self.kind.eval(a, b) - beta.abs()).exp()
    }

    fn edge_table(&self, beta: f64) -> Vec<f64> {
        let q = self.q;
        (0..q * q)
            .map(|i| self.edge_weight(beta, i / q, i % q))
            .collect()
    }

    fn to_factor_graph(&self) -> GraphicalModel {
        let constraints = self
            .graph
            .edges()
            .iter()
            .zip(&self.beta)
            .map(|((u, v), b)| (vec![*u, *v], self.edge_table(*b)))
            .collect();
        GraphicalModel::from_tables(
            self.fields.iter().map(|f| f.weights().to_vec()).collect(),
            constraints,
        )
        .expect("pairwise model converts to a valid factor graph")
    }

    fn apply_update(&self, update: &SpinUpdate) -> Result<Self> {
        let mut next = self.clone();
        let mut seen = HashSet::new();
        for (u, v, b) in &update.edges {
            check_beta(*b)?;
            if !seen.insert(edge_key(*u, *v)) {
                return Err(Error::DuplicateTarget {
                    target: format!("edge ({u}, {v})"),
                });
            }
            match next.graph.find(*u, *v) {
                Some(e) => next.beta[e] = *b,
                None => {
                    next.graph.insert(*u, *v)?;
                    next.beta.push(*b);
                }
            }
        }
        let mut seen_fields = HashSet::new();
        for f in &update.fields {
            if f.id >= next.graph.num_vertices() {
                return Err(Error::UnknownVariable {
                    id: f.id,
                    n: next.graph.num_vertices(),
                });
            }
            if !seen_fields.insert(f.id) {
                return Err(Error::DuplicateTarget {
                    target: format!("field of vertex {}", f.id),
                });
            }
            next.fields[f.id] = next.field_factor(f.phi.clone())?;
        }
        Ok(next)
    }

    fn factor_update(&self, update: &SpinUpdate) -> UpdateRequest {
        let mut req = UpdateRequest::new();
        for (u, v, b) in &update.edges {
            req = req.set_constraint(vec![*u, *v], self.edge_table(*b));
        }
        for f in &update.fields {
            req = req.set_variable(f.id, f.phi.clone());
        }
        req
    }

    fn check_config(&self, config: &Configuration) -> Result<()> {
        check_length(config, self.graph.num_vertices())?;
        if let Some((v, x)) = config.iter().enumerate().find(|(_, x)| **x >= self.q) {
            return Err(Error::InvalidConfiguration(format!(
                "vertex {v} has value {x} outside 0..{}",
                self.q
            )));
        }
        Ok(())
    }

    fn potential(&self, r: &VarSet) -> u64 {
        let covered: VarSet = r
            .iter()
            .copied()
            .filter(|v| self.graph.incident(*v).iter().any(|e| self.active(*e)))
            .collect();
        let edges = self.graph.incident_edges(&covered, |e| self.active(e));
        let scopes: Vec<[VarId; 2]> = edges
            .iter()
            .map(|e| {
                let (u, v) = self.graph.endpoints(*e);
                [u, v]
            })
            .collect();
        set_cover(&covered, scopes.iter().map(|s| &s[..])).map_or(0, |p| p.value)
    }

    /// One round of the two-phase scheme. Boundary edges first fail from
    /// the current spins, then every vertex of `R` is redrawn from its
    /// field, then every surviving edge of `E⁺(R)` fails from the new spins.
    fn round(
        &self,
        state: ResampleState,
        rng: &RngStream,
        round: u64,
    ) -> (ResampleState, RoundStats) {
        let ResampleState {
            mut config,
            resample_set: r,
        } = state;
        if r.is_empty() {
            return (ResampleState::new(config, r), RoundStats::default());
        }
        let edges = self.graph.incident_edges(&r, |e| self.active(e));
        let mut coins = 0u64;
        let mut failed = vec![false; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            let (u, v) = self.graph.endpoints(*e);
            if r.contains(&u) && r.contains(&v) {
                continue;
            }
            let b = self.beta[*e];
            let keep = (-b.abs() - b * self.kind.eval(config[u], config[v])).exp();
            failed[i] = rng.entity(round, DrawKind::PreCoin, *e).random::<f64>() >= keep;
            coins += 1;
        }
        for v in &r {
            config[*v] = self.fields[*v].sample(&mut rng.entity(round, DrawKind::Variable, *v));
        }
        for (i, e) in edges.iter().enumerate() {
            if failed[i] {
                continue;
            }
            let (u, v) = self.graph.endpoints(*e);
            let keep = self.edge_weight(self.beta[*e], config[u], config[v]);
            failed[i] = rng.entity(round, DrawKind::Coin, *e).random::<f64>() >= keep;
            coins += 1;
        }
        let next: VarSet = edges
            .iter()
            .zip(&failed)
            .filter(|(_, f)| **f)
            .flat_map(|(e, _)| {
                let (u, v) = self.graph.endpoints(*e);
                [u, v]
            })
            .collect();
        let stats = RoundStats {
            variable_resamples: r.len() as u64,
            coin_flips: coins,
            kappa_evaluations: 0,
        };
        (ResampleState::new(config, next), stats)
    }

    fn dynamic_sample(
        &self,
        state0: ResampleState,
        rng: &RngStream,
        opts: &EngineOptions,
    ) -> Result<(Configuration, TraceStats)> {
        self.check_config(&state0.config)?;
        drive(
            self.graph.num_vertices(),
            state0,
            opts,
            |s, t| self.round(s, rng, t),
            |r| self.potential(r),
        )
    }

    fn bootstrap_sample(&self, rng: &RngStream, opts: &EngineOptions) -> Result<Configuration> {
        let mut model = Self {
            beta: vec![0.0; self.beta.len()],
            ..self.clone()
        };
        let product = rng.split("product", 0);
        let mut config = Configuration::new(
            (0..self.graph.num_vertices())
                .map(|v| self.fields[v].sample(&mut product.entity(0, DrawKind::Variable, v)))
                .collect(),
        );
        let build = rng.split("build", 0);
        for (e, (u, v)) in self.graph.edges().iter().enumerate() {
            if self.beta[e] == 0.0 {
                continue;
            }
            let update = SpinUpdate::new().set_edge(*u, *v, self.beta[e]);
            model = model.apply_update(&update)?;
            let state = ResampleState::new(config, update.vbl());
            config = model
                .dynamic_sample(state, &build.split("update", e as u64), opts)?
                .0;
        }
        Ok(config)
    }
}

fn check_length(config: &Configuration, n: usize) -> Result<()> {
    if config.len() != n {
        return Err(Error::LengthMismatch {
            what: "configuration".into(),
            expected: n,
            actual: config.len(),
        });
    }
    Ok(())
}

/// Round loop shared by the specialized samplers; mirrors the generic
/// engine's budget and trace handling.
fn drive(
    n: usize,
    state0: ResampleState,
    opts: &EngineOptions,
    mut round: impl FnMut(ResampleState, u64) -> (ResampleState, RoundStats),
    potential: impl Fn(&VarSet) -> u64,
) -> Result<(Configuration, TraceStats)> {
    if let Some(v) = state0.resample_set.iter().find(|v| **v >= n) {
        return Err(Error::UnknownVariable { id: *v, n });
    }
    let budget = opts
        .budget
        .unwrap_or_else(|| default_budget(state0.resample_set.len()));
    let mut stats = TraceStats {
        potentials: opts.record_potential.then(Vec::new),
        ..TraceStats::default()
    };
    let mut state = state0;
    loop {
        stats.r_sizes.push(state.resample_set.len());
        if let Some(p) = stats.potentials.as_mut() {
            p.push(potential(&state.resample_set));
        }
        if state.is_done() {
            return Ok((state.config, stats));
        }
        if stats.iterations >= budget {
            return Err(Error::BudgetExceeded(Box::new(BudgetExceeded {
                state,
                stats,
            })));
        }
        let (next, r) = round(state, stats.iterations);
        stats.add_round(r);
        state = next;
    }
}

macro_rules! pairwise_accessors {
    ($ty:ident) => {
        impl $ty {
            pub fn graph(&self) -> &Graph {
                &self.0.graph
            }

            pub fn num_vertices(&self) -> usize {
                self.0.graph.num_vertices()
            }

            pub fn q(&self) -> usize {
                self.0.q
            }

            /// Coupling of edge `e` (zero for deleted edges).
            pub fn beta(&self, e: EdgeId) -> f64 {
                self.0.beta[e]
            }

            pub fn betas(&self) -> &[f64] {
                &self.0.beta
            }

            pub fn field(&self, v: VarId) -> &VariableFactor {
                &self.0.fields[v]
            }

            /// Maximum degree over edges with `β ≠ 0`.
            pub fn max_degree(&self) -> usize {
                self.0.max_degree()
            }

            /// `max_e |β_e|`.
            pub fn beta_star(&self) -> f64 {
                self.0.beta_star()
            }

            /// Normalized table of edge `e` in row-major `(σ_u, σ_v)` order.
            pub fn edge_table(&self, e: EdgeId) -> Vec<f64> {
                self.0.edge_table(self.0.beta[e])
            }

            pub fn to_factor_graph(&self) -> GraphicalModel {
                self.0.to_factor_graph()
            }

            pub fn apply_update(&self, update: &SpinUpdate) -> Result<Self> {
                Ok(Self(self.0.apply_update(update)?))
            }

            pub fn vbl(&self, update: &SpinUpdate) -> VarSet {
                update.vbl()
            }

            /// The same update on the converted factor graph.
            pub fn factor_update(&self, update: &SpinUpdate) -> UpdateRequest {
                self.0.factor_update(update)
            }

            /// One round of the two-phase sampler.
            pub fn round(
                &self,
                state: ResampleState,
                rng: &RngStream,
                round: u64,
            ) -> (ResampleState, RoundStats) {
                self.0.round(state, rng, round)
            }

            /// Exact sample built by adding the edges one at a time.
            pub fn bootstrap_sample(
                &self,
                rng: &RngStream,
                opts: &EngineOptions,
            ) -> Result<Configuration> {
                self.0.bootstrap_sample(rng, opts)
            }
        }
    };
}

/// `μ(σ) ∝ ∏_v h_v(σ_v) ∏_{uv} exp(β_uv σ_u σ_v)` with `σ ∈ {−1, +1}^V`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel(Pairwise);

/// `μ(σ) ∝ ∏_v h_v(σ_v) ∏_{uv} exp(β_uv (2δ(σ_u, σ_v) − 1))` with
/// `σ ∈ [q]^V`.
#[derive(Debug, Clone, PartialEq)]
pub struct PottsModel(Pairwise);

pairwise_accessors!(IsingModel);
pairwise_accessors!(PottsModel);

impl IsingModel {
    pub fn new(n: usize, edges: Vec<(VarId, VarId, f64)>) -> Result<Self> {
        Ok(Self(Pairwise::new(n, 2, Interaction::Product, edges)?))
    }

    /// Per-vertex weights `[h(−1), h(+1)]`, normalized on entry.
    pub fn with_fields(mut self, fields: Vec<Vec<f64>>) -> Result<Self> {
        self.0.set_fields(fields)?;
        Ok(self)
    }
}

impl PottsModel {
    pub fn new(n: usize, q: usize, edges: Vec<(VarId, VarId, f64)>) -> Result<Self> {
        Ok(Self(Pairwise::new(n, q, Interaction::Kronecker, edges)?))
    }

    pub fn with_fields(mut self, fields: Vec<Vec<f64>>) -> Result<Self> {
        self.0.set_fields(fields)?;
        Ok(self)
    }
}

pub fn ising_to_factor_graph(ising: &IsingModel) -> GraphicalModel {
    ising.to_factor_graph()
}

pub fn potts_to_factor_graph(potts: &PottsModel) -> GraphicalModel {
    potts.to_factor_graph()
}

/// Repairs `state0.config` after an update of `ising`; the resample set
/// should be the update's `vbl`.
pub fn ising_dynamic_sample(
    ising: &IsingModel,
    state0: ResampleState,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<(Configuration, TraceStats)> {
    ising.0.dynamic_sample(state0, rng, opts)
}

pub fn potts_dynamic_sample(
    potts: &PottsModel,
    state0: ResampleState,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<(Configuration, TraceStats)> {
    potts.0.dynamic_sample(state0, rng, opts)
}

/// Edge additions and removals plus fugacity changes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardcoreUpdate {
    #[serde(default)]
    pub edges: Vec<(VarId, VarId)>,
    #[serde(default)]
    pub remove_edges: Vec<(VarId, VarId)>,
    #[serde(default)]
    pub lambda: Vec<(VarId, f64)>,
}

impl HardcoreUpdate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(mut self, u: VarId, v: VarId) -> Self {
        self.edges.push((u, v));
        self
    }

    pub fn remove_edge(mut self, u: VarId, v: VarId) -> Self {
        self.remove_edges.push((u, v));
        self
    }

    pub fn set_lambda(mut self, v: VarId, lambda: f64) -> Self {
        self.lambda.push((v, lambda));
        self
    }

    pub fn vbl(&self) -> VarSet {
        self.edges
            .iter()
            .chain(&self.remove_edges)
            .flat_map(|(u, v)| [*u, *v])
            .chain(self.lambda.iter().map(|(v, _)| *v))
            .collect()
    }
}

/// `μ(I) ∝ ∏_{v∈I} λ_v` over independent sets `I`, stored as 0/1
/// occupancies.
#[derive(Debug, Clone, PartialEq)]
pub struct HardcoreModel {
    graph: Graph,
    active: Vec<bool>,
    lambda: Vec<f64>,
}

fn check_lambda(v: VarId, lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEntry {
            what: format!("fugacity of vertex {v}"),
        })
    }
}

impl HardcoreModel {
    pub fn new(n: usize, edges: Vec<(VarId, VarId)>, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != n {
            return Err(Error::LengthMismatch {
                what: "fugacities".into(),
                expected: n,
                actual: lambda.len(),
            });
        }
        for (v, l) in lambda.iter().enumerate() {
            check_lambda(v, *l)?;
        }
        let graph = Graph::from_edges(n, edges)?;
        Ok(Self {
            active: vec![true; graph.num_edges()],
            graph,
            lambda,
        })
    }

    pub fn uniform(n: usize, edges: Vec<(VarId, VarId)>, lambda: f64) -> Result<Self> {
        Self::new(n, edges, vec![lambda; n])
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn is_active(&self, e: EdgeId) -> bool {
        self.active[e]
    }

    /// Edges currently present, as endpoint pairs.
    pub fn active_edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(e, _)| self.active[*e])
            .map(|(_, p)| *p)
    }

    pub fn max_degree(&self) -> usize {
        self.graph.max_degree_by(|e| self.active[e])
    }

    pub fn neighbors(&self, v: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.graph
            .incident(v)
            .iter()
            .filter(|e| self.active[**e])
            .map(move |e| self.graph.other(*e, v))
    }

    /// `|E(R)|`, edges with both endpoints in `r`.
    pub fn internal_edges(&self, r: &VarSet) -> usize {
        self.graph
            .incident_edges(r, |e| self.active[e])
            .into_iter()
            .filter(|e| {
                let (u, v) = self.graph.endpoints(*e);
                r.contains(&u) && r.contains(&v)
            })
            .count()
    }

    /// `vbl(E⁺(R))`: all endpoints of edges touching `r`.
    pub fn edge_closure(&self, r: &VarSet) -> VarSet {
        self.graph
            .incident_edges(r, |e| self.active[e])
            .into_iter()
            .flat_map(|e| {
                let (u, v) = self.graph.endpoints(e);
                [u, v]
            })
            .collect()
    }

    pub fn is_independent(&self, config: &[usize]) -> bool {
        self.active_edges()
            .all(|(u, v)| config[u] == 0 || config[v] == 0)
    }

    pub fn occupation_probability(&self, v: VarId) -> f64 {
        self.lambda[v] / (1.0 + self.lambda[v])
    }

    /// `φ_v = [1/(1+λ_v), λ_v/(1+λ_v)]`, `φ_e = [1, 1, 1, 0]`; removed
    /// edges become all-ones tables.
    pub fn to_factor_graph(&self) -> GraphicalModel {
        let weights = (0..self.num_vertices())
            .map(|v| {
                let p = self.occupation_probability(v);
                vec![1.0 - p, p]
            })
            .collect();
        let constraints = self
            .graph
            .edges()
            .iter()
            .zip(&self.active)
            .map(|((u, v), a)| (vec![*u, *v], edge_table(*a)))
            .collect();
        GraphicalModel::from_tables(weights, constraints)
            .expect("hardcore model converts to a valid factor graph")
    }

    pub fn apply_update(&self, update: &HardcoreUpdate) -> Result<Self> {
        let mut next = self.clone();
        let mut seen = HashSet::new();
        for (u, v) in update.edges.iter().chain(&update.remove_edges) {
            if !seen.insert(edge_key(*u, *v)) {
                return Err(Error::DuplicateTarget {
                    target: format!("edge ({u}, {v})"),
                });
            }
        }
        for (u, v) in &update.edges {
            match next.graph.find(*u, *v) {
                Some(e) => next.active[e] = true,
                None => {
                    next.graph.insert(*u, *v)?;
                    next.active.push(true);
                }
            }
        }
        for (u, v) in &update.remove_edges {
            next.graph.check_pair(*u, *v)?;
            match next.graph.find(*u, *v) {
                Some(e) => next.active[e] = false,
                None => {
                    return Err(Error::InvalidModel(format!(
                        "cannot remove missing edge ({u}, {v})"
                    )))
                }
            }
        }
        let mut seen_vertices = HashSet::new();
        for (v, l) in &update.lambda {
            if *v >= next.num_vertices() {
                return Err(Error::UnknownVariable {
                    id: *v,
                    n: next.num_vertices(),
                });
            }
            if !seen_vertices.insert(*v) {
                return Err(Error::DuplicateTarget {
                    target: format!("fugacity of vertex {v}"),
                });
            }
            check_lambda(*v, *l)?;
            next.lambda[*v] = *l;
        }
        Ok(next)
    }

    pub fn vbl(&self, update: &HardcoreUpdate) -> VarSet {
        update.vbl()
    }

    pub fn factor_update(&self, update: &HardcoreUpdate) -> UpdateRequest {
        let mut req = UpdateRequest::new();
        for (u, v) in &update.edges {
            req = req.set_constraint(vec![*u, *v], edge_table(true));
        }
        for (u, v) in &update.remove_edges {
            req = req.set_constraint(vec![*u, *v], edge_table(false));
        }
        for (v, l) in &update.lambda {
            req = req.set_variable(*v, vec![1.0, *l]);
        }
        req
    }

    fn check_config(&self, config: &Configuration) -> Result<()> {
        check_length(config, self.num_vertices())?;
        if let Some(v) = config.iter().position(|x| *x > 1) {
            return Err(Error::InvalidConfiguration(format!(
                "vertex {v} has occupancy {}",
                config[v]
            )));
        }
        Ok(())
    }

    /// Exact sample built by adding the edges one at a time to the
    /// edgeless model.
    pub fn bootstrap_sample(&self, rng: &RngStream, opts: &EngineOptions) -> Result<Configuration> {
        let mut model = Self {
            active: vec![false; self.active.len()],
            ..self.clone()
        };
        let product = rng.split("product", 0);
        let mut config = Configuration::new(
            (0..self.num_vertices())
                .map(|v| draw_occupancy(self, &product, 0, v))
                .collect(),
        );
        let build = rng.split("build", 0);
        for (e, (u, v)) in self.graph.edges().iter().enumerate() {
            if !self.active[e] {
                continue;
            }
            let update = HardcoreUpdate::new().add_edge(*u, *v);
            model = model.apply_update(&update)?;
            let state = ResampleState::new(config, update.vbl());
            config =
                hardcore_dynamic_sample(&model, state, &build.split("update", e as u64), opts)?.0;
        }
        Ok(config)
    }
}

fn edge_table(active: bool) -> Vec<f64> {
    if active {
        vec![1.0, 1.0, 1.0, 0.0]
    } else {
        vec![1.0; 4]
    }
}

fn draw_occupancy(hc: &HardcoreModel, rng: &RngStream, round: u64, v: VarId) -> usize {
    let p = hc.occupation_probability(v);
    usize::from(rng.entity(round, DrawKind::Variable, v).random::<f64>() < p)
}

pub fn hardcore_to_factor_graph(hc: &HardcoreModel) -> GraphicalModel {
    hc.to_factor_graph()
}

/// `R` plus every neighbour of an occupied vertex of `R`.
pub fn hardcore_expand(hc: &HardcoreModel, config: &[usize], r: &VarSet) -> VarSet {
    let mut out = r.clone();
    for v in r.iter().filter(|v| config[**v] == 1) {
        out.extend(hc.neighbors(*v));
    }
    out
}

/// [`hardcore_expand`] on a factor graph: every variable sharing a
/// non-trivial constraint with a variable of `R` whose value is 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct HardcoreExpand;

impl ExpandStrategy for HardcoreExpand {
    fn expand(&self, model: &GraphicalModel, config: &Configuration, r: &VarSet) -> VarSet {
        let mut out = r.clone();
        for v in r.iter().filter(|v| config[**v] == 1) {
            for e in model.incident(*v) {
                let c = model.constraint(*e);
                if !c.is_trivial() {
                    out.extend(c.scope().iter().copied());
                }
            }
        }
        out
    }
}

/// One round: expand, redraw the expanded set, and collect the edges with
/// both endpoints occupied. Only edges touching the expanded set can
/// become violated, so only those are checked.
pub fn hardcore_round(
    hc: &HardcoreModel,
    state: ResampleState,
    rng: &RngStream,
    round: u64,
) -> (ResampleState, RoundStats) {
    let ResampleState {
        mut config,
        resample_set: r,
    } = state;
    if r.is_empty() {
        return (ResampleState::new(config, r), RoundStats::default());
    }
    let expanded = hardcore_expand(hc, &config, &r);
    for v in &expanded {
        config[*v] = draw_occupancy(hc, rng, round, *v);
    }
    let next: VarSet = hc
        .graph
        .incident_edges(&expanded, |e| hc.active[e])
        .into_iter()
        .map(|e| hc.graph.endpoints(e))
        .filter(|(u, v)| config[*u] == 1 && config[*v] == 1)
        .flat_map(|(u, v)| [u, v])
        .collect();
    let stats = RoundStats {
        variable_resamples: expanded.len() as u64,
        coin_flips: 0,
        kappa_evaluations: 0,
    };
    (ResampleState::new(config, next), stats)
}

/// Repairs an independent set after an update of `hc`.
///
/// From the second round on every vertex of `R` is occupied, so the
/// expansion equals `vbl(E⁺(R))`; this is checked on every such round.
pub fn hardcore_dynamic_sample(
    hc: &HardcoreModel,
    state0: ResampleState,
    rng: &RngStream,
    opts: &EngineOptions,
) -> Result<(Configuration, TraceStats)> {
    hc.check_config(&state0.config)?;
    let (config, stats) = drive(
        hc.num_vertices(),
        state0,
        opts,
        |s, t| {
            if t >= 1 {
                assert_eq!(
                    hardcore_expand(hc, &s.config, &s.resample_set),
                    hc.edge_closure(&s.resample_set),
                    "expansion differs from the edge closure in round {t}"
                );
            }
            hardcore_round(hc, s, rng, t)
        },
        |r| hc.internal_edges(r) as u64,
    )?;
    debug_assert!(hc.is_independent(&config));
    Ok((config, stats))
}
