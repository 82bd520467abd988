//! Discrete graphical models: variable weight vectors, constraint tables,
//! incidence structure and update application.
//!
//! Constraint tables are dense and row-major over the scope, with the first
//! scope variable most significant. The same convention indexes every joint
//! state vector in [`crate::oracle`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::{Deref, Index, IndexMut};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VarId = usize;
pub type ConstraintId = usize;

/// Ordered set of variables. Iteration is ascending, which fixes the
/// canonical visiting order of the samplers.
pub type VarSet = BTreeSet<VarId>;

/// Tolerance on variable weight sums and table maxima.
pub const NORMALIZATION_TOL: f64 = 1e-9;

fn check_entries(what: impl Fn() -> String, values: &[f64]) -> Result<()> {
    if values.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidEntry { what: what() });
    }
    Ok(())
}

/// Weight function `φ_v` over the domain `[q]` of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableFactor {
    weights: Vec<f64>,
}

impl VariableFactor {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidModel("variable with empty domain".into()));
        }
        check_entries(|| "variable weights".into(), &weights)?;
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::ZeroFactor {
                what: "variable weights".into(),
            });
        }
        Ok(Self { weights })
    }

    pub fn uniform(q: usize) -> Self {
        assert!(q >= 1, "domain size must be positive");
        Self {
            weights: vec![1.0 / q as f64; q],
        }
    }

    pub fn q(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, value: usize) -> f64 {
        self.weights[value]
    }

    pub fn is_normalized(&self) -> bool {
        (self.weights.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn normalized(&self) -> Self {
        if self.is_normalized() {
            return self.clone();
        }
        let total: f64 = self.weights.iter().sum();
        Self {
            weights: self.weights.iter().map(|w| w / total).collect(),
        }
    }

    /// Inverse-CDF draw from the (renormalized) weights.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (x, w) in self.weights.iter().enumerate() {
            if u < *w {
                return x;
            }
            u -= w;
        }
        // Rounding can leave u just above the last positive weight.
        self.weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }
}

/// Table `φ_e` over the joint domain of a constraint's scope.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFactor {
    scope: Vec<VarId>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    table: Vec<f64>,
    lower_bound: f64,
    max: f64,
}

impl ConstraintFactor {
    /// `dims[i]` is the domain size of `scope[i]`.
    pub fn new(scope: Vec<VarId>, dims: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if scope.len() < 2 {
            return Err(Error::ScopeArity { scope });
        }
        let distinct: HashSet<_> = scope.iter().collect();
        if distinct.len() != scope.len() {
            return Err(Error::RepeatedScopeVariable { scope });
        }
        if dims.len() != scope.len() {
            return Err(Error::LengthMismatch {
                what: format!("domain sizes of scope {scope:?}"),
                expected: scope.len(),
                actual: dims.len(),
            });
        }
        let size: usize = dims.iter().product();
        if table.len() != size {
            return Err(Error::LengthMismatch {
                what: format!("table of scope {scope:?}"),
                expected: size,
                actual: table.len(),
            });
        }
        check_entries(|| format!("table of scope {scope:?}"), &table)?;
        let max = table.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(Error::ZeroFactor {
                what: format!("table of scope {scope:?}"),
            });
        }
        let lower_bound = table.iter().copied().fold(f64::INFINITY, f64::min);
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(Self {
            scope,
            dims,
            strides,
            table,
            lower_bound,
            max,
        })
    }

    /// Constant-one table, the representation of a deleted constraint.
    pub fn trivial(scope: Vec<VarId>, dims: Vec<usize>) -> Result<Self> {
        let size = dims.iter().product();
        Self::new(scope, dims, vec![1.0; size])
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `B_e`, the minimum table entry.
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn is_soft(&self) -> bool {
        self.lower_bound > 0.0
    }

    pub fn is_trivial(&self) -> bool {
        self.table.iter().all(|x| *x == 1.0)
    }

    pub fn is_normalized(&self) -> bool {
        (self.max - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn normalized(&self) -> Self {
        if self.max == 1.0 {
            return self.clone();
        }
        let table: Vec<f64> = self.table.iter().map(|x| x / self.max).collect();
        let lower_bound = table.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            table,
            lower_bound,
            max: 1.0,
            ..self.clone()
        }
    }

    pub fn index_of(&self, config: &[usize]) -> usize {
        self.scope
            .iter()
            .zip(&self.strides)
            .map(|(v, s)| config[*v] * s)
            .sum()
    }

    /// `φ_e(σ_e)` for a full configuration.
    pub fn value(&self, config: &[usize]) -> f64 {
        self.table[self.index_of(config)]
    }

    /// Minimum of the table over entries agreeing with `config` on every
    /// scope variable for which `fixed` returns true.
    pub fn min_agreeing(&self, config: &[usize], fixed: impl Fn(VarId) -> bool) -> f64 {
        let mut base = 0;
        let mut free = Vec::new();
        for (pos, v) in self.scope.iter().enumerate() {
            if fixed(*v) {
                base += config[*v] * self.strides[pos];
            } else {
                free.push(pos);
            }
        }
        if free.is_empty() {
            return self.table[base];
        }
        let mut digits = vec![0usize; free.len()];
        let mut best = f64::INFINITY;
        loop {
            let idx = base
                + free
                    .iter()
                    .zip(&digits)
                    .map(|(pos, d)| d * self.strides[*pos])
                    .sum::<usize>();
            best = best.min(self.table[idx]);
            let mut i = 0;
            loop {
                if i == free.len() {
                    return best;
                }
                digits[i] += 1;
                if digits[i] < self.dims[free[i]] {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }
}

/// A full assignment of values to variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    values: Vec<usize>,
}

impl Configuration {
    pub fn new(values: Vec<usize>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0; n] }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn into_values(self) -> Vec<usize> {
        self.values
    }

    /// Restriction to `vars` (in the given order).
    pub fn restrict(&self, vars: impl IntoIterator<Item = VarId>) -> PartialAssignment {
        PartialAssignment::from_pairs(vars.into_iter().map(|v| (v, self.values[v])))
    }
}

impl Deref for Configuration {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.values
    }
}

impl Index<VarId> for Configuration {
    type Output = usize;
    fn index(&self, v: VarId) -> &usize {
        &self.values[v]
    }
}

impl IndexMut<VarId> for Configuration {
    fn index_mut(&mut self, v: VarId) -> &mut usize {
        &mut self.values[v]
    }
}

/// Values on a subset of variables, kept sorted by variable id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct PartialAssignment {
    vars: Vec<VarId>,
    values: Vec<usize>,
}

impl PartialAssignment {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, usize)>) -> Self {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup_by_key(|p| p.0);
        let (vars, values) = pairs.into_iter().unzip();
        Self { vars, values }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, v: VarId) -> Option<usize> {
        self.vars.binary_search(&v).ok().map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.vars.iter().copied().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableUpdate {
    pub id: VarId,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintUpdate {
    pub scope: Vec<VarId>,
    pub table: Vec<f64>,
}

/// The pair `(D, Φ_D)`: new weight vectors for some variables and new tables
/// for some scopes. A scope that matches an existing constraint (as a set)
/// modifies it in place; a fresh scope adds a constraint. Deletion is an
/// all-ones table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateRequest {
    #[serde(default)]
    pub variables: Vec<VariableUpdate>,
    #[serde(default)]
    pub constraints: Vec<ConstraintUpdate>,
}

impl UpdateRequest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty() && self.constraints.is_empty()
    }

    pub fn set_variable(mut self, id: VarId, phi: Vec<f64>) -> Self {
        self.variables.push(VariableUpdate { id, phi });
        self
    }

    pub fn set_constraint(mut self, scope: Vec<VarId>, table: Vec<f64>) -> Self {
        self.constraints.push(ConstraintUpdate { scope, table });
        self
    }

    /// Deletes the constraint on `scope` by replacing its table with ones.
    pub fn delete_constraint(self, model: &GraphicalModel, scope: Vec<VarId>) -> Self {
        let size = scope.iter().map(|v| model.variables[*v].q()).product();
        self.set_constraint(scope, vec![1.0; size])
    }

    /// The update that restores `model`'s factors after `self` is applied.
    /// Constraints added by `self` come back as all-ones tables.
    pub fn inverse(&self, model: &GraphicalModel) -> Self {
        let mut inv = UpdateRequest::new();
        for vu in &self.variables {
            inv = inv.set_variable(vu.id, model.variables[vu.id].weights().to_vec());
        }
        for cu in &self.constraints {
            inv = match model.find_constraint(&cu.scope) {
                Some(id) => {
                    let c = &model.constraints[id];
                    inv.set_constraint(c.scope().to_vec(), c.table().to_vec())
                }
                None => inv.delete_constraint(model, cu.scope.clone()),
            };
        }
        inv
    }
}

/// `E(S)` and `δ(S)`; their union is `E⁺(S)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintPartition {
    pub internal: Vec<ConstraintId>,
    pub boundary: Vec<ConstraintId>,
}

impl ConstraintPartition {
    pub fn incident(&self) -> Vec<ConstraintId> {
        let mut all: Vec<_> = self
            .internal
            .iter()
            .chain(&self.boundary)
            .copied()
            .collect();
        all.sort_unstable();
        all
    }
}

fn scope_key(scope: &[VarId]) -> Vec<VarId> {
    let mut key = scope.to_vec();
    key.sort_unstable();
    key
}

/// A graphical model `(V, E, Φ)`. Immutable once built; updates produce a
/// new model that shares every untouched constraint table.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphicalModel {
    variables: Vec<VariableFactor>,
    constraints: Vec<Arc<ConstraintFactor>>,
    incidence: Vec<Vec<ConstraintId>>,
    scope_index: HashMap<Vec<VarId>, ConstraintId>,
    normalized: bool,
}

impl GraphicalModel {
    pub fn new(variables: Vec<VariableFactor>, constraints: Vec<ConstraintFactor>) -> Result<Self> {
        let n = variables.len();
        let mut incidence = vec![Vec::new(); n];
        let mut scope_index = HashMap::with_capacity(constraints.len());
        for (id, c) in constraints.iter().enumerate() {
            for (pos, v) in c.scope().iter().enumerate() {
                let var = variables
                    .get(*v)
                    .ok_or(Error::UnknownVariable { id: *v, n })?;
                if var.q() != c.dims()[pos] {
                    return Err(Error::LengthMismatch {
                        what: format!("domain of variable {v} in scope {:?}", c.scope()),
                        expected: var.q(),
                        actual: c.dims()[pos],
                    });
                }
                incidence[*v].push(id);
            }
            if scope_index.insert(scope_key(c.scope()), id).is_some() {
                return Err(Error::DuplicateScope {
                    scope: c.scope().to_vec(),
                });
            }
        }
        let normalized = variables.iter().all(VariableFactor::is_normalized)
            && constraints.iter().all(ConstraintFactor::is_normalized);
        Ok(Self {
            variables,
            constraints: constraints.into_iter().map(Arc::new).collect(),
            incidence,
            scope_index,
            normalized,
        })
    }

    /// Builds a model from raw weight vectors and `(scope, table)` pairs.
    pub fn from_tables(
        weights: Vec<Vec<f64>>,
        constraints: Vec<(Vec<VarId>, Vec<f64>)>,
    ) -> Result<Self> {
        let variables = weights
            .into_iter()
            .map(VariableFactor::new)
            .collect::<Result<Vec<_>>>()?;
        let n = variables.len();
        let factors = constraints
            .into_iter()
            .map(|(scope, table)| {
                let dims = scope
                    .iter()
                    .map(|v| {
                        variables
                            .get(*v)
                            .map(VariableFactor::q)
                            .ok_or(Error::UnknownVariable { id: *v, n })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ConstraintFactor::new(scope, dims, table)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(variables, factors)
    }

    /// Product model with no constraints.
    pub fn unconstrained(variables: Vec<VariableFactor>) -> Self {
        Self::new(variables, Vec::new()).expect("constraint-free model is always valid")
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable(&self, v: VarId) -> &VariableFactor {
        &self.variables[v]
    }

    pub fn variables(&self) -> &[VariableFactor] {
        &self.variables
    }

    pub fn constraint(&self, e: ConstraintId) -> &ConstraintFactor {
        &self.constraints[e]
    }

    pub fn constraints(&self) -> impl Iterator<Item = (ConstraintId, &ConstraintFactor)> {
        self.constraints.iter().enumerate().map(|(i, c)| (i, &**c))
    }

    /// Whether two models hold the same allocation for constraint `e`.
    pub fn shares_constraint(&self, other: &GraphicalModel, e: ConstraintId) -> bool {
        match (self.constraints.get(e), other.constraints.get(e)) {
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    /// Constraints whose scope contains `v`, ascending.
    pub fn incident(&self, v: VarId) -> &[ConstraintId] {
        &self.incidence[v]
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.variables.iter().map(VariableFactor::q).collect()
    }

    pub fn all_variables(&self) -> VarSet {
        (0..self.num_variables()).collect()
    }

    /// Constraint whose scope equals `scope` as a set.
    pub fn find_constraint(&self, scope: &[VarId]) -> Option<ConstraintId> {
        self.scope_index.get(&scope_key(scope)).copied()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn normalize(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        Self {
            variables: self
                .variables
                .iter()
                .map(VariableFactor::normalized)
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| {
                    if c.is_normalized() {
                        Arc::clone(c)
                    } else {
                        Arc::new(c.normalized())
                    }
                })
                .collect(),
            incidence: self.incidence.clone(),
            scope_index: self.scope_index.clone(),
            normalized: true,
        }
    }

    pub fn check_configuration(&self, config: &[usize]) -> Result<()> {
        if config.len() != self.num_variables() {
            return Err(Error::InvalidConfiguration(format!(
                "expected {} values, got {}",
                self.num_variables(),
                config.len()
            )));
        }
        for (v, (x, var)) in config.iter().zip(&self.variables).enumerate() {
            if *x >= var.q() {
                return Err(Error::InvalidConfiguration(format!(
                    "value {x} of variable {v} outside domain of size {}",
                    var.q()
                )));
            }
        }
        Ok(())
    }

    /// `w(σ) = ∏_v φ_v(σ_v) · ∏_e φ_e(σ_e)`.
    pub fn weight(&self, config: &[usize]) -> f64 {
        let vars: f64 = self
            .variables
            .iter()
            .zip(config)
            .map(|(f, x)| f.weight(*x))
            .product();
        self.constraints
            .iter()
            .fold(vars, |acc, c| acc * c.value(config))
    }

    /// `vbl(D)`: updated variables plus every variable of an updated or
    /// added constraint.
    pub fn vbl(&self, update: &UpdateRequest) -> VarSet {
        update
            .variables
            .iter()
            .map(|u| u.id)
            .chain(
                update
                    .constraints
                    .iter()
                    .flat_map(|c| c.scope.iter().copied()),
            )
            .collect()
    }

    pub fn constraint_partition(&self, set: &VarSet) -> ConstraintPartition {
        let mut seen: Vec<ConstraintId> = set
            .iter()
            .flat_map(|v| self.incidence[*v].iter().copied())
            .collect();
        seen.sort_unstable();
        seen.dedup();
        let mut part = ConstraintPartition::default();
        for e in seen {
            if self.constraints[e].scope().iter().all(|v| set.contains(v)) {
                part.internal.push(e);
            } else {
                part.boundary.push(e);
            }
        }
        part
    }

    /// `E⁺(S)`, ascending.
    pub fn incident_constraints(&self, set: &VarSet) -> Vec<ConstraintId> {
        let mut seen: Vec<ConstraintId> = set
            .iter()
            .flat_map(|v| self.incidence[*v].iter().copied())
            .collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    /// `Γ(e)`: other constraints sharing a variable with `e`.
    pub fn dependency_neighbors(&self, e: ConstraintId) -> Vec<ConstraintId> {
        let mut nb: Vec<ConstraintId> = self.constraints[e]
            .scope()
            .iter()
            .flat_map(|v| self.incidence[*v].iter().copied())
            .filter(|f| *f != e)
            .collect();
        nb.sort_unstable();
        nb.dedup();
        nb
    }

    /// Maximum degree `d` of the dependency graph.
    pub fn dependency_degree(&self) -> usize {
        (0..self.num_constraints())
            .map(|e| self.dependency_neighbors(e).len())
            .max()
            .unwrap_or(0)
    }

    /// Smallest `B_e` over all constraints (1 for a constraint-free model).
    pub fn min_lower_bound(&self) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.lower_bound())
            .fold(1.0, f64::min)
    }

    pub fn validate_update(&self, update: &UpdateRequest) -> Result<()> {
        let n = self.num_variables();
        let mut seen_vars = HashSet::new();
        for vu in &update.variables {
            if vu.id >= n {
                return Err(Error::UnknownVariable { id: vu.id, n });
            }
            if !seen_vars.insert(vu.id) {
                return Err(Error::DuplicateTarget {
                    target: format!("variable {}", vu.id),
                });
            }
            let q = self.variables[vu.id].q();
            if vu.phi.len() != q {
                return Err(Error::LengthMismatch {
                    what: format!("weights of variable {}", vu.id),
                    expected: q,
                    actual: vu.phi.len(),
                });
            }
        }
        let mut seen_scopes = HashSet::new();
        for cu in &update.constraints {
            if let Some(v) = cu.scope.iter().find(|v| **v >= n) {
                return Err(Error::UnknownVariable { id: *v, n });
            }
            if !seen_scopes.insert(scope_key(&cu.scope)) {
                return Err(Error::DuplicateTarget {
                    target: format!("scope {:?}", cu.scope),
                });
            }
        }
        Ok(())
    }

    /// Applies `(D, Φ_D)` and returns the updated model. New factors are
    /// normalized; untouched constraint tables are shared with `self`.
    pub fn apply_update(&self, update: &UpdateRequest) -> Result<Self> {
        self.validate_update(update)?;
        let mut next = self.clone();
        for vu in &update.variables {
            next.variables[vu.id] = VariableFactor::new(vu.phi.clone())?.normalized();
        }
        for cu in &update.constraints {
            let dims = cu.scope.iter().map(|v| self.variables[*v].q()).collect();
            let factor =
                ConstraintFactor::new(cu.scope.clone(), dims, cu.table.clone())?.normalized();
            match self.find_constraint(&cu.scope) {
                Some(id) => next.constraints[id] = Arc::new(factor),
                None => {
                    let id = next.constraints.len();
                    for v in &cu.scope {
                        next.incidence[*v].push(id);
                    }
                    next.scope_index.insert(scope_key(&cu.scope), id);
                    next.constraints.push(Arc::new(factor));
                }
            }
        }
        Ok(next)
    }

    /// Drops constraints whose table is identically one. Constraint ids are
    /// renumbered.
    pub fn without_trivial_constraints(&self) -> Self {
        let kept = self
            .constraints
            .iter()
            .filter(|c| !c.is_trivial())
            .map(|c| (**c).clone())
            .collect();
        Self::new(self.variables.clone(), kept).expect("subset of a valid model is valid")
    }

    /// Checks that the incidence lists and scope index agree with the scopes.
    pub fn validate(&self) -> Result<()> {
        let mut expected = vec![Vec::new(); self.num_variables()];
        for (id, c) in self.constraints() {
            for v in c.scope() {
                expected
                    .get_mut(*v)
                    .ok_or(Error::UnknownVariable {
                        id: *v,
                        n: self.num_variables(),
                    })?
                    .push(id);
            }
            if self.scope_index.get(&scope_key(c.scope())) != Some(&id) {
                return Err(Error::InvalidModel(format!(
                    "scope index disagrees for constraint {id}"
                )));
            }
        }
        if expected != self.incidence {
            return Err(Error::InvalidModel("incidence lists out of sync".into()));
        }
        if self.scope_index.len() != self.num_constraints() {
            return Err(Error::InvalidModel("duplicate scopes".into()));
        }
        Ok(())
    }
}
