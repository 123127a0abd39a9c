//! Vector fields of the pheromone dynamics on `n` parallel paths.
//!
//! Every variant has the form
//!
//! ```text
//! dx_i/dt = gamma * g(-alpha + beta * phi(x) * d_i) * x_i
//! ```
//!
//! where `d_i = 1 / L_i` is the reciprocal path length, `phi` is a saturation
//! function (sum- or max-reciprocal) and `g` an increasing activation with
//! `g(0) = 0`. The choice `phi = 1/sum`, `g = identity` is the EigenAnt field.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::rel_close;

/// Relative tolerance under which two reciprocal lengths count as tied.
pub const TIE_REL_TOL: f64 = 1e-12;

/// Reciprocal path lengths in canonical (nonincreasing) order, plus the
/// distinct-value structure used by the convergence-rate results.
///
/// All state vectors handled by this crate are expressed in the canonical
/// order. [`PathSystem::to_canonical`] and [`PathSystem::to_user`] convert
/// between it and the order the lengths were supplied in.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSystem {
    lengths: Vec<f64>,
    d: Vec<f64>,
    d_prime: Vec<f64>,
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
    permutation: Vec<usize>,
}

impl PathSystem {
    /// Builds the system from positive path lengths in any order.
    ///
    /// Reciprocals within [`TIE_REL_TOL`] of the first member of their group
    /// are snapped to that member, so tied paths share a bitwise-identical
    /// `d` value.
    pub fn from_lengths(lengths: &[f64]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::invalid("lengths", "at least one path is required"));
        }
        for (i, &l) in lengths.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::invalid(
                    "lengths",
                    format!("length {} of path {} is not a positive finite number", l, i + 1),
                ));
            }
        }
        let mut permutation: Vec<usize> = (0..lengths.len()).collect();
        // stable: equal lengths keep their user order
        permutation.sort_by(|&a, &b| lengths[a].total_cmp(&lengths[b]));
        let sorted: Vec<f64> = permutation.iter().map(|&k| lengths[k]).collect();
        let raw_d: Vec<f64> = sorted.iter().map(|l| 1.0 / l).collect();

        let mut d = Vec::with_capacity(raw_d.len());
        let mut d_prime: Vec<f64> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut group_of = Vec::with_capacity(raw_d.len());
        for (k, &value) in raw_d.iter().enumerate() {
            match d_prime.last() {
                Some(&rep) if rel_close(rep, value, TIE_REL_TOL) => {
                    d.push(rep);
                    groups.last_mut().expect("group exists").push(k);
                }
                _ => {
                    d_prime.push(value);
                    groups.push(vec![k]);
                    d.push(value);
                }
            }
            group_of.push(groups.len() - 1);
        }
        Ok(Self {
            lengths: sorted,
            d,
            d_prime,
            groups,
            group_of,
            permutation,
        })
    }

    /// Builds the system from reciprocal lengths `d_i > 0`.
    pub fn from_reciprocals(d: &[f64]) -> Result<Self> {
        if let Some((i, &v)) = d.iter().enumerate().find(|(_, &v)| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(
                "d",
                format!("reciprocal length {} of path {} is not positive and finite", v, i + 1),
            ));
        }
        let lengths: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
        Self::from_lengths(&lengths)
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Path lengths, canonical order.
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Reciprocal lengths, nonincreasing.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Largest reciprocal length (the shortest path).
    pub fn d_max(&self) -> f64 {
        self.d[0]
    }

    pub fn d_min(&self) -> f64 {
        self.d[self.d.len() - 1]
    }

    /// Distinct reciprocal lengths, strictly decreasing.
    pub fn d_prime(&self) -> &[f64] {
        &self.d_prime
    }

    /// Second largest distinct reciprocal length, if the system has one.
    pub fn second_distinct(&self) -> Option<f64> {
        self.d_prime.get(1).copied()
    }

    /// For each distinct value `d_prime[k]`, the canonical indices carrying it.
    pub fn multiplicity(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Index into [`Self::d_prime`] of the group containing canonical index `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    /// Canonical indices tied with the shortest path.
    pub fn shortest_set(&self) -> &[usize] {
        &self.groups[0]
    }

    pub fn is_shortest(&self, i: usize) -> bool {
        self.group_of[i] == 0
    }

    /// `permutation()[k]` is the user index of canonical index `k`.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Reorders a user-ordered vector into canonical order.
    pub fn to_canonical(&self, user: &[f64]) -> Vec<f64> {
        self.permutation.iter().map(|&k| user[k]).collect()
    }

    /// Reorders a canonical vector back into user order.
    pub fn to_user(&self, canonical: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; canonical.len()];
        for (k, &u) in self.permutation.iter().enumerate() {
            out[u] = canonical[k];
        }
        out
    }
}

/// The saturation function `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Saturation {
    /// `phi(x) = 1 / sum(x)`, the EigenAnt choice.
    Sum,
    /// `phi(x) = 1 / max(x)` (MaxAnt).
    Max,
}

impl Saturation {
    pub fn eval(self, x: &[f64]) -> Result<f64> {
        check_domain(x)?;
        let denom = match self {
            Saturation::Sum => x.iter().sum::<f64>(),
            Saturation::Max => x.iter().copied().fold(0.0, f64::max),
        };
        let value = 1.0 / denom;
        if !value.is_finite() {
            return Err(Error::Domain(format!("saturation overflow (denominator {denom:e})")));
        }
        Ok(value)
    }

    /// Gradient of `phi`. For `Max` this requires a unique maximizer.
    pub fn gradient(self, x: &[f64]) -> Result<Vec<f64>> {
        check_domain(x)?;
        match self {
            Saturation::Sum => {
                let s: f64 = x.iter().sum();
                Ok(vec![-1.0 / (s * s); x.len()])
            }
            Saturation::Max => {
                let (arg, max) = argmax_unique(x)?;
                let mut g = vec![0.0; x.len()];
                g[arg] = -1.0 / (max * max);
                Ok(g)
            }
        }
    }

    /// True when `phi` is differentiable at `x`.
    pub fn is_differentiable_at(self, x: &[f64]) -> bool {
        match self {
            Saturation::Sum => check_domain(x).is_ok(),
            Saturation::Max => argmax_unique(x).is_ok(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Saturation::Sum => "sum",
            Saturation::Max => "max",
        }
    }
}

fn check_domain(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Domain("empty state vector".into()));
    }
    for (i, &v) in x.iter().enumerate() {
        if v.is_nan() || v < 0.0 {
            return Err(Error::Domain(format!("component x_{} = {} is negative or NaN", i + 1, v)));
        }
        if v.is_infinite() {
            return Err(Error::Domain(format!("component x_{} is infinite", i + 1)));
        }
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::Domain(format!(
            "all {} components are zero (the origin is excluded)",
            x.len()
        )));
    }
    Ok(())
}

fn argmax_unique(x: &[f64]) -> Result<(usize, f64)> {
    check_domain(x)?;
    let max = x.iter().copied().fold(0.0, f64::max);
    let mut hits = x.iter().enumerate().filter(|(_, &v)| v == max).map(|(i, _)| i);
    let first = hits.next().expect("maximum is attained");
    if let Some(second) = hits.next() {
        return Err(Error::Nondifferentiable(format!(
            "max-saturation has tied maximizers x_{} = x_{} = {}",
            first + 1,
            second + 1,
            max
        )));
    }
    Ok((first, max))
}

impl fmt::Display for Saturation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Saturation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sum" => Ok(Saturation::Sum),
            "max" => Ok(Saturation::Max),
            other => Err(format!("unknown saturation `{other}` (expected sum or max)")),
        }
    }
}

/// The outer activation `g`, applied elementwise to the diagonal rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Tanh,
    /// Infinite-gain limit of `Tanh`. `sign(0) = 0`.
    Signum,
}

impl Activation {
    pub fn eval(self, a: f64) -> f64 {
        match self {
            Activation::Identity => a,
            Activation::Tanh => a.tanh(),
            Activation::Signum => {
                if a > 0.0 {
                    1.0
                } else if a < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn derivative(self, a: f64) -> Result<f64> {
        match self {
            Activation::Identity => Ok(1.0),
            Activation::Tanh => {
                let t = a.tanh();
                Ok(1.0 - t * t)
            }
            Activation::Signum => Err(Error::Unsupported(
                "the signum activation has no classical derivative".into(),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
            Activation::Signum => "signum",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "linear" => Ok(Activation::Identity),
            "tanh" => Ok(Activation::Tanh),
            "signum" | "sign" | "sgn" => Ok(Activation::Signum),
            other => Err(format!(
                "unknown activation `{other}` (expected identity, tanh or signum)"
            )),
        }
    }
}

/// Fully specified vector field. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    alpha: f64,
    beta: f64,
    gamma: f64,
    saturation: Saturation,
    activation: Activation,
    paths: PathSystem,
}

impl ModelSpec {
    /// EigenAnt field (`phi = 1/sum`, `g = identity`) with evaporation rate
    /// `alpha`, deposition rate `beta` and outer gain `gamma`.
    pub fn new(alpha: f64, beta: f64, gamma: f64, paths: PathSystem) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            saturation: Saturation::Sum,
            activation: Activation::Identity,
            paths,
        })
    }

    pub fn with_saturation(mut self, saturation: Saturation) -> Self {
        self.saturation = saturation;
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn saturation(&self) -> Saturation {
        self.saturation
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn paths(&self) -> &PathSystem {
        &self.paths
    }

    pub fn dim(&self) -> usize {
        self.paths.len()
    }

    /// True for the plain EigenAnt field, the only variant with a closed form.
    pub fn is_eigenant(&self) -> bool {
        self.saturation == Saturation::Sum && self.activation == Activation::Identity
    }

    /// Equilibrium scale `beta * d_1 / alpha` of the shortest path.
    pub fn shortest_limit(&self) -> f64 {
        self.beta * self.paths.d_max() / self.alpha
    }

    /// Diagonal rates `-alpha + beta * phi(x) * d_i` before the activation.
    pub fn inner_rates(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let phi = self.saturation.eval(x)?;
        Ok(self.paths.d.iter().map(|&d| -self.alpha + self.beta * phi * d).collect())
    }

    /// Evaluates the field at `x`.
    pub fn vector_field(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.vector_field_into(x, &mut out)?;
        Ok(out)
    }

    /// Evaluates the field at `x` into `out`.
    pub fn vector_field_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(x)?;
        let phi = self.saturation.eval(x)?;
        for ((o, &xi), &d) in out.iter_mut().zip(x).zip(&self.paths.d) {
            let deposit = self.beta * phi * d;
            let mut a = -self.alpha + deposit;
            if self.activation == Activation::Signum && a.abs() <= SIGN_ROUNDING_BAND * self.alpha.max(deposit) {
                // the two terms cancel up to rounding: treat as an exact zero
                a = 0.0;
            }
            *o = self.gamma * self.activation.eval(a) * xi;
        }
        Ok(())
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "state has {} components, model has {} paths",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Short identifier such as `sum-identity`.
    pub fn variant_name(&self) -> String {
        format!("{}-{}", self.saturation, self.activation)
    }
}

const SIGN_ROUNDING_BAND: f64 = 4.0 * f64::EPSILON;
