//! The eight-term isotropic incompressible free energy.
//!
//! The energy is an additive sum of eight subfunctions of `[I1 - 3]` and
//! `[I2 - 3]`: for each invariant a linear, a quadratic, a linear-exponential
//! and a quadratic-exponential term. The linear and quadratic rows collapse to
//! a single combined coefficient; the exponential rows keep an
//! `(inner, outer)` pair, giving twelve trainable parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CannError, Result};

/// Number of trainable parameters.
pub const N_PARAMS: usize = 12;
/// Number of additive energy terms.
pub const N_TERMS: usize = 8;

/// Arguments of `exp` above this value saturate to `+inf`.
pub const EXP_ARG_LIMIT: f64 = 700.0;

fn guarded_exp(arg: f64) -> f64 {
    if arg > EXP_ARG_LIMIT {
        f64::INFINITY
    } else {
        arg.exp()
    }
}

/// Inner exponent coefficient and outer amplitude of an exponential term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpPair {
    pub inner: f64,
    pub outer: f64,
}

impl ExpPair {
    pub fn new(inner: f64, outer: f64) -> Self {
        Self { inner, outer }
    }
}

/// The twelve non-negative network weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CannWeights {
    pub lin_i1: f64,
    pub exp_lin_i1: ExpPair,
    pub quad_i1: f64,
    pub exp_quad_i1: ExpPair,
    pub lin_i2: f64,
    pub exp_lin_i2: ExpPair,
    pub quad_i2: f64,
    pub exp_quad_i2: ExpPair,
}

impl CannWeights {
    pub fn zeros() -> Self {
        Self::default()
    }

    /// Flat parameter vector, in the order
    /// `[lin_i1, exp_lin_i1.(inner, outer), quad_i1, exp_quad_i1.(inner, outer), ...]`
    /// repeated for `I2`.
    pub fn to_array(&self) -> [f64; N_PARAMS] {
        [
            self.lin_i1,
            self.exp_lin_i1.inner,
            self.exp_lin_i1.outer,
            self.quad_i1,
            self.exp_quad_i1.inner,
            self.exp_quad_i1.outer,
            self.lin_i2,
            self.exp_lin_i2.inner,
            self.exp_lin_i2.outer,
            self.quad_i2,
            self.exp_quad_i2.inner,
            self.exp_quad_i2.outer,
        ]
    }

    pub fn from_array(w: &[f64; N_PARAMS]) -> Self {
        Self {
            lin_i1: w[0],
            exp_lin_i1: ExpPair::new(w[1], w[2]),
            quad_i1: w[3],
            exp_quad_i1: ExpPair::new(w[4], w[5]),
            lin_i2: w[6],
            exp_lin_i2: ExpPair::new(w[7], w[8]),
            quad_i2: w[9],
            exp_quad_i2: ExpPair::new(w[10], w[11]),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.to_array().iter().all(|w| w.is_finite() && *w >= 0.0)
    }

    /// Copy of `self` with every parameter outside `term` set to zero.
    pub fn restricted_to(&self, term: Term) -> Self {
        let src = self.to_array();
        let mut w = [0.0; N_PARAMS];
        for &i in term.param_indices() {
            w[i] = src[i];
        }
        Self::from_array(&w)
    }
}

/// Which invariant a term acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    I1,
    I2,
}

/// Activation functions of the second hidden layer, applied after the
/// power of the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivationKind {
    Linear,
    Quadratic,
    ExpLinear,
    ExpQuadratic,
}

/// `f(x)` with `f(0) = 0` for every kind. `inner_weight` is ignored for the
/// polynomial kinds.
pub fn activation(kind: ActivationKind, inner_weight: f64, x: f64) -> f64 {
    match kind {
        ActivationKind::Linear => x,
        ActivationKind::Quadratic => x * x,
        ActivationKind::ExpLinear => guarded_exp(inner_weight * x) - 1.0,
        ActivationKind::ExpQuadratic => guarded_exp(inner_weight * x * x) - 1.0,
    }
}

/// The eight energy terms, in network order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    LinI1,
    ExpLinI1,
    QuadI1,
    ExpQuadI1,
    LinI2,
    ExpLinI2,
    QuadI2,
    ExpQuadI2,
}

impl Term {
    pub const ALL: [Term; N_TERMS] = [
        Term::LinI1,
        Term::ExpLinI1,
        Term::QuadI1,
        Term::ExpQuadI1,
        Term::LinI2,
        Term::ExpLinI2,
        Term::QuadI2,
        Term::ExpQuadI2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::LinI1 => "lin_i1",
            Term::ExpLinI1 => "exp_lin_i1",
            Term::QuadI1 => "quad_i1",
            Term::ExpQuadI1 => "exp_quad_i1",
            Term::LinI2 => "lin_i2",
            Term::ExpLinI2 => "exp_lin_i2",
            Term::QuadI2 => "quad_i2",
            Term::ExpQuadI2 => "exp_quad_i2",
        }
    }

    pub fn invariant(self) -> Invariant {
        match self {
            Term::LinI1 | Term::ExpLinI1 | Term::QuadI1 | Term::ExpQuadI1 => Invariant::I1,
            _ => Invariant::I2,
        }
    }

    pub fn activation(self) -> ActivationKind {
        match self {
            Term::LinI1 | Term::LinI2 => ActivationKind::Linear,
            Term::QuadI1 | Term::QuadI2 => ActivationKind::Quadratic,
            Term::ExpLinI1 | Term::ExpLinI2 => ActivationKind::ExpLinear,
            Term::ExpQuadI1 | Term::ExpQuadI2 => ActivationKind::ExpQuadratic,
        }
    }

    pub fn is_exponential(self) -> bool {
        matches!(self.activation(), ActivationKind::ExpLinear | ActivationKind::ExpQuadratic)
    }

    /// Indices of this term's parameters in [`CannWeights::to_array`].
    /// Exponential terms list `[inner, outer]`.
    pub fn param_indices(self) -> &'static [usize] {
        match self {
            Term::LinI1 => &[0],
            Term::ExpLinI1 => &[1, 2],
            Term::QuadI1 => &[3],
            Term::ExpQuadI1 => &[4, 5],
            Term::LinI2 => &[6],
            Term::ExpLinI2 => &[7, 8],
            Term::QuadI2 => &[9],
            Term::ExpQuadI2 => &[10, 11],
        }
    }

    /// Contribution slope of the term at the reference state: the combined
    /// coefficient for polynomial terms, `inner * outer` for exponentials.
    pub fn magnitude(self, w: &CannWeights) -> f64 {
        let a = w.to_array();
        match self.param_indices() {
            [i] => a[*i],
            [inner, outer] => a[*inner] * a[*outer],
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Term {
    type Err = CannError;

    fn from_str(s: &str) -> Result<Self> {
        Term::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| CannError::Domain(format!("unknown energy term `{s}`")))
    }
}

/// `ψ`, `∂ψ/∂I1` and `∂ψ/∂I2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyDerivatives {
    pub psi: f64,
    pub dpsi_di1: f64,
    pub dpsi_di2: f64,
}

/// Value and first derivative of one term with respect to its invariant.
fn term_value_and_slope(w: &CannWeights, term: Term, i1: f64, i2: f64) -> (f64, f64) {
    let x = match term.invariant() {
        Invariant::I1 => i1 - 3.0,
        Invariant::I2 => i2 - 3.0,
    };
    let a = w.to_array();
    match term.activation() {
        ActivationKind::Linear => {
            let c = a[term.param_indices()[0]];
            (c * x, c)
        }
        ActivationKind::Quadratic => {
            let c = a[term.param_indices()[0]];
            (c * x * x, 2.0 * c * x)
        }
        kind @ (ActivationKind::ExpLinear | ActivationKind::ExpQuadratic) => {
            let (inner, outer) = (a[term.param_indices()[0]], a[term.param_indices()[1]]);
            if outer == 0.0 {
                return (0.0, 0.0);
            }
            let (y, dy) = if kind == ActivationKind::ExpLinear { (x, 1.0) } else { (x * x, 2.0 * x) };
            let e = guarded_exp(inner * y);
            (outer * (e - 1.0), outer * inner * e * dy)
        }
    }
}

/// Energy of a single term.
pub fn term_energy(weights: &CannWeights, term: Term, i1: f64, i2: f64) -> f64 {
    term_value_and_slope(weights, term, i1, i2).0
}

/// `(∂ψ_term/∂I1, ∂ψ_term/∂I2)` for a single term.
pub fn term_derivatives(weights: &CannWeights, term: Term, i1: f64, i2: f64) -> (f64, f64) {
    let (_, slope) = term_value_and_slope(weights, term, i1, i2);
    match term.invariant() {
        Invariant::I1 => (slope, 0.0),
        Invariant::I2 => (0.0, slope),
    }
}

pub fn energy(weights: &CannWeights, i1: f64, i2: f64) -> f64 {
    Term::ALL.iter().map(|&t| term_energy(weights, t, i1, i2)).sum()
}

pub fn energy_derivatives(weights: &CannWeights, i1: f64, i2: f64) -> EnergyDerivatives {
    let mut out = EnergyDerivatives::default();
    for t in Term::ALL {
        let (psi, slope) = term_value_and_slope(weights, t, i1, i2);
        out.psi += psi;
        match t.invariant() {
            Invariant::I1 => out.dpsi_di1 += slope,
            Invariant::I2 => out.dpsi_di2 += slope,
        }
    }
    out
}

/// `∂ψ/∂w` for each of the twelve parameters.
pub fn energy_weight_gradient(weights: &CannWeights, i1: f64, i2: f64) -> [f64; N_PARAMS] {
    let a = weights.to_array();
    let mut g = [0.0; N_PARAMS];
    for t in Term::ALL {
        let x = match t.invariant() {
            Invariant::I1 => i1 - 3.0,
            Invariant::I2 => i2 - 3.0,
        };
        let idx = t.param_indices();
        match t.activation() {
            ActivationKind::Linear => g[idx[0]] = x,
            ActivationKind::Quadratic => g[idx[0]] = x * x,
            kind => {
                let y = if kind == ActivationKind::ExpLinear { x } else { x * x };
                let (inner, outer) = (a[idx[0]], a[idx[1]]);
                let e = guarded_exp(inner * y);
                g[idx[0]] = if outer == 0.0 { 0.0 } else { outer * y * e };
                g[idx[1]] = e - 1.0;
            }
        }
    }
    g
}

/// Sensitivities of `(∂ψ/∂I1, ∂ψ/∂I2)` with respect to the twelve parameters.
pub(crate) fn derivative_weight_gradient(
    weights: &CannWeights,
    i1: f64,
    i2: f64,
) -> ([f64; N_PARAMS], [f64; N_PARAMS]) {
    let a = weights.to_array();
    let mut g1 = [0.0; N_PARAMS];
    let mut g2 = [0.0; N_PARAMS];
    for t in Term::ALL {
        let (x, g) = match t.invariant() {
            Invariant::I1 => (i1 - 3.0, &mut g1),
            Invariant::I2 => (i2 - 3.0, &mut g2),
        };
        let idx = t.param_indices();
        match t.activation() {
            ActivationKind::Linear => g[idx[0]] = 1.0,
            ActivationKind::Quadratic => g[idx[0]] = 2.0 * x,
            kind => {
                let (y, dy) = if kind == ActivationKind::ExpLinear { (x, 1.0) } else { (x * x, 2.0 * x) };
                let (inner, outer) = (a[idx[0]], a[idx[1]]);
                let e = guarded_exp(inner * y);
                // d/d(inner) of outer * inner * exp(inner * y) * dy
                g[idx[0]] = if outer == 0.0 { 0.0 } else { outer * e * dy * (1.0 + inner * y) };
                g[idx[1]] = inner * e * dy;
            }
        }
    }
    (g1, g2)
}
