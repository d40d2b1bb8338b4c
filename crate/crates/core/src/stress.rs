//! Nominal (Piola) stress for the three incompressible test modes.
//!
//! The hydrostatic pressure is eliminated with the traction-free condition in
//! the unloaded direction(s), leaving closed forms of the type
//! `P1 = 2 [ψ1 + c(λ) ψ2] g(λ)` with `ψk = ∂ψ/∂Ik`.

use serde::{Deserialize, Serialize};

use crate::energy::{self, derivative_weight_gradient, CannWeights, Term, N_PARAMS, N_TERMS};
use crate::error::{check_stretch, CannError, Result};
use crate::kinematics::{self, DeformationMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressResult {
    /// Stress along the loading axis, MPa.
    pub p1: f64,
    /// Stress along the second in-plane axis (ET and PS only), MPa.
    pub p2: Option<f64>,
    /// Hydrostatic pressure, MPa.
    pub pressure: f64,
}

/// `(c, g)` such that `P1 = 2 [ψ1 + c ψ2] g`.
fn p1_factors(mode: DeformationMode, l: f64) -> (f64, f64) {
    let l2 = l * l;
    match mode {
        DeformationMode::UniaxialTension => (1.0 / l, l - 1.0 / l2),
        DeformationMode::EquibiaxialTension => (l2, l - 1.0 / (l2 * l2 * l)),
        DeformationMode::PureShear => (1.0, l - 1.0 / (l2 * l)),
    }
}

fn assemble(mode: DeformationMode, l: f64, psi1: f64, psi2: f64) -> StressResult {
    let l2 = l * l;
    let (c, g) = p1_factors(mode, l);
    let p1 = 2.0 * (psi1 + c * psi2) * g;
    match mode {
        DeformationMode::UniaxialTension => StressResult {
            p1,
            p2: None,
            pressure: 2.0 / l * psi1 + 2.0 * (l + 1.0 / l2) * psi2,
        },
        DeformationMode::EquibiaxialTension => StressResult {
            p1,
            p2: Some(p1),
            pressure: 2.0 / (l2 * l2) * psi1 + 4.0 / l2 * psi2,
        },
        DeformationMode::PureShear => StressResult {
            p1,
            p2: Some(2.0 * (psi1 + l2 * psi2) * (1.0 - 1.0 / l2)),
            pressure: 2.0 / l2 * psi1 + 2.0 * (1.0 + 1.0 / l2) * psi2,
        },
    }
}

pub fn nominal_stress(weights: &CannWeights, mode: DeformationMode, lambda: f64) -> Result<StressResult> {
    let inv = kinematics::invariants(mode, lambda)?;
    let d = energy::energy_derivatives(weights, inv.i1, inv.i2);
    Ok(assemble(mode, lambda, d.dpsi_di1, d.dpsi_di2))
}

/// `P1` split into the contributions of the eight energy terms, in
/// [`Term::ALL`] order. The contributions sum to `nominal_stress(..).p1`.
pub fn term_stresses(weights: &CannWeights, mode: DeformationMode, lambda: f64) -> Result<[f64; N_TERMS]> {
    let inv = kinematics::invariants(mode, lambda)?;
    let (c, g) = p1_factors(mode, lambda);
    Ok(Term::ALL.map(|t| {
        let (psi1, psi2) = energy::term_derivatives(weights, t, inv.i1, inv.i2);
        2.0 * (psi1 + c * psi2) * g
    }))
}

/// `∂P1/∂w` for the twelve parameters.
pub fn stress_weight_gradient(
    weights: &CannWeights,
    mode: DeformationMode,
    lambda: f64,
) -> Result<[f64; N_PARAMS]> {
    let inv = kinematics::invariants(mode, lambda)?;
    let (c, g) = p1_factors(mode, lambda);
    let (d1, d2) = derivative_weight_gradient(weights, inv.i1, inv.i2);
    Ok(std::array::from_fn(|k| 2.0 * (d1[k] + c * d2[k]) * g))
}

/// Element-wise [`nominal_stress`]; a bad stretch reports its index.
pub fn predict_curve(weights: &CannWeights, mode: DeformationMode, lambdas: &[f64]) -> Result<Vec<StressResult>> {
    lambdas
        .iter()
        .enumerate()
        .map(|(index, &l)| {
            check_stretch(l).map_err(|e| CannError::AtIndex { index, source: Box::new(e) })?;
            nominal_stress(weights, mode, l)
        })
        .collect()
}
