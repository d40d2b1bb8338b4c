//! Principal stretches and strain invariants for homogeneous diagonal deformations.
//!
//! Every deformation handled here is coaxial with the reference axes, so the
//! deformation gradient is fully described by its three principal stretches.
//! The three incompressible test modes are parameterized by the stretch along
//! the loading axis; the transverse stretches follow from `λ1 λ2 λ3 = 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_stretch, CannError, Result};

/// Homogeneous incompressible deformation modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeformationMode {
    #[serde(rename = "UT")]
    UniaxialTension,
    #[serde(rename = "ET")]
    EquibiaxialTension,
    #[serde(rename = "PS")]
    PureShear,
}

impl DeformationMode {
    pub const ALL: [DeformationMode; 3] = [
        DeformationMode::UniaxialTension,
        DeformationMode::EquibiaxialTension,
        DeformationMode::PureShear,
    ];

    /// Short tag used in CSV files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            DeformationMode::UniaxialTension => "UT",
            DeformationMode::EquibiaxialTension => "ET",
            DeformationMode::PureShear => "PS",
        }
    }
}

impl fmt::Display for DeformationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DeformationMode {
    type Err = CannError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "UT" | "ut" => Ok(DeformationMode::UniaxialTension),
            "ET" | "et" => Ok(DeformationMode::EquibiaxialTension),
            "PS" | "ps" => Ok(DeformationMode::PureShear),
            other => Err(CannError::Domain(format!(
                "unknown deformation mode `{other}` (expected UT, ET or PS)"
            ))),
        }
    }
}

/// Principal stretches of a diagonal deformation gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalDeformation {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl DiagonalDeformation {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        for l in [lambda1, lambda2, lambda3] {
            check_stretch(l)?;
        }
        Ok(Self { lambda1, lambda2, lambda3 })
    }

    pub fn identity() -> Self {
        Self { lambda1: 1.0, lambda2: 1.0, lambda3: 1.0 }
    }

    pub fn stretches(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }

    /// Volume ratio `J = det F`.
    pub fn jacobian(&self) -> f64 {
        self.lambda1 * self.lambda2 * self.lambda3
    }
}

/// First and second invariants along a mode path, with their stretch derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantState {
    pub i1: f64,
    pub i2: f64,
    pub di1_dlambda: f64,
    pub di2_dlambda: f64,
}

/// Invariants of a general diagonal deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralInvariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub ibar1: f64,
    pub ibar2: f64,
    pub jdet: f64,
    /// Fourth invariant, present only when a fiber direction was supplied.
    pub i4: Option<f64>,
}

pub fn deformation_gradient(mode: DeformationMode, lambda: f64) -> Result<DiagonalDeformation> {
    check_stretch(lambda)?;
    let (l1, l2, l3) = match mode {
        DeformationMode::UniaxialTension => {
            let t = 1.0 / lambda.sqrt();
            (lambda, t, t)
        }
        DeformationMode::EquibiaxialTension => (lambda, lambda, 1.0 / (lambda * lambda)),
        DeformationMode::PureShear => (lambda, 1.0, 1.0 / lambda),
    };
    Ok(DiagonalDeformation { lambda1: l1, lambda2: l2, lambda3: l3 })
}

pub fn invariants(mode: DeformationMode, lambda: f64) -> Result<InvariantState> {
    check_stretch(lambda)?;
    let l = lambda;
    let l2 = l * l;
    let state = match mode {
        DeformationMode::UniaxialTension => InvariantState {
            i1: l2 + 2.0 / l,
            i2: 2.0 * l + 1.0 / l2,
            di1_dlambda: 2.0 * (l - 1.0 / l2),
            di2_dlambda: 2.0 * (1.0 - 1.0 / (l2 * l)),
        },
        DeformationMode::EquibiaxialTension => {
            let l4 = l2 * l2;
            InvariantState {
                i1: 2.0 * l2 + 1.0 / l4,
                i2: l4 + 2.0 / l2,
                di1_dlambda: 4.0 * (l - 1.0 / (l4 * l)),
                di2_dlambda: 4.0 * (l2 * l - 1.0 / (l2 * l)),
            }
        }
        DeformationMode::PureShear => {
            let i = l2 + 1.0 + 1.0 / l2;
            let d = 2.0 * (l - 1.0 / (l2 * l));
            InvariantState { i1: i, i2: i, di1_dlambda: d, di2_dlambda: d }
        }
    };
    Ok(state)
}

/// Invariants of `C = F^T F` for a diagonal `F`.
///
/// `fiber_direction` is a unit vector in the principal frame; when present the
/// fourth invariant `I4 = n · C n` is evaluated as well.
pub fn general_invariants(
    f: &DiagonalDeformation,
    fiber_direction: Option<[f64; 3]>,
) -> Result<GeneralInvariants> {
    let s = f.stretches();
    for l in s {
        check_stretch(l)?;
    }
    let sq = s.map(|l| l * l);
    let i1: f64 = sq.iter().sum();
    let i2 = sq[0] * sq[1] + sq[1] * sq[2] + sq[0] * sq[2];
    let jdet = f.jacobian();
    let i3 = jdet * jdet;

    let i4 = match fiber_direction {
        None => None,
        Some(n) => {
            let norm2: f64 = n.iter().map(|c| c * c).sum();
            if norm2.is_nan() || (norm2 - 1.0).abs() > 1e-12 {
                return Err(CannError::Domain(format!(
                    "fiber direction must have unit length, |n|^2 = {norm2}"
                )));
            }
            Some(n.iter().zip(sq.iter()).map(|(ni, li)| ni * ni * li).sum())
        }
    };

    Ok(GeneralInvariants {
        i1,
        i2,
        i3,
        ibar1: i1 / jdet.powf(2.0 / 3.0),
        ibar2: i2 / jdet.powf(4.0 / 3.0),
        jdet,
        i4,
    })
}
