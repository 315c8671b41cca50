use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Inertial and geometric parameters of the arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArmParams {
    /// Segment lengths (m).
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    /// Segment masses (kg).
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    /// Center-of-mass offsets from the proximal joint (m).
    pub r1: f64,
    pub r2: f64,
    /// Moments of inertia about the segment COM (kg m^2).
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    pub g: f64,
    /// Point mass at the hand (kg).
    pub m_hand: f64,
    /// Point mass added at the forearm COM (kg).
    pub m_extra: f64,
}

impl Default for ArmParams {
    fn default() -> Self {
        let (l1, l2, m1, m2) = (0.3, 0.3, 2.0, 1.5);
        Self {
            l1,
            l2,
            m1,
            m2,
            r1: l1 / 2.0,
            r2: l2 / 2.0,
            i1: m1 * l1 * l1 / 12.0,
            i2: m2 * l2 * l2 / 12.0,
            g: 9.81,
            m_hand: 0.5,
            m_extra: 0.0,
        }
    }
}

impl ArmParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite(
            &[
                self.l1,
                self.l2,
                self.m1,
                self.m2,
                self.r1,
                self.r2,
                self.i1,
                self.i2,
                self.g,
                self.m_hand,
                self.m_extra,
            ],
            "arm parameters",
        )?;
        let positive = [
            ("L1", self.l1),
            ("L2", self.l2),
            ("M1", self.m1),
            ("M2", self.m2),
            ("r1", self.r1),
            ("r2", self.r2),
            ("I1", self.i1),
            ("I2", self.i2),
            ("g", self.g),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("arm.{name} must be > 0, got {v}")));
            }
        }
        if self.m_hand < 0.0 || self.m_extra < 0.0 {
            return Err(Error::InvalidParameter("arm point masses must be >= 0".into()));
        }
        Ok(())
    }

    /// Total reach from the shoulder.
    pub fn reach(&self) -> f64 {
        self.l1 + self.l2
    }

    // Lumped forearm quantities: mass, first moment and second moment about the elbow.
    pub(crate) fn forearm_mass(&self) -> f64 {
        self.m2 + self.m_extra + self.m_hand
    }

    pub(crate) fn forearm_first_moment(&self) -> f64 {
        (self.m2 + self.m_extra) * self.r2 + self.m_hand * self.l2
    }

    pub(crate) fn forearm_inertia_about_elbow(&self) -> f64 {
        self.i2 + (self.m2 + self.m_extra) * self.r2 * self.r2 + self.m_hand * self.l2 * self.l2
    }
}

/// Cable pendulum hanging from the hand. `angle` is measured from the
/// downward vertical, counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PendulumState {
    pub angle: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmState {
    pub theta: [f64; 2],
    pub dtheta: [f64; 2],
    pub pendulum: Option<PendulumState>,
    pub t: f64,
}

impl ArmState {
    pub fn at_rest(theta: [f64; 2]) -> Self {
        Self { theta, dtheta: [0.0; 2], pendulum: None, t: 0.0 }
    }

    /// Both links hanging straight down.
    pub fn hanging() -> Self {
        Self::at_rest([-std::f64::consts::FRAC_PI_2, 0.0])
    }

    pub fn is_finite(&self) -> bool {
        let pend = self.pendulum.is_none_or(|p| p.angle.is_finite() && p.rate.is_finite());
        self.theta.iter().chain(&self.dtheta).all(|v| v.is_finite()) && self.t.is_finite() && pend
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    None,
    LowerArmMass { kg: f64 },
    HandMass { kg: f64 },
    ChaoticPendulum { radius: f64, density: f64, cable_length: f64 },
}

impl PerturbationKind {
    pub fn chaotic_default() -> Self {
        PerturbationKind::ChaoticPendulum { radius: 0.12, density: 1000.0, cable_length: 0.6 }
    }
}

/// An unmodeled change to the plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    /// Whether an MPC prediction model knows about this perturbation.
    pub visible_to_prediction_model: bool,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self::none()
    }
}

impl Perturbation {
    pub fn none() -> Self {
        Self { kind: PerturbationKind::None, visible_to_prediction_model: true }
    }

    pub fn hidden(kind: PerturbationKind) -> Self {
        Self { kind, visible_to_prediction_model: false }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PerturbationKind::None => Ok(()),
            PerturbationKind::LowerArmMass { kg } | PerturbationKind::HandMass { kg } => {
                if kg.is_finite() && kg >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("perturbation mass must be >= 0, got {kg}")))
                }
            }
            PerturbationKind::ChaoticPendulum { radius, density, cable_length } => {
                if [radius, density, cable_length].iter().all(|v| v.is_finite() && *v > 0.0) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("pendulum radius, density and cable must be > 0".into()))
                }
            }
        }
    }

    /// Parameters of the plant with any added point masses folded in.
    pub fn apply(&self, params: &ArmParams) -> ArmParams {
        let mut p = *params;
        match self.kind {
            PerturbationKind::LowerArmMass { kg } => p.m_extra += kg,
            PerturbationKind::HandMass { kg } => p.m_hand += kg,
            _ => {}
        }
        p
    }

    /// Bob mass and cable length of a chaotic load, if any.
    pub fn pendulum(&self) -> Option<(f64, f64)> {
        match self.kind {
            PerturbationKind::ChaoticPendulum { radius, density, cable_length } => {
                let mass = density * 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
                Some((mass, cable_length))
            }
            _ => None,
        }
    }

    /// The perturbation as seen by a prediction model.
    pub fn as_seen_by_model(&self) -> Perturbation {
        if self.visible_to_prediction_model {
            *self
        } else {
            Perturbation::none()
        }
    }
}
