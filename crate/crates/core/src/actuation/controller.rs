use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::activation::{activation_step, hatze_activation, hatze_activation_step, HatzeParams};
use super::muscle::{
    fiber_kinematics, muscle_joint_damping, muscle_joint_torque, AblationFlags, LinearMap, MuscleParams,
};
use super::torque::{lowpass_step, pd_control, torque_actuator, PdGains, LOWPASS_FAST, LOWPASS_SLOW};
use crate::arm::ArmState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationModel {
    #[default]
    FirstOrder,
    Hatze,
}

/// Stateless description of an actuator morphology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Morphology {
    Muscle { ablation: AblationFlags, activation: ActivationModel },
    Torque,
    Pd,
    LowPassFast,
    LowPassSlow,
}

impl Morphology {
    pub fn muscle() -> Self {
        Morphology::Muscle { ablation: AblationFlags::default(), activation: ActivationModel::FirstOrder }
    }

    pub fn is_muscle(&self) -> bool {
        matches!(self, Morphology::Muscle { .. })
    }

    /// Number of control channels for the two-joint arm.
    pub fn control_dim(&self) -> usize {
        if self.is_muscle() {
            4
        } else {
            2
        }
    }

    pub fn control_bounds(&self) -> (f64, f64) {
        if self.is_muscle() {
            (0.0, 1.0)
        } else {
            (-1.0, 1.0)
        }
    }

    pub fn with_ablation(self, flags: AblationFlags) -> Self {
        match self {
            Morphology::Muscle { activation, .. } => Morphology::Muscle { ablation: flags, activation },
            other => other,
        }
    }
}

impl fmt::Display for Morphology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Morphology::Muscle { ablation, activation } => {
                f.write_str("muscle")?;
                if *activation == ActivationModel::Hatze {
                    f.write_str("-hatze")?;
                }
                if ablation.disable_fl {
                    f.write_str("-nofl")?;
                }
                if ablation.disable_fv {
                    f.write_str("-nofv")?;
                }
                if ablation.disable_activation {
                    f.write_str("-noactdyn")?;
                }
                Ok(())
            }
            Morphology::Torque => f.write_str("torque"),
            Morphology::Pd => f.write_str("pd"),
            Morphology::LowPassFast => f.write_str("lowpass-fast"),
            Morphology::LowPassSlow => f.write_str("lowpass-slow"),
        }
    }
}

impl FromStr for Morphology {
    type Err = Error;

    /// Accepts `torque`, `pd`, `lowpass-fast`, `lowpass-slow` and `muscle`
    /// with optional suffixes `-hatze`, `-nofl`, `-nofv`, `-noactdyn`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torque" => return Ok(Morphology::Torque),
            "pd" => return Ok(Morphology::Pd),
            "lowpass-fast" => return Ok(Morphology::LowPassFast),
            "lowpass-slow" => return Ok(Morphology::LowPassSlow),
            _ => {}
        }
        let mut parts = s.split('-');
        if parts.next() != Some("muscle") {
            return Err(Error::Config(format!("unknown morphology '{s}'")));
        }
        let mut ablation = AblationFlags::default();
        let mut activation = ActivationModel::FirstOrder;
        for part in parts {
            match part {
                "hatze" => activation = ActivationModel::Hatze,
                "nofl" => ablation.disable_fl = true,
                "nofv" => ablation.disable_fv = true,
                "noactdyn" => ablation.disable_activation = true,
                _ => return Err(Error::Config(format!("unknown morphology '{s}'"))),
            }
        }
        Ok(Morphology::Muscle { ablation, activation })
    }
}

/// Physical parameters every morphology draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorParams {
    pub muscle: MuscleParams,
    pub hatze: HatzeParams,
    /// Torque limit per joint for the torque family (N m).
    pub tau_max: [f64; 2],
    pub pd: PdGains,
    /// PD set-point in radians per unit of control.
    pub pd_angle_scale: f64,
}

impl Default for ActuatorParams {
    fn default() -> Self {
        Self {
            muscle: MuscleParams::default(),
            hatze: HatzeParams::default(),
            tau_max: [DEFAULT_TAU_MAX; 2],
            pd: PdGains::default(),
            pd_angle_scale: std::f64::consts::PI,
        }
    }
}

/// Default torque limit (N m). Close to the isometric peak `m_1 F_max` of one
/// default muscle (about 28 N m); `calibrate-torque` measures the peaks of
/// optimized muscle rollouts for a config.
pub const DEFAULT_TAU_MAX: f64 = 30.0;

impl ActuatorParams {
    pub fn validate(&self) -> Result<()> {
        self.muscle.validate()?;
        if !self.tau_max.iter().all(|t| *t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter("tau_max must be > 0".into()));
        }
        if !(self.pd_angle_scale > 0.0) {
            return Err(Error::InvalidParameter("pd_angle_scale must be > 0".into()));
        }
        Ok(())
    }
}

/// Stateful actuator for one rollout. Clone it per rollout; it must not be
/// shared between concurrent simulations.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Muscle {
        params: MuscleParams,
        maps: [LinearMap; 2],
        flags: AblationFlags,
        model: ActivationModel,
        hatze: HatzeParams,
        /// Layout `[joint0 muscle1, joint0 muscle2, joint1 muscle1, joint1 muscle2]`.
        activity: [f64; 4],
        gamma: [f64; 4],
    },
    Torque {
        tau_max: [f64; 2],
    },
    Pd {
        gains: PdGains,
        tau_max: [f64; 2],
        angle_scale: f64,
    },
    LowPassTorque {
        time_scale: f64,
        tau_max: [f64; 2],
        filtered: [f64; 2],
    },
}

impl Controller {
    pub fn new(morphology: Morphology, params: &ActuatorParams) -> Result<Self> {
        params.validate()?;
        Ok(match morphology {
            Morphology::Muscle { ablation, activation } => {
                let hatze = params.hatze;
                let mut c = Controller::Muscle {
                    params: params.muscle,
                    maps: params.muscle.linear_maps()?,
                    flags: ablation,
                    model: activation,
                    hatze,
                    activity: [0.0; 4],
                    gamma: [0.0; 4],
                };
                c.reset();
                c
            }
            Morphology::Torque => Controller::Torque { tau_max: params.tau_max },
            Morphology::Pd => {
                Controller::Pd { gains: params.pd, tau_max: params.tau_max, angle_scale: params.pd_angle_scale }
            }
            Morphology::LowPassFast => {
                Controller::LowPassTorque { time_scale: LOWPASS_FAST, tau_max: params.tau_max, filtered: [0.0; 2] }
            }
            Morphology::LowPassSlow => {
                Controller::LowPassTorque { time_scale: LOWPASS_SLOW, tau_max: params.tau_max, filtered: [0.0; 2] }
            }
        })
    }

    pub fn control_dim(&self) -> usize {
        match self {
            Controller::Muscle { .. } => 4,
            _ => 2,
        }
    }

    pub fn control_bounds(&self) -> (f64, f64) {
        match self {
            Controller::Muscle { .. } => (0.0, 1.0),
            _ => (-1.0, 1.0),
        }
    }

    /// Clears internal actuator state (activities, filters).
    pub fn reset(&mut self) {
        match self {
            Controller::Muscle { activity, gamma, model, hatze, .. } => {
                *gamma = [0.0; 4];
                *activity = match model {
                    ActivationModel::FirstOrder => [0.0; 4],
                    // a(gamma = 0) = a_0 regardless of length
                    ActivationModel::Hatze => [hatze_activation(0.0, 1.0, hatze); 4],
                };
            }
            Controller::LowPassTorque { filtered, .. } => *filtered = [0.0; 2],
            Controller::Torque { .. } | Controller::Pd { .. } => {}
        }
    }

    /// Internal actuator state: muscle activities or filtered commands.
    pub fn internal_state(&self) -> &[f64] {
        match self {
            Controller::Muscle { activity, .. } => activity,
            Controller::LowPassTorque { filtered, .. } => filtered,
            Controller::Torque { .. } | Controller::Pd { .. } => &[],
        }
    }

    /// Advances actuator dynamics by one physics step under control `u` and
    /// returns the joint torques for that step.
    pub fn actuate(&mut self, u: &[f64], arm: &ArmState, dt: f64) -> Result<[f64; 2]> {
        self.actuate_linearized(u, arm, dt).map(|(tau, _)| tau)
    }

    /// As [`Controller::actuate`], also returning the per-joint damping
    /// `-d tau / d dtheta` at the current state, for implicit integration.
    pub fn actuate_linearized(&mut self, u: &[f64], arm: &ArmState, dt: f64) -> Result<([f64; 2], [f64; 2])> {
        if u.len() != self.control_dim() {
            return Err(Error::DimensionMismatch { expected: self.control_dim(), got: u.len() });
        }
        let mut tau = [0.0; 2];
        let mut damping = [0.0; 2];
        match self {
            Controller::Muscle { params, maps, flags, model, hatze, activity, gamma } => {
                for j in 0..2 {
                    for i in 0..2 {
                        let k = 2 * j + i;
                        if flags.disable_activation {
                            activity[k] = u[k].clamp(0.0, 1.0);
                            continue;
                        }
                        match model {
                            ActivationModel::FirstOrder => {
                                activity[k] = activation_step(activity[k], u[k], dt, params.activation_time);
                            }
                            ActivationModel::Hatze => {
                                let (l, _) =
                                    fiber_kinematics(arm.theta[j], arm.dtheta[j], maps[j].m[i], maps[j].l_ref[i]);
                                let (g, a) = hatze_activation_step(gamma[k], u[k], l, dt, hatze)?;
                                gamma[k] = g;
                                activity[k] = a;
                            }
                        }
                    }
                    let act = [activity[2 * j], activity[2 * j + 1]];
                    let (q, dq) = (arm.theta[j], arm.dtheta[j]);
                    tau[j] = muscle_joint_torque(q, dq, act, &maps[j], params.f_max, params.v_scale, *flags);
                    damping[j] = muscle_joint_damping(q, dq, act, &maps[j], params.f_max, params.v_scale, *flags);
                }
            }
            Controller::Torque { tau_max } => {
                for j in 0..2 {
                    tau[j] = torque_actuator(u[j], tau_max[j]);
                }
            }
            Controller::Pd { gains, tau_max, angle_scale } => {
                for j in 0..2 {
                    let target = u[j].clamp(-1.0, 1.0) * *angle_scale;
                    let cmd = pd_control(arm.theta[j], arm.dtheta[j], target, gains.kp, gains.kd);
                    tau[j] = torque_actuator(cmd, tau_max[j]);
                    if cmd.abs() < 1.0 {
                        damping[j] = gains.kd * tau_max[j];
                    }
                }
            }
            Controller::LowPassTorque { time_scale, tau_max, filtered } => {
                for j in 0..2 {
                    filtered[j] = lowpass_step(filtered[j], u[j].clamp(-1.0, 1.0), dt, *time_scale);
                    tau[j] = torque_actuator(filtered[j], tau_max[j]);
                }
            }
        }
        Ok((tau, damping))
    }
}
