use super::dynamics::{gravity_torque, mass_matrix, solve2, unchecked_forward_dynamics};
use super::kinematics::{hand_bias_acceleration, hand_jacobian};
use super::params::{ArmParams, ArmState, PendulumState, Perturbation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub state: ArmState,
    /// Joint accelerations used for this step.
    pub accel: [f64; 2],
    /// Cable tension of the chaotic load (N), zero without one.
    pub tension: f64,
    /// Actuator torque after the implicit damping correction.
    pub actuator_torque: [f64; 2],
}

/// Advances the arm by one semi-implicit (symplectic) Euler step.
///
/// The generalized momentum `p = M(theta) dtheta` is updated first, with the
/// velocity-dependent forces evaluated at the new momentum (solved by
/// Newton iteration), then the angles move with the new velocity. This is
/// first order like the velocity form but keeps the energy error bounded for
/// the configuration-dependent mass matrix.
///
/// A chaotic pendulum load is integrated alongside the arm. Its cable tension
/// is solved jointly with the arm accelerations at the start of the step and
/// clipped at zero, since a cable cannot push.
pub fn step(
    state: &ArmState,
    tau: [f64; 2],
    dt: f64,
    params: &ArmParams,
    perturbation: &Perturbation,
) -> Result<StepOutput> {
    step_implicit(state, tau, [0.0; 2], dt, params, perturbation)
}

/// [`step`] with the actuator torque linearized in joint velocity,
/// `tau(v') = tau - damping * (v' - v)`, and the damping part solved
/// implicitly. Stiff velocity-dependent actuators (muscle force-velocity,
/// PD derivative gain) stay stable at the physics step this way.
pub fn step_implicit(
    state: &ArmState,
    tau: [f64; 2],
    damping: [f64; 2],
    dt: f64,
    params: &ArmParams,
    perturbation: &Perturbation,
) -> Result<StepOutput> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    let p = perturbation.apply(params);
    let (applied, tension, pend_accel) = match perturbation.pendulum() {
        None => (tau, 0.0, None),
        Some((mass, cable)) => {
            let pend = state.pendulum.unwrap_or_default();
            let (cable_torque, t, pacc) = coupled_pendulum(state, pend, tau, &p, mass, cable);
            ([tau[0] + cable_torque[0], tau[1] + cable_torque[1]], t, Some((pend, pacc)))
        }
    };

    let mut next = *state;
    if damping.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidParameter(format!("actuator damping must be >= 0, got {damping:?}")));
    }
    let (theta, dtheta, v_mid) = symplectic_update(state.theta, state.dtheta, applied, damping, dt, &p);
    let actuator_torque =
        [tau[0] - damping[0] * (v_mid[0] - state.dtheta[0]), tau[1] - damping[1] * (v_mid[1] - state.dtheta[1])];
    next.theta = theta;
    next.dtheta = dtheta;
    let accel = [(dtheta[0] - state.dtheta[0]) / dt, (dtheta[1] - state.dtheta[1]) / dt];
    next.pendulum = pend_accel.map(|(pend, pacc)| {
        let rate = pend.rate + dt * pacc;
        PendulumState { angle: pend.angle + dt * rate, rate }
    });
    next.t += dt;

    if !next.is_finite() || !tension.is_finite() {
        return Err(Error::Diverged { t: state.t });
    }
    Ok(StepOutput { state: next, accel, tension, actuator_torque })
}

/// Returns the new angles, the new velocity and the velocity at the old
/// angles after the momentum update.
fn symplectic_update(
    theta: [f64; 2],
    dtheta: [f64; 2],
    tau: [f64; 2],
    damping: [f64; 2],
    dt: f64,
    p: &ArmParams,
) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let m = mass_matrix(theta, p);
    let lhs = [[m[0][0] + dt * damping[0], m[0][1]], [m[1][0], m[1][1] + dt * damping[1]]];
    let tau = [tau[0] + damping[0] * dtheta[0], tau[1] + damping[1] * dtheta[1]];
    let g = gravity_torque(theta, p);
    let mom = [m[0][0] * dtheta[0] + m[0][1] * dtheta[1], m[1][0] * dtheta[0] + m[1][1] * dtheta[1]];
    // dp/dt = tau - G + 1/2 v^T dM/dq v; M depends on the elbow angle only.
    let h = p.l1 * p.forearm_first_moment() * theta[1].sin();
    // Newton on lhs v - dt [0, elbow(v)] = rhs; elbow(v) = -h (v0^2 + v0 v1).
    let rhs = [mom[0] + dt * (tau[0] - g[0]), mom[1] + dt * (tau[1] - g[1])];
    let mut v = dtheta;
    for _ in 0..MAX_NEWTON_ITERS {
        let elbow = -h * (v[0] * v[0] + v[0] * v[1]);
        let r =
            [lhs[0][0] * v[0] + lhs[0][1] * v[1] - rhs[0], lhs[1][0] * v[0] + lhs[1][1] * v[1] - dt * elbow - rhs[1]];
        let jac = [lhs[0], [lhs[1][0] + dt * h * (2.0 * v[0] + v[1]), lhs[1][1] + dt * h * v[0]]];
        let dv = solve2(jac, r);
        v = [v[0] - dv[0], v[1] - dv[1]];
        if !(dv[0].abs() + dv[1].abs() > 1e-14 * (1.0 + v[0].abs() + v[1].abs())) {
            break;
        }
    }
    let mom_next = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
    let theta_next = [theta[0] + dt * v[0], theta[1] + dt * v[1]];
    (theta_next, solve2(mass_matrix(theta_next, p), mom_next), v)
}

const MAX_NEWTON_ITERS: usize = 30;

/// Returns the generalized cable torque, the tension and the pendulum angular acceleration.
fn coupled_pendulum(
    state: &ArmState,
    pend: PendulumState,
    tau: [f64; 2],
    p: &ArmParams,
    bob_mass: f64,
    cable: f64,
) -> ([f64; 2], f64, f64) {
    let (sp, cp) = pend.angle.sin_cos();
    let radial = [sp, -cp];
    let tangent = [cp, sp];
    let a0 = unchecked_forward_dynamics(state.theta, state.dtheta, tau, p);
    let jac = hand_jacobian(state.theta, p);
    let bias = hand_bias_acceleration(state.theta, state.dtheta, p);
    // Generalized force of a unit cable pull on the hand.
    let jt_u = [jac[0][0] * radial[0] + jac[1][0] * radial[1], jac[0][1] * radial[0] + jac[1][1] * radial[1]];
    let b = solve2(mass_matrix(state.theta, p), jt_u);
    let hand_acc = |acc: [f64; 2]| {
        [jac[0][0] * acc[0] + jac[0][1] * acc[1] + bias[0], jac[1][0] * acc[0] + jac[1][1] * acc[1] + bias[1]]
    };
    let free = hand_acc(a0);
    let u_jb = jt_u[0] * b[0] + jt_u[1] * b[1];
    let rhs = bob_mass * (p.g * cp + cable * pend.rate * pend.rate - (radial[0] * free[0] + radial[1] * free[1]));
    let tension = (rhs / (1.0 + bob_mass * u_jb)).max(0.0);

    let acc = [a0[0] + b[0] * tension, a0[1] + b[1] * tension];
    let h = hand_acc(acc);
    let pend_acc = (-p.g * sp - (tangent[0] * h[0] + tangent[1] * h[1])) / cable;
    ([jt_u[0] * tension, jt_u[1] * tension], tension, pend_acc)
}

/// Classical RK4 step of the unloaded arm. Reference integrator for accuracy
/// checks; simulation uses [`step`].
pub fn reference_rk4_step(state: &ArmState, tau: [f64; 2], dt: f64, params: &ArmParams) -> ArmState {
    let f = |th: [f64; 2], dth: [f64; 2]| (dth, unchecked_forward_dynamics(th, dth, tau, params));
    let add = |a: [f64; 2], b: [f64; 2], h: f64| [a[0] + h * b[0], a[1] + h * b[1]];
    let (th, dth) = (state.theta, state.dtheta);
    let (k1x, k1v) = f(th, dth);
    let (k2x, k2v) = f(add(th, k1x, dt / 2.0), add(dth, k1v, dt / 2.0));
    let (k3x, k3v) = f(add(th, k2x, dt / 2.0), add(dth, k2v, dt / 2.0));
    let (k4x, k4v) = f(add(th, k3x, dt), add(dth, k3v, dt));
    let comb = |a: [f64; 2], k1: [f64; 2], k2: [f64; 2], k3: [f64; 2], k4: [f64; 2]| {
        [
            a[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            a[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };
    ArmState {
        theta: comb(th, k1x, k2x, k3x, k4x),
        dtheta: comb(dth, k1v, k2v, k3v, k4v),
        pendulum: state.pendulum,
        t: state.t + dt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm::{end_effector, PerturbationKind};

    #[test]
    fn zero_damping_is_plain_step() {
        let p = ArmParams::default();
        let s = ArmState { theta: [0.3, 0.9], dtheta: [1.2, -0.4], pendulum: None, t: 0.0 };
        let a = step(&s, [2.0, -1.0], 0.005, &p, &Perturbation::none()).unwrap();
        let b = step_implicit(&s, [2.0, -1.0], [0.0; 2], 0.005, &p, &Perturbation::none()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.actuator_torque, [2.0, -1.0]);
        assert!(step_implicit(&s, [0.0; 2], [-1.0, 0.0], 0.005, &p, &Perturbation::none()).is_err());
    }

    #[test]
    fn stiff_damping_decays_without_sign_flips() {
        // Explicit evaluation of this damping flips the elbow velocity sign every step.
        let p = ArmParams::default();
        let s0 = ArmState { theta: [-std::f64::consts::FRAC_PI_2, 0.0], dtheta: [0.0, 3.0], pendulum: None, t: 0.0 };
        let run = |implicit: bool| {
            let mut s = s0;
            let mut flips = 0;
            for _ in 0..20 {
                let tau = [0.0, -40.0 * s.dtheta[1]];
                let d = if implicit { [0.0, 40.0] } else { [0.0; 2] };
                let Ok(out) = step_implicit(&s, tau, d, 0.005, &p, &Perturbation::none()) else {
                    return (usize::MAX, f64::INFINITY);
                };
                let next = out.state;
                if next.dtheta[1] * s.dtheta[1] < 0.0 {
                    flips += 1;
                }
                s = next;
            }
            (flips, s.dtheta[1].abs())
        };
        let (flips, speed) = run(true);
        assert_eq!(flips, 0);
        assert!(speed < 0.3);
        assert!(run(false).0 > 10, "explicit damping should oscillate");
    }

    #[test]
    fn equilibrium_only_advances_time() {
        let p = ArmParams::default();
        let s = ArmState::hanging();
        let out = step(&s, [0.0; 2], 0.005, &p, &Perturbation::none()).unwrap();
        // cos(-pi/2) is ~6e-17 in floating point, not exactly zero.
        for i in 0..2 {
            assert!((out.state.theta[i] - s.theta[i]).abs() < 1e-15);
            assert!(out.state.dtheta[i].abs() < 1e-15);
        }
        assert_eq!(out.state.t, 0.005);
    }

    #[test]
    fn rejects_nonpositive_dt() {
        let p = ArmParams::default();
        assert!(step(&ArmState::hanging(), [0.0; 2], 0.0, &p, &Perturbation::none()).is_err());
    }

    #[test]
    fn nan_torque_diverges() {
        let p = ArmParams::default();
        let err = step(&ArmState::hanging(), [f64::NAN, 0.0], 0.005, &p, &Perturbation::none()).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn hanging_pendulum_keeps_tension_equal_to_weight() {
        let p = ArmParams::default();
        let pert = Perturbation::hidden(PerturbationKind::chaotic_default());
        let (bob, _) = pert.pendulum().unwrap();
        // Hold the hanging arm still: tension on a static hand is the bob weight.
        let out = step(&ArmState::hanging(), [0.0; 2], 0.005, &p, &pert).unwrap();
        assert!((out.tension - bob * p.g).abs() < 1e-9 * bob * p.g, "{}", out.tension);
        assert!(out.state.pendulum.unwrap().angle.abs() < 1e-15);
    }

    #[test]
    fn pendulum_load_drags_the_arm_down() {
        let p = ArmParams::default();
        let pert = Perturbation::hidden(PerturbationKind::chaotic_default());
        let s = ArmState::at_rest([0.0, 0.0]);
        let loaded = step(&s, [0.0; 2], 0.005, &p, &pert).unwrap();
        let free = step(&s, [0.0; 2], 0.005, &p, &Perturbation::none()).unwrap();
        let z = |o: &StepOutput| end_effector(&o.state, &p).vel[1];
        assert!(z(&loaded) < z(&free));
    }

    #[test]
    fn slack_cable_has_zero_tension() {
        let p = ArmParams::default();
        let pert = Perturbation::hidden(PerturbationKind::chaotic_default());
        let mut s = ArmState::hanging();
        // Bob straight above the hand at rest: gravity would need a pushing cable.
        s.pendulum = Some(PendulumState { angle: std::f64::consts::PI, rate: 0.0 });
        let out = step(&s, [0.0; 2], 0.005, &p, &pert).unwrap();
        assert_eq!(out.tension, 0.0);
    }
}
