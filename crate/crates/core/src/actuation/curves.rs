//! Normalized force-length, force-velocity and passive-force curves.
//!
//! Lengths are normalized so the active force peaks at 1; velocities are
//! normalized so -1 is the maximal shortening speed.

/// Plateau of the force-velocity curve under fast lengthening.
pub const FV_ECCENTRIC_MAX: f64 = 1.35;

const FL_HALF_WIDTH: f64 = 0.5;
// Hill hyperbola curvature on the shortening side.
const FV_CURVATURE: f64 = 0.25;
// Lengthening velocity at which the eccentric plateau is reached. Chosen so
// the slope is continuous at v = 0 (both sides have slope 1/curvature + 1).
const FV_SATURATION: f64 = 2.0 * (FV_ECCENTRIC_MAX - 1.0) * FV_CURVATURE / (1.0 + FV_CURVATURE);
const FP_SCALE: f64 = 1.3;
const FP_WIDTH: f64 = 0.6;

/// Quartic bump with support `[0.5, 1.5]` and peak 1 at `l = 1`.
pub fn force_length(l: f64) -> f64 {
    let x = (l - 1.0) / FL_HALF_WIDTH;
    let b = (1.0 - x * x).max(0.0);
    b * b
}

/// Zero at and below `v = -1`, 1 at rest, saturating at [`FV_ECCENTRIC_MAX`].
pub fn force_velocity(v: f64) -> f64 {
    if v <= -1.0 {
        0.0
    } else if v <= 0.0 {
        (1.0 + v) / (1.0 - v / FV_CURVATURE)
    } else if v < FV_SATURATION {
        let x = v / FV_SATURATION;
        1.0 + (FV_ECCENTRIC_MAX - 1.0) * x * (2.0 - x)
    } else {
        FV_ECCENTRIC_MAX
    }
}

/// dFV/dv, zero where the curve is flat.
pub fn force_velocity_slope(v: f64) -> f64 {
    if v <= -1.0 {
        0.0
    } else if v <= 0.0 {
        let den = 1.0 - v / FV_CURVATURE;
        (1.0 + 1.0 / FV_CURVATURE) / (den * den)
    } else if v < FV_SATURATION {
        2.0 * (FV_ECCENTRIC_MAX - 1.0) * (1.0 - v / FV_SATURATION) / FV_SATURATION
    } else {
        0.0
    }
}

/// Passive elastic force; zero up to the optimal length.
pub fn passive_force(l: f64) -> f64 {
    if l <= 1.0 {
        0.0
    } else {
        let x = (l - 1.0) / FP_WIDTH;
        FP_SCALE * x * x
    }
}

/// `(FL(l), FV(v), FP(l))`.
pub fn flv_curves(l_norm: f64, v_norm: f64) -> (f64, f64, f64) {
    (force_length(l_norm), force_velocity(v_norm), passive_force(l_norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fv_slope_matches_finite_differences() {
        let h = 1e-7;
        for k in 0..400 {
            let v = -0.99 + k as f64 * 0.00617;
            if (v - FV_SATURATION).abs() < 1e-3 {
                continue;
            }
            let fd = (force_velocity(v + h) - force_velocity(v - h)) / (2.0 * h);
            assert!((force_velocity_slope(v) - fd).abs() < 1e-5, "v = {v}");
        }
        assert_eq!(force_velocity_slope(-2.0), 0.0);
        assert_eq!(force_velocity_slope(1.0), 0.0);
    }

    #[test]
    fn anchor_points() {
        assert_eq!(force_length(1.0), 1.0);
        assert_eq!(force_velocity(0.0), 1.0);
        assert_eq!(passive_force(0.9), 0.0);
        assert_eq!(force_velocity(-1.0), 0.0);
        assert_eq!(force_velocity(-3.0), 0.0);
        assert_eq!(force_velocity(10.0), 1.35);
        assert_eq!(force_length(0.5), 0.0);
        assert_eq!(force_length(1.5), 0.0);
        assert_eq!(force_length(0.2), 0.0);
    }

    #[test]
    fn fv_slope_is_continuous_at_rest() {
        let h = 1e-7;
        let left = (force_velocity(0.0) - force_velocity(-h)) / h;
        let right = (force_velocity(h) - force_velocity(0.0)) / h;
        assert!((left - right).abs() < 1e-4, "{left} vs {right}");
    }

    #[test]
    fn fl_is_unimodal() {
        let grid: Vec<f64> = (0..=10_000).map(|k| 0.4 + 1.2 * k as f64 / 10_000.0).collect();
        for w in grid.windows(2) {
            let (a, b) = (force_length(w[0]), force_length(w[1]));
            assert!(a >= 0.0);
            if w[1] <= 1.0 {
                assert!(b >= a);
            } else if w[0] >= 1.0 {
                assert!(b <= a);
            }
        }
    }

    #[test]
    fn fv_and_fp_are_monotone() {
        let mut prev_v = f64::NEG_INFINITY;
        let mut prev_p = f64::NEG_INFINITY;
        for k in 0..=10_000 {
            let x = -2.0 + 4.0 * k as f64 / 10_000.0;
            let v = force_velocity(x);
            let p = passive_force(1.0 + x / 2.0);
            assert!(v >= prev_v && p >= prev_p, "at {x}");
            assert!(v <= FV_ECCENTRIC_MAX);
            prev_v = v;
            prev_p = p;
        }
    }
}
