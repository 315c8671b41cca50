use crate::error::{Error, Result};

// Guards floor/ceil against representation error in t / c (e.g. 0.6 / 0.3).
const SEGMENT_EPS: f64 = 1e-9;

/// Zero-order-hold layout of a decision vector: `n_segments` blocks of
/// `n_actuators` values, block `k` held over `[k c, (k + 1) c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParameterization {
    pub horizon: f64,
    pub resolution: f64,
    pub n_actuators: usize,
    pub bounds: (f64, f64),
}

impl ControlParameterization {
    pub fn new(horizon: f64, resolution: f64, n_actuators: usize, bounds: (f64, f64)) -> Result<Self> {
        if !(resolution > 0.0) || !(horizon >= resolution - SEGMENT_EPS) {
            return Err(Error::InvalidParameter(format!("need c > 0 and T >= c, got c = {resolution}, T = {horizon}")));
        }
        if n_actuators == 0 || !(bounds.1 > bounds.0) {
            return Err(Error::InvalidParameter("empty actuator set or bounds".into()));
        }
        Ok(Self { horizon, resolution, n_actuators, bounds })
    }

    pub fn n_segments(&self) -> usize {
        ((self.horizon / self.resolution) - SEGMENT_EPS).ceil().max(1.0) as usize
    }

    /// Decision-vector length `n_actuators * ceil(T / c)`.
    pub fn dim(&self) -> usize {
        self.n_actuators * self.n_segments()
    }

    pub fn segment_at(&self, t: f64) -> usize {
        (((t / self.resolution) + SEGMENT_EPS).floor().max(0.0) as usize).min(self.n_segments() - 1)
    }

    /// Midpoint of the bounds, repeated over the whole vector.
    pub fn midpoint(&self) -> Vec<f64> {
        vec![0.5 * (self.bounds.0 + self.bounds.1); self.dim()]
    }

    /// Controls held at time `t`, clamped to the family bounds.
    pub fn decode(&self, theta: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_actuators];
        self.decode_into(theta, t, &mut out)?;
        Ok(out)
    }

    pub fn decode_into(&self, theta: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        if out.len() != self.n_actuators {
            return Err(Error::DimensionMismatch { expected: self.n_actuators, got: out.len() });
        }
        if !(t >= 0.0) || t >= self.horizon + SEGMENT_EPS {
            return Err(Error::InvalidParameter(format!("t = {t} outside [0, {})", self.horizon)));
        }
        let k = self.segment_at(t);
        let block = &theta[k * self.n_actuators..(k + 1) * self.n_actuators];
        for (o, v) in out.iter_mut().zip(block) {
            *o = v.clamp(self.bounds.0, self.bounds.1);
        }
        Ok(())
    }
}
