//! Decoupled kinematic vehicle with first-order actuator lag.

use serde::{Deserialize, Serialize};

use super::tank::TankGeometry;
use crate::control::wrap_degrees;
use crate::error::{FelmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleLimits {
    /// m/s at surge command 1.
    pub max_surge: f64,
    /// deg/s at yaw command 1.
    pub max_yaw_rate: f64,
    /// m/s at heave command 1, positive down.
    pub max_heave: f64,
    /// Actuator time constant in seconds.
    pub tau: f64,
    /// Hull clearance kept from every wall.
    pub radius: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        Self { max_surge: 0.05, max_yaw_rate: 10.0, max_heave: 0.1, tau: 0.5, radius: 0.2 }
    }
}

impl VehicleLimits {
    pub fn validate(&self, tank: &TankGeometry) -> Result<()> {
        let v = [self.max_surge, self.max_yaw_rate, self.max_heave, self.tau, self.radius];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(FelmError::NonFinite("vehicle limits"));
        }
        if v.iter().any(|&x| x <= 0.0) {
            return Err(FelmError::InvalidConfig("vehicle limits must be positive".into()));
        }
        if 2.0 * self.radius >= tank.width.min(tank.length) {
            return Err(FelmError::InvalidConfig("vehicle does not fit in the tank".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    /// Degrees in `[0, 360)`.
    pub heading: f64,
    pub surge: f64,
    pub yaw_rate: f64,
    pub heave: f64,
    pub t: f64,
}

/// Normalised commands in `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Commands {
    pub yaw: f64,
    pub surge: f64,
    pub heave: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: VehicleState,
    pub collision: bool,
}

/// Advances one sample. Out-of-range commands saturate; leaving the tank
/// footprint clamps the position and reports a collision.
pub fn step_vehicle(state: &VehicleState, cmd: &Commands, dt: f64, limits: &VehicleLimits, tank: &TankGeometry) -> Result<StepOutcome> {
    if ![cmd.yaw, cmd.surge, cmd.heave, dt].iter().all(|v| v.is_finite()) {
        return Err(FelmError::NonFinite("vehicle command"));
    }
    if dt <= 0.0 {
        return Err(FelmError::InvalidConfig(format!("time step {dt} must be positive")));
    }
    let alpha = 1.0 - (-dt / limits.tau).exp();
    let lag = |rate: f64, target: f64| rate + alpha * (target - rate);
    let mut s = *state;
    s.surge = lag(s.surge, cmd.surge.clamp(-1.0, 1.0) * limits.max_surge);
    s.yaw_rate = lag(s.yaw_rate, cmd.yaw.clamp(-1.0, 1.0) * limits.max_yaw_rate);
    s.heave = lag(s.heave, cmd.heave.clamp(-1.0, 1.0) * limits.max_heave);

    s.heading = wrap_degrees(s.heading + s.yaw_rate * dt);
    let (sin, cos) = s.heading.to_radians().sin_cos();
    s.x += s.surge * cos * dt;
    s.y += s.surge * sin * dt;
    s.depth = (s.depth + s.heave * dt).clamp(0.0, tank.depth);
    s.t = state.t + dt;

    let r = limits.radius;
    let (cx, cy) = (s.x.clamp(r, tank.width - r), s.y.clamp(r, tank.length - r));
    let collision = cx != s.x || cy != s.y;
    s.x = cx;
    s.y = cy;
    Ok(StepOutcome { state: s, collision })
}
