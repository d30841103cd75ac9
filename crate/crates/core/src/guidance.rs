//! Integral line-of-sight waypoint guidance and the PD heading controller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{wrap_angle, Vec2};
use crate::mmg::ActuatorLimits;

/// Ordered waypoints with the index of the segment currently tracked.
///
/// Segment `k` runs from `points[k]` to `points[k + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointPath {
    points: Vec<Vec2>,
    active: usize,
}

impl WaypointPath {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("waypoints", "at least two waypoints are required"));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::NonFinite(format!("waypoint {i}")));
            }
            if w[0].distance(w[1]) < 1e-9 {
                return Err(Error::Degenerate(format!("waypoints {i} and {} coincide", i + 1)));
            }
        }
        Ok(Self { points, active: 0 })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    /// Start and end of the active segment.
    pub fn segment(&self) -> (Vec2, Vec2) {
        (self.points[self.active], self.points[self.active + 1])
    }

    /// Waypoint currently being approached.
    pub fn target(&self) -> Vec2 {
        self.points[self.active + 1]
    }

    pub fn final_waypoint(&self) -> Vec2 {
        *self.points.last().expect("non-empty path")
    }

    pub fn on_final_segment(&self) -> bool {
        self.active + 2 == self.points.len()
    }

    /// Moves to the next segment. Returns false when already on the last one.
    pub fn advance(&mut self) -> bool {
        if self.on_final_segment() {
            false
        } else {
            self.active += 1;
            true
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IlosParams {
    /// Look-ahead distance (L).
    pub delta: f64,
    /// Integral scaling `k`; the integral gain is `k / delta`.
    pub k_factor: f64,
    /// Waypoint acceptance radius (L).
    pub r_tol: f64,
}

impl Default for IlosParams {
    fn default() -> Self {
        Self {
            delta: 2.0,
            k_factor: 0.05,
            r_tol: 3.0,
        }
    }
}

impl IlosParams {
    pub fn kp(&self) -> f64 {
        1.0 / self.delta
    }

    pub fn ki(&self) -> f64 {
        self.k_factor * self.kp()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::invalid("ilos.delta", "must be positive"));
        }
        if !(self.r_tol > 0.0) {
            return Err(Error::invalid("ilos.r_tol", "must be positive"));
        }
        if !self.k_factor.is_finite() {
            return Err(Error::invalid("ilos.k_factor", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IlosState {
    pub y_int: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
}

impl Default for PdGains {
    fn default() -> Self {
        Self { kp: 3.5, kd: 4.0 }
    }
}

impl PdGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.kp > 0.0) || !(self.kd > 0.0) {
            return Err(Error::invalid("pd", "gains must be positive"));
        }
        Ok(())
    }
}

/// Angle of the segment from `wp_k` to `wp_k1` measured from the global x-axis.
pub fn path_tangential_angle(wp_k: Vec2, wp_k1: Vec2) -> Result<f64> {
    let d = wp_k1 - wp_k;
    if d.norm() < 1e-12 {
        return Err(Error::Degenerate("coincident waypoints".into()));
    }
    Ok(d.angle())
}

/// Along-track and cross-track components of `pos - wp_k` in the path frame.
pub fn track_errors(pos: Vec2, wp_k: Vec2, wp_k1: Vec2) -> (f64, f64) {
    let pi_p = (wp_k1 - wp_k).angle();
    let r = (pos - wp_k).rotate(-pi_p);
    (r.x, r.y)
}

pub fn ilos_desired_heading(pi_p: f64, y_e: f64, y_int: f64, p: &IlosParams) -> f64 {
    wrap_angle(pi_p - (p.kp() * y_e + p.ki() * y_int).atan())
}

pub fn ilos_integrator_derivative(y_e: f64, y_int: f64, p: &IlosParams) -> f64 {
    let denom = p.delta * p.delta + (y_e + p.k_factor * y_int).powi(2);
    p.delta * y_e / denom
}

pub fn should_switch_waypoint(pos: Vec2, wp_k1: Vec2, r_tol: f64) -> bool {
    pos.distance(wp_k1) <= r_tol
}

/// PD rudder command, saturated at the actuator limit.
pub fn pd_rudder_command(psi: f64, psi_d: f64, r: f64, gains: &PdGains, limits: &ActuatorLimits) -> f64 {
    let e = wrap_angle(psi - psi_d);
    (-gains.kp * e - gains.kd * r).clamp(-limits.delta_max, limits.delta_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn limits() -> ActuatorLimits {
        ActuatorLimits {
            delta_max: 35f64.to_radians(),
            delta_rate_max: 1.0,
            t_delta: 1.0,
        }
    }

    #[test]
    fn tangential_angle_cases() {
        let o = Vec2::ZERO;
        assert_eq!(path_tangential_angle(o, Vec2::new(10.0, 0.0)).unwrap(), 0.0);
        assert!((path_tangential_angle(o, Vec2::new(10.0, 10.0)).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((path_tangential_angle(o, Vec2::new(0.0, -5.0)).unwrap() + PI / 2.0).abs() < 1e-15);
        assert!(path_tangential_angle(o, o).is_err());
    }

    #[test]
    fn track_error_cases() {
        let a = Vec2::ZERO;
        let b = Vec2::new(10.0, 0.0);
        assert_eq!(track_errors(Vec2::new(5.0, 0.0), a, b), (5.0, 0.0));
        assert_eq!(track_errors(Vec2::new(5.0, 2.0), a, b), (5.0, 2.0));

        // projection onto the line through (0,0) and (2,2)
        let pos = Vec2::new(0.0, 2.0);
        let b = Vec2::new(2.0, 2.0);
        let dir = b * (1.0 / b.norm());
        let along = pos.dot(dir);
        let foot = dir * along;
        let cross_mag = (pos - foot).norm();
        let (xe, ye) = track_errors(pos, a, b);
        assert!((xe - along).abs() < 1e-12);
        assert!((ye.abs() - cross_mag).abs() < 1e-12);
        // starboard of the path direction is positive cross-track
        assert!(ye > 0.0);
    }

    #[test]
    fn ilos_heading_cases() {
        let p = IlosParams::default();
        assert_eq!(ilos_desired_heading(0.3, 0.0, 0.0, &p), 0.3);
        assert!((ilos_desired_heading(0.3, 2.0, 0.0, &p) - (0.3 - PI / 4.0)).abs() < 1e-15);
        let far = ilos_desired_heading(0.0, 1e6, 0.0, &p);
        assert!(far > -PI / 2.0 && far < -PI / 2.0 + 1e-5);
        assert!((p.ki() - 0.025).abs() < 1e-15);
        assert_eq!(p.kp(), 0.5);
    }

    #[test]
    fn ilos_integrator_cases() {
        let p = IlosParams::default();
        assert_eq!(ilos_integrator_derivative(0.0, 3.0, &p), 0.0);
        assert!((ilos_integrator_derivative(2.0, 0.0, &p) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn switching_radius_is_inclusive() {
        let wp = Vec2::new(10.0, 0.0);
        assert!(should_switch_waypoint(Vec2::new(7.1, 0.0), wp, 3.0));
        assert!(should_switch_waypoint(Vec2::new(7.0, 0.0), wp, 3.0));
        assert!(!should_switch_waypoint(Vec2::new(6.9, 0.0), wp, 3.0));
    }

    #[test]
    fn pd_cases() {
        let g = PdGains::default();
        let l = limits();
        assert_eq!(pd_rudder_command(0.0, 0.0, 0.0, &g, &l), 0.0);
        assert!((pd_rudder_command(0.1, 0.0, 0.0, &g, &l) + 0.35).abs() < 1e-15);
        assert_eq!(pd_rudder_command(-PI / 2.0, 0.0, 0.0, &g, &l), l.delta_max);
    }

    #[test]
    fn heading_error_wraps_across_pi() {
        let e = wrap_angle(179f64.to_radians() - (-179f64).to_radians());
        assert!((e + 2f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn path_advances_until_final_segment() {
        let mut p = WaypointPath::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)]).unwrap();
        assert!(!p.on_final_segment());
        assert!(p.advance());
        assert!(p.on_final_segment());
        assert!(!p.advance());
        assert_eq!(p.target(), Vec2::new(1.0, 1.0));
        assert!(WaypointPath::new(vec![Vec2::ZERO]).is_err());
        assert!(WaypointPath::new(vec![Vec2::ZERO, Vec2::ZERO]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn integrator_rate_is_bounded(y_e in -50.0f64..50.0, y_int in -200.0f64..200.0) {
                let p = IlosParams::default();
                let d = ilos_integrator_derivative(y_e, y_int, &p);
                prop_assert!(d.abs() <= p.delta * y_e.abs() / (p.delta * p.delta) + 1e-15);
            }

            #[test]
            fn heading_error_is_shortest_arc(psi in -PI..PI, psi_d in -PI..PI) {
                let e = wrap_angle(psi - psi_d);
                prop_assert!(e.abs() <= PI);
                let direct = psi - psi_d;
                let k = ((direct - e) / (2.0 * PI)).round();
                prop_assert!((direct - e - 2.0 * PI * k).abs() < 1e-9);
            }
        }
    }
}
