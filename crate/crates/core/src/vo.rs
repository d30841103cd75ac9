//! Linear velocity-obstacle baseline with a constant-speed candidate set.

use serde::{Deserialize, Serialize};

use crate::apf::ObstacleView;
use crate::error::{Error, Result};
use crate::frames::{wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoParams {
    /// Combined disc radius for vessel targets (L). Static discs add their own radius.
    pub cone_radius: f64,
    /// Spacing between candidate headings (rad).
    pub heading_resolution: f64,
    /// Largest course change searched either side of the goal bearing (rad).
    pub max_course_change: f64,
}

impl Default for VoParams {
    fn default() -> Self {
        Self {
            cone_radius: 2.5,
            heading_resolution: 1f64.to_radians(),
            max_course_change: 90f64.to_radians(),
        }
    }
}

impl VoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cone_radius > 0.0) {
            return Err(Error::invalid("vo.cone_radius", "must be positive"));
        }
        if !(self.heading_resolution > 0.0) {
            return Err(Error::invalid("vo.heading_resolution", "must be positive"));
        }
        if !(self.max_course_change >= 0.0 && self.max_course_change <= std::f64::consts::PI) {
            return Err(Error::invalid("vo.max_course_change", "must lie in [0, pi]"));
        }
        Ok(())
    }
}

/// Set of own-ship velocities that lead to a collision with one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollisionCone {
    /// Relative velocities within `half_angle` of `axis` are forbidden.
    Cone { apex: Vec2, axis: Vec2, half_angle: f64 },
    /// Already inside the combined disc; every velocity counts as violating.
    Everything,
}

impl CollisionCone {
    pub fn forbids(&self, w: Vec2) -> bool {
        match *self {
            CollisionCone::Everything => true,
            CollisionCone::Cone { apex, axis, half_angle } => {
                let rel = w - apex;
                let n = rel.norm();
                if n < 1e-12 {
                    // matching the target velocity keeps the separation constant
                    return false;
                }
                let cos = rel.dot(axis) / (n * axis.norm());
                cos.clamp(-1.0, 1.0).acos() <= half_angle
            }
        }
    }
}

pub fn collision_cone(own_pos: Vec2, target_pos: Vec2, target_vel: Vec2, cone_radius: f64) -> CollisionCone {
    let axis = target_pos - own_pos;
    let sep = axis.norm();
    if sep <= cone_radius {
        return CollisionCone::Everything;
    }
    CollisionCone::Cone {
        apex: target_vel,
        axis,
        half_angle: (cone_radius / sep).asin(),
    }
}

/// Heading closest to the goal bearing whose constant-speed velocity lies
/// outside every cone; falls back to the fewest violated cones.
///
/// `targets` must already be filtered to those inside the detection radius.
pub fn vo_desired_heading(own_pos: Vec2, speed: f64, goal: Vec2, targets: &[ObstacleView], p: &VoParams) -> f64 {
    let bearing = (goal - own_pos).angle();
    if targets.is_empty() {
        return bearing;
    }
    let cones: Vec<CollisionCone> = targets
        .iter()
        .map(|t| collision_cone(own_pos, t.position, t.velocity, p.cone_radius + t.radius))
        .collect();

    let steps = (p.max_course_change / p.heading_resolution + 1e-9).floor() as i64;
    let mut best = (usize::MAX, bearing);
    for i in 0..=steps {
        // starboard (positive) first so exact ties resolve to starboard
        let offsets: &[f64] = if i == 0 { &[0.0] } else { &[1.0, -1.0] };
        for &sign in offsets {
            let psi = wrap_angle(bearing + sign * i as f64 * p.heading_resolution);
            let w = Vec2::from_angle(psi) * speed;
            let violated = cones.iter().filter(|c| c.forbids(w)).count();
            if violated == 0 {
                return psi;
            }
            if violated < best.0 {
                best = (violated, psi);
            }
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apf::StaticObstacle;

    fn vessel(x: f64, y: f64, vx: f64, vy: f64) -> ObstacleView {
        ObstacleView {
            position: Vec2::new(x, y),
            velocity: Vec2::new(vx, vy),
            is_dynamic: true,
            radius: 0.0,
        }
    }

    #[test]
    fn cone_cases() {
        let c = collision_cone(Vec2::ZERO, Vec2::new(10.0, 0.0), Vec2::ZERO, 2.0);
        assert!(c.forbids(Vec2::new(1.0, 0.0)));
        assert!(!c.forbids(Vec2::new(0.0, 1.0)));
        let CollisionCone::Cone { half_angle, .. } = c else { panic!() };
        assert!((half_angle.to_degrees() - 11.536959032815489).abs() < 1e-9);
        assert_eq!(collision_cone(Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::ZERO, 2.0), CollisionCone::Everything);
    }

    #[test]
    fn unconstrained_returns_goal_bearing() {
        let goal = Vec2::new(30.0, 40.0);
        let psi = vo_desired_heading(Vec2::ZERO, 1.0, goal, &[], &VoParams::default());
        assert_eq!(psi, goal.angle());
    }

    #[test]
    fn head_on_clears_cone_within_one_step() {
        let p = VoParams::default();
        let target = vessel(10.0, 0.0, -1.0, 0.0);
        let psi = vo_desired_heading(Vec2::ZERO, 1.0, Vec2::new(50.0, 0.0), &[target], &p);
        // relative velocity (cos psi + 1, sin psi) sits at psi / 2 from the axis
        let half = (2.5f64 / 10.0).asin();
        let needed = 2.0 * half;
        assert!(psi > 0.0, "starboard preferred on a symmetric tie");
        assert!(psi >= needed - 1e-9 && psi <= needed + p.heading_resolution, "psi = {psi}, needed = {needed}");
    }

    #[test]
    fn static_target_result_is_strictly_outside() {
        let p = VoParams::default();
        let obs = ObstacleView::fixed(&StaticObstacle {
            center: Vec2::new(8.0, 1.0),
            radius: 0.5,
        });
        let psi = vo_desired_heading(Vec2::ZERO, 0.8, Vec2::new(40.0, 3.0), &[obs], &p);
        let cone = collision_cone(Vec2::ZERO, obs.position, obs.velocity, p.cone_radius + obs.radius);
        assert!(!cone.forbids(Vec2::from_angle(psi) * 0.8));
        let bearing = Vec2::new(40.0, 3.0).angle();
        assert!(wrap_angle(psi - bearing).abs() <= p.max_course_change + 1e-12);
    }

    #[test]
    fn infeasible_scene_minimises_violations() {
        let p = VoParams::default();
        let inside = vessel(1.0, 0.0, 0.0, 0.0);
        let ahead = vessel(10.0, 0.0, 0.0, 0.0);
        let psi = vo_desired_heading(Vec2::ZERO, 1.0, Vec2::new(50.0, 0.0), &[inside, ahead], &p);
        let half = (2.5f64 / 10.0).asin();
        assert!(psi > half && psi <= half + p.heading_resolution);
    }
}
