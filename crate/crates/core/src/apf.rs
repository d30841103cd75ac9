//! Reactive guidance from artificial potential fields.
//!
//! Three laws are provided: the classic quadratic-attractive / inverse-square
//! repulsive field, a sink at the goal with a constant-strength vortex at each
//! obstacle, and the same sink with a vortex whose strength is gated and scaled
//! by encounter geometry (relative bearing and relative velocity). Channel
//! boundaries act as line sources for the harmonic laws.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{wrap_angle, Pose, Vec2};
use crate::mmg::DynamicState;

/// Circular static obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticObstacle {
    pub center: Vec2,
    pub radius: f64,
}

/// What one vessel knows about an obstacle at the current instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleView {
    pub position: Vec2,
    /// Global-frame velocity; zero for static obstacles.
    pub velocity: Vec2,
    pub is_dynamic: bool,
    /// Disc radius used by the inverse-square clearance; zero for vessels.
    pub radius: f64,
}

impl ObstacleView {
    pub fn fixed(obs: &StaticObstacle) -> Self {
        Self {
            position: obs.center,
            velocity: Vec2::ZERO,
            is_dynamic: false,
            radius: obs.radius,
        }
    }

    pub fn vessel(state: &DynamicState) -> Self {
        Self {
            position: state.pose.position(),
            velocity: state.nu.global_linear(state.pose.psi),
            is_dynamic: true,
            radius: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSquareParams {
    pub k_att: f64,
    pub k_rep: f64,
    /// Influence distance on clearance (L).
    pub d0: f64,
}

impl Default for InverseSquareParams {
    fn default() -> Self {
        Self {
            k_att: 50.0,
            k_rep: 200_000.0,
            d0: 15.0,
        }
    }
}

impl InverseSquareParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_att > 0.0) {
            return Err(Error::invalid("inverse_square.k_att", "must be positive"));
        }
        if !(self.k_rep > 0.0) {
            return Err(Error::invalid("inverse_square.k_rep", "must be positive"));
        }
        if !(self.d0 > 0.0) {
            return Err(Error::invalid("inverse_square.d0", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicParams {
    /// Sink strength at the goal (negative).
    pub lambda_sink: f64,
    /// Nominal vortex strength at each obstacle.
    pub k_vor0: f64,
    /// Collision radius in the vortex gate (L).
    pub r_tol_vortex: f64,
}

impl Default for HarmonicParams {
    fn default() -> Self {
        Self {
            lambda_sink: -100.0,
            k_vor0: -10.0,
            r_tol_vortex: 3.0,
        }
    }
}

impl HarmonicParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_sink < 0.0) {
            return Err(Error::invalid("harmonic.lambda_sink", "must be negative (sink)"));
        }
        if !(self.r_tol_vortex > 0.0) {
            return Err(Error::invalid("harmonic.r_tol_vortex", "must be positive"));
        }
        if !self.k_vor0.is_finite() {
            return Err(Error::invalid("harmonic.k_vor0", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

/// Pair of channel walls modelled as line sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelBoundary {
    pub walls: [Segment; 2],
    #[serde(default = "default_activation")]
    pub activation: f64,
    #[serde(default = "default_lambda_src")]
    pub lambda_src: f64,
}

fn default_activation() -> f64 {
    2.0
}

fn default_lambda_src() -> f64 {
    10.0
}

impl ChannelBoundary {
    pub fn new(walls: [Segment; 2]) -> Self {
        Self {
            walls,
            activation: default_activation(),
            lambda_src: default_lambda_src(),
        }
    }

    /// Straight channel of `width` centred on the line from `a` to `b`.
    pub fn straight(a: Vec2, b: Vec2, width: f64) -> Self {
        let dir = (b - a) * (1.0 / (b - a).norm());
        let normal = Vec2::new(-dir.y, dir.x) * (0.5 * width);
        let ext = dir * 1000.0;
        Self::new([
            Segment {
                a: a + normal - ext,
                b: b + normal + ext,
            },
            Segment {
                a: a - normal - ext,
                b: b - normal + ext,
            },
        ])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.activation > 0.0) {
            return Err(Error::invalid("channel.activation", "must be positive"));
        }
        if !(self.lambda_src > 0.0) {
            return Err(Error::invalid("channel.lambda_src", "must be positive"));
        }
        for w in &self.walls {
            if (w.b - w.a).norm() < 1e-9 {
                return Err(Error::invalid("channel.walls", "wall segment has zero length"));
            }
        }
        Ok(())
    }

    /// Signed distance to wall `i`, positive on the channel side.
    pub fn signed_distance(&self, i: usize, pos: Vec2) -> f64 {
        let (dist, _) = self.wall_frame(i, pos);
        dist
    }

    /// Signed distance and unit inward normal for wall `i`.
    fn wall_frame(&self, i: usize, pos: Vec2) -> (f64, Vec2) {
        let w = &self.walls[i];
        let other = &self.walls[1 - i];
        let d = w.b - w.a;
        let len = d.norm();
        let mut n = Vec2::new(-d.y / len, d.x / len);
        let mid_other = (other.a + other.b) * 0.5;
        if (mid_other - w.a).dot(n) < 0.0 {
            n = -n;
        }
        ((pos - w.a).dot(n), n)
    }

    pub fn contains(&self, pos: Vec2) -> bool {
        (0..2).all(|i| self.signed_distance(i, pos) > 0.0)
    }
}

/// Distance from `pos` to the obstacle surface.
pub fn obstacle_clearance(pos: Vec2, obs: &StaticObstacle) -> Result<f64> {
    let rho = pos.distance(obs.center) - obs.radius;
    if rho > 0.0 {
        Ok(rho)
    } else {
        Err(Error::InsideObstacle { clearance: rho })
    }
}

/// Negative gradient of the quadratic-attractive / inverse-square field.
pub fn inverse_square_gradient(
    pos: Vec2,
    goal: Vec2,
    obstacles: &[ObstacleView],
    p: &InverseSquareParams,
) -> Result<Vec2> {
    let mut g = (pos - goal) * (-p.k_att);
    for o in obstacles {
        let center_dist = pos.distance(o.position);
        let rho = center_dist - o.radius;
        if rho <= 0.0 {
            return Err(Error::InsideObstacle { clearance: rho });
        }
        if rho > p.d0 {
            continue;
        }
        let scale = 2.0 * p.k_rep * (1.0 / rho - 1.0 / p.d0) / (rho * rho * center_dist);
        g = g + (pos - o.position) * scale;
    }
    if g.norm() < 1e-12 {
        return Err(Error::Stagnation);
    }
    Ok(g)
}

/// Flow velocity of a point sink (`lambda < 0`) or source at `goal`.
pub fn sink_velocity(pos: Vec2, goal: Vec2, lambda: f64) -> Result<Vec2> {
    let d = pos - goal;
    let r2 = d.norm_sq();
    if r2 < 1e-24 {
        return Err(Error::Degenerate("position coincides with sink".into()));
    }
    Ok(d * (lambda / (2.0 * PI * r2)))
}

/// Flow velocity of a point vortex of strength `k` at `center`.
pub fn vortex_velocity(pos: Vec2, center: Vec2, k: f64) -> Result<Vec2> {
    let d = pos - center;
    let r2 = d.norm_sq();
    if r2 < 1e-24 {
        return Err(Error::Degenerate("position coincides with vortex centre".into()));
    }
    Ok(Vec2::new(-d.y, d.x) * (k / (2.0 * PI * r2)))
}

/// Velocity potential of a point sink or source; `sink_velocity` is its gradient.
pub fn sink_potential(pos: Vec2, goal: Vec2, lambda: f64) -> Result<f64> {
    let r = pos.distance(goal);
    if r < 1e-12 {
        return Err(Error::Degenerate("position coincides with sink".into()));
    }
    Ok(lambda / (2.0 * PI) * r.ln())
}

/// Velocity potential of a point vortex, branch cut along the -x ray from the
/// centre; `vortex_velocity` is its gradient.
pub fn vortex_potential(pos: Vec2, center: Vec2, k: f64) -> Result<f64> {
    let d = pos - center;
    if d.norm_sq() < 1e-24 {
        return Err(Error::Degenerate("position coincides with vortex centre".into()));
    }
    Ok(k / (2.0 * PI) * d.angle())
}

/// Relative bearing of `obs_pos` from the bow, wrapped to (-pi, pi].
pub fn bearing_gamma(own: &Pose, obs_pos: Vec2) -> Result<f64> {
    let d = obs_pos - own.position();
    if d.norm() < 1e-12 {
        return Err(Error::Degenerate("obstacle coincides with own ship".into()));
    }
    Ok(wrap_angle(d.angle() - own.psi))
}

/// Velocity of the obstacle relative to own ship, global frame.
pub fn relative_velocity(own: &DynamicState, obs: &ObstacleView) -> Vec2 {
    let own_vel = own.nu.global_linear(own.pose.psi);
    if obs.is_dynamic {
        obs.velocity - own_vel
    } else {
        -own_vel
    }
}

/// Radial and tangential components of `v_rel` along the line of sight at
/// relative bearing `gamma`. Negative radial means closing.
pub fn radial_tangential(v_rel: Vec2, gamma: f64, own_psi: f64) -> (f64, f64) {
    let body = v_rel.rotate(-own_psi);
    let (s, c) = gamma.sin_cos();
    (c * body.x + s * body.y, -s * body.x + c * body.y)
}

/// Scale-up of the vortex with proximity and closing speed; never below 1.
pub fn vortex_scale_factor(separation: f64, v_r: f64, r_safe: f64) -> f64 {
    (2.0 - separation / r_safe - v_r).max(1.0)
}

/// Gated vortex strength for one obstacle.
///
/// Zero when the obstacle is already passing clear tangentially or lies more
/// than 5pi/8 off the bow (the own ship is being overtaken and stands on).
pub fn modified_vortex_strength(own: &DynamicState, obs: &ObstacleView, p: &HarmonicParams, r_safe: f64) -> f64 {
    let separation = own.pose.position().distance(obs.position);
    let Ok(gamma) = bearing_gamma(&own.pose, obs.position) else {
        return 0.0;
    };
    if gamma.abs() > 5.0 * PI / 8.0 {
        return 0.0;
    }
    let (v_r, v_theta) = radial_tangential(relative_velocity(own, obs), gamma, own.pose.psi);
    let threshold = -2.0 * p.r_tol_vortex / separation * v_r;
    if v_theta > threshold {
        return 0.0;
    }
    vortex_scale_factor(separation, v_r, r_safe) * p.k_vor0
}

/// Line-source repulsion from the channel walls.
pub fn boundary_source_velocity(pos: Vec2, ch: &ChannelBoundary) -> Result<Vec2> {
    if !ch.contains(pos) {
        return Err(Error::OutsideChannel);
    }
    let mut v = Vec2::ZERO;
    for i in 0..2 {
        let (dist, n) = ch.wall_frame(i, pos);
        if dist <= ch.activation {
            v = v + n * (ch.lambda_src / (2.0 * PI * dist));
        }
    }
    Ok(v)
}

/// Which vortex law the harmonic field uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VortexLaw {
    /// Constant strength `k_vor0` for every obstacle in range.
    Constant,
    /// Gated and scaled strength.
    Modified,
}

/// Heading from the harmonic field plus the vortex strengths that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeading {
    pub psi_d: f64,
    /// Largest |K| applied to any obstacle this call.
    pub max_vortex: f64,
    /// False when the field vanished and `psi_d` is the held value.
    pub fresh: bool,
}

/// Desired heading from sink + vortices + channel sources.
///
/// `obstacles` must already be filtered to those inside the detection radius.
#[allow(clippy::too_many_arguments)]
pub fn desired_heading_harmonic(
    own: &DynamicState,
    goal: Vec2,
    obstacles: &[ObstacleView],
    boundary: Option<&ChannelBoundary>,
    p: &HarmonicParams,
    r_safe: f64,
    law: VortexLaw,
    previous: f64,
) -> FieldHeading {
    let pos = own.pose.position();
    let mut v = sink_velocity(pos, goal, p.lambda_sink).unwrap_or(Vec2::ZERO);
    let mut max_vortex: f64 = 0.0;
    for o in obstacles {
        let k = match law {
            VortexLaw::Constant => p.k_vor0,
            VortexLaw::Modified => modified_vortex_strength(own, o, p, r_safe),
        };
        if k != 0.0 {
            if let Ok(w) = vortex_velocity(pos, o.position, k) {
                v = v + w;
                max_vortex = max_vortex.max(k.abs());
            }
        }
    }
    if let Some(ch) = boundary {
        match boundary_source_velocity(pos, ch) {
            Ok(b) => v = v + b,
            Err(_) => {
                // outside a wall: push straight back in at the strength of a 0.1 L stand-off
                for i in 0..2 {
                    let (dist, n) = ch.wall_frame(i, pos);
                    if dist <= 0.0 {
                        v = v + n * (ch.lambda_src / (2.0 * PI * 0.1));
                    }
                }
            }
        }
    }
    if v.norm() < 1e-12 {
        FieldHeading {
            psi_d: previous,
            max_vortex,
            fresh: false,
        }
    } else {
        FieldHeading {
            psi_d: v.angle(),
            max_vortex,
            fresh: true,
        }
    }
}

/// Desired heading along the inverse-square field; holds `previous` at a
/// stagnation point or when inside an obstacle.
pub fn desired_heading_inverse_square(
    pos: Vec2,
    goal: Vec2,
    obstacles: &[ObstacleView],
    p: &InverseSquareParams,
    previous: f64,
) -> f64 {
    match inverse_square_gradient(pos, goal, obstacles, p) {
        Ok(g) => g.angle(),
        Err(_) => previous,
    }
}

/// True when any obstacle centre lies within `r_safe`.
pub fn reactive_active(own_pos: Vec2, obstacles: &[ObstacleView], r_safe: f64) -> bool {
    obstacles.iter().any(|o| own_pos.distance(o.position) <= r_safe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::BodyVelocity;

    fn own(x: f64, y: f64, psi: f64, u: f64) -> DynamicState {
        DynamicState {
            pose: Pose::new(x, y, psi),
            nu: BodyVelocity::new(u, 0.0, 0.0),
            delta: 0.0,
            n_prop: 0.0,
        }
    }

    fn fixed(x: f64, y: f64) -> ObstacleView {
        ObstacleView::fixed(&StaticObstacle {
            center: Vec2::new(x, y),
            radius: 0.5,
        })
    }

    #[test]
    fn clearance_cases() {
        let o = StaticObstacle {
            center: Vec2::new(3.0, 4.0),
            radius: 1.0,
        };
        assert_eq!(obstacle_clearance(Vec2::ZERO, &o).unwrap(), 4.0);
        assert!(obstacle_clearance(Vec2::new(3.0, 3.0), &o).is_err());
    }

    #[test]
    fn inverse_square_stagnates_at_goal_without_obstacles() {
        let p = InverseSquareParams::default();
        let g = Vec2::new(5.0, 5.0);
        assert!(matches!(inverse_square_gradient(g, g, &[], &p), Err(Error::Stagnation)));
    }

    #[test]
    fn inverse_square_ignores_distant_obstacles() {
        let p = InverseSquareParams::default();
        let pos = Vec2::ZERO;
        let goal = Vec2::new(50.0, 0.0);
        let g = inverse_square_gradient(pos, goal, &[fixed(0.0, 20.0)], &p).unwrap();
        assert_eq!(g, Vec2::new(50.0 * 50.0, 0.0));
    }

    #[test]
    fn sink_cases() {
        let v = sink_velocity(Vec2::new(0.0, 5.0), Vec2::ZERO, -100.0).unwrap();
        assert!((v.norm() - 100.0 / (10.0 * PI)).abs() < 1e-12);
        assert!(v.y < 0.0 && v.x == 0.0);
        let v = sink_velocity(Vec2::ZERO, Vec2::new(1.0, 0.0), -1.0).unwrap();
        assert!(v.x > 0.0 && v.y == 0.0);
        let near = sink_velocity(Vec2::new(3.0, 0.0), Vec2::ZERO, -7.0).unwrap().norm();
        let far = sink_velocity(Vec2::new(6.0, 0.0), Vec2::ZERO, -7.0).unwrap().norm();
        assert!((near / far - 2.0).abs() < 1e-12);
        assert!(sink_velocity(Vec2::ZERO, Vec2::ZERO, -1.0).is_err());
    }

    #[test]
    fn vortex_cases() {
        let v = vortex_velocity(Vec2::new(5.0, 0.0), Vec2::ZERO, -10.0).unwrap();
        assert!((v.norm() - 1.0 / PI).abs() < 1e-12);
        let d = Vec2::new(3.0, -2.0);
        let v = vortex_velocity(d, Vec2::ZERO, 4.0).unwrap();
        assert!(v.dot(d).abs() < 1e-15);
        // head-on approacher from -x is pushed to starboard (+y)
        let v = vortex_velocity(Vec2::new(-10.0, 0.0), Vec2::ZERO, -10.0).unwrap();
        assert!(v.y > 0.0 && v.x.abs() < 1e-15);
        assert!(vortex_velocity(Vec2::ZERO, Vec2::ZERO, 1.0).is_err());
    }

    #[test]
    fn potentials_have_the_velocities_as_gradient() {
        let h = 1e-6;
        let c = Vec2::new(1.0, -2.0);
        for pos in [Vec2::new(4.0, 1.0), Vec2::new(-3.0, 5.0), Vec2::new(2.0, -9.0)] {
            let fd = |f: &dyn Fn(Vec2) -> f64| {
                Vec2::new(
                    (f(pos + Vec2::new(h, 0.0)) - f(pos - Vec2::new(h, 0.0))) / (2.0 * h),
                    (f(pos + Vec2::new(0.0, h)) - f(pos - Vec2::new(0.0, h))) / (2.0 * h),
                )
            };
            let g = fd(&|p| sink_potential(p, c, -100.0).unwrap());
            assert!((g - sink_velocity(pos, c, -100.0).unwrap()).norm() < 1e-6);
            let g = fd(&|p| vortex_potential(p, c, -10.0).unwrap());
            assert!((g - vortex_velocity(pos, c, -10.0).unwrap()).norm() < 1e-7);
        }
        assert!(sink_potential(c, c, 1.0).is_err());
        assert!(vortex_potential(c, c, 1.0).is_err());
    }

    #[test]
    fn gamma_cases() {
        assert!((bearing_gamma(&Pose::new(0.0, 0.0, 0.0), Vec2::new(1.0, 1.0)).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(bearing_gamma(&Pose::new(0.0, 0.0, PI / 4.0), Vec2::new(1.0, 1.0)).unwrap().abs() < 1e-15);
        assert_eq!(bearing_gamma(&Pose::new(0.0, 0.0, 0.0), Vec2::new(-1.0, 0.0)).unwrap(), PI);
        assert!(bearing_gamma(&Pose::default(), Vec2::ZERO).is_err());
    }

    #[test]
    fn relative_velocity_cases() {
        let me = own(0.0, 0.0, 0.0, 1.0);
        assert_eq!(relative_velocity(&me, &fixed(5.0, 0.0)), Vec2::new(-1.0, 0.0));
        let twin = ObstacleView::vessel(&own(5.0, 3.0, 0.0, 1.0));
        assert_eq!(relative_velocity(&me, &twin), Vec2::ZERO);
        let oncoming = ObstacleView::vessel(&own(50.0, 0.0, PI, 1.0));
        let rel = relative_velocity(&me, &oncoming);
        assert!((rel.x + 2.0).abs() < 1e-15 && rel.y.abs() < 1e-15);
    }

    #[test]
    fn radial_tangential_cases() {
        let (vr, vt) = radial_tangential(Vec2::new(-2.0, 0.0), 0.0, 0.0);
        assert!(vr < 0.0 && vt == 0.0);
        let (vr, _) = radial_tangential(Vec2::new(0.0, 1.0), 0.0, 0.0);
        assert_eq!(vr, 0.0);
    }

    #[test]
    fn factor_cases() {
        assert_eq!(vortex_scale_factor(15.0, 0.0, 15.0), 1.0);
        assert_eq!(vortex_scale_factor(7.5, -0.5, 15.0), 2.0);
        assert_eq!(vortex_scale_factor(15.0, 1.0, 15.0), 1.0);
    }

    #[test]
    fn modified_vortex_gate_cases() {
        let p = HarmonicParams::default();
        let me = own(0.0, 0.0, 0.0, 1.0);
        // stern sector: overtaken vessel stands on
        let behind = ObstacleView::vessel(&own(-10.0 / 2f64.sqrt(), 10.0 / 2f64.sqrt(), 0.0, 1.5));
        assert!(bearing_gamma(&me.pose, behind.position).unwrap().abs() > 5.0 * PI / 8.0);
        assert_eq!(modified_vortex_strength(&me, &behind, &p, 15.0), 0.0);
        // dead ahead, closing at 1, 10 L away: threshold 0.6, v_theta = 0 -> active
        let ahead = fixed(10.0, 0.0);
        let k = modified_vortex_strength(&me, &ahead, &p, 15.0);
        let f = vortex_scale_factor(10.0, -1.0, 15.0);
        assert_eq!(k, f * p.k_vor0);
        // passing clear: obstacle abeam to starboard, moving aft relative to us
        let abeam = fixed(0.5, 8.0);
        assert_eq!(modified_vortex_strength(&me, &abeam, &p, 15.0), 0.0);
    }

    #[test]
    fn boundary_cases() {
        let ch = ChannelBoundary::straight(Vec2::ZERO, Vec2::new(100.0, 0.0), 10.0);
        assert_eq!(boundary_source_velocity(Vec2::new(50.0, 0.0), &ch).unwrap(), Vec2::ZERO);
        let v = boundary_source_velocity(Vec2::new(50.0, 4.0), &ch).unwrap();
        assert!((v.norm() - 10.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(v.y < 0.0 && v.x.abs() < 1e-12);
        assert!(boundary_source_velocity(Vec2::new(50.0, 6.0), &ch).is_err());
        let narrow = ChannelBoundary::straight(Vec2::ZERO, Vec2::new(100.0, 0.0), 3.0);
        let v = boundary_source_velocity(Vec2::new(50.0, 0.0), &narrow).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn harmonic_heading_cases() {
        let p = HarmonicParams::default();
        let me = own(0.0, 0.0, 0.0, 1.0);
        let goal = Vec2::new(50.0, 20.0);
        let h = desired_heading_harmonic(&me, goal, &[], None, &p, 15.0, VortexLaw::Modified, 0.0);
        assert!((h.psi_d - goal.angle()).abs() < 1e-12);

        let goal = Vec2::new(50.0, 0.0);
        let obs = [fixed(12.0, 0.0)];
        let h = desired_heading_harmonic(&me, goal, &obs, None, &p, 15.0, VortexLaw::Modified, 0.0);
        assert!(h.psi_d > 0.0, "dead-ahead obstacle must deflect to starboard");

        // gated obstacle leaves the sink-only heading
        let gated = [fixed(0.5, 8.0)];
        let h = desired_heading_harmonic(&me, goal, &gated, None, &p, 15.0, VortexLaw::Modified, 0.0);
        assert_eq!(h.psi_d, 0.0);
        assert_eq!(h.max_vortex, 0.0);
    }

    #[test]
    fn inverse_square_head_on_stays_collinear() {
        let p = InverseSquareParams::default();
        let goal = Vec2::new(50.0, 0.0);
        let obs = [fixed(25.0, 0.0)];
        for x in [0.0, 10.0, 15.0, 19.0] {
            let psi = desired_heading_inverse_square(Vec2::new(x, 0.0), goal, &obs, &p, 0.3);
            assert!(psi == 0.0 || psi == PI, "x = {x}, psi = {psi}");
        }
        assert_eq!(desired_heading_inverse_square(Vec2::new(10.0, 0.0), goal, &obs, &p, 0.3), 0.0);
        assert_eq!(desired_heading_inverse_square(Vec2::new(21.0, 0.0), goal, &obs, &p, 0.3), PI);
    }

    #[test]
    fn reactive_radius() {
        let near = [fixed(14.9, 0.0)];
        let far = [fixed(15.1, 0.0)];
        assert!(reactive_active(Vec2::ZERO, &near, 15.0));
        assert!(!reactive_active(Vec2::ZERO, &far, 15.0));
    }
}
