//! Coordinate frames, angle arithmetic and the fixed-step integrator.
//!
//! The global frame is z-down: x forward, y to starboard, heading measured
//! clockwise (viewed from above) from the global x-axis. A positive yaw rate
//! is a starboard turn.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar vector in ship lengths (or nondimensional speed).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Four-quadrant angle of the vector from the global x-axis.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Rotates the vector by `angle` (body to global when `angle` is the heading).
    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Position and heading in the global frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, psi: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Surge, sway and yaw rate in the body frame (prime-II nondimensional).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyVelocity {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl BodyVelocity {
    pub fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.r.is_finite()
    }

    /// Linear part of the velocity expressed in the global frame.
    pub fn global_linear(&self, psi: f64) -> Vec2 {
        Vec2::new(self.u, self.v).rotate(psi)
    }
}

/// Row-major 3x3 matrix.
pub type Mat3 = [[f64; 3]; 3];

/// Planar rotation about z that maps body-frame vectors to the global frame.
pub fn rotation_matrix(psi: f64) -> Mat3 {
    let (s, c) = psi.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = a.rem_euclid(two_pi);
    if w > PI {
        w -= two_pi;
    }
    // rem_euclid maps -pi to pi already; guard the rounding edge at exactly -pi
    if w <= -PI {
        w += two_pi;
    }
    w
}

/// Global-frame rates (x_dot, y_dot, psi_dot) for a body velocity.
pub fn body_to_global(pose: &Pose, nu: &BodyVelocity) -> [f64; 3] {
    let r = rotation_matrix(pose.psi);
    let b = [nu.u, nu.v, nu.r];
    let mut out = [0.0; 3];
    for (i, row) in r.iter().enumerate() {
        out[i] = row.iter().zip(b.iter()).map(|(a, b)| a * b).sum();
    }
    out
}

/// One classical fourth-order Runge-Kutta step of size `dt`.
///
/// `f` writes the derivative of `s` into its second argument. Fails if any
/// stage produces a non-finite derivative.
pub fn rk4_step<const N: usize, F>(mut f: F, s: &[f64; N], dt: f64) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N], &mut [f64; N]),
{
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            field: "dt".into(),
            reason: format!("step must be positive, got {dt}"),
        });
    }

    let mut k1 = [0.0; N];
    let mut k2 = [0.0; N];
    let mut k3 = [0.0; N];
    let mut k4 = [0.0; N];
    let mut tmp = [0.0; N];

    f(s, &mut k1);
    check_finite(&k1)?;
    for i in 0..N {
        tmp[i] = s[i] + 0.5 * dt * k1[i];
    }
    f(&tmp, &mut k2);
    check_finite(&k2)?;
    for i in 0..N {
        tmp[i] = s[i] + 0.5 * dt * k2[i];
    }
    f(&tmp, &mut k3);
    check_finite(&k3)?;
    for i in 0..N {
        tmp[i] = s[i] + dt * k3[i];
    }
    f(&tmp, &mut k4);
    check_finite(&k4)?;

    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

fn check_finite(d: &[f64]) -> Result<()> {
    if d.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("derivative evaluation".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matmul_t(a: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| a[k][i] * a[k][j]).sum();
            }
        }
        out
    }

    fn det(a: &Mat3) -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    #[test]
    fn rotation_identity_and_quarter_turn() {
        assert_eq!(rotation_matrix(0.0), [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let g = body_to_global(&Pose::new(0.0, 0.0, PI / 2.0), &BodyVelocity::new(1.0, 0.0, 0.0));
        assert!(g[0].abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15 && g[2] == 0.0);
    }

    #[test]
    fn rotation_orthogonal_at_0_7() {
        let p = matmul_t(&rotation_matrix(0.7));
        for (i, row) in p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-1.5 * PI) - PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
    }

    #[test]
    fn body_to_global_examples() {
        let g = body_to_global(&Pose::new(0.0, 0.0, 0.0), &BodyVelocity::new(1.0, 0.0, 0.0));
        assert_eq!(g, [1.0, 0.0, 0.0]);
        let g = body_to_global(&Pose::new(0.0, 0.0, PI / 4.0), &BodyVelocity::new(1.0, 1.0, 0.0));
        assert!(g[0].abs() < 1e-15);
        assert!((g[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rk4_zero_and_constant_derivatives() {
        let s = [1.5, -2.0, 3.0];
        let out = rk4_step(|_, d: &mut [f64; 3]| *d = [0.0; 3], &s, 0.1).unwrap();
        assert_eq!(out, s);
        let c = [0.5, -1.0, 2.0];
        let out = rk4_step(|_, d: &mut [f64; 3]| *d = c, &s, 0.25).unwrap();
        for i in 0..3 {
            assert!((out[i] - (s[i] + c[i] * 0.25)).abs() < 1e-15);
        }
    }

    fn oscillator_error(dt: f64, t_end: f64) -> f64 {
        let steps = (t_end / dt).round() as usize;
        let mut s = [1.0, 0.0];
        for _ in 0..steps {
            s = rk4_step(|s: &[f64; 2], d: &mut [f64; 2]| *d = [s[1], -s[0]], &s, dt).unwrap();
        }
        let t = steps as f64 * dt;
        ((s[0] - t.cos()).powi(2) + (s[1] + t.sin()).powi(2)).sqrt()
    }

    #[test]
    fn rk4_harmonic_oscillator() {
        assert!(oscillator_error(0.01, 10.0) < 1e-8);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let coarse = oscillator_error(0.1, 10.0);
        let fine = oscillator_error(0.05, 10.0);
        assert!(coarse / fine >= 15.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn rk4_reports_non_finite() {
        let err = rk4_step(|_, d: &mut [f64; 1]| d[0] = f64::NAN, &[0.0], 0.1);
        assert!(matches!(err, Err(Error::NonFinite(_))));
        assert!(rk4_step(|_, d: &mut [f64; 1]| d[0] = 0.0, &[0.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn rotation_is_orthogonal(psi in -50.0f64..50.0) {
            let r = rotation_matrix(psi);
            let p = matmul_t(&r);
            for (i, row) in p.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((v - expect).abs() < 1e-12);
                }
            }
            prop_assert!((det(&r) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn wrap_is_idempotent_and_in_range(a in -100.0f64..100.0) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w), w);
            let k = ((a - w) / (2.0 * PI)).round();
            prop_assert!((a - w - k * 2.0 * PI).abs() < 1e-9);
        }
    }
}
