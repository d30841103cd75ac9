//! Three-degree-of-freedom MMG maneuvering model in prime-II units.
//!
//! Forces are normalised by `0.5 rho U_des^2 L d`, moments by
//! `0.5 rho U_des^2 L^2 d`, speeds by `U_des` and time by `L / U_des`.
//! Hull, propeller and rudder coefficients come from a versioned JSON table
//! (see `data/kcs_mmg.json`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{body_to_global, BodyVelocity, Pose};

const KCS_TABLE: &str = include_str!("../data/kcs_mmg.json");

/// Schema identifier expected in coefficient files.
pub const COEFF_SCHEMA_VERSION: &str = "kcs-mmg/1";

/// Dimensional particulars of the hull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShipParams {
    /// Length between perpendiculars (m).
    pub length: f64,
    /// Beam (m).
    pub beam: f64,
    /// Draft (m).
    pub draft: f64,
    /// Design speed (m/s).
    pub design_speed: f64,
    /// Longitudinal centre of gravity, nondimensional (x_G / L).
    pub x_g: f64,
    /// Water density (kg/m^3).
    pub rho_w: f64,
    /// Displaced volume (m^3).
    pub displacement: f64,
}

/// Mass, added mass and inertia in prime-II units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassParams {
    pub m: f64,
    pub m_x: f64,
    pub m_y: f64,
    pub i_zz: f64,
    pub j_zz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullCoeffs {
    pub r0: f64,
    pub x_vv: f64,
    pub x_vr: f64,
    pub x_rr: f64,
    pub x_vvvv: f64,
    pub y_v: f64,
    pub y_r: f64,
    pub y_vvv: f64,
    pub y_vvr: f64,
    pub y_vrr: f64,
    pub y_rrr: f64,
    pub n_v: f64,
    pub n_r: f64,
    pub n_vvv: f64,
    pub n_vvr: f64,
    pub n_vrr: f64,
    pub n_rrr: f64,
}

/// Open-water thrust fit `K_T = k0 + k1 J + k2 J^2` plus hull interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropellerCoeffs {
    /// Propeller diameter (m).
    pub diameter: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub wake_fraction: f64,
    pub thrust_deduction: f64,
    /// Longitudinal propeller position, nondimensional.
    pub x_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RudderCoeffs {
    /// Rudder area over `L d`.
    pub area_ratio: f64,
    pub t_r: f64,
    pub a_h: f64,
    pub x_h: f64,
    pub x_r: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub l_r: f64,
    pub gamma_r: f64,
    pub f_alpha: f64,
    /// Propeller diameter over rudder span.
    pub eta: f64,
}

/// Hull, propeller and rudder coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydroCoeffs {
    pub hull: HullCoeffs,
    pub propeller: PropellerCoeffs,
    pub rudder: RudderCoeffs,
}

/// On-disk layout of a coefficient file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub schema_version: String,
    #[serde(default)]
    pub notes: Vec<String>,
    pub ship: ShipParams,
    pub mass: MassParams,
    pub hull: HullCoeffs,
    pub propeller: PropellerCoeffs,
    pub rudder: RudderCoeffs,
}

/// Rudder actuator limits in nondimensional units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorLimits {
    /// Rudder saturation (rad).
    pub delta_max: f64,
    /// Rudder rate saturation (rad per nondimensional time).
    pub delta_rate_max: f64,
    /// First-order time constant (nondimensional).
    pub t_delta: f64,
}

impl ActuatorLimits {
    /// 35 deg saturation, 5 deg/s full-scale rate limit, unit time constant.
    pub fn for_ship(ship: &ShipParams) -> Self {
        let time_scale = ship.length / ship.design_speed;
        Self {
            delta_max: 35f64.to_radians(),
            delta_rate_max: 5f64.to_radians() * time_scale,
            t_delta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta_max", self.delta_max),
            ("delta_rate_max", self.delta_rate_max),
            ("t_delta", self.t_delta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Complete dynamic state of one vessel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DynamicState {
    pub pose: Pose,
    pub nu: BodyVelocity,
    /// Actual rudder angle (rad).
    pub delta: f64,
    /// Propeller revolutions, `n L / U_des`; constant over a run.
    pub n_prop: f64,
}

/// Force and moment triple.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Forces {
    pub x: f64,
    pub y: f64,
    pub n: f64,
}

impl std::ops::Add for Forces {
    type Output = Forces;
    fn add(self, o: Forces) -> Forces {
        Forces {
            x: self.x + o.x,
            y: self.y + o.y,
            n: self.n + o.n,
        }
    }
}

/// Immutable ship model: particulars, mass properties and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ShipModel {
    pub ship: ShipParams,
    pub mass: MassParams,
    pub coeffs: HydroCoeffs,
    pub limits: ActuatorLimits,
    pub schema_version: String,
    pub notes: Vec<String>,
}

impl ShipModel {
    /// The bundled KCS table.
    pub fn kcs() -> Self {
        Self::from_json_str(KCS_TABLE).expect("bundled KCS table is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: CoefficientFile = serde_json::from_str(s)?;
        Self::from_file(file)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn from_file(file: CoefficientFile) -> Result<Self> {
        if file.schema_version != COEFF_SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("expected {COEFF_SCHEMA_VERSION}, got {}", file.schema_version),
            ));
        }
        let model = ShipModel {
            limits: ActuatorLimits::for_ship(&file.ship),
            ship: file.ship,
            mass: file.mass,
            coeffs: HydroCoeffs {
                hull: file.hull,
                propeller: file.propeller,
                rudder: file.rudder,
            },
            schema_version: file.schema_version,
            notes: file.notes,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_file(&self) -> CoefficientFile {
        CoefficientFile {
            schema_version: self.schema_version.clone(),
            notes: self.notes.clone(),
            ship: self.ship,
            mass: self.mass,
            hull: self.coeffs.hull,
            propeller: self.coeffs.propeller,
            rudder: self.coeffs.rudder,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.ship;
        for (name, v) in [
            ("ship.length", s.length),
            ("ship.beam", s.beam),
            ("ship.draft", s.draft),
            ("ship.design_speed", s.design_speed),
            ("ship.rho_w", s.rho_w),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        let m = &self.mass;
        for (name, v) in [
            ("mass.m", m.m),
            ("mass.m_x", m.m_x),
            ("mass.m_y", m.m_y),
            ("mass.i_zz", m.i_zz),
            ("mass.j_zz", m.j_zz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        let det = sway_yaw_det(m, s.x_g);
        if !(det > 0.0) {
            return Err(Error::SingularMass(det));
        }
        let file = self.to_file();
        let value = serde_json::to_value((&file.hull, &file.propeller, &file.rudder))?;
        if !all_numbers_finite(&value) || !s.x_g.is_finite() {
            return Err(Error::NonFinite("coefficient table".into()));
        }
        self.limits.validate()
    }

    /// Self-propulsion revolutions for a steady straight run at `target_u`.
    pub fn self_propulsion_rpm(&self, target_u: f64) -> Result<f64> {
        self_propulsion_rpm(target_u, self)
    }
}

fn all_numbers_finite(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        serde_json::Value::Array(a) => a.iter().all(all_numbers_finite),
        serde_json::Value::Object(o) => o.values().all(all_numbers_finite),
        _ => true,
    }
}

fn sway_yaw_det(m: &MassParams, x_g: f64) -> f64 {
    (m.m + m.m_y) * (m.i_zz + m.j_zz) - (m.m * x_g).powi(2)
}

/// Hull polynomial forces. Odd in (v, r), `-R0 u^2` resistance in surge.
pub fn hull_forces(nu: &BodyVelocity, hull: &HullCoeffs) -> Forces {
    let BodyVelocity { u, v, r } = *nu;
    let speed = u.hypot(v);
    if speed < 1e-9 {
        return Forces::default();
    }
    let h = hull;
    // v' = v/U and r' = r/U; multiplying through by U^2 keeps everything in
    // design-speed units
    let vp = v / speed;
    let rp = r / speed;
    let u2 = speed * speed;
    let x = u2
        * (-h.r0 * (u / speed).powi(2)
            + h.x_vv * vp * vp
            + h.x_vr * vp * rp
            + h.x_rr * rp * rp
            + h.x_vvvv * vp.powi(4));
    let y = u2
        * (h.y_v * vp
            + h.y_r * rp
            + h.y_vvv * vp.powi(3)
            + h.y_vvr * vp * vp * rp
            + h.y_vrr * vp * rp * rp
            + h.y_rrr * rp.powi(3));
    let n = u2
        * (h.n_v * vp
            + h.n_r * rp
            + h.n_vvv * vp.powi(3)
            + h.n_vvr * vp * vp * rp
            + h.n_vrr * vp * rp * rp
            + h.n_rrr * rp.powi(3));
    Forces { x, y, n }
}

/// `n^2 K_T(J)` in nondimensional form, expanded so that `n = 0` is finite.
fn thrust_kernel(u_p: f64, n_prop: f64, dp: f64, p: &PropellerCoeffs) -> f64 {
    p.k0 * n_prop * n_prop + p.k1 * n_prop * u_p / dp + p.k2 * (u_p / dp).powi(2)
}

/// Propeller surge force for an ahead speed `u` and revolutions `n_prop`.
pub fn propeller_force(u: f64, n_prop: f64, model: &ShipModel) -> f64 {
    let p = &model.coeffs.propeller;
    let dp = p.diameter / model.ship.length;
    let u_p = u * (1.0 - p.wake_fraction);
    let scale = 2.0 * (model.ship.length / model.ship.draft) * dp.powi(4);
    (1.0 - p.thrust_deduction) * scale * thrust_kernel(u_p, n_prop, dp, p)
}

/// Rudder forces from the effective inflow angle and propeller slipstream.
pub fn rudder_forces(nu: &BodyVelocity, delta: f64, n_prop: f64, model: &ShipModel) -> Forces {
    let BodyVelocity { u, v, r } = *nu;
    let p = &model.coeffs.propeller;
    let c = &model.coeffs.rudder;
    let dp = p.diameter / model.ship.length;

    let speed = u.hypot(v);
    let u_p = u * (1.0 - p.wake_fraction);

    // 8 K_T / (pi J^2) written without dividing by n
    let slip = if u_p.abs() > 1e-9 {
        8.0 * thrust_kernel(u_p, n_prop, dp, p) * dp * dp / (std::f64::consts::PI * u_p * u_p)
    } else {
        0.0
    };
    let inflow = 1.0 + c.kappa * ((1.0 + slip).max(0.0).sqrt() - 1.0);
    let u_r = c.epsilon * u_p * (c.eta * inflow * inflow + 1.0 - c.eta).max(0.0).sqrt();

    let (beta, r_prime) = if speed > 1e-9 {
        ((-v).atan2(u), r / speed)
    } else {
        (0.0, 0.0)
    };
    let beta_r = beta - c.l_r * r_prime;
    let v_r = speed * c.gamma_r * beta_r;
    let alpha_r = delta - v_r.atan2(u_r);

    let f_n = c.area_ratio * (u_r * u_r + v_r * v_r) * c.f_alpha * alpha_r.sin();
    let (sd, cd) = delta.sin_cos();
    Forces {
        x: -(1.0 - c.t_r) * f_n * sd,
        y: -(1.0 + c.a_h) * f_n * cd,
        n: -(c.x_r + c.a_h * c.x_h) * f_n * cd,
    }
}

/// Sum of hull, rudder and propeller forces.
pub fn total_forces(state: &DynamicState, model: &ShipModel) -> Forces {
    let hull = hull_forces(&state.nu, &model.coeffs.hull);
    let rudder = rudder_forces(&state.nu, state.delta, state.n_prop, model);
    let x_p = propeller_force(state.nu.u, state.n_prop, model);
    Forces {
        x: hull.x + rudder.x + x_p,
        y: hull.y + rudder.y,
        n: hull.n + rudder.n,
    }
}

/// Body accelerations for applied forces, solving the coupled sway-yaw pair.
pub fn accelerations(nu: &BodyVelocity, f: &Forces, mass: &MassParams, x_g: f64) -> Result<[f64; 3]> {
    let BodyVelocity { u, v, r } = *nu;
    let m = mass.m;
    let u_dot = (f.x + m * v * r + m * x_g * r * r) / (mass.m + mass.m_x);

    let a11 = m + mass.m_y;
    let a12 = m * x_g;
    let a22 = mass.i_zz + mass.j_zz;
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > 1e-12) {
        return Err(Error::SingularMass(det));
    }
    let b1 = f.y - m * u * r;
    let b2 = f.n - m * x_g * u * r;
    let v_dot = (a22 * b1 - a12 * b2) / det;
    let r_dot = (a11 * b2 - a12 * b1) / det;
    Ok([u_dot, v_dot, r_dot])
}

/// Time derivative of (x, y, psi, u, v, r).
pub fn state_derivative(state: &DynamicState, model: &ShipModel) -> Result<[f64; 6]> {
    let f = total_forces(state, model);
    let acc = accelerations(&state.nu, &f, &model.mass, model.ship.x_g)?;
    let kin = body_to_global(&state.pose, &state.nu);
    Ok([kin[0], kin[1], kin[2], acc[0], acc[1], acc[2]])
}

/// First-order rudder response with rate saturation.
pub fn rudder_rate(delta: f64, delta_c: f64, limits: &ActuatorLimits) -> f64 {
    let rate = (delta_c - delta) / limits.t_delta;
    if rate.abs() <= limits.delta_rate_max {
        rate
    } else {
        rate.signum() * limits.delta_rate_max
    }
}

/// Revolutions that balance thrust against straight-run resistance at `target_u`.
pub fn self_propulsion_rpm(target_u: f64, model: &ShipModel) -> Result<f64> {
    if !(target_u > 0.0 && target_u <= 1.2) {
        return Err(Error::invalid("target_u", format!("must lie in (0, 1.2], got {target_u}")));
    }
    let residual = |n: f64| {
        let nu = BodyVelocity::new(target_u, 0.0, 0.0);
        propeller_force(target_u, n, model) + hull_forces(&nu, &model.coeffs.hull).x
    };
    let mut lo = 0.0;
    let mut hi = 10.0;
    if residual(lo) >= 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    while residual(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e5 {
            return Err(Error::NoBracket { lo, hi });
        }
    }
    while hi - lo > 1e-8 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
