use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::physics::PhysicsParams;
use super::{N_BODIES, N_LINKS};
use crate::cpg::CpgOutput;
use crate::{Error, Result};

const DOF: usize = 2 + N_BODIES;
type Mat = SMatrix<f64, DOF, DOF>;
type Vector = SVector<f64, DOF>;

/// Initial placement of the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Pose {
    /// Centre of the head body (m).
    pub head: [f64; 2],
    /// Heading of the head body (rad).
    pub heading: f64,
    /// Link bending angles head to tail (rad).
    pub bends: [f64; N_LINKS],
    /// Std of a random perturbation added to each bend at reset (rad).
    pub jitter: f64,
}

impl Default for Pose {
    fn default() -> Self {
        Self {
            head: [0.0, 0.0],
            heading: 0.0,
            bends: [0.0; N_LINKS],
            jitter: 0.0,
        }
    }
}

impl Pose {
    /// Reflection about the x axis.
    pub fn mirrored(&self) -> Self {
        Self {
            head: [self.head[0], -self.head[1]],
            heading: -self.heading,
            bends: self.bends.map(|d| -d),
            jitter: self.jitter,
        }
    }
}

/// Full mechanical and actuator state.
///
/// Generalised coordinates are the head centre and the absolute heading of
/// every body; link bends are differences of neighbouring headings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub time: f64,
    pub q: [f64; DOF],
    pub qdot: [f64; DOF],
    /// Lagged link pressure normalised by the maximum pressure.
    pub pressure: [f64; N_LINKS],
    /// Head position at reset.
    pub origin: [f64; 2],
}

fn unit(phi: f64) -> [f64; 2] {
    [phi.cos(), phi.sin()]
}

fn normal(phi: f64) -> [f64; 2] {
    [-phi.sin(), phi.cos()]
}

impl RobotState {
    pub fn head(&self) -> [f64; 2] {
        [self.q[0], self.q[1]]
    }

    pub fn heading(&self) -> f64 {
        self.q[2]
    }

    pub fn headings(&self) -> [f64; N_BODIES] {
        std::array::from_fn(|k| self.q[2 + k])
    }

    /// `delta_j = phi_{j-1} - phi_j`, positive when the body bends
    /// counterclockwise going tail to head.
    pub fn bends(&self) -> [f64; N_LINKS] {
        std::array::from_fn(|j| self.q[2 + j] - self.q[3 + j])
    }

    pub fn bend_rates(&self) -> [f64; N_LINKS] {
        std::array::from_fn(|j| self.qdot[2 + j] - self.qdot[3 + j])
    }

    pub fn curvatures(&self, phys: &PhysicsParams) -> [f64; N_LINKS] {
        self.bends().map(|d| d / phys.link_length)
    }

    /// Body centres head to tail.
    pub fn positions(&self, phys: &PhysicsParams) -> [[f64; 2]; N_BODIES] {
        let h = 0.5 * phys.pitch();
        let mut out = [[0.0; 2]; N_BODIES];
        out[0] = self.head();
        for k in 1..N_BODIES {
            let (a, b) = (unit(self.q[1 + k]), unit(self.q[2 + k]));
            out[k] = [
                out[k - 1][0] - h * (a[0] + b[0]),
                out[k - 1][1] - h * (a[1] + b[1]),
            ];
        }
        out
    }

    pub fn velocities(&self, phys: &PhysicsParams) -> [[f64; 2]; N_BODIES] {
        let jac = jacobians(&self.q, phys);
        std::array::from_fn(|k| {
            let v = jac[k] * Vector::from(self.qdot);
            [v[0], v[1]]
        })
    }

    pub fn com(&self, phys: &PhysicsParams) -> [f64; 2] {
        weighted(&self.positions(phys), &phys.masses())
    }

    pub fn com_velocity(&self, phys: &PhysicsParams) -> [f64; 2] {
        weighted(&self.velocities(phys), &phys.masses())
    }

    pub fn kinetic_energy(&self, phys: &PhysicsParams) -> f64 {
        let qd = Vector::from(self.qdot);
        0.5 * (mass_matrix(&self.q, phys) * qd).dot(&qd)
    }

    /// Energy stored in the passive link springs.
    pub fn elastic_energy(&self, phys: &PhysicsParams) -> f64 {
        0.5 * phys.link_stiffness * self.bends().iter().map(|d| d * d).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qdot).chain(&self.pressure).all(|v| v.is_finite())
    }

    /// Reflection about the x axis.
    pub fn mirrored(&self) -> Self {
        let flip = |v: [f64; DOF]| {
            let mut w = v.map(|x| -x);
            w[0] = v[0];
            w
        };
        Self {
            time: self.time,
            q: flip(self.q),
            qdot: flip(self.qdot),
            pressure: self.pressure.map(|p| -p),
            origin: [self.origin[0], -self.origin[1]],
        }
    }
}

fn weighted(points: &[[f64; 2]; N_BODIES], m: &[f64; N_BODIES]) -> [f64; 2] {
    let total: f64 = m.iter().sum();
    let mut c = [0.0; 2];
    for (p, w) in points.iter().zip(m) {
        c[0] += w * p[0];
        c[1] += w * p[1];
    }
    [c[0] / total, c[1] / total]
}

/// Robot at rest in `pose`. `seed` drives the optional bend jitter.
pub fn reset(phys: &PhysicsParams, pose: &Pose, seed: u64) -> Result<RobotState> {
    phys.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = [0.0; DOF];
    q[0] = pose.head[0];
    q[1] = pose.head[1];
    q[2] = pose.heading;
    for j in 0..N_LINKS {
        let noise = if pose.jitter > 0.0 {
            pose.jitter * (rng.random::<f64>() * 2.0 - 1.0)
        } else {
            0.0
        };
        q[3 + j] = q[2 + j] - (pose.bends[j] + noise);
    }
    Ok(RobotState {
        time: 0.0,
        q,
        qdot: [0.0; DOF],
        pressure: [0.0; N_LINKS],
        origin: pose.head,
    })
}

/// Linear-velocity Jacobians of the body centres, rows x and y.
fn jacobians(q: &[f64; DOF], phys: &PhysicsParams) -> [SMatrix<f64, 2, DOF>; N_BODIES] {
    let h = 0.5 * phys.pitch();
    std::array::from_fn(|k| {
        let mut j = SMatrix::<f64, 2, DOF>::zeros();
        j[(0, 0)] = 1.0;
        j[(1, 1)] = 1.0;
        for i in (0..=k).filter(|_| k > 0) {
            let c = if i == 0 || i == k { 1.0 } else { 2.0 };
            let n = normal(q[2 + i]);
            j[(0, 2 + i)] = -c * h * n[0];
            j[(1, 2 + i)] = -c * h * n[1];
        }
        j
    })
}

fn inertia(m: f64, phys: &PhysicsParams) -> f64 {
    m * phys.pitch().powi(2) / 12.0
}

fn mass_matrix(q: &[f64; DOF], phys: &PhysicsParams) -> Mat {
    let jac = jacobians(q, phys);
    let masses = phys.masses();
    let mut m = Mat::zeros();
    for k in 0..N_BODIES {
        m += masses[k] * jac[k].transpose() * jac[k];
        m[(2 + k, 2 + k)] += inertia(masses[k], phys);
    }
    m
}

/// Smoothed sign and its slope.
fn smooth_sign(v: f64, scale: f64) -> (f64, f64) {
    let t = (v / scale).tanh();
    (t, (1.0 - t * t) / scale)
}

/// Generalised forces and the velocity-damping matrix `-dQ/dqdot`.
fn forces(st: &RobotState, phys: &PhysicsParams) -> (Mat, Vector, Mat) {
    let q = &st.q;
    let qd = Vector::from(st.qdot);
    let jac = jacobians(q, phys);
    let masses = phys.masses();
    let h = 0.5 * phys.pitch();
    let (mu_t, mu_n) = (phys.tangential_friction(), phys.lateral_friction());
    let (g_plane, g_tilt) = (
        phys.gravity * phys.gravity_angle.cos(),
        phys.gravity * phys.gravity_angle.sin(),
    );
    let arm = 0.25 * phys.pitch();
    let eps = phys.slip_velocity;
    let drag = phys.drag_velocity;

    let mut mass = Mat::zeros();
    let mut rhs = Vector::zeros();
    let mut damp = Mat::zeros();

    for k in 0..N_BODIES {
        let jk = &jac[k];
        let m = masses[k];
        mass += m * jk.transpose() * jk;
        mass[(2 + k, 2 + k)] += inertia(m, phys);

        // centripetal part of the body acceleration
        let mut ac = [0.0; 2];
        for i in (0..=k).filter(|_| k > 0) {
            let c = if i == 0 || i == k { 1.0 } else { 2.0 };
            let e = unit(q[2 + i]);
            let w = qd[2 + i];
            ac[0] += c * h * w * w * e[0];
            ac[1] += c * h * w * w * e[1];
        }

        let v = jk * qd;
        let (e, n) = (unit(q[2 + k]), normal(q[2 + k]));
        let vt = v[0] * e[0] + v[1] * e[1];
        let vn = v[0] * n[0] + v[1] * n[1];
        let load = m * g_plane;
        let (st_, dt_) = smooth_sign(vt, eps);
        let (sn, dn) = smooth_sign(vn, eps);
        let ft = -mu_t * load * (st_ + vt / drag);
        let fn_ = -mu_n * load * (sn + vn / drag);
        let f = [
            ft * e[0] + fn_ * n[0] + m * g_tilt - m * ac[0],
            ft * e[1] + fn_ * n[1] - m * ac[1],
        ];
        rhs += jk.transpose() * nalgebra::Vector2::new(f[0], f[1]);

        let et = nalgebra::Vector2::new(e[0], e[1]);
        let nn = nalgebra::Vector2::new(n[0], n[1]);
        let c = load
            * (mu_t * (dt_ + 1.0 / drag) * et * et.transpose()
                + mu_n * (dn + 1.0 / drag) * nn * nn.transpose());
        damp += jk.transpose() * c * jk;

        // lateral friction spread along the body resists spinning
        let (sw, dw) = smooth_sign(arm * qd[2 + k], eps);
        rhs[2 + k] -= mu_n * load * arm * (sw + arm * qd[2 + k] / drag);
        damp[(2 + k, 2 + k)] += mu_n * load * arm * arm * (dw + 1.0 / drag);
    }

    let bends = st.bends();
    let rates = st.bend_rates();
    for j in 0..N_LINKS {
        let tau = phys.torque_gain * phys.max_pressure * st.pressure[j]
            - phys.link_stiffness * bends[j]
            - phys.link_damping * rates[j];
        rhs[2 + j] += tau;
        rhs[3 + j] -= tau;
        let (a, b) = (2 + j, 3 + j);
        damp[(a, a)] += phys.link_damping;
        damp[(b, b)] += phys.link_damping;
        damp[(a, b)] -= phys.link_damping;
        damp[(b, a)] -= phys.link_damping;
    }
    (mass, rhs, damp)
}

/// Advance the robot by `dt` with normalised pressure commands `psi`.
///
/// Pressure follows the command through an exact first-order lag; the
/// mechanics use a linearly implicit Euler step in which friction and link
/// damping are treated implicitly.
pub fn step_robot(st: &RobotState, psi: &CpgOutput, phys: &PhysicsParams, dt: f64) -> Result<RobotState> {
    let decay = (-dt / phys.actuator_lag).exp();
    let mut next = *st;
    for j in 0..N_LINKS {
        let target = psi.psi[j].clamp(-1.0, 1.0);
        next.pressure[j] = target + (st.pressure[j] - target) * decay;
    }

    let (mass, rhs, damp) = forces(&next, phys);
    let lhs = mass + dt * damp;
    let dv = lhs
        .lu()
        .solve(&(dt * rhs))
        .ok_or(Error::IntegrationDiverged {
            step: (st.time / dt).round() as usize,
            time: st.time,
        })?;
    for i in 0..DOF {
        next.qdot[i] = st.qdot[i] + dv[i];
        next.q[i] = st.q[i] + dt * next.qdot[i];
    }
    next.time = st.time + dt;
    if !next.is_finite() {
        return Err(Error::IntegrationDiverged {
            step: (next.time / dt).round() as usize,
            time: next.time,
        });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(st: RobotState, psi: CpgOutput, phys: &PhysicsParams, steps: usize) -> RobotState {
        (0..steps).fold(st, |s, _| step_robot(&s, &psi, phys, 1e-3).unwrap())
    }

    #[test]
    fn default_reset() {
        let phys = PhysicsParams::default();
        let st = reset(&phys, &Pose::default(), 0).unwrap();
        assert_eq!(st.bends(), [0.0; 4]);
        assert_eq!(st.qdot, [0.0; DOF]);
        assert_eq!(st, reset(&phys, &Pose::default(), 0).unwrap());
    }

    #[test]
    fn jitter_is_seeded() {
        let phys = PhysicsParams::default();
        let pose = Pose { jitter: 0.1, ..Pose::default() };
        let a = reset(&phys, &pose, 3).unwrap();
        assert_eq!(a, reset(&phys, &pose, 3).unwrap());
        assert_ne!(a, reset(&phys, &pose, 4).unwrap());
        assert!(a.bends().iter().all(|d| d.abs() <= 0.1));
    }

    #[test]
    fn positions_follow_chain() {
        let phys = PhysicsParams::default();
        let st = reset(&phys, &Pose::default(), 0).unwrap();
        let p = st.positions(&phys);
        for k in 0..N_BODIES {
            assert!((p[k][0] + k as f64 * phys.pitch()).abs() < 1e-15);
            assert_eq!(p[k][1], 0.0);
        }
    }

    #[test]
    fn jacobian_matches_finite_difference() {
        let phys = PhysicsParams::default();
        let pose = Pose {
            head: [0.3, -0.2],
            heading: 0.4,
            bends: [0.3, -0.5, 0.2, 0.7],
            jitter: 0.0,
        };
        let mut st = reset(&phys, &pose, 0).unwrap();
        st.qdot = [0.1, -0.05, 0.3, -0.2, 0.5, 0.1, -0.4];
        let v = st.velocities(&phys);
        let eps = 1e-7;
        let mut ahead = st;
        for i in 0..DOF {
            ahead.q[i] += eps * st.qdot[i];
        }
        let (p0, p1) = (st.positions(&phys), ahead.positions(&phys));
        for k in 0..N_BODIES {
            for c in 0..2 {
                let fd = (p1[k][c] - p0[k][c]) / eps;
                assert!((fd - v[k][c]).abs() < 1e-6, "body {k} axis {c}");
            }
        }
    }

    #[test]
    fn zero_actuation_stays_at_rest() {
        let phys = PhysicsParams::default();
        let st = reset(&phys, &Pose::default(), 0).unwrap();
        let end = run(st, CpgOutput::ZERO, &phys, 2000);
        assert_eq!(end.q, st.q);
        assert_eq!(end.qdot, [0.0; DOF]);
    }

    #[test]
    fn curvature_identity() {
        let phys = PhysicsParams::default();
        let mut st = reset(&phys, &Pose::default(), 0).unwrap();
        let psi = CpgOutput { psi: [0.5, -0.3, 0.8, -1.0] };
        for _ in 0..500 {
            st = step_robot(&st, &psi, &phys, 1e-3).unwrap();
            let k = st.curvatures(&phys);
            for (kj, dj) in k.iter().zip(st.bends()) {
                // one rounding of the division and one of the product
                assert!((kj * phys.link_length - dj).abs() <= 2.0 * f64::EPSILON * dj.abs());
            }
        }
    }

    #[test]
    fn mirror_symmetry() {
        let phys = PhysicsParams::default();
        let pose = Pose {
            head: [0.1, 0.2],
            heading: 0.3,
            bends: [0.1, -0.2, 0.0, 0.3],
            jitter: 0.0,
        };
        let mut a = reset(&phys, &pose, 0).unwrap();
        let mut b = reset(&phys, &pose.mirrored(), 0).unwrap();
        for k in 0..3000 {
            let t = k as f64 * 1e-3;
            let psi = CpgOutput {
                psi: std::array::from_fn(|i| (6.0 * t - i as f64).sin()),
            };
            a = step_robot(&a, &psi, &phys, 1e-3).unwrap();
            b = step_robot(&b, &psi.negated(), &phys, 1e-3).unwrap();
        }
        let m = a.mirrored();
        for i in 0..DOF {
            assert!((m.q[i] - b.q[i]).abs() < 1e-12, "q[{i}]");
            assert!((m.qdot[i] - b.qdot[i]).abs() < 1e-12, "qdot[{i}]");
        }
    }

    #[test]
    fn sliding_body_loses_energy() {
        let phys = PhysicsParams::default();
        let mut st = reset(&phys, &Pose { bends: [0.2, -0.3, 0.4, -0.1], ..Pose::default() }, 0).unwrap();
        st.qdot = [0.3, 0.2, 1.0, -0.5, 0.8, 0.2, -1.0];
        let energy = |s: &RobotState| s.kinetic_energy(&phys) + s.elastic_energy(&phys);
        let mut prev = energy(&st);
        for _ in 0..3000 {
            st = step_robot(&st, &CpgOutput::ZERO, &phys, 1e-3).unwrap();
            let e = energy(&st);
            assert!(e <= prev + 1e-12, "energy rose from {prev} to {e}");
            prev = e;
        }
    }

    #[test]
    fn straight_coasting_kinetic_energy_decreases() {
        let phys = PhysicsParams::default();
        let mut st = reset(&phys, &Pose::default(), 0).unwrap();
        st.qdot[0] = 0.2;
        let mut prev = st.kinetic_energy(&phys);
        for _ in 0..1000 {
            st = step_robot(&st, &CpgOutput::ZERO, &phys, 1e-3).unwrap();
            let e = st.kinetic_energy(&phys);
            assert!(e <= prev);
            prev = e;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn constant_bend_does_not_travel() {
        let phys = PhysicsParams::default();
        let st = reset(&phys, &Pose::default(), 0).unwrap();
        let psi = CpgOutput { psi: [1.0, -1.0, 1.0, -1.0] };
        let settled = run(st, psi, &phys, 5000);
        let later = run(settled, psi, &phys, 5000);
        assert!(settled.bends()[0] > 0.05, "link does not bend");
        let c0 = settled.com(&phys);
        let c1 = later.com(&phys);
        assert!(((c1[0] - c0[0]).powi(2) + (c1[1] - c0[1]).powi(2)).sqrt() < 1e-3);
    }
}
