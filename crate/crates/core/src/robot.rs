//! Cylindrical robot: one revolute joint `θ₁` followed by two prismatic
//! joints `d₂` (vertical) and `d₃` (radial). Friction is not modelled.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Lower bound on `|α₃| = |m₃|` for extracting physical parameters.
pub const EXTRACTION_EPSILON: f64 = 1e-6;

/// The four physical parameters that every estimator targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotParams {
    pub m2: f64,
    pub m3: f64,
    /// Center-of-mass offset of link 3 along its own z-axis.
    pub s3z: f64,
    /// `I₁zz + I₂yy + I₃yy`.
    pub inertia_i: f64,
}

impl RobotParams {
    /// Ground truth of the benchmark.
    pub const REFERENCE: RobotParams = RobotParams { m2: 5.0, m3: 3.0, s3z: -0.5, inertia_i: 3.0 };

    pub fn new(m2: f64, m3: f64, s3z: f64, inertia_i: f64) -> Result<Self> {
        let p = Self { m2, m3, s3z, inertia_i };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_array().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("robot parameters"));
        }
        if self.m2 <= 0.0 || self.m3 <= 0.0 || self.inertia_i <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "masses and inertia must be positive: {self}"
            )));
        }
        Ok(())
    }

    /// `false` for estimates with non-positive masses or inertia.
    pub fn is_physical(&self) -> bool {
        self.m2 > 0.0 && self.m3 > 0.0 && self.inertia_i > 0.0
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.m2, self.m3, self.s3z, self.inertia_i]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { m2: a[0], m3: a[1], s3z: a[2], inertia_i: a[3] }
    }
}

impl Default for RobotParams {
    fn default() -> Self {
        Self::REFERENCE
    }
}

impl fmt::Display for RobotParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m2={} m3={} s3z={} I={}",
            self.m2, self.m3, self.s3z, self.inertia_i
        )
    }
}

/// Base parameters `α = (I + m₃s₃z², m₂, m₃, m₃s₃z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseParams(pub [f64; 4]);

impl BaseParams {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityConstant(f64);

impl GravityConstant {
    pub const STANDARD: GravityConstant = GravityConstant(9.81);

    pub fn new(g: f64) -> Result<Self> {
        if g.is_finite() && g > 0.0 {
            Ok(Self(g))
        } else {
            Err(Error::InvalidParameter(format!("gravity must be positive, got {g}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for GravityConstant {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub theta1: f64,
    pub d2: f64,
    pub d3: f64,
    pub theta1_dot: f64,
    pub d2_dot: f64,
    pub d3_dot: f64,
    pub theta1_ddot: f64,
    pub d2_ddot: f64,
    pub d3_ddot: f64,
}

impl JointState {
    pub const COMPONENTS: usize = 9;
    pub const NAMES: [&'static str; 9] = [
        "theta1",
        "d2",
        "d3",
        "theta1_dot",
        "d2_dot",
        "d3_dot",
        "theta1_ddot",
        "d2_ddot",
        "d3_ddot",
    ];

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.theta1,
            self.d2,
            self.d3,
            self.theta1_dot,
            self.d2_dot,
            self.d3_dot,
            self.theta1_ddot,
            self.d2_ddot,
            self.d3_ddot,
        ]
    }

    pub fn from_array(a: [f64; 9]) -> Self {
        Self {
            theta1: a[0],
            d2: a[1],
            d3: a[2],
            theta1_dot: a[3],
            d2_dot: a[4],
            d3_dot: a[5],
            theta1_ddot: a[6],
            d2_ddot: a[7],
            d3_ddot: a[8],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// Joint torque/forces `(τ₁ [N·m], τ₂ [N], τ₃ [N])`.
pub fn inverse_dynamics(p: &RobotParams, s: &JointState, g: GravityConstant) -> [f64; 3] {
    let r = p.s3z + s.d3;
    [
        (p.inertia_i + p.m3 * r * r) * s.theta1_ddot + 2.0 * p.m3 * r * s.d3_dot * s.theta1_dot,
        (p.m2 + p.m3) * (s.d2_ddot + g.value()),
        p.m3 * s.d3_ddot - p.m3 * r * s.theta1_dot * s.theta1_dot,
    ]
}

/// The 3x4 regressor `Y` with `τ = Y α`.
pub fn regressor(s: &JointState, g: GravityConstant) -> DenseMatrix {
    let rows = regressor_rows(s, g);
    DenseMatrix::from_fn(3, 4, |i, j| rows[i][j])
}

pub(crate) fn regressor_rows(s: &JointState, g: GravityConstant) -> [[f64; 4]; 3] {
    let w1 = s.theta1_dot;
    let w1dot = s.theta1_ddot;
    let lift = s.d2_ddot + g.value();
    [
        [
            w1dot,
            0.0,
            2.0 * s.d3 * s.d3_dot * w1 + s.d3 * s.d3 * w1dot,
            2.0 * s.d3_dot * w1 + 2.0 * s.d3 * w1dot,
        ],
        [0.0, lift, lift, 0.0],
        [0.0, 0.0, s.d3_ddot - s.d3 * w1 * w1, -w1 * w1],
    ]
}

pub fn alpha_from_params(p: &RobotParams) -> BaseParams {
    BaseParams([
        p.inertia_i + p.m3 * p.s3z * p.s3z,
        p.m2,
        p.m3,
        p.m3 * p.s3z,
    ])
}

/// Inverts [`alpha_from_params`]. Non-physical results (negative masses
/// from a divergent estimate) are returned unchanged; only a vanishing
/// `α₃` is an error.
pub fn params_from_alpha(a: &BaseParams) -> Result<RobotParams> {
    let [a1, a2, a3, a4] = a.0;
    if !(a3.abs() >= EXTRACTION_EPSILON) {
        return Err(Error::ExtractionDegenerate {
            alpha: a.0,
            alpha3: a3,
            threshold: EXTRACTION_EPSILON,
        });
    }
    Ok(RobotParams { m2: a2, m3: a3, s3z: a4 / a3, inertia_i: a1 - a4 * a4 / a3 })
}

pub const TRAJECTORY_DURATION: f64 = 10.0;

/// Sine series `offset + Σ amplitude · sin(frequency · t)`.
struct SineSeries {
    terms: [(f64, f64); 3],
    offset: f64,
}

impl SineSeries {
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let mut pos = self.offset;
        let mut vel = 0.0;
        let mut acc = 0.0;
        for &(a, w) in &self.terms {
            let (s, c) = (w * t).sin_cos();
            pos += a * s;
            vel += a * w * c;
            acc -= a * w * w * s;
        }
        (pos, vel, acc)
    }
}

const THETA1_PATH: SineSeries =
    SineSeries { terms: [(0.43, 2.2), (0.23, 1.8), (-3.4, 0.06)], offset: -0.36 };
const D2_PATH: SineSeries =
    SineSeries { terms: [(1.0, 0.1), (-0.3, 0.07), (0.35, 1.3)], offset: -0.014 };
const D3_PATH: SineSeries =
    SineSeries { terms: [(0.1, 0.1), (-0.1, 2.7), (0.06, 0.14)], offset: 0.26 };

/// Excitation trajectory on `0 ≤ t ≤ 10` s with analytic derivatives.
pub fn trajectory(t: f64) -> Result<JointState> {
    if !(0.0..=TRAJECTORY_DURATION).contains(&t) {
        return Err(Error::TimeOutOfRange(t));
    }
    let (theta1, theta1_dot, theta1_ddot) = THETA1_PATH.eval(t);
    let (d2, d2_dot, d2_ddot) = D2_PATH.eval(t);
    let (d3, d3_dot, d3_ddot) = D3_PATH.eval(t);
    Ok(JointState { theta1, d2, d3, theta1_dot, d2_dot, d3_dot, theta1_ddot, d2_ddot, d3_ddot })
}

/// Closed interval per state component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

/// Physical limits; component order matches [`JointState::NAMES`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBounds {
    pub limits: [Interval; 9],
}

impl Default for TrajectoryBounds {
    fn default() -> Self {
        let iv = |min, max| Interval { min, max };
        use std::f64::consts::PI;
        Self {
            limits: [
                iv(-PI, PI),
                iv(0.0, 1.0),
                iv(0.0, 1.0),
                iv(-4.0, 4.0),
                iv(-2.0, 2.0),
                iv(-1.5, 1.5),
                iv(-3.0, 3.0),
                iv(-2.0, 2.0),
                iv(-1.0, 1.0),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation {
    /// Index into [`JointState::NAMES`].
    pub component: usize,
    pub side: BoundSide,
    pub value: f64,
    pub limit: f64,
}

impl BoundViolation {
    /// e.g. `"theta1 position max"`, `"d3 acceleration min"`.
    pub fn name(&self) -> String {
        let joint = ["theta1", "d2", "d3"][self.component % 3];
        let order = ["position", "velocity", "acceleration"][self.component / 3];
        let side = match self.side {
            BoundSide::Min => "min",
            BoundSide::Max => "max",
        };
        format!("{joint} {order} {side}")
    }
}

impl fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (value {}, limit {})", self.name(), self.value, self.limit)
    }
}

pub fn check_bounds(s: &JointState, b: &TrajectoryBounds) -> Vec<BoundViolation> {
    let mut out = Vec::new();
    for (component, (&value, iv)) in s.to_array().iter().zip(&b.limits).enumerate() {
        if value < iv.min {
            out.push(BoundViolation { component, side: BoundSide::Min, value, limit: iv.min });
        }
        if value > iv.max {
            out.push(BoundViolation { component, side: BoundSide::Max, value, limit: iv.max });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const P: RobotParams = RobotParams::REFERENCE;

    fn moving_state() -> JointState {
        JointState { theta1_dot: 1.0, theta1_ddot: 1.0, d3_dot: 1.0, d3: 0.3, ..Default::default() }
    }

    #[test]
    fn static_torques() {
        let tau = inverse_dynamics(&P, &JointState::default(), GravityConstant::STANDARD);
        assert_eq!(tau[0], 0.0);
        assert_abs_diff_eq!(tau[1], 78.48, epsilon = 1e-12);
        assert_eq!(tau[2], 0.0);
    }

    #[test]
    fn moving_torques() {
        let tau = inverse_dynamics(&P, &moving_state(), GravityConstant::STANDARD);
        assert_abs_diff_eq!(tau[0], 1.92, epsilon = 1e-12);
        assert_abs_diff_eq!(tau[1], 78.48, epsilon = 1e-12);
        assert_abs_diff_eq!(tau[2], 0.6, epsilon = 1e-12);
    }

    #[test]
    fn regressor_examples() {
        let g = GravityConstant::STANDARD;
        let y = regressor(&JointState::default(), g);
        assert_eq!(y.row(0), &[0.0; 4]);
        assert_eq!(y.row(1), &[0.0, 9.81, 9.81, 0.0]);
        assert_eq!(y.row(2), &[0.0; 4]);

        let y = regressor(&moving_state(), g);
        let want = [[1.0, 0.0, 0.69, 2.6], [0.0, 9.81, 9.81, 0.0], [0.0, 0.0, -0.3, -1.0]];
        for i in 0..3 {
            for j in 0..4 {
                assert_abs_diff_eq!(y[(i, j)], want[i][j], epsilon = 1e-14);
            }
        }
        let tau = y.mul_vec(alpha_from_params(&P).as_slice()).unwrap();
        let direct = inverse_dynamics(&P, &moving_state(), g);
        for (a, b) in tau.iter().zip(&direct) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn base_parameter_mapping() {
        let a = alpha_from_params(&P);
        assert_eq!(a.0, [3.75, 5.0, 3.0, -1.5]);
        let back = params_from_alpha(&BaseParams([3.75, 5.0, 3.0, -1.5])).unwrap();
        assert_eq!(back, P);

        let flat = RobotParams { s3z: 0.0, ..P };
        let a = alpha_from_params(&flat);
        assert_eq!(a.0[0], 3.0);
        assert_eq!(a.0[3], 0.0);
        let back = params_from_alpha(&a).unwrap();
        assert_eq!(back.s3z, 0.0);
        assert_eq!(back.inertia_i, 3.0);

        assert!(matches!(
            params_from_alpha(&BaseParams([1.0, 2.0, 0.0, 1.0])),
            Err(Error::ExtractionDegenerate { alpha3, .. }) if alpha3 == 0.0
        ));
    }

    #[test]
    fn nonphysical_extraction_is_returned() {
        let p = params_from_alpha(&BaseParams([3.0, 20.86, -12.03, 4.6])).unwrap();
        assert!(!p.is_physical());
        assert_eq!(p.m3, -12.03);
    }

    #[test]
    fn params_validation() {
        assert!(RobotParams::new(5.0, 3.0, -0.5, 3.0).is_ok());
        assert!(RobotParams::new(0.0, 3.0, -0.5, 3.0).is_err());
        assert!(RobotParams::new(5.0, 3.0, f64::NAN, 3.0).is_err());
        assert!(GravityConstant::new(0.0).is_err());
    }

    #[test]
    fn trajectory_at_origin() {
        let s = trajectory(0.0).unwrap();
        assert_abs_diff_eq!(s.theta1, -0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(s.d2, -0.014, epsilon = 1e-15);
        assert_abs_diff_eq!(s.d3, 0.26, epsilon = 1e-15);
        assert_abs_diff_eq!(s.theta1_dot, 1.156, epsilon = 1e-14);
        assert_eq!(s.theta1_ddot, 0.0);
        assert_eq!(s.d2_ddot, 0.0);
        assert_eq!(s.d3_ddot, 0.0);
        assert!(trajectory(-1e-9).is_err());
        assert!(trajectory(10.0 + 1e-9).is_err());
        assert!(trajectory(10.0).is_ok());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for k in 0..=1000 {
            let t = (k as f64 * 0.01).clamp(h, 10.0 - h);
            let s = trajectory(t).unwrap().to_array();
            let lo = trajectory(t - h).unwrap().to_array();
            let hi = trajectory(t + h).unwrap().to_array();
            for j in 0..6 {
                let fd = (hi[j] - lo[j]) / (2.0 * h);
                assert!((fd - s[j + 3]).abs() < 1e-6, "t={t} component {j}");
            }
        }
    }

    #[test]
    fn bounds() {
        let b = TrajectoryBounds::default();
        let s = JointState { theta1: 4.0, ..Default::default() };
        let v = check_bounds(&s, &b);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].name(), "theta1 position max");
        assert!(check_bounds(&JointState::default(), &b).is_empty());
        let s = JointState { d3_ddot: -1.5, ..Default::default() };
        assert_eq!(check_bounds(&s, &b)[0].name(), "d3 acceleration min");
    }

    #[test]
    fn trajectory_sweep_only_breaks_d2_floor() {
        // The d2 path dips below its 0 m floor (d2(0) = -0.014, minimum near
        // t = 3.5 s); every other limit holds over the whole window.
        let b = TrajectoryBounds::default();
        let mut d2_floor_hits = 0;
        for k in 0..=1000 {
            let s = trajectory(k as f64 * 0.01).unwrap();
            for v in check_bounds(&s, &b) {
                assert_eq!(v.name(), "d2 position min", "unexpected violation {v}");
                d2_floor_hits += 1;
            }
        }
        assert!(d2_floor_hits > 0);
    }
}
