//! Analytic estimators of the base parameters: least squares, total least
//! squares and robust (worst-case) least squares, on absolute or relative
//! observations.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::numerics::{
    smallest_singular_value, solve_linear, symmetric_eigen, DenseMatrix, DenseVector,
    DEFAULT_CONDITION_CAP,
};
use crate::robot::{params_from_alpha, regressor_rows, BaseParams, GravityConstant, RobotParams};
use crate::sampling::SampleSet;

/// Relative-form denominators are kept at least this fraction of the
/// largest torque magnitude away from zero.
pub const RELATIVE_CLAMP_FRACTION: f64 = 1e-3;

/// Iteration cap of the robust least squares root search.
pub const RLS_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    Absolute,
    Relative,
}

/// Stacked regressors `W` (3N x 4) and torques `τ_s` (3N).
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub w: DenseMatrix,
    pub tau: DenseVector,
    pub form: Form,
    /// Rows whose relative denominator was clamped.
    pub clamped_rows: Vec<usize>,
}

impl Observation {
    pub fn new(w: DenseMatrix, tau: DenseVector) -> Result<Self> {
        if w.rows() != tau.len() {
            return Err(Error::Dimension(format!(
                "{} observation rows but {} torques",
                w.rows(),
                tau.len()
            )));
        }
        Ok(Self { w, tau, form: Form::Absolute, clamped_rows: Vec::new() })
    }

    pub fn residual(&self, alpha: &[f64]) -> Vec<f64> {
        let pred = self.w.mul_vec(alpha).expect("coefficient count matches columns");
        self.tau.iter().zip(pred.iter()).map(|(t, p)| t - p).collect()
    }

    pub fn residual_norm(&self, alpha: &[f64]) -> f64 {
        norm(&self.residual(alpha))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Clamps denominators to `|x| ≥ ε = 1e-3 · max|x|`, preserving sign (zero
/// counts as positive). Returns the denominators and the clamped indices.
pub fn relative_denominators(values: &[f64]) -> Result<(Vec<f64>, Vec<usize>)> {
    let peak = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if peak == 0.0 {
        return Err(Error::ZeroTorque);
    }
    let eps = RELATIVE_CLAMP_FRACTION * peak;
    let mut clamped = Vec::new();
    let d = values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x.abs() < eps {
                clamped.push(i);
                if x < 0.0 {
                    -eps
                } else {
                    eps
                }
            } else {
                x
            }
        })
        .collect();
    Ok((d, clamped))
}

pub fn build_observation(set: &SampleSet, g: GravityConstant) -> Observation {
    let n = set.len();
    let mut w = Vec::with_capacity(12 * n);
    let mut tau = Vec::with_capacity(3 * n);
    for s in set.samples() {
        for row in regressor_rows(&s.state, g) {
            w.extend_from_slice(&row);
        }
        tau.extend_from_slice(&s.torque);
    }
    Observation {
        w: DenseMatrix::new(3 * n, 4, w).expect("sample sets hold finite values"),
        tau: DenseVector::new(tau).expect("sample sets hold finite values"),
        form: Form::Absolute,
        clamped_rows: Vec::new(),
    }
}

/// Divides each row and its torque by the (clamped) torque, so the
/// relative torques are 1 except on clamped rows, where they are `τᵢ/dᵢ`.
/// The relative residual is then `(τᵢ − Wᵢα)/dᵢ` on every row.
pub fn to_relative(o: &Observation) -> Result<Observation> {
    if o.form != Form::Absolute {
        return Err(Error::InvalidParameter("observation is already relative".into()));
    }
    let (den, clamped_rows) = relative_denominators(&o.tau)?;
    let w = o.w.map_rows(|i, row| row.iter().map(|x| x / den[i]).collect());
    let tau = o.tau.iter().zip(&den).map(|(t, d)| if t == d { 1.0 } else { t / d }).collect();
    Ok(Observation {
        w,
        tau: DenseVector::new(tau)?,
        form: Form::Relative,
        clamped_rows,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Smallest singular value of `[W | τ]` (TLS, and RLS with a TLS radius).
    pub sigma_min: Option<f64>,
    /// Perturbation radius (RLS).
    pub rho: Option<f64>,
    /// Worst-case residual at the solution (RLS).
    pub objective: Option<f64>,
    pub gradient_norm: Option<f64>,
    pub iterations: Option<usize>,
    pub residual_norm: f64,
    pub condition: f64,
    pub condition_flag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticEstimate {
    pub coefficients: DenseVector,
    pub diagnostics: Diagnostics,
}

impl AnalyticEstimate {
    pub fn base_params(&self) -> Result<BaseParams> {
        let a: [f64; 4] = self
            .coefficients
            .to_vec()
            .try_into()
            .map_err(|_| Error::Dimension("base parameters need 4 coefficients".into()))?;
        Ok(BaseParams(a))
    }
}

/// `(WᵀW)⁻¹ Wᵀ τ`.
pub fn ls_solve(o: &Observation) -> Result<AnalyticEstimate> {
    let gram = o.w.gram();
    let rhs = o.w.tr_mul_vec(&o.tau)?;
    let rank_deficient = |condition: f64| {
        let eig = symmetric_eigen(&gram).expect("Gram matrix is symmetric");
        Error::RankDeficient { combination: eig.vectors.column(0), condition }
    };
    let sol = match solve_linear(&gram, &rhs, DEFAULT_CONDITION_CAP) {
        Ok(s) if !s.ill_conditioned => s,
        Ok(s) => return Err(rank_deficient(s.condition)),
        Err(Error::Singular { condition }) => return Err(rank_deficient(condition)),
        Err(e) => return Err(e),
    };
    let residual_norm = o.residual_norm(&sol.x);
    Ok(AnalyticEstimate {
        diagnostics: Diagnostics {
            residual_norm,
            condition: sol.condition,
            condition_flag: false,
            ..Default::default()
        },
        coefficients: sol.x,
    })
}

/// `(WᵀW − σ²I)⁻¹ Wᵀ τ` with `σ` the smallest singular value of `[W | τ]`.
/// No regularization is applied, so noisy data can produce wild estimates;
/// those come back with `condition_flag` set once the shifted matrix passes
/// the condition cap.
pub fn tls_solve(o: &Observation) -> Result<AnalyticEstimate> {
    if o.w.rows() <= o.w.cols() + 1 {
        return Err(Error::Dimension(format!(
            "total least squares needs more than {} rows, got {}",
            o.w.cols() + 1,
            o.w.rows()
        )));
    }
    let sigma = smallest_singular_value(&o.w.append_column(&o.tau)?)?;
    tls_with_sigma(o, sigma)
}

pub(crate) fn tls_with_sigma(o: &Observation, sigma: f64) -> Result<AnalyticEstimate> {
    let shifted = o.w.gram().add_scaled_identity(-sigma * sigma)?;
    let rhs = o.w.tr_mul_vec(&o.tau)?;
    let sol = solve_linear(&shifted, &rhs, DEFAULT_CONDITION_CAP)?;
    let residual_norm = o.residual_norm(&sol.x);
    Ok(AnalyticEstimate {
        diagnostics: Diagnostics {
            sigma_min: Some(sigma),
            residual_norm,
            condition: sol.condition,
            condition_flag: sol.ill_conditioned,
            ..Default::default()
        },
        coefficients: sol.x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Fixed(f64),
    /// The smallest singular value of `[W | τ]`, i.e. the TLS perturbation.
    FromTls,
}

/// Worst-case residual `‖Wα − τ‖ + ρ·√(1 + ‖α‖²)`: the maximum of
/// `‖(W + ΔW)α − (τ + Δτ)‖` over `‖[ΔW | Δτ]‖_F ≤ ρ`.
pub fn robust_objective(o: &Observation, alpha: &[f64], rho: f64) -> f64 {
    o.residual_norm(alpha) + rho * (1.0 + alpha.iter().map(|a| a * a).sum::<f64>()).sqrt()
}

/// Minimizes [`robust_objective`].
///
/// Stationarity reads `(WᵀW + μI) α = Wᵀτ` with
/// `μ = ρ‖Wα − τ‖ / √(1 + ‖α‖²)`, so the minimizer is the ridge solution
/// whose shift solves the scalar equation `h(μ) = μ − ρ‖e(μ)‖/s(μ) = 0`.
/// `h(0) ≤ 0` and `h(ρ‖τ‖) ≥ 0`; the root is found by bisection to full
/// precision. The result is certified afterwards: by the gradient when the
/// residual is nonzero, otherwise by the subgradient condition at the kink.
pub fn rls_solve(o: &Observation, radius: Radius) -> Result<AnalyticEstimate> {
    let (rho, sigma) = match radius {
        Radius::Fixed(r) => (r, None),
        Radius::FromTls => {
            let s = smallest_singular_value(&o.w.append_column(&o.tau)?)?;
            (s, Some(s))
        }
    };
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::InvalidParameter(format!("perturbation radius {rho}")));
    }
    let gram = o.w.gram();
    let rhs = o.w.tr_mul_vec(&o.tau)?;
    let ridge = |mu: f64| -> Result<(Vec<f64>, f64)> {
        let sol = solve_linear(&gram.add_scaled_identity(mu)?, &rhs, DEFAULT_CONDITION_CAP)?;
        Ok((sol.x.into_inner(), sol.condition))
    };
    let h = |alpha: &[f64], mu: f64| {
        mu - rho * o.residual_norm(alpha) / (1.0 + alpha.iter().map(|a| a * a).sum::<f64>()).sqrt()
    };

    let (alpha0, cond0) = ridge(0.0)?;
    let mut iterations = 0;
    let (alpha, condition) = if rho == 0.0 || h(&alpha0, 0.0) >= 0.0 {
        (alpha0, cond0)
    } else {
        let mut lo = 0.0f64;
        let mut hi = rho * o.tau.norm();
        loop {
            if iterations >= RLS_MAX_ITERATIONS {
                let (last, _) = ridge(0.5 * (lo + hi))?;
                let gradient_norm = norm(&robust_gradient(o, &last, rho));
                return Err(Error::NoConvergence { iterations, last, gradient_norm });
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
            iterations += 1;
            let (a, _) = ridge(mid)?;
            if h(&a, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        ridge(0.5 * (lo + hi))?
    };

    let objective = robust_objective(o, &alpha, rho);
    let residual_norm = o.residual_norm(&alpha);
    let gradient_norm = norm(&robust_gradient(o, &alpha, rho));
    let at_kink = residual_norm <= 1e-10 * (1.0 + o.tau.norm());
    let certified = if at_kink {
        kink_certificate(o, &alpha, rho).is_some_and(|u| u <= 1.0 + 1e-9)
    } else {
        gradient_norm < 1e-9 * (1.0 + objective.abs())
    };
    if !certified {
        return Err(Error::NoConvergence { iterations, last: alpha, gradient_norm });
    }
    Ok(AnalyticEstimate {
        coefficients: DenseVector::new(alpha)?,
        diagnostics: Diagnostics {
            sigma_min: sigma,
            rho: Some(rho),
            objective: Some(objective),
            gradient_norm: Some(if at_kink { 0.0 } else { gradient_norm }),
            iterations: Some(iterations),
            residual_norm,
            condition,
            condition_flag: false,
        },
    })
}

/// Gradient of [`robust_objective`] where the residual is nonzero.
pub fn robust_gradient(o: &Observation, alpha: &[f64], rho: f64) -> Vec<f64> {
    let e = o.residual(alpha);
    let en = norm(&e);
    let s = (1.0 + alpha.iter().map(|a| a * a).sum::<f64>()).sqrt();
    let wte = o.w.tr_mul_vec(&e).expect("shapes agree");
    wte.iter()
        .zip(alpha)
        .map(|(g, a)| if en > 0.0 { -g / en } else { 0.0 } + rho * a / s)
        .collect()
}

/// Norm of the least-norm `u` with `Wᵀu = ρα/s`; zero lies in the
/// subdifferential at a zero-residual point iff this is at most 1.
fn kink_certificate(o: &Observation, alpha: &[f64], rho: f64) -> Option<f64> {
    let s = (1.0 + alpha.iter().map(|a| a * a).sum::<f64>()).sqrt();
    let target: Vec<f64> = alpha.iter().map(|a| rho * a / s).collect();
    let sol = solve_linear(&o.w.gram(), &target, DEFAULT_CONDITION_CAP).ok()?;
    Some(o.w.mul_vec(&sol.x).ok()?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Ls,
    Tls,
    Rls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnalyticMethod {
    pub solver: Solver,
    pub form: Form,
}

impl AnalyticMethod {
    pub const ALL: [AnalyticMethod; 6] = [
        AnalyticMethod { solver: Solver::Ls, form: Form::Absolute },
        AnalyticMethod { solver: Solver::Tls, form: Form::Absolute },
        AnalyticMethod { solver: Solver::Rls, form: Form::Absolute },
        AnalyticMethod { solver: Solver::Ls, form: Form::Relative },
        AnalyticMethod { solver: Solver::Tls, form: Form::Relative },
        AnalyticMethod { solver: Solver::Rls, form: Form::Relative },
    ];
}

impl fmt::Display for AnalyticMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.solver {
            Solver::Ls => "LS",
            Solver::Tls => "TLS",
            Solver::Rls => "RLS",
        };
        match self.form {
            Form::Absolute => write!(f, "{base}"),
            Form::Relative => write!(f, "{base}-rel"),
        }
    }
}

impl FromStr for AnalyticMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown analytic method '{s}'")))
    }
}

/// Result of one analytic estimation; failures are carried, not raised.
#[derive(Debug, Clone)]
pub struct AnalyticOutcome {
    pub method: AnalyticMethod,
    pub alpha: Option<BaseParams>,
    /// Extracted physical parameters, possibly non-physical.
    pub params: Option<RobotParams>,
    pub diagnostics: Option<Diagnostics>,
    pub error: Option<Error>,
    /// Wall-clock time of the solve and extraction.
    pub seconds: f64,
}

pub fn solve(method: AnalyticMethod, o: &Observation) -> Result<AnalyticEstimate> {
    match method.solver {
        Solver::Ls => ls_solve(o),
        Solver::Tls => tls_solve(o),
        Solver::Rls => rls_solve(o, Radius::FromTls),
    }
}

/// Builds the observation in the method's form, solves and extracts the
/// physical parameters.
pub fn estimate(method: AnalyticMethod, set: &SampleSet, g: GravityConstant) -> AnalyticOutcome {
    let absolute = build_observation(set, g);
    let observation = match method.form {
        Form::Absolute => Ok(absolute),
        Form::Relative => to_relative(&absolute),
    };
    let start = Instant::now();
    let solved = observation.and_then(|o| solve(method, &o));
    let (alpha, params, diagnostics, error) = match solved {
        Err(e) => (None, None, None, Some(e)),
        Ok(est) => {
            let alpha = est.base_params().expect("robot observations have 4 columns");
            match params_from_alpha(&alpha) {
                Ok(p) => (Some(alpha), Some(p), Some(est.diagnostics), None),
                Err(e) => (Some(alpha), None, Some(est.diagnostics), Some(e)),
            }
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    AnalyticOutcome { method, alpha, params, diagnostics, error, seconds }
}
