use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::relative_denominators;
use crate::numerics::{
    frobenius_norm, induced_inf_norm, induced_one_norm, max_abs_entry, max_row_sumsq,
    spectral_norm, DenseMatrix,
};
use crate::robot::{inverse_dynamics, GravityConstant, RobotParams};
use crate::sampling::{Sample, SampleSet};

/// Cost function index 1..=16. Ids 1–8 act on the absolute error matrix,
/// 9–16 apply the same eight measures to the relative error matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CostId(u8);

impl CostId {
    pub fn new(index: u8) -> Result<Self> {
        if (1..=16).contains(&index) {
            Ok(Self(index))
        } else {
            Err(Error::InvalidParameter(format!("cost id {index} outside 1..=16")))
        }
    }

    pub fn all() -> impl Iterator<Item = CostId> {
        (1..=16).map(CostId)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn is_relative(self) -> bool {
        self.0 > 8
    }

    /// Position 1..=8 of the measure within its family.
    pub fn measure(self) -> u8 {
        (self.0 - 1) % 8 + 1
    }
}

impl fmt::Display for CostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

impl FromStr for CostId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim().trim_start_matches(['f', 'F']);
        let n: u8 = digits.parse().map_err(|_| Error::Parse(format!("cost id '{s}'")))?;
        Self::new(n)
    }
}

/// The eight measures on an error matrix.
pub fn matrix_cost(measure: u8, e: &DenseMatrix) -> f64 {
    match measure {
        1 => frobenius_norm(e),
        2 => spectral_norm(e),
        3 => induced_one_norm(e),
        4 => induced_inf_norm(e),
        5 => induced_one_norm(e) * induced_inf_norm(e),
        6 => induced_one_norm(e) * spectral_norm(e) * induced_inf_norm(e),
        7 => max_row_sumsq(e),
        8 => max_abs_entry(e),
        _ => panic!("measure {measure} outside 1..=8"),
    }
}

fn residual_matrix(p: &RobotParams, samples: &[Sample], g: GravityConstant, den: Option<&[f64]>) -> DenseMatrix {
    let n = samples.len();
    let mut e = DenseMatrix::zeros(3, n);
    for (i, s) in samples.iter().enumerate() {
        let predicted = inverse_dynamics(p, &s.state, g);
        for j in 0..3 {
            let diff = s.torque[j] - predicted[j];
            e[(j, i)] = match den {
                Some(d) => diff / d[3 * i + j],
                None => diff,
            };
        }
    }
    e
}

/// `E`: column `i` is `τ₍ᵢ₎ − τ̂₍ᵢ₎`.
pub fn error_matrix(p: &RobotParams, set: &SampleSet, g: GravityConstant) -> DenseMatrix {
    residual_matrix(p, set.samples(), g, None)
}

/// Entrywise `(T − T̂)/T` with the clamped denominators of the relative
/// observation.
pub fn relative_error_matrix(p: &RobotParams, set: &SampleSet, g: GravityConstant) -> Result<DenseMatrix> {
    let (den, _) = relative_denominators(&stacked_torques(set.samples()))?;
    Ok(residual_matrix(p, set.samples(), g, Some(&den)))
}

fn stacked_torques(samples: &[Sample]) -> Vec<f64> {
    samples.iter().flat_map(|s| s.torque).collect()
}

pub fn cost(id: CostId, p: &RobotParams, set: &SampleSet, g: GravityConstant) -> Result<f64> {
    Ok(CostFunction::new(id, set, g)?.eval(p))
}

/// A cost bound to one data set, with the relative denominators computed
/// once.
#[derive(Debug, Clone)]
pub struct CostFunction<'a> {
    id: CostId,
    samples: &'a [Sample],
    g: GravityConstant,
    denominators: Option<Vec<f64>>,
}

impl<'a> CostFunction<'a> {
    pub fn new(id: CostId, set: &'a SampleSet, g: GravityConstant) -> Result<Self> {
        let denominators = if id.is_relative() {
            Some(relative_denominators(&stacked_torques(set.samples()))?.0)
        } else {
            None
        };
        Ok(Self { id, samples: set.samples(), g, denominators })
    }

    pub fn id(&self) -> CostId {
        self.id
    }

    pub fn error_matrix(&self, p: &RobotParams) -> DenseMatrix {
        residual_matrix(p, self.samples, self.g, self.denominators.as_deref())
    }

    pub fn eval(&self, p: &RobotParams) -> f64 {
        matrix_cost(self.id.measure(), &self.error_matrix(p))
    }
}
