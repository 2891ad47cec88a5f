use super::matrix::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

/// Solves above this 1-norm condition estimate are flagged.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: DenseVector,
    /// `‖a‖₁ · ‖a⁻¹‖₁`.
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// LU factorization with partial pivoting, stored in place.
struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &DenseMatrix) -> Option<Self> {
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
                .expect("non-empty range");
            if lu[(pivot, k)] == 0.0 {
                return None;
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                perm.swap(k, pivot);
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Some(Self { lu, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    fn inverse_one_norm(&self) -> f64 {
        let n = self.lu.rows();
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.solve(&e).iter().map(|x| x.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Solves `a · x = b` for square `a`.
///
/// An exactly singular factorization is an error. Past `condition_cap` the
/// solution is still returned with `ill_conditioned` set, so callers can
/// report divergent estimates instead of dropping them.
pub fn solve_linear(a: &DenseMatrix, b: &[f64], condition_cap: f64) -> Result<LinearSolution> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "solve with {}x{} matrix and rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let lu = Lu::factor(a).ok_or(Error::Singular { condition: f64::INFINITY })?;
    let a_norm = super::induced_one_norm(a);
    let condition = a_norm * lu.inverse_one_norm();
    let x = lu.solve(b);
    if !condition.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { condition });
    }
    Ok(LinearSolution {
        x: DenseVector::new(x)?,
        condition,
        ill_conditioned: condition > condition_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn det(m: &[Vec<f64>]) -> f64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][j] * det(&minor)
            })
            .sum()
    }

    /// Cramer's rule with cofactor determinants.
    fn cramer(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.rows();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let d = det(&rows);
        (0..n)
            .map(|j| {
                let mut r = rows.clone();
                for i in 0..n {
                    r[i][j] = b[i];
                }
                det(&r) / d
            })
            .collect()
    }

    #[test]
    fn identity_and_diagonal() {
        let s = solve_linear(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0], DEFAULT_CONDITION_CAP)
            .unwrap();
        assert_eq!(&*s.x, &[1.0, 2.0, 3.0]);
        assert!(!s.ill_conditioned);
        let s = solve_linear(&DenseMatrix::diagonal(&[2.0, 4.0]), &[2.0, 8.0], DEFAULT_CONDITION_CAP)
            .unwrap();
        assert_eq!(&*s.x, &[1.0, 2.0]);
        assert_eq!(s.condition, 2.0);
    }

    #[test]
    fn random_spd_matches_cramer() {
        let mut rng = SeededRng::new(11);
        for _ in 0..50 {
            let b = DenseMatrix::from_fn(6, 4, |_, _| rng.uniform(-1.0, 1.0));
            let spd = b.gram().add_scaled_identity(0.1).unwrap();
            let rhs: Vec<f64> = (0..4).map(|_| rng.uniform(-5.0, 5.0)).collect();
            let got = solve_linear(&spd, &rhs, DEFAULT_CONDITION_CAP).unwrap();
            let want = cramer(&spd, &rhs);
            for (g, w) in got.x.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-10 * w.abs().max(1.0), "{g} vs {w}");
            }
            let r = spd.mul_vec(&got.x).unwrap();
            let res: f64 = r.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let bn: f64 = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(res <= 1e-8 * bn);
        }
    }

    #[test]
    fn singular_and_ill_conditioned() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(
            solve_linear(&a, &[1.0, 2.0], DEFAULT_CONDITION_CAP),
            Err(Error::Singular { .. })
        ));
        let a = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0 + 1e-14]]).unwrap();
        let s = solve_linear(&a, &[2.0, 2.0], DEFAULT_CONDITION_CAP).unwrap();
        assert!(s.ill_conditioned);
        assert!(s.condition > 1e12);
    }
}
