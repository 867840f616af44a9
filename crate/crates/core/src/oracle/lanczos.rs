//! Lanczos iteration with full reorthogonalisation, for the few eigenvalues of
//! a large symmetric operator that lie outside a given window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A symmetric linear operator given by its action.
pub trait SymOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub max_steps: usize,
    /// Ritz values are examined every this many steps.
    pub check_every: usize,
    /// A Ritz pair is accepted once its residual is below `tol * max(1, |θ|)`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_steps: 800,
            check_every: 20,
            tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RitzPair {
    pub value: f64,
    /// `|A v - θ v|` for the unit Ritz vector.
    pub residual: f64,
    pub vector: Option<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Eigenpairs of the tridiagonal matrix with diagonal `alpha` and
/// off-diagonal `beta`: values ascending, and the last component of each
/// normalised eigenvector together with the full vector.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, faer::Mat<f64>)> {
    let m = alpha.len();
    let t = faer::Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..m).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// What to do after inspecting the current Ritz values.
enum Decision {
    Continue,
    /// Return these Ritz pairs.
    Done(Vec<usize>),
}

/// Run the iteration, calling `decide(values, residuals, exhausted)` every
/// `check_every` steps. Values are ascending; `exhausted` means the Krylov
/// space cannot grow further (residuals are then exact).
fn drive<F>(
    op: &dyn SymOperator,
    opts: &LanczosOptions,
    want_vectors: bool,
    mut decide: F,
) -> Result<Vec<RitzPair>>
where
    F: FnMut(&[f64], &[f64], bool) -> Result<Decision>,
{
    let n = op.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let steps = opts.max_steps.min(n);

    loop {
        let j = alpha.len();
        op.apply(&basis[j], &mut w);
        alpha.push(dot(&basis[j], &w));
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
        }
        let b = dot(&w, &w).sqrt();
        let scale = alpha.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let invariant = b <= 1e-13 * scale;
        let exhausted = invariant || alpha.len() == steps;

        if exhausted || alpha.len().is_multiple_of(opts.check_every) {
            let (values, vecs) = tridiagonal_eigen(&alpha, &beta)?;
            let m = alpha.len();
            let residuals: Vec<f64> = (0..m)
                .map(|i| {
                    if invariant {
                        0.0
                    } else {
                        (b * vecs[(m - 1, i)]).abs()
                    }
                })
                .collect();
            match decide(&values, &residuals, exhausted)? {
                Decision::Done(idx) => {
                    return Ok(idx
                        .into_iter()
                        .map(|i| RitzPair {
                            value: values[i],
                            residual: residuals[i],
                            vector: want_vectors.then(|| {
                                let mut v = vec![0.0; n];
                                for (k, qk) in basis.iter().take(m).enumerate() {
                                    axpy(vecs[(k, i)], qk, &mut v);
                                }
                                v
                            }),
                        })
                        .collect())
                }
                Decision::Continue if exhausted => {
                    return Err(Error::Eigensolver(format!(
                        "Lanczos did not converge in {m} steps"
                    )))
                }
                Decision::Continue => {}
            }
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
}

fn converged(theta: f64, residual: f64, tol: f64) -> bool {
    residual <= tol * theta.abs().max(1.0)
}

/// Eigenvalues of `op` strictly below `lo` or strictly above `hi`, ascending.
///
/// The iteration stops once every Ritz value outside `[lo, hi]` has converged
/// and their number has not changed since the previous check.
pub fn eigenvalues_outside(
    op: &dyn SymOperator,
    lo: f64,
    hi: f64,
    opts: &LanczosOptions,
    want_vectors: bool,
) -> Result<Vec<RitzPair>> {
    let mut last_count = usize::MAX;
    drive(op, opts, want_vectors, |values, residuals, exhausted| {
        let outside: Vec<usize> = (0..values.len())
            .filter(|&i| values[i] < lo || values[i] > hi)
            .collect();
        let ok = outside
            .iter()
            .all(|&i| converged(values[i], residuals[i], opts.tol));
        if ok && (exhausted || outside.len() == last_count) {
            return Ok(Decision::Done(outside));
        }
        last_count = if ok { outside.len() } else { usize::MAX };
        Ok(Decision::Continue)
    })
}

/// The smallest and the largest eigenvalue of `op`.
pub fn extreme_eigenvalues(op: &dyn SymOperator, opts: &LanczosOptions) -> Result<(f64, f64)> {
    let pairs = drive(op, opts, false, |values, residuals, _| {
        let last = values.len() - 1;
        if converged(values[0], residuals[0], opts.tol)
            && converged(values[last], residuals[last], opts.tol)
        {
            Ok(Decision::Done(vec![0, last]))
        } else {
            Ok(Decision::Continue)
        }
    })?;
    Ok((pairs[0].value, pairs[pairs.len() - 1].value))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);

    impl SymOperator for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
    }

    #[test]
    fn finds_isolated_extremes_of_a_diagonal() {
        let mut d: Vec<f64> = (0..500).map(|i| i as f64 / 499.0).collect();
        d.push(-3.0);
        d.push(-2.5);
        d.push(4.0);
        let r =
            eigenvalues_outside(&Diag(d), -0.01, 1.01, &LanczosOptions::default(), true).unwrap();
        let v: Vec<f64> = r.iter().map(|p| p.value).collect();
        assert_eq!(v.len(), 3);
        assert!(
            (v[0] + 3.0).abs() < 1e-10 && (v[1] + 2.5).abs() < 1e-10 && (v[2] - 4.0).abs() < 1e-10
        );
        let x = r[2].vector.as_ref().unwrap();
        assert!((x[502].abs() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn extremes_of_a_diagonal() {
        let d: Vec<f64> = (0..300).map(|i| (i as f64 * 0.37).sin()).collect();
        let (lo, hi) = extreme_eigenvalues(&Diag(d.clone()), &LanczosOptions::default()).unwrap();
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo - min).abs() < 1e-9 && (hi - max).abs() < 1e-9);
    }

    #[test]
    fn small_operator_is_solved_exactly() {
        let r = eigenvalues_outside(
            &Diag(vec![1.0, 5.0, -2.0]),
            0.0,
            2.0,
            &LanczosOptions::default(),
            false,
        )
        .unwrap();
        let v: Vec<f64> = r.iter().map(|p| p.value).collect();
        assert_eq!(v.len(), 2);
        assert!((v[0] + 2.0).abs() < 1e-12 && (v[1] - 5.0).abs() < 1e-12);
    }
}
