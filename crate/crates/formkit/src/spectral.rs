//! Dense complex spectral kernels: Hermitian eigendecomposition, SVD, polar
//! decomposition, PSD square roots, invertibility verdicts.
//!
//! Both decompositions are Jacobi-type: a cyclic two-sided Jacobi sweep for
//! Hermitian matrices and a one-sided (Hestenes) sweep for the SVD. Jacobi
//! converges quadratically and keeps unitarity of the accumulated factors at
//! the rounding level, which is what the reconstruction-residual contracts
//! below ask for. Sizes here stay in the low hundreds, so the O(n^3)-per-sweep
//! cost is irrelevant next to the accuracy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Tolerance knobs shared by every numeric operation. All verdicts are
/// relative: `rank_cutoff` is measured against the largest singular value and
/// `rel_tol` against the norm of the input.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rel_tol: f64,
    pub rank_cutoff: f64,
    pub cond_guard: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rel_tol: 1e-10,
            rank_cutoff: 1e-12,
            cond_guard: 1e8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.rel_tol) {
            return Err(Error::InvalidTolerance(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !in_unit(self.rank_cutoff) {
            return Err(Error::InvalidTolerance(format!(
                "rank_cutoff must lie in (0, 1), got {}",
                self.rank_cutoff
            )));
        }
        if self.cond_guard <= 1.0 || self.cond_guard.is_nan() {
            return Err(Error::InvalidTolerance(format!(
                "cond_guard must exceed 1, got {}",
                self.cond_guard
            )));
        }
        Ok(())
    }
}

/// Result of a polar decomposition `T = U * P`.
///
/// `isometry` vanishes on the kernel of the modulus, so `U* U` is the
/// orthogonal projection onto `range(P)` and `rank` counts the singular
/// values above the relative cutoff recorded in `tol_used`.
#[derive(Debug, Clone)]
pub struct PolarParts {
    pub isometry: ComplexMatrix,
    pub modulus: ComplexMatrix,
    pub rank: usize,
    pub tol_used: f64,
}

/// Invertibility verdict from singular values: invertible iff
/// `sigma_min > rank_cutoff * sigma_max`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvertibilityVerdict {
    pub invertible: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub condition_number: f64,
}

/// Full SVD `T = left * diag(singulars) * right^*` with unitary factors and
/// singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub left: ComplexMatrix,
    pub singulars: Vec<f64>,
    pub right: ComplexMatrix,
}

const MAX_SWEEPS: usize = 64;

/// 2x2 unitary annihilating the off-diagonal entry of the Hermitian block
/// [[app, g], [conj(g), aqq]]. Returns (c, s, w) for the rotation
/// J = [[c, s], [-s*conj(w), c*conj(w)]] with w = g/|g|, or None when the
/// entry is already negligible against the diagonal.
fn hermitian_rotation(app: f64, aqq: f64, g: Complex64) -> Option<(f64, f64, Complex64)> {
    let gabs = g.norm();
    if gabs == 0.0 {
        return None;
    }
    let tau = (aqq - app) / (2.0 * gabs);
    let denom = tau.abs() + (1.0 + tau * tau).sqrt();
    if !tau.is_finite() || !denom.is_finite() {
        // |g| is at rounding level relative to the diagonal gap; zeroing it
        // outright is backward stable and avoids a degenerate no-op rotation.
        return None;
    }
    let t = tau.signum() / denom;
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    Some((c, s, g / gabs))
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues sorted ascending and a unitary matrix of eigenvectors
/// (as columns), satisfying `A V = V diag(lambda)` at rounding level.
pub fn hermitian_eig(a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(Vec<f64>, ComplexMatrix)> {
    a.ensure_finite()?;
    a.ensure_square()?;
    let scale = a.norm_frobenius();
    let asym = a.asymmetry();
    if asym > tol.rel_tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            allowed: tol.rel_tol * scale,
        });
    }

    let n = a.rows();
    let mut m = a.symmetrize();
    let mut v = ComplexMatrix::identity(n);
    let target = (n as f64) * f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m[(p, q)];
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let Some((c, s, w)) = hermitian_rotation(app, aqq, g) else {
                    m[(p, q)] = Complex64::ZERO;
                    m[(q, p)] = Complex64::ZERO;
                    continue;
                };
                let t = s / c;
                let gabs = g.norm();
                // Diagonal update; off-diagonal (p, q) is annihilated exactly.
                m[(p, p)] = Complex64::new(app - t * gabs, 0.0);
                m[(q, q)] = Complex64::new(aqq + t * gabs, 0.0);
                m[(p, q)] = Complex64::ZERO;
                m[(q, p)] = Complex64::ZERO;
                let wc = w.conj();
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    let new_p = c * mkp - s * wc * mkq;
                    let new_q = s * mkp + c * wc * mkq;
                    m[(k, p)] = new_p;
                    m[(k, q)] = new_q;
                    m[(p, k)] = new_p.conj();
                    m[(q, k)] = new_q.conj();
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * wc * vkq;
                    v[(k, q)] = s * vkp + c * wc * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = v.permute_columns(&order);
    Ok((eigenvalues, eigenvectors))
}

/// One-sided (Hestenes) Jacobi SVD for an arbitrary complex matrix.
///
/// Columns of a working copy are rotated pairwise until mutually orthogonal;
/// the rotations accumulate into `right`, column norms become the singular
/// values, and `left` is completed to a full unitary basis on the kernel
/// directions.
pub fn svd(t: &ComplexMatrix) -> Result<Svd> {
    t.ensure_finite()?;
    if t.rows() < t.cols() {
        // Work on the adjoint and swap the factors back.
        let s = svd(&t.adjoint())?;
        return Ok(Svd {
            left: s.right,
            singulars: s.singulars,
            right: s.left,
        });
    }

    let m = t.rows();
    let n = t.cols();
    let mut a = t.clone();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = Complex64::ZERO;
                for i in 0..m {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    alpha += aip.norm_sqr();
                    beta += aiq.norm_sqr();
                    gamma += aip.conj() * aiq;
                }
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                let Some((c, s, w)) = hermitian_rotation(alpha, beta, gamma) else {
                    continue;
                };
                rotated = true;
                let wc = w.conj();
                for i in 0..m {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * wc * aiq;
                    a[(i, q)] = s * aip + c * wc * aiq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * wc * vkq;
                    v[(k, q)] = s * vkp + c * wc * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    a = a.permute_columns(&order);
    let right = v.permute_columns(&order);
    norms = order.iter().map(|&i| norms[i]).collect();

    // Normalize the well-scaled columns of the rotated copy into `left`, and
    // complete an orthonormal basis where the column collapsed.
    let sigma_max = norms.first().copied().unwrap_or(0.0);
    let drop = sigma_max * (m as f64) * f64::EPSILON;
    let mut left = ComplexMatrix::zeros(m, m);
    let mut good = Vec::with_capacity(m);
    for j in 0..n {
        if norms[j] > drop && norms[j] > 0.0 {
            let col: Vec<Complex64> = (0..m).map(|i| a[(i, j)] / norms[j]).collect();
            left.set_column(j, &col);
            good.push(j);
        }
    }
    for j in 0..m {
        if good.contains(&j) {
            continue;
        }
        // Orthogonalize canonical basis vectors against the accepted columns.
        'candidates: for k in 0..m {
            let mut cand: Vec<Complex64> = vec![Complex64::ZERO; m];
            cand[k] = Complex64::ONE;
            for &g in &good {
                let col = left.column(g);
                let proj = crate::matrix::inner(&cand, &col);
                for i in 0..m {
                    cand[i] -= proj * col[i];
                }
            }
            let norm = crate::matrix::vec_norm(&cand);
            if norm > 0.5 {
                for x in &mut cand {
                    *x /= norm;
                }
                left.set_column(j, &cand);
                good.push(j);
                break 'candidates;
            }
        }
    }

    Ok(Svd {
        left,
        singulars: norms,
        right,
    })
}

/// Largest singular value.
pub fn operator_norm(t: &ComplexMatrix) -> Result<f64> {
    Ok(svd(t)?.singulars.first().copied().unwrap_or(0.0))
}

/// Polar decomposition `T = U |T|` of a square matrix.
///
/// `|T| = V Sigma V*` from the SVD, and the partial isometry
/// `U = sum_{sigma_j > cutoff} w_j v_j*` is zero on `ker |T|`.
pub fn polar(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<PolarParts> {
    t.ensure_square()?;
    let n = t.rows();
    let Svd {
        left,
        singulars,
        right,
    } = svd(t)?;

    let sigma_max = singulars.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_cutoff * sigma_max;

    let mut modulus = ComplexMatrix::zeros(n, n);
    let mut isometry = ComplexMatrix::zeros(n, n);
    let mut rank = 0;
    for (j, &sigma) in singulars.iter().enumerate() {
        let vj = right.column(j);
        for r in 0..n {
            for c in 0..n {
                modulus[(r, c)] += sigma * vj[r] * vj[c].conj();
            }
        }
        if sigma > cutoff && sigma > 0.0 {
            rank += 1;
            let wj = left.column(j);
            for r in 0..n {
                for c in 0..n {
                    isometry[(r, c)] += wj[r] * vj[c].conj();
                }
            }
        }
    }

    Ok(PolarParts {
        isometry,
        modulus,
        rank,
        tol_used: cutoff,
    })
}

/// Hermitian PSD square root. Eigenvalues in `[-rel_tol * ||P||, 0)` are
/// treated as rounding noise and clamped to zero; anything more negative is a
/// genuine indefiniteness and rejected.
pub fn sqrt_psd(p: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let (eigenvalues, v) = hermitian_eig(p, tol)?;
    let scale = p.norm_frobenius();
    let allowed = tol.rel_tol * scale.max(f64::MIN_POSITIVE);
    if let Some(&lambda_min) = eigenvalues.first() {
        if lambda_min < -allowed {
            return Err(Error::NotPsd {
                eigenvalue: lambda_min,
                allowed,
            });
        }
    }
    let roots: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(hermitian_from_eig(&roots, &v))
}

/// Rebuilds `V diag(values) V*` for a unitary `V` and real `values`.
pub(crate) fn hermitian_from_eig(values: &[f64], v: &ComplexMatrix) -> ComplexMatrix {
    let n = v.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, &val) in values.iter().enumerate() {
        if val == 0.0 {
            continue;
        }
        let col = v.column(j);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += val * col[r] * col[c].conj();
            }
        }
    }
    out
}

/// `|T|^(1/2)`: the PSD square root of the polar modulus.
pub fn modulus_half(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let parts = polar(t, tol)?;
    sqrt_psd(&parts.modulus, tol)
}

/// Singular-value verdict on invertibility with a relative rank cutoff.
pub fn is_invertible(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<InvertibilityVerdict> {
    t.ensure_square()?;
    let singulars = svd(t)?.singulars;
    let sigma_max = singulars.first().copied().unwrap_or(0.0);
    let sigma_min = singulars.last().copied().unwrap_or(0.0);
    let invertible = sigma_min > tol.rank_cutoff * sigma_max;
    let condition_number = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    Ok(InvertibilityVerdict {
        invertible,
        sigma_min,
        sigma_max,
        condition_number,
    })
}

/// Residual of the intertwining identity `|T*|^(1/2) U = U |T|^(1/2)` where
/// `T = U |T|` is the polar decomposition. The identity holds for every
/// square matrix, so the returned value is rounding noise unless something is
/// wrong with the decomposition.
pub fn intertwine_check(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<f64> {
    let parts = polar(t, tol)?;
    let mod_half = sqrt_psd(&parts.modulus, tol)?;
    let adj_parts = polar(&t.adjoint(), tol)?;
    let adj_mod_half = sqrt_psd(&adj_parts.modulus, tol)?;
    let lhs = adj_mod_half.mul(&parts.isometry);
    let rhs = parts.isometry.mul(&mod_half);
    Ok(lhs.sub(&rhs).norm_frobenius())
}
