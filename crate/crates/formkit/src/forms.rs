//! Finite-dimensional sesquilinear forms and their representation theory.
//!
//! A form is carried by its gram matrix `A` in the standard orthonormal
//! basis, `form(xi, eta) = <A xi, eta>` with the second slot conjugated. In
//! finite dimension the domain is the whole space, every bounded form is
//! q-closed with respect to any metric, and the associated operator *is* the
//! gram matrix; the operations below verify exactly the identities that
//! survive this collapse:
//!
//! * the Radon-Nikodym-like representation `form = <Q H ., H .>` with
//!   `T = H Q H` and its adjoint `Q*` variant;
//! * the solvability equivalence between bijectivity of `Q + H^-1 B H^-1`
//!   and invertibility of `T + B`;
//! * the second-representation factorizations through `U |T|^1/2`,
//!   `|T*|^1/2 U`, `W |T|^1/2`, and `V |T+B|^1/2`;
//! * the inverse construction recovering a form from `(T, B)`;
//! * graph-norm equivalence constants for `|T|^1/2` vs `|T+B|^1/2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{inner, ComplexMatrix};
use crate::spectral::{
    self, hermitian_from_eig, InvertibilityVerdict, PolarParts, ToleranceConfig,
};

/// Sesquilinear form on C^dim: `form(xi, eta) = <gram xi, eta>`.
#[derive(Debug, Clone)]
pub struct FiniteForm {
    gram: ComplexMatrix,
}

impl FiniteForm {
    pub fn new(gram: ComplexMatrix) -> Result<Self> {
        gram.ensure_finite()?;
        gram.ensure_square()?;
        Ok(FiniteForm { gram })
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn is_symmetric(&self, tol: &ToleranceConfig) -> bool {
        self.gram.is_hermitian(tol.rel_tol)
    }
}

/// Hermitian positive definite metric with its eigendecomposition cached,
/// encoding "0 in the resolvent set of H" as a relative singular-value check.
#[derive(Debug, Clone)]
pub struct MetricOperator {
    h: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl MetricOperator {
    pub fn new(h: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let (eigenvalues, eigenvectors) = spectral::hermitian_eig(&h, tol)?;
        let lambda_min = eigenvalues.first().copied().unwrap_or(0.0);
        let lambda_max = eigenvalues.last().copied().unwrap_or(0.0);
        if lambda_min <= tol.rank_cutoff * lambda_max.abs() || lambda_min <= 0.0 {
            return Err(Error::MetricSingular {
                sigma_min: lambda_min,
                cutoff: tol.rank_cutoff * lambda_max.abs(),
            });
        }
        Ok(MetricOperator {
            h,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn identity(dim: usize) -> Self {
        MetricOperator {
            h: ComplexMatrix::identity(dim),
            eigenvalues: vec![1.0; dim],
            eigenvectors: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn sigma_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn sigma_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn condition_number(&self) -> f64 {
        self.sigma_max() / self.sigma_min()
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let inv: Vec<f64> = self.eigenvalues.iter().map(|l| 1.0 / l).collect();
        hermitian_from_eig(&inv, &self.eigenvectors)
    }
}

/// Radon-Nikodym-like representation `form(xi, eta) = <Q H xi, H eta>`.
#[derive(Debug, Clone)]
pub struct RNRepresentation {
    pub q: ComplexMatrix,
    pub metric: MetricOperator,
}

/// Both solvability verdicts and their required agreement.
#[derive(Debug, Clone)]
pub struct SolvabilityVerdict {
    pub q_b: ComplexMatrix,
    pub bijection: InvertibilityVerdict,
    pub t_plus_b: ComplexMatrix,
    pub resolvent_zero: InvertibilityVerdict,
    pub agree: bool,
}

fn ensure_vector_dim(dim: usize, v: &[Complex64]) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: format!("vector of length {dim}"),
            found: format!("length {}", v.len()),
        });
    }
    Ok(())
}

fn ensure_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.rows(), a.cols()),
            found: format!("{}x{}", b.rows(), b.cols()),
        });
    }
    Ok(())
}

/// `form(xi, eta) = <A xi, eta>`, conjugating the second argument.
pub fn eval_form(f: &FiniteForm, xi: &[Complex64], eta: &[Complex64]) -> Result<Complex64> {
    ensure_vector_dim(f.dim(), xi)?;
    ensure_vector_dim(f.dim(), eta)?;
    Ok(inner(&f.gram.matvec(xi), eta))
}

/// Adjoint form `form*(xi, eta) = conj(form(eta, xi))`, carried by `A*`.
pub fn adjoint_form(f: &FiniteForm) -> FiniteForm {
    FiniteForm {
        gram: f.gram.adjoint(),
    }
}

/// Extracts the unique bounded `Q = H^-1 A H^-1` realizing the form against
/// the given metric. Refuses when `cond(H)^2` exceeds the guard, since the
/// sandwich would lose more digits than the reconstruction contract allows.
pub fn rn_extract(
    f: &FiniteForm,
    metric: &MetricOperator,
    tol: &ToleranceConfig,
) -> Result<RNRepresentation> {
    ensure_same_dim(&f.gram, metric.matrix())?;
    let cond = metric.condition_number();
    let cond_squared = cond * cond;
    if cond_squared > tol.cond_guard {
        return Err(Error::ConditionGuard {
            cond_squared,
            guard: tol.cond_guard,
        });
    }
    let h_inv = metric.inverse();
    let q = h_inv.mul(&f.gram).mul(&h_inv);
    Ok(RNRepresentation {
        q,
        metric: metric.clone(),
    })
}

/// Associated operator `T = H Q H` of a representation.
pub fn associated_operator(rep: &RNRepresentation) -> ComplexMatrix {
    let h = rep.metric.matrix();
    h.mul(&rep.q).mul(h)
}

/// Two-metric associated operator `T = H2 Q H1`.
pub fn associated_operator_two_metrics(
    q: &ComplexMatrix,
    m1: &MetricOperator,
    m2: &MetricOperator,
) -> Result<ComplexMatrix> {
    ensure_same_dim(q, m1.matrix())?;
    ensure_same_dim(q, m2.matrix())?;
    Ok(m2.matrix().mul(q).mul(m1.matrix()))
}

/// Checks the two equivalent solvability criteria for a bounded perturbation
/// `B`: bijectivity of `Q_B = Q + H^-1 B H^-1` and invertibility of `T + B`.
/// They are mathematically equivalent (`T + B = H Q_B H`), so a disagreement
/// is always a conditioning problem and is reported as an error carrying both
/// singular-value witnesses rather than returned as a verdict.
pub fn solvability_check(
    rep: &RNRepresentation,
    b: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<SolvabilityVerdict> {
    ensure_same_dim(&rep.q, b)?;
    let h = rep.metric.matrix();
    let h_inv = rep.metric.inverse();
    let q_b = rep.q.add(&h_inv.mul(b).mul(&h_inv));
    let bijection = spectral::is_invertible(&q_b, tol)?;
    let t_plus_b = h.mul(&rep.q).mul(h).add(b);
    let resolvent_zero = spectral::is_invertible(&t_plus_b, tol)?;
    if bijection.invertible != resolvent_zero.invertible {
        return Err(Error::InternalInconsistency {
            sigma_min_qb: bijection.sigma_min,
            sigma_min_tb: resolvent_zero.sigma_min,
        });
    }
    Ok(SolvabilityVerdict {
        q_b,
        bijection,
        t_plus_b,
        resolvent_zero,
        agree: true,
    })
}

/// Largest semiboundedness constant of a symmetric form: the smallest
/// eigenvalue of its (Hermitian) gram matrix.
pub fn semibounded_gamma(f: &FiniteForm, tol: &ToleranceConfig) -> Result<f64> {
    match spectral::hermitian_eig(&f.gram, tol) {
        Ok((eigenvalues, _)) => Ok(eigenvalues[0]),
        Err(Error::NotHermitian { asymmetry, .. }) => Err(Error::NotSymmetric { asymmetry }),
        Err(e) => Err(e),
    }
}

/// Residuals of the two second-representation factorizations of `T`:
/// `r1 = ||(|T*|^1/2) U (|T|^1/2) - T||` and
/// `r2 = ||(|T*|^1/2) ((|T*|^1/2) U) - T||`.
pub fn second_rep_check(f: &FiniteForm, tol: &ToleranceConfig) -> Result<(f64, f64)> {
    let t = &f.gram;
    let PolarParts {
        isometry, modulus, ..
    } = spectral::polar(t, tol)?;
    let mod_half = spectral::sqrt_psd(&modulus, tol)?;
    let adj_modulus = spectral::polar(&t.adjoint(), tol)?.modulus;
    let adj_mod_half = spectral::sqrt_psd(&adj_modulus, tol)?;

    let r1 = adj_mod_half
        .mul(&isometry)
        .mul(&mod_half)
        .sub(t)
        .norm_frobenius();
    let r2 = adj_mod_half
        .mul(&adj_mod_half.mul(&isometry))
        .sub(t)
        .norm_frobenius();
    Ok((r1, r2))
}

/// `M^p` for Hermitian positive definite `M` via its eigendecomposition.
fn hermitian_power(m: &ComplexMatrix, p: f64, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let (eigenvalues, v) = spectral::hermitian_eig(m, tol)?;
    let lambda_min = eigenvalues.first().copied().unwrap_or(0.0);
    let lambda_max = eigenvalues.last().copied().unwrap_or(0.0);
    if p < 0.0 && lambda_min <= tol.rank_cutoff * lambda_max.abs() {
        return Err(Error::NotInvertible {
            sigma_min: lambda_min,
            cutoff: tol.rank_cutoff * lambda_max.abs(),
        });
    }
    let powered: Vec<f64> = eigenvalues.iter().map(|l| l.max(0.0).powf(p)).collect();
    Ok(hermitian_from_eig(&powered, &v))
}

/// The unique bijection `W = |T|^-1/2 T |T|^-1/2` with
/// `form(xi, eta) = <W |T|^1/2 xi, |T|^1/2 eta>`, defined for invertible `T`.
pub fn second_rep_w(t: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let verdict = spectral::is_invertible(t, tol)?;
    if !verdict.invertible {
        return Err(Error::NotInvertible {
            sigma_min: verdict.sigma_min,
            cutoff: tol.rank_cutoff * verdict.sigma_max,
        });
    }
    let modulus = spectral::polar(t, tol)?.modulus;
    let inv_half = hermitian_power(&modulus, -0.5, tol)?;
    Ok(inv_half.mul(t).mul(&inv_half))
}

/// The unique bounded `V = |T+B|^-1/2 T |T+B|^-1/2` with
/// `form(xi, eta) = <V |T+B|^1/2 xi, |T+B|^1/2 eta>`; requires `T + B`
/// invertible, i.e. `B` must witness solvability for this `T`.
pub fn second_rep_v(
    t: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    ensure_same_dim(t, b)?;
    let shifted = t.add(b);
    let verdict = spectral::is_invertible(&shifted, tol)?;
    if !verdict.invertible {
        return Err(Error::NotInvertible {
            sigma_min: verdict.sigma_min,
            cutoff: tol.rank_cutoff * verdict.sigma_max,
        });
    }
    let modulus = spectral::polar(&shifted, tol)?.modulus;
    let inv_half = hermitian_power(&modulus, -0.5, tol)?;
    Ok(inv_half.mul(t).mul(&inv_half))
}

/// Inverse construction: the unique form with associated operator `T`, built
/// from a perturbation `B` with `T + B` invertible as
/// `gram = |T*+B*|^1/2 U_B |T+B|^1/2 - B`. In finite dimension the result
/// must reproduce `T` itself, which is the correspondence round-trip.
pub fn form_from_operator(
    t: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<FiniteForm> {
    ensure_same_dim(t, b)?;
    let shifted = t.add(b);
    let verdict = spectral::is_invertible(&shifted, tol)?;
    if !verdict.invertible {
        return Err(Error::NotInvertible {
            sigma_min: verdict.sigma_min,
            cutoff: tol.rank_cutoff * verdict.sigma_max,
        });
    }
    let parts = spectral::polar(&shifted, tol)?;
    let right_half = spectral::sqrt_psd(&parts.modulus, tol)?;
    let adj_modulus = spectral::polar(&shifted.adjoint(), tol)?.modulus;
    let left_half = spectral::sqrt_psd(&adj_modulus, tol)?;
    let gram_b = left_half.mul(&parts.isometry).mul(&right_half);
    FiniteForm::new(gram_b.sub(b))
}

/// Adjoint representation `(Q*, H)`; its associated operator is `(H Q H)*`.
pub fn adjoint_rep(rep: &RNRepresentation) -> RNRepresentation {
    RNRepresentation {
        q: rep.q.adjoint(),
        metric: rep.metric.clone(),
    }
}

/// Equivalence constants between the graph norms of `|T|^1/2` and
/// `|T+B|^1/2`: the extreme generalized eigenvalues of the pencil
/// `(I + |T+B|, I + |T|)`, so that for every vector
/// `c_low <= (||xi||^2 + |||T+B|^1/2 xi||^2) / (||xi||^2 + |||T|^1/2 xi||^2) <= c_high`.
pub fn heinz_constants(
    t: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<(f64, f64)> {
    ensure_same_dim(t, b)?;
    let n = t.rows();
    let id = ComplexMatrix::identity(n);
    let lhs = id.add(&spectral::polar(&t.add(b), tol)?.modulus);
    let rhs = id.add(&spectral::polar(t, tol)?.modulus);
    // Both pencil sides are Hermitian with spectrum >= 1, so the reduction
    // M = rhs^-1/2 lhs rhs^-1/2 is well conditioned.
    let rhs_inv_half = hermitian_power(&rhs, -0.5, tol)?;
    let m = rhs_inv_half.mul(&lhs).mul(&rhs_inv_half).symmetrize();
    let (eigenvalues, _) = spectral::hermitian_eig(&m, tol)?;
    Ok((eigenvalues[0], eigenvalues[eigenvalues.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{
        random_matrix, random_metric, random_vector, rank_deficient_matrix, rng_from_seed,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn e(dim: usize, k: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; dim];
        v[k] = Complex64::ONE;
        v
    }

    #[test]
    fn eval_form_basics() {
        let f = FiniteForm::new(ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eval_form(&f, &e(2, 0), &e(2, 0)).unwrap(), c(1.0, 0.0));
        let f = FiniteForm::new(ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(eval_form(&f, &e(2, 0), &e(2, 0)).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn eval_form_matches_double_loop_oracle() {
        let mut rng = rng_from_seed(101);
        let a = random_matrix(&mut rng, 4);
        let f = FiniteForm::new(a.clone()).unwrap();
        let xi = random_vector(&mut rng, 4);
        let eta = random_vector(&mut rng, 4);
        let mut expected = Complex64::ZERO;
        for j in 0..4 {
            for k in 0..4 {
                expected += a[(j, k)] * xi[k] * eta[j].conj();
            }
        }
        let got = eval_form(&f, &xi, &eta).unwrap();
        assert!((got - expected).norm() < 1e-12);
    }

    #[test]
    fn eval_form_dimension_mismatch() {
        let f = FiniteForm::new(ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(
            eval_form(&f, &e(3, 0), &e(2, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn adjoint_form_involution_and_oracle() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let f = FiniteForm::new(a).unwrap();
        let adj = adjoint_form(&f);
        assert_eq!(adj.gram()[(1, 0)], c(1.0, 0.0));
        assert_eq!(adj.gram()[(0, 1)], c(0.0, 0.0));
        let again = adjoint_form(&adj);
        assert_eq!(again.gram(), f.gram());

        let mut rng = rng_from_seed(103);
        let f = FiniteForm::new(random_matrix(&mut rng, 3)).unwrap();
        let adj = adjoint_form(&f);
        for _ in 0..8 {
            let xi = random_vector(&mut rng, 3);
            let eta = random_vector(&mut rng, 3);
            let lhs = eval_form(&adj, &xi, &eta).unwrap();
            let rhs = eval_form(&f, &eta, &xi).unwrap().conj();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn rn_extract_trivial_and_diagonal() {
        let f = FiniteForm::new(ComplexMatrix::identity(2)).unwrap();
        let m = MetricOperator::identity(2);
        let rep = rn_extract(&f, &m, &tol()).unwrap();
        assert!(rep.q.sub(&ComplexMatrix::identity(2)).norm_frobenius() < 1e-14);

        let f = FiniteForm::new(ComplexMatrix::from_real_diag(&[4.0, 9.0])).unwrap();
        let m = MetricOperator::new(ComplexMatrix::from_real_diag(&[2.0, 3.0]), &tol()).unwrap();
        let rep = rn_extract(&f, &m, &tol()).unwrap();
        assert!(rep.q.sub(&ComplexMatrix::identity(2)).norm_frobenius() < 1e-13);
    }

    #[test]
    fn rn_round_trip_random() {
        let mut rng = rng_from_seed(107);
        let a = random_matrix(&mut rng, 5);
        let f = FiniteForm::new(a.clone()).unwrap();
        let m = MetricOperator::new(random_metric(&mut rng, 5, 0.5, 4.0), &tol()).unwrap();
        let rep = rn_extract(&f, &m, &tol()).unwrap();
        let rebuilt = associated_operator(&rep);
        assert!(rebuilt.sub(&a).norm_frobenius() <= 1e-9 * a.norm_frobenius());
        // Uniqueness: the sampled form values match through the representation.
        for _ in 0..10 {
            let xi = random_vector(&mut rng, 5);
            let eta = random_vector(&mut rng, 5);
            let direct = eval_form(&f, &xi, &eta).unwrap();
            let h = m.matrix();
            let via_rep = inner(&rep.q.matvec(&h.matvec(&xi)), &h.matvec(&eta));
            assert!((direct - via_rep).norm() <= 1e-9 * a.norm_frobenius().max(1.0));
        }
    }

    #[test]
    fn rn_extract_guards() {
        let f = FiniteForm::new(ComplexMatrix::identity(2)).unwrap();
        let guard_tol = ToleranceConfig {
            cond_guard: 100.0,
            ..tol()
        };
        let skewed =
            MetricOperator::new(ComplexMatrix::from_real_diag(&[1.0, 20.0]), &guard_tol).unwrap();
        assert!(matches!(
            rn_extract(&f, &skewed, &guard_tol),
            Err(Error::ConditionGuard { .. })
        ));
        // A singular metric is rejected at construction.
        assert!(matches!(
            MetricOperator::new(ComplexMatrix::from_real_diag(&[1.0, 0.0]), &tol()),
            Err(Error::MetricSingular { .. })
        ));
    }

    #[test]
    fn two_metric_associated_operator() {
        let q = ComplexMatrix::identity(2);
        let m1 = MetricOperator::new(ComplexMatrix::from_real_diag(&[1.0, 2.0]), &tol()).unwrap();
        let m2 = MetricOperator::new(ComplexMatrix::from_real_diag(&[3.0, 1.0]), &tol()).unwrap();
        let t = associated_operator_two_metrics(&q, &m1, &m2).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[3.0, 2.0]);
        assert!(t.sub(&expected).norm_frobenius() < 1e-14);

        let singular_q = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let t = associated_operator_two_metrics(&singular_q, &m1, &m2).unwrap();
        assert!(!spectral::is_invertible(&t, &tol()).unwrap().invertible);
    }

    #[test]
    fn two_metric_sigma_min_bound() {
        let mut rng = rng_from_seed(109);
        let q = random_matrix(&mut rng, 4).add(&ComplexMatrix::identity(4).scale(c(3.0, 0.0)));
        let m1 = MetricOperator::new(random_metric(&mut rng, 4, 0.5, 2.0), &tol()).unwrap();
        let m2 = MetricOperator::new(random_metric(&mut rng, 4, 0.5, 2.0), &tol()).unwrap();
        let t = associated_operator_two_metrics(&q, &m1, &m2).unwrap();
        let verdict = spectral::is_invertible(&t, &tol()).unwrap();
        assert!(verdict.invertible);
        let q_sigma_min = spectral::is_invertible(&q, &tol()).unwrap().sigma_min;
        let bound = m2.sigma_min() * q_sigma_min * m1.sigma_min();
        assert!(verdict.sigma_min >= bound - 1e-10);
    }

    #[test]
    fn solvability_trivial_cases() {
        let f = FiniteForm::new(ComplexMatrix::identity(2)).unwrap();
        let m = MetricOperator::identity(2);
        let rep = rn_extract(&f, &m, &tol()).unwrap();

        let verdict = solvability_check(&rep, &ComplexMatrix::zeros(2, 2), &tol()).unwrap();
        assert!(verdict.agree);
        assert!(verdict.bijection.invertible);
        assert!(verdict.resolvent_zero.invertible);

        let neg_id = ComplexMatrix::identity(2).scale(c(-1.0, 0.0));
        let verdict = solvability_check(&rep, &neg_id, &tol()).unwrap();
        assert!(verdict.agree);
        assert!(!verdict.bijection.invertible);
        assert!(!verdict.resolvent_zero.invertible);
    }

    #[test]
    fn solvability_agreement_random() {
        let mut rng = rng_from_seed(113);
        for _ in 0..10 {
            let a = random_matrix(&mut rng, 6);
            let f = FiniteForm::new(a).unwrap();
            let m = MetricOperator::new(random_metric(&mut rng, 6, 0.5, 3.0), &tol()).unwrap();
            let rep = rn_extract(&f, &m, &tol()).unwrap();
            let b = random_matrix(&mut rng, 6);
            let verdict = solvability_check(&rep, &b, &tol()).unwrap();
            assert!(verdict.agree);
        }
    }

    #[test]
    fn solvability_positive_definite_q_b() {
        // If Q_B is positive definite the form is hyper-solvable and the
        // verdict must be invertible.
        let mut rng = rng_from_seed(127);
        let g = random_matrix(&mut rng, 4);
        let q = g
            .adjoint()
            .mul(&g)
            .add(&ComplexMatrix::identity(4).scale(c(0.5, 0.0)));
        let m = MetricOperator::new(random_metric(&mut rng, 4, 0.5, 2.0), &tol()).unwrap();
        let rep = RNRepresentation { q, metric: m };
        let verdict = solvability_check(&rep, &ComplexMatrix::zeros(4, 4), &tol()).unwrap();
        assert!(verdict.bijection.invertible);
        assert!(verdict.resolvent_zero.invertible);
    }

    #[test]
    fn semibounded_gamma_values() {
        let f = FiniteForm::new(ComplexMatrix::identity(3)).unwrap();
        assert!((semibounded_gamma(&f, &tol()).unwrap() - 1.0).abs() < 1e-14);
        let f = FiniteForm::new(ComplexMatrix::from_real_diag(&[-2.0, 5.0])).unwrap();
        assert!((semibounded_gamma(&f, &tol()).unwrap() + 2.0).abs() < 1e-14);

        let skew = FiniteForm::new(
            ComplexMatrix::from_rows(&[
                vec![c(0.0, 0.0), c(1.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        assert!(matches!(
            semibounded_gamma(&skew, &tol()),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn semibounded_gamma_sampling_oracle() {
        let mut rng = rng_from_seed(131);
        let h = crate::sampling::random_hermitian(&mut rng, 5);
        let f = FiniteForm::new(h.clone()).unwrap();
        let gamma = semibounded_gamma(&f, &tol()).unwrap();
        for _ in 0..10_000 {
            let xi = random_vector(&mut rng, 5);
            let norm_sq: f64 = xi.iter().map(|v| v.norm_sqr()).sum();
            if norm_sq == 0.0 {
                continue;
            }
            let quad = inner(&h.matvec(&xi), &xi).re;
            assert!(quad / norm_sq >= gamma - 1e-10);
        }
    }

    #[test]
    fn second_rep_check_examples() {
        let f = FiniteForm::new(ComplexMatrix::from_real_diag(&[2.0, -3.0])).unwrap();
        let (r1, r2) = second_rep_check(&f, &tol()).unwrap();
        assert!(r1 <= 1e-12 && r2 <= 1e-12, "r1={r1} r2={r2}");

        let f = FiniteForm::new(ComplexMatrix::identity(3)).unwrap();
        let (r1, r2) = second_rep_check(&f, &tol()).unwrap();
        assert!(r1 <= 1e-14 && r2 <= 1e-14);
    }

    #[test]
    fn second_rep_check_random_including_singular() {
        let mut rng = rng_from_seed(137);
        for rank_deficient in [false, true] {
            let t = if rank_deficient {
                rank_deficient_matrix(&mut rng, 8, 3)
            } else {
                random_matrix(&mut rng, 8)
            };
            let scale = t.norm_frobenius();
            let f = FiniteForm::new(t.clone()).unwrap();
            let (r1, r2) = second_rep_check(&f, &tol()).unwrap();
            assert!(r1 <= 1e-10 * scale && r2 <= 1e-10 * scale);

            // Sampled identity: form(xi, eta) = <U |T|^1/2 xi, |T*|^1/2 eta>.
            let parts = spectral::polar(&t, &tol()).unwrap();
            let mod_half = spectral::sqrt_psd(&parts.modulus, &tol()).unwrap();
            let adj_mod_half = spectral::sqrt_psd(
                &spectral::polar(&t.adjoint(), &tol()).unwrap().modulus,
                &tol(),
            )
            .unwrap();
            for _ in 0..100 {
                let xi = random_vector(&mut rng, 8);
                let eta = random_vector(&mut rng, 8);
                let direct = eval_form(&f, &xi, &eta).unwrap();
                let lhs = parts.isometry.matvec(&mod_half.matvec(&xi));
                let rhs = adj_mod_half.matvec(&eta);
                let via_rep = inner(&lhs, &rhs);
                let xi_norm: f64 = xi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                let eta_norm: f64 = eta.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                assert!((direct - via_rep).norm() <= 1e-10 * scale * xi_norm * eta_norm);
            }
        }
    }

    #[test]
    fn hermitian_gram_has_equal_moduli() {
        // For symmetric forms |T*| = |T|, the normal-operator specialization.
        let mut rng = rng_from_seed(139);
        let t = crate::sampling::random_hermitian(&mut rng, 6);
        let modulus = spectral::polar(&t, &tol()).unwrap().modulus;
        let adj_modulus = spectral::polar(&t.adjoint(), &tol()).unwrap().modulus;
        assert!(modulus.sub(&adj_modulus).norm_frobenius() <= 1e-10 * t.norm_frobenius());
    }

    #[test]
    fn second_rep_w_examples() {
        let id = ComplexMatrix::identity(2);
        let w = second_rep_w(&id, &tol()).unwrap();
        assert!(w.sub(&id).norm_frobenius() < 1e-13);

        let t = ComplexMatrix::from_real_diag(&[2.0, -3.0]);
        let w = second_rep_w(&t, &tol()).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert!(w.sub(&expected).norm_frobenius() < 1e-13);

        let singular = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(
            second_rep_w(&singular, &tol()),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn second_rep_w_random_reconstruction() {
        let mut rng = rng_from_seed(149);
        let t = random_matrix(&mut rng, 6).add(&ComplexMatrix::identity(6).scale(c(4.0, 0.0)));
        let w = second_rep_w(&t, &tol()).unwrap();
        assert!(spectral::is_invertible(&w, &tol()).unwrap().invertible);
        let mod_half =
            spectral::sqrt_psd(&spectral::polar(&t, &tol()).unwrap().modulus, &tol()).unwrap();
        let rebuilt = mod_half.mul(&w).mul(&mod_half);
        assert!(rebuilt.sub(&t).norm_frobenius() <= 1e-10 * t.norm_frobenius());
    }

    #[test]
    fn second_rep_v_examples() {
        let id = ComplexMatrix::identity(2);
        let v = second_rep_v(&id, &ComplexMatrix::zeros(2, 2), &tol()).unwrap();
        assert!(v.sub(&id).norm_frobenius() < 1e-13);

        let zero = ComplexMatrix::zeros(2, 2);
        let v = second_rep_v(&zero, &id, &tol()).unwrap();
        assert!(v.norm_frobenius() < 1e-13);

        let mut rng = rng_from_seed(151);
        let t = random_matrix(&mut rng, 5);
        let b = t
            .scale(c(-1.0, 0.0))
            .add(&random_metric(&mut rng, 5, 1.0, 3.0));
        let v = second_rep_v(&t, &b, &tol()).unwrap();
        let modulus = spectral::polar(&t.add(&b), &tol()).unwrap().modulus;
        let mod_half = spectral::sqrt_psd(&modulus, &tol()).unwrap();
        let rebuilt = mod_half.mul(&v).mul(&mod_half);
        assert!(rebuilt.sub(&t).norm_frobenius() <= 1e-10 * t.norm_frobenius());
    }

    #[test]
    fn form_from_operator_examples() {
        let id = ComplexMatrix::identity(2);
        let f = form_from_operator(&id, &ComplexMatrix::zeros(2, 2), &tol()).unwrap();
        assert!(f.gram().sub(&id).norm_frobenius() < 1e-13);

        // Singular T recovered through a complementary perturbation.
        let t = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let b = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let f = form_from_operator(&t, &b, &tol()).unwrap();
        assert!(f.gram().sub(&t).norm_frobenius() < 1e-13);

        assert!(matches!(
            form_from_operator(&t, &ComplexMatrix::zeros(2, 2), &tol()),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn form_from_operator_round_trip_random() {
        let mut rng = rng_from_seed(157);
        for _ in 0..5 {
            let t = random_matrix(&mut rng, 6);
            let b = t
                .scale(c(-1.0, 0.0))
                .add(&random_metric(&mut rng, 6, 1.0, 4.0));
            let f = form_from_operator(&t, &b, &tol()).unwrap();
            let residual = f.gram().sub(&t).norm_frobenius();
            let scale = t.norm_frobenius() + b.norm_frobenius();
            assert!(residual <= 1e-9 * scale, "residual {residual}");
        }
    }

    #[test]
    fn form_from_operator_hermitian_with_imaginary_shift() {
        // Self-adjoint T with B = iI: T + B is always invertible and the
        // recovered gram must be Hermitian.
        let mut rng = rng_from_seed(163);
        let t = crate::sampling::random_hermitian(&mut rng, 5);
        let b = ComplexMatrix::identity(5).scale(Complex64::i());
        let f = form_from_operator(&t, &b, &tol()).unwrap();
        assert!(f.gram().asymmetry() <= 1e-10 * t.norm_frobenius().max(1.0));
        assert!(f.gram().sub(&t).norm_frobenius() <= 1e-9 * (t.norm_frobenius() + 5.0f64.sqrt()));
    }

    #[test]
    fn adjoint_rep_examples() {
        let m = MetricOperator::identity(2);
        let rep = RNRepresentation {
            q: ComplexMatrix::identity(2),
            metric: m.clone(),
        };
        let adj = adjoint_rep(&rep);
        assert!(adj.q.sub(&ComplexMatrix::identity(2)).norm_frobenius() < 1e-15);

        let q = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let rep = RNRepresentation { q, metric: m };
        let adj = adjoint_rep(&rep);
        assert_eq!(adj.q[(1, 0)], c(1.0, 0.0));

        let mut rng = rng_from_seed(167);
        let metric = MetricOperator::new(random_metric(&mut rng, 4, 0.5, 2.0), &tol()).unwrap();
        let rep = RNRepresentation {
            q: random_matrix(&mut rng, 4),
            metric,
        };
        let lhs = associated_operator(&adjoint_rep(&rep));
        let rhs = associated_operator(&rep).adjoint();
        assert!(lhs.sub(&rhs).norm_frobenius() <= 1e-10 * rhs.norm_frobenius());
    }

    #[test]
    fn heinz_constants_trivial() {
        let mut rng = rng_from_seed(173);
        let t = random_matrix(&mut rng, 4);
        let (lo, hi) = heinz_constants(&t, &ComplexMatrix::zeros(4, 4), &tol()).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);

        let zero = ComplexMatrix::zeros(3, 3);
        let (lo, hi) = heinz_constants(&zero, &ComplexMatrix::identity(3), &tol()).unwrap();
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn heinz_constants_bound_sampled_ratios() {
        let mut rng = rng_from_seed(179);
        let t = random_matrix(&mut rng, 6);
        let b = random_matrix(&mut rng, 6);
        let (lo, hi) = heinz_constants(&t, &b, &tol()).unwrap();
        assert!(lo > 0.0 && lo <= hi);
        let mod_t = spectral::polar(&t, &tol()).unwrap().modulus;
        let mod_tb = spectral::polar(&t.add(&b), &tol()).unwrap().modulus;
        for _ in 0..10_000 {
            let xi = random_vector(&mut rng, 6);
            let norm_sq: f64 = xi.iter().map(|v| v.norm_sqr()).sum();
            if norm_sq == 0.0 {
                continue;
            }
            let num = norm_sq + inner(&mod_tb.matvec(&xi), &xi).re;
            let den = norm_sq + inner(&mod_t.matvec(&xi), &xi).re;
            let ratio = num / den;
            assert!(ratio >= lo - 1e-10 && ratio <= hi + 1e-10, "ratio {ratio}");
        }
    }
}
