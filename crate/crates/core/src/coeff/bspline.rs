use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{MrctError, Result};

/// Clamped B-spline basis with equidistant interior knots on `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    degree: usize,
    m: usize,
    a: f64,
    b: f64,
    knots: Vec<f64>,
}

impl BasisSpec {
    pub fn bspline(m: usize, degree: usize, a: f64, b: f64) -> Result<Self> {
        if m < degree + 1 {
            return Err(MrctError::domain(format!(
                "{m} basis functions cannot carry degree {degree} (need at least {})",
                degree + 1
            )));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(MrctError::domain(format!("invalid basis domain [{a}, {b}]")));
        }
        let interior = m - degree - 1;
        let mut knots = vec![a; degree + 1];
        for i in 1..=interior {
            knots.push(a + (b - a) * i as f64 / (interior + 1) as f64);
        }
        knots.extend(std::iter::repeat_n(b, degree + 1));
        Ok(Self { degree, m, a, b, knots })
    }

    /// Cubic splines.
    pub fn cubic(m: usize, a: f64, b: f64) -> Result<Self> {
        Self::bspline(m, 3, a, b)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Distinct knot values, i.e. the breakpoints of the piecewise polynomials.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = self.knots.clone();
        v.dedup();
        v
    }
}

/// Values of all `M` basis functions at `t` (Cox–de Boor recursion).
pub fn basis_eval(basis: &BasisSpec, t: f64) -> Result<DVector<f64>> {
    let (a, b) = basis.domain();
    if !(t >= a && t <= b) {
        return Err(MrctError::domain(format!("t = {t} outside [{a}, {b}]")));
    }
    let p = basis.degree;
    let kn = &basis.knots;
    // Knot span: kn[span] <= t < kn[span+1], with the right end folded in.
    let span = if t >= b {
        basis.m - 1
    } else {
        kn.partition_point(|&k| k <= t) - 1
    };
    let mut n = vec![0.0; p + 1];
    n[0] = 1.0;
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    for j in 1..=p {
        left[j] = t - kn[span + 1 - j];
        right[j] = kn[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    let mut out = DVector::zeros(basis.m);
    for (r, v) in n.into_iter().enumerate() {
        out[span - p + r] = v;
    }
    Ok(out)
}

/// `count`-point Gauss–Legendre nodes and weights on `[-1, 1]`
/// (Golub–Welsch).
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(count, count, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..count)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// `∫ φ_i φ_j` by Gauss–Legendre on each knot interval, exact for the
/// piecewise polynomial integrands.
pub fn gram_matrix(basis: &BasisSpec) -> DMatrix<f64> {
    let (nodes, weights) = gauss_legendre(basis.degree + 1);
    let mut g = DMatrix::zeros(basis.m, basis.m);
    for w in basis.breakpoints().windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, wt) in nodes.iter().zip(&weights) {
            let phi = basis_eval(basis, mid + half * x).expect("node inside domain");
            g.ger(half * wt, &phi, &phi, 1.0);
        }
    }
    crate::funcdata::symmetrize(&mut g);
    g
}

/// Symmetric square root `G^{1/2}` and its inverse.
pub(crate) fn gram_roots(gram: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !gram.is_square() {
        return Err(MrctError::dim("Gram matrix must be square"));
    }
    let eig = SymmetricEigen::try_new(gram.clone(), f64::EPSILON, 0)
        .ok_or_else(|| MrctError::numerical("Gram eigendecomposition did not converge"))?;
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 1e-12 * max) {
        return Err(MrctError::numerical(format!(
            "Gram matrix is not positive definite (eigenvalue range [{min}, {max}])"
        )));
    }
    let u = &eig.eigenvectors;
    let root = u * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * u.transpose();
    let inv = u * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt())) * u.transpose();
    Ok((root, inv))
}

/// `C · G^{1/2}`: coefficients in the orthonormalized basis `G^{-1/2} Φ`.
pub fn orthonormalize(coeffs: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if coeffs.ncols() != gram.nrows() {
        return Err(MrctError::dim(format!(
            "{} coefficients per curve but Gram is {}×{}",
            coeffs.ncols(),
            gram.nrows(),
            gram.ncols()
        )));
    }
    Ok(coeffs * gram_roots(gram)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn knots_are_clamped() {
        let b = BasisSpec::cubic(6, 0.0, 1.0).unwrap();
        assert_eq!(b.knots(), &[0.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0, 1.0]);
        assert!(BasisSpec::cubic(3, 0.0, 1.0).is_err());
        assert!(BasisSpec::cubic(5, 1.0, 1.0).is_err());
    }

    #[test]
    fn partition_of_unity_and_endpoints() {
        let b = BasisSpec::cubic(9, -1.0, 2.0).unwrap();
        for i in 0..=50 {
            let t = -1.0 + 3.0 * i as f64 / 50.0;
            let v = basis_eval(&b, t).unwrap();
            assert!(v.iter().all(|x| *x >= -1e-15));
            assert_relative_eq!(v.sum(), 1.0, epsilon = 1e-14);
        }
        let start = basis_eval(&b, -1.0).unwrap();
        assert_eq!(start[0], 1.0);
        assert!(start.iter().skip(1).all(|x| *x == 0.0));
        let end = basis_eval(&b, 2.0).unwrap();
        assert_eq!(end[8], 1.0);
        assert!(basis_eval(&b, 2.1).is_err());
    }

    #[test]
    fn bernstein_case() {
        let b = BasisSpec::cubic(4, 0.0, 1.0).unwrap();
        let v = basis_eval(&b, 0.5).unwrap();
        for (x, y) in v.iter().zip([0.125, 0.375, 0.375, 0.125]) {
            assert_relative_eq!(*x, y, epsilon = 1e-15);
        }
        // Bernstein oracle at an arbitrary point.
        let t: f64 = 0.3;
        let v = basis_eval(&b, t).unwrap();
        let bern = [
            (1.0 - t).powi(3),
            3.0 * t * (1.0 - t).powi(2),
            3.0 * t * t * (1.0 - t),
            t.powi(3),
        ];
        for (x, y) in v.iter().zip(bern) {
            assert_relative_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(4);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        // ∫ x⁶ over [-1, 1] = 2/7, exact for 4 nodes.
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(6)).sum();
        assert_relative_eq!(i, 2.0 / 7.0, epsilon = 1e-14);
    }

    #[test]
    fn gram_examples() {
        let hat = BasisSpec::bspline(2, 1, 0.0, 1.0).unwrap();
        let g = gram_matrix(&hat);
        assert_relative_eq!(g[(0, 0)], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(g[(0, 1)], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(g[(1, 1)], 1.0 / 3.0, epsilon = 1e-15);

        let b = BasisSpec::cubic(12, 0.0, 2.5).unwrap();
        let g = gram_matrix(&b);
        assert_relative_eq!(g.sum(), 2.5, epsilon = 1e-13);
        assert!(g.clone().symmetric_eigenvalues().min() > 0.0);
        assert_relative_eq!(&g, &g.transpose(), epsilon = 0.0);
    }

    #[test]
    fn orthonormalized_basis_has_identity_gram() {
        let b = BasisSpec::cubic(10, 0.0, 1.0).unwrap();
        let g = gram_matrix(&b);
        let (_, inv) = gram_roots(&g).unwrap();
        let eye = &inv * &g * &inv;
        assert_relative_eq!(eye, DMatrix::identity(10, 10), epsilon = 1e-8);
        assert!(orthonormalize(&DMatrix::zeros(2, 3), &g).is_err());
        let c = DMatrix::from_fn(2, 10, |i, j| (i + j) as f64);
        assert_eq!(orthonormalize(&c, &DMatrix::identity(10, 10)).unwrap(), c);
    }
}
