use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense row-major 64-bit matrix used throughout the library.
pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Solve `A * X = Y` for a square `A` with row-pivoted LU.
///
/// Returns `SingularMatrix` when `A` is singular to working precision;
/// evolutionary callers translate that into a worst-fitness sentinel.
pub fn solve_linear(a: &Matrix, y: &Matrix) -> Result<Matrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "solve_linear needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() != y.nrows() {
        return Err(Error::Shape(format!(
            "solve_linear row mismatch: A is {}x{}, Y has {} rows",
            a.nrows(),
            a.ncols(),
            y.nrows()
        )));
    }
    let lu = a.clone().lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if max == 0.0 || min / max < 1e-13 * a.nrows() as f64 {
        return Err(Error::SingularMatrix);
    }
    lu.solve(y).ok_or(Error::SingularMatrix)
}

/// Solve the symmetric-definite generalized eigenproblem
/// `Sb * w = lambda * Sw * w` for the top `d` eigenpairs.
///
/// `Sw` is factored by Cholesky, `Sb` is whitened and a symmetric
/// eigendecomposition is taken, then eigenvectors are mapped back.
/// Eigenvalues come out descending; eigenvector columns are unit-normalized.
pub fn sym_generalized_eig(sb: &Matrix, sw: &Matrix, d: usize) -> Result<(Vec<f64>, Matrix)> {
    let n = sb.nrows();
    if sb.ncols() != n || sw.nrows() != n || sw.ncols() != n {
        return Err(Error::Shape(format!(
            "generalized eig needs same-size square matrices, got {}x{} and {}x{}",
            sb.nrows(),
            sb.ncols(),
            sw.nrows(),
            sw.ncols()
        )));
    }
    if d > n {
        return Err(Error::InvalidDimension(format!(
            "requested {d} eigenpairs from a {n}x{n} pencil"
        )));
    }
    let chol = nalgebra::Cholesky::new(sw.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    // whiten: M = L^-1 Sb L^-T, symmetrized against roundoff
    let tmp = l
        .solve_lower_triangular(sb)
        .ok_or(Error::NotPositiveDefinite)?;
    let m = l
        .solve_lower_triangular(&tmp.transpose())
        .ok_or(Error::NotPositiveDefinite)?;
    let m = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(m);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let lt = l.transpose();
    let mut values = Vec::with_capacity(d);
    let mut vectors = Matrix::zeros(n, d);
    for (col, &idx) in order.iter().take(d).enumerate() {
        values.push(eig.eigenvalues[idx]);
        let v: Vector = eig.eigenvectors.column(idx).into_owned();
        let mut w = lt
            .solve_upper_triangular(&v)
            .ok_or(Error::NotPositiveDefinite)?;
        let norm = w.norm();
        if norm > 0.0 {
            w /= norm;
        }
        vectors.set_column(col, &w);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve_identity() {
        let a = Matrix::identity(3, 3);
        let y = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let x = solve_linear(&a, &y).unwrap();
        assert_relative_eq!(x, y, epsilon = 1e-14);
    }

    #[test]
    fn solve_diagonal() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let y = Matrix::from_row_slice(2, 1, &[2.0, 8.0]);
        let x = solve_linear(&a, &y).unwrap();
        assert_relative_eq!(x[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(x[(1, 0)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn solve_rank_deficient_errors() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let y = Matrix::from_row_slice(2, 1, &[1.0, 2.0]);
        assert!(matches!(solve_linear(&a, &y), Err(Error::SingularMatrix)));
    }

    #[test]
    fn solve_residual_bound() {
        let mut rng = crate::numerics::Rng::from_seed(17);
        for _ in 0..20 {
            let n = 8;
            let a = Matrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0).unwrap())
                + Matrix::identity(n, n) * 2.0;
            let y = Matrix::from_fn(n, 3, |_, _| rng.uniform(-1.0, 1.0).unwrap());
            let x = solve_linear(&a, &y).unwrap();
            let resid = (&a * &x - &y).norm();
            assert!(resid <= 1e-8 * (1.0 + y.norm()), "residual {resid}");
        }
    }

    #[test]
    fn geig_diagonal_case() {
        let sb = Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let sw = Matrix::identity(2, 2);
        let (vals, vecs) = sym_generalized_eig(&sb, &sw, 1).unwrap();
        assert_relative_eq!(vals[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(vecs[(0, 0)].abs(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(vecs[(1, 0)].abs(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn geig_identity_pencil() {
        let sb = Matrix::identity(2, 2);
        let (vals, _) = sym_generalized_eig(&sb, &sb, 2).unwrap();
        for v in vals {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn geig_not_positive_definite() {
        let sb = Matrix::identity(2, 2);
        let sw = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            sym_generalized_eig(&sb, &sw, 1),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn geig_matches_dense_oracle() {
        // random symmetric 5x5 pair, Sw PD; compare against eig of inv(Sw)*Sb
        // via the defining residual and Sw-orthogonality
        let mut rng = crate::numerics::Rng::from_seed(23);
        let n = 5;
        let g = Matrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0).unwrap());
        let sb = &g * g.transpose();
        let h = Matrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0).unwrap());
        let sw = &h * h.transpose() + Matrix::identity(n, n);
        let (vals, vecs) = sym_generalized_eig(&sb, &sw, n).unwrap();
        for i in 0..n {
            let w = vecs.column(i).into_owned();
            let resid = (&sb * &w - &sw * &w * vals[i]).norm();
            assert!(resid <= 1e-6 * sb.norm(), "residual {resid}");
            if i > 0 {
                assert!(vals[i - 1] >= vals[i]);
            }
            for j in 0..i {
                let wj = vecs.column(j).into_owned();
                let dot = (w.transpose() * &sw * wj)[(0, 0)];
                assert!(dot.abs() < 1e-6, "Sw-orthogonality {dot}");
            }
        }
        // cross-check the eigenvalues against the nonsymmetric oracle inv(Sw)*Sb
        let oracle = solve_linear(&sw, &sb).unwrap();
        let mut oracle_vals: Vec<f64> = oracle
            .complex_eigenvalues()
            .iter()
            .map(|c| c.re)
            .collect();
        oracle_vals.sort_by(|a, b| b.total_cmp(a));
        for i in 0..n {
            assert_relative_eq!(vals[i], oracle_vals[i], epsilon = 1e-8, max_relative = 1e-8);
        }
    }
}
