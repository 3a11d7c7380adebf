//! Dense complex linear algebra: products, LU solves, norms and Hermitian
//! eigendecomposition. Everything downstream works at desk scale (n <= 64),
//! so plain O(n^3) methods are used throughout.

use num_complex::Complex64;

use crate::error::{HalfcalcError, Result};

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(HalfcalcError::Shape("matrix must be nonempty".into()));
        }
        if entries.len() != rows * cols {
            return Err(HalfcalcError::Shape(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HalfcalcError::Validation(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vector(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            entries: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex64]) {
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(HalfcalcError::Shape("addition shape mismatch".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.cols {
            return Err(HalfcalcError::Shape(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * x[j];
            }
            y[i] = acc;
        }
        Ok(y)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Matrix product.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.cols != b.rows {
        return Err(HalfcalcError::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

/// LU factorization with partial pivoting, factors stored in-place.
#[derive(Debug, Clone)]
pub struct LUFactors {
    permutation: Vec<usize>,
    factors: CMatrix,
    singular: bool,
}

impl LUFactors {
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn factors(&self) -> &CMatrix {
        &self.factors
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }
}

/// Factor a square matrix with partial pivoting. A pivot smaller than
/// 1e-14 * max|a_ij| marks the matrix singular.
pub fn lu_factor(a: &CMatrix) -> Result<LUFactors> {
    if !a.is_square() {
        return Err(HalfcalcError::Shape("LU requires a square matrix".into()));
    }
    let n = a.rows;
    // floor keeps an exactly-zero matrix (threshold would be 0) singular
    let threshold = (1e-14 * a.norm_max()).max(f64::MIN_POSITIVE);
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut singular = false;
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = lu[(k, k)].norm();
        for i in k + 1..n {
            let mag = lu[(i, k)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag < threshold {
            singular = true;
            continue;
        }
        if pivot_row != k {
            perm.swap(k, pivot_row);
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let sub = factor * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
        }
    }
    Ok(LUFactors {
        permutation: perm,
        factors: lu,
        singular,
    })
}

/// Solve a X = rhs column by column using a precomputed factorization.
pub fn lu_solve_factored(f: &LUFactors, rhs: &CMatrix) -> Result<CMatrix> {
    let n = f.factors.rows;
    if rhs.rows != n {
        return Err(HalfcalcError::Shape(
            "right-hand side rows do not match matrix".into(),
        ));
    }
    if f.singular {
        return Err(HalfcalcError::Singular {
            pivot: 0.0,
            threshold: 1e-14 * f.factors.norm_max(),
        });
    }
    let mut x = CMatrix::zeros(n, rhs.cols);
    for col in 0..rhs.cols {
        // forward substitution on the permuted rhs
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = rhs[(f.permutation[i], col)];
            for j in 0..i {
                acc -= f.factors[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        // back substitution
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= f.factors[(i, j)] * x[(j, col)];
            }
            x[(i, col)] = acc / f.factors[(i, i)];
        }
    }
    Ok(x)
}

/// Solve a X = rhs with partial pivoting.
pub fn lu_solve(a: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    let f = lu_factor(a)?;
    if f.singular {
        let threshold = 1e-14 * a.norm_max();
        return Err(HalfcalcError::Singular {
            pivot: 0.0,
            threshold,
        });
    }
    lu_solve_factored(&f, rhs)
}

/// Largest singular value via power iteration on a^H a.
///
/// The start vector is the normalized all-ones vector with index-dependent
/// phases so that it is never orthogonal to the dominant singular subspace of
/// the matrices this artifact constructs.
pub fn op_norm_2(a: &CMatrix, tol: f64) -> Result<f64> {
    let n = a.cols;
    let ah = a.adjoint();
    let mut v: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 0.7 * k as f64 + 0.3))
        .collect();
    let scale = 1.0 / (n as f64).sqrt();
    for z in v.iter_mut() {
        *z *= scale;
    }
    let mut lambda = 0.0_f64;
    for iter in 0..10_000 {
        let av = a.apply(&v)?;
        let w = ah.apply(&av)?;
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let prev = lambda;
        lambda = norm;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if iter > 0 && (lambda - prev).abs() <= tol * lambda {
            return Ok(lambda.sqrt());
        }
    }
    // power iteration stalls when the top two singular values nearly
    // coincide (oscillation between subspaces); fall back to the exact
    // Hermitian eigensolver on a^H a, which is just as deterministic
    let gram = matmul(&ah, a)?;
    let (eigs, _) = hermitian_eig(&gram)?;
    match eigs.last() {
        Some(&top) if top >= -1e-30 => Ok(top.max(0.0).sqrt()),
        _ => Err(HalfcalcError::Convergence {
            iterations: 10_000,
            last: lambda.sqrt(),
        }),
    }
}

/// Spectral norm with the default tolerance 1e-10.
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    op_norm_2(a, 1e-10)
}

/// Two-norm condition number via LU inverse and power iteration.
pub fn condition_2(a: &CMatrix) -> Result<f64> {
    let inv = lu_solve(a, &CMatrix::identity(a.rows))?;
    Ok(op_norm(a)? * op_norm(&inv)?)
}

/// Eigendecomposition of a Hermitian matrix: Householder tridiagonalization
/// followed by implicit QL with shifts. Eigenvalues ascending; columns of the
/// returned matrix are the corresponding orthonormal eigenvectors.
pub fn hermitian_eig(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !a.is_square() {
        return Err(HalfcalcError::Shape(
            "eigendecomposition requires a square matrix".into(),
        ));
    }
    let herm_defect = a.sub(&a.adjoint())?.norm_fro();
    if herm_defect > 1e-10 * a.norm_fro().max(1e-300) {
        return Err(HalfcalcError::Domain(format!(
            "matrix is not Hermitian: defect {:.3e}",
            herm_defect
        )));
    }
    let n = a.rows;
    let mut work = a.clone();
    // Symmetrize to kill round-off skew before reduction.
    for i in 0..n {
        work[(i, i)] = Complex64::new(work[(i, i)].re, 0.0);
        for j in 0..i {
            let avg = 0.5 * (work[(i, j)] + work[(j, i)].conj());
            work[(i, j)] = avg;
            work[(j, i)] = avg.conj();
        }
    }
    let mut q = CMatrix::identity(n);

    // Householder reduction to Hermitian tridiagonal form.
    for k in 0..n.saturating_sub(2) {
        let mut norm_sqr = 0.0;
        for i in k + 1..n {
            norm_sqr += work[(i, k)].norm_sqr();
        }
        let norm = norm_sqr.sqrt();
        if norm < 1e-300 {
            continue;
        }
        let x0 = work[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        for i in k + 1..n {
            u[i] = work[(i, k)];
        }
        u[k + 1] -= alpha;
        let unorm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if unorm < 1e-300 {
            continue;
        }
        for z in u.iter_mut() {
            *z /= unorm;
        }
        // work <- H work H with H = I - 2 u u^H
        let wu = {
            // p = work u
            let mut p = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    acc += work[(i, j)] * u[j];
                }
                p[i] = acc;
            }
            p
        };
        let uhp: Complex64 = u.iter().zip(&wu).map(|(ui, pi)| ui.conj() * pi).sum();
        // w = 2(p - (u^H p) u)
        let w: Vec<Complex64> = wu
            .iter()
            .zip(&u)
            .map(|(pi, ui)| 2.0 * (pi - uhp * ui))
            .collect();
        for i in 0..n {
            for j in 0..n {
                let delta = w[i] * u[j].conj() + u[i] * w[j].conj();
                work[(i, j)] -= delta;
            }
        }
        // q <- q H
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += q[(i, j)] * u[j];
            }
            for j in 0..n {
                let delta = 2.0 * acc * u[j].conj();
                q[(i, j)] -= delta;
            }
        }
    }

    // Phase-scale so off-diagonals become real nonnegative.
    let mut d = vec![0.0_f64; n];
    let mut e = vec![0.0_f64; n]; // e[i] couples i and i+1
    let mut phase = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n {
        d[i] = work[(i, i)].re;
    }
    for i in 0..n - 1 {
        let off = work[(i + 1, i)] * phase[i].conj();
        let mag = off.norm();
        e[i] = mag;
        phase[i + 1] = if mag > 0.0 {
            (off / mag).conj()
        } else {
            Complex64::new(1.0, 0.0)
        };
    }
    // fold phases into q
    for j in 0..n {
        let ph = phase[j].conj();
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }

    tql_implicit(&mut d, &mut e, &mut q)?;

    // sort ascending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_j)] = q[(i, old_j)];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Implicit QL with Wilkinson shifts on a real symmetric tridiagonal matrix,
/// accumulating the rotations into the complex transform matrix.
fn tql_implicit(d: &mut [f64], e: &mut [f64], z: &mut CMatrix) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(HalfcalcError::Convergence {
                    iterations: 50,
                    last: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)].re;
                    let fi = z[(k, i + 1)].im;
                    let zre = z[(k, i)].re;
                    let zim = z[(k, i)].im;
                    z[(k, i + 1)] = Complex64::new(s * zre + c * f, s * zim + c * fi);
                    z[(k, i)] = Complex64::new(c * zre - s * f, c * zim - s * fi);
                }
            }
            if r == 0.0 && i > l {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mat(rows: usize, cols: usize, data: &[(f64, f64)]) -> CMatrix {
        CMatrix::new(rows, cols, data.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let m = mat(2, 2, &[(1.0, 2.0), (3.0, 0.0), (0.5, -1.0), (2.0, 2.0)]);
        let prod = matmul(&CMatrix::identity(2), &m).unwrap();
        assert_eq!(prod, m);
    }

    #[test]
    fn matmul_diagonal_scalars() {
        let a = CMatrix::from_diag(&[c(2.0, 0.0), c(2.0, 0.0)]);
        let b = CMatrix::from_diag(&[c(3.0, 0.0), c(3.0, 0.0)]);
        let prod = matmul(&a, &b).unwrap();
        assert_eq!(prod, CMatrix::from_diag(&[c(6.0, 0.0), c(6.0, 0.0)]));
    }

    #[test]
    fn matmul_nilpotent_square_is_zero() {
        let j = mat(2, 2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let sq = matmul(&j, &j).unwrap();
        assert!(sq.norm_fro() == 0.0);
    }

    #[test]
    fn matmul_shape_error() {
        let a = CMatrix::zeros(2, 3);
        let b = CMatrix::zeros(2, 2);
        assert!(matches!(matmul(&a, &b), Err(HalfcalcError::Shape(_))));
    }

    #[test]
    fn lu_solve_identity_and_diagonal() {
        let b = mat(2, 1, &[(1.0, 0.0), (1.0, 0.0)]);
        let x = lu_solve(&CMatrix::identity(2), &b).unwrap();
        assert!(x.sub(&b).unwrap().norm_fro() < 1e-14);

        let a = CMatrix::from_diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let x = lu_solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((x[(1, 0)] - c(0.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lu_solve_back_substitution() {
        let a = mat(2, 2, &[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let b = mat(2, 1, &[(2.0, 0.0), (1.0, 0.0)]);
        let x = lu_solve(&a, &b).unwrap();
        assert!((x[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[(1, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lu_singular_detected() {
        let a = mat(2, 2, &[(1.0, 0.0), (2.0, 0.0), (2.0, 0.0), (4.0, 0.0)]);
        let b = CMatrix::identity(2);
        assert!(matches!(
            lu_solve(&a, &b),
            Err(HalfcalcError::Singular { .. })
        ));
    }

    #[test]
    fn lu_reconstruction_residual() {
        // pseudo-random well-conditioned matrix
        let n = 8;
        let mut entries = Vec::with_capacity(n * n);
        let mut state = 0x9e3779b97f4a7c15_u64;
        for _ in 0..n * n {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let re = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let im = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            entries.push(c(re, im));
        }
        let mut a = CMatrix::new(n, n, entries).unwrap();
        for i in 0..n {
            a[(i, i)] += c(4.0, 0.0); // diagonally dominant, kappa small
        }
        let x_true = CMatrix::new(n, 1, (0..n).map(|i| c(i as f64 + 1.0, -0.5)).collect()).unwrap();
        let rhs = matmul(&a, &x_true).unwrap();
        let x = lu_solve(&a, &rhs).unwrap();
        let rel = x.sub(&x_true).unwrap().norm_fro() / x_true.norm_fro();
        assert!(rel < 1e-8, "relative error {rel}");

        let f = lu_factor(&a).unwrap();
        // reconstruct P a = L U
        let n = a.rows();
        let mut plu = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..=i.min(j) {
                    let l = if k == i { c(1.0, 0.0) } else { f.factors()[(i, k)] };
                    let u = if k <= j { f.factors()[(k, j)] } else { c(0.0, 0.0) };
                    acc += l * u;
                }
                plu[(i, j)] = acc;
            }
        }
        let mut pa = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                pa[(i, j)] = a[(f.permutation()[i], j)];
            }
        }
        let resid = plu.sub(&pa).unwrap().norm_fro();
        assert!(resid <= 1e-10 * a.norm_fro());
    }

    #[test]
    fn op_norm_diagonal() {
        let a = CMatrix::from_diag(&[c(3.0, 0.0), c(-1.0, 0.0)]);
        assert!((op_norm(&a).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn op_norm_jordan_block() {
        let a = mat(2, 2, &[(0.0, 0.0), (2.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!((op_norm(&a).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn op_norm_rotation_is_one() {
        let (s, co) = (0.6_f64, 0.8_f64);
        let a = mat(2, 2, &[(co, 0.0), (-s, 0.0), (s, 0.0), (co, 0.0)]);
        assert!((op_norm(&a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn op_norm_adjoint_matches() {
        let a = mat(2, 2, &[(1.0, 1.0), (2.0, -0.5), (0.0, 3.0), (-1.0, 0.2)]);
        let na = op_norm(&a).unwrap();
        let nah = op_norm(&a.adjoint()).unwrap();
        assert!((na - nah).abs() < 1e-9 * na);
    }

    #[test]
    fn hermitian_eig_diagonal() {
        let a = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let (vals, vecs) = hermitian_eig(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!(vecs.sub(&CMatrix::identity(2)).unwrap().norm_fro() < 1e-12);
    }

    #[test]
    fn hermitian_eig_swap_matrix() {
        let a = mat(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let (vals, _) = hermitian_eig(&a).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eig_gram_closed_form() {
        // oracle: characteristic polynomial of [[1, b], [b, 1]] gives 1 -+ b
        let b = 2.0 * (2.0_f64).sqrt() / 3.0;
        let a = mat(2, 2, &[(1.0, 0.0), (b, 0.0), (b, 0.0), (1.0, 0.0)]);
        let (vals, _) = hermitian_eig(&a).unwrap();
        assert!((vals[0] - (1.0 - b)).abs() < 1e-12);
        assert!((vals[1] - (1.0 + b)).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eig_complex_reconstruction() {
        // Hermitian with complex off-diagonals
        let a = mat(
            3,
            3,
            &[
                (2.0, 0.0),
                (0.5, 0.7),
                (0.1, -0.3),
                (0.5, -0.7),
                (-1.0, 0.0),
                (0.2, 0.4),
                (0.1, 0.3),
                (0.2, -0.4),
                (0.5, 0.0),
            ],
        );
        let (vals, v) = hermitian_eig(&a).unwrap();
        // trace check
        let sum: f64 = vals.iter().sum();
        assert!((sum - a.trace().re).abs() < 1e-9 * a.trace().re.abs().max(1.0));
        // residual a V = V diag
        let av = matmul(&a, &v).unwrap();
        let vd = matmul(&v, &CMatrix::from_diag(
            &vals.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>(),
        ))
        .unwrap();
        assert!(av.sub(&vd).unwrap().norm_fro() <= 1e-8 * a.norm_fro());
        // unitarity
        let vhv = matmul(&v.adjoint(), &v).unwrap();
        assert!(vhv.sub(&CMatrix::identity(3)).unwrap().norm_fro() < 1e-8);
        // ascending order
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hermitian_eig_rejects_non_hermitian() {
        let a = mat(2, 2, &[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(hermitian_eig(&a), Err(HalfcalcError::Domain(_))));
    }
}
