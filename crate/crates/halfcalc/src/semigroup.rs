//! The exponentially stable semigroup T(t) = e^{tA}: stability
//! classification, matrix exponential, resolvent, and sampled trajectory
//! signals <y, T(t)x>.

use num_complex::Complex64;

use crate::error::{HalfcalcError, Result};
use crate::linalg::{condition_2, lu_solve, matmul, op_norm, CMatrix};
use crate::toeplitz::SampledSignal;

/// Diagonalization A = V diag(lambda) V^{-1}, supplied by the caller.
#[derive(Debug, Clone)]
pub struct SpectralForm {
    pub eigenvalues: Vec<Complex64>,
    pub v: CMatrix,
    pub vinv: CMatrix,
}

impl SpectralForm {
    pub fn new(eigenvalues: Vec<Complex64>, v: CMatrix, vinv: CMatrix) -> Result<Self> {
        if v.rows() != eigenvalues.len() || !v.is_square() || vinv.rows() != v.rows() {
            return Err(HalfcalcError::Shape(
                "spectral form dimensions are inconsistent".into(),
            ));
        }
        let form = Self {
            eigenvalues,
            v,
            vinv,
        };
        let kappa = condition_2(&form.v)?;
        let resid = matmul(&form.v, &form.vinv)?
            .sub(&CMatrix::identity(form.v.rows()))?
            .norm_fro();
        if resid > 1e-10 * kappa {
            return Err(HalfcalcError::Validation(format!(
                "V * Vinv deviates from identity by {:.3e} (allowed {:.3e})",
                resid,
                1e-10 * kappa
            )));
        }
        Ok(form)
    }

    /// V diag(f(lambda)) Vinv.
    pub fn assemble(&self, f: impl Fn(Complex64) -> Complex64) -> Result<CMatrix> {
        let diag: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        matmul(&matmul(&self.v, &CMatrix::from_diag(&diag))?, &self.vinv)
    }
}

/// Generator of an exponentially stable semigroup.
#[derive(Debug, Clone)]
pub struct Generator {
    a: CMatrix,
    spectral: Option<SpectralForm>,
    omega: f64,
}

impl Generator {
    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn spectral(&self) -> Option<&SpectralForm> {
        self.spectral.as_ref()
    }

    /// Growth bound (exact when a spectral form is present, a probed
    /// estimate with margin otherwise).
    pub fn spectral_abscissa(&self) -> f64 {
        self.omega
    }

    pub fn is_stable(&self) -> bool {
        self.omega < 0.0
    }
}

/// Uniform sample grid for signals on (0, T).
#[derive(Debug, Clone)]
pub struct TimeGrid {
    step: f64,
    count: usize,
    tail_tolerance: f64,
}

impl TimeGrid {
    pub fn new(step: f64, count: usize, tail_tolerance: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(HalfcalcError::Domain("grid step must be positive".into()));
        }
        if count == 0 || !count.is_power_of_two() {
            return Err(HalfcalcError::Shape(
                "grid length must be a power of two".into(),
            ));
        }
        Ok(Self {
            step,
            count,
            tail_tolerance,
        })
    }

    /// Default grid for a stable generator: N = 2^14, step 1/128,
    /// horizon long enough that e^{omega T} <= 1e-10.
    pub fn default_for(gen: &Generator) -> Result<Self> {
        let omega = gen.spectral_abscissa();
        let needed = (1e-10_f64).ln() / omega; // T with e^{omega T} = 1e-10
        let count = 1usize << 14;
        let mut step = 1.0 / 128.0;
        if (count as f64) * step < needed {
            step = needed / count as f64;
        }
        Self::new(step, count, 1e-10)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.count as f64
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    pub fn node(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    /// Grid with halved step and doubled count (same horizon).
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.step / 2.0, self.count * 2, self.tail_tolerance)
    }
}

/// Build a generator, classifying stability.
///
/// With a spectral form the growth bound is exact (max real part of the
/// eigenvalues); otherwise it is probed from log-norms of e^{tA} at a few
/// times plus a +0.05 safety margin, and never claimed sharp.
pub fn make_generator(a: CMatrix, spectral: Option<SpectralForm>) -> Result<Generator> {
    if !a.is_square() {
        return Err(HalfcalcError::Shape("generator must be square".into()));
    }
    let omega = match &spectral {
        Some(form) => {
            if form.eigenvalues.len() != a.rows() {
                return Err(HalfcalcError::Validation(
                    "spectral form dimension does not match A".into(),
                ));
            }
            let rebuilt = form.assemble(|l| l)?;
            let resid = rebuilt.sub(&a)?.norm_fro();
            if resid > 1e-10 * a.norm_fro().max(1e-300) * condition_2(&form.v)?.max(1.0) {
                return Err(HalfcalcError::Validation(format!(
                    "spectral form does not reconstruct A (residual {:.3e})",
                    resid
                )));
            }
            form.eigenvalues
                .iter()
                .map(|l| l.re)
                .fold(f64::NEG_INFINITY, f64::max)
        }
        None => {
            // log ||e^{tA}|| is subadditive in t, so the quotient decreases
            // toward the growth bound; the minimum over a finite probe set
            // is a safe upper estimate.
            let mut probe = f64::INFINITY;
            for &t in &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
                let e = expm_matrix(&a, t)?;
                let norm = op_norm(&e)?;
                if norm <= 0.0 || !norm.is_finite() {
                    break;
                }
                probe = probe.min(norm.ln() / t);
                if norm < 1e-30 {
                    break;
                }
            }
            probe + 0.05
        }
    };
    if omega >= 0.0 {
        return Err(HalfcalcError::Unstable { omega });
    }
    Ok(Generator { a, spectral, omega })
}

/// Shift A by -v I, keeping the spectral form if present. The result need
/// not be stable; callers validate through `make_generator`.
pub fn shifted_matrix(gen: &Generator, v: f64) -> Result<(CMatrix, Option<SpectralForm>)> {
    let n = gen.dim();
    let mut a = gen.matrix().clone();
    for i in 0..n {
        a[(i, i)] -= Complex64::new(v, 0.0);
    }
    let spectral = match gen.spectral() {
        Some(form) => Some(SpectralForm::new(
            form.eigenvalues
                .iter()
                .map(|&l| l - Complex64::new(v, 0.0))
                .collect(),
            form.v.clone(),
            form.vinv.clone(),
        )?),
        None => None,
    };
    Ok((a, spectral))
}

// Pade(6,6) coefficients for the exponential.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Scaling-and-squaring matrix exponential of t*A with diagonal Pade(6,6);
/// the scaled norm is brought below 0.5 before the Pade solve.
pub fn expm_matrix(a: &CMatrix, t: f64) -> Result<CMatrix> {
    if !t.is_finite() {
        return Err(HalfcalcError::Domain("time must be finite".into()));
    }
    let n = a.rows();
    let b = a.scale(Complex64::new(t, 0.0));
    let norm = b.norm_1();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = b.scale(Complex64::new(1.0 / 2f64.powi(squarings as i32), 0.0));

    // p(X) = even + odd, q(X) = even - odd
    let mut powers = Vec::with_capacity(7);
    powers.push(CMatrix::identity(n));
    for k in 1..7 {
        let prev: &CMatrix = &powers[k - 1];
        powers.push(matmul(prev, &scaled)?);
    }
    let mut even = CMatrix::zeros(n, n);
    let mut odd = CMatrix::zeros(n, n);
    for k in 0..7 {
        let term = powers[k].scale(Complex64::new(PADE6[k], 0.0));
        if k % 2 == 0 {
            even = even.add(&term)?;
        } else {
            odd = odd.add(&term)?;
        }
    }
    let p = even.add(&odd)?;
    let q = even.sub(&odd)?;
    let mut e = lu_solve(&q, &p)?;
    for _ in 0..squarings {
        e = matmul(&e, &e)?;
    }
    Ok(e)
}

/// e^{tA} for t >= 0. Uses the spectral form when available.
pub fn expm(gen: &Generator, t: f64) -> Result<CMatrix> {
    if t < 0.0 {
        return Err(HalfcalcError::Domain(
            "semigroup is defined for t >= 0".into(),
        ));
    }
    match gen.spectral() {
        Some(form) => form.assemble(|l| (l * t).exp()),
        None => expm_matrix(gen.matrix(), t),
    }
}

/// Resolvent (sI - A)^{-1}.
pub fn resolvent(gen: &Generator, s: Complex64) -> Result<CMatrix> {
    resolvent_of(gen.matrix(), s)
}

/// Resolvent of a raw matrix; singular shifts surface as a pivot error.
pub fn resolvent_of(a: &CMatrix, s: Complex64) -> Result<CMatrix> {
    let n = a.rows();
    let mut m = a.scale(Complex64::new(-1.0, 0.0));
    for i in 0..n {
        m[(i, i)] += s;
    }
    lu_solve(&m, &CMatrix::identity(n))
}

/// Deviation of the quadrature of the Laplace transform of the semigroup
/// from the resolvent, || int_0^T e^{-st} e^{tA} dt + tail - R(s,A) ||_2.
/// Composite Simpson over the grid nodes plus an analytic tail bound.
pub fn resolvent_laplace_check(gen: &Generator, s: Complex64, grid: &TimeGrid) -> Result<f64> {
    if s.re <= 0.0 {
        return Err(HalfcalcError::Domain(
            "Laplace check requires Re(s) > 0".into(),
        ));
    }
    let n = gen.dim();
    let step = grid.step();
    let e_step = expm(gen, step)?;
    // Simpson over [0, N*step] with N intervals (N even since N is a power of two)
    let mut integral = CMatrix::zeros(n, n);
    let mut current = CMatrix::identity(n); // e^{t_k A}
    let count = grid.count();
    for k in 0..=count {
        let weight = if k == 0 || k == count {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let factor = (-s * (step * k as f64)).exp() * weight;
        integral = integral.add(&current.scale(factor))?;
        if k < count {
            current = matmul(&e_step, &current)?;
        }
    }
    integral = integral.scale(Complex64::new(step / 3.0, 0.0));
    let exact = resolvent(gen, s)?;
    let deviation = op_norm(&integral.sub(&exact)?)?;
    let omega = gen.spectral_abscissa();
    let horizon = step * count as f64;
    let tail = ((omega - s.re) * horizon).exp() / (s.re - omega);
    Ok(deviation + tail)
}

/// Samples f_k = <y, T(t_k) x> = y^H e^{t_k A} x by stepping with a single
/// per-grid exponential E = e^{step A}. The pairing is conjugate-linear in
/// the first argument.
pub fn scalar_trajectory(
    gen: &Generator,
    y: &[Complex64],
    x: &[Complex64],
    grid: &TimeGrid,
) -> Result<SampledSignal> {
    if y.len() != gen.dim() || x.len() != gen.dim() {
        return Err(HalfcalcError::Shape(
            "trajectory vectors must match the generator dimension".into(),
        ));
    }
    let e_step = expm(gen, grid.step())?;
    let mut state = x.to_vec();
    let mut values = Vec::with_capacity(grid.count());
    for k in 0..grid.count() {
        let pairing: Complex64 = y.iter().zip(&state).map(|(yi, xi)| yi.conj() * xi).sum();
        values.push(pairing);
        if k + 1 < grid.count() {
            state = e_step.apply(&state)?;
        }
    }
    SampledSignal::new(grid.clone(), values)
}

/// All matrix trajectories at once: returns E^k = e^{t_k A} applied to the
/// basis, i.e. samples of the full matrix semigroup, stepping column-wise.
pub fn matrix_trajectory(gen: &Generator, grid: &TimeGrid) -> Result<Vec<CMatrix>> {
    let e_step = expm(gen, grid.step())?;
    let mut out = Vec::with_capacity(grid.count());
    let mut current = CMatrix::identity(gen.dim());
    for k in 0..grid.count() {
        out.push(current.clone());
        if k + 1 < grid.count() {
            current = matmul(&e_step, &current)?;
        }
    }
    Ok(out)
}
