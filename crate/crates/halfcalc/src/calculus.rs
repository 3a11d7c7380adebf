//! g(A) along four cross-validating paths: a spectral oracle, the Phillips
//! integral, the half-plane contour calculus, and the output-mapping
//! (Toeplitz) construction. Also the Lambda extension, the calculus-law
//! battery, rescaling, the scaling check for g(A)R(s,A), and the rational
//! approximation of the semigroup.

use std::fmt;

use num_complex::Complex64;

use crate::error::{HalfcalcError, Result};
use crate::functions::{
    combine, constant, shift, exp_rational_sequence, regularize, CombineOp, DecayClass,
    HalfPlaneFunction,
};
use crate::linalg::{condition_2, matmul, op_norm, CMatrix};
use crate::semigroup::{
    make_generator, matrix_trajectory, resolvent, Generator, SpectralForm, TimeGrid,
};
use crate::toeplitz::{toeplitz_apply, SampledSignal};

/// Which computation produced a result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathKind {
    SpectralOracle,
    Phillips,
    Contour,
    OutputMap,
    LambdaLimit(Box<PathKind>),
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::SpectralOracle => write!(f, "spectral-oracle"),
            PathKind::Phillips => write!(f, "phillips"),
            PathKind::Contour => write!(f, "contour"),
            PathKind::OutputMap => write!(f, "output-map"),
            PathKind::LambdaLimit(base) => write!(f, "lambda-limit({base})"),
        }
    }
}

/// Default agreement tolerance recorded with every result of a path; these
/// are grid-dependent artifact defaults, not theorems.
pub fn path_tolerance(path: &PathKind) -> f64 {
    match path {
        PathKind::SpectralOracle => 1e-12,
        PathKind::Phillips => 1e-8,
        PathKind::Contour => 1e-5,
        PathKind::OutputMap => 1e-3,
        PathKind::LambdaLimit(base) => path_tolerance(base),
    }
}

/// A computed g(A) with its a-posteriori error estimate and provenance.
#[derive(Debug, Clone)]
pub struct CalculusResult {
    pub matrix: CMatrix,
    pub path: PathKind,
    pub error_estimate: f64,
    pub tolerance: f64,
    pub metadata: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

impl CalculusResult {
    fn new(matrix: CMatrix, path: PathKind, error_estimate: f64) -> Self {
        let tolerance = path_tolerance(&path);
        Self {
            matrix,
            path,
            error_estimate,
            tolerance,
            metadata: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn with_meta(mut self, key: &str, value: String) -> Self {
        self.metadata.push((key.to_string(), value));
        self
    }
}

/// Tunables for the non-oracle paths.
#[derive(Debug, Clone)]
pub struct PathOptions {
    /// Gauss-Legendre panels for the Phillips integral (8 nodes each)
    pub phillips_panels: usize,
    /// contour abscissa; defaults to min(1, -omega)/2
    pub contour_eps: Option<f64>,
    /// contour truncation height
    pub contour_y: f64,
    /// output-map grid; defaults to TimeGrid::default_for
    pub grid: Option<TimeGrid>,
    /// Lambda-extension schedule start and tolerance
    pub lambda0: f64,
    pub lambda_tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            phillips_panels: 64,
            contour_eps: None,
            contour_y: 1000.0,
            grid: None,
            lambda0: 1.0,
            lambda_tol: 1e-9,
        }
    }
}

fn op_diff(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    op_norm(&a.sub(b)?)
}

/// e^{tA} for either sign of t (finite dimension: always invertible).
fn expm_signed(gen: &Generator, t: f64) -> Result<CMatrix> {
    match gen.spectral() {
        Some(form) => form.assemble(|l| (l * t).exp()),
        None => crate::semigroup::expm_matrix(gen.matrix(), t),
    }
}

// ---------------------------------------------------------------------------
// spectral oracle

/// g(A) = V diag(g(lambda_i)) V^{-1}: exact up to conditioning, and the
/// anchor every other path is compared against.
pub fn oracle_spectral(g: &HalfPlaneFunction, gen: &Generator) -> Result<CalculusResult> {
    let form = gen.spectral().ok_or(HalfcalcError::OracleUnavailable)?;
    if form.eigenvalues.iter().any(|l| l.re >= 0.0) {
        return Err(HalfcalcError::Domain(
            "oracle needs all eigenvalues in the open left half-plane".into(),
        ));
    }
    let matrix = form.assemble(|l| g.eval(l))?;
    let gmax = form
        .eigenvalues
        .iter()
        .map(|&l| g.eval(l).norm())
        .fold(0.0, f64::max);
    let kappa = condition_2(&form.v)?;
    let err = kappa * 1e-14 * gmax;
    Ok(CalculusResult::new(matrix, PathKind::SpectralOracle, err)
        .with_meta("kappa_v", format!("{kappa:.6e}")))
}

// ---------------------------------------------------------------------------
// Phillips integral

// 8-point Gauss-Legendre rule on [-1, 1]
const GL8_X: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_W: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn phillips_quadrature(
    g: &HalfPlaneFunction,
    gen: &Generator,
    t_q: f64,
    panels: usize,
) -> Result<CMatrix> {
    let kernel = g
        .phillips_kernel()
        .ok_or_else(|| HalfcalcError::PathInapplicable("symbol has no Phillips kernel".into()))?;
    let n = gen.dim();
    let width = t_q / panels as f64;
    let partials: Vec<Result<CMatrix>> = crate::parallel::map_indexed(panels, |p| {
        let left = p as f64 * width;
        let mut acc = CMatrix::zeros(n, n);
        for k in 0..8 {
            let s = left + 0.5 * width * (GL8_X[k] + 1.0);
            let w = 0.5 * width * GL8_W[k];
            let h = kernel.eval(-s);
            let e = crate::semigroup::expm(gen, s)?;
            acc = acc.add(&e.scale(h * w))?;
        }
        Ok(acc)
    });
    let mut total = CMatrix::zeros(n, n);
    for p in partials {
        total = total.add(&p?)?;
    }
    Ok(total)
}

/// g(A) = int_0^inf h(-s) e^{sA} ds by composite Gauss-Legendre; the error
/// estimate is the change under halving the panel count, plus the tail
/// target and a conditioning floor.
pub fn phillips_apply(
    g: &HalfPlaneFunction,
    gen: &Generator,
    panels: usize,
) -> Result<CalculusResult> {
    let kernel = g
        .phillips_kernel()
        .ok_or_else(|| HalfcalcError::PathInapplicable("symbol has no Phillips kernel".into()))?;
    if !kernel.is_integrable() {
        return Err(HalfcalcError::PathInapplicable(
            "Phillips kernel is not flagged integrable".into(),
        ));
    }
    if panels < 2 {
        return Err(HalfcalcError::Domain("need at least 2 panels".into()));
    }
    // quadrature horizon: |h(-s)| * ||e^{sA}|| <= 1e-10
    let mut t_q = 1.0;
    while t_q < 4096.0 {
        let decay = kernel.eval(-t_q).norm() * op_norm(&crate::semigroup::expm(gen, t_q)?)?;
        if decay <= 1e-10 {
            break;
        }
        t_q *= 2.0;
    }
    let full = phillips_quadrature(g, gen, t_q, panels)?;
    let half = phillips_quadrature(g, gen, t_q, panels / 2)?;
    let delta = op_diff(&full, &half)?;
    let floor = 1e-12 * (1.0 + op_norm(&full)?);
    let err = delta + 1e-10 + floor;
    Ok(CalculusResult::new(full, PathKind::Phillips, err)
        .with_meta("panels", format!("{panels} x 8"))
        .with_meta("horizon", format!("{t_q}")))
}

// ---------------------------------------------------------------------------
// half-plane contour

fn contour_trapezoid(
    f: &HalfPlaneFunction,
    gen: &Generator,
    eps: f64,
    y_max: f64,
) -> Result<(CMatrix, f64)> {
    let n = gen.dim();
    let dy = (1.0 / 256.0) * eps.min(1.0);
    let steps = (2.0 * y_max / dy).ceil() as usize;
    let chunks = 512.min(steps);
    let per = steps / chunks + 1;
    let partials: Vec<Result<(CMatrix, f64)>> = crate::parallel::map_indexed(chunks, |c| {
        let lo = c * per;
        let hi = ((c + 1) * per).min(steps + 1);
        let mut acc = CMatrix::zeros(n, n);
        let mut sup_r: f64 = 0.0;
        for k in lo..hi {
            let y = -y_max + k as f64 * dy;
            let z = Complex64::new(-eps, y);
            let r = crate::semigroup::resolvent(gen, z)?;
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            acc = acc.add(&r.scale(f.eval(z) * w))?;
            if k % 4096 == 0 {
                sup_r = sup_r.max(op_norm(&r)?);
            }
        }
        Ok((acc, sup_r))
    });
    let mut total = CMatrix::zeros(n, n);
    let mut sup_r: f64 = 0.0;
    for p in partials {
        let (m, s) = p?;
        total = total.add(&m)?;
        sup_r = sup_r.max(s);
    }
    // (1/2 pi i) * dz with dz = i dy: prefactor dy / 2 pi
    Ok((total.scale(Complex64::new(dy / (2.0 * std::f64::consts::PI), 0.0)), sup_r))
}

/// Primary calculus for integrable symbols:
/// f_HP(A) = (1/2 pi i) int_{iR - eps} f(z) R(z, A) dz, with a tail bound
/// and an eps-independence check folded into the error estimate.
pub fn contour_apply_h1(
    f: &HalfPlaneFunction,
    gen: &Generator,
    eps: f64,
    y_max: f64,
) -> Result<CalculusResult> {
    let alpha = match f.decay_class() {
        DecayClass::H1Decay(a) if a > 1.0 => a,
        _ => {
            return Err(HalfcalcError::PathInapplicable(
                "contour quadrature needs an integrable symbol; use the regularized route".into(),
            ))
        }
    };
    let bound = -gen.spectral_abscissa();
    if !(eps > 0.0 && eps < bound) {
        return Err(HalfcalcError::ContourPlacement { epsilon: eps, bound });
    }
    let (main, sup_r) = contour_trapezoid(f, gen, eps, y_max)?;
    let (check, _) = contour_trapezoid(f, gen, eps / 2.0, y_max)?;
    let eps_dev = op_diff(&main, &check)?;
    let c_fit = f.eval(Complex64::new(-eps, y_max)).norm() * y_max.powf(alpha);
    let tail = c_fit * y_max.powf(1.0 - alpha) / (alpha - 1.0) * sup_r
        / (2.0 * std::f64::consts::PI);
    let floor = 1e-12 * (1.0 + op_norm(&main)?);
    let err = eps_dev + tail + floor;
    Ok(CalculusResult::new(main, PathKind::Contour, err)
        .with_meta("eps", format!("{eps}"))
        .with_meta("y_max", format!("{y_max}"))
        .with_meta("eps_independence_dev", format!("{eps_dev:.3e}")))
}

/// General symbols through the regularized identity
/// f(A) = (I - A)^2 (e f)_HP(A) with e(z) = (1 - z)^{-2}.
pub fn contour_apply_general(f: &HalfPlaneFunction, gen: &Generator) -> Result<CalculusResult> {
    let opts = PathOptions::default();
    let eps = default_eps(gen, &opts);
    let inner = contour_apply_h1(&regularize(f), gen, eps, opts.contour_y)?;
    let n = gen.dim();
    let mut i_minus_a = gen.matrix().scale(Complex64::new(-1.0, 0.0));
    for i in 0..n {
        i_minus_a[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let squared = matmul(&i_minus_a, &i_minus_a)?;
    let matrix = matmul(&squared, &inner.matrix)?;
    let err = inner.error_estimate * op_norm(&squared)?;
    let mut out = CalculusResult::new(matrix, PathKind::Contour, err)
        .with_meta("route", "regularized (I-A)^2 (e f)_HP(A)".into());
    out.metadata.extend(inner.metadata);
    // the general route carries the looser default tolerance
    out.tolerance = 1e-5;
    Ok(out)
}

fn default_eps(gen: &Generator, opts: &PathOptions) -> f64 {
    opts.contour_eps
        .unwrap_or_else(|| 0.5 * (-gen.spectral_abscissa()).min(1.0))
}

// ---------------------------------------------------------------------------
// output mapping

/// The output-mapping construction: sample <e_i, g(A) T(t) e_j> as the
/// Toeplitz operator acting on the semigroup trajectory, read the matrix off
/// at t = step (the first clean sample) and undo T(step). The estimate is
/// the deviation from the reconstruction at t = 2 step.
pub fn outputmap_apply(
    g: &HalfPlaneFunction,
    gen: &Generator,
    grid: &TimeGrid,
) -> Result<CalculusResult> {
    let n = gen.dim();
    let traj = matrix_trajectory(gen, grid)?;
    let pairs: Vec<Result<(Complex64, Complex64, Vec<String>)>> =
        crate::parallel::map_indexed(n * n, |p| {
            let (i, j) = (p / n, p % n);
            let values: Vec<Complex64> = traj.iter().map(|m| m[(i, j)]).collect();
            let sig = SampledSignal::new(grid.clone(), values)?;
            let out = toeplitz_apply(g, &sig)?;
            Ok((
                out.values()[1],
                out.values()[2],
                out.warnings().to_vec(),
            ))
        });
    let mut g1 = CMatrix::zeros(n, n);
    let mut g2 = CMatrix::zeros(n, n);
    let mut warnings = Vec::new();
    for (p, cell) in pairs.into_iter().enumerate() {
        let (v1, v2, w) = cell?;
        g1[(p / n, p % n)] = v1;
        g2[(p / n, p % n)] = v2;
        if !w.is_empty() && warnings.is_empty() {
            warnings = w;
        }
    }
    let e_back_1 = expm_signed(gen, -grid.step())?;
    let e_back_2 = expm_signed(gen, -2.0 * grid.step())?;
    let rec1 = matmul(&g1, &e_back_1)?;
    let rec2 = matmul(&g2, &e_back_2)?;
    let err = op_diff(&rec1, &rec2)?;
    let mut out = CalculusResult::new(rec1, PathKind::OutputMap, err)
        .with_meta("grid_step", format!("{}", grid.step()))
        .with_meta("grid_count", format!("{}", grid.count()));
    out.warnings = warnings;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lambda extension

#[derive(Debug, Clone)]
pub struct LambdaStep {
    pub lambda: f64,
    pub value_norm: f64,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct LambdaExtension {
    pub limit: Vec<Complex64>,
    pub converged: bool,
    pub trace: Vec<LambdaStep>,
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// C_Lambda x = lim lambda C R(lambda, A) x along the doubling schedule
/// lambda_k = lambda0 2^k. Non-convergence within 40 steps is reported, not
/// raised: the extension is allowed to have a proper domain.
pub fn lambda_extension<C>(
    apply_c: C,
    gen: &Generator,
    x: &[Complex64],
    lambda0: f64,
    tol: f64,
) -> Result<LambdaExtension>
where
    C: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    if !(lambda0 > 0.0 && lambda0 > gen.spectral_abscissa()) {
        return Err(HalfcalcError::Domain(
            "lambda schedule must start right of 0 and of the growth bound".into(),
        ));
    }
    if x.len() != gen.dim() {
        return Err(HalfcalcError::Shape(
            "vector length must match the generator dimension".into(),
        ));
    }
    let mut trace = Vec::new();
    let mut prev: Option<Vec<Complex64>> = None;
    let mut small_in_a_row = 0;
    let mut lambda = lambda0;
    for _ in 0..=40 {
        let r = resolvent(gen, Complex64::new(lambda, 0.0))?;
        let rx = r.apply(x)?;
        let mut v = apply_c(&rx)?;
        for c in &mut v {
            *c *= lambda;
        }
        let delta = match &prev {
            Some(p) => {
                let d: f64 = v
                    .iter()
                    .zip(p)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                d
            }
            None => f64::INFINITY,
        };
        trace.push(LambdaStep {
            lambda,
            value_norm: vec_norm(&v),
            delta,
        });
        if delta <= tol * (1.0 + vec_norm(&v)) {
            small_in_a_row += 1;
            if small_in_a_row >= 2 {
                return Ok(LambdaExtension {
                    limit: v,
                    converged: true,
                    trace,
                });
            }
        } else {
            small_in_a_row = 0;
        }
        prev = Some(v);
        lambda *= 2.0;
    }
    Ok(LambdaExtension {
        limit: prev.unwrap(),
        converged: false,
        trace,
    })
}

// ---------------------------------------------------------------------------
// scaling check

#[derive(Debug, Clone)]
pub struct ScalingReport {
    /// (s, sqrt(s) ||g(A) R(s,A)|| / ||g||_inf)
    pub values: Vec<(f64, f64)>,
    pub slope: f64,
    pub pass: bool,
}

/// The weak Weiss-type bound ||g(A) R(s,A)|| <~ ||g||_inf / sqrt(s): the
/// scaled quantity must show no growth trend in s.
pub fn weak_weiss_scaling_check(
    g: &HalfPlaneFunction,
    gen: &Generator,
    s_list: &[f64],
) -> Result<ScalingReport> {
    let ga = apply_best(g, gen)?;
    let sup = g.sup_norm_est().max(1e-300);
    let mut values = Vec::with_capacity(s_list.len());
    for &s in s_list {
        if s <= 0.0 {
            return Err(HalfcalcError::Domain("scaling abscissae must be positive".into()));
        }
        let r = resolvent(gen, Complex64::new(s, 0.0))?;
        let v = s.sqrt() * op_norm(&matmul(&ga.matrix, &r)?)? / sup;
        values.push((s, v));
    }
    // log-log least squares slope
    let pts: Vec<(f64, f64)> = values
        .iter()
        .filter(|(_, v)| *v > 1e-300)
        .map(|(s, v)| (s.ln(), v.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        0.0
    };
    Ok(ScalingReport {
        values,
        slope,
        pass: slope <= 0.1,
    })
}

/// Best available path: the oracle when a spectral form exists, the output
/// mapping otherwise.
pub fn apply_best(g: &HalfPlaneFunction, gen: &Generator) -> Result<CalculusResult> {
    match gen.spectral() {
        Some(_) => oracle_spectral(g, gen),
        None => outputmap_apply(g, gen, &TimeGrid::default_for(gen)?),
    }
}

// ---------------------------------------------------------------------------
// path dispatch

/// Run one path with the given options.
pub fn apply_path(
    path: &PathKind,
    g: &HalfPlaneFunction,
    gen: &Generator,
    opts: &PathOptions,
) -> Result<CalculusResult> {
    match path {
        PathKind::SpectralOracle => oracle_spectral(g, gen),
        PathKind::Phillips => phillips_apply(g, gen, opts.phillips_panels),
        PathKind::Contour => match g.decay_class() {
            DecayClass::H1Decay(a) if a > 1.0 => {
                contour_apply_h1(g, gen, default_eps(gen, opts), opts.contour_y)
            }
            _ => contour_apply_general(g, gen),
        },
        PathKind::OutputMap => {
            let grid = match &opts.grid {
                Some(grid) => grid.clone(),
                None => TimeGrid::default_for(gen)?,
            };
            outputmap_apply(g, gen, &grid)
        }
        PathKind::LambdaLimit(base) => {
            let inner = apply_path(base, g, gen, opts)?;
            let n = gen.dim();
            let mut columns = Vec::with_capacity(n);
            let mut all_converged = true;
            for j in 0..n {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[j] = Complex64::new(1.0, 0.0);
                let ext = lambda_extension(
                    |v| inner.matrix.apply(v),
                    gen,
                    &e,
                    opts.lambda0,
                    opts.lambda_tol,
                )?;
                all_converged &= ext.converged;
                columns.push(ext.limit);
            }
            let mut m = CMatrix::zeros(n, n);
            for (j, col) in columns.iter().enumerate() {
                m.set_column(j, col);
            }
            let err = inner.error_estimate + opts.lambda_tol;
            let mut out = CalculusResult::new(m, path.clone(), err);
            if !all_converged {
                out.warnings
                    .push("lambda extension did not converge on every basis vector".into());
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// calculus laws

#[derive(Debug, Clone)]
pub struct LawsReport {
    pub identity: f64,
    pub additivity: f64,
    pub multiplicativity: f64,
    pub semigroup_commutation: f64,
    pub resolvent_commutation: f64,
}

impl LawsReport {
    pub fn max_residual(&self) -> f64 {
        self.identity
            .max(self.additivity)
            .max(self.multiplicativity)
            .max(self.semigroup_commutation)
            .max(self.resolvent_commutation)
    }
}

/// The functional-calculus laws as residuals, all relative to
/// ||g1(A)|| ||g2(A)|| + 1.
pub fn calculus_laws(
    g1: &HalfPlaneFunction,
    g2: &HalfPlaneFunction,
    gen: &Generator,
    path: &PathKind,
    opts: &PathOptions,
) -> Result<LawsReport> {
    let a1 = apply_path(path, g1, gen, opts)?;
    let a2 = apply_path(path, g2, gen, opts)?;
    let scale = op_norm(&a1.matrix)? * op_norm(&a2.matrix)? + 1.0;

    let one = apply_path(path, &constant(Complex64::new(1.0, 0.0)), gen, opts)?;
    let identity = op_diff(&one.matrix, &CMatrix::identity(gen.dim()))? / scale;

    let sum = apply_path(path, &combine(CombineOp::Sum, g1, g2), gen, opts)?;
    let additivity = op_diff(&sum.matrix, &a1.matrix.add(&a2.matrix)?)? / scale;

    let prod = apply_path(path, &combine(CombineOp::Product, g1, g2), gen, opts)?;
    let multiplicativity = op_diff(&prod.matrix, &matmul(&a1.matrix, &a2.matrix)?)? / scale;

    let mut semigroup_commutation: f64 = 0.0;
    for &t in &[0.5, 2.0] {
        let e = crate::semigroup::expm(gen, t)?;
        let d = op_diff(&matmul(&a1.matrix, &e)?, &matmul(&e, &a1.matrix)?)? / scale;
        semigroup_commutation = semigroup_commutation.max(d);
    }

    let p = resolvent(gen, Complex64::new(1.0, 0.0))?;
    let resolvent_commutation =
        op_diff(&matmul(&a1.matrix, &p)?, &matmul(&p, &a1.matrix)?)? / scale;

    Ok(LawsReport {
        identity,
        additivity,
        multiplicativity,
        semigroup_commutation,
        resolvent_commutation,
    })
}

// ---------------------------------------------------------------------------
// rescaling

/// f(A) := f(. + v)(A - v I) for a generator that is only stable after the
/// shift: the symbol lives on a half-plane left of Re(z) = v.
pub fn rescaled_apply(
    f: &HalfPlaneFunction,
    a: &CMatrix,
    spectral: Option<SpectralForm>,
    v: f64,
    path: &PathKind,
    opts: &PathOptions,
) -> Result<CalculusResult> {
    let n = a.rows();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= Complex64::new(v, 0.0);
    }
    let shifted_spectral = match spectral {
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
    let gen = match make_generator(shifted, shifted_spectral) {
        Ok(gen) => gen,
        Err(HalfcalcError::Unstable { omega }) => {
            return Err(HalfcalcError::Rescaling {
                omega: omega + v,
                v,
            })
        }
        Err(e) => return Err(e),
    };
    let mut out = apply_path(path, &shift(f, v), &gen, opts)?;
    out.metadata.push(("rescaled_by".into(), format!("{v}")));
    Ok(out)
}

// ---------------------------------------------------------------------------
// convergence of the rational semigroup approximation

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// (n, ||r_n(A)x - e^{tA}x||)
    pub errors: Vec<(usize, f64)>,
    pub pass: bool,
}

/// r_n(z) = (1 - tz/n)^{-n} applied along the chosen path must approach
/// e^{tA}x: errors strictly decreasing and the last at most a tenth of the
/// first (trivial inputs pass vacuously).
pub fn convergence_lemma_check(
    t: f64,
    gen: &Generator,
    x: &[Complex64],
    n_list: &[usize],
    path: &PathKind,
    opts: &PathOptions,
) -> Result<ConvergenceReport> {
    let target = crate::semigroup::expm(gen, t)?.apply(x)?;
    let mut errors = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let rn = exp_rational_sequence(t, n)?;
        let rna = apply_path(path, &rn, gen, opts)?;
        let got = rna.matrix.apply(x)?;
        let e: f64 = got
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        errors.push((n, e));
    }
    let scale = vec_norm(x).max(1.0);
    let trivial = errors.iter().all(|(_, e)| *e <= 1e-13 * scale);
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    let tenth = match (errors.first(), errors.last()) {
        (Some((_, e1)), Some((_, elast))) => *elast <= e1 / 10.0,
        _ => false,
    };
    Ok(ConvergenceReport {
        errors,
        pass: trivial || (decreasing && tenth),
    })
}

// ---------------------------------------------------------------------------
// path comparison (the coincidence check)

#[derive(Debug, Clone)]
pub struct PathDeviation {
    pub path: PathKind,
    pub deviation_from_oracle: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct PathComparison {
    pub oracle: CalculusResult,
    pub results: Vec<CalculusResult>,
    pub deviations: Vec<PathDeviation>,
    pub pairwise: Vec<(PathKind, PathKind, f64)>,
    pub inapplicable: Vec<(PathKind, String)>,
}

/// Run every applicable path against the spectral oracle and report all
/// pairwise deviations; inapplicable paths are listed, not failed.
pub fn path_compare(
    g: &HalfPlaneFunction,
    gen: &Generator,
    opts: &PathOptions,
) -> Result<PathComparison> {
    let oracle = oracle_spectral(g, gen)?;
    let mut results = Vec::new();
    let mut inapplicable = Vec::new();
    for path in [PathKind::Phillips, PathKind::Contour, PathKind::OutputMap] {
        match apply_path(&path, g, gen, opts) {
            Ok(r) => results.push(r),
            Err(HalfcalcError::PathInapplicable(msg)) => inapplicable.push((path, msg)),
            Err(HalfcalcError::Decay(msg)) => inapplicable.push((path, msg)),
            Err(e) => return Err(e),
        }
    }
    let mut deviations = Vec::new();
    for r in &results {
        deviations.push(PathDeviation {
            path: r.path.clone(),
            deviation_from_oracle: op_diff(&r.matrix, &oracle.matrix)?,
            error_estimate: r.error_estimate,
        });
    }
    let mut pairwise = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            pairwise.push((
                results[i].path.clone(),
                results[j].path.clone(),
                op_diff(&results[i].matrix, &results[j].matrix)?,
            ));
        }
    }
    Ok(PathComparison {
        oracle,
        results,
        deviations,
        pairwise,
        inapplicable,
    })
}
