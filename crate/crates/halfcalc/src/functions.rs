//! The symbol library: bounded analytic functions on the left half-plane,
//! the special resolvent/exponential symbols, rational symbols, Phillips
//! kernels, regularization and the rational approximation sequence for the
//! exponential.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{HalfcalcError, Result};

/// How fast a symbol decays along the boundary; `H1Decay(alpha)` means
/// |g(z)| = O(|z|^-alpha) with alpha > 1, which makes the symbol integrable
/// on vertical lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayClass {
    BoundedOnly,
    H1Decay(f64),
}

type EvalFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type KernelFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Inverse boundary transform of a symbol: h on (-inf, 0] with g = L(h).
#[derive(Clone)]
pub struct PhillipsKernel {
    h: KernelFn,
    l1_norm_est: f64,
    integrable: bool,
    support_note: String,
}

impl PhillipsKernel {
    pub fn new(
        h: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        l1_norm_est: f64,
        integrable: bool,
        support_note: impl Into<String>,
    ) -> Self {
        Self {
            h: Arc::new(h),
            l1_norm_est,
            integrable,
            support_note: support_note.into(),
        }
    }

    /// Kernel value at t <= 0.
    pub fn eval(&self, t: f64) -> Complex64 {
        (self.h)(t)
    }

    pub fn l1_norm_est(&self) -> f64 {
        self.l1_norm_est
    }

    pub fn is_integrable(&self) -> bool {
        self.integrable
    }

    pub fn support_note(&self) -> &str {
        &self.support_note
    }
}

impl fmt::Debug for PhillipsKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhillipsKernel")
            .field("l1_norm_est", &self.l1_norm_est)
            .field("integrable", &self.integrable)
            .field("support_note", &self.support_note)
            .finish()
    }
}

/// An evaluable symbol g on the closed left half-plane.
#[derive(Clone)]
pub struct HalfPlaneFunction {
    eval: EvalFn,
    sup_norm_est: f64,
    decay_class: DecayClass,
    phillips_kernel: Option<PhillipsKernel>,
    description: String,
}

impl fmt::Debug for HalfPlaneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HalfPlaneFunction")
            .field("description", &self.description)
            .field("sup_norm_est", &self.sup_norm_est)
            .field("decay_class", &self.decay_class)
            .finish()
    }
}

/// Log-spaced boundary sample frequencies up to 1e6 (both signs, plus 0).
fn boundary_samples() -> Vec<f64> {
    let mut omegas = vec![0.0];
    let per_decade = 16;
    let decades = 8; // 1e-2 .. 1e6
    for k in 0..=decades * per_decade {
        let w = 1e-2 * 10f64.powf(k as f64 / per_decade as f64);
        omegas.push(w);
        omegas.push(-w);
    }
    omegas
}

impl HalfPlaneFunction {
    pub fn new(
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        sup_norm_est: f64,
        decay_class: DecayClass,
        phillips_kernel: Option<PhillipsKernel>,
        description: impl Into<String>,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            sup_norm_est,
            decay_class,
            phillips_kernel,
            description: description.into(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn sup_norm_est(&self) -> f64 {
        self.sup_norm_est
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    pub fn phillips_kernel(&self) -> Option<&PhillipsKernel> {
        self.phillips_kernel.as_ref()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Maximum modulus over the boundary sample set.
    pub fn boundary_sup(&self) -> f64 {
        boundary_samples()
            .into_iter()
            .map(|w| self.eval(Complex64::new(0.0, w)).norm())
            .fold(0.0, f64::max)
    }

    /// Check the claimed |g(z)| <= c |z|^-alpha decay on the line i*R - 1,
    /// with c fitted at |z| = 1e2. Returns the worst excess factor.
    pub fn verify_decay(&self) -> Result<f64> {
        let alpha = match self.decay_class {
            DecayClass::H1Decay(a) => a,
            DecayClass::BoundedOnly => {
                return Err(HalfcalcError::Decay(
                    "symbol does not claim integrable decay".into(),
                ))
            }
        };
        let value_at = |radius: f64| -> f64 {
            let y = (radius * radius - 1.0).sqrt();
            self.eval(Complex64::new(-1.0, y)).norm()
        };
        let c = value_at(1e2) * 1e2f64.powf(alpha);
        let mut worst: f64 = 0.0;
        for &r in &[1e2_f64, 1e3, 1e4] {
            let bound = c * r.powf(-alpha);
            let v = value_at(r);
            if bound > 0.0 {
                worst = worst.max(v / bound);
            }
        }
        Ok(worst)
    }
}

/// The constant symbol g = c.
pub fn constant(c: Complex64) -> HalfPlaneFunction {
    HalfPlaneFunction::new(
        move |_| c,
        c.norm(),
        DecayClass::BoundedOnly,
        None,
        format!("{c}"),
    )
}

/// g_mu(z) = 1/(mu - z), Re(mu) > 0. Carries its Phillips kernel e^{mu t}.
pub fn resolvent_kernel(mu: Complex64) -> Result<HalfPlaneFunction> {
    if mu.re <= 0.0 {
        return Err(HalfcalcError::Domain(
            "resolvent symbol needs Re(mu) > 0".into(),
        ));
    }
    let kernel = PhillipsKernel::new(
        move |t: f64| (mu * t).exp(),
        1.0 / mu.re,
        true,
        "h(t) = e^{mu t} on (-inf, 0]",
    );
    Ok(HalfPlaneFunction::new(
        move |z| Complex64::new(1.0, 0.0) / (mu - z),
        1.0 / mu.re,
        DecayClass::BoundedOnly, // only O(|z|^-1): not integrable
        Some(kernel),
        format!("1/({mu} - z)"),
    ))
}

/// g_t(z) = e^{tz}, t >= 0. Unimodular on the boundary; no L1 kernel
/// (the shift corresponds to a point mass).
pub fn exponential_kernel(t: f64) -> Result<HalfPlaneFunction> {
    if t < 0.0 {
        return Err(HalfcalcError::Domain(
            "e^{tz} is unbounded on the left half-plane for t < 0".into(),
        ));
    }
    Ok(HalfPlaneFunction::new(
        move |z| (z * t).exp(),
        1.0,
        DecayClass::BoundedOnly,
        None,
        format!("e^({t} z)"),
    ))
}

/// Rational symbol gain * prod(z - zeros) / prod(z - poles) with all poles in
/// the open right half-plane and at most as many zeros as poles.
pub fn rational(
    zeros: &[Complex64],
    poles: &[Complex64],
    gain: Complex64,
) -> Result<HalfPlaneFunction> {
    if poles.iter().any(|p| p.re <= 0.0) {
        return Err(HalfcalcError::Domain(
            "rational symbol requires all poles in the open right half-plane".into(),
        ));
    }
    if zeros.len() > poles.len() {
        return Err(HalfcalcError::Domain(
            "numerator degree must not exceed denominator degree".into(),
        ));
    }
    let zeros = zeros.to_vec();
    let poles = poles.to_vec();
    let rel_degree = poles.len() - zeros.len();
    let decay = if rel_degree >= 2 {
        DecayClass::H1Decay(rel_degree as f64)
    } else {
        DecayClass::BoundedOnly
    };
    let description = format!("rational(zeros={zeros:?}, poles={poles:?}, gain={gain})");
    let zeros_c = zeros.clone();
    let poles_c = poles.clone();
    let eval = move |z: Complex64| {
        let mut num = gain;
        for z0 in &zeros_c {
            num *= z - z0;
        }
        let mut den = Complex64::new(1.0, 0.0);
        for p in &poles_c {
            den *= z - p;
        }
        num / den
    };
    let probe = HalfPlaneFunction::new(eval.clone(), f64::INFINITY, decay, None, "");
    let sup = probe.boundary_sup() * 1.01;
    Ok(HalfPlaneFunction::new(eval, sup, decay, None, description))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Sum,
    Product,
}

/// Pointwise combination with conservative decay bookkeeping and a
/// boundary-sampled refinement of the sup-norm estimate.
pub fn combine(op: CombineOp, f: &HalfPlaneFunction, g: &HalfPlaneFunction) -> HalfPlaneFunction {
    let fe = f.eval.clone();
    let ge = g.eval.clone();
    // kernels add under pointwise sums; products would need a convolution,
    // which is out of scope, so the product branch drops them
    let sum_kernel = match (op, &f.phillips_kernel, &g.phillips_kernel) {
        (CombineOp::Sum, Some(kf), Some(kg)) => {
            let (kf, kg) = (kf.clone(), kg.clone());
            Some(PhillipsKernel::new(
                move |t: f64| kf.eval(t) + kg.eval(t),
                f.phillips_kernel.as_ref().unwrap().l1_norm_est
                    + g.phillips_kernel.as_ref().unwrap().l1_norm_est,
                f.phillips_kernel.as_ref().unwrap().integrable
                    && g.phillips_kernel.as_ref().unwrap().integrable,
                "pointwise sum of two kernels",
            ))
        }
        _ => None,
    };
    let (eval, crude, decay, description): (EvalFn, f64, DecayClass, String) = match op {
        CombineOp::Sum => (
            Arc::new(move |z| fe(z) + ge(z)),
            f.sup_norm_est + g.sup_norm_est,
            match (f.decay_class, g.decay_class) {
                (DecayClass::H1Decay(a), DecayClass::H1Decay(b)) => DecayClass::H1Decay(a.min(b)),
                _ => DecayClass::BoundedOnly,
            },
            format!("({}) + ({})", f.description, g.description),
        ),
        CombineOp::Product => (
            Arc::new(move |z| fe(z) * ge(z)),
            f.sup_norm_est * g.sup_norm_est,
            match (f.decay_class, g.decay_class) {
                (DecayClass::H1Decay(a), DecayClass::H1Decay(b)) => DecayClass::H1Decay(a + b),
                (DecayClass::H1Decay(a), _) | (_, DecayClass::H1Decay(a)) => {
                    DecayClass::H1Decay(a)
                }
                _ => DecayClass::BoundedOnly,
            },
            format!("({}) * ({})", f.description, g.description),
        ),
    };
    let combined = HalfPlaneFunction {
        eval,
        sup_norm_est: crude,
        decay_class: decay,
        phillips_kernel: sum_kernel,
        description,
    };
    let refined = (combined.boundary_sup() * 1.01).min(crude);
    HalfPlaneFunction {
        sup_norm_est: refined,
        ..combined
    }
}

pub fn scalar_multiple(c: Complex64, f: &HalfPlaneFunction) -> HalfPlaneFunction {
    let fe = f.eval.clone();
    HalfPlaneFunction {
        eval: Arc::new(move |z| c * fe(z)),
        sup_norm_est: c.norm() * f.sup_norm_est,
        decay_class: f.decay_class,
        phillips_kernel: None,
        description: format!("{c} * ({})", f.description),
    }
}

/// The regularizer e(z) = (1 - z)^{-2}.
pub fn regularizer() -> HalfPlaneFunction {
    rational(&[], &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)], Complex64::new(1.0, 0.0))
        .expect("static symbol")
}

/// e * f with e(z) = (1 - z)^{-2}; the result is integrable on vertical
/// lines whatever f's own decay.
pub fn regularize(f: &HalfPlaneFunction) -> HalfPlaneFunction {
    let out = combine(CombineOp::Product, &regularizer(), f);
    // product bookkeeping already yields at least H1Decay(2)
    debug_assert!(matches!(out.decay_class, DecayClass::H1Decay(a) if a >= 2.0));
    out
}

/// f(. + v): moves a symbol analytic left of Re(z) = v to a genuine
/// left-half-plane symbol.
pub fn shift(f: &HalfPlaneFunction, v: f64) -> HalfPlaneFunction {
    let fe = f.eval.clone();
    let shifted = HalfPlaneFunction {
        eval: Arc::new(move |z| fe(z + v)),
        sup_norm_est: f.sup_norm_est,
        decay_class: f.decay_class,
        phillips_kernel: None,
        description: format!("({})(z + {v})", f.description),
    };
    let refined = shifted.boundary_sup() * 1.01;
    HalfPlaneFunction {
        sup_norm_est: if refined.is_finite() && refined > 0.0 {
            refined.min(f.sup_norm_est.max(refined))
        } else {
            f.sup_norm_est
        },
        ..shifted
    }
}

/// r_n(z) = (1 - tz/n)^{-n}: rational approximations of e^{tz} with
/// sup-norm at most 1 on the left half-plane.
pub fn exp_rational_sequence(t: f64, n: usize) -> Result<HalfPlaneFunction> {
    if t < 0.0 {
        return Err(HalfcalcError::Domain("t must be nonnegative".into()));
    }
    if n == 0 {
        return Err(HalfcalcError::Domain("n must be at least 1".into()));
    }
    Ok(HalfPlaneFunction::new(
        move |z| (Complex64::new(1.0, 0.0) - z * (t / n as f64)).powi(-(n as i32)),
        1.0,
        if n >= 2 {
            DecayClass::H1Decay(n as f64)
        } else {
            DecayClass::BoundedOnly
        },
        None,
        format!("(1 - {t} z / {n})^-{n}"),
    ))
}

/// Kernel of an integrable symbol by truncated vertical-line quadrature,
/// h(t) = (1/2 pi i) int_{iR - eps} g(z) e^{zt} dz, sampled on the given
/// nodes in (-T_h, 0]. The truncated tail is corrected by one step of
/// integration by parts (power-law model at t = 0).
pub fn phillips_kernel_from_contour(
    g: &HalfPlaneFunction,
    eps: f64,
    nodes: &[f64],
) -> Result<PhillipsKernel> {
    let alpha = match g.decay_class() {
        DecayClass::H1Decay(a) => a,
        DecayClass::BoundedOnly => {
            return Err(HalfcalcError::Decay(
                "kernel extraction needs an integrable symbol; regularize first".into(),
            ))
        }
    };
    if eps <= 0.0 {
        return Err(HalfcalcError::Domain("eps must be positive".into()));
    }
    if nodes.iter().any(|&t| t > 0.0) {
        return Err(HalfcalcError::Domain("kernel nodes must satisfy t <= 0".into()));
    }

    // Fit the decay amplitude at |y| = 1e2 and truncate where the
    // (corrected) tail is negligible.
    let c_fit = g.eval(Complex64::new(-eps, 1e2)).norm() * 1e2f64.powf(alpha);
    let mut y_max = (c_fit / ((alpha - 1.0) * 1e-8)).powf(1.0 / (alpha - 1.0));
    y_max = y_max.clamp(1e3, 1e4);
    let max_t = nodes.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let dy = (0.02_f64).min(0.2 / (1.0 + max_t));
    let steps = (2.0 * y_max / dy).ceil() as usize;

    // shared samples of g along the line
    let ys: Vec<f64> = (0..=steps).map(|k| -y_max + k as f64 * dy).collect();
    let gs: Vec<Complex64> = crate::parallel::map_slice(&ys, |&y| {
        g.eval(Complex64::new(-eps, y))
    });

    let values: Vec<Complex64> = crate::parallel::map_slice(nodes, |&t| {
        // (1/2 pi) int g(-eps + iy) e^{(-eps + iy) t} dy
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, (&y, &gz)) in ys.iter().zip(&gs).enumerate() {
            let w = if idx == 0 || idx == steps { 0.5 } else { 1.0 };
            acc += gz * Complex64::new(0.0, y * t).exp() * w;
        }
        acc *= dy;
        // tail beyond |y| = y_max
        let f_hi = *gs.last().unwrap();
        let f_lo = gs[0];
        let tail = if t.abs() * y_max > 10.0 {
            let it = Complex64::new(0.0, t);
            (f_lo * Complex64::new(0.0, -y_max * t).exp()
                - f_hi * Complex64::new(0.0, y_max * t).exp())
                / it
        } else {
            // near t = 0: power-law model of the two tails
            (f_hi + f_lo) * (y_max / (alpha - 1.0))
        };
        (acc + tail) * ((-eps * t).exp() / (2.0 * std::f64::consts::PI))
    });

    // L1 estimate over the sampled nodes (sorted ascending in t)
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&i, &j| nodes[i].partial_cmp(&nodes[j]).unwrap());
    let sorted_nodes: Vec<f64> = order.iter().map(|&i| nodes[i]).collect();
    let sorted_vals: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let mut l1 = 0.0;
    for k in 1..sorted_nodes.len() {
        let dt = sorted_nodes[k] - sorted_nodes[k - 1];
        l1 += 0.5 * (sorted_vals[k].norm() + sorted_vals[k - 1].norm()) * dt;
    }
    let edge = sorted_vals.first().map(|v| v.norm()).unwrap_or(0.0);
    let integrable = edge < 1e-6;

    let table_nodes = sorted_nodes.clone();
    let table_vals = sorted_vals.clone();
    Ok(PhillipsKernel::new(
        move |t: f64| interp_linear(&table_nodes, &table_vals, t),
        l1,
        integrable,
        format!("sampled on {} nodes in [{:.3}, 0]", sorted_nodes.len(), sorted_nodes[0]),
    ))
}

fn interp_linear(nodes: &[f64], values: &[Complex64], t: f64) -> Complex64 {
    if nodes.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    if t <= nodes[0] {
        return values[0];
    }
    if t >= *nodes.last().unwrap() {
        return *values.last().unwrap();
    }
    let idx = nodes.partition_point(|&n| n <= t) - 1;
    let (t0, t1) = (nodes[idx], nodes[idx + 1]);
    let w = (t - t0) / (t1 - t0);
    values[idx] * (1.0 - w) + values[idx + 1] * w
}
