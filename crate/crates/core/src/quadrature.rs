//! Adaptive Gauss–Kronrod quadrature and bracketed root finding.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_intervals: usize,
}

impl<T: Scalar> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::clamp_tol(T::lit(1e-11)),
            abs_tol: T::lit(1e-300).max(T::min_positive_value()),
            max_intervals: 2000,
        }
    }
}

impl<T: Scalar> QuadOptions<T> {
    pub fn with_rel_tol(mut self, tol: T) -> Self {
        self.rel_tol = T::clamp_tol(tol);
        self
    }

    pub fn with_abs_tol(mut self, tol: T) -> Self {
        self.abs_tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    /// Estimated absolute error (sum of per-panel Kronrod–Gauss differences).
    pub error: T,
    pub intervals: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kron = kron + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s * T::lit(WG[j / 2]);
        }
    }
    Panel {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[points[0], points[last]]`, treating interior entries as
/// known breakpoints. Never fails; the caller inspects `converged`.
pub fn integrate_best_effort<T, F>(mut f: F, points: &[T], opts: &QuadOptions<T>) -> Integral<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let mut panels: Vec<Panel<T>> = Vec::with_capacity(64);
    for w in points.windows(2) {
        if w[1] > w[0] {
            panels.push(gk15(&mut f, w[0], w[1]));
        }
    }
    if panels.is_empty() {
        return Integral {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
            converged: true,
        };
    }
    loop {
        let value: T = panels.iter().map(|p| p.value).sum();
        let error: T = panels.iter().map(|p| p.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || !error.is_finite() || panels.len() >= opts.max_intervals {
            return Integral {
                value,
                error,
                intervals: panels.len(),
                converged: error <= target,
            };
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| {
                if p.error > acc.1 {
                    (i, p.error)
                } else {
                    acc
                }
            });
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * T::lit(0.5);
        if mid <= p.a || mid >= p.b {
            // panel can no longer be split in this precision
            return Integral {
                value,
                error,
                intervals: panels.len() + 1,
                converged: false,
            };
        }
        panels.push(gk15(&mut f, p.a, mid));
        panels.push(gk15(&mut f, mid, p.b));
    }
}

/// Like [`integrate_best_effort`] but fails when the tolerance is not met.
pub fn integrate<T, F>(
    f: F,
    points: &[T],
    opts: &QuadOptions<T>,
    context: &str,
) -> Result<Integral<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let r = integrate_best_effort(f, points, opts);
    if r.converged && r.value.is_finite() {
        Ok(r)
    } else {
        Err(Error::Quadrature {
            context: context.to_string(),
            achieved: r.error.as_f64(),
            requested: opts.abs_tol.max(opts.rel_tol * r.value.abs()).as_f64(),
        })
    }
}

/// Root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign
/// (Illinois variant of regula falsi, safeguarded by bisection).
pub fn bracketed_root<T, F>(mut f: F, mut lo: T, mut hi: T, rel_tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::RejectedInput(format!(
            "root not bracketed on [{lo}, {hi}]"
        )));
    }
    let tol = T::clamp_tol(rel_tol);
    let mut side = 0i8;
    for it in 0..400 {
        let width = hi - lo;
        if width <= tol * lo.abs().max(hi.abs()) {
            break;
        }
        let mut x = if it % 8 == 7 {
            (lo + hi) * T::lit(0.5)
        } else {
            (lo * fhi - hi * flo) / (fhi - flo)
        };
        if !(x > lo && x < hi) {
            x = (lo + hi) * T::lit(0.5);
        }
        let fx = f(x);
        if fx == T::zero() {
            return Ok(x);
        }
        if (fx > T::zero()) == (flo > T::zero()) {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi = fhi * T::lit(0.5);
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo = flo * T::lit(0.5);
            }
            side = 1;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}
