use rayon::prelude::*;
use serde::Serialize;

use super::require_window;
use crate::error::{Error, Result};
use crate::measure::Point;
use crate::scalar::Scalar;
use crate::spacetime::SpaceTimeFunction;

/// The inner cylinder `Q′ = [t_start, t_end] × B_radius(center)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderWindow<T> {
    pub t_start: T,
    pub t_end: T,
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Scalar> HolderWindow<T> {
    /// Parabolic diameter `2 radius + (t_end - t_start)^{1/α}`.
    pub fn diameter(&self, alpha: T) -> T {
        T::lit(2.0) * self.radius + (self.t_end - self.t_start).powf(T::one() / alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport<T> {
    /// Fitted log-log slope; `None` when `u` does not oscillate on `Q′` or
    /// too few distance bins are populated.
    pub slope: Option<T>,
    /// `min(slope, 1)` for a positive slope. On a bounded window a bound with
    /// a larger exponent implies the bound with exponent 1.
    pub beta: Option<T>,
    /// Scale in `osc(d) ≈ ‖u‖_∞ (d/η)^β`.
    pub eta: Option<T>,
    pub intercept: T,
    /// Root mean square residual of the log-log fit.
    pub residual: T,
    pub sup_norm: T,
    /// Largest `|u(t,x) − u(s,y)|` over pairs in the window.
    pub oscillation: T,
    pub pairs: usize,
    /// `(d, max |Δu| over pairs at distance at most d)`, one entry per bin,
    /// with `d` the largest pair distance up to that bin.
    pub envelope: Vec<(T, T)>,
}

const BINS: usize = 12;
const MAX_BASE_POINTS: usize = 2500;

/// Fits `max |u(t,x) − u(s,y)| ≈ C d^β` with `d = |x − y| + |t − s|^{1/α}`
/// over node pairs in `Q′` whose distance lies in `[2h, diam/4]`.
///
/// Distances are split into logarithmic bins and the slope is fitted to the
/// modulus of continuity sampled at the largest distance reached in each bin. At most `MAX_BASE_POINTS` evenly strided
/// base points are paired with every node of the window.
pub fn holder_fit<T: Scalar>(
    u: &SpaceTimeFunction<T>,
    window: &HolderWindow<T>,
    alpha: T,
) -> Result<HolderReport<T>> {
    if !(window.t_end > window.t_start) || !(window.radius > T::zero()) {
        return Err(Error::RejectedInput("empty Hölder window".into()));
    }
    require_window(u, window.t_start, window.t_end)?;
    let grid = u.grid();
    let h = grid.h();
    let lo = T::lit(2.0) * h;
    let hi = window.diameter(alpha) / T::lit(4.0);
    if !(hi > lo) {
        return Err(Error::RejectedInput(format!(
            "distance window [{lo}, {hi}] is empty; refine the grid or enlarge Q′"
        )));
    }
    let nodes = grid.nodes_in_ball(window.center, window.radius);
    let coords: Vec<Point<T>> = nodes.iter().map(|&i| grid.coord(i)).collect();
    let levels = u.levels_in(window.t_start, window.t_end);
    let times: Vec<T> = levels.iter().map(|&k| u.time(k)).collect();
    let values: Vec<Vec<T>> = levels
        .iter()
        .map(|&k| nodes.iter().map(|&i| u.level(k)[i]).collect())
        .collect();

    let total = levels.len() * nodes.len();
    let stride = total.div_ceil(MAX_BASE_POINTS).max(1);
    let (log_lo, log_hi) = (lo.ln(), hi.ln());
    let width = (log_hi - log_lo) / T::from_usize_lossy(BINS);
    let inv_alpha = T::one() / alpha;
    let lag = hi.powf(alpha);

    let partial: Vec<(Vec<T>, Vec<T>, usize)> = (0..total)
        .into_par_iter()
        .step_by(stride)
        .map(|p| {
            let (ka, ia) = (p / nodes.len(), p % nodes.len());
            let (ta, xa, va) = (times[ka], coords[ia], values[ka][ia]);
            let mut env = vec![T::zero(); BINS];
            let mut reach = vec![T::zero(); BINS];
            let mut count = 0usize;
            for (kb, &tb) in times.iter().enumerate() {
                let dtime = (tb - ta).abs();
                if dtime > lag {
                    continue;
                }
                let tpart = dtime.powf(inv_alpha);
                for (ib, xb) in coords.iter().enumerate() {
                    let d = (xb[0] - xa[0]).hypot(xb[1] - xa[1]) + tpart;
                    if d < lo || d > hi {
                        continue;
                    }
                    let bin = ((d.ln() - log_lo) / width)
                        .to_usize()
                        .unwrap_or(0)
                        .min(BINS - 1);
                    let inc = (values[kb][ib] - va).abs();
                    if inc > env[bin] {
                        env[bin] = inc;
                    }
                    if d > reach[bin] {
                        reach[bin] = d;
                    }
                    count += 1;
                }
            }
            (env, reach, count)
        })
        .collect();

    let mut env = [T::zero(); BINS];
    let mut reach = [T::zero(); BINS];
    let mut pairs = 0;
    for (e, r, c) in &partial {
        for b in 0..BINS {
            env[b] = env[b].max(e[b]);
            reach[b] = reach[b].max(r[b]);
        }
        pairs += c;
    }
    // modulus of continuity: largest increment among pairs no farther apart
    // than the largest distance seen up to each bin
    for b in 1..BINS {
        env[b] = env[b].max(env[b - 1]);
        reach[b] = reach[b].max(reach[b - 1]);
    }
    let oscillation = env[BINS - 1];
    let sup_norm = u.sup_norm();
    let envelope: Vec<(T, T)> = env
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > T::zero())
        .map(|(b, &e)| (reach[b], e))
        .collect();

    let mut report = HolderReport {
        slope: None,
        beta: None,
        eta: None,
        intercept: T::zero(),
        residual: T::zero(),
        sup_norm,
        oscillation,
        pairs,
        envelope,
    };
    if report.envelope.len() < 3 {
        return Ok(report);
    }
    let xs: Vec<T> = report.envelope.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = report.envelope.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    report.slope = Some(slope);
    report.intercept = intercept;
    report.residual = residual;
    if slope > T::zero() {
        let beta = slope.min(T::one());
        report.beta = Some(beta);
        if sup_norm > T::zero() {
            // ω(d) ≤ e^c d^β on the window, written as ‖u‖_∞ (d/η)^β
            let c = intercept + (slope - beta) * hi.ln();
            report.eta = Some((sup_norm / c.exp()).powf(T::one() / beta));
        }
    }
    Ok(report)
}

/// Slope, intercept and root mean square residual of `y ≈ a x + b`.
pub(crate) fn least_squares<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_a_line() {
        let xs = [0.0f64, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.75 * x - 2.0).collect();
        let (a, b, r) = least_squares(&xs, &ys);
        assert!((a - 0.75).abs() < 1e-14 && (b + 2.0).abs() < 1e-14 && r < 1e-14);
    }
}
