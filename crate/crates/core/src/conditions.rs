//! Numerical checks of the scale conditions on a jump measure:
//! second moment plus tail at every scale, comparability of the energy with
//! the normalized fractional energy on balls, and finiteness of a far-field
//! `δ`-moment.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{MeasureKind, MeasureSpec, Point, SetDescriptor};
use crate::rng::sample_rng;
use crate::scalar::{near_integer, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    K1,
    K2,
    K3,
}

/// Ratio statistics of the energy comparison at one grid spacing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K2Level<T> {
    pub dh: T,
    pub upper_ratio: T,
    pub lower_ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K2Details<T> {
    pub levels: Vec<K2Level<T>>,
    /// Relative change of the measured constant between the two finest spacings.
    pub trend: Option<T>,
    /// Samples at the finest spacing.
    pub samples: Vec<EnergySample<T>>,
    /// Both comparability inequalities re-checked with the measured constant.
    pub verified: bool,
    /// Weight rule used for the measure energy.
    pub rule: EnergyRule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport<T> {
    pub condition: Condition,
    /// `ρ` for the moment condition, `Δh` for the energy comparison, sample
    /// points' radii for the far-field moment.
    pub scales: Vec<T>,
    pub measured_values: Vec<T>,
    pub lambda_measured: T,
    pub c0_measured: Option<T>,
    pub delta: Option<T>,
    pub divergent: bool,
    pub k2: Option<K2Details<T>>,
    pub budget: Option<T>,
    pub pass: Option<bool>,
}

impl<T: Scalar> ConditionReport<T> {
    fn new(
        condition: Condition,
        scales: Vec<T>,
        measured_values: Vec<T>,
        lambda_measured: T,
    ) -> Self {
        Self {
            condition,
            scales,
            measured_values,
            lambda_measured,
            c0_measured: None,
            delta: None,
            divergent: false,
            k2: None,
            budget: None,
            pass: None,
        }
    }

    /// Judges the report against the constant `budget` (Λ, or C₀ for K3).
    pub fn with_budget(mut self, budget: T) -> Self {
        let ok = match self.condition {
            Condition::K3 => !self.divergent && self.c0_measured.is_some_and(|c| c <= budget),
            _ => self.lambda_measured <= budget,
        };
        self.budget = Some(budget);
        self.pass = Some(ok);
        self
    }
}

/// `ρ^β (ρ^{-2} ∫_{B_ρ} |z|² μ(dz) + μ(R^d ∖ B_ρ))` at `x = 0`, with `β`
/// the effective order.
pub fn k1_value<T: Scalar>(spec: &MeasureSpec<T>, rho: T) -> Result<T> {
    if !(rho > T::zero()) {
        return Err(Error::RejectedInput(format!(
            "scale must be positive, got {rho}"
        )));
    }
    let beta = spec.effective_order()?;
    let o = [T::zero(); 2];
    let x = &o[..spec.dim()];
    let inner = spec.second_moment_in_ball(x, rho)?.value;
    let outer = spec
        .measure_of_set(x, &SetDescriptor::complement(x, rho))?
        .value;
    Ok(rho.powf(beta) * (inner / (rho * rho) + outer))
}

pub fn check_k1<T: Scalar>(spec: &MeasureSpec<T>, rhos: &[T]) -> Result<ConditionReport<T>> {
    spec.validate()?;
    spec.effective_order()?;
    if rhos.is_empty() {
        return Err(Error::RejectedInput("no scales given".into()));
    }
    let values = rhos
        .iter()
        .map(|&r| k1_value(spec, r))
        .collect::<Result<Vec<_>>>()?;
    let lambda = values.iter().copied().fold(T::zero(), T::max);
    Ok(ConditionReport::new(
        Condition::K1,
        rhos.to_vec(),
        values,
        lambda,
    ))
}

/// `sup_x ∫_{R^d ∖ B_3} |x − y|^δ μ(x, dy)` over sample points `x ∈ B_2`.
pub fn check_k3<T: Scalar>(spec: &MeasureSpec<T>, delta: T) -> Result<ConditionReport<T>> {
    spec.validate()?;
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::RejectedInput(format!(
            "exponent must lie in (0, 1), got {delta}"
        )));
    }
    let dim = spec.dim();
    let step = T::lit(0.5);
    let mut points: Vec<Point<T>> = Vec::new();
    for i in -4i32..=4 {
        for j in if dim == 2 { -4i32..=4 } else { 0..=0 } {
            let p = [T::lit(i as f64) * step, T::lit(j as f64) * step];
            if (p[0] * p[0] + p[1] * p[1]).sqrt() <= T::lit(2.0) {
                points.push(p);
            }
        }
    }
    let radii: Vec<T> = points
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .collect();
    let far = SetDescriptor::complement(&[T::zero(); 2][..dim], T::lit(3.0));
    let tail_order = match spec.kind() {
        MeasureKind::Tabulated(t) => t
            .outer_exponent()
            .map(|g| g - T::from_usize_lossy(dim))
            .unwrap_or(T::infinity()),
        _ => spec.alpha(),
    };
    if delta >= tail_order {
        let mut r = ConditionReport::new(Condition::K3, radii, Vec::new(), T::infinity());
        r.delta = Some(delta);
        r.divergent = true;
        return Ok(r);
    }
    let values = points
        .par_iter()
        .map(|p| spec.moment_of_set(&p[..dim], &far, delta).map(|e| e.value))
        .collect::<Result<Vec<T>>>()?;
    let c0 = values.iter().copied().fold(T::zero(), T::max);
    let mut r = ConditionReport::new(Condition::K3, radii, values, c0);
    r.c0_measured = Some(c0);
    r.delta = Some(delta);
    Ok(r)
}

/// Ball on which energies are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBall<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Scalar> EnergyBall<T> {
    pub fn new(center: Point<T>, radius: T) -> Self {
        Self { center, radius }
    }
}

/// Centres of the cells of `(Δh Z)^d` (shifted to the ball) lying in the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid<T> {
    pub ball: EnergyBall<T>,
    pub dh: T,
    /// Cells per diameter, `N = 2ρ/Δh`.
    pub n: usize,
    pub dim: usize,
    pub nodes: Vec<Point<T>>,
    pub multi: Vec<[i64; 2]>,
}

impl<T: Scalar> EnergyGrid<T> {
    pub fn new(dim: usize, ball: EnergyBall<T>, dh: T) -> Result<Self> {
        let n = near_integer(T::lit(2.0) * ball.radius / dh, T::lit(1e-9))
            .filter(|&n| n >= 2)
            .ok_or_else(|| {
                Error::RejectedInput(format!("spacing {dh} does not divide the diameter"))
            })? as usize;
        let half = T::lit(0.5);
        let coord = |i: usize| -ball.radius + (T::from_usize_lossy(i) + half) * dh;
        let mut nodes = Vec::new();
        let mut multi = Vec::new();
        for i in 0..n {
            for j in 0..if dim == 2 { n } else { 1 } {
                let z = [coord(i), if dim == 2 { coord(j) } else { T::zero() }];
                if (z[0] * z[0] + z[1] * z[1]).sqrt() < ball.radius {
                    nodes.push([ball.center[0] + z[0], ball.center[1] + z[1]]);
                    multi.push([i as i64, j as i64]);
                }
            }
        }
        Ok(Self {
            ball,
            dh,
            n,
            dim,
            nodes,
            multi,
        })
    }

    pub fn sample(&self, f: &TestFn<T>) -> Vec<T> {
        self.nodes.iter().map(|&x| (f.f)(x, &self.ball)).collect()
    }

    fn width(&self) -> usize {
        2 * self.n - 1
    }

    fn offset_index(&self, k: [i64; 2]) -> usize {
        let r = self.n as i64 - 1;
        let w = self.width();
        (k[0] + r) as usize
            + if self.dim == 2 {
                w * (k[1] + r) as usize
            } else {
                0
            }
    }

    /// Table of `f(k)` over all offsets `k` occurring between two nodes.
    fn offset_table(&self, f: impl Fn([i64; 2]) -> Result<T> + Sync) -> Result<Vec<T>> {
        let r = self.n as i64 - 1;
        let w = self.width();
        let count = if self.dim == 2 { w * w } else { w };
        (0..count)
            .into_par_iter()
            .map(|idx| {
                let k0 = (idx % w) as i64 - r;
                let k1 = if self.dim == 2 {
                    (idx / w) as i64 - r
                } else {
                    0
                };
                if k0 == 0 && k1 == 0 {
                    Ok(T::zero())
                } else {
                    f([k0, k1])
                }
            })
            .collect()
    }

    /// `Σ_j Σ_k (v_j − v_k)² table(k − j)` for every function in `values`.
    fn double_sums(&self, table: &[T], values: &[Vec<T>], lines_only: bool) -> Vec<T> {
        let m = self.nodes.len();
        let per_node: Vec<Vec<T>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut acc = vec![T::zero(); values.len()];
                let a = self.multi[j];
                for k in 0..m {
                    let b = self.multi[k];
                    if k == j || (lines_only && a[0] != b[0] && a[1] != b[1]) {
                        continue;
                    }
                    let w = table[self.offset_index([b[0] - a[0], b[1] - a[1]])];
                    if w == T::zero() {
                        continue;
                    }
                    for (acc_f, v) in acc.iter_mut().zip(values) {
                        let d = v[j] - v[k];
                        *acc_f = *acc_f + d * d * w;
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![T::zero(); values.len()];
        for row in per_node {
            for (t, r) in total.iter_mut().zip(row) {
                *t = *t + r;
            }
        }
        total
    }
}

/// How the measure energy weights a pair of cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EnergyRule {
    /// Density at the centre offset times `Δh^d`.
    Midpoint,
    /// Exact mass `μ(x_j, cell(y_k))`.
    CellMass,
}

impl EnergyRule {
    /// Midpoint where the measure has a density, exact cell masses for the
    /// singular kinds.
    pub fn default_for<T: Scalar>(spec: &MeasureSpec<T>) -> Self {
        match spec.kind() {
            MeasureKind::AlphaStable | MeasureKind::Tabulated(_) => EnergyRule::Midpoint,
            MeasureKind::Axes if spec.dim() == 1 => EnergyRule::Midpoint,
            _ => EnergyRule::CellMass,
        }
    }
}

fn cell<T: Scalar>(k: [i64; 2], dh: T) -> SetDescriptor<T> {
    let half = T::lit(0.5);
    let c = [T::lit(k[0] as f64), T::lit(k[1] as f64)];
    SetDescriptor::Cell {
        lo: [(c[0] - half) * dh, (c[1] - half) * dh],
        hi: [(c[0] + half) * dh, (c[1] + half) * dh],
    }
}

fn measure_table<T: Scalar>(
    spec: &MeasureSpec<T>,
    grid: &EnergyGrid<T>,
    rule: EnergyRule,
) -> Result<Vec<T>> {
    let dim = spec.dim();
    let dh = grid.dh;
    let vol = dh.powi(dim as i32);
    let lines_only = spec.dim() == 2 && matches!(spec.kind(), MeasureKind::Axes);
    grid.offset_table(|k| {
        if lines_only && k[0] != 0 && k[1] != 0 {
            return Ok(T::zero());
        }
        let z = [T::lit(k[0] as f64) * dh, T::lit(k[1] as f64) * dh];
        let w = match rule {
            EnergyRule::Midpoint => match spec.density(&z[..dim])? {
                Some(d) => d * vol,
                None => {
                    // line density along a coordinate axis
                    let r = z[0].abs().max(z[1].abs());
                    spec.normalization() * r.powf(-T::one() - spec.alpha()) * dh
                }
            },
            EnergyRule::CellMass => {
                spec.measure_of_set(&[T::zero(); 2][..dim], &cell(k, dh))?
                    .value
            }
        };
        Ok(w * vol)
    })
}

fn canonical_table<T: Scalar>(grid: &EnergyGrid<T>, order: T) -> Result<Vec<T>> {
    let dim = grid.dim;
    let dh = grid.dh;
    let vol = dh.powi(dim as i32);
    let d = T::from_usize_lossy(dim);
    grid.offset_table(|k| {
        let z = [T::lit(k[0] as f64) * dh, T::lit(k[1] as f64) * dh];
        let r = (z[0] * z[0] + z[1] * z[1]).sqrt();
        Ok(r.powf(-d - order) * vol * vol)
    })
}

fn check_values<T: Scalar>(grid: &EnergyGrid<T>, v: &[T]) -> Result<()> {
    if v.len() != grid.nodes.len() {
        return Err(Error::RejectedInput(format!(
            "grid function has {} values, the ball has {} cells",
            v.len(),
            grid.nodes.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::RejectedInput(
            "grid function has non-finite values".into(),
        ));
    }
    Ok(())
}

/// `Σ_{x_j} Σ_{y_k ≠ x_j} (v(x_j) − v(y_k))² w_{jk}` over the cell centres of
/// the ball, `v` given in the node order of [`EnergyGrid::new`].
pub fn discrete_energy<T: Scalar>(
    spec: &MeasureSpec<T>,
    ball: EnergyBall<T>,
    v: &[T],
    dh: T,
) -> Result<T> {
    discrete_energy_with(spec, ball, v, dh, EnergyRule::default_for(spec))
}

pub fn discrete_energy_with<T: Scalar>(
    spec: &MeasureSpec<T>,
    ball: EnergyBall<T>,
    v: &[T],
    dh: T,
    rule: EnergyRule,
) -> Result<T> {
    let grid = EnergyGrid::new(spec.dim(), ball, dh)?;
    check_values(&grid, v)?;
    let table = measure_table(spec, &grid, rule)?;
    Ok(grid.double_sums(&table, &[v.to_vec()], false)[0])
}

/// `(2 − β) Σ Σ (v_j − v_k)² |x_j − y_k|^{−d−β} Δh^{2d}`.
pub fn canonical_energy<T: Scalar>(
    dim: usize,
    ball: EnergyBall<T>,
    v: &[T],
    dh: T,
    order: T,
) -> Result<T> {
    let grid = EnergyGrid::new(dim, ball, dh)?;
    check_values(&grid, v)?;
    let table = canonical_table(&grid, order)?;
    Ok((T::lit(2.0) - order) * grid.double_sums(&table, &[v.to_vec()], false)[0])
}

type TestFnInner<T> = Arc<dyn Fn(Point<T>, &EnergyBall<T>) -> T + Send + Sync>;

/// Named test function, evaluated relative to the ball it is used on.
#[derive(Clone)]
pub struct TestFn<T> {
    pub name: String,
    pub f: TestFnInner<T>,
}

impl<T> fmt::Debug for TestFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFn({})", self.name)
    }
}

impl<T: Scalar> TestFn<T> {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(Point<T>, &EnergyBall<T>) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TestSuite<T> {
    pub functions: Vec<TestFn<T>>,
}

fn local<T: Scalar>(x: Point<T>, b: &EnergyBall<T>) -> Point<T> {
    [
        (x[0] - b.center[0]) / b.radius,
        (x[1] - b.center[1]) / b.radius,
    ]
}

impl<T: Scalar> TestSuite<T> {
    /// Trigonometric tensor modes of frequency at most 4, three random
    /// piecewise-linear functions and the distance to the centre.
    pub fn default_for(dim: usize, seed: u64) -> Self {
        let mut functions = Vec::new();
        let pi = T::PI();
        let modes: Vec<(usize, bool)> = std::iter::once((0, false))
            .chain((1..=4).flat_map(|m| [(m, false), (m, true)]))
            .collect();
        let second: Vec<(usize, bool)> = if dim == 2 {
            modes.clone()
        } else {
            vec![(0, false)]
        };
        for &(m1, s1) in &modes {
            for &(m2, s2) in &second {
                if m1 == 0 && m2 == 0 {
                    continue;
                }
                let name = format!(
                    "{}{}x{}{}",
                    if s1 { "sin" } else { "cos" },
                    m1,
                    if s2 { "sin" } else { "cos" },
                    m2
                );
                let wave = move |z: T, m: usize, s: bool| {
                    let a = pi * T::from_usize_lossy(m) * z;
                    if s {
                        a.sin()
                    } else {
                        a.cos()
                    }
                };
                functions.push(TestFn::new(name, move |x, b| {
                    let z = local(x, b);
                    wave(z[0], m1, s1) * wave(z[1], m2, s2)
                }));
            }
        }
        functions.extend(Self::random_piecewise_linear(dim, 3, seed).functions);
        functions.push(TestFn::new("radius", |x, b| {
            let z: Point<T> = local(x, b);
            (z[0] * z[0] + z[1] * z[1]).sqrt()
        }));
        Self { functions }
    }

    /// Sums of five ridges `a |⟨n, z⟩ − c|` with random unit normals:
    /// Lipschitz and piecewise linear.
    pub fn random_piecewise_linear(dim: usize, count: usize, seed: u64) -> Self {
        let functions = (0..count)
            .map(|idx| {
                let mut rng = sample_rng(seed, idx as u64);
                let ridges: Vec<([T; 2], T, T)> = (0..5)
                    .map(|_| {
                        let phi = rng.random_range(0.0..std::f64::consts::TAU);
                        let n = if dim == 2 {
                            [phi.cos(), phi.sin()]
                        } else {
                            [1.0, 0.0]
                        };
                        let c = rng.random_range(-0.8..0.8);
                        let a = rng.random_range(-1.0..1.0);
                        ([T::lit(n[0]), T::lit(n[1])], T::lit(c), T::lit(a))
                    })
                    .collect();
                TestFn::new(format!("pl{idx}"), move |x, b| {
                    let z = local(x, b);
                    ridges
                        .iter()
                        .map(|&(n, c, a)| a * (n[0] * z[0] + n[1] * z[1] - c).abs())
                        .sum()
                })
            })
            .collect();
        Self { functions }
    }

    pub fn push(&mut self, f: TestFn<T>) {
        self.functions.push(f);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySample<T> {
    pub name: String,
    pub center: Point<T>,
    pub radius: T,
    pub dh: T,
    pub e_mu: T,
    pub e_alpha_normalized: T,
}

impl<T: Scalar> EnergySample<T> {
    pub fn ratio(&self) -> T {
        self.e_mu / self.e_alpha_normalized
    }
}

/// Energies of every suite function on one ball at one spacing.
pub fn energy_samples<T: Scalar>(
    spec: &MeasureSpec<T>,
    ball: EnergyBall<T>,
    dh: T,
    suite: &TestSuite<T>,
    rule: EnergyRule,
) -> Result<Vec<EnergySample<T>>> {
    let order = spec.effective_order()?;
    let grid = EnergyGrid::new(spec.dim(), ball, dh)?;
    let values: Vec<Vec<T>> = suite.functions.iter().map(|f| grid.sample(f)).collect();
    for v in &values {
        check_values(&grid, v)?;
    }
    let lines_only = spec.dim() == 2 && matches!(spec.kind(), MeasureKind::Axes);
    let mu = grid.double_sums(&measure_table(spec, &grid, rule)?, &values, lines_only);
    let can = grid.double_sums(&canonical_table(&grid, order)?, &values, false);
    let scale = T::lit(2.0) - order;
    Ok(suite
        .functions
        .iter()
        .zip(mu.into_iter().zip(can))
        .map(|(f, (e_mu, e_can))| EnergySample {
            name: f.name.clone(),
            center: ball.center,
            radius: ball.radius,
            dh,
            e_mu,
            e_alpha_normalized: scale * e_can,
        })
        .collect())
}

/// Balls used by default: radii ½ and 1, centred at 0 and off-centre.
pub fn default_balls<T: Scalar>(dim: usize) -> Vec<EnergyBall<T>> {
    let off = if dim == 2 {
        [T::lit(0.25), T::lit(-0.5)]
    } else {
        [T::lit(0.25), T::zero()]
    };
    let mut v = Vec::new();
    for r in [T::lit(0.5), T::one()] {
        v.push(EnergyBall::new([T::zero(); 2], r));
        v.push(EnergyBall::new(off, r));
    }
    v
}

pub fn check_k2<T: Scalar>(
    spec: &MeasureSpec<T>,
    balls: &[EnergyBall<T>],
    dh_list: &[T],
    suite: &TestSuite<T>,
) -> Result<ConditionReport<T>> {
    check_k2_with(spec, balls, dh_list, suite, EnergyRule::default_for(spec))
}

pub fn check_k2_with<T: Scalar>(
    spec: &MeasureSpec<T>,
    balls: &[EnergyBall<T>],
    dh_list: &[T],
    suite: &TestSuite<T>,
    rule: EnergyRule,
) -> Result<ConditionReport<T>> {
    spec.validate()?;
    if dh_list.is_empty() || balls.is_empty() {
        return Err(Error::RejectedInput(
            "energy comparison needs at least one ball and one spacing".into(),
        ));
    }
    if dh_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::RejectedInput(
            "grid spacings must be decreasing".into(),
        ));
    }
    let mut levels = Vec::new();
    let mut values = Vec::new();
    let mut finest = Vec::new();
    for &dh in dh_list {
        let mut samples = Vec::new();
        for &ball in balls {
            samples.extend(energy_samples(spec, ball, dh, suite, rule)?);
        }
        let usable: Vec<&EnergySample<T>> = samples
            .iter()
            .filter(|s| s.e_alpha_normalized > T::zero() && s.e_mu.is_finite())
            .collect();
        if usable.is_empty() {
            return Err(Error::RejectedInput(
                "all test functions are constant on the balls".into(),
            ));
        }
        let upper = usable
            .iter()
            .map(|s| s.ratio())
            .fold(T::neg_infinity(), T::max);
        let lower = usable.iter().map(|s| s.ratio()).fold(T::infinity(), T::min);
        levels.push(K2Level {
            dh,
            upper_ratio: upper,
            lower_ratio: lower,
        });
        values.push(upper.max(T::one() / lower));
        finest = samples;
    }
    let lambda = *values.last().expect("nonempty");
    let trend = (values.len() >= 2).then(|| {
        let n = values.len();
        (values[n - 1] - values[n - 2]).abs() / values[n - 2]
    });
    let slack = T::one() + T::lit(64.0) * T::epsilon();
    let verified = finest
        .iter()
        .filter(|s| s.e_alpha_normalized > T::zero())
        .all(|s| {
            s.e_alpha_normalized <= lambda * s.e_mu * slack
                && s.e_mu <= lambda * s.e_alpha_normalized * slack
        });
    let mut report = ConditionReport::new(Condition::K2, dh_list.to_vec(), values, lambda);
    report.k2 = Some(K2Details {
        levels,
        trend,
        samples: finest,
        verified,
        rule,
    });
    Ok(report)
}

/// Midpoint sums of the chain comparing the axes energy with the fractional
/// energy through an intermediate energy with the axes weights on all pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BridgeSample<T> {
    pub name: String,
    /// `N = 2ρ/Δh`.
    pub n: usize,
    /// `Σ_j Σ_{k∼j} v_{jk}² r_{jk}^{-1-α} Δh³`.
    pub e_axes: T,
    /// `Σ_j Σ_k v_{jk}² r_{jk}^{-1-α} Δh³`.
    pub intermediate: T,
    /// `Σ_j Σ_k v_{jk}² r_{jk}^{-2-α} Δh⁴`.
    pub e_alpha: T,
}

impl<T: Scalar> BridgeSample<T> {
    /// `4N E_axes ≥ F`.
    pub fn upper_holds(&self) -> bool {
        T::lit(4.0) * T::from_usize_lossy(self.n) * self.e_axes >= self.intermediate
    }

    /// `F / (N E_α)`; the chain needs this bounded below by a dimensional constant.
    pub fn lower_ratio(&self) -> T {
        self.intermediate / (T::from_usize_lossy(self.n) * self.e_alpha)
    }
}

pub fn bridge_energies<T: Scalar>(
    alpha: T,
    ball: EnergyBall<T>,
    dh: T,
    suite: &TestSuite<T>,
) -> Result<Vec<BridgeSample<T>>> {
    let grid = EnergyGrid::new(2, ball, dh)?;
    let values: Vec<Vec<T>> = suite.functions.iter().map(|f| grid.sample(f)).collect();
    let line = grid.offset_table(|k| {
        let r = (T::lit(k[0] as f64).powi(2) + T::lit(k[1] as f64).powi(2)).sqrt() * dh;
        Ok(r.powf(-T::one() - alpha) * dh.powi(3))
    })?;
    let full = canonical_table(&grid, alpha)?;
    let e_axes = grid.double_sums(&line, &values, true);
    let inter = grid.double_sums(&line, &values, false);
    let e_alpha = grid.double_sums(&full, &values, false);
    Ok(suite
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| BridgeSample {
            name: f.name.clone(),
            n: grid.n,
            e_axes: e_axes[i],
            intermediate: inter[i],
            e_alpha: e_alpha[i],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_grid_counts_cells() {
        let g = EnergyGrid::new(1, EnergyBall::new([0.0f64, 0.0], 1.0), 0.125).unwrap();
        assert_eq!(g.n, 16);
        assert_eq!(g.nodes.len(), 16);
        let g2 = EnergyGrid::new(2, EnergyBall::new([0.0f64, 0.0], 1.0), 0.25).unwrap();
        assert_eq!(g2.nodes.len(), 52);
        assert!(EnergyGrid::new(1, EnergyBall::new([0.0f64, 0.0], 1.0), 0.3).is_err());
    }

    #[test]
    fn budget_judgement() {
        let spec = MeasureSpec::axes(2, 1.0f64).unwrap();
        let r = check_k1(&spec, &[0.5, 1.0]).unwrap();
        assert_eq!(r.clone().with_budget(8.5).pass, Some(true));
        assert_eq!(r.with_budget(7.5).pass, Some(false));
    }
}
