//! Seeded batches of nonnegative supersolutions on `(t0, t1) × R^d`.

use log::warn;
use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::field::Field;
use crate::operator::DiscreteOperator;
use crate::random_data::{random_exterior, random_interior, Mixture};
use crate::rng::sample_rng;
use crate::scalar::Scalar;
use crate::solver::{solve_with_stats, weak_residual, IvpConfig, TestFunction, WeakFormResidual};
use crate::spacetime::SpaceTimeFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig<T> {
    pub t0: T,
    pub t1: T,
    pub dt: T,
    pub theta: T,
    pub tolerance: T,
    /// Number of random test functions each sample is checked against.
    pub certificates: usize,
}

impl<T: Scalar> Default for SampleConfig<T> {
    fn default() -> Self {
        Self {
            t0: -T::one(),
            t1: T::one(),
            dt: T::lit(1.0 / 32.0),
            theta: T::one(),
            tolerance: T::clamp_tol(T::lit(1e-11)),
            certificates: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SupersolutionSample<T: Scalar> {
    pub index: u64,
    pub u: SpaceTimeFunction<T>,
    pub initial: Mixture<T>,
    pub exterior: Mixture<T>,
    pub certificates: Vec<WeakFormResidual<T>>,
}

/// Solves with `f = 0` and random nonnegative data drawn from stream `index`,
/// then checks the weak supersolution inequality against random nonnegative
/// test functions. Returns `None` if a check fails.
pub fn generate_sample<T: Scalar>(
    op: &DiscreteOperator<T>,
    seed: u64,
    index: u64,
    cfg: &SampleConfig<T>,
) -> Result<Option<SupersolutionSample<T>>> {
    let grid = op.grid();
    let dim = grid.dim();
    let radius = grid.domain().radius().as_f64();
    let edge = grid.box_radius().as_f64();
    let mut rng = sample_rng(seed, index);
    let initial: Mixture<T> = random_interior(&mut rng, dim, radius);
    let exterior: Mixture<T> = if edge > radius * 1.05 {
        random_exterior(&mut rng, dim, radius, edge)
    } else {
        Mixture::new(dim, Vec::new())
    };
    let ivp = IvpConfig::new(cfg.t0, cfg.t1, cfg.dt)
        .with_theta(cfg.theta)
        .with_tolerance(cfg.tolerance)
        .with_initial(initial.to_field())
        .with_exterior(exterior.to_field());
    let (u, stats) = solve_with_stats(op, &ivp)?;

    let floor = -cfg.tolerance * u.sup_norm().max(T::one()) * T::lit(10.0);
    if u.min_value() < floor {
        warn!("sample {index}: minimum {} below {}", u.min_value(), floor);
        return Ok(None);
    }
    let steps = u.steps();
    let mut certificates = Vec::with_capacity(cfg.certificates);
    for _ in 0..cfg.certificates {
        let c: [f64; 2] = {
            let r = 0.5 * radius * rng.random_range(0.0..1.0f64);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            if dim == 1 {
                [r * phi.cos().signum(), 0.0]
            } else {
                [r * phi.cos(), r * phi.sin()]
            }
        };
        let rho = radius * rng.random_range(0.2..0.45);
        let slope = T::lit(rng.random_range(-0.5..0.5));
        let t_mid = (cfg.t0 + cfg.t1) * T::lit(0.5);
        let half = (cfg.t1 - cfg.t0) * T::lit(0.5);
        let phi = TestFunction::hat([T::lit(c[0]), T::lit(c[1])], T::lit(rho), move |t| {
            T::one() + slope * (t - t_mid) / half
        });
        let a = rng.random_range(0..steps);
        let b = rng.random_range(a + 1..=steps);
        let res = weak_residual(
            &u,
            op,
            &phi,
            u.time(a),
            u.time(b),
            &Field::zero(),
            cfg.theta,
            stats.max_relative_residual.max(cfg.tolerance),
        )?;
        if !res.passes {
            warn!(
                "sample {index}: weak residual {} below allowance {}",
                res.lhs_minus_rhs, res.scheme_tolerance
            );
            return Ok(None);
        }
        certificates.push(res);
    }
    Ok(Some(SupersolutionSample {
        index,
        u,
        initial,
        exterior,
        certificates,
    }))
}

/// `count` certified samples; stream indices are tried in increasing order
/// and rejected ones are skipped, so the result depends only on `seed`.
pub fn make_certified_samples<T: Scalar>(
    op: &DiscreteOperator<T>,
    seed: u64,
    count: usize,
    cfg: &SampleConfig<T>,
) -> Result<Vec<SupersolutionSample<T>>> {
    let mut out = Vec::with_capacity(count);
    let mut next = 0u64;
    while out.len() < count {
        let batch = (count - out.len()).max(1) as u64;
        let results: Vec<Result<Option<SupersolutionSample<T>>>> = (next..next + batch)
            .into_par_iter()
            .map(|i| generate_sample(op, seed, i, cfg))
            .collect();
        next += batch;
        for r in results {
            if let Some(s) = r? {
                if out.len() < count {
                    out.push(s);
                }
            }
        }
        if next > 4 * count as u64 + 16 && out.len() < count {
            warn!(
                "only {} of {} samples certified after {} attempts",
                out.len(),
                count,
                next
            );
            break;
        }
    }
    Ok(out)
}

/// Certified supersolutions with the default time window `(-1, 1)`.
pub fn make_test_supersolutions<T: Scalar>(
    op: &DiscreteOperator<T>,
    seed: u64,
    count: usize,
) -> Result<Vec<SpaceTimeFunction<T>>> {
    Ok(
        make_certified_samples(op, seed, count, &SampleConfig::default())?
            .into_iter()
            .map(|s| s.u)
            .collect(),
    )
}
