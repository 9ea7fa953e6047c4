use std::sync::{Arc, OnceLock};

use nllab_core::field::Field;
use nllab_core::grid::{Domain, Grid};
use nllab_core::lab::*;
use nllab_core::measure::MeasureSpec;
use nllab_core::operator::DiscreteOperator;
use nllab_core::random_data::random_exterior;
use nllab_core::rng::sample_rng;
use nllab_core::samples::{generate_sample, make_certified_samples, SampleConfig};
use nllab_core::solver::{solve, IvpConfig};
use nllab_core::spacetime::SpaceTimeFunction;
use nllab_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn harnack_grid(h: f64) -> Arc<Grid<f64>> {
    Arc::new(Grid::new(1, 3.0, h, Domain::Ball(2.0)).unwrap())
}

fn constant(c: f64, h: f64) -> SpaceTimeFunction<f64> {
    SpaceTimeFunction::sample(
        harnack_grid(h),
        -1.0,
        1.0 / 32.0,
        64,
        &Field::constant(c),
        Field::constant(c),
    )
    .unwrap()
}

/// One certified supersolution, `d = 1`, `α = 1.5`.
fn sample() -> &'static SpaceTimeFunction<f64> {
    static CELL: OnceLock<SpaceTimeFunction<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let op = DiscreteOperator::assemble(
            &MeasureSpec::alpha_stable(1, 1.5).unwrap(),
            &harnack_grid(1.0 / 32.0),
        )
        .unwrap();
        (0..)
            .find_map(|i| generate_sample(&op, 3, i, &SampleConfig::default()).unwrap())
            .unwrap()
            .u
    })
}

#[test]
fn constant_harnack_quotient_is_the_early_cylinder_volume() {
    for alpha in [1.0, 1.5] {
        let q = harnack_quotient(&constant(2.0, 1.0 / 32.0), 0.0, alpha).unwrap();
        let expected = 0.5f64.powf(alpha) * 1.0;
        assert!((q.quotient.unwrap() - expected).abs() < 1e-12, "{q:?}");
    }
    let zero = harnack_quotient(&constant(0.0, 1.0 / 32.0), 0.0, 1.0).unwrap();
    assert!(zero.is_degenerate());
    assert!(matches!(
        harnack_quotient(&constant(-1.0, 1.0 / 32.0), 0.0, 1.0),
        Err(Error::RejectedInput(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn harnack_quotient_is_homogeneous(lambda in 0.01f64..100.0, f in 0.0f64..1.0) {
        let u = sample();
        let a = harnack_quotient(u, f, 1.5).unwrap().quotient.unwrap();
        let b = harnack_quotient(&u.map(move |v| lambda * v), lambda * f, 1.5).unwrap().quotient.unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn holder_slope_ignores_affine_changes(lambda in 0.1f64..10.0, c in -5.0f64..5.0) {
        let u = sample();
        let w = HolderWindow { t_start: 0.0, t_end: 1.0, center: [0.0, 0.0], radius: 0.5 };
        let a = holder_fit(u, &w, 1.5).unwrap().slope.unwrap();
        let b = holder_fit(&u.map(move |v| lambda * v + c), &w, 1.5).unwrap().slope.unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs());
    }

    #[test]
    fn poincare_ratio_ignores_shifts(c in -10.0f64..10.0, k in 1.0f64..4.0) {
        let grid = Grid::new(1, 2.0, 1.0 / 16.0, Domain::Ball(1.5)).unwrap();
        let op = DiscreteOperator::assemble(&MeasureSpec::alpha_stable(1, 1.2).unwrap(), &grid).unwrap();
        let v: Vec<f64> = (0..grid.len()).map(|i| (k * grid.coord(i)[0]).sin()).collect();
        let w: Vec<f64> = v.iter().map(|x| x + c).collect();
        let a = weighted_poincare_ratio(&op, &v).unwrap().ratio;
        let b = weighted_poincare_ratio(&op, &w).unwrap().ratio;
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }
}

#[test]
fn holder_fit_on_constants_and_lines() {
    let w = HolderWindow {
        t_start: 0.0,
        t_end: 1.0,
        center: [0.0, 0.0],
        radius: 0.5,
    };
    let flat = holder_fit(&constant(3.0, 1.0 / 32.0), &w, 1.0).unwrap();
    assert!(flat.slope.is_none() && flat.oscillation == 0.0);
    let line = SpaceTimeFunction::sample(
        harnack_grid(1.0 / 64.0),
        -1.0,
        1.0 / 32.0,
        64,
        &Field::steady(|x: [f64; 2]| x[0]),
        Field::zero(),
    )
    .unwrap();
    let fit = holder_fit(&line, &w, 1.5).unwrap();
    assert!((fit.slope.unwrap() - 1.0).abs() < 0.05, "{fit:?}");
    assert_eq!(fit.beta, Some(fit.slope.unwrap().min(1.0)));
}

#[test]
fn scaling_identity_and_dilated_weights() {
    let spec = MeasureSpec::alpha_stable(1, 1.0).unwrap();
    let problem = ScalingProblem {
        initial: Field::steady(|x: [f64; 2]| (1.0 - 4.0 * x[0] * x[0]).max(0.0).powi(4))
            .with_reach(0.5),
        ..Default::default()
    };
    let setup = ScalingSetup {
        h: 1.0 / 32.0,
        dt: 1.0 / 32.0,
        box_radius: 4.0,
        theta: 1.0,
        tolerance: 1e-12,
    };
    let same = scaling_check(&spec, &ScalingParams::identity(1.0), &problem, &setup).unwrap();
    assert_eq!(same.discrepancy, 0.0);
    let bad = ScalingParams {
        r: 0.3,
        ..ScalingParams::identity(1.0)
    };
    assert!(scaling_check(&spec, &bad, &problem, &setup).is_err());
    let cusp = MeasureSpec::cusp(1.5, 0.75).unwrap();
    assert!(scaling_check(&cusp, &ScalingParams::identity(1.5), &problem, &setup).is_err());

    for spec in [
        MeasureSpec::alpha_stable(1, 1.3).unwrap(),
        MeasureSpec::alpha_stable(2, 0.8).unwrap(),
        MeasureSpec::axes(2, 0.7).unwrap(),
    ] {
        for r in [0.5, 2.0] {
            let m = dilation_weight_mismatch(&spec, 1.0 / 8.0, r).unwrap();
            assert!(m < 1e-10, "{} {r}: {m}", spec.kind().name());
        }
    }
}

#[test]
fn level_sets_of_constants_and_doubling() {
    let c = constant(2.0, 1.0 / 32.0);
    let rep = log_level_sets(&c, 0.0, 1e-2, 1.5, 17).unwrap();
    assert!(rep.sup_lower == 0.0 && rep.sup_upper == 0.0);
    let u = sample();
    let a = log_level_sets(u, 0.0, 1e-2, 1.5, 17).unwrap();
    let b = log_level_sets(&u.map(|v| 2.0 * v), 0.0, 2e-2, 1.5, 17).unwrap();
    assert!((a.a - b.a - 2f64.ln()).abs() < 1e-12);
    assert_eq!(a.lower, b.lower);
    assert_eq!(a.upper, b.upper);
}

#[test]
fn moser_constants_on_constants() {
    let alpha = 1.5;
    let kappa = 1.0 + alpha;
    let mut implied = Vec::new();
    for c in [0.5, 4.0] {
        let u = constant(c, 1.0 / 32.0);
        let p = 0.5;
        let rep = moser_check(&u, 0.0, 1e-300, alpha, MoserMode::NegStep, p, 0.5, 1.0).unwrap();
        let vol = |r: f64| r.powf(alpha) * 2.0 * r;
        assert!((rep.lhs - vol(0.5).powf(1.0 / kappa) * c.powf(-p)).abs() < 1e-12 * rep.lhs);
        assert!((rep.rhs - vol(1.0) * c.powf(-p)).abs() < 1e-12 * rep.rhs);
        implied.push(rep.constant);
    }
    assert!((implied[0] - implied[1]).abs() < 1e-12 * implied[0]);
    let u = constant(1.0, 1.0 / 32.0);
    assert!(moser_check(&u, 0.0, 1e-3, alpha, MoserMode::PosIter, 0.5, 0.5, 1.0).is_err());
    assert!(moser_check(&u, 0.0, 1e-3, alpha, MoserMode::NegIter, 0.5, 0.4, 1.0).is_err());
    let g = moser_check(&u, 0.0, 1e-3, alpha, MoserMode::NegIter, 0.5, 0.5, 1.0)
        .unwrap()
        .g1
        .unwrap();
    assert!((g - 0.5f64.powf(1.0 + alpha)).abs() < 1e-15);
}

#[test]
fn poincare_constant_is_degenerate() {
    let grid = Grid::new(2, 1.5, 1.0 / 8.0, Domain::Ball(1.5)).unwrap();
    let op = DiscreteOperator::assemble(&MeasureSpec::axes(2, 1.0).unwrap(), &grid).unwrap();
    let rep = weighted_poincare_ratio(&op, &vec![3.0; grid.len()]).unwrap();
    assert!(rep.degenerate && rep.lhs == 0.0 && rep.ratio == 0.0);
}

#[test]
fn poincare_ratios_are_robust_in_alpha() {
    let grid = Grid::new(1, 2.0, 1.0 / 32.0, Domain::Ball(1.5)).unwrap();
    let suite: Vec<Vec<f64>> = (0..30)
        .map(|k| {
            let mut rng = sample_rng(5, k);
            let a: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ph: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..6.3)).collect();
            (0..grid.len())
                .map(|i| {
                    let x = grid.coord(i)[0];
                    (0..4)
                        .map(|m| a[m] * ((m as f64 + 1.0) * x + ph[m]).sin())
                        .sum()
                })
                .collect()
        })
        .collect();
    let maxima: Vec<f64> = [1.0, 1.5, 1.9]
        .iter()
        .map(|&alpha| {
            let op = DiscreteOperator::assemble(
                &MeasureSpec::alpha_stable(1, alpha).unwrap().robust(),
                &grid,
            )
            .unwrap();
            suite
                .iter()
                .map(|v| weighted_poincare_ratio(&op, v).unwrap().ratio)
                .fold(0.0, f64::max)
        })
        .collect();
    let hi = maxima.iter().cloned().fold(0.0, f64::max);
    let lo = maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi <= 1.25 * lo, "{maxima:?}");
}

#[test]
fn cauchy_profile_and_mass() {
    let spec = MeasureSpec::alpha_stable(1, 1.0)
        .unwrap()
        .fractional_laplacian();
    let cfg = HeatKernelConfig::default();
    let rep = heat_kernel_profile(&spec, &[0.5], &cfg).unwrap();
    let exact = 2.0 / std::f64::consts::PI;
    assert!((rep.on_diagonal[0].value - exact).abs() < 0.05 * exact);
    // far field follows t/(π x²)
    let ff = rep.far_field[0];
    assert!(ff.min_ratio > 0.25 && ff.max_ratio < 0.35, "{ff:?}");
    let wide = heat_kernel_profile(
        &spec,
        &[0.5],
        &HeatKernelConfig {
            box_radius: 16.0,
            ..cfg
        },
    )
    .unwrap();
    let (m8, m16) = (rep.on_diagonal[0].mass, wide.on_diagonal[0].mass);
    assert!(m16 > m8 && (m16 - m8) / m16 < 0.03);
    assert!(heat_kernel_profile(&MeasureSpec::axes(1, 1.0).unwrap(), &[0.5], &cfg).is_err());
}

#[test]
fn symmetric_exterior_mass_gives_flat_profiles() {
    let cfg = StrongHarnackConfig::default();
    let rep = strong_harnack_probe(&MeasureSpec::axes(2, 1.0).unwrap(), &[0.5], &cfg).unwrap();
    assert!(
        rep.symmetric_ratio < 1.1 && rep.levels[0].ratio > 2.0 * rep.symmetric_ratio,
        "{rep:?}"
    );
    assert!(!rep.equilibrium_flagged);
    assert!(strong_harnack_probe(&MeasureSpec::axes(2, 1.0).unwrap(), &[0.8], &cfg).is_err());
}

#[test]
fn forcing_from_far_negative_values_is_bounded_by_the_tail() {
    for (dim, spec) in [
        (1, MeasureSpec::alpha_stable(1, 1.2).unwrap()),
        (2, MeasureSpec::axes(2, 1.2).unwrap()),
    ] {
        let h = if dim == 1 { 1.0 / 32.0 } else { 1.0 / 8.0 };
        let grid = Grid::new(dim, 5.0, h, Domain::Ball(2.0)).unwrap();
        let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
        for k in 0..10 {
            let mut rng = sample_rng(21, k);
            let inner = random_exterior::<f64, _>(&mut rng, dim, 0.0, 2.0);
            let outer = random_exterior::<f64, _>(&mut rng, dim, 3.0, 5.0);
            let sup = outer.sup_bound();
            let u = Field::steady(move |x: [f64; 2]| {
                if x[0].hypot(x[1]) < 2.0 {
                    inner.value(x).abs()
                } else {
                    -outer.value(x)
                }
            })
            .with_reach(5.0);
            let rep = negative_part_forcing(&op, &u, sup).unwrap();
            assert!(rep.holds, "{rep:?}");
        }
    }
}

#[test]
fn doubling_the_box_barely_moves_harnack_quotients() {
    let spec = MeasureSpec::alpha_stable(1, 1.5).unwrap();
    let small = DiscreteOperator::assemble(
        &spec,
        &Grid::new(1, 3.0, 1.0 / 16.0, Domain::Ball(2.0)).unwrap(),
    )
    .unwrap();
    let large = DiscreteOperator::assemble(
        &spec,
        &Grid::new(1, 6.0, 1.0 / 16.0, Domain::Ball(2.0)).unwrap(),
    )
    .unwrap();
    let cfg = SampleConfig::default();
    for s in make_certified_samples(&small, 7, 5, &cfg).unwrap() {
        let ivp = IvpConfig::new(-1.0, 1.0, cfg.dt)
            .with_initial(s.initial.to_field())
            .with_exterior(s.exterior.to_field());
        let wide = solve(&large, &ivp).unwrap();
        let a: f64 = harnack_quotient(&s.u, 0.0, 1.5).unwrap().quotient.unwrap();
        let b = harnack_quotient(&wide, 0.0, 1.5).unwrap().quotient.unwrap();
        assert!((a - b).abs() < 0.02 * a, "{a} vs {b}");
    }
}

#[test]
fn single_precision_lab_quantities() {
    let grid = Arc::new(Grid::new(1, 3.0f32, 1.0 / 16.0, Domain::Ball(2.0)).unwrap());
    let flat = SpaceTimeFunction::sample(
        grid,
        -1.0f32,
        1.0 / 16.0,
        32,
        &Field::constant(1.0),
        Field::constant(1.0),
    )
    .unwrap();
    let q = harnack_quotient(&flat, 0.0, 1.5f32)
        .unwrap()
        .quotient
        .unwrap();
    assert!((q - 0.5f32.powf(1.5)).abs() < 1e-5);
    let levels = log_level_sets(&flat, 0.0, 1e-2, 1.5f32, 9).unwrap();
    assert_eq!(levels.sup_lower, 0.0);
    assert_eq!(levels.sup_upper, 0.0);
}
