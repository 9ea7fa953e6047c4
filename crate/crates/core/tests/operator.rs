mod common;

use common::{bump, gamma, simpson, simpson_pieces};

use nllab_core::field::Field;
use nllab_core::grid::{Domain, Grid};
use nllab_core::measure::MeasureSpec;
use nllab_core::operator::DiscreteOperator;
use proptest::prelude::*;

fn specs(dim: usize) -> Vec<MeasureSpec<f64>> {
    let mut v = vec![
        MeasureSpec::alpha_stable(dim, 0.6).unwrap(),
        MeasureSpec::alpha_stable(dim, 1.5).unwrap().robust(),
        MeasureSpec::axes(dim, 1.0).unwrap(),
    ];
    if dim == 2 {
        v.push(MeasureSpec::cusp(1.5, 0.75).unwrap());
    }
    v
}

#[test]
fn constants_are_annihilated() {
    for dim in [1, 2] {
        let h = if dim == 1 { 1.0 / 16.0 } else { 1.0 / 4.0 };
        let grid = Grid::new(dim, 2.0, h, Domain::Ball(1.0)).unwrap();
        for spec in specs(dim) {
            let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
            let u = vec![3.5; grid.len()];
            let lu = op.apply(&u, &Field::constant(3.5), 0.0).unwrap();
            let m = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(m < 1e-9, "{} d={dim}: {m:e}", spec.kind().name());
        }
    }
}

#[test]
fn odd_data_vanish_at_origin() {
    let grid = Grid::new(1, 2.0, 1.0 / 16.0, Domain::Ball(1.5)).unwrap();
    let op =
        DiscreteOperator::assemble(&MeasureSpec::alpha_stable(1, 1.2).unwrap(), &grid).unwrap();
    let odd = |x: f64| x.sin() * (1.0 + x * x);
    let g = Field::new(move |_, x: [f64; 2]| odd(x[0]) * (-x[0] * x[0]).exp()).with_reach(8.0);
    let u: Vec<f64> = grid.coords().iter().map(|x| g.value(0.0, *x)).collect();
    let lu = op.apply(&u, &g, 0.0).unwrap();
    let s = grid.interior_slot(grid.origin()).unwrap();
    assert!(lu[s].abs() < 1e-10, "{}", lu[s]);
}

#[test]
fn bump_peak_is_pushed_down() {
    for dim in [1, 2] {
        let h = if dim == 1 { 1.0 / 16.0 } else { 1.0 / 8.0 };
        let grid = Grid::new(dim, 2.0, h, Domain::Ball(2.0)).unwrap();
        for spec in specs(dim) {
            let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
            let u: Vec<f64> = grid
                .coords()
                .iter()
                .map(|x| bump(2.0 * x[0]) * bump(2.0 * x[1]))
                .collect();
            let lu = op.apply(&u, &Field::zero(), 0.0).unwrap();
            let s = grid.interior_slot(grid.origin()).unwrap();
            assert!(lu[s] < 0.0, "{} d={dim}", spec.kind().name());
        }
    }
}

#[test]
fn axes_couples_only_grid_lines() {
    let grid = Grid::new(2, 2.0, 0.25, Domain::Ball(2.0)).unwrap();
    let op = DiscreteOperator::assemble(&MeasureSpec::axes(2, 1.3).unwrap(), &grid).unwrap();
    assert!(op.stencil().iter().all(|(k, _)| k[0] == 0 || k[1] == 0));
    let k = op.system(0.0).unwrap();
    let int = grid.interior();
    for r in 0..k.n() {
        let xi = grid.multi(int[r]);
        for (c, v) in k.row(r) {
            let xj = grid.multi(int[c]);
            if v != 0.0 {
                assert!(xi[0] == xj[0] || xi[1] == xj[1]);
            }
        }
    }
}

#[test]
fn system_matrix_is_symmetric() {
    let grid = Grid::new(2, 2.0, 0.25, Domain::Ball(1.5)).unwrap();
    for spec in specs(2) {
        let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
        let k = op.system(0.0).unwrap();
        let n = k.n();
        let mut dense = vec![0.0; n * n];
        for r in 0..n {
            for (c, v) in k.row(r) {
                dense[r * n + c] = v;
            }
        }
        for r in 0..n {
            for c in 0..n {
                assert_eq!(dense[r * n + c], dense[c * n + r], "{}", spec.kind().name());
            }
        }
    }
}

#[test]
fn square_rings_of_cells_match_polar_oracle() {
    let h = 0.25;
    let m = 6i64;
    let grid = Grid::new(2, 2.0, h, Domain::Ball(2.0)).unwrap();
    for alpha in [0.7, 1.4] {
        let spec = MeasureSpec::alpha_stable(2, alpha).unwrap();
        let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
        let mut sum = 0.0;
        for p in -m..=m {
            for q in -m..=m {
                if (p, q) != (0, 0) {
                    sum += op.cell_mass([p, q]);
                }
            }
        }
        // |y|^{-2-α} over the square ring, radial part in closed form
        let ang = |phi: f64| phi.cos().abs().max(phi.sin().abs()).powf(alpha);
        let pieces: Vec<f64> = (0..=8)
            .map(|k| k as f64 * std::f64::consts::FRAC_PI_4)
            .collect();
        let angular = simpson_pieces(&ang, &pieces, 1e-14);
        let oracle =
            angular * (h / 2.0f64).powf(-alpha) * (1.0 - ((2 * m + 1) as f64).powf(-alpha)) / alpha;
        assert!(
            (sum - oracle).abs() <= 1e-6 * oracle,
            "alpha {alpha}: {sum} vs {oracle}"
        );

        let axes =
            DiscreteOperator::assemble(&MeasureSpec::axes(2, alpha).unwrap(), &grid).unwrap();
        let mut line = 0.0;
        for p in -m..=m {
            for q in -m..=m {
                if (p, q) != (0, 0) {
                    line += axes.cell_mass([p, q]);
                }
            }
        }
        let closed =
            4.0 / alpha * ((h / 2.0f64).powf(-alpha) - ((m as f64 + 0.5) * h).powf(-alpha));
        assert!((line - closed).abs() <= 1e-10 * closed);
    }
}

/// `-(-Δ)^{α/2}` constant for d = 1 checked against a direct integral
/// `c ∫ (cos y − 1)|y|^{-1-α} dy = −1`.
#[test]
fn fractional_laplacian_constant_reproduces_unit_symbol() {
    for alpha in [0.5f64, 1.0, 1.5] {
        let c = 2f64.powf(alpha) * gamma((1.0 + alpha) / 2.0)
            / (std::f64::consts::PI.sqrt() * gamma(-alpha / 2.0).abs());
        let spec = MeasureSpec::alpha_stable(1, alpha)
            .unwrap()
            .fractional_laplacian();
        assert!((spec.normalization() - c).abs() < 1e-12 * c);
        // oscillatory integral on [0, 40π] plus tail −∫_{40π}^∞ y^{-1-α} (cos part is O(Y^{-1-α}))
        let big = 40.0 * std::f64::consts::PI;
        let f = |y: f64| {
            if y == 0.0 {
                0.0
            } else {
                (y.cos() - 1.0) * y.powf(-1.0 - alpha)
            }
        };
        let pts: Vec<f64> = (0..=160)
            .map(|k| (k as f64 / 160.0).powi(3) * big)
            .collect();
        let core = simpson_pieces(&f, &pts, 1e-13);
        let osc_tail = simpson(
            &|y: f64| y.cos() * y.powf(-1.0 - alpha),
            big,
            big + 400.0 * std::f64::consts::PI,
            1e-12,
        );
        let total = 2.0 * c * (core - big.powf(-alpha) / alpha + osc_tail);
        assert!((total + 1.0).abs() < 2e-3, "alpha {alpha}: {total}");
    }
}

#[test]
fn cosine_reproduces_symbol() {
    let (l, h, alpha) = (8.0f64, 1.0 / 64.0, 1.5);
    let spec = MeasureSpec::alpha_stable(1, alpha)
        .unwrap()
        .fractional_laplacian();
    let grid = Grid::new(1, l, h, Domain::Ball(l)).unwrap();
    let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
    let g = Field::new(|_t, x: [f64; 2]| x[0].cos()).with_reach(64.0);
    let u: Vec<f64> = grid.coords().iter().map(|x| x[0].cos()).collect();
    let lu = op.apply(&u, &g, 0.0).unwrap();
    let mut err = 0.0f64;
    for (s, &i) in grid.interior().iter().enumerate() {
        let x = grid.coord(i)[0];
        if x.abs() <= l / 2.0 {
            err = err.max((lu[s] + x.cos()).abs());
        }
    }
    assert!(err < 0.05, "{err}");
}

/// `(1 − z²)⁴` on `(-1, 1)`, zero outside.
fn poly_bump(z: f64) -> f64 {
    if z.abs() < 1.0 {
        (1.0 - z * z).powi(4)
    } else {
        0.0
    }
}

/// `u(x+y) + u(x−y) − 2u(x)` for the polynomial bump, using the even Taylor
/// series (finite) while both points stay inside the support.
fn second_difference(x: f64, y: f64) -> f64 {
    if x.abs() + y < 1.0 {
        // coefficients of (1 - z^2)^4 in powers of z
        let c = [1.0, 0.0, -4.0, 0.0, 6.0, 0.0, -4.0, 0.0, 1.0];
        let mut deriv = c.to_vec();
        let mut total = 0.0;
        let mut fact = 1.0;
        for j in 1..=8usize {
            deriv = deriv
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, v)| v * i as f64)
                .collect();
            fact *= j as f64;
            if j % 2 == 0 {
                let value: f64 = deriv.iter().rev().fold(0.0, |acc, v| acc * x + v);
                total += 2.0 * value * y.powi(j as i32) / fact;
            }
        }
        total
    } else {
        poly_bump(x + y) + poly_bump(x - y) - 2.0 * poly_bump(x)
    }
}

/// Direct quadrature of `∫_0^∞ (u(x+y) + u(x−y) − 2u(x)) y^{-1-α} dy`
/// with `y = s^k`, `k = 2/(2−α)`, which makes the integrand smooth at 0.
fn dense_oracle(x: f64, alpha: f64) -> f64 {
    let k = 2.0 / (2.0 - alpha);
    let f = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let y = s.powf(k);
        second_difference(x, y) * y.powf(-1.0 - alpha) * k * s.powf(k - 1.0)
    };
    let y_end = 1.0 + x.abs();
    let mut pts: Vec<f64> = (0..=32)
        .map(|j| j as f64 / 32.0 * y_end.powf(1.0 / k))
        .collect();
    let kink = (1.0 - x.abs()).max(0.0).powf(1.0 / k);
    pts.push(kink);
    pts.sort_by(f64::total_cmp);
    let inner = simpson_pieces(&f, &pts, 1e-12);
    inner - 2.0 * poly_bump(x) * y_end.powf(-alpha) / alpha
}

#[test]
fn refinement_approaches_dense_quadrature() {
    let alpha = 1.3;
    let spec = MeasureSpec::alpha_stable(1, alpha).unwrap();
    let mut errs = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let grid = Grid::new(1, 4.0, h, Domain::Cube(4.0)).unwrap();
        let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
        let u: Vec<f64> = grid.coords().iter().map(|x| poly_bump(x[0])).collect();
        let lu = op.apply(&u, &Field::zero(), 0.0).unwrap();
        let mut err = 0.0f64;
        for (s, &i) in grid.interior().iter().enumerate() {
            let x = grid.coord(i)[0];
            if x.abs() <= 1.5 && (x * 4.0).fract() == 0.0 {
                err = err.max((lu[s] - dense_oracle(x, alpha)).abs());
            }
        }
        errs.push(err);
    }
    assert!(errs[0] >= 1.5 * errs[1], "{errs:?}");
}

#[test]
fn row_masses_reproduce_k1() {
    let rho = 1.0f64;
    let h = rho / 8.0;
    for (spec, expected) in [
        (
            MeasureSpec::alpha_stable(1, 1.5).unwrap(),
            2.0 / 0.5 + 2.0 / 1.5,
        ),
        (MeasureSpec::axes(2, 1.0).unwrap(), 8.0),
        (
            MeasureSpec::alpha_stable(1, 0.7).unwrap(),
            2.0 / 1.3 + 2.0 / 0.7,
        ),
    ] {
        let dim = spec.dim();
        let grid = Grid::new(dim, 2.0, h, Domain::Ball(0.5)).unwrap();
        let op = DiscreteOperator::assemble(&spec, &grid).unwrap();
        let o = grid.origin();
        let slot = grid.interior_slot(o).unwrap();
        let mut inner = 0.0;
        let mut outer = op.tail_mass(slot);
        for (j, w) in op.neighbors(o) {
            let y = grid.coord(j);
            let r2 = y[0] * y[0] + y[1] * y[1];
            if r2 <= rho * rho + 1e-12 {
                inner += r2 * w;
            } else {
                outer += w;
            }
        }
        let alpha = spec.alpha();
        let k1 = rho.powf(alpha) * (inner / (rho * rho) + outer);
        assert!(
            (k1 - expected).abs() <= 0.05 * expected,
            "{}: {k1} vs {expected}",
            spec.kind().name()
        );
    }
}

/// 17-node grid on `[-1, 1]`, equation domain `(-3/4, 3/4)`.
fn small_1d() -> (Grid<f64>, DiscreteOperator<f64>) {
    let grid = Grid::new(1, 1.0, 1.0 / 8.0, Domain::Ball(0.75)).unwrap();
    let op =
        DiscreteOperator::assemble(&MeasureSpec::alpha_stable(1, 1.1).unwrap(), &grid).unwrap();
    (grid, op)
}

#[test]
fn energy_of_constant_vanishes() {
    let (grid, op) = small_1d();
    let c = vec![2.0; grid.len()];
    let v: Vec<f64> = grid.coords().iter().map(|x| x[0].sin()).collect();
    let g = Field::new(|_, x: [f64; 2]| x[0].sin()).with_reach(1.0625);
    let e = op
        .bilinear_form(&c, &v, 0.0, &Field::constant(2.0), &g)
        .unwrap();
    assert!(e.abs() < 1e-12, "{e}");
}

#[test]
fn duality_with_exterior_data() {
    let (grid, op) = small_1d();
    let g = Field::new(|_, x: [f64; 2]| 0.3 + (x[0] * 1.7).sin().powi(2) * (-x[0].abs()).exp());
    assert_eq!(grid.len(), 17);
    let mut u: Vec<f64> = grid.coords().iter().map(|x| g.value(0.0, *x)).collect();
    for (k, &i) in grid.interior().iter().enumerate() {
        u[i] = (k as f64 * 0.37).cos();
    }
    let phi: Vec<f64> = grid
        .coords()
        .iter()
        .map(|x| (0.5 - x[0].abs()).max(0.0) * (1.0 + x[0]))
        .collect();
    let e = op.bilinear_form(&u, &phi, 0.0, &g, &Field::zero()).unwrap();
    let lu = op.apply(&u, &g, 0.0).unwrap();
    let pairing: f64 = grid
        .interior()
        .iter()
        .zip(&lu)
        .map(|(&i, l)| l * phi[i])
        .sum::<f64>()
        * grid.cell_volume();
    assert!((e + pairing).abs() <= 1e-8, "{e} vs {pairing}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn energy_is_nonnegative(vals in proptest::collection::vec(-5.0f64..5.0, 17)) {
        let (_, op) = small_1d();
        let e = op.bilinear_form(&vals, &vals, 0.0, &Field::zero(), &Field::zero()).unwrap();
        prop_assert!(e >= 0.0);
    }

    #[test]
    fn translation_leaves_masses_fixed(p in -3i64..=3, q in -3i64..=3, shift in -1.0f64..1.0) {
        prop_assume!((p, q) != (0, 0));
        let spec = MeasureSpec::cusp(1.5, 0.75).unwrap();
        let h = 0.25;
        let lo = [(p as f64 - 0.5) * h, (q as f64 - 0.5) * h];
        let hi = [(p as f64 + 0.5) * h, (q as f64 + 0.5) * h];
        let x = [shift, -0.5 * shift];
        let a = spec.measure_of_set(&[0.0, 0.0], &nllab_core::measure::SetDescriptor::Cell { lo, hi }).unwrap();
        let moved = nllab_core::measure::SetDescriptor::Cell {
            lo: [lo[0] + x[0], lo[1] + x[1]],
            hi: [hi[0] + x[0], hi[1] + x[1]],
        };
        let b = spec.measure_of_set(&x, &moved).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-7 * a.value + a.error + b.error);
    }
}
