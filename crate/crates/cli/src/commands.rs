use std::path::Path;
use std::sync::Arc;

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use nllab_core::conditions::{check_k1, check_k2, check_k3, default_balls, TestSuite};
use nllab_core::field::Field;
use nllab_core::lab::*;
use nllab_core::measure::MeasureSpec;
use nllab_core::operator::DiscreteOperator;
use nllab_core::random_data::{random_sine_sum, rough_signs};
use nllab_core::rng::sample_rng;
use nllab_core::samples::{make_certified_samples, SampleConfig, SupersolutionSample};
use nllab_core::solver::{solve_with_stats, IvpConfig};
use nllab_core::spacetime::SpaceTimeFunction;

use crate::config::{
    ExperimentBlock, ExperimentConfig, ExperimentName, InitialSpec, MoserModeName,
};
use crate::error::CliError;
use crate::output::{num, Output};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::InvalidConfig(msg.into())
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| invalid(format!("{what} draws random data and needs a seed")))
}

pub fn check_conditions(
    cfg: &ExperimentConfig,
    base: &Path,
    out: &mut Output,
) -> Result<(), CliError> {
    let spec = cfg.measure(base)?;
    let block = cfg
        .conditions
        .clone()
        .unwrap_or_else(|| toml::from_str("").expect("conditions block has defaults"));
    let judge = |r: nllab_core::conditions::ConditionReport<f64>| match block.budget {
        Some(b) => r.with_budget(b),
        None => r,
    };

    let k1 = judge(check_k1(&spec, &block.rhos)?);
    out.csv(
        "k1.csv",
        &["rho", "value"],
        k1.scales
            .iter()
            .zip(&k1.measured_values)
            .map(|(&s, &v)| vec![num(s), num(v)]),
    )?;
    info!("moment condition: lambda {}", k1.lambda_measured);

    let k2 = if block.dh.is_empty() {
        None
    } else {
        let balls = cfg.balls().unwrap_or_else(|| default_balls(spec.dim()));
        let suite = TestSuite::default_for(spec.dim(), block.suite_seed);
        let r = judge(check_k2(&spec, &balls, &block.dh, &suite)?);
        let details = r.k2.as_ref().expect("energy report carries details");
        out.csv(
            "k2_levels.csv",
            &["dh", "upper_ratio", "lower_ratio"],
            details
                .levels
                .iter()
                .map(|l| vec![num(l.dh), num(l.upper_ratio), num(l.lower_ratio)]),
        )?;
        out.csv(
            "k2_samples.csv",
            &[
                "function", "center_x", "center_y", "radius", "dh", "e_mu", "e_alpha", "ratio",
            ],
            details.samples.iter().map(|s| {
                vec![
                    s.name.clone(),
                    num(s.center[0]),
                    num(s.center[1]),
                    num(s.radius),
                    num(s.dh),
                    num(s.e_mu),
                    num(s.e_alpha_normalized),
                    num(s.ratio()),
                ]
            }),
        )?;
        info!("energy comparison: lambda {}", r.lambda_measured);
        Some(r)
    };

    let k3 = match block.delta {
        Some(delta) => {
            let r = judge(check_k3(&spec, delta)?);
            out.csv(
                "k3.csv",
                &["radius", "value"],
                r.scales
                    .iter()
                    .zip(&r.measured_values)
                    .map(|(&s, &v)| vec![num(s), num(v)]),
            )?;
            Some(r)
        }
        None => None,
    };

    let summary = |r: &nllab_core::conditions::ConditionReport<f64>| {
        json!({
            "lambda_measured": r.lambda_measured,
            "c0_measured": r.c0_measured,
            "delta": r.delta,
            "divergent": r.divergent,
            "budget": r.budget,
            "pass": r.pass,
            "trend": r.k2.as_ref().and_then(|d| d.trend),
            "verified": r.k2.as_ref().map(|d| d.verified),
            "rule": r.k2.as_ref().map(|d| d.rule),
        })
    };
    out.json(
        "conditions.json",
        &json!({
            "measure": cfg.measure,
            "k1": summary(&k1),
            "k2": k2.as_ref().map(summary),
            "k3": k3.as_ref().map(summary),
        }),
    )
}

fn initial_field(
    spec: &InitialSpec,
    dim: usize,
    seed: Option<u64>,
) -> Result<Option<Field<f64>>, CliError> {
    Ok(match *spec {
        InitialSpec::Constant { value } => Some(Field::constant(value)),
        InitialSpec::Bump {
            width,
            height,
            power,
        } => {
            if !(width > 0.0) {
                return Err(invalid("bump width must be positive"));
            }
            Some(
                Field::steady(move |x: [f64; 2]| {
                    let q = (x[0] * x[0] + x[1] * x[1]) / (width * width);
                    height * (1.0 - q).max(0.0).powi(power)
                })
                .with_reach(width)
                .with_bound(height.abs()),
            )
        }
        InitialSpec::Delta => None,
        InitialSpec::RoughSigns { cell, radius } => {
            if !(cell > 0.0 && radius > 0.0) {
                return Err(invalid("rough data needs positive cell and radius"));
            }
            let seed = require_seed(seed, "rough initial data")?;
            Some(rough_signs(&mut sample_rng(seed, 0), dim, cell, radius))
        }
    })
}

fn coordinate_columns(dim: usize) -> Vec<&'static str> {
    if dim == 1 {
        vec!["x"]
    } else {
        vec!["x", "y"]
    }
}

pub fn solve(
    cfg: &ExperimentConfig,
    base: &Path,
    seed: Option<u64>,
    out: &mut Output,
) -> Result<(), CliError> {
    let spec = cfg.measure(base)?;
    let grid = cfg.grid()?;
    let block = cfg
        .solve
        .as_ref()
        .ok_or_else(|| invalid("missing [solve] block"))?;
    let op = DiscreteOperator::assemble(&spec, &grid)?;
    let mut ivp = cfg
        .ivp(block.t0, block.t1)?
        .with_exterior(Field::constant(block.exterior))
        .with_source(Field::constant(block.source));
    ivp = match initial_field(&block.initial, spec.dim(), seed)? {
        Some(f) => ivp.with_initial(f),
        None => {
            let mut u0 = vec![0.0; grid.len()];
            u0[grid.origin()] = 1.0 / grid.cell_volume();
            ivp.with_initial_nodes(u0)
        }
    };
    let (u, stats) = solve_with_stats(&op, &ivp)?;
    info!(
        "solved {} steps, worst relative residual {:e}",
        stats.steps, stats.max_relative_residual
    );

    let coords = grid.coords();
    let mut header = vec!["t"];
    header.extend(coordinate_columns(spec.dim()));
    header.extend(["interior", "u"]);
    let mut snapshots = Vec::new();
    for (n, &t) in block.snapshots.iter().enumerate() {
        let k = u
            .level_index(t)
            .ok_or_else(|| invalid(format!("snapshot time {t} is not a time level")))?;
        let name = format!("snapshot_{n:03}.csv");
        let level = u.level(k);
        out.csv(
            &name,
            &header,
            coords.iter().enumerate().map(|(i, x)| {
                let mut row = vec![num(u.time(k))];
                row.extend(x[..spec.dim()].iter().map(|&c| num(c)));
                row.push(u8::from(grid.is_interior(i)).to_string());
                row.push(num(level[i]));
                row
            }),
        )?;
        snapshots
            .push(json!({ "t": u.time(k), "file": name, "center_value": level[grid.origin()] }));
    }
    out.json(
        "solve.json",
        &json!({
            "steps": stats.steps,
            "max_cg_iterations": stats.max_iterations,
            "max_relative_residual": stats.max_relative_residual,
            "nodes": grid.len(),
            "interior_nodes": grid.interior().len(),
            "snapshots": snapshots,
        }),
    )
}

fn sample_config(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
) -> Result<SampleConfig<f64>, CliError> {
    let s = cfg.solver_block()?;
    Ok(SampleConfig {
        t0: -1.0,
        t1: 1.0,
        dt: s.dt,
        theta: s.theta,
        tolerance: s.tolerance,
        certificates: e.certificates,
    })
}

fn operator(
    cfg: &ExperimentConfig,
    spec: &MeasureSpec<f64>,
) -> Result<DiscreteOperator<f64>, CliError> {
    Ok(DiscreteOperator::assemble(spec, &cfg.grid()?)?)
}

fn certified(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    seed: u64,
) -> Result<Vec<SupersolutionSample<f64>>, CliError> {
    let op = operator(cfg, spec)?;
    let samples = make_certified_samples(&op, seed, e.samples, &sample_config(cfg, e)?)?;
    info!("{} certified supersolutions", samples.len());
    Ok(samples)
}

fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

#[derive(Serialize)]
struct BatchSummary {
    count: usize,
    max: Option<f64>,
    median: Option<f64>,
    /// `max / median`.
    spread: Option<f64>,
}

impl BatchSummary {
    fn of(values: &[f64]) -> Self {
        let max = values
            .iter()
            .copied()
            .filter(|x| x.is_finite())
            .reduce(f64::max);
        let median = median(values);
        let spread = match (max, median) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        Self {
            count: values.len(),
            max,
            median,
            spread,
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn regularity(
    cfg: &ExperimentConfig,
    base: &Path,
    seed: Option<u64>,
    out: &mut Output,
) -> Result<(), CliError> {
    let spec = cfg.measure(base)?;
    let e = cfg.experiment_block()?;
    let seed = if e.name.is_randomized() {
        Some(require_seed(seed, e.name.as_str())?)
    } else {
        seed
    };
    info!("running {}", e.name.as_str());
    match e.name {
        ExperimentName::Harnack => harnack(cfg, e, &spec, seed.unwrap_or_default(), out),
        ExperimentName::Hoelder => hoelder(cfg, e, &spec, seed, out),
        ExperimentName::Scaling => scaling(cfg, e, &spec, seed, out),
        ExperimentName::Poincare => poincare(cfg, e, &spec, seed.unwrap_or_default(), out),
        ExperimentName::Loglemma => loglemma(cfg, e, &spec, seed.unwrap_or_default(), out),
        ExperimentName::Moser => moser(cfg, e, &spec, seed.unwrap_or_default(), out),
        ExperimentName::Heatkernel => heatkernel(cfg, e, &spec, out),
        ExperimentName::Strongharnack => strongharnack(cfg, e, &spec, out),
    }
}

fn harnack(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    seed: u64,
    out: &mut Output,
) -> Result<(), CliError> {
    let op = operator(cfg, spec)?;
    let sc = sample_config(cfg, e)?;
    let report = harnack_batch(&op, seed, e.samples, &sc)?;
    let constant = if e.include_constant {
        let steps = IvpConfig::new(sc.t0, sc.t1, sc.dt).steps()?;
        let flat = SpaceTimeFunction::sample(
            Arc::new(op.grid().clone()),
            sc.t0,
            sc.dt,
            steps,
            &Field::constant(1.0),
            Field::constant(1.0),
        )?;
        Some(harnack_quotient(&flat, 0.0, spec.alpha())?)
    } else {
        None
    };
    let mut rows: Vec<Vec<String>> = report
        .indices
        .iter()
        .zip(&report.samples)
        .enumerate()
        .map(|(n, (idx, q))| {
            vec![
                n.to_string(),
                idx.to_string(),
                num(q.numerator),
                num(q.infimum),
                opt(q.quotient),
            ]
        })
        .collect();
    if let Some(q) = &constant {
        rows.push(vec![
            "constant".into(),
            String::new(),
            num(q.numerator),
            num(q.infimum),
            opt(q.quotient),
        ]);
    }
    out.csv(
        "harnack.csv",
        &["sample", "stream_index", "numerator", "infimum", "quotient"],
        rows,
    )?;
    let quotients: Vec<f64> = report.samples.iter().filter_map(|q| q.quotient).collect();
    out.json(
        "harnack.json",
        &json!({
            "alpha": report.alpha,
            "h": report.h,
            "dt": report.dt,
            "max_quotient": report.max_quotient,
            "degenerate": report.degenerate,
            "batch": BatchSummary::of(&quotients),
            "constant_sample": constant,
        }),
    )
}

fn hoelder(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    seed: Option<u64>,
    out: &mut Output,
) -> Result<(), CliError> {
    let grid = cfg.grid()?;
    let w = e.window.map_or(
        HolderWindow {
            t_start: 0.25,
            t_end: 1.0,
            center: [0.0, 0.0],
            radius: 0.5,
        },
        |w| HolderWindow {
            t_start: w.t_start,
            t_end: w.t_end,
            center: w.center,
            radius: w.radius,
        },
    );
    let initial = e.initial.unwrap_or(InitialSpec::RoughSigns {
        cell: 1.0 / 32.0,
        radius: grid.domain().radius(),
    });
    let u0 = initial_field(&initial, spec.dim(), seed)?
        .ok_or_else(|| invalid("the Hoelder fit needs analytic initial data"))?;
    let op = DiscreteOperator::assemble(spec, &grid)?;
    let (u, _) = solve_with_stats(&op, &cfg.ivp(0.0, w.t_end)?.with_initial(u0))?;
    let fit = holder_fit(&u, &w, spec.effective_order()?)?;
    out.csv(
        "hoelder.csv",
        &["distance", "oscillation"],
        fit.envelope.iter().map(|&(d, o)| vec![num(d), num(o)]),
    )?;
    out.json("hoelder.json", &fit)
}

fn scaling(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    seed: Option<u64>,
    out: &mut Output,
) -> Result<(), CliError> {
    let g = cfg.grid_block()?;
    let s = cfg.solver_block()?;
    let r = e.r.ok_or_else(|| invalid("scaling needs `r`"))?;
    let initial = e.initial.unwrap_or(InitialSpec::Bump {
        width: 0.5,
        height: 1.0,
        power: 4,
    });
    let problem = ScalingProblem {
        initial: initial_field(&initial, spec.dim(), seed)?
            .ok_or_else(|| invalid("scaling needs analytic initial data"))?,
        ..Default::default()
    };
    let params = ScalingParams {
        r,
        xi: e.xi,
        tau: e.tau,
        alpha: spec.alpha(),
    };
    let setup = ScalingSetup {
        h: g.h,
        dt: s.dt,
        box_radius: g.box_radius,
        theta: s.theta,
        tolerance: s.tolerance,
    };
    let rep = scaling_check(spec, &params, &problem, &setup)?;
    out.csv(
        "scaling.csv",
        &[
            "r",
            "discrepancy",
            "scheme_allowance",
            "within_allowance",
            "compared_nodes",
            "compared_levels",
            "weight_mismatch",
        ],
        [vec![
            num(r),
            num(rep.discrepancy),
            num(rep.scheme_allowance),
            rep.within_allowance.to_string(),
            rep.compared_nodes.to_string(),
            rep.compared_levels.to_string(),
            num(rep.weight_mismatch),
        ]],
    )?;
    out.json("scaling.json", &json!({ "params": params, "report": rep }))
}

fn poincare(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    seed: u64,
    out: &mut Output,
) -> Result<(), CliError> {
    let op = operator(cfg, spec)?;
    let coords = op.grid().coords();
    let reports = (0..e.samples as u64)
        .into_par_iter()
        .map(|k| {
            let f = random_sine_sum::<f64, _>(&mut sample_rng(seed, k), spec.dim(), e.sine_modes);
            let v: Vec<f64> = coords.iter().map(|&x| f.value(0.0, x)).collect();
            weighted_poincare_ratio(&op, &v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.csv(
        "poincare.csv",
        &["function", "lhs", "rhs", "ratio", "degenerate"],
        reports.iter().enumerate().map(|(k, r)| {
            vec![
                k.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(r.ratio),
                r.degenerate.to_string(),
            ]
        }),
    )?;
    let ratios: Vec<f64> = reports.iter().map(|r| r.ratio).collect();
    out.json(
        "poincare.json",
        &json!({ "batch": BatchSummary::of(&ratios) }),
    )
}

fn loglemma(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    seed: u64,
    out: &mut Output,
) -> Result<(), CliError> {
    let samples = certified(cfg, e, spec, seed)?;
    let alpha = spec.alpha();
    let reports = samples
        .par_iter()
        .map(|s| log_level_sets(&s.u, 0.0, e.epsilon, alpha, e.levels))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (n, (s, r)) in samples.iter().zip(&reports).enumerate() {
        for ((&lvl, &lo), &up) in r.levels.iter().zip(&r.lower).zip(&r.upper) {
            rows.push(vec![
                n.to_string(),
                s.index.to_string(),
                num(r.a),
                num(lvl),
                num(lo),
                num(up),
            ]);
        }
    }
    out.csv(
        "loglemma.csv",
        &["sample", "stream_index", "a", "s", "lower", "upper"],
        rows,
    )?;
    let lower: Vec<f64> = reports.iter().map(|r| r.sup_lower).collect();
    let upper: Vec<f64> = reports.iter().map(|r| r.sup_upper).collect();
    out.json(
        "loglemma.json",
        &json!({
            "epsilon": e.epsilon,
            "sup_lower": BatchSummary::of(&lower),
            "sup_upper": BatchSummary::of(&upper),
        }),
    )
}

fn moser(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    seed: u64,
    out: &mut Output,
) -> Result<(), CliError> {
    let samples = certified(cfg, e, spec, seed)?;
    let modes = if e.modes.is_empty() {
        vec![
            MoserModeName::NegStep,
            MoserModeName::NegIter,
            MoserModeName::PosIter,
        ]
    } else {
        e.modes.clone()
    };
    let mut runs = Vec::new();
    for mode in modes {
        let (m, defaults) = match mode {
            MoserModeName::NegStep => (MoserMode::NegStep, vec![0.25, 0.5, 1.0]),
            MoserModeName::NegIter => (MoserMode::NegIter, vec![0.25, 0.5, 1.0]),
            MoserModeName::PosIter => (MoserMode::PosIter, vec![0.1, 0.25]),
        };
        let ps = if e.exponents.is_empty() {
            defaults
        } else {
            e.exponents.clone()
        };
        runs.extend(ps.into_iter().map(|p| (m, p)));
    }
    let alpha = spec.alpha();
    let [r, big_r] = e.radii;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (mode, p) in runs {
        let reports = samples
            .par_iter()
            .map(|s| moser_check(&s.u, 0.0, e.epsilon, alpha, mode, p, r, big_r))
            .collect::<Result<Vec<_>, _>>()?;
        for (n, (s, rep)) in samples.iter().zip(&reports).enumerate() {
            rows.push(vec![
                n.to_string(),
                s.index.to_string(),
                format!("{mode:?}"),
                num(p),
                num(rep.kappa),
                num(rep.lhs),
                num(rep.rhs),
                num(rep.constant),
            ]);
        }
        let constants: Vec<f64> = reports.iter().map(|r| r.constant).collect();
        summaries.push(json!({
            "mode": mode,
            "p": p,
            "constant": BatchSummary::of(&constants),
        }));
    }
    out.csv(
        "moser.csv",
        &[
            "sample",
            "stream_index",
            "mode",
            "p",
            "kappa",
            "lhs",
            "rhs",
            "constant",
        ],
        rows,
    )?;
    out.json(
        "moser.json",
        &json!({ "epsilon": e.epsilon, "r": r, "big_r": big_r, "runs": summaries }),
    )
}

fn heatkernel(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    out: &mut Output,
) -> Result<(), CliError> {
    let g = cfg.grid_block()?;
    let s = cfg.solver_block()?;
    let times = if e.times.is_empty() {
        vec![0.25, 0.5, 1.0]
    } else {
        e.times.clone()
    };
    let hk = HeatKernelConfig {
        h: g.h,
        box_radius: g.box_radius,
        dt: s.dt,
        theta: s.theta,
        tolerance: s.tolerance,
    };
    let rep = heat_kernel_profile(spec, &times, &hk)?;
    out.csv(
        "heatkernel.csv",
        &[
            "t",
            "value",
            "scaled",
            "mass",
            "far_nodes",
            "far_min_ratio",
            "far_max_ratio",
        ],
        rep.on_diagonal.iter().zip(&rep.far_field).map(|(o, f)| {
            vec![
                num(o.t),
                num(o.value),
                num(o.scaled),
                num(o.mass),
                f.nodes.to_string(),
                num(f.min_ratio),
                num(f.max_ratio),
            ]
        }),
    )?;
    out.json("heatkernel.json", &rep)
}

fn strongharnack(
    cfg: &ExperimentConfig,
    e: &ExperimentBlock,
    spec: &MeasureSpec<f64>,
    out: &mut Output,
) -> Result<(), CliError> {
    let mut sh = StrongHarnackConfig::default();
    if let Some(g) = &cfg.grid {
        sh.h = g.h;
        sh.box_radius = g.box_radius;
        sh.domain_radius = g.domain_radius.unwrap_or(sh.domain_radius);
    }
    if let Some(s) = &cfg.solver {
        sh.dt = s.dt;
        sh.solver_tolerance = s.tolerance;
    }
    if let Some(o) = e.offset {
        sh.offset = o;
    }
    if let Some(n) = e.steps {
        sh.steps = n;
    }
    let widths = if e.widths.is_empty() {
        vec![0.5, 0.25, 0.125]
    } else {
        e.widths.clone()
    };
    let rep = strong_harnack_probe(spec, &widths, &sh)?;
    out.csv(
        "strongharnack.csv",
        &["width", "sup", "inf", "ratio", "final_change"],
        rep.levels.iter().map(|l| {
            vec![
                num(l.width),
                num(l.sup),
                num(l.inf),
                num(l.ratio),
                num(l.final_change),
            ]
        }),
    )?;
    out.json(
        "strongharnack.json",
        &json!({ "config": sh, "report": rep }),
    )
}
