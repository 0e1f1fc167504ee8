//! Dispatch of validated experiments to the library, one table per run.

use std::sync::Arc;

use anderson_clt::clt::{
    approx_variance_convergence, directional_decomposition, martingale_decomposition, normality_test,
    polynomial_variance_scan, positivity_check, sample_x, variance_bound_check, variance_bound_exact,
    ApproxSettings, EnumerationEngine, FiltrationPlan, PositivityVerdict,
};
use anderson_clt::functions::TestFunction;
use anderson_clt::measures::{
    fprime_norm_estimate, ids_moment_convergence, nubar_moment_exact_finite, nubar_moment_mc, SiteSampling,
};
use anderson_clt::model::rng::{CounterStream, Purpose};
use anderson_clt::model::{assemble_hamiltonian, enumerate_cube, sample_disorder, SsdSpec};
use anderson_clt::moments::{moment_bound_check, moment_table, Volume};
use anderson_clt::parallel::try_ordered_map;
use anderson_clt::spectral::hellmann_feynman_check;
use anderson_clt::Result;

use crate::config::{Experiment, Plan};
use crate::report::{Cell, Table, Verdict};

/// Absolute tolerance of the exact enumeration identities.
const EXACT_TOL: f64 = 1e-10;
/// Relative tolerance of the trace derivative check, scaled by `1 + |value|`.
const HF_TOL: f64 = 1e-6;
/// Monte Carlo moments of `ν̄` must lie within this many standard errors of the exact value.
const NUBAR_Z: f64 = 4.0;

fn replicate_range(r: usize) -> String {
    format!("0..{r}")
}

pub fn run(e: &Experiment) -> Result<Table> {
    let cfg = &e.config;
    let (d, ssd, seed) = (cfg.d, cfg.ssd, cfg.master_seed);
    match &e.plan {
        Plan::Clt {
            grid,
            f,
            replicates,
            interval,
            norm_replicates,
        } => clt(d, &ssd, seed, grid, f, *replicates, *interval, *norm_replicates),
        Plan::VarianceScan { grid, poly, replicates } => {
            let scan = polynomial_variance_scan(poly, d, &ssd, grid, *replicates, seed)?;
            let mut t = Table::new(&[
                "d", "L", "function", "ssd", "R", "sigma2_hat", "std_error", "stabilized",
            ]);
            for row in &scan.rows {
                t.push(
                    vec![
                        Cell::int(d),
                        Cell::int(row.l),
                        Cell::text(format!("poly[{poly}]")),
                        Cell::text(ssd.id()),
                        Cell::int(*replicates),
                        Cell::Num(row.report.sigma2_hat),
                        Cell::Num(row.report.std_error),
                        Cell::Bool(scan.stabilized),
                    ],
                    seed,
                    &replicate_range(*replicates),
                );
            }
            Ok(t)
        }
        Plan::ApproxConvergence {
            l,
            f,
            degrees,
            interval,
            replicates,
            norm_replicates,
            norm_sites,
            scheme,
        } => {
            let settings = ApproxSettings {
                scheme: *scheme,
                replicates: *replicates,
                master_seed: seed,
                norm_replicates: *norm_replicates,
                norm_sampling: norm_sites.map_or(SiteSampling::All, SiteSampling::Random),
            };
            let table = approx_variance_convergence(f, degrees, *interval, d, *l, &ssd, settings)?;
            let mut t = Table::new(&[
                "d", "L", "function", "ssd", "R", "degree", "sigma_q", "sigma_f", "norm", "norm_se", "bound",
                "combined_se", "passes",
            ]);
            for row in &table.rows {
                t.push(
                    vec![
                        Cell::int(d),
                        Cell::int(*l),
                        Cell::text(f.label()),
                        Cell::text(ssd.id()),
                        Cell::int(*replicates),
                        Cell::int(row.degree),
                        Cell::Num(row.sigma_q),
                        Cell::Num(row.sigma_f),
                        Cell::Num(row.norm),
                        Cell::Num(row.norm_se),
                        Cell::Num(row.bound),
                        Cell::Num(row.combined_se),
                        Cell::Bool(row.passes),
                    ],
                    seed,
                    &replicate_range(*replicates),
                );
                t.verdict(Verdict::new(
                    format!("approximation bound k={}", row.degree),
                    row.passes,
                    format!(
                        "|σ_Q − σ_f| = {} vs bound {} + 3·{}",
                        (row.sigma_q - row.sigma_f).abs(),
                        row.bound,
                        row.combined_se
                    ),
                ));
            }
            t.verdict(Verdict::new(
                "bound strictly decreasing",
                table.bound_decreasing,
                format!("{:?}", table.rows.iter().map(|r| r.bound).collect::<Vec<_>>()),
            ));
            Ok(t)
        }
        Plan::Moments { k_grid, p_grid, l } => {
            let volume = l.map_or(Volume::Infinite, Volume::Finite);
            let k_max = *k_grid.iter().max().expect("validated nonempty");
            let rows = moment_table(d, k_max, &ssd, p_grid, volume)?;
            let growth = ssd.growth_constants();
            let mut t = Table::new(&["d", "k", "p", "volume", "ssd", "exact", "value", "bound", "bound_ratio"]);
            for row in rows.iter().filter(|r| k_grid.contains(&r.k)) {
                let check = row.p.map(|p| moment_bound_check(row.value, row.k as u32, d, growth, p));
                t.push(
                    vec![
                        Cell::int(d),
                        Cell::int(row.k),
                        row.p.map_or(Cell::Empty, |p| Cell::int(p as usize)),
                        Cell::text(row.volume.clone()),
                        Cell::text(ssd.id()),
                        Cell::text(row.exact.clone()),
                        Cell::Num(row.value),
                        check.map_or(Cell::Empty, |c| Cell::Num(c.bound)),
                        check.map_or(Cell::Empty, |c| Cell::Num(c.ratio)),
                    ],
                    seed,
                    "exact",
                );
                if let (Some(c), Some(p)) = (check, row.p) {
                    t.verdict(Verdict::new(
                        format!("moment bound k={} p={p}", row.k),
                        c.passes,
                        format!("|m̄| = {} ≤ {}", c.value.abs(), c.bound),
                    ));
                }
            }
            Ok(t)
        }
        Plan::Nubar { l, p, k_grid, replicates } => {
            let mut t = Table::new(&[
                "d", "L", "p", "k", "ssd", "R", "value", "std_error", "exact", "exact_value", "z",
            ]);
            for &k in k_grid {
                let est = nubar_moment_mc(d, *l, &ssd, *p, k, *replicates, seed)?;
                let exact = match ssd {
                    SsdSpec::TwoPoint { .. } => Some(nubar_moment_exact_finite(d, *l, &ssd, *p, k)?),
                    _ => None,
                };
                let z = exact.as_ref().map(|x| {
                    let diff = (est.value - x.value).abs();
                    if est.std_error > 0.0 {
                        diff / est.std_error
                    } else if diff <= 1e-12 * (1.0 + x.value.abs()) {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                });
                t.push(
                    vec![
                        Cell::int(d),
                        Cell::int(*l),
                        Cell::int(*p as usize),
                        Cell::int(k),
                        Cell::text(ssd.id()),
                        Cell::int(*replicates),
                        Cell::Num(est.value),
                        Cell::Num(est.std_error),
                        exact.as_ref().map_or(Cell::Empty, |x| Cell::text(x.exact_string())),
                        exact.as_ref().map_or(Cell::Empty, |x| Cell::Num(x.value)),
                        z.map_or(Cell::Empty, Cell::Num),
                    ],
                    seed,
                    &replicate_range(*replicates),
                );
                if let Some(z) = z {
                    t.verdict(Verdict::new(
                        format!("nubar moment k={k} within {NUBAR_Z} SE of exact"),
                        z <= NUBAR_Z,
                        format!("z = {z}"),
                    ));
                }
            }
            Ok(t)
        }
        Plan::Martingale { l, f } => {
            let engine = EnumerationEngine::new(Arc::new(enumerate_cube(d, *l)?), &ssd)?;
            let m = martingale_decomposition(&engine, f, &FiltrationPlan::site_order(engine.cube()))?;
            let r = &m.report;
            let bound = match f.as_polynomial() {
                Some(poly) => Some(variance_bound_exact(&engine, poly)?),
                None => None,
            };
            let mut t = Table::new(&[
                "d", "L", "function", "ssd", "configurations", "variance", "sum_of_squares", "identity_error",
                "max_cross_term", "reconstruction_error", "bound_lhs", "bound_rhs_walk", "bound_rhs_enumeration",
                "bound_rhs_exact", "bound_margin",
            ]);
            let opt = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
            t.push(
                vec![
                    Cell::int(d),
                    Cell::int(*l),
                    Cell::text(f.label()),
                    Cell::text(ssd.id()),
                    Cell::int(engine.configurations()),
                    Cell::Num(r.variance),
                    Cell::Num(r.sum_of_squares),
                    Cell::Num(r.identity_error),
                    Cell::Num(r.max_cross_term),
                    Cell::Num(r.reconstruction_error),
                    opt(bound.as_ref().map(|b| b.lhs)),
                    opt(bound.as_ref().map(|b| b.rhs_walk)),
                    opt(bound.as_ref().map(|b| b.rhs_enumeration)),
                    bound.as_ref().and_then(|b| b.rhs_exact.clone()).map_or(Cell::Empty, Cell::Text),
                    opt(bound.as_ref().map(|b| b.margin)),
                ],
                seed,
                "exact",
            );
            t.verdict(Verdict::new(
                "martingale identity",
                r.passes(EXACT_TOL),
                format!(
                    "identity error {}, max cross term {}, reconstruction error {}",
                    r.identity_error, r.max_cross_term, r.reconstruction_error
                ),
            ));
            if let Some(b) = bound {
                t.verdict(Verdict::new(
                    "exact variance bound",
                    b.margin >= -EXACT_TOL,
                    format!("lhs {} ≤ rhs {} (margin {})", b.lhs, b.rhs_walk, b.margin),
                ));
                let gap = (b.rhs_walk - b.rhs_enumeration).abs() / b.rhs_walk.abs().max(f64::MIN_POSITIVE);
                t.verdict(Verdict::new(
                    "variance bound routes agree",
                    gap <= 1e-9,
                    format!("walk {} vs enumeration {}", b.rhs_walk, b.rhs_enumeration),
                ));
            }
            Ok(t)
        }
        Plan::Directional { l, poly } => {
            let engine = EnumerationEngine::new(Arc::new(enumerate_cube(d, *l)?), &ssd)?;
            let (_, r) = directional_decomposition(&engine, poly, &FiltrationPlan::directional(d))?;
            let last = *r.second_moments.last().expect("at least one direction");
            let mut t = Table::new(&[
                "d", "L", "function", "ssd", "degree", "slab_count", "variance", "slab_second_moment", "margin",
            ]);
            t.push(
                vec![
                    Cell::int(d),
                    Cell::int(*l),
                    Cell::text(format!("poly[{poly}]")),
                    Cell::text(ssd.id()),
                    Cell::int(r.degree),
                    Cell::Int(r.slab_count),
                    Cell::Num(r.variance),
                    Cell::Num(last),
                    Cell::Num(r.margin),
                ],
                seed,
                "exact",
            );
            t.verdict(Verdict::new(
                "directional lower bound",
                r.passes(EXACT_TOL),
                format!("Var {} ≥ {}^{d}·{} (margin {})", r.variance, r.slab_count, last, r.margin),
            ));
            Ok(t)
        }
        Plan::HfCheck { grid, f, instances, step } => hf_check(d, &ssd, seed, grid, f, *instances, *step),
        Plan::Ids { grid, k_grid } => {
            let mut t = Table::new(&["d", "k", "L", "ssd", "value", "oracle", "oracle_exact", "distance"]);
            for &k in k_grid {
                let conv = ids_moment_convergence(d, &ssd, k, grid, seed)?;
                for row in &conv.rows {
                    t.push(
                        vec![
                            Cell::int(d),
                            Cell::int(k),
                            Cell::int(row.half_side),
                            Cell::text(ssd.id()),
                            Cell::Num(row.value),
                            Cell::Num(conv.oracle.value),
                            Cell::text(conv.oracle.exact_string()),
                            Cell::Num(row.distance),
                        ],
                        seed,
                        "0..1",
                    );
                }
            }
            Ok(t)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn clt(
    d: usize,
    ssd: &SsdSpec,
    seed: u64,
    grid: &[usize],
    f: &TestFunction,
    replicates: usize,
    interval: (f64, f64),
    norm_replicates: Option<usize>,
) -> Result<Table> {
    let mut t = Table::new(&[
        "d", "L", "function", "ssd", "R", "sigma2_hat", "std_error", "bound_rhs", "bound_rhs_se", "skewness",
        "excess_kurtosis", "ks_statistic", "ks_scaled", "degenerate", "positivity",
    ]);
    let opt = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
    for &l in grid {
        let s = sample_x(d, l, ssd, f, replicates, seed)?;
        let mut report = normality_test(&s)?;
        let pos = positivity_check(&s, f, interval)?;
        if let Some(nr) = norm_replicates {
            let fp = f.derivative();
            let est = fprime_norm_estimate(&|x: f64| fp(x), &f.label(), d, l, ssd, nr, seed)?;
            let (with_bound, check) = variance_bound_check(&s, &est)?;
            report.bound_rhs = with_bound.bound_rhs;
            report.bound_rhs_se = with_bound.bound_rhs_se;
            t.verdict(Verdict::new(
                format!("variance bound L={l}"),
                check.passes,
                format!("σ̂² = {} vs 8‖f′‖² = {} (combined SE {})", check.lhs, check.rhs, check.combined_se),
            ));
        }
        t.push(
            vec![
                Cell::int(d),
                Cell::int(l),
                Cell::text(f.label()),
                Cell::text(ssd.id()),
                Cell::int(replicates),
                Cell::Num(report.sigma2_hat),
                Cell::Num(report.std_error),
                opt(report.bound_rhs),
                opt(report.bound_rhs_se),
                opt(report.skewness),
                opt(report.excess_kurtosis),
                opt(report.ks_statistic),
                opt(report.ks_scaled()),
                Cell::Bool(report.degenerate),
                Cell::text(positivity_name(pos.verdict)),
            ],
            seed,
            &replicate_range(replicates),
        );
        if let Some(ok) = report.normality_passes() {
            t.verdict(Verdict::new(
                format!("normality L={l}"),
                ok,
                format!(
                    "skewness {:?}, excess kurtosis {:?}, KS·√R {:?}",
                    report.skewness,
                    report.excess_kurtosis,
                    report.ks_scaled()
                ),
            ));
        }
        if pos.monotone {
            t.verdict(Verdict::new(
                format!("positivity L={l}"),
                pos.verdict == PositivityVerdict::Positive,
                format!("σ̂² = {} with SE {}", pos.sigma2_hat, pos.std_error),
            ));
        }
    }
    Ok(t)
}

fn positivity_name(v: PositivityVerdict) -> &'static str {
    match v {
        PositivityVerdict::Positive => "positive",
        PositivityVerdict::Inconclusive => "inconclusive",
        PositivityVerdict::ZeroVariance => "zero-variance",
    }
}

fn hf_check(
    d: usize,
    ssd: &SsdSpec,
    seed: u64,
    grid: &[usize],
    f: &TestFunction,
    instances: usize,
    step: f64,
) -> Result<Table> {
    let results = try_ordered_map(instances, |i| {
        let [a, b] = CounterStream::new(seed, 0, Purpose::Synthetic).uniforms(i as u64);
        let l = grid[((a * grid.len() as f64) as usize).min(grid.len() - 1)];
        let cube = Arc::new(enumerate_cube(d, l)?);
        let field = sample_disorder(ssd, cube.clone(), seed, i as u64)?;
        let h = assemble_hamiltonian(&cube, &field)?;
        let site = ((b * cube.len() as f64) as usize).min(cube.len() - 1);
        let r = hellmann_feynman_check(&h, f, site, step).map_err(|e| e.in_replicate(i as u64))?;
        Ok((l, site, r))
    })?;
    let mut t = Table::new(&[
        "d", "instance", "L", "site", "function", "ssd", "formula", "finite_diff", "abs_err", "tolerance", "degenerate",
    ]);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for (i, (l, site, r)) in results.iter().enumerate() {
        let tol = HF_TOL * (1.0 + r.formula.abs());
        failures += usize::from(r.abs_err > tol);
        worst = worst.max(r.abs_err / (1.0 + r.formula.abs()));
        t.push(
            vec![
                Cell::int(d),
                Cell::int(i),
                Cell::int(*l),
                Cell::int(*site),
                Cell::text(f.label()),
                Cell::text(ssd.id()),
                Cell::Num(r.formula),
                Cell::Num(r.finite_diff),
                Cell::Num(r.abs_err),
                Cell::Num(tol),
                Cell::Bool(r.degenerate),
            ],
            seed,
            &format!("{i}..{}", i + 1),
        );
    }
    t.verdict(Verdict::new(
        "trace derivative formula",
        failures == 0,
        format!("{failures} of {instances} instances outside tolerance; worst scaled error {worst}"),
    ));
    Ok(t)
}
