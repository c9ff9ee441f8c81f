use std::path::{Path, PathBuf};
use std::sync::Arc;

use gpvortex::connection::connection_pair;
use gpvortex::dft::{evolve as spectral_evolve, forward, tail_estimate, DistortedBasis};
use gpvortex::dispersion::{boundary_roots, dispersion_poly, roots as interior_roots, SpectralPoint};
use gpvortex::ode_engine::{solve_infinity, solve_origin};
use gpvortex::oracle::{time_step, DiscreteOperator};
use gpvortex::profile::{build_profile, ProfileOptions};
use gpvortex::{FieldPair, FreePotential, Label, Limit, Potential, RadialGrid, VortexProfile, THRESHOLD};
use log::info;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{cache_key, BranchCache};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{self, fmt, Header, Table};
use crate::validate::{run_criterion, shared_profile, suite_ids, CriterionReport};
use crate::{
    ConnectArgs, EvolveArgs, JostArgs, LimitArg, PotentialArgs, ProfileArgs, RootsArgs, TransformArgs, ValidateArgs,
};

pub struct Context {
    pub cfg: RunConfig,
    pub cache_dir: Option<PathBuf>,
}

enum Pot {
    Free(FreePotential),
    Vortex(Arc<VortexProfile>),
}

impl Pot {
    fn get(&self) -> &dyn Potential {
        match self {
            Pot::Free(p) => p,
            Pot::Vortex(p) => p.as_ref(),
        }
    }
}

fn potential(ctx: &Context, args: &PotentialArgs) -> CliResult<Pot> {
    if args.free {
        return Ok(Pot::Free(FreePotential));
    }
    match &args.profile {
        Some(path) => Ok(Pot::Vortex(Arc::new(io::read_profile(path)?))),
        None => Ok(Pot::Vortex(shared_profile(&ctx.cfg.profile)?)),
    }
}

fn limit(l: LimitArg) -> Limit {
    match l {
        LimitArg::Plus => Limit::Plus,
        LimitArg::Minus => Limit::Minus,
    }
}

/// Roots at `λ ± i0` when `im` is zero and `λ` is on the spectrum, else at `λ + i·im`.
fn spectral_point(lambda: f64, im: f64, lim: Limit) -> CliResult<SpectralPoint> {
    if im == 0.0 && lambda.abs() > THRESHOLD {
        Ok(boundary_roots(lambda, lim)?)
    } else {
        Ok(interior_roots(Complex64::new(lambda, im))?)
    }
}

pub fn profile(ctx: &Context, a: ProfileArgs) -> CliResult<()> {
    let mut cfg = ctx.cfg.profile.clone();
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.r_max = a.r_max.unwrap_or(cfg.r_max);
    cfg.nodes = a.nodes.unwrap_or(cfg.nodes);
    if cfg.n == 0 || cfg.r_max.is_nan() || cfg.r_max <= 0.0 || cfg.nodes < 16 {
        return Err(CliError::Usage(format!("bad profile request: n = {}, r_max = {}, nodes = {}", cfg.n, cfg.r_max, cfg.nodes)));
    }
    let grid = RadialGrid::uniform(cfg.r_max / cfg.nodes as f64, cfg.r_max, cfg.nodes)?;
    let p = build_profile(cfg.n, &grid, &ProfileOptions::default())?;
    let res = p.residual(2);
    info!("profile n = {}: alpha = {:.15}, max residual {:.2e} at r = {:.3}", p.n, p.alpha_star, res.max_interior, res.at_radius);
    let mut params = vec![("r_max", fmt(cfg.r_max)), ("nodes", cfg.nodes.to_string())];
    params.extend(io::profile_params(&p));
    let header = Header::new("profile", &ctx.cfg, &params).with("max_residual", fmt(res.max_interior));
    io::save(a.out.as_deref(), &io::csv_bytes(&header, &io::profile_table(&p))?)
}

#[derive(Serialize)]
struct RootRecord {
    lambda: f64,
    im: f64,
    side: String,
    z: Complex64,
    k: [Complex64; 4],
    c: [Complex64; 2],
    delta: Complex64,
    alpha: Complex64,
    /// `max |P(k_j, z)| / (1 + |z|²)`
    residual: f64,
}

pub fn roots(ctx: &Context, a: RootsArgs) -> CliResult<()> {
    let lams: Vec<f64> = match a.lambda_end {
        Some(end) if a.steps >= 2 => (0..a.steps).map(|i| a.lambda + (end - a.lambda) * i as f64 / (a.steps - 1) as f64).collect(),
        Some(_) => return Err(CliError::Usage("a sweep needs --steps of at least 2".into())),
        None => vec![a.lambda],
    };
    let lim = limit(a.limit);
    let records = lams
        .iter()
        .map(|&l| {
            let pt = spectral_point(l, a.im, lim)?;
            let residual = pt.k.iter().fold(0.0f64, |m, k| m.max(dispersion_poly(*k, pt.z).norm())) / (1.0 + pt.z.norm_sqr());
            Ok(RootRecord {
                lambda: l,
                im: a.im,
                side: format!("{:?}", pt.side),
                z: pt.z,
                k: pt.k,
                c: pt.c,
                delta: pt.delta,
                alpha: pt.alpha,
                residual,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let params = [
        ("lambda", fmt(a.lambda)),
        ("lambda_end", a.lambda_end.map_or("none".into(), fmt)),
        ("steps", a.steps.to_string()),
        ("im", fmt(a.im)),
        ("limit", format!("{:?}", a.limit)),
    ];
    let header = Header::new("roots", &ctx.cfg, &params);
    io::save(a.out.as_deref(), &io::jsonl_bytes(&header, &records)?)
}

pub fn jost(ctx: &Context, a: JostArgs) -> CliResult<()> {
    let label = Label::parse(&a.label).ok_or_else(|| CliError::Usage(format!("unknown label `{}`", a.label)))?;
    if matches!(label, Label::Psi3 | Label::Psi4) {
        return Err(CliError::Usage("psi3 and psi4 grow at infinity; use psi1 or psi2 at -λ".into()));
    }
    let pot = potential(ctx, &a.potential)?;
    let grid = RadialGrid::uniform(a.r_min, a.r_max, a.nodes)?;
    let pt = spectral_point(a.lambda, a.im, Limit::Plus)?;
    let opts = ctx.cfg.solve_options();
    let fingerprint = pot.get().fingerprint();
    let solve = || -> CliResult<_> {
        Ok(match label {
            Label::Psi1 | Label::Psi2 => solve_infinity(&pt, label, pot.get(), &grid, &opts)?,
            _ => solve_origin(pt.z, label, pot.get(), &grid, &opts)?,
        })
    };
    let branch = match &ctx.cache_dir {
        Some(dir) => {
            let cache = BranchCache::open(dir)?;
            let key = cache_key(pt.z, label, &fingerprint, &opts, &grid);
            let (b, hit) = cache.get_or_compute(&key, solve)?;
            info!("branch cache {} for {key}", if hit { "hit" } else { "miss" });
            b
        }
        None => solve()?,
    };
    let mut table =
        Table::new(&["r", "phi_re", "phi_im", "psi_re", "psi_im", "dphi_re", "dphi_im", "dpsi_re", "dpsi_im"]);
    for (r, s) in branch.grid.nodes().iter().zip(&branch.states) {
        table.rows.push(vec![*r, s.phi.re, s.phi.im, s.psi.re, s.psi.im, s.dphi.re, s.dphi.im, s.dpsi.re, s.dpsi.im]);
    }
    let params = [
        ("lambda", fmt(a.lambda)),
        ("im", fmt(a.im)),
        ("label", format!("{label:?}")),
        ("r_min", fmt(a.r_min)),
        ("r_max", fmt(a.r_max)),
        ("nodes", a.nodes.to_string()),
        ("potential", fingerprint),
    ];
    let header = Header::new("jost", &ctx.cfg, &params)
        .with("normalization", format!("{} {}", fmt(branch.normalization.re), fmt(branch.normalization.im)))
        .with("cutoff", branch.cutoff.map_or("none".into(), fmt));
    io::save(a.out.as_deref(), &io::csv_bytes(&header, &table)?)
}

#[derive(Serialize)]
struct ConnectRecord {
    lambda: f64,
    d_plus: Complex64,
    d_minus: Complex64,
    kappa: Complex64,
    weight: Complex64,
    mu12: Complex64,
    mu13: Complex64,
    mu23: Complex64,
    max_drift: f64,
    margin: f64,
}

pub fn connect(ctx: &Context, a: ConnectArgs) -> CliResult<()> {
    if !(a.lambda_min > THRESHOLD && a.lambda_max > a.lambda_min) || a.count < 2 {
        return Err(CliError::Usage(format!(
            "need {THRESHOLD} < lambda-min < lambda-max and count >= 2, got [{}, {}] x {}",
            a.lambda_min, a.lambda_max, a.count
        )));
    }
    let pot = potential(ctx, &a.potential)?;
    let opts = ctx.cfg.connection_options();
    let (x0, x1) = (a.lambda_min - THRESHOLD, a.lambda_max - THRESHOLD);
    let lams: Vec<f64> =
        (0..a.count).map(|i| THRESHOLD + x0 * (x1 / x0).powf(i as f64 / (a.count - 1) as f64)).collect();
    let pairs = lams.par_iter().map(|&l| connection_pair(l, pot.get(), &opts)).collect::<Result<Vec<_>, _>>()?;
    let mut records = Vec::with_capacity(2 * lams.len());
    let rec = |d: &gpvortex::ConnectionData| ConnectRecord {
        lambda: d.lambda,
        d_plus: d.d_plus,
        d_minus: d.d_minus,
        kappa: d.kappa,
        weight: d.weight,
        mu12: d.mu.mu12,
        mu13: d.mu.mu13,
        mu23: d.mu.mu23,
        max_drift: d.max_drift,
        margin: d.determinant_margin(),
    };
    for (_, neg) in pairs.iter().rev() {
        records.push(rec(neg));
    }
    for (pos, _) in &pairs {
        records.push(rec(pos));
    }
    let params = [
        ("lambda_min", fmt(a.lambda_min)),
        ("lambda_max", fmt(a.lambda_max)),
        ("count", a.count.to_string()),
        ("potential", pot.get().fingerprint()),
    ];
    let header = Header::new("connect", &ctx.cfg, &params);
    io::save(a.out.as_deref(), &io::jsonl_bytes(&header, &records)?)
}

fn spectral_cfg(ctx: &Context, lambda_max: Option<f64>, lambda_nodes: Option<usize>) -> CliResult<RunConfig> {
    let mut cfg = ctx.cfg.clone();
    cfg.spectral.lambda_max = lambda_max.unwrap_or(cfg.spectral.lambda_max);
    cfg.spectral.lambda_nodes = lambda_nodes.unwrap_or(cfg.spectral.lambda_nodes);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn input_field(path: &Path) -> CliResult<FieldPair> {
    io::read_field(path)
}

pub fn transform(ctx: &Context, a: TransformArgs) -> CliResult<()> {
    let cfg = spectral_cfg(ctx, a.lambda_max, a.lambda_nodes)?;
    let phi = input_field(&a.input)?;
    let pot = potential(ctx, &a.potential)?;
    let basis = DistortedBasis::build(pot.get(), &phi.grid, &cfg.basis_options(0.0))?;
    let coef = forward(&phi, &basis)?;
    let tail = tail_estimate(&coef, &basis);
    let mut table = Table::new(&["lambda", "quad_weight", "weight_re", "weight_im", "coef_re", "coef_im"]);
    for (i, c) in coef.iter().enumerate() {
        let w = basis.weight[i];
        table.rows.push(vec![basis.lambda_grid[i], basis.quad_weights[i], w.re, w.im, c.re, c.im]);
    }
    let params = [("input_sha256", io::file_digest(&a.input)?), ("potential", pot.get().fingerprint())];
    let header = Header::new("transform", &cfg, &params)
        .with("tail_share", fmt(tail))
        .with("max_drift", fmt(basis.max_drift));
    io::save(a.out.as_deref(), &io::csv_bytes(&header, &table)?)?;
    if let Some(path) = &a.theta_out {
        let stride = a.theta_stride.max(1);
        let mut t = Table::new(&["lambda", "r", "abs_theta1", "abs_theta2"]);
        let r = basis.r_grid.nodes();
        for i in (0..basis.len()).step_by(stride) {
            for j in (0..r.len()).step_by(stride) {
                let th = basis.theta[i][j];
                t.rows.push(vec![basis.lambda_grid[i], r[j], th[0].norm(), th[1].norm()]);
            }
        }
        let h = Header::new("transform-theta", &cfg, &[("input_sha256", params[0].1.clone()), ("stride", stride.to_string())]);
        io::write_csv(path, &h, &t)?;
    }
    Ok(())
}

/// Finite-difference operator whose nodes contain every node of the uniform
/// `grid`, with the node map.
fn nested_operator(pot: &dyn Potential, grid: &RadialGrid, h_max: f64) -> CliResult<(DiscreteOperator, usize)> {
    let r = grid.nodes();
    let n = r.len();
    let s = (r[n - 1] - r[0]) / (n - 1) as f64;
    if r.windows(2).any(|w| ((w[1] - w[0]) - s).abs() > 1e-9 * s) {
        return Err(CliError::Usage("--compare-oracle needs a uniform input grid".into()));
    }
    let m = 2usize.max((s / h_max).ceil() as usize).max((s / r[0]).floor() as usize + 1);
    let h = s / m as f64;
    let start = r[0] - h;
    let cells = m * (n - 1) + 2;
    let op = DiscreteOperator::new(pot, start, start + cells as f64 * h, h)?;
    for (k, &x) in r.iter().enumerate() {
        if (op.grid.nodes()[m * k] - x).abs() > 1e-9 * x.max(1.0) {
            return Err(CliError::Failed(format!("oracle grid misses r = {x}")));
        }
    }
    Ok((op, m))
}

pub fn evolve(ctx: &Context, a: EvolveArgs) -> CliResult<()> {
    if a.times.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Usage("times must be finite".into()));
    }
    let cfg = spectral_cfg(ctx, a.lambda_max, a.lambda_nodes)?;
    let phi = input_field(&a.input)?;
    let pot = potential(ctx, &a.potential)?;
    let t_max = a.times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let basis = DistortedBasis::build(pot.get(), &phi.grid, &cfg.basis_options(t_max))?;
    let outs = a.times.iter().map(|&t| spectral_evolve(&phi, t, &basis)).collect::<Result<Vec<_>, _>>()?;
    let mut params = vec![
        ("t", a.times.iter().map(|&t| fmt(t)).collect::<Vec<_>>().join(",")),
        ("input_sha256", io::file_digest(&a.input)?),
        ("potential", pot.get().fingerprint()),
        ("compare_oracle", a.compare_oracle.to_string()),
    ];
    let mut worst = 0.0f64;
    let mut diffs = Vec::new();
    if a.compare_oracle {
        let (op, m) = nested_operator(pot.get(), &phi.grid, cfg.oracle.h)?;
        let fine = FieldPair::from_fn(&op.grid, |r| {
            // Linear interpolation between input nodes.
            let nodes = phi.grid.nodes();
            let k = nodes.partition_point(|&x| x <= r).clamp(1, nodes.len() - 1);
            let w = (r - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
            let w = w.clamp(0.0, 1.0);
            (phi.phi[k - 1] * (1.0 - w) + phi.phi[k] * w, phi.psi[k - 1] * (1.0 - w) + phi.psi[k] * w)
        });
        let norm0 = phi.norm();
        for (&t, out) in a.times.iter().zip(&outs) {
            let u = time_step(&op, &fine, t, cfg.oracle.dt)?;
            let coarse = FieldPair::new(
                phi.grid.clone(),
                (0..phi.grid.len()).map(|k| u.phi[m * k]).collect(),
                (0..phi.grid.len()).map(|k| u.psi[m * k]).collect(),
            )?;
            let d = out.distance(&coarse)? / norm0;
            info!("t = {t}: spectral vs finite-difference relative discrepancy {d:.3e}");
            worst = worst.max(d);
            diffs.push(fmt(d));
        }
        params.push(("oracle_h", fmt(op.h)));
        params.push(("oracle_dt", fmt(cfg.oracle.dt)));
    }
    let mut header = Header::new("evolve", &cfg, &params);
    if a.compare_oracle {
        header = header.with("oracle_discrepancy", diffs.join(","));
    }
    let mut table = Table::new(&["t", "r", "phi_re", "phi_im", "psi_re", "psi_im"]);
    for (&t, out) in a.times.iter().zip(&outs) {
        for (i, &r) in out.grid.nodes().iter().enumerate() {
            table.rows.push(vec![t, r, out.phi[i].re, out.phi[i].im, out.psi[i].re, out.psi[i].im]);
        }
    }
    io::save(a.out.as_deref(), &io::csv_bytes(&header, &table)?)?;
    if worst > cfg.oracle.tolerance {
        return Err(CliError::Failed(format!(
            "spectral and finite-difference evolutions differ by {worst:.2e} > {:.1e}",
            cfg.oracle.tolerance
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidationReport {
    suite: String,
    passed: bool,
    criteria: Vec<CriterionReport>,
}

pub fn validate(ctx: &Context, a: ValidateArgs) -> CliResult<()> {
    let ids = if a.criterion.is_empty() {
        suite_ids(&a.suite).ok_or_else(|| CliError::Usage(format!("unknown suite `{}`", a.suite)))?
    } else {
        a.criterion.clone()
    };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=13).contains(&i)) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let mut reports = Vec::new();
    for id in ids {
        let rep = run_criterion(id, &ctx.cfg);
        println!("{}", rep.line());
        reports.push(rep);
    }
    let passed = reports.iter().all(|r| r.passed);
    let total = reports.len();
    let n_pass = reports.iter().filter(|r| r.passed).count();
    println!("{n_pass}/{total} criteria passed");
    if let Some(path) = &a.report {
        let header = Header::new("validate", &ctx.cfg, &[("suite", a.suite.clone())]);
        let body = ValidationReport { suite: a.suite.clone(), passed, criteria: reports };
        io::save(Some(path), &io::json_bytes(&header, &body)?)?;
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} of {total} criteria failed", total - n_pass)))
    }
}
