//! Scenario drivers: the space-homogeneous relaxation and the supersonic
//! flow over a thin plate, with CSV output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::closure::{
    cubic_closure, fefp_closure, matched_row_residuals, production_terms, stabilization_coefficient, ClosureParams,
    SolveOptions, Vector9, MIN_PARTICLES,
};
use crate::config::{ConfigError, InitialCondition, ModelKind, Scenario, SimulationConfig};
use crate::diagnostics::{gaussian_entropy_fisher, shock_metrics, ShockMetrics, SteadyAccumulator};
use crate::domain::{
    bin_particles, inject_inflow, move_and_apply_boundaries, BoundarySpec, Edge, EdgeCondition, FreeStream, Grid2D,
    Particles, Plate,
};
use crate::gas::{sample_maxwellian, transport_scales, GasModel};
use crate::integrator::{advance_cell_velocities, CellClosure};
use crate::poly::{divergence, estimate_central_moments, identity_field, MomentSet};
use crate::rng::{stream_rng, Purpose};

pub const HOMOGENEOUS_HEADER: &str = "t,sxx,sxy,sxz,syy,syz,szz,qx,qy,qz,H,I,res_moment,res_entropy";
pub const FIELD_HEADER: &str = "x1,x2,rho,ux,uy,T,Ma,n_samples";

/// Steps between per-cell conservation checks in the plate run.
pub const CONSERVATION_CHECK_EVERY: u64 = 100;

/// A cell whose `m4 / (15 rho theta^2)` exceeds this (1 for a Maxwellian) has
/// lost its velocity distribution to a few runaway particles.
pub const RUNAWAY_KURTOSIS: f64 = 10.0;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("numerical blow-up at step {step} in cell {cell}:\n{dump}")]
    Blowup { step: u64, cell: usize, dump: String },
}

impl RunError {
    /// Process exit code: 2 for configuration errors, 3 for blow-up.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io(_) => 1,
            RunError::Blowup { .. } => 3,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `output_dir` from the config.
    pub output_dir: Option<PathBuf>,
    pub emit_plots: bool,
    /// Skip all file output (for tests and examples that only need the result).
    pub no_output: bool,
}

fn closure_params(cfg: &SimulationConfig, theta_ref: f64) -> ClosureParams {
    ClosureParams {
        eps0: cfg.closure.eps0,
        theta_ref,
        solve: SolveOptions { eta: cfg.closure.schur_regularization },
    }
}

/// Drift for one cell from its moments. Returns `None` when the cell has no
/// usable temperature; falls back to the linear drift (second field `true`)
/// for small or ill-conditioned cells.
pub fn cell_closure(
    kind: ModelKind,
    m: &MomentSet,
    gas: &GasModel,
    params: &ClosureParams,
) -> Option<(CellClosure, bool)> {
    let theta = m.theta();
    let ts = transport_scales(theta, m.rho(), gas).ok()?;
    let linear = CellClosure::Linear { tau: ts.tau, theta };
    if m.sample_count() != 0 && m.sample_count() < MIN_PARTICLES {
        return Some((linear, kind != ModelKind::Linear));
    }
    let solved = match kind {
        ModelKind::Linear => return Some((linear, false)),
        ModelKind::Fefp => fefp_closure(m, gas, params).map(|(c, _)| CellClosure::Fefp(c)),
        ModelKind::Cubic => stabilization_coefficient(m, params.eps0, params.theta_ref).and_then(|c_d| {
            let p = production_terms(m, gas)?;
            cubic_closure(m, ts.tau, &p, -6.0 * c_d).map(CellClosure::Cubic)
        }),
    };
    Some(solved.map_or((linear, true), |c| (c, false)))
}

/// Relative residuals of the matched rows and of the entropy constraint.
pub fn closure_residuals(closure: &CellClosure, m: &MomentSet, productions: &Vector9) -> (f64, f64) {
    let drift = closure.polynomial();
    let tau = closure.tau();
    let theta = closure.theta();
    let diffusion = theta / tau;
    let rho = m.rho();
    let res_moment = matched_row_residuals(&drift, diffusion, m, productions)
        .map(|r| {
            (0..9)
                .map(|k| r[k].abs() / (rho * theta.powf(if k < 6 { 1.0 } else { 1.5 }) / tau))
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::NAN);
    let v = identity_field();
    let shifted: [_; 3] = std::array::from_fn(|i| drift[i].clone() + v[i].scale(1.0 / tau));
    let res_entropy = m.expectation(&divergence(&shifted)).map(|e| e.abs() / (3.0 * rho / tau)).unwrap_or(f64::NAN);
    (res_moment, res_entropy)
}

// ---------------------------------------------------------------- homogeneous

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousRow {
    pub t: f64,
    /// `sxx, sxy, sxz, syy, syz, szz`.
    pub stress: [f64; 6],
    pub q: [f64; 3],
    pub h: f64,
    pub fisher: f64,
    pub res_moment: f64,
    pub res_entropy: f64,
}

#[derive(Clone, Debug)]
pub struct HomogeneousResult {
    pub rows: Vec<HomogeneousRow>,
    /// Physical time step.
    pub dt: f64,
    /// Relaxation time of the initial state.
    pub tau: f64,
    pub theta: f64,
    pub fallback_steps: u64,
    pub final_velocities: Vec<[f64; 3]>,
}

/// Homogeneous units: `rho = theta = 1`, `mu0 = 1`, so `tau_ref = 2`.
pub const HOMOGENEOUS_TAU_REF: f64 = 2.0;

/// Initial velocities of the homogeneous run.
pub fn homogeneous_initial<R: Rng + ?Sized>(init: &InitialCondition, n: usize, rng: &mut R) -> Vec<[f64; 3]> {
    match *init {
        InitialCondition::Anisotropic { lambda } => {
            let sd = lambda.map(f64::sqrt);
            (0..n).map(|_| std::array::from_fn(|i| sd[i] * rng.sample::<f64, _>(StandardNormal))).collect()
        }
        InitialCondition::BiGaussian { heat_flux } => {
            let (w, a, b, s) = bi_gaussian_parameters(heat_flux);
            (0..n)
                .map(|_| {
                    let mean = if rng.random::<f64>() < w { a } else { b };
                    let z: [f64; 3] = std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal));
                    [mean + s * z[0], z[1], z[2]]
                })
                .collect()
        }
    }
}

/// Weight, the two means along `v_1`, and the shared standard deviation of a
/// bi-Gaussian with zero mean, unit covariance and heat flux `q` along `v_1`.
pub fn bi_gaussian_parameters(q: f64) -> (f64, f64, f64, f64) {
    let w = 0.25;
    let a = (2.0 * q * (1.0 - w) * (1.0 - w) / (w * (1.0 - 2.0 * w))).cbrt();
    let b = -w * a / (1.0 - w);
    let s2 = 1.0 - w * a * a - (1.0 - w) * b * b;
    (w, a, b, s2.sqrt())
}

fn homogeneous_row(t: f64, m: &MomentSet, closure: &CellClosure, productions: &Vector9) -> HomogeneousRow {
    let s = m.stress();
    let q = m.heat_flux();
    let (h, fisher) = gaussian_entropy_fisher(&(m.pressure_tensor() / m.rho()), m.theta())
        .map(|r| (r.h, r.fisher))
        .unwrap_or((f64::NAN, f64::NAN));
    let (res_moment, res_entropy) = closure_residuals(closure, m, productions);
    HomogeneousRow {
        t,
        stress: [s[(0, 0)], s[(0, 1)], s[(0, 2)], s[(1, 1)], s[(1, 2)], s[(2, 2)]],
        q: [q[0], q[1], q[2]],
        h,
        fisher,
        res_moment,
        res_entropy,
    }
}

/// Space-homogeneous relaxation of a single cell.
pub fn run_homogeneous(cfg: &SimulationConfig, opts: &RunOptions) -> Result<HomogeneousResult, RunError> {
    let init = cfg
        .homogeneous
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("missing [homogeneous] section".into()))?
        .initial;
    let gas = GasModel::nondimensional(1.0, 1.0, cfg.interaction);
    let params = closure_params(cfg, 1.0);
    let dt = cfg.dt * HOMOGENEOUS_TAU_REF;
    let mut rng = stream_rng(cfg.seed, 0, Purpose::Init, 0);
    let mut vel = homogeneous_initial(&init, cfg.n_particles, &mut rng);

    let total = cfg.total_steps();
    let mut rows = Vec::new();
    let mut fallback_steps = 0;
    let (mut tau0, mut theta0) = (f64::NAN, f64::NAN);
    for k in 0..=total {
        let m = estimate_central_moments(&vel, 1.0, 8).expect("homogeneous cell has many particles");
        let productions = production_terms(&m, &gas).unwrap_or_else(|_| Vector9::zeros());
        let Some((closure, fell_back)) = cell_closure(cfg.model, &m, &gas, &params) else {
            return Err(RunError::Blowup { step: k, cell: 0, dump: describe_cell(&m, None) });
        };
        if k == 0 {
            tau0 = closure.tau();
            theta0 = closure.theta();
        }
        fallback_steps += fell_back as u64;
        if k % cfg.output_every == 0 || k == total {
            let row = homogeneous_row(k as f64 * dt, &m, &closure, &productions);
            if k % (cfg.output_every * 50) == 0 {
                info!("step {k}: sxx = {:.5}, qx = {:.5}, H = {:.6}", row.stress[0], row.q[0], row.h);
            }
            rows.push(row);
        }
        if k == total {
            break;
        }
        let mut rng = stream_rng(cfg.seed, k, Purpose::Velocity, 0);
        advance_cell_velocities(&mut vel, &closure, dt, |_| std::array::from_fn(|_| rng.sample(StandardNormal)));
        if vel.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
            return Err(RunError::Blowup { step: k, cell: 0, dump: describe_cell(&m, Some(&closure)) });
        }
    }
    if fallback_steps > 0 {
        warn!("{fallback_steps} steps used the linear fallback drift");
    }
    let result = HomogeneousResult { rows, dt, tau: tau0, theta: theta0, fallback_steps, final_velocities: vel };
    if !opts.no_output {
        let dir = output_dir(cfg, opts)?;
        write_homogeneous_csv(&dir.join("timeseries.csv"), &result.rows)?;
        if opts.emit_plots {
            std::fs::write(dir.join("plot.py"), HOMOGENEOUS_PLOT)?;
        }
        info!("wrote {}", dir.join("timeseries.csv").display());
    }
    Ok(result)
}

pub fn write_homogeneous_csv(path: &Path, rows: &[HomogeneousRow]) -> std::io::Result<()> {
    let mut out = String::from(HOMOGENEOUS_HEADER);
    out.push('\n');
    for r in rows {
        let vals = std::iter::once(r.t)
            .chain(r.stress)
            .chain(r.q)
            .chain([r.h, r.fisher, r.res_moment, r.res_entropy]);
        let line: Vec<String> = vals.map(|v| format!("{v:.10e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
}

fn describe_cell(m: &MomentSet, closure: Option<&CellClosure>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "particles = {}", m.sample_count());
    let _ = writeln!(s, "rho = {:e}, theta = {:e}, mean = {:?}", m.rho(), m.theta(), m.mean());
    let _ = writeln!(s, "pressure tensor = {:?}", m.pressure_tensor().as_slice());
    let _ = writeln!(s, "heat flux = {:?}", m.heat_flux().as_slice());
    let _ = writeln!(s, "m4 = {:e}", m.m4());
    if let Some(c) = closure {
        let _ = writeln!(s, "closure = {c:?}");
    }
    s
}

fn output_dir(cfg: &SimulationConfig, opts: &RunOptions) -> std::io::Result<PathBuf> {
    let dir = opts.output_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

// ---------------------------------------------------------------- plate flow

/// Derived quantities of the plate problem, nondimensional with
/// `n_inf = m = k_B = 1`, `theta_inf = 1/2` and `tau_ref = 2 mu0 / p0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShockSetup {
    pub grid: Grid2D,
    pub spec: BoundarySpec,
    pub free_stream: FreeStream,
    pub gas: GasModel,
    pub theta_ref: f64,
    pub tau_ref: f64,
    /// Hard-sphere mean free path of the free stream.
    pub lambda: f64,
    pub l_ref: f64,
    pub dt: f64,
    pub u_inf: f64,
    pub weight: f64,
    pub slice_row: usize,
}

pub fn shock_setup(cfg: &SimulationConfig) -> Result<ShockSetup, ConfigError> {
    if cfg.scenario != Scenario::ShockPlate {
        return Err(ConfigError::Invalid("not a shock_plate config".into()));
    }
    let (Some(g), Some(d), Some(f)) = (cfg.grid, cfg.domain, cfg.flow) else {
        return Err(ConfigError::Invalid("missing [grid], [domain] or [flow]".into()));
    };
    let n0 = 1.0;
    let theta_ref = 0.5;
    let tau_ref = 1.0;
    let mu0 = tau_ref * n0 * theta_ref / 2.0;
    let gas = GasModel::nondimensional(mu0, theta_ref, cfg.interaction);
    let lambda = 16.0 * mu0 / (5.0 * n0 * (2.0 * std::f64::consts::PI * theta_ref).sqrt());
    let l_ref = 2.0 * lambda / f.knudsen;
    let grid = Grid2D::new(g.nx, g.ny, d.lx * l_ref, d.ly * l_ref);
    let u_inf = f.mach * (5.0 * theta_ref / 3.0).sqrt();
    let fs = FreeStream { n: n0, u: [u_inf, 0.0, 0.0], theta: theta_ref };
    let plate = d.plate.then_some(Plate { x1: 0.5 * grid.lx, x2_min: 0.0, x2_max: l_ref, theta_w: theta_ref });
    let spec = BoundarySpec {
        left: EdgeCondition::Inflow(fs),
        right: EdgeCondition::Outflow,
        bottom: EdgeCondition::Specular,
        top: EdgeCondition::Inflow(fs),
        plate,
    };
    let slice_row = ((d.slice_x2 * l_ref / grid.dy()).floor() as usize).min(g.ny - 1);
    Ok(ShockSetup {
        grid,
        spec,
        free_stream: fs,
        gas,
        theta_ref,
        tau_ref,
        lambda,
        l_ref,
        dt: cfg.dt * tau_ref,
        u_inf,
        weight: n0 * grid.lx * grid.ly / cfg.n_particles as f64,
        slice_row,
    })
}

/// One row of the averaged field, normalized by the free stream:
/// positions by `L_ref`, density by `n_inf`, velocity by `c_ref = sqrt(2 theta_inf)`,
/// temperature by `theta_inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldRow {
    pub x1: f64,
    pub x2: f64,
    pub rho: f64,
    pub ux: f64,
    pub uy: f64,
    pub t: f64,
    pub ma: f64,
    pub n_samples: u64,
}

#[derive(Clone, Debug)]
pub struct ShockResult {
    pub setup: ShockSetup,
    /// Cells in `i + nx j` order.
    pub field: Vec<FieldRow>,
    pub slice: Vec<FieldRow>,
    pub metrics: Option<ShockMetrics>,
    /// Largest per-cell relative momentum change over the checked steps.
    pub momentum_error: f64,
    /// Largest per-cell relative fluctuation-energy change over the checked steps.
    pub energy_error: f64,
    pub checked_steps: u64,
    pub final_particles: usize,
    /// Fraction of closure evaluations that used the linear fallback.
    pub fallback_fraction: f64,
    /// Fraction of closure evaluations on cells above [`RUNAWAY_KURTOSIS`].
    pub runaway_fraction: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct CellSums {
    n: u64,
    v: [f64; 3],
    v2: [f64; 3],
}

struct CellPlan {
    closure: Option<CellClosure>,
    fallback: bool,
    runaway: bool,
    sums: CellSums,
}

/// Supersonic flow over the plate: the full time loop with steady averaging.
pub fn run_shock(cfg: &SimulationConfig, opts: &RunOptions) -> Result<ShockResult, RunError> {
    let setup = shock_setup(cfg)?;
    let ShockSetup { grid, spec, free_stream: fs, gas, dt, weight, .. } = setup;
    info!(
        "plate flow: {}x{} cells, {} particles, dt = {:e}, steps = {} + {}, L_ref = {:.4}, U_inf = {:.4}",
        grid.nx, grid.ny, cfg.n_particles, dt, cfg.steps_transient, cfg.steps_average, setup.l_ref, setup.u_inf
    );
    let params = closure_params(cfg, setup.theta_ref);
    let n_cells = grid.n_cells();
    let cell_area = grid.cell_area();

    let mut p = Particles::new();
    let mut rng = stream_rng(cfg.seed, 0, Purpose::Init, 0);
    let vels = sample_maxwellian(fs.u, fs.theta, cfg.n_particles, &mut rng).expect("valid free stream");
    for v in vels {
        p.push([rng.random::<f64>() * grid.lx, rng.random::<f64>() * grid.ly], v);
    }

    let mut totals = vec![CellSums::default(); n_cells];
    let mut density = SteadyAccumulator::new(n_cells);
    let (mut momentum_error, mut energy_error, mut checked_steps) = (0.0f64, 0.0f64, 0);
    let (mut fallbacks, mut runaways, mut evaluations) = (0u64, 0u64, 0u64);
    let inflow: Vec<(Edge, FreeStream)> = [
        (Edge::Left, spec.left),
        (Edge::Right, spec.right),
        (Edge::Bottom, spec.bottom),
        (Edge::Top, spec.top),
    ]
    .into_iter()
    .filter_map(|(e, c)| if let EdgeCondition::Inflow(f) = c { Some((e, f)) } else { None })
    .collect();

    for step in 0..cfg.total_steps() {
        move_and_apply_boundaries(&mut p, &grid, &spec, dt, cfg.seed, step);
        for (edge, f) in &inflow {
            inject_inflow(&mut p, &grid, *edge, f, dt, weight, cfg.seed, step);
        }
        let index = bin_particles(&mut p, &grid).expect("boundaries keep particles inside");

        let plans: Vec<CellPlan> = (0..n_cells)
            .into_par_iter()
            .map(|c| {
                let vel = &p.vel[index.range(c)];
                let sums = cell_sums(vel);
                if vel.len() < 2 {
                    return CellPlan { closure: None, fallback: false, runaway: false, sums };
                }
                let rho = vel.len() as f64 * weight / cell_area;
                let m = estimate_central_moments(vel, rho, 8).expect("two or more particles");
                let runaway = m.m4() > RUNAWAY_KURTOSIS * 15.0 * m.rho() * m.theta().powi(2);
                match cell_closure(cfg.model, &m, &gas, &params) {
                    Some((c, fallback)) => CellPlan { closure: Some(c), fallback, runaway, sums },
                    None => CellPlan { closure: None, fallback: true, runaway, sums },
                }
            })
            .collect();

        if step >= cfg.steps_transient {
            let mut rho = vec![0.0; n_cells];
            for (c, plan) in plans.iter().enumerate() {
                let t = &mut totals[c];
                t.n += plan.sums.n;
                for i in 0..3 {
                    t.v[i] += plan.sums.v[i];
                    t.v2[i] += plan.sums.v2[i];
                }
                rho[c] = plan.sums.n as f64 * weight / cell_area;
            }
            density.push(&rho);
        }
        for plan in &plans {
            if plan.closure.is_some() {
                evaluations += 1;
                fallbacks += plan.fallback as u64;
                runaways += plan.runaway as u64;
            }
        }

        let check = step % CONSERVATION_CHECK_EVERY == 0;
        let mut slices: Vec<&mut [[f64; 3]]> = Vec::with_capacity(n_cells);
        let mut rest: &mut [[f64; 3]] = &mut p.vel;
        for c in 0..n_cells {
            let (head, tail) = rest.split_at_mut(index.count(c));
            slices.push(head);
            rest = tail;
        }
        let errors: Vec<Result<(f64, f64), usize>> = slices
            .into_par_iter()
            .zip(plans.par_iter())
            .enumerate()
            .map(|(c, (vel, plan))| {
                let Some(closure) = &plan.closure else { return Ok((0.0, 0.0)) };
                let before = check.then(|| momentum_energy(vel));
                let mut rng = stream_rng(cfg.seed, step, Purpose::Velocity, c as u64);
                advance_cell_velocities(vel, closure, dt, |_| std::array::from_fn(|_| rng.sample(StandardNormal)));
                if vel.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
                    return Err(c);
                }
                Ok(before.map_or((0.0, 0.0), |b| conservation_error(&b, &momentum_energy(vel))))
            })
            .collect();
        for e in errors {
            match e {
                Ok((dm, de)) => {
                    momentum_error = momentum_error.max(dm);
                    energy_error = energy_error.max(de);
                }
                Err(cell) => {
                    let vel = &p.vel[index.range(cell)];
                    let mut dump = format!("cell {cell} at {:?}\n", grid.center(cell));
                    let _ = writeln!(dump, "closure = {:?}", plans[cell].closure);
                    let _ = writeln!(dump, "velocities (first 10) = {:?}", &vel[..vel.len().min(10)]);
                    if let Some(dir) = (!opts.no_output).then(|| output_dir(cfg, opts)).transpose()? {
                        std::fs::write(dir.join("blowup_cell.txt"), &dump)?;
                    }
                    return Err(RunError::Blowup { step, cell, dump });
                }
            }
        }
        if check {
            checked_steps += 1;
        }
        if (step + 1) % cfg.output_every == 0 {
            info!("step {}: {} particles, fallback fraction {:.4}", step + 1, p.len(), fallbacks as f64 / evaluations.max(1) as f64);
        }
    }

    let samples = cfg.steps_average.max(1) as f64;
    let c_ref = (2.0 * fs.theta).sqrt();
    let field: Vec<FieldRow> = (0..n_cells)
        .map(|c| {
            let t = &totals[c];
            let x = grid.center(c);
            let n = t.n as f64;
            let u: [f64; 3] = std::array::from_fn(|i| t.v[i] / n);
            let theta = ((0..3).map(|i| t.v2[i] / n - u[i] * u[i]).sum::<f64>() / 3.0).max(0.0);
            let speed = (u[0] * u[0] + u[1] * u[1]).sqrt();
            let undefined = t.n < 2;
            let nan_if = |v: f64| if undefined { f64::NAN } else { v };
            FieldRow {
                x1: x[0] / setup.l_ref,
                x2: x[1] / setup.l_ref,
                rho: t.n as f64 * weight / cell_area / samples / fs.n,
                ux: nan_if(u[0] / c_ref),
                uy: nan_if(u[1] / c_ref),
                t: nan_if(theta / fs.theta),
                ma: nan_if(speed / (5.0 * theta / 3.0).sqrt()),
                n_samples: t.n,
            }
        })
        .collect();
    let slice: Vec<FieldRow> = field[setup.slice_row * grid.nx..(setup.slice_row + 1) * grid.nx].to_vec();
    // a row that crosses the plate ends there; the wake is not part of the shock
    let row_x2 = grid.center(setup.slice_row * grid.nx)[1];
    let x_end = match setup.spec.plate {
        Some(pl) if (pl.x2_min..=pl.x2_max).contains(&row_x2) => pl.x1 / setup.l_ref,
        _ => f64::INFINITY,
    };
    let (xs, ts): (Vec<f64>, Vec<f64>) =
        slice.iter().filter(|r| r.t.is_finite() && r.x1 < x_end).map(|r| (r.x1, r.t)).unzip();
    let metrics = shock_metrics(&xs, &ts).ok();
    let result = ShockResult {
        setup,
        field,
        slice,
        metrics,
        momentum_error,
        energy_error,
        checked_steps,
        final_particles: p.len(),
        fallback_fraction: fallbacks as f64 / evaluations.max(1) as f64,
        runaway_fraction: runaways as f64 / evaluations.max(1) as f64,
    };
    if result.runaway_fraction > 1e-3 {
        warn!(
            "{:.2}% of cell updates had m4 above {RUNAWAY_KURTOSIS} times its Maxwellian value; \
             the drift is unstable at this time step",
            100.0 * result.runaway_fraction
        );
    }
    if !opts.no_output {
        let dir = output_dir(cfg, opts)?;
        write_field_csv(&dir.join("field.csv"), &result.field)?;
        write_field_csv(&dir.join("slice.csv"), &result.slice)?;
        std::fs::write(dir.join("summary.txt"), shock_summary(cfg, &result, &density))?;
        if opts.emit_plots {
            std::fs::write(dir.join("plot.py"), SHOCK_PLOT)?;
        }
        info!("wrote {}", dir.display());
    }
    Ok(result)
}

fn cell_sums(vel: &[[f64; 3]]) -> CellSums {
    let mut s = CellSums { n: vel.len() as u64, ..Default::default() };
    for v in vel {
        for i in 0..3 {
            s.v[i] += v[i];
            s.v2[i] += v[i] * v[i];
        }
    }
    s
}

/// Momentum, sum of `|v_i|` (scale for the momentum check) and fluctuation energy.
fn momentum_energy(vel: &[[f64; 3]]) -> (Vector3<f64>, f64, f64) {
    let n = vel.len() as f64;
    let mut m = Vector3::zeros();
    let mut scale = 0.0;
    for v in vel {
        for i in 0..3 {
            m[i] += v[i];
            scale += v[i].abs();
        }
    }
    let u = m / n;
    let e: f64 = vel.iter().map(|v| (0..3).map(|i| (v[i] - u[i]).powi(2)).sum::<f64>()).sum();
    (m, scale, e)
}

fn conservation_error(before: &(Vector3<f64>, f64, f64), after: &(Vector3<f64>, f64, f64)) -> (f64, f64) {
    let dm = (before.0 - after.0).amax() / before.1.max(f64::MIN_POSITIVE);
    let de = if before.2 > 0.0 { (before.2 - after.2).abs() / before.2 } else { 0.0 };
    (dm, de)
}

pub fn write_field_csv(path: &Path, rows: &[FieldRow]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{FIELD_HEADER}")?;
    for r in rows {
        writeln!(
            f,
            "{:.6},{:.6},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{}",
            r.x1, r.x2, r.rho, r.ux, r.uy, r.t, r.ma, r.n_samples
        )?;
    }
    f.flush()
}

fn shock_summary(cfg: &SimulationConfig, r: &ShockResult, density: &SteadyAccumulator) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model = {:?}", cfg.model);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let _ = writeln!(s, "grid = {} x {}", r.setup.grid.nx, r.setup.grid.ny);
    let _ = writeln!(s, "l_ref = {}", r.setup.l_ref);
    let _ = writeln!(s, "mean_free_path = {}", r.setup.lambda);
    let _ = writeln!(s, "u_inf = {}", r.setup.u_inf);
    let _ = writeln!(s, "particle_weight = {}", r.setup.weight);
    let _ = writeln!(s, "final_particles = {}", r.final_particles);
    let _ = writeln!(s, "fallback_fraction = {}", r.fallback_fraction);
    let _ = writeln!(s, "runaway_fraction = {}", r.runaway_fraction);
    let _ = writeln!(s, "momentum_error = {:e}", r.momentum_error);
    let _ = writeln!(s, "energy_error = {:e}", r.energy_error);
    let _ = writeln!(s, "averaged_steps = {}", density.count());
    let se = density.std_error();
    let max_se = se.iter().cloned().fold(0.0, f64::max) / r.setup.free_stream.n;
    let _ = writeln!(s, "max_density_std_error = {max_se:e}");
    match &r.metrics {
        Some(m) => {
            let _ = writeln!(s, "slice_peak_temperature = {}", m.peak_ratio);
            let _ = writeln!(s, "slice_thickness_10_90 = {}", m.thickness);
        }
        None => {
            let _ = writeln!(s, "slice_metrics = undefined");
        }
    }
    s
}

/// Run whichever scenario the config names.
pub enum RunOutcome {
    Homogeneous(HomogeneousResult),
    Shock(Box<ShockResult>),
}

pub fn run(cfg: &SimulationConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    match cfg.scenario {
        Scenario::Homogeneous => run_homogeneous(cfg, opts).map(RunOutcome::Homogeneous),
        Scenario::ShockPlate => run_shock(cfg, opts).map(|r| RunOutcome::Shock(Box::new(r))),
    }
}

const HOMOGENEOUS_PLOT: &str = r#"import pandas as pd
import matplotlib.pyplot as plt

d = pd.read_csv("timeseries.csv")
fig, ax = plt.subplots(1, 3, figsize=(13, 4))
for c in ["sxx", "syy", "szz", "sxy"]:
    ax[0].plot(d.t, d[c], label=c)
ax[0].set_xlabel("t")
ax[0].legend()
for c in ["qx", "qy", "qz"]:
    ax[1].plot(d.t, d[c], label=c)
ax[1].set_xlabel("t")
ax[1].legend()
ax[2].plot(d.t, d.H, label="H")
ax[2].set_xlabel("t")
ax[2].legend()
fig.tight_layout()
fig.savefig("timeseries.png", dpi=150)
"#;

const SHOCK_PLOT: &str = r#"import pandas as pd
import matplotlib.pyplot as plt

f = pd.read_csv("field.csv")
s = pd.read_csv("slice.csv")
nx = f.x1.nunique()
ny = f.x2.nunique()
fig, ax = plt.subplots(1, 2, figsize=(12, 5))
ma = f.Ma.to_numpy().reshape(ny, nx)
im = ax[0].contourf(f.x1.to_numpy().reshape(ny, nx), f.x2.to_numpy().reshape(ny, nx), ma, levels=30)
fig.colorbar(im, ax=ax[0], label="Ma")
ax[0].set_xlabel("x1 / L_ref")
ax[0].set_ylabel("x2 / L_ref")
ax[1].plot(s.x1, s["T"])
ax[1].set_xlabel("x1 / L_ref")
ax[1].set_ylabel("T / T_inf")
fig.tight_layout()
fig.savefig("shock.png", dpi=150)
"#;
