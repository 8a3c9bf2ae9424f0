//! Convergence studies, long-time evolutions and the invariant battery
//! behind the `kdv-dg` command line.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::gauss_rule;
use crate::error::{Error, Result};
use crate::field::{coupled_project, l2_project, DgField, StatePair};
use crate::mesh::Mesh;
use crate::operators::{pair_with, Discretization, FluxFunction, MethodVariant, ProblemSpec};
use crate::problems::{make_problem, residual_check, ExampleId};
use crate::special::{elliptic_k, jacobi_cn};
use crate::timestep::{dt_from_cfl, integrate, ssp_rk3_step, StepControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    Random,
}

impl FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(MeshKind::Uniform),
            "random" => Ok(MeshKind::Random),
            other => Err(Error::InvalidArgument(format!(
                "unknown mesh kind {other:?}"
            ))),
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeshKind::Uniform => "uniform",
            MeshKind::Random => "random",
        })
    }
}

/// How random meshes at different refinement levels relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshHierarchy {
    /// Level with `N` cells is drawn independently with seed `seed + N`.
    Independent,
    /// The coarsest level is drawn with `seed`; finer levels bisect it.
    Nested,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub kind: MeshKind,
    pub perturb: f64,
    pub seed: u64,
    pub hierarchy: MeshHierarchy,
}

impl MeshSpec {
    pub fn uniform() -> Self {
        Self {
            kind: MeshKind::Uniform,
            perturb: 0.0,
            seed: 0,
            hierarchy: MeshHierarchy::Independent,
        }
    }

    pub fn random(perturb: f64, seed: u64) -> Self {
        Self {
            kind: MeshKind::Random,
            perturb,
            seed,
            hierarchy: MeshHierarchy::Independent,
        }
    }

    /// Mesh with `cells` cells; `coarsest` is the first level of the study.
    pub fn build(&self, cells: usize, coarsest: usize) -> Result<Mesh> {
        match (self.kind, self.hierarchy) {
            (MeshKind::Uniform, _) => Mesh::uniform(cells),
            (MeshKind::Random, MeshHierarchy::Independent) => {
                Mesh::perturbed(cells, self.perturb, self.seed.wrapping_add(cells as u64))
            }
            (MeshKind::Random, MeshHierarchy::Nested) => {
                if !cells.is_multiple_of(coarsest) || !(cells / coarsest).is_power_of_two() {
                    return Err(Error::InvalidArgument(format!(
                        "nested meshes need N = 2^p * {coarsest}, got {cells}"
                    )));
                }
                let mut mesh = Mesh::perturbed(coarsest, self.perturb, self.seed)?;
                while mesh.cells() < cells {
                    let mut nodes = Vec::with_capacity(2 * mesh.cells() + 1);
                    for w in mesh.nodes().windows(2) {
                        nodes.push(w[0]);
                        nodes.push(0.5 * (w[0] + w[1]));
                    }
                    nodes.push(1.0);
                    mesh = Mesh::from_nodes(nodes)?;
                }
                Ok(mesh)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub example: ExampleId,
    pub method: MethodVariant,
    pub degree: usize,
    pub cells: Vec<usize>,
    pub cfl: f64,
    pub mesh: MeshSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub error_u: f64,
    pub order_u: f64,
    pub error_phi: f64,
    pub order_phi: f64,
    /// Set when the run for this level aborted.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub example: ExampleId,
    pub method: MethodVariant,
    pub degree: usize,
    pub seed: u64,
    pub cfl: f64,
    pub dt0: f64,
    pub t_final: f64,
    pub mesh: MeshSpec,
    pub rows: Vec<ConvergenceRow>,
}

/// `log(e_coarse / e_fine) / log(N_fine / N_coarse)`; 0 for the first level
/// and between two exactly vanishing errors.
pub fn observed_orders(cells: &[usize], errors: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; errors.len()];
    for i in 1..errors.len() {
        if errors[i - 1] == 0.0 && errors[i] == 0.0 {
            continue;
        }
        out[i] = (errors[i - 1] / errors[i]).ln() / (cells[i] as f64 / cells[i - 1] as f64).ln();
    }
    out
}

/// Least-squares slope of `-log e` against `log N`.
pub fn fitted_order(cells: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = cells.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn initial_state(problem: &ProblemSpec, mesh: &Arc<Mesh>, degree: usize) -> StatePair {
    StatePair::from_u(l2_project(|x| (problem.initial)(x), mesh, degree))
}

fn exact_error(problem: &ProblemSpec, u: &DgField, t: f64) -> f64 {
    match &problem.exact {
        Some(exact) => u.l2_error(|x| exact(x, t)),
        None => f64::NAN,
    }
}

/// Runs every level to `T = 10 dt0`, `dt0` being the step on the coarsest mesh.
pub fn run_convergence(config: &ConvergenceConfig) -> Result<ConvergenceReport> {
    let problem = make_problem(config.example);
    run_convergence_for(config, &problem)
}

pub fn run_convergence_for(
    config: &ConvergenceConfig,
    problem: &ProblemSpec,
) -> Result<ConvergenceReport> {
    if config.cells.is_empty() || config.cells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "cell counts must be increasing".into(),
        ));
    }
    let coarsest = config.cells[0];
    let dt0 = dt_from_cfl(config.cfl, &config.mesh.build(coarsest, coarsest)?)?;
    let t_final = 10.0 * dt0;
    let levels: Vec<(f64, f64, Option<String>)> = config
        .cells
        .par_iter()
        .map(|&n| -> Result<(f64, f64, Option<String>)> {
            let mesh = Arc::new(config.mesh.build(n, coarsest)?);
            let disc = Discretization::new(mesh.clone(), config.degree)?;
            let control = StepControl::from_cfl(config.cfl, &mesh, t_final)?;
            let run = integrate(
                initial_state(problem, &mesh, config.degree),
                &control,
                |s| disc.rhs(s, problem, config.method),
                |_, _, _| {},
            );
            Ok(match run {
                Ok(state) => (
                    exact_error(problem, &state.u, t_final),
                    state.phi.l2_norm(),
                    None,
                ),
                Err(e @ Error::NonFinite { .. }) => (f64::NAN, f64::NAN, Some(e.to_string())),
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<_>>()?;
    let eu: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let ep: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let ou = observed_orders(&config.cells, &eu);
    let op = observed_orders(&config.cells, &ep);
    let rows = levels
        .into_iter()
        .enumerate()
        .map(|(i, (error_u, error_phi, failure))| ConvergenceRow {
            cells: config.cells[i],
            error_u,
            order_u: ou[i],
            error_phi,
            order_phi: op[i],
            failure,
        })
        .collect();
    Ok(ConvergenceReport {
        example: config.example,
        method: config.method,
        degree: config.degree,
        seed: config.mesh.seed,
        cfl: config.cfl,
        dt0,
        t_final,
        mesh: config.mesh,
        rows,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(
            out,
            "# cfl={} dt0={} T={} mesh={} perturb={} hierarchy={:?}",
            sci(self.cfl),
            sci(self.dt0),
            sci(self.t_final),
            self.mesh.kind,
            self.mesh.perturb,
            self.mesh.hierarchy
        )?;
        writeln!(
            out,
            "method,example,degree,cells,seed,error_u,order_u,error_phi,order_phi"
        )?;
        for r in &self.rows {
            if let Some(f) = &r.failure {
                writeln!(out, "# cells={} aborted: {f}", r.cells)?;
            }
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.method,
                self.example,
                self.degree,
                r.cells,
                self.seed,
                sci(r.error_u),
                sci(r.order_u),
                sci(r.error_phi),
                sci(r.order_phi)
            )?;
        }
        Ok(())
    }

    pub fn errors_u(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error_u).collect()
    }

    pub fn errors_phi(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error_phi).collect()
    }

    pub fn cells(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.cells).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub energy_u: f64,
    pub energy_phi: f64,
}

impl EnergySample {
    pub fn total(&self) -> f64 {
        self.energy_u + self.energy_phi
    }
}

#[derive(Debug, Clone, Default)]
pub struct EnergyHistory {
    pub samples: Vec<EnergySample>,
}

impl EnergyHistory {
    /// Relative change of the total energy between first and last sample.
    pub fn relative_drift(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (b.total() - a.total()) / a.total(),
            _ => 0.0,
        }
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,energy_u,energy_phi,energy_total")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{}",
                sci(s.t),
                sci(s.energy_u),
                sci(s.energy_phi),
                sci(s.total())
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub example: ExampleId,
    pub method: MethodVariant,
    pub degree: usize,
    pub cells: usize,
    pub t_final: f64,
    pub cfl: f64,
    pub mesh: MeshSpec,
    /// Record the energy every this many steps (and always at the end).
    pub energy_every: usize,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub control: StepControl,
    pub history: EnergyHistory,
    pub initial: StatePair,
    pub state: StatePair,
    /// `||u(T) - u_h(T)||`, NaN without an exact solution.
    pub error_u: f64,
}

pub fn run_evolution(config: &EvolutionConfig) -> Result<EvolutionResult> {
    let problem = make_problem(config.example);
    run_evolution_for(config, &problem)
}

pub fn run_evolution_for(
    config: &EvolutionConfig,
    problem: &ProblemSpec,
) -> Result<EvolutionResult> {
    if config.t_final.is_nan() || config.t_final < 0.0 {
        return Err(Error::InvalidArgument(
            "final time must be nonnegative".into(),
        ));
    }
    let mesh = Arc::new(config.mesh.build(config.cells, config.cells)?);
    let disc = Discretization::new(mesh.clone(), config.degree)?;
    let control = StepControl::from_cfl(config.cfl, &mesh, config.t_final)?;
    let initial = initial_state(problem, &mesh, config.degree);
    let every = config.energy_every.max(1);
    let mut history = EnergyHistory::default();
    let state = integrate(
        initial.clone(),
        &control,
        |s| disc.rhs(s, problem, config.method),
        |n, t, s| {
            if n % every == 0 || n == control.steps {
                history.samples.push(EnergySample {
                    t,
                    energy_u: s.u.inner(&s.u),
                    energy_phi: s.phi.inner(&s.phi),
                });
            }
        },
    )?;
    let error_u = exact_error(problem, &state.u, control.t_final);
    Ok(EvolutionResult {
        control,
        history,
        initial,
        state,
        error_u,
    })
}

/// One invariant evaluation from the property battery.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub module: &'static str,
    pub name: String,
    pub seed: u64,
    pub magnitude: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn at_most(
        module: &'static str,
        name: impl Into<String>,
        seed: u64,
        magnitude: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            module,
            name: name.into(),
            seed,
            magnitude,
            tolerance,
            passed: magnitude <= tolerance,
        }
    }

    fn at_least(
        module: &'static str,
        name: impl Into<String>,
        seed: u64,
        magnitude: f64,
        bound: f64,
    ) -> Self {
        Self {
            module,
            name: name.into(),
            seed,
            magnitude,
            tolerance: bound,
            passed: magnitude >= bound,
        }
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}::{} seed={} value={:.3e} bound={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.module,
            self.name,
            self.seed,
            self.magnitude,
            self.tolerance
        )
    }
}

fn random_field(mesh: &Arc<Mesh>, degree: usize, rng: &mut ChaCha8Rng) -> DgField {
    let n = mesh.cells() * (degree + 1);
    DgField::from_coeffs(
        mesh.clone(),
        degree,
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .expect("matching length")
}

fn random_mesh(trial: usize, rng: &mut ChaCha8Rng) -> Arc<Mesh> {
    let n = rng.gen_range(4..24);
    let mesh = if trial.is_multiple_of(2) {
        Mesh::uniform(n)
    } else {
        Mesh::perturbed(n, 0.1, rng.gen())
    };
    Arc::new(mesh.expect("valid mesh"))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Worst normalized defects of the quadratic dispersion identities over
/// random states: `(A, C, U)` where A and C should vanish and U should be
/// nonnegative. Each value is divided by `||R|| ||c||`, the Cauchy-Schwarz
/// bound of the pairing.
pub fn dispersion_identity_defects(
    degree: usize,
    trials: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_a, mut worst_c, mut min_u) = (0.0f64, 0.0f64, f64::INFINITY);
    for trial in 0..trials {
        let mesh = random_mesh(trial, &mut rng);
        let disc = Discretization::new(mesh.clone(), degree)?;
        let state = StatePair::new(
            random_field(&mesh, degree, &mut rng),
            random_field(&mesh, degree, &mut rng),
        )?;
        let (du, dphi) = disc.dispersion_residual(&state, MethodVariant::A, epsilon)?;
        let scale = (norm(&du).powi(2) + norm(&dphi).powi(2)).sqrt()
            * (norm(state.u.coeffs()).powi(2) + norm(state.phi.coeffs()).powi(2)).sqrt();
        worst_a =
            worst_a.max((pair_with(&du, &state.u) - pair_with(&dphi, &state.phi)).abs() / scale);
        let (dc, _) = disc.dispersion_residual(&state, MethodVariant::C, epsilon)?;
        worst_c =
            worst_c.max(pair_with(&dc, &state.u).abs() / (norm(&dc) * norm(state.u.coeffs())));
        let (dd, _) = disc.dispersion_residual(&state, MethodVariant::U, epsilon)?;
        min_u = min_u.min(pair_with(&dd, &state.u) / (norm(&dd) * norm(state.u.coeffs())));
    }
    Ok((worst_a, worst_c, min_u))
}

/// Worst normalized `|sum_j F_j(u_h, u_h)|` over random states.
pub fn entropy_identity_defect(flux: &FluxFunction, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let degree = 2 + trial % 3;
        let mesh = random_mesh(trial, &mut rng);
        let disc = Discretization::new(mesh.clone(), degree)?;
        let state = StatePair::from_u(random_field(&mesh, degree, &mut rng));
        let r = disc.convection_residual(&state, flux)?;
        worst = worst.max(pair_with(&r, &state.u).abs() / (norm(&r) * norm(state.u.coeffs())));
    }
    Ok(worst)
}

/// Largest violation of the six interface conditions of the coupled
/// projection, each relative to `max(1, |target|)`, plus the moment conditions.
pub fn coupled_projection_defect(
    u: impl Fn(f64) -> [f64; 3],
    phi: impl Fn(f64) -> [f64; 3],
    mesh: &Arc<Mesh>,
    degree: usize,
) -> Result<f64> {
    let (p1, p2) = coupled_project(&u, &phi, mesh, degree)?;
    let (t1, t2) = (p1.traces(), p2.traces());
    let mut worst = 0.0f64;
    for (j, (a, b)) in t1.iter().zip(&t2).enumerate() {
        let x = mesh.left(j);
        let (tu, tp) = (u(x), phi(x));
        for d in 0..3 {
            worst = worst.max((a.mean(d) + 0.5 * b.jump(d) - tu[d]).abs() / tu[d].abs().max(1.0));
            worst = worst.max((b.mean(d) + 0.5 * a.jump(d) - tp[d]).abs() / tp[d].abs().max(1.0));
        }
    }
    if degree >= 3 {
        let rule = gauss_rule(2 * degree + 4)?;
        for j in 0..mesh.cells() {
            let (h, xc) = (mesh.h(j), mesh.center(j));
            for q in 0..degree - 2 {
                let mu = rule.integrate(|xi| {
                    u(xc + 0.5 * h * xi)[0] * crate::basis::orthonormal_all(q, xi)[0]
                });
                let mp = rule.integrate(|xi| {
                    phi(xc + 0.5 * h * xi)[0] * crate::basis::orthonormal_all(q, xi)[0]
                });
                worst = worst
                    .max((p1.cell(j)[q] - mu).abs())
                    .max((p2.cell(j)[q] - mp).abs());
            }
        }
    }
    Ok(worst)
}

fn sine(x: f64) -> [f64; 3] {
    let w = 2.0 * PI;
    [(w * x).sin(), w * (w * x).cos(), -w * w * (w * x).sin()]
}

fn cosine(x: f64) -> [f64; 3] {
    let w = 2.0 * PI;
    [(w * x).cos(), -w * (w * x).sin(), -w * w * (w * x).cos()]
}

/// Fitted convergence order of both coupled-projection components for
/// `u = sin 2 pi x`, `phi = cos 2 pi x` on perturbed meshes with N = 10..80.
pub fn coupled_projection_orders(degree: usize, seed: u64) -> Result<(f64, f64)> {
    let cells = [10, 20, 40, 80];
    let dense = gauss_rule(24)?;
    let mut e1 = vec![];
    let mut e2 = vec![];
    for &n in &cells {
        let mesh = Arc::new(Mesh::perturbed(n, 0.1, seed.wrapping_add(n as u64))?);
        let (p1, p2) = coupled_project(sine, cosine, &mesh, degree)?;
        e1.push(p1.l2_error_with(&dense, |x| sine(x)[0]));
        e2.push(p2.l2_error_with(&dense, |x| cosine(x)[0]));
    }
    Ok((fitted_order(&cells, &e1), fitted_order(&cells, &e2)))
}

/// Error ratio of SSP-RK3 on `y' = y` over `[0, 1]` when the step is halved.
pub fn rk3_error_ratio(steps: usize) -> f64 {
    let err = |n: usize| {
        let dt = 1.0 / n as f64;
        let mut y = 1.0;
        for _ in 0..n {
            y = ssp_rk3_step(&y, dt, |v: &f64| Ok(*v)).expect("finite");
        }
        (y - std::f64::consts::E).abs()
    };
    err(steps) / err(2 * steps)
}

/// Runs the invariant battery of every module.
pub fn run_property_suite(seed: u64) -> Result<Vec<PropertyCheck>> {
    let mut checks = vec![];
    for degree in 2..=4 {
        let s = seed.wrapping_add(degree as u64);
        let (a, c, u) = dispersion_identity_defects(degree, 100, 0.25, s)?;
        checks.push(PropertyCheck::at_most(
            "operators",
            format!("conservation_A_k{degree}"),
            s,
            a,
            1e-12,
        ));
        checks.push(PropertyCheck::at_most(
            "operators",
            format!("conservation_C_k{degree}"),
            s,
            c,
            1e-12,
        ));
        checks.push(PropertyCheck::at_least(
            "operators",
            format!("dissipation_U_k{degree}"),
            s,
            u,
            -1e-12,
        ));
    }
    for (name, flux) in [
        ("linear", FluxFunction::linear(1.0)),
        ("reversed", FluxFunction::linear(-1.0)),
        ("burgers", FluxFunction::burgers()),
    ] {
        let d = entropy_identity_defect(&flux, 100, seed)?;
        checks.push(PropertyCheck::at_most(
            "operators",
            format!("entropy_{name}"),
            seed,
            d,
            1e-11,
        ));
    }
    for degree in 2..=4 {
        let mesh = Arc::new(Mesh::perturbed(20, 0.1, seed)?);
        let d = coupled_projection_defect(sine, |_| [0.0; 3], &mesh, degree)?
            .max(coupled_projection_defect(sine, cosine, &mesh, degree)?);
        checks.push(PropertyCheck::at_most(
            "field",
            format!("coupled_projection_k{degree}"),
            seed,
            d,
            1e-12,
        ));
        let (o1, o2) = coupled_projection_orders(degree, seed)?;
        let bound = degree as f64 + 0.7;
        checks.push(PropertyCheck::at_least(
            "field",
            format!("projection_order_u_k{degree}"),
            seed,
            o1,
            bound,
        ));
        checks.push(PropertyCheck::at_least(
            "field",
            format!("projection_order_phi_k{degree}"),
            seed,
            o2,
            bound,
        ));
    }
    let k5 = elliptic_k(0.5)?;
    let k9 = elliptic_k(0.9)?;
    checks.push(PropertyCheck::at_most(
        "special",
        "elliptic_k_0.5",
        0,
        (k5 - 1.8540746773).abs(),
        1e-10,
    ));
    checks.push(PropertyCheck::at_most(
        "special",
        "elliptic_k_0.9",
        0,
        (k9 - 2.5780921133).abs(),
        1e-10,
    ));
    checks.push(PropertyCheck::at_most(
        "special",
        "cn_quarter_period",
        0,
        jacobi_cn(k9, 0.9)?.abs(),
        1e-12,
    ));
    for id in [ExampleId::Ex41, ExampleId::Ex42, ExampleId::Ex43] {
        let r = residual_check(&make_problem(id), 200, seed)?;
        let (value, bound) = if id == ExampleId::Ex43 {
            (r.relative(), 1e-5)
        } else {
            (r.max_residual, 1e-6)
        };
        checks.push(PropertyCheck::at_most(
            "problems",
            format!("pde_residual_{id}"),
            seed,
            value,
            bound,
        ));
    }
    let ratio = rk3_error_ratio(20);
    checks.push(PropertyCheck::at_most(
        "timestep",
        "rk3_order_ratio",
        0,
        (ratio - 8.0).abs(),
        0.5,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_formula_is_exact_on_power_laws() {
        let cells = [10, 20, 40, 80];
        for p in [1.0, 2.5, 4.0] {
            let e: Vec<f64> = cells.iter().map(|&n| (n as f64).powf(-p)).collect();
            let o = observed_orders(&cells, &e);
            assert_eq!(o[0], 0.0);
            for v in &o[1..] {
                assert!((v - p).abs() < 1e-12);
            }
            assert!((fitted_order(&cells, &e) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn nested_meshes_bisect_the_coarse_level() {
        let spec = MeshSpec {
            hierarchy: MeshHierarchy::Nested,
            ..MeshSpec::random(0.1, 3)
        };
        let coarse = spec.build(10, 10).unwrap();
        let fine = spec.build(40, 10).unwrap();
        assert_eq!(fine.cells(), 40);
        for (j, &x) in coarse.nodes().iter().enumerate() {
            assert_eq!(fine.nodes()[4 * j], x);
        }
        assert!(spec.build(30, 10).is_err());
    }

    #[test]
    fn zero_data_stays_zero() {
        let problem = ProblemSpec::new(
            "zero",
            0.1,
            FluxFunction::zero(),
            Arc::new(|_| 0.0),
            Some(Arc::new(|_, _| 0.0)),
        )
        .unwrap();
        let config = ConvergenceConfig {
            example: ExampleId::Ex41,
            method: MethodVariant::A,
            degree: 2,
            cells: vec![4, 8],
            cfl: 0.05,
            mesh: MeshSpec::uniform(),
        };
        let report = run_convergence_for(&config, &problem).unwrap();
        for r in &report.rows {
            assert_eq!(r.error_u, 0.0);
            assert_eq!(r.error_phi, 0.0);
        }
    }

    #[test]
    fn evolution_to_time_zero_returns_projection() {
        let config = EvolutionConfig {
            example: ExampleId::Ex43,
            method: MethodVariant::A,
            degree: 2,
            cells: 10,
            t_final: 0.0,
            cfl: 0.05,
            mesh: MeshSpec::uniform(),
            energy_every: 1,
        };
        let result = run_evolution(&config).unwrap();
        assert_eq!(result.state, result.initial);
        assert_eq!(result.history.samples.len(), 1);
    }

    #[test]
    fn convergence_csv_is_deterministic() {
        let config = ConvergenceConfig {
            example: ExampleId::Ex42,
            method: MethodVariant::C,
            degree: 2,
            cells: vec![5, 10],
            cfl: 0.05,
            mesh: MeshSpec::random(0.1, 4),
        };
        let render = || {
            let mut buf = vec![];
            run_convergence(&config)
                .unwrap()
                .write_csv(&mut buf)
                .unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        let lines: Vec<&str> = a.lines().collect();
        assert!(lines[0].starts_with("# cfl="));
        assert_eq!(
            lines[1],
            "method,example,degree,cells,seed,error_u,order_u,error_phi,order_phi"
        );
        assert!(lines[2].starts_with("C,4.2,2,5,4,"));
        assert!(
            lines[2].ends_with(",0.00000e0,0.00000e0,0.00000e0"),
            "{}",
            lines[2]
        );
    }

    #[test]
    fn rejects_non_increasing_levels() {
        let config = ConvergenceConfig {
            example: ExampleId::Ex41,
            method: MethodVariant::A,
            degree: 2,
            cells: vec![10, 10],
            cfl: 0.05,
            mesh: MeshSpec::uniform(),
        };
        assert!(run_convergence(&config).is_err());
    }
}
