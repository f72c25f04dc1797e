//! Time integration of `∂t f = ∇·(A[f]∇f − ∇a[f] f)`.
//!
//! Space: conservative flux form with fourth-order face interpolation and
//! differences, so `∫ rhs = 0` up to round-off. Time: SSP-RK2 (Heun).
//! An optional moment correction removes the small momentum and energy
//! production of the discrete flux, which otherwise makes `∫ f log f` creep
//! upwards from the Maxwellian.

use nalgebra::{Matrix5, Vector5};
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSet, CoefficientSolver};
use crate::error::{Error, Result};
use crate::fields::{boltzmann_entropy, lp_m_integral, moments, weighted_gradient_energy};
use crate::grid::{maxwellian, norm_sq, sym_slot, Field, Grid};

/// Largest step ever taken, independent of configuration.
pub const DEFAULT_DT_MAX: f64 = 0.1;
/// `‖f‖_∞` above which a run is declared blown up.
pub const BLOW_UP_LIMIT: f64 = 1e6;

/// Families of initial data. Every family is normalized to unit mass, zero
/// momentum and energy 3 before use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    Maxwellian,
    /// `μ(v)(1 + amplitude·cos(mode v₁)cos(mode v₂)cos(mode v₃))`.
    PerturbedMaxwellian {
        amplitude: f64,
        mode: f64,
    },
    /// `exp(−Σ vᵢ²/(2θᵢ))`.
    AnisotropicGaussian {
        temperatures: [f64; 3],
    },
    /// Unit Maxwellians centred at `±separation/2` on the `v₁` axis.
    TwoBump {
        separation: f64,
        weights: [f64; 2],
    },
}

impl InitialDatum {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            InitialDatum::Maxwellian => Ok(()),
            InitialDatum::PerturbedMaxwellian { amplitude, mode } => {
                if !(amplitude.abs() <= 1.0) {
                    return bad(format!(
                        "amplitude = {amplitude}: |amplitude| must be at most 1 to keep f non-negative"
                    ));
                }
                if !mode.is_finite() {
                    return bad("mode must be finite".into());
                }
                Ok(())
            }
            InitialDatum::AnisotropicGaussian { temperatures } => {
                if temperatures.iter().all(|t| t.is_finite() && *t > 0.0) {
                    Ok(())
                } else {
                    bad(format!("temperatures {temperatures:?} must be positive"))
                }
            }
            InitialDatum::TwoBump {
                separation,
                weights,
            } => {
                if !(separation.is_finite() && separation >= 0.0) {
                    return bad(format!("separation = {separation} must be non-negative"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
                    || weights[0] + weights[1] <= 0.0
                {
                    return bad(format!(
                        "weights {weights:?} must be non-negative with positive sum"
                    ));
                }
                Ok(())
            }
        }
    }

    /// Unnormalized profile.
    fn profile(&self, v: [f64; 3]) -> f64 {
        match *self {
            InitialDatum::Maxwellian => (-0.5 * norm_sq(v)).exp(),
            InitialDatum::PerturbedMaxwellian { amplitude, mode } => {
                let wave = (mode * v[0]).cos() * (mode * v[1]).cos() * (mode * v[2]).cos();
                (-0.5 * norm_sq(v)).exp() * (1.0 + amplitude * wave)
            }
            InitialDatum::AnisotropicGaussian { temperatures: t } => {
                (-(v[0] * v[0] / t[0] + v[1] * v[1] / t[1] + v[2] * v[2] / t[2]) / 2.0).exp()
            }
            InitialDatum::TwoBump {
                separation,
                weights,
            } => {
                let s = 0.5 * separation;
                weights[0] * (-0.5 * norm_sq([v[0] - s, v[1], v[2]])).exp()
                    + weights[1] * (-0.5 * norm_sq([v[0] + s, v[1], v[2]])).exp()
            }
        }
    }
}

fn default_cfl() -> f64 {
    0.5
}
fn default_dt_max() -> f64 {
    DEFAULT_DT_MAX
}
fn default_snapshot_every() -> usize {
    10
}
fn default_refresh() -> usize {
    1
}
fn default_true() -> bool {
    true
}

/// Run parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    pub initial: InitialDatum,
    /// Lebesgue exponent of the recorded `‖h‖_p^p`.
    pub p: f64,
    /// Moment weight.
    pub m: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub clip_negatives: bool,
    #[serde(default = "default_refresh")]
    pub coefficient_refresh: usize,
    #[serde(default = "default_true")]
    pub conserve_moments: bool,
}

impl SimConfig {
    /// Config with documented defaults for everything but the essentials.
    pub fn new(n: usize, extent: f64, t_end: f64, initial: InitialDatum) -> Self {
        SimConfig {
            n,
            extent,
            t_end,
            cfl: default_cfl(),
            dt_max: DEFAULT_DT_MAX,
            initial,
            p: 2.0,
            m: 12.0,
            snapshot_every: default_snapshot_every(),
            clip_negatives: false,
            coefficient_refresh: 1,
            conserve_moments: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n, self.extent).map_err(|e| Error::Config(e.to_string()))?;
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(
            self.t_end.is_finite() && self.t_end > 0.0,
            "t_end must be positive",
        )?;
        check(self.cfl > 0.0 && self.cfl <= 1.0, "cfl must lie in (0, 1]")?;
        check(
            self.dt_max.is_finite() && self.dt_max > 0.0,
            "dt_max must be positive",
        )?;
        check(self.p.is_finite() && self.p > 1.5, "p must exceed 3/2")?;
        check(self.m.is_finite() && self.m > 0.0, "m must be positive")?;
        check(
            self.snapshot_every >= 1,
            "snapshot_every must be at least 1",
        )?;
        check(
            self.coefficient_refresh >= 1,
            "coefficient_refresh must be at least 1",
        )?;
        self.initial.validate()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.extent)
    }
}

/// Samples and normalizes the configured initial datum.
///
/// The profile `g` is resampled as `C g(u + σv)`: shift to zero mean, dilate
/// to energy 3, scale to unit mass, repeated until the sampled moments settle.
pub fn initial_datum(config: &SimConfig) -> Result<Field> {
    config.validate()?;
    let grid = config.grid()?;
    let datum = &config.initial;
    match datum {
        InitialDatum::Maxwellian => return Ok(maxwellian(grid)),
        InitialDatum::PerturbedMaxwellian { amplitude, .. } if *amplitude == 0.0 => {
            return Ok(maxwellian(grid))
        }
        _ => {}
    }
    let mut shift = [0.0; 3];
    let mut sigma = 1.0;
    let mut scale = 1.0;
    let sample = |shift: [f64; 3], sigma: f64, scale: f64| {
        Field::from_fn(grid, |v| {
            scale
                * datum.profile([
                    shift[0] + sigma * v[0],
                    shift[1] + sigma * v[1],
                    shift[2] + sigma * v[2],
                ])
        })
    };
    for _ in 0..20 {
        let f = sample(shift, sigma, scale);
        let m = moments(&f);
        let mean = m.momentum.map(|p| p / m.mass);
        let temp = m.energy / m.mass - norm_sq(mean);
        if !(m.mass > 0.0 && temp > 0.0) {
            return Err(Error::Config(
                "initial datum has no mass on the grid".into(),
            ));
        }
        for (s, u) in shift.iter_mut().zip(mean) {
            *s += sigma * u;
        }
        let dilation = (temp / 3.0).sqrt();
        sigma *= dilation;
        scale *= dilation.powi(3) / m.mass;
        if (m.mass - 1.0).abs() < 1e-14
            && mean.iter().all(|u| u.abs() < 1e-14)
            && (dilation - 1.0).abs() < 1e-14
        {
            break;
        }
    }
    let f = sample(shift, sigma, scale);
    if f.min() < 0.0 {
        return Err(Error::Config("initial datum is negative somewhere".into()));
    }
    Ok(f)
}

/// Periodic neighbour access along one axis.
struct Stencil {
    n: usize,
    len: usize,
}

impl Stencil {
    fn new(grid: &Grid) -> Self {
        Stencil {
            n: grid.n(),
            len: grid.len(),
        }
    }

    /// `out[i] = Σ_s w_s · g[i + s]` along `axis`, periodic.
    fn apply(&self, g: &[f64], axis: usize, taps: &[(isize, f64)]) -> Vec<f64> {
        let n = self.n;
        let stride = [n * n, n, 1][axis];
        let mut out = vec![0.0; self.len];
        for (idx, o) in out.iter_mut().enumerate() {
            let c = (idx / stride) % n;
            let base = idx - c * stride;
            let mut acc = 0.0;
            for &(s, w) in taps {
                let cc = (c as isize + s).rem_euclid(n as isize) as usize;
                acc += w * g[base + cc * stride];
            }
            *o = acc;
        }
        out
    }

    /// Value at the face `i + 1/2`.
    fn face_average(&self, g: &[f64], axis: usize) -> Vec<f64> {
        const W: [(isize, f64); 4] = [
            (-1, -1.0 / 16.0),
            (0, 9.0 / 16.0),
            (1, 9.0 / 16.0),
            (2, -1.0 / 16.0),
        ];
        self.apply(g, axis, &W)
    }

    /// Derivative at the face `i + 1/2`.
    fn face_derivative(&self, g: &[f64], axis: usize, h: f64) -> Vec<f64> {
        let d = 24.0 * h;
        self.apply(
            g,
            axis,
            &[(-1, 1.0 / d), (0, -27.0 / d), (1, 27.0 / d), (2, -1.0 / d)],
        )
    }

    /// Derivative at node `i`.
    fn centred_derivative(&self, g: &[f64], axis: usize, h: f64) -> Vec<f64> {
        let d = 12.0 * h;
        self.apply(
            g,
            axis,
            &[(-2, 1.0 / d), (-1, -8.0 / d), (1, 8.0 / d), (2, -1.0 / d)],
        )
    }

    /// Node divergence from face values (face `i + 1/2` stored at `i`).
    fn face_divergence(&self, flux: &[f64], axis: usize, h: f64) -> Vec<f64> {
        let d = 24.0 * h;
        self.apply(
            flux,
            axis,
            &[(-2, 1.0 / d), (-1, -27.0 / d), (0, 27.0 / d), (1, -1.0 / d)],
        )
    }
}

/// Discrete `∇·(A∇f − ∇a f)` in flux form.
pub fn rhs(f: &Field, coeffs: &CoefficientSet) -> Result<Field> {
    let grid = *f.grid();
    if coeffs.grid() != &grid {
        return Err(Error::GridMismatch("rhs: field and coefficients".into()));
    }
    let h = grid.spacing();
    let st = Stencil::new(&grid);
    let fv = f.values();
    let node_grad: Vec<Vec<f64>> = (0..3).map(|l| st.centred_derivative(fv, l, h)).collect();
    let mut out = vec![0.0; grid.len()];
    for k in 0..3 {
        let mut flux = vec![0.0; grid.len()];
        for l in 0..3 {
            let d = if l == k {
                st.face_derivative(fv, k, h)
            } else {
                st.face_average(&node_grad[l], k)
            };
            let akl = st.face_average(coeffs.a_tensor.components()[sym_slot(k, l)].values(), k);
            for ((fl, a), d) in flux.iter_mut().zip(&akl).zip(&d) {
                *fl += a * d;
            }
        }
        let drift = st.face_average(coeffs.grad_a.component(k).values(), k);
        let favg = st.face_average(fv, k);
        for ((fl, g), x) in flux.iter_mut().zip(&drift).zip(&favg) {
            *fl -= g * x;
        }
        for (o, d) in out.iter_mut().zip(st.face_divergence(&flux, k, h)) {
            *o += d;
        }
    }
    Field::from_values(grid, out)
}

/// Removes the mass, momentum and energy production of `r`:
/// `r − f⁺ (λ·φ)` with `φ = (1, v, |v|²)` and `λ` solving the 5×5 moment
/// system. Returns `r` unchanged if the system is singular.
pub fn conserve_moments(r: &Field, f: &Field) -> Result<Field> {
    let grid = *f.grid();
    let basis = |v: [f64; 3]| Vector5::new(1.0, v[0], v[1], v[2], norm_sq(v));
    let mut mat = Matrix5::zeros();
    let mut rhs_moments = Vector5::zeros();
    for idx in 0..grid.len() {
        let phi = basis(grid.velocity(idx));
        let fp = f.values()[idx].max(0.0);
        mat += phi * phi.transpose() * fp;
        rhs_moments += phi * r.values()[idx];
    }
    let Some(lambda) = mat.lu().solve(&rhs_moments) else {
        return Ok(r.clone());
    };
    if lambda.iter().any(|x| !x.is_finite()) {
        return Ok(r.clone());
    }
    let values = (0..grid.len())
        .map(|idx| {
            let phi = basis(grid.velocity(idx));
            r.values()[idx] - f.values()[idx].max(0.0) * lambda.dot(&phi)
        })
        .collect();
    Field::from_values(grid, values)
}

/// Explicit step bound
/// `cfl·Δv² / (2·3·(7/6)²·max λ_max(A) + Δv·max|∇a| + 1e-30)`, capped at
/// [`DEFAULT_DT_MAX`]. The `(7/6)²` is the spectral radius of the
/// fourth-order staggered second difference relative to the standard one.
pub fn stable_dt(coeffs: &CoefficientSet, cfl: f64) -> f64 {
    let h = coeffs.grid().spacing();
    let diffusion = 2.0 * 3.0 * (7.0f64 / 6.0).powi(2) * coeffs.max_eigenvalue();
    let drift = h * coeffs.grad_a.max_norm();
    (cfl * h * h / (diffusion + drift + 1e-30)).min(DEFAULT_DT_MAX)
}

fn check_blow_up(f: &Field, time: f64, step: usize) -> Result<()> {
    if let Some(i) = f.values().iter().position(|x| x.is_nan()) {
        return Err(Error::BlowUp {
            time,
            step,
            reason: format!("NaN at node {i}"),
        });
    }
    let m = f.max_abs();
    if m > BLOW_UP_LIMIT {
        return Err(Error::BlowUp {
            time,
            step,
            reason: format!("max |f| = {m:e} exceeds {BLOW_UP_LIMIT:e}"),
        });
    }
    Ok(())
}

fn tendency(f: &Field, coeffs: &CoefficientSet, conserve: bool) -> Result<Field> {
    let r = rhs(f, coeffs)?;
    if conserve {
        conserve_moments(&r, f)
    } else {
        Ok(r)
    }
}

/// One SSP-RK2 step with coefficients recomputed at both stages and the
/// moment correction applied.
pub fn step(f: &Field, dt: f64, solver: &CoefficientSolver) -> Result<Field> {
    if dt == 0.0 {
        return Ok(f.clone());
    }
    let c0 = solver.compute(f)?;
    let k1 = tendency(f, &c0, true)?;
    let f1 = f.combine(1.0, &k1, dt)?;
    check_blow_up(&f1, dt, 0)?;
    let c1 = solver.compute(&f1)?;
    let k2 = tendency(&f1, &c1, true)?;
    let out = f.combine(0.5, &f1.combine(1.0, &k2, dt)?, 0.5)?;
    check_blow_up(&out, dt, 0)?;
    Ok(out)
}

/// Diagnostics recorded after every step (and once at `t = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepScalars {
    pub time: f64,
    /// Step that produced this record; 0 for the initial record.
    pub dt: f64,
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    /// `∫ f⁺ log f⁺`.
    pub entropy: f64,
    /// `‖h‖_p^p`, `h = f − μ`.
    pub lp_p: f64,
    pub linf_h: f64,
    /// `∫ ⟨v⟩^{-3} |∇|h|^{p/2}|²`.
    pub grad_energy: f64,
    pub c0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub f: Field,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Abort {
    pub time: f64,
    pub step: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    /// Exponent used for `lp_p` and `grad_energy`.
    pub p: f64,
    pub scalars: Vec<StepScalars>,
    pub snapshots: Vec<Snapshot>,
    pub abort: Option<Abort>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.scalars.iter().map(|s| s.time).collect()
    }

    pub fn end_time(&self) -> f64 {
        self.scalars.last().map_or(0.0, |s| s.time)
    }

    /// `h = f − μ` at every snapshot.
    pub fn perturbations(&self) -> Vec<(f64, Field)> {
        let mu = maxwellian(self.grid);
        self.snapshots
            .iter()
            .map(|s| (s.time, s.f.sub(&mu).expect("snapshot on trajectory grid")))
            .collect()
    }

    /// Snapshot nearest to `t`.
    pub fn nearest_snapshot(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
    }
}

/// Stateful integrator for one run.
pub struct Solver {
    config: SimConfig,
    grid: Grid,
    coefficient_solver: CoefficientSolver,
    mu: Field,
    f: Field,
    time: f64,
    steps: usize,
    coeffs: CoefficientSet,
    coeffs_age: usize,
    last_clip: f64,
}

impl Solver {
    pub fn new(config: SimConfig) -> Result<Self> {
        let f = initial_datum(&config)?;
        Self::with_initial(config, f)
    }

    pub fn with_initial(config: SimConfig, f: Field) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        if f.grid() != &grid {
            return Err(Error::GridMismatch("initial field vs config grid".into()));
        }
        let coefficient_solver = CoefficientSolver::new(grid);
        let coeffs = coefficient_solver.compute(&f)?;
        Ok(Solver {
            mu: maxwellian(grid),
            config,
            grid,
            coefficient_solver,
            f,
            time: 0.0,
            steps: 0,
            coeffs,
            coeffs_age: 0,
            last_clip: 0.0,
        })
    }

    pub fn field(&self) -> &Field {
        &self.f
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    /// Negative mass removed by the last clip (0 without clipping).
    pub fn last_clip(&self) -> f64 {
        self.last_clip
    }

    /// Step size the solver would take next.
    pub fn next_dt(&self) -> f64 {
        stable_dt(&self.coeffs, self.config.cfl)
            .min(self.config.dt_max)
            .min(self.config.t_end - self.time)
    }

    /// Advances by `dt`.
    pub fn advance(&mut self, dt: f64) -> Result<()> {
        let conserve = self.config.conserve_moments;
        let refresh_each_stage = self.config.coefficient_refresh == 1;
        let k1 = tendency(&self.f, &self.coeffs, conserve)?;
        let f1 = self.f.combine(1.0, &k1, dt)?;
        check_blow_up(&f1, self.time + dt, self.steps + 1)?;
        let stage = if refresh_each_stage {
            self.coefficient_solver.compute(&f1)?
        } else {
            self.coeffs.clone()
        };
        let k2 = tendency(&f1, &stage, conserve)?;
        let mut next = self.f.combine(0.5, &f1.combine(1.0, &k2, dt)?, 0.5)?;
        check_blow_up(&next, self.time + dt, self.steps + 1)?;

        self.last_clip = 0.0;
        if self.config.clip_negatives && next.min() < 0.0 {
            let before = next.integrate();
            let removed: f64 = next.values().iter().filter(|x| **x < 0.0).sum::<f64>();
            for x in next.values_mut() {
                *x = x.max(0.0);
            }
            let after = next.integrate();
            if after > 0.0 {
                next = next.scaled(before / after);
            }
            self.last_clip = -removed * self.grid.cell_volume();
        }

        self.f = next;
        self.time += dt;
        self.steps += 1;
        self.coeffs_age += 1;
        if self.coeffs_age >= self.config.coefficient_refresh {
            self.coeffs = self.coefficient_solver.compute(&self.f)?;
            self.coeffs_age = 0;
        }
        Ok(())
    }

    /// Diagnostics of the current state.
    pub fn scalars(&self, dt: f64) -> StepScalars {
        let m = moments(&self.f);
        let h = self.f.sub(&self.mu).expect("same grid");
        let positive = self.f.map(|x| x.max(0.0));
        StepScalars {
            time: self.time,
            dt,
            mass: m.mass,
            momentum: m.momentum,
            energy: m.energy,
            entropy: boltzmann_entropy(&positive).expect("non-negative"),
            lp_p: lp_m_integral(&h, self.config.p, 0.0),
            linf_h: h.max_abs(),
            grad_energy: weighted_gradient_energy(&h, self.config.p),
            c0: self.coeffs.c0_empirical,
        }
    }
}

/// Integrates the configured problem to `t_end`. A blow-up ends the run
/// early and is reported in [`Trajectory::abort`].
pub fn run(config: &SimConfig) -> Result<Trajectory> {
    let mut solver = Solver::new(config.clone())?;
    let mut traj = Trajectory {
        grid: solver.grid,
        p: config.p,
        scalars: vec![solver.scalars(0.0)],
        snapshots: vec![Snapshot {
            time: 0.0,
            f: solver.f.clone(),
        }],
        abort: None,
    };
    while config.t_end - solver.time > 1e-12 * config.t_end.max(1.0) {
        let dt = solver.next_dt();
        if let Err(err) = solver.advance(dt) {
            match err {
                Error::BlowUp { time, step, reason } => {
                    traj.abort = Some(Abort { time, step, reason });
                    break;
                }
                other => return Err(other),
            }
        }
        traj.scalars.push(solver.scalars(dt));
        let last = config.t_end - solver.time <= 1e-12 * config.t_end.max(1.0);
        if solver.steps % config.snapshot_every == 0 || last {
            traj.snapshots.push(Snapshot {
                time: solver.time,
                f: solver.f.clone(),
            });
        }
    }
    Ok(traj)
}
