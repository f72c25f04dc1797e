//! Diagnostics evaluated on trajectories: exponents, energies, the ODE
//! barrier for `‖h‖_p^p`, level-set energies and the De Giorgi iteration,
//! moment envelopes and smoothing-rate fits.
//!
//! Constants that the estimates leave unspecified (`C`, `C̃`, `C₃`, ...) are
//! calibrated from data: each is the smallest value making the inequality
//! hold on the samples given.

use crate::error::{Error, Result};
use crate::fields::{
    edge_gradient_energy, level_set_plus, lp_m_integral, weighted_gradient_energy,
};
use crate::grid::{bracket, norm_sq, spectral_gradient, Field};
use crate::solver::Trajectory;

/// Exponents attached to a pair `(p, m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentSet {
    pub p: f64,
    pub m: f64,
    /// `(2(p−3/2)/(3m))·[m − (9/2)(p−1)/(p−3/2)]`.
    pub gamma: f64,
    /// `q − (p + 1)`, the same quantity by another route.
    pub gamma_alt: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha: f64,
    pub q: f64,
    /// `(9/2)(p−1)/(p−3/2)`: `γ > 0` exactly when `m` exceeds it.
    pub gamma_threshold: f64,
    /// `max((9/2)(p−1)/(p−3/2)·max(1, p(p−3/2)/(p²−2p+3/2)), 55)`.
    pub m_threshold: f64,
    /// `γ ≤ 0`: the smoothing estimates are void.
    pub degenerate: bool,
}

pub fn exponents(p: f64, m: f64) -> Result<ExponentSet> {
    if !(p > 1.5) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p = {p} must exceed 3/2")));
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("m = {m} must be positive")));
    }
    let gamma_threshold = 4.5 * (p - 1.0) / (p - 1.5);
    let gamma = (2.0 * (p - 1.5) / (3.0 * m)) * (m - gamma_threshold);
    let q = (5.0 / 3.0) * p - 3.0 * (p - 1.0) / m;
    let inner = (p * (p - 1.5) / (p * p - 2.0 * p + 1.5)).max(1.0);
    Ok(ExponentSet {
        p,
        m,
        gamma,
        gamma_alt: q - (p + 1.0),
        beta0: 1.0 / (3.0 * (p - 1.0)),
        beta1: 2.0 / 3.0 - 3.0 / m,
        beta2: 3.0 / m,
        alpha: 1.0 - 1.0 / p + 1.0 / (3.0 * (p - 1.0)),
        q,
        gamma_threshold,
        m_threshold: (gamma_threshold * inner).max(55.0),
        degenerate: gamma <= 1e-12,
    })
}

/// `q_{l,θ} = −(2l² − 25l + 57)/(18(l−2))·(1 − θ/l) + θ/l`.
pub fn q_ltheta(l: f64, theta: f64) -> Result<f64> {
    if !(l > 9.5) || !l.is_finite() {
        return Err(Error::InvalidArgument(format!("l = {l} must exceed 19/2")));
    }
    if !(0.0..=l).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} must lie in [0, {l}]"
        )));
    }
    Ok(-(2.0 * l * l - 25.0 * l + 57.0) / (18.0 * (l - 2.0)) * (1.0 - theta / l) + theta / l)
}

/// Trapezoid rule for `∫_a^b` of piecewise-linear data.
fn window_integral(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for i in 1..times.len() {
        let (t0, t1) = (times[i - 1], times[i]);
        let (lo, hi) = (t0.max(a), t1.min(b));
        if hi <= lo || t1 <= t0 {
            continue;
        }
        let at = |t: f64| values[i - 1] + (values[i] - values[i - 1]) * (t - t0) / (t1 - t0);
        total += 0.5 * (at(lo) + at(hi)) * (hi - lo);
    }
    total
}

/// Largest value of the piecewise-linear interpolant on `[a, b]`.
fn window_sup(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    let interp = |t: f64| -> f64 {
        match times.iter().position(|&s| s >= t) {
            Some(0) => values[0],
            Some(i) => {
                let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
            None => *values.last().unwrap(),
        }
    };
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= a && **t <= b)
        .map(|(_, v)| *v)
        .fold(interp(a).max(interp(b)), f64::max)
}

/// `(times, ‖h‖_p^p, ∫⟨v⟩^{-3}|∇|h|^{p/2}|²)`: from the per-step scalars when
/// `p` matches the run, otherwise recomputed on the snapshots.
fn lp_series(traj: &Trajectory, p: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    if p == traj.p {
        let s = &traj.scalars;
        (
            s.iter().map(|x| x.time).collect(),
            s.iter().map(|x| x.lp_p).collect(),
            s.iter().map(|x| x.grad_energy).collect(),
        )
    } else {
        let hs = traj.perturbations();
        (
            hs.iter().map(|(t, _)| *t).collect(),
            hs.iter().map(|(_, h)| lp_m_integral(h, p, 0.0)).collect(),
            hs.iter()
                .map(|(_, h)| weighted_gradient_energy(h, p))
                .collect(),
        )
    }
}

fn check_window(traj: &Trajectory, a: f64, b: f64) -> Result<()> {
    let end = traj.end_time();
    if !(a >= 0.0 && a < b && b <= end * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "window [{a}, {b}] must satisfy 0 <= a < b <= {end}"
        )));
    }
    Ok(())
}

/// `sup_t ‖h‖_p^p + ∫ ∫⟨v⟩^{-3}|∇h^{p/2}|² dv dt` over the window.
pub fn energy_e0(traj: &Trajectory, p: f64, window: (f64, f64)) -> Result<f64> {
    check_window(traj, window.0, window.1)?;
    let (t, y, g) = lp_series(traj, p);
    Ok(window_sup(&t, &y, window.0, window.1) + window_integral(&t, &g, window.0, window.1))
}

/// `sup_t ‖h(t)‖_{L¹_m}` over the snapshots.
pub fn moment_sup(traj: &Trajectory, m: f64) -> f64 {
    traj.perturbations()
        .iter()
        .map(|(_, h)| lp_m_integral(h, 1.0, m))
        .fold(0.0, f64::max)
}

/// Smallest positive `c₀` recorded along the run.
pub fn measured_c0(traj: &Trajectory) -> f64 {
    traj.scalars
        .iter()
        .map(|s| s.c0)
        .filter(|c| *c > 0.0)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeBarrierReport {
    pub eps: f64,
    pub y0: f64,
    pub c0: f64,
    pub c_tilde: f64,
    pub m_bar: f64,
    pub alpha: f64,
    /// `(3C̃)⁻¹ min((M̄+1)⁻¹, ε^{1−α})`.
    pub t0_fit: f64,
    /// First sample with `y > ε`.
    pub exit_time: Option<f64>,
    /// `y ≤ ε` on `[0, min(T₀, t_end)]`.
    pub holds_until_t0: bool,
    /// Largest `y(t) − RHS(t)` of the integral inequality (≤ 0 when it holds).
    pub max_violation: f64,
    pub integral_form_holds: bool,
    /// `max_t [y(t) + (c₀/2)∫₀ᵗ G]` up to `min(T₀, t_end)`.
    pub apriori_max: f64,
}

struct BarrierTerms {
    times: Vec<f64>,
    y: Vec<f64>,
    /// `y − y₀ + c₀∫G`
    lhs: Vec<f64>,
    /// `∫((M̄+1)y + y^α) + ∫ G y^{β₀} M̄^{e}`
    coef: Vec<f64>,
    grad: Vec<f64>,
}

fn barrier_terms(traj: &Trajectory, p: f64, m_bar: f64, c0: f64) -> BarrierTerms {
    let (times, y, grad) = lp_series(traj, p);
    let alpha = 1.0 - 1.0 / p + 1.0 / (3.0 * (p - 1.0));
    let beta0 = 1.0 / (3.0 * (p - 1.0));
    let m_exp = (2.0 / 3.0) * (p - 1.5) / (p - 1.0);
    let growth: Vec<f64> = y
        .iter()
        .map(|&v| (m_bar + 1.0) * v + v.powf(alpha))
        .collect();
    let nonlinear: Vec<f64> = y
        .iter()
        .zip(&grad)
        .map(|(&v, &g)| g * v.powf(beta0) * m_bar.powf(m_exp))
        .collect();
    let mut lhs = Vec::with_capacity(times.len());
    let mut coef = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let g_int = window_integral(&times, &grad, 0.0, t);
        lhs.push(y[i] - y[0] + c0 * g_int);
        coef.push(
            window_integral(&times, &growth, 0.0, t) + window_integral(&times, &nonlinear, 0.0, t),
        );
    }
    BarrierTerms {
        times,
        y,
        lhs,
        coef,
        grad,
    }
}

/// Smallest `C̃` for which `y(t) ≤ y₀ + C̃∫((M̄+1)y + y^α) − ∫G·N(y)` holds
/// at every sample, with `N(y) = c₀ − C̃ y^{1/(3(p−1))} M̄^{(2/3)(p−3/2)/(p−1)}`.
pub fn calibrate_c_tilde(traj: &Trajectory, p: f64, m: f64, c0: f64) -> f64 {
    let terms = barrier_terms(traj, p, moment_sup(traj, m), c0);
    terms
        .lhs
        .iter()
        .zip(&terms.coef)
        .filter(|(l, _)| **l > 0.0)
        .map(|(l, c)| if *c > 0.0 { l / c } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

/// Barrier check with constants calibrated on this trajectory alone.
pub fn ode_barrier_check(traj: &Trajectory, p: f64, m: f64, eps: f64) -> Result<OdeBarrierReport> {
    let c0 = measured_c0(traj);
    let c0 = if c0.is_finite() { c0 } else { 0.0 };
    let c_tilde = calibrate_c_tilde(traj, p, m, c0);
    ode_barrier_check_with(traj, p, m, eps, c0, c_tilde)
}

/// Barrier check with given `c₀` and `C̃` (e.g. calibrated over a sweep).
pub fn ode_barrier_check_with(
    traj: &Trajectory,
    p: f64,
    m: f64,
    eps: f64,
    c0: f64,
    c_tilde: f64,
) -> Result<OdeBarrierReport> {
    let ex = exponents(p, m)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} must be positive"
        )));
    }
    let m_bar = moment_sup(traj, m);
    let terms = barrier_terms(traj, p, m_bar, c0);
    let t0_fit = if c_tilde > 0.0 {
        (3.0 * c_tilde).recip() * (m_bar + 1.0).recip().min(eps.powf(1.0 - ex.alpha))
    } else {
        f64::INFINITY
    };
    let horizon = t0_fit.min(traj.end_time());
    let exit_time = terms
        .times
        .iter()
        .zip(&terms.y)
        .find(|(_, y)| **y > eps)
        .map(|(t, _)| *t);
    let holds_until_t0 = exit_time.is_none_or(|t| t > horizon);
    let max_violation = terms
        .lhs
        .iter()
        .zip(&terms.coef)
        .map(|(l, c)| l - c_tilde * c)
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = terms
        .y
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()))
        .max(f64::MIN_POSITIVE);
    let apriori_max = terms
        .times
        .iter()
        .zip(&terms.y)
        .filter(|(t, _)| **t <= horizon)
        .map(|(t, y)| y + 0.5 * c0 * window_integral(&terms.times, &terms.grad, 0.0, *t))
        .fold(0.0, f64::max);
    Ok(OdeBarrierReport {
        eps,
        y0: terms.y[0],
        c0,
        c_tilde,
        m_bar,
        alpha: ex.alpha,
        t0_fit,
        exit_time,
        holds_until_t0,
        max_violation,
        integral_form_holds: max_violation <= 1e-12 * scale,
        apriori_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSetEnergyReport {
    pub level: f64,
    pub window: (f64, f64),
    /// `sup_t ‖h_ℓ⁺‖_p^p`.
    pub sup_term: f64,
    /// `c₀ ∫ ∫⟨v⟩^{-3}|∇(h_ℓ⁺)^{p/2}|² dv dt`.
    pub dissipation_term: f64,
    pub total: f64,
}

/// Per-snapshot inputs for level-set energies of `h` (or `−h`).
struct LevelSetSeries {
    times: Vec<f64>,
    fields: Vec<Field>,
}

impl LevelSetSeries {
    fn new(traj: &Trajectory, sign: f64) -> Self {
        let hs = traj.perturbations();
        LevelSetSeries {
            times: hs.iter().map(|(t, _)| *t).collect(),
            fields: hs.into_iter().map(|(_, h)| h.scaled(sign)).collect(),
        }
    }

    fn samples_in(&self, a: f64, b: f64) -> usize {
        self.times
            .iter()
            .filter(|t| **t >= a - 1e-12 && **t <= b + 1e-12)
            .count()
    }

    fn energy(&self, level: f64, a: f64, b: f64, p: f64, c0: f64) -> Result<LevelSetEnergyReport> {
        let mut lp = Vec::with_capacity(self.fields.len());
        let mut diss = Vec::with_capacity(self.fields.len());
        for h in &self.fields {
            if h.max() <= level {
                lp.push(0.0);
                diss.push(0.0);
                continue;
            }
            let plus = level_set_plus(h, level)?;
            lp.push(lp_m_integral(&plus, p, 0.0));
            diss.push(edge_gradient_energy(&plus, p));
        }
        let sup_term = window_sup(&self.times, &lp, a, b);
        let dissipation_term = c0 * window_integral(&self.times, &diss, a, b);
        Ok(LevelSetEnergyReport {
            level,
            window: (a, b),
            sup_term,
            dissipation_term,
            total: sup_term + dissipation_term,
        })
    }
}

/// Minimum number of snapshots inside a level-set window.
pub const MIN_WINDOW_SAMPLES: usize = 8;

/// `ℰ_ℓ(T₁, T₂) = sup_t ‖h_ℓ⁺‖_p^p + c₀∫∫⟨v⟩^{-3}|∇(h_ℓ⁺)^{p/2}|²` over
/// the snapshots.
pub fn level_set_energy(
    traj: &Trajectory,
    level: f64,
    window: (f64, f64),
    p: f64,
    c0: f64,
) -> Result<LevelSetEnergyReport> {
    check_window(traj, window.0, window.1)?;
    let series = LevelSetSeries::new(traj, 1.0);
    ensure_samples(&series, window)?;
    series.energy(level, window.0, window.1, p, c0)
}

fn ensure_samples(series: &LevelSetSeries, window: (f64, f64)) -> Result<()> {
    let count = series.samples_in(window.0, window.1);
    if count < MIN_WINDOW_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}] holds {count} snapshots, need {MIN_WINDOW_SAMPLES}",
            window.0, window.1
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceReport {
    pub lhs: f64,
    /// `(1+T₃)^{1+β₂} ℰ_k(T₁,T₃)^{1+β₁} · bracket`.
    pub rhs_unit: f64,
    pub bracket: f64,
    /// `lhs / rhs_unit`: the constant this tuple requires.
    pub ratio: f64,
}

/// Bracket of the level-to-level energy estimate.
pub fn recurrence_bracket(gamma: f64, k: f64, level: f64, dt: f64, e0_beta0: f64) -> f64 {
    let d = level - k;
    1.0 / (dt * d.powf(1.0 + gamma))
        + d.powf(-gamma)
        + (1.0 + level) / d.powf(1.0 + gamma)
        + (1.0 + level + level * level + e0_beta0) / d.powf(2.0 + gamma)
}

/// Both sides of `ℰ_ℓ(T₂,T₃) ≤ C(1+T₃)^{1+β₂}ℰ_k(T₁,T₃)^{1+β₁}[…]`.
#[allow(clippy::too_many_arguments)]
pub fn level_set_recurrence_check(
    traj: &Trajectory,
    k: f64,
    level: f64,
    (t1, t2, t3): (f64, f64, f64),
    p: f64,
    m: f64,
    c0: f64,
) -> Result<RecurrenceReport> {
    if !(0.0 <= k && k < level) {
        return Err(Error::InvalidArgument(format!(
            "levels must satisfy 0 <= k < l, got k = {k}, l = {level}"
        )));
    }
    if !(0.0 <= t1 && t1 < t2 && t2 <= t3) {
        return Err(Error::InvalidArgument(format!(
            "times must satisfy 0 <= T1 < T2 <= T3, got {t1}, {t2}, {t3}"
        )));
    }
    check_window(traj, t1, t3)?;
    let ex = exponents(p, m)?;
    let series = LevelSetSeries::new(traj, 1.0);
    let lhs = if t2 < t3 {
        series.energy(level, t2, t3, p, c0)?.total
    } else {
        0.0
    };
    let ek = series.energy(k, t1, t3, p, c0)?.total;
    let e0 = series.energy(0.0, t1, t3, p, c0)?.total;
    let bracket = recurrence_bracket(ex.gamma, k, level, t2 - t1, e0.powf(ex.beta0));
    let rhs_unit = (1.0 + t3).powf(1.0 + ex.beta2) * ek.powf(1.0 + ex.beta1) * bracket;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs_unit };
    Ok(RecurrenceReport {
        lhs,
        rhs_unit,
        bracket,
        ratio,
    })
}

/// Level ceiling `K = C max{E₀^{β₁/γ}, E₀^{β₁/(1+γ)}, E₀^{β₁/(2+γ)},
/// E₀^{(β₀+β₁)/(2+γ)}, E₀^{β₁/(1+γ)} t^{−1/(1+γ)}} (1+T)^{(1+β₂)/γ}`.
pub fn predict_k(e0: f64, t: f64, big_t: f64, p: f64, m: f64, c: f64) -> Result<f64> {
    let ex = exponents(p, m)?;
    if ex.degenerate {
        return Err(Error::InvalidArgument(format!(
            "gamma = {} must be positive",
            ex.gamma
        )));
    }
    if !(e0 >= 0.0) || !(t > 0.0 && t <= big_t) {
        return Err(Error::InvalidArgument("need E0 >= 0 and 0 < t <= T".into()));
    }
    let g = ex.gamma;
    let candidates = [
        e0.powf(ex.beta1 / g),
        e0.powf(ex.beta1 / (1.0 + g)),
        e0.powf(ex.beta1 / (2.0 + g)),
        e0.powf((ex.beta0 + ex.beta1) / (2.0 + g)),
        e0.powf(ex.beta1 / (1.0 + g)) * t.powf(-1.0 / (1.0 + g)),
    ];
    let max = candidates.iter().copied().fold(0.0, f64::max);
    Ok(c * max * (1.0 + big_t).powf((1.0 + ex.beta2) / g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeGiorgiReport {
    pub k: f64,
    pub t: f64,
    pub big_t: f64,
    pub q: f64,
    pub levels: Vec<f64>,
    pub times: Vec<f64>,
    /// `E_n` for `h` and for `−h`.
    pub e_n: Vec<f64>,
    pub e_n_lower: Vec<f64>,
    /// `E₀ Q^{−n}` for each sign.
    pub e_n_star: Vec<f64>,
    pub e_n_star_lower: Vec<f64>,
    /// `ℰ_K(t, T)` for each sign, the `n → ∞` row.
    pub limit_row: [f64; 2],
    pub verdict: bool,
    /// `max |h|` over snapshots in `[t, T]`.
    pub measured_sup: f64,
}

/// Deepest level computed.
pub const DEGIORGI_MAX_N: usize = 12;

/// De Giorgi iteration `ℓ_n = K(1−2^{−n})`, `t_n = t(1−2^{−n})`,
/// `E_n = ℰ_{ℓ_n}(t_n, T)`, compared with `E₀Q^{−n}`, `Q = 2^{(γ+2)/β₁}`.
/// Run on `h` and on `−h`; the verdict needs both sequences below their
/// comparison sequences and both limit rows equal to zero.
#[allow(clippy::too_many_arguments)]
pub fn degiorgi_iterate(
    traj: &Trajectory,
    k: f64,
    t: f64,
    big_t: f64,
    p: f64,
    m: f64,
    c0: f64,
) -> Result<DeGiorgiReport> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("K = {k} must be positive")));
    }
    if !(t > 0.0 && t < big_t) {
        return Err(Error::InvalidArgument("need 0 < t < T".into()));
    }
    check_window(traj, 0.0, big_t)?;
    let ex = exponents(p, m)?;
    let q = 2f64.powf((ex.gamma + 2.0) / ex.beta1);
    let upper = LevelSetSeries::new(traj, 1.0);
    let lower = LevelSetSeries::new(traj, -1.0);
    ensure_samples(&upper, (t, big_t))?;
    degiorgi_with(&upper, &lower, k, t, big_t, p, q, c0)
}

#[allow(clippy::too_many_arguments)]
fn degiorgi_with(
    upper: &LevelSetSeries,
    lower: &LevelSetSeries,
    k: f64,
    t: f64,
    big_t: f64,
    p: f64,
    q: f64,
    c0: f64,
) -> Result<DeGiorgiReport> {
    let mut levels = Vec::new();
    let mut times = Vec::new();
    let mut seqs = [Vec::new(), Vec::new()];
    let mut stars = [Vec::new(), Vec::new()];
    let mut verdict = true;
    for n in 0..=DEGIORGI_MAX_N {
        let frac = 1.0 - 2f64.powi(-(n as i32));
        let (level, tn) = (k * frac, t * frac);
        levels.push(level);
        times.push(tn);
        let mut small = true;
        for (s, series) in [upper, lower].into_iter().enumerate() {
            let e = series.energy(level, tn, big_t, p, c0)?.total;
            let e0 = if n == 0 { e } else { seqs[s][0] };
            let star = e0 * q.powi(-(n as i32));
            if e > star * (1.0 + 1e-12) {
                verdict = false;
            }
            small &= e < 1e-14;
            seqs[s].push(e);
            stars[s].push(star);
        }
        if small {
            break;
        }
    }
    let limit_row = [
        upper.energy(k, t, big_t, p, c0)?.total,
        lower.energy(k, t, big_t, p, c0)?.total,
    ];
    verdict &= limit_row.iter().all(|e| *e == 0.0);
    let measured_sup = upper
        .times
        .iter()
        .zip(&upper.fields)
        .filter(|(s, _)| **s >= t - 1e-12 && **s <= big_t + 1e-12)
        .map(|(_, h)| h.max_abs())
        .fold(0.0, f64::max);
    let [e_n, e_n_lower] = seqs;
    let [e_n_star, e_n_star_lower] = stars;
    Ok(DeGiorgiReport {
        k,
        t,
        big_t,
        q,
        levels,
        times,
        e_n,
        e_n_lower,
        e_n_star,
        e_n_star_lower,
        limit_row,
        verdict,
        measured_sup,
    })
}

/// Smallest `C` (to 1% by bisection in `log C`) such that the De Giorgi
/// verdict holds at `K = predict_k(E₀, t, T, p, m, C)` on every member of
/// the corpus, where `E₀ = energy_e0` over `[0, T]`.
pub fn calibrate_degiorgi_constant(
    corpus: &[&Trajectory],
    t: f64,
    big_t: f64,
    p: f64,
    m: f64,
    c0: f64,
) -> Result<f64> {
    let ex = exponents(p, m)?;
    let q = 2f64.powf((ex.gamma + 2.0) / ex.beta1);
    let mut worst: f64 = 0.0;
    for traj in corpus {
        let e0 = energy_e0(traj, p, (0.0, big_t))?;
        let unit_k = predict_k(e0, t, big_t, p, m, 1.0)?;
        if unit_k == 0.0 {
            continue;
        }
        let upper = LevelSetSeries::new(traj, 1.0);
        let lower = LevelSetSeries::new(traj, -1.0);
        ensure_samples(&upper, (t, big_t))?;
        let holds = |c: f64| -> Result<bool> {
            Ok(degiorgi_with(&upper, &lower, c * unit_k, t, big_t, p, q, c0)?.verdict)
        };
        let mut hi = 1e-6;
        while !holds(hi)? {
            hi *= 4.0;
            if hi > 1e12 {
                return Err(Error::InvalidArgument(
                    "no calibration constant verifies the iteration".into(),
                ));
            }
        }
        let mut lo = hi / 4.0;
        if hi == 1e-6 {
            lo = 0.0;
        }
        while hi - lo > 0.01 * hi {
            let mid = if lo == 0.0 {
                hi / 4.0
            } else {
                (lo * hi).sqrt()
            };
            if holds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi < 1e-9 {
                break;
            }
        }
        worst = worst.max(hi);
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentBoundReport {
    pub l: f64,
    pub theta: f64,
    /// `q_{l,θ} + 0.01`.
    pub exponent: f64,
    /// `max_t ‖h(t)‖_{L¹_θ} / (1+t)^{exponent}`.
    pub c3: f64,
    /// Time of the sample that fixes `C₃`.
    pub binding_time: f64,
    pub samples: Vec<(f64, f64)>,
    pub holds: bool,
}

/// Envelope `‖h(t)‖_{L¹_θ} ≤ C₃(1+t)^{q_{l,θ}+0.01}` with one fitted `C₃`.
pub fn moment_bound_check(traj: &Trajectory, l: f64, theta: f64) -> Result<MomentBoundReport> {
    let exponent = q_ltheta(l, theta)? + 0.01;
    let samples: Vec<(f64, f64)> = traj
        .perturbations()
        .iter()
        .map(|(t, h)| (*t, lp_m_integral(h, 1.0, theta)))
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidArgument("trajectory has no snapshots".into()));
    }
    let (mut c3, mut binding_time) = (0.0, samples[0].0);
    for &(t, v) in &samples {
        let r = v / (1.0 + t).powf(exponent);
        if r > c3 {
            c3 = r;
            binding_time = t;
        }
    }
    let holds = c3.is_finite()
        && samples
            .iter()
            .all(|&(t, v)| v <= c3 * (1.0 + t).powf(exponent) * (1.0 + 1e-12));
    Ok(MomentBoundReport {
        l,
        theta,
        exponent,
        c3,
        binding_time,
        samples,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingReport {
    pub window: (f64, f64),
    pub samples: usize,
    /// Least-squares slope of `log ‖h‖_∞` against `log t`.
    pub slope: f64,
    /// `−1/(1+γ) − 0.15`.
    pub slope_floor: f64,
    pub slope_ok: bool,
    /// `max_t ‖h(t)‖_∞ / (1 + t^{−1/(1+γ)})`.
    pub envelope_c: f64,
    pub envelope_holds: bool,
}

/// Early-time fit of `‖h(t)‖_∞` against `C(1 + t^{−1/(1+γ)})` on
/// `[5·dt₁, t_max]`, `dt₁` the first step.
pub fn smoothing_fit(traj: &Trajectory, p: f64, m: f64, t_max: f64) -> Result<SmoothingReport> {
    let ex = exponents(p, m)?;
    let first_dt = traj
        .scalars
        .get(1)
        .map(|s| s.dt)
        .ok_or_else(|| Error::InvalidArgument("trajectory has no steps".into()))?;
    let t_min = 5.0 * first_dt;
    let pts: Vec<(f64, f64)> = traj
        .scalars
        .iter()
        .filter(|s| s.time >= t_min * (1.0 - 1e-12) && s.time <= t_max * (1.0 + 1e-12))
        .filter(|s| s.linf_h > 0.0)
        .map(|s| (s.time, s.linf_h))
        .collect();
    if pts.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "{} usable samples in [{t_min}, {t_max}], need 6",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, h)| h.ln()).collect();
    let nx = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nx;
    let my = ys.iter().sum::<f64>() / nx;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rate = 1.0 / (1.0 + ex.gamma);
    let slope_floor = -rate - 0.15;
    let env = |t: f64| 1.0 + t.powf(-rate);
    let envelope_c = pts.iter().map(|(t, h)| h / env(*t)).fold(0.0, f64::max);
    let envelope_holds = envelope_c.is_finite()
        && pts
            .iter()
            .all(|(t, h)| *h <= envelope_c * env(*t) * (1.0 + 1e-12));
    Ok(SmoothingReport {
        window: (t_min, t_max),
        samples: pts.len(),
        slope,
        slope_floor,
        slope_ok: slope >= slope_floor,
        envelope_c,
        envelope_holds,
    })
}

/// `(‖h‖_{L²₁}, ‖∇h‖_{L²₂})` at the snapshot nearest `t_query`, where
/// `‖g‖_{L²_k} = (∫|g|²⟨v⟩^k)^{1/2}`.
pub fn h1_smallness(traj: &Trajectory, t_query: f64) -> Result<(f64, f64)> {
    let snap = traj
        .nearest_snapshot(t_query)
        .ok_or_else(|| Error::InvalidArgument("trajectory has no snapshots".into()))?;
    let h = snap.f.sub(&crate::grid::maxwellian(traj.grid))?;
    Ok((
        lp_m_integral(&h, 2.0, 1.0).sqrt(),
        weighted_gradient_norm_sq(&h, 2.0).sqrt(),
    ))
}

/// `∫ ⟨v⟩^k |∇h|² dv`.
pub fn weighted_gradient_norm_sq(h: &Field, k: f64) -> f64 {
    let grad = spectral_gradient(h);
    let g = h.grid();
    (0..g.len())
        .map(|idx| norm_sq(grad.at(idx)) * bracket(g.velocity(idx)).powf(k))
        .sum::<f64>()
        * g.cell_volume()
}

/// Constant of `sup_{t<s<T} ‖∇h(s)‖²_{L²_k} ≤ C ε (1 + 1/t)` on one run,
/// with `ε = sup |h|` over the run.
pub fn gradient_regularity_constant(traj: &Trajectory, t: f64, k: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let hs = traj.perturbations();
    let eps = hs.iter().map(|(_, h)| h.max_abs()).fold(0.0, f64::max);
    if eps == 0.0 {
        return Ok(0.0);
    }
    let sup = hs
        .iter()
        .filter(|(s, _)| *s >= t)
        .map(|(_, h)| weighted_gradient_norm_sq(h, k))
        .fold(0.0, f64::max);
    Ok(sup / (eps * (1.0 + 1.0 / t)))
}
