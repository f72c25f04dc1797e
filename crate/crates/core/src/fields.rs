//! Weighted norms, moments, entropy and level-set functionals.

use crate::error::{Error, Result};
use crate::grid::{bracket, norm_sq, spectral_gradient, Field};

/// Lebesgue exponent `p ∈ [1, ∞]` and weight exponent `m` of `L^p_m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormRequest {
    pub p: f64,
    pub m: f64,
}

impl NormRequest {
    pub fn new(p: f64, m: f64) -> Result<Self> {
        let req = NormRequest { p, m };
        req.validate()?;
        Ok(req)
    }

    fn validate(&self) -> Result<()> {
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "norm exponent p = {} must be at least 1",
                self.p
            )));
        }
        if self.p.is_infinite() && self.m != 0.0 {
            return Err(Error::InvalidArgument(
                "weighted sup norm (p = inf, m != 0) is not supported".into(),
            ));
        }
        Ok(())
    }
}

/// `∫ |f|^p ⟨v⟩^m dv` without the final root; finite `p` only.
pub fn lp_m_integral(field: &Field, p: f64, m: f64) -> f64 {
    let g = field.grid();
    let sum: f64 = field
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &x)| {
            let w = if m == 0.0 {
                1.0
            } else {
                bracket(g.velocity(idx)).powf(m)
            };
            x.abs().powf(p) * w
        })
        .sum();
    sum * g.cell_volume()
}

/// `‖f‖_{L^p_m} = (∫ |f|^p ⟨v⟩^m dv)^{1/p}`; at `p = ∞` the plain max norm.
pub fn lp_m_norm(field: &Field, req: NormRequest) -> Result<f64> {
    req.validate()?;
    if req.p.is_infinite() {
        return Ok(field.max_abs());
    }
    Ok(lp_m_integral(field, req.p, req.m).powf(1.0 / req.p))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentVector {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

/// `∫ (1, v, |v|²) f dv`.
pub fn moments(field: &Field) -> MomentVector {
    let g = field.grid();
    let mut acc = [0.0f64; 5];
    for (idx, &x) in field.values().iter().enumerate() {
        let v = g.velocity(idx);
        acc[0] += x;
        acc[1] += v[0] * x;
        acc[2] += v[1] * x;
        acc[3] += v[2] * x;
        acc[4] += norm_sq(v) * x;
    }
    let w = g.cell_volume();
    MomentVector {
        mass: acc[0] * w,
        momentum: [acc[1] * w, acc[2] * w, acc[3] * w],
        energy: acc[4] * w,
    }
}

const ENTROPY_FLOOR: f64 = 1e-300;

fn check_nonnegative(field: &Field) -> Result<()> {
    let max_abs = field.max_abs();
    for (index, &value) in field.values().iter().enumerate() {
        if value < -1e-12 * max_abs {
            return Err(Error::NegativeDensity {
                index,
                value,
                max_abs,
            });
        }
    }
    Ok(())
}

fn entropy_with(field: &Field, g: impl Fn(f64) -> f64) -> Result<f64> {
    check_nonnegative(field)?;
    let sum: f64 = field
        .values()
        .iter()
        .filter(|&&x| x > ENTROPY_FLOOR)
        .map(|&x| x * g(x.ln()))
        .sum();
    Ok(sum * field.grid().cell_volume())
}

/// `∫ f log f dv` with `0 log 0 = 0`. Tiny negative round-off is ignored;
/// values below `-1e-12·max|f|` are an error.
pub fn boltzmann_entropy(field: &Field) -> Result<f64> {
    entropy_with(field, |l| l)
}

/// `∫ f |log f| dv`.
pub fn abs_log_entropy(field: &Field) -> Result<f64> {
    entropy_with(field, f64::abs)
}

/// Pointwise `max(h − ℓ, 0)`.
pub fn level_set_plus(h: &Field, level: f64) -> Result<Field> {
    if level.is_nan() || level < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "level {level} must be non-negative"
        )));
    }
    Ok(h.map(|x| (x - level).max(0.0)))
}

/// `∫ ⟨v⟩^{-3} |∇(|h|^{p/2})|² dv` with a spectral gradient.
pub fn weighted_gradient_energy(h: &Field, p: f64) -> f64 {
    let g = h.map(|x| x.abs().powf(0.5 * p));
    let grad = spectral_gradient(&g);
    let grid = h.grid();
    let sum: f64 = (0..grid.len())
        .map(|idx| norm_sq(grad.at(idx)) * bracket(grid.velocity(idx)).powi(-3))
        .sum();
    sum * grid.cell_volume()
}

/// Edge-based variant of [`weighted_gradient_energy`]: forward differences
/// along every lattice edge (no wrap), weighted at the edge midpoint.
/// Suited to Lipschitz inputs such as level-set truncations, and monotone
/// under pointwise truncation.
pub fn edge_gradient_energy(h: &Field, p: f64) -> f64 {
    let grid = h.grid();
    let n = grid.n();
    let dv = grid.spacing();
    let g: Vec<f64> = h.values().iter().map(|x| x.abs().powf(0.5 * p)).collect();
    let mut sum = 0.0;
    for idx in 0..grid.len() {
        let node = grid.unravel(idx);
        let v = grid.velocity(idx);
        for axis in 0..3 {
            if node[axis] + 1 == n {
                continue;
            }
            let mut next = node;
            next[axis] += 1;
            let d = g[grid.index(next[0], next[1], next[2])] - g[idx];
            if d == 0.0 {
                continue;
            }
            let mut mid = v;
            mid[axis] += 0.5 * dv;
            sum += d * d * bracket(mid).powi(-3);
        }
    }
    sum * dv
}

/// `(‖⟨v⟩^{k/2} h‖₂² + ‖∇(⟨v⟩^{k/2} h)‖₂²)^{1/2}`.
pub fn weighted_h1_norm(h: &Field, k: f64) -> f64 {
    let g = h.map_with_velocity(|v, x| bracket(v).powf(0.5 * k) * x);
    let grad = spectral_gradient(&g);
    let l2 = lp_m_integral(&g, 2.0, 0.0);
    let grid = h.grid();
    let d2: f64 = (0..grid.len())
        .map(|idx| norm_sq(grad.at(idx)))
        .sum::<f64>()
        * grid.cell_volume();
    (l2 + d2).sqrt()
}

/// Ratio of the two sides of the weighted Sobolev inequality
/// `(∫|g|⁶⟨v⟩^{-9})^{1/3} ≤ C₁∫|∇g|²⟨v⟩^{-3} + C₂(∫|g|^s)^{2/s}` with
/// `C₁ = C₂ = 1`.
pub fn sobolev_ratio(g: &Field, s: f64) -> Result<f64> {
    if !(1.0..=6.0).contains(&s) {
        return Err(Error::InvalidArgument(format!(
            "s = {s} must lie in [1, 6]"
        )));
    }
    if g.max_abs() == 0.0 {
        return Err(Error::InvalidArgument("g is identically zero".into()));
    }
    let lhs = lp_m_integral(g, 6.0, -9.0).powf(1.0 / 3.0);
    let grad = spectral_gradient(g);
    let grid = g.grid();
    let dirichlet: f64 = (0..grid.len())
        .map(|idx| norm_sq(grad.at(idx)) * bracket(grid.velocity(idx)).powi(-3))
        .sum::<f64>()
        * grid.cell_volume();
    let lebesgue = lp_m_integral(g, s, 0.0).powf(2.0 / s);
    Ok(lhs / (dirichlet + lebesgue))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, maxwellian, Grid};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn g48() -> Grid {
        make_grid(48, 8.0).unwrap()
    }

    #[test]
    fn norms_of_maxwellian() {
        let mu = maxwellian(g48());
        let one = lp_m_norm(&mu, NormRequest::new(1.0, 0.0).unwrap()).unwrap();
        assert!((one - 1.0).abs() < 1e-8);
        let two = lp_m_norm(&mu, NormRequest::new(2.0, 0.0).unwrap()).unwrap();
        let exact = (4.0 * PI).powf(-0.75);
        assert!((two - exact).abs() < 1e-6, "{two} vs {exact}");
        assert!((exact - 0.149828).abs() < 1e-6);
    }

    #[test]
    fn norm_requests_validate() {
        assert!(NormRequest::new(0.5, 0.0).is_err());
        assert!(NormRequest::new(f64::INFINITY, 1.0).is_err());
        let z = Field::zeros(make_grid(8, 4.0).unwrap());
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_m_norm(&z, NormRequest { p, m: 0.0 }).unwrap(), 0.0);
        }
    }

    #[test]
    fn maxwellian_moments() {
        let mu = maxwellian(g48());
        let m = moments(&mu);
        assert!((m.mass - 1.0).abs() < 1e-6);
        assert!(m.momentum.iter().all(|x| x.abs() < 1e-6));
        assert!((m.energy - 3.0).abs() < 1e-6);
        let m2 = moments(&mu.scaled(2.0));
        assert!((m2.mass - 2.0).abs() < 2e-6 && (m2.energy - 6.0).abs() < 2e-6);
    }

    #[test]
    fn shifted_maxwellian_moments() {
        let g = make_grid(48, 10.0).unwrap();
        let c = (2.0 * PI).powf(-1.5);
        let f = Field::from_fn(g, |v| c * (-0.5 * norm_sq([v[0] - 1.0, v[1], v[2]])).exp());
        let m = moments(&f);
        assert!((m.mass - 1.0).abs() < 1e-5);
        assert!((m.momentum[0] - 1.0).abs() < 1e-5);
        assert!(m.momentum[1].abs() < 1e-5 && m.momentum[2].abs() < 1e-5);
        assert!((m.energy - 4.0).abs() < 1e-5);
    }

    #[test]
    fn entropy_closed_forms() {
        let mu = maxwellian(g48());
        let s = boltzmann_entropy(&mu).unwrap();
        let exact = -1.5 * (1.0 + (2.0 * PI).ln());
        assert!((s - exact).abs() < 1e-5, "{s} vs {exact}");
        let s2 = boltzmann_entropy(&mu.scaled(2.0)).unwrap();
        assert!((s2 - (2.0 * s + 2.0 * 2f64.ln())).abs() < 1e-4);
        assert!(abs_log_entropy(&mu).unwrap() >= s.abs() - 1e-12);
    }

    #[test]
    fn entropy_of_unit_cube_indicator() {
        let g = make_grid(8, 4.0).unwrap();
        let f = Field::from_fn(g, |v| {
            if v.iter().all(|&x| x == 0.0) {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(boltzmann_entropy(&f).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rejects_negative_density() {
        let g = make_grid(8, 4.0).unwrap();
        let mut f = Field::constant(g, 1.0);
        f.values_mut()[5] = -0.1;
        assert!(matches!(
            boltzmann_entropy(&f),
            Err(Error::NegativeDensity { index: 5, .. })
        ));
        f.values_mut()[5] = -1e-14;
        assert!(boltzmann_entropy(&f).is_ok());
    }

    #[test]
    fn level_set_basics() {
        let g = make_grid(8, 4.0).unwrap();
        let h = Field::from_fn(g, |v| v[0] - 0.5 * v[1]);
        let plus = level_set_plus(&h, 0.0).unwrap();
        for (a, b) in plus.values().iter().zip(h.values()) {
            assert_eq!(*a, b.max(0.0));
        }
        assert_eq!(level_set_plus(&h, h.max()).unwrap().max_abs(), 0.0);
        assert!(level_set_plus(&h, -1.0).is_err());
    }

    #[test]
    fn gradient_energy_trivial_cases() {
        let g = make_grid(16, 4.0).unwrap();
        assert_eq!(weighted_gradient_energy(&Field::zeros(g), 2.0), 0.0);
        assert!(weighted_gradient_energy(&Field::constant(g, 3.0), 2.0) < 1e-24);
        assert_eq!(edge_gradient_energy(&Field::constant(g, 3.0), 2.0), 0.0);
    }

    #[test]
    fn gradient_energy_of_maxwellian() {
        let g = g48();
        let mu = maxwellian(g);
        let got = weighted_gradient_energy(&mu, 2.0);
        let c = (2.0 * PI).powf(-1.5);
        let want: f64 = (0..g.len())
            .map(|idx| {
                let v = g.velocity(idx);
                let m = c * (-0.5 * norm_sq(v)).exp();
                norm_sq(v) * m * m * bracket(v).powi(-3)
            })
            .sum::<f64>()
            * g.cell_volume();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        // Edge differences converge to the same integral at second order.
        assert!((edge_gradient_energy(&mu, 2.0) - want).abs() < 2e-2 * want);
    }

    #[test]
    fn weighted_h1_reduces_and_matches_oracle() {
        let g = g48();
        let mu = maxwellian(g);
        assert_eq!(weighted_h1_norm(&Field::zeros(g), 2.0), 0.0);
        let grad = spectral_gradient(&mu);
        let plain = (lp_m_integral(&mu, 2.0, 0.0)
            + (0..g.len()).map(|i| norm_sq(grad.at(i))).sum::<f64>() * g.cell_volume())
        .sqrt();
        assert!((weighted_h1_norm(&mu, 0.0) - plain).abs() < 1e-14);

        let c = (2.0 * PI).powf(-1.5);
        let oracle: f64 = (0..g.len())
            .map(|idx| {
                let v = g.velocity(idx);
                let m = c * (-0.5 * norm_sq(v)).exp();
                let b = bracket(v);
                // ∇(⟨v⟩μ) = v μ (1/⟨v⟩ − ⟨v⟩)
                let s = m * (1.0 / b - b);
                let val = b * m;
                val * val + norm_sq(v) * s * s
            })
            .sum::<f64>()
            * g.cell_volume();
        assert!((weighted_h1_norm(&mu, 2.0) - oracle.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn sobolev_ratio_invariance_and_errors() {
        let g = make_grid(32, 8.0).unwrap();
        let mu = maxwellian(g);
        let r = sobolev_ratio(&mu, 2.0).unwrap();
        assert!(r.is_finite() && r > 0.0);
        for e in -4..=4 {
            let lam = 2f64.powi(e);
            let rl = sobolev_ratio(&mu.scaled(lam), 2.0).unwrap();
            assert!((rl - r).abs() <= 1e-10 * r);
        }
        assert!(sobolev_ratio(&Field::zeros(g), 2.0).is_err());
        assert!(sobolev_ratio(&mu, 0.5).is_err());
        assert!(sobolev_ratio(&mu, 7.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norm_homogeneity(seed in 0u64..1000, lam in -5.0f64..5.0, p in 1.0f64..6.0, m in -3.0f64..3.0) {
            let g = make_grid(8, 4.0).unwrap();
            let f = Field::from_fn(g, |v| ((v[0] * 1.3 + v[1] * 0.7 + seed as f64).sin() + 0.2 * v[2]).tanh());
            let req = NormRequest::new(p, m).unwrap();
            let a = lp_m_norm(&f.scaled(lam), req).unwrap();
            let b = lam.abs() * lp_m_norm(&f, req).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn moments_are_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, s in 0.0f64..10.0) {
            let g = make_grid(8, 4.0).unwrap();
            let f = Field::from_fn(g, |v| (-(v[0] - 1.0).powi(2) - v[1] * v[1] - v[2] * v[2]).exp());
            let h = Field::from_fn(g, |v| (s + v[0] * v[2]).cos());
            let lhs = moments(&f.combine(alpha, &h, beta).unwrap());
            let (mf, mh) = (moments(&f), moments(&h));
            let tol = 1e-12 * (1.0 + mf.energy.abs() + mh.energy.abs()) * 8.0;
            prop_assert!((lhs.mass - (alpha * mf.mass + beta * mh.mass)).abs() < tol);
            prop_assert!((lhs.energy - (alpha * mf.energy + beta * mh.energy)).abs() < tol * 50.0);
            for c in 0..3 {
                prop_assert!((lhs.momentum[c] - (alpha * mf.momentum[c] + beta * mh.momentum[c])).abs() < tol * 10.0);
            }
        }

        #[test]
        fn level_sets_are_monotone(l1 in 0.0f64..2.0, dl in 0.0f64..2.0, s in 0.0f64..5.0) {
            let g = make_grid(8, 4.0).unwrap();
            let h = Field::from_fn(g, |v| 2.0 * (s + v[0] - v[1] * v[2]).sin());
            let a = level_set_plus(&h, l1).unwrap();
            let b = level_set_plus(&h, l1 + dl).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!(y <= x);
            }
        }

        #[test]
        fn truncation_interpolation(k in 0.0f64..1.0, gap in 1e-3f64..1.0, alpha_idx in 0usize..3, s in 0.0f64..5.0) {
            // h_ℓ⁺ ≤ (ℓ − k)^{-α} (h_k⁺)^{1+α}
            let alpha = [0.5, 1.0, 2.0][alpha_idx];
            let l = k + gap;
            let g = make_grid(8, 4.0).unwrap();
            let h = Field::from_fn(g, |v| 2.0 * (s + 0.9 * v[0] + v[1] * v[2]).sin());
            let hl = level_set_plus(&h, l).unwrap();
            let hk = level_set_plus(&h, k).unwrap();
            for (a, b) in hl.values().iter().zip(hk.values()) {
                let bound = gap.powf(-alpha) * b.powf(1.0 + alpha);
                prop_assert!(*a <= bound * (1.0 + 1e-12) + 1e-300);
            }
        }
    }
}
