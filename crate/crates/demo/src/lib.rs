//! WebAssembly bindings for the browser demo in `www/`: an exponent
//! explorer, a small relaxation run and coefficient slices.

use landau_core::analysis::predict_k;
use landau_core::grid::maxwellian;
use landau_core::solver::{initial_datum, Solver};
use landau_core::{exponents, make_grid, CoefficientSolver, Field, InitialDatum, SimConfig};
use wasm_bindgen::prelude::*;

fn js_err(e: landau_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[γ, β₀, β₁, β₂, α, q, m_threshold]` for `(p, m)`.
#[wasm_bindgen(js_name = exponentSet)]
pub fn exponent_set(p: f64, m: f64) -> Result<Vec<f64>, JsError> {
    let e = exponents(p, m).map_err(js_err)?;
    Ok(vec![
        e.gamma,
        e.beta0,
        e.beta1,
        e.beta2,
        e.alpha,
        e.q,
        e.m_threshold,
    ])
}

/// `K(t)` at `points` log-spaced times in `[10⁻³T, T]`, flattened as `t, K`
/// pairs.
#[wasm_bindgen(js_name = levelCeilingCurve)]
pub fn level_ceiling_curve(
    p: f64,
    m: f64,
    e0: f64,
    big_t: f64,
    c: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points.max(2) {
        let t = big_t * 1e-3f64.powf(1.0 - i as f64 / (points.max(2) - 1) as f64);
        out.push(t);
        out.push(predict_k(e0, t, big_t, p, m, c).map_err(js_err)?);
    }
    Ok(out)
}

fn datum(kind: &str, strength: f64) -> Result<InitialDatum, JsError> {
    Ok(match kind {
        "maxwellian" => InitialDatum::Maxwellian,
        "anisotropic" => InitialDatum::AnisotropicGaussian {
            temperatures: [1.0 - strength, 1.0, 1.0 + strength],
        },
        "two_bump" => InitialDatum::TwoBump {
            separation: 1.0 + 2.0 * strength,
            weights: [0.5, 0.5],
        },
        "perturbed" => InitialDatum::PerturbedMaxwellian {
            amplitude: strength,
            mode: 1.0,
        },
        other => return Err(JsError::new(&format!("unknown datum {other:?}"))),
    })
}

fn mid_plane(f: &Field) -> Vec<f64> {
    let g = f.grid();
    let n = g.n();
    let k = n / 2;
    (0..n * n)
        .map(|ij| f.values()[g.index(ij / n, ij % n, k)])
        .collect()
}

/// A relaxation run that the page advances a few steps per frame.
#[wasm_bindgen]
pub struct Relaxation {
    solver: Solver,
    mu: Field,
    history: Vec<f64>,
}

#[wasm_bindgen]
impl Relaxation {
    /// `kind` is one of `maxwellian`, `anisotropic`, `two_bump`, `perturbed`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, extent: f64, kind: &str, strength: f64) -> Result<Relaxation, JsError> {
        let mut cfg = SimConfig::new(n, extent, 1e9, datum(kind, strength)?);
        cfg.p = 2.0;
        let solver = Solver::new(cfg).map_err(js_err)?;
        let mu = maxwellian(*solver.field().grid());
        let mut run = Relaxation {
            solver,
            mu,
            history: Vec::new(),
        };
        run.record();
        Ok(run)
    }

    fn record(&mut self) {
        let h = self.solver.field().sub(&self.mu).expect("same grid");
        let s = self.solver.scalars(0.0);
        self.history
            .extend([self.solver.time(), h.max_abs(), s.lp_p.sqrt(), s.entropy]);
    }

    /// Takes `steps` stable steps; returns the new time.
    pub fn advance(&mut self, steps: usize) -> Result<f64, JsError> {
        for _ in 0..steps {
            let dt = self.solver.next_dt();
            self.solver.advance(dt).map_err(js_err)?;
            self.record();
        }
        Ok(self.solver.time())
    }

    pub fn time(&self) -> f64 {
        self.solver.time()
    }

    /// Rows of `(t, ‖h‖_∞, ‖h‖₂, ∫f log f)`, flattened.
    pub fn history(&self) -> Vec<f64> {
        self.history.clone()
    }

    /// `h = f − μ` on the plane `v₃ = 0`, row-major `n × n`.
    #[wasm_bindgen(js_name = perturbationSlice)]
    pub fn perturbation_slice(&self) -> Vec<f64> {
        mid_plane(&self.solver.field().sub(&self.mu).expect("same grid"))
    }

    pub fn n(&self) -> usize {
        self.solver.field().grid().n()
    }
}

/// Mid-plane slice of a coefficient of the chosen datum: `component` is
/// `a`, `A11`, `A12`, `A33` or `grad_a1`.
#[wasm_bindgen(js_name = coefficientSlice)]
pub fn coefficient_slice(
    n: usize,
    extent: f64,
    kind: &str,
    strength: f64,
    component: &str,
) -> Result<Vec<f64>, JsError> {
    let grid = make_grid(n, extent).map_err(js_err)?;
    let cfg = SimConfig::new(n, extent, 1.0, datum(kind, strength)?);
    let f = initial_datum(&cfg).map_err(js_err)?;
    let c = CoefficientSolver::new(grid).compute(&f).map_err(js_err)?;
    let field = match component {
        "a" => &c.a,
        "A11" => &c.a_tensor.components()[0],
        "A33" => &c.a_tensor.components()[2],
        "A12" => &c.a_tensor.components()[3],
        "grad_a1" => c.grad_a.component(0),
        other => return Err(JsError::new(&format!("unknown component {other:?}"))),
    };
    Ok(mid_plane(field))
}
