use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use landau_core::analysis::{
    calibrate_degiorgi_constant, degiorgi_iterate, energy_e0, level_set_energy, measured_c0,
    moment_bound_check, ode_barrier_check, predict_k, smoothing_fit,
};
use landau_core::io::read_trajectory;
use landau_core::{exponents, Error, Trajectory};
use serde_json::{json, Value};

use crate::Failure;

#[derive(clap::Args)]
pub struct Args {
    /// Trajectory directory written by `run`.
    pub dir: PathBuf,
    /// Lebesgue exponent (defaults to the run's).
    #[arg(long)]
    pub p: Option<f64>,
    /// Moment weight.
    #[arg(long, default_value_t = 55.0)]
    pub m: f64,
    /// Start of the De Giorgi window (defaults to T/5).
    #[arg(long)]
    pub t: Option<f64>,
    /// End of the analysis window (defaults to the run's end).
    #[arg(long = "T")]
    pub big_t: Option<f64>,
    /// ODE-barrier threshold (defaults to 4·‖h(0)‖_p^p).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Directory for the CSV tables (defaults to DIR/diagnostics).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn section<T>(r: Result<T, Error>, f: impl FnOnce(T) -> Value) -> Value {
    match r {
        Ok(x) => f(x),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<(), Error> {
    let mut text = format!("{header}\n");
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(text, "{}", line.join(","));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn execute(args: &Args) -> Result<(), Failure> {
    if !args.dir.is_dir() {
        return Err(Failure::Usage(format!(
            "{} is not a trajectory directory",
            args.dir.display()
        )));
    }
    let traj = read_trajectory(&args.dir)?;
    let p = args.p.unwrap_or(traj.p);
    let m = args.m;
    let big_t = args.big_t.unwrap_or_else(|| traj.end_time());
    let t = args.t.unwrap_or(0.2 * big_t);
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.dir.join("diagnostics"));
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let c0 = match measured_c0(&traj) {
        c if c.is_finite() => c,
        _ => 0.0,
    };
    let report = build_report(&traj, p, m, t, big_t, c0, args.eps, &out)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    traj: &Trajectory,
    p: f64,
    m: f64,
    t: f64,
    big_t: f64,
    c0: f64,
    eps: Option<f64>,
    out: &Path,
) -> Result<Value, Error> {
    let hs = traj.perturbations();
    let sup_h = hs.iter().map(|(_, h)| h.max_abs()).fold(0.0, f64::max);

    let exps = section(exponents(p, m), |e| {
        json!({ "gamma": e.gamma, "beta0": e.beta0, "beta1": e.beta1, "beta2": e.beta2,
                "alpha": e.alpha, "q": e.q, "degenerate": e.degenerate })
    });

    let e0_value = section(energy_e0(traj, p, (0.0, big_t)), Value::from);

    let mut level_rows = Vec::new();
    let mut levels = Vec::new();
    for frac in [0.0, 0.25, 0.5, 0.75] {
        let level = frac * sup_h;
        levels.push(section(
            level_set_energy(traj, level, (t, big_t), p, c0),
            |r| {
                level_rows.push(vec![r.level, r.sup_term, r.dissipation_term, r.total]);
                json!({ "level": r.level, "sup": r.sup_term, "dissipation": r.dissipation_term,
                    "total": r.total })
            },
        ));
    }
    write_csv(
        &out.join("level_sets.csv"),
        "level,sup,dissipation,total",
        &level_rows,
    )?;

    let degiorgi = section(
        calibrate_degiorgi_constant(&[traj], t, big_t, p, m, c0).and_then(|c| {
            let k = predict_k(energy_e0(traj, p, (0.0, big_t))?, t, big_t, p, m, c)?;
            Ok((c, degiorgi_iterate(traj, k, t, big_t, p, m, c0)?))
        }),
        |(c, r)| {
            let rows: Vec<Vec<f64>> = (0..r.e_n.len())
                .map(|i| {
                    vec![
                        i as f64,
                        r.levels[i],
                        r.times[i],
                        r.e_n[i],
                        r.e_n_star[i],
                        r.e_n_lower[i],
                        r.e_n_star_lower[i],
                    ]
                })
                .collect();
            let written = write_csv(
                &out.join("degiorgi.csv"),
                "n,level,time,e_n,e_n_star,e_n_lower,e_n_star_lower",
                &rows,
            );
            json!({ "c": c, "k": r.k, "q": r.q, "verdict": r.verdict,
                    "measured_sup": r.measured_sup, "limit_row": r.limit_row,
                    "e_n": r.e_n, "e_n_lower": r.e_n_lower,
                    "csv_error": written.err().map(|e| e.to_string()) })
        },
    );

    let mut moment_rows = Vec::new();
    let mut moments = Vec::new();
    for theta in [0.0, 2.0, 4.0] {
        moments.push(section(moment_bound_check(traj, m, theta), |r| {
            for &(s, v) in &r.samples {
                moment_rows.push(vec![theta, s, v, r.c3 * (1.0 + s).powf(r.exponent)]);
            }
            json!({ "theta": theta, "exponent": r.exponent, "c3": r.c3,
                    "binding_time": r.binding_time, "holds": r.holds })
        }));
    }
    write_csv(
        &out.join("moments.csv"),
        "theta,time,value,envelope",
        &moment_rows,
    )?;

    let smoothing = section(smoothing_fit(traj, p, m, big_t.min(0.5)), |r| {
        json!({ "window": [r.window.0, r.window.1], "samples": r.samples, "slope": r.slope,
                "slope_floor": r.slope_floor, "slope_ok": r.slope_ok, "c": r.envelope_c,
                "envelope_holds": r.envelope_holds })
    });
    let linf_rows: Vec<Vec<f64>> = traj
        .scalars
        .iter()
        .map(|s| vec![s.time, s.linf_h, s.lp_p])
        .collect();
    write_csv(&out.join("norms.csv"), "time,linf_h,lp_p", &linf_rows)?;

    let eps = eps.unwrap_or_else(|| 4.0 * traj.scalars.first().map_or(0.0, |s| s.lp_p));
    let barrier = section(ode_barrier_check(traj, p, m, eps), |r| {
        json!({ "eps": r.eps, "y0": r.y0, "c0": r.c0, "c_tilde": r.c_tilde, "m_bar": r.m_bar,
                "t0": if r.t0_fit.is_finite() { Value::from(r.t0_fit) } else { Value::Null },
                "exit_time": r.exit_time, "holds_until_t0": r.holds_until_t0,
                "integral_form_holds": r.integral_form_holds, "max_violation": r.max_violation })
    });

    Ok(json!({
        "trajectory": {
            "n": traj.grid.n(), "L": traj.grid.extent(), "p_run": traj.p,
            "end_time": traj.end_time(), "steps": traj.scalars.len().saturating_sub(1),
            "snapshots": traj.snapshots.len(),
            "abort": traj.abort.as_ref().map(|a| a.reason.clone()),
        },
        "parameters": { "p": p, "m": m, "t": t, "T": big_t, "c0": c0 },
        "exponents": exps,
        "e0": e0_value,
        "level_sets": levels,
        "degiorgi": degiorgi,
        "moment_bounds": moments,
        "smoothing": smoothing,
        "ode_barrier": barrier,
        "csv_dir": out,
    }))
}
