use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use landau_core::io::{parse_config, write_trajectory};
use landau_core::{run, Error, InitialDatum, SimConfig};

use crate::manifest::{now, RunManifest};
use crate::Failure;

#[derive(clap::Args)]
pub struct Args {
    /// Base config; its datum mode (if perturbed) and remaining keys are kept.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub amplitudes: Vec<f64>,
    /// Grid sizes (defaults to the config's).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Lebesgue exponents (defaults to the config's).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Concurrent runs.
    #[arg(long, default_value_t = 2)]
    pub workers: usize,
}

struct Outcome {
    name: String,
    amplitude: f64,
    n: usize,
    p: f64,
    end_time: f64,
    final_lp: f64,
    final_linf: f64,
    abort: Option<String>,
}

pub fn execute(args: &Args) -> Result<(), Failure> {
    let base = parse_config(&args.config)?;
    if args.workers == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let mode = match base.initial {
        InitialDatum::PerturbedMaxwellian { mode, .. } => mode,
        _ => 1.0,
    };
    let ns = if args.n.is_empty() {
        vec![base.n]
    } else {
        args.n.clone()
    };
    let ps = if args.p.is_empty() {
        vec![base.p]
    } else {
        args.p.clone()
    };
    let mut jobs = Vec::new();
    for &amplitude in &args.amplitudes {
        for &n in &ns {
            for &p in &ps {
                let cfg = SimConfig {
                    n,
                    p,
                    initial: InitialDatum::PerturbedMaxwellian { amplitude, mode },
                    ..base.clone()
                };
                cfg.validate()?;
                jobs.push((format!("a{amplitude}_n{n}_p{p}"), amplitude, cfg));
            }
        }
    }
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Outcome, Error>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..args.workers.min(jobs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((name, amplitude, cfg)) = jobs.get(i) else {
                    break;
                };
                let dir = args.out.join(name);
                let started = now();
                let outcome = run(cfg).and_then(|traj| {
                    write_trajectory(&traj, &dir)?;
                    RunManifest::new(cfg, started, &dir, &traj).write(&dir)?;
                    let last = traj.scalars.last().expect("initial row");
                    Ok(Outcome {
                        name: name.clone(),
                        amplitude: *amplitude,
                        n: cfg.n,
                        p: cfg.p,
                        end_time: traj.end_time(),
                        final_lp: last.lp_p,
                        final_linf: last.linf_h,
                        abort: traj.abort.map(|a| a.reason),
                    })
                });
                eprintln!("finished {name}");
                results.lock().expect("no poisoned workers")[i] = Some(outcome);
            });
        }
    });

    let mut table = String::from("run,amplitude,n,p,end_time,final_lp_p,final_linf_h,aborted\n");
    let mut failures = Vec::new();
    for r in results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .flatten()
    {
        match r {
            Ok(o) => {
                table.push_str(&format!(
                    "{},{:?},{},{:?},{:?},{:?},{:?},{}\n",
                    o.name,
                    o.amplitude,
                    o.n,
                    o.p,
                    o.end_time,
                    o.final_lp,
                    o.final_linf,
                    o.abort.is_some()
                ));
                if let Some(reason) = o.abort {
                    failures.push(format!("{}: {reason}", o.name));
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    let path = args.out.join("sweep.csv");
    fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    print!("{table}");
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failures.join("; ")))
    }
}
