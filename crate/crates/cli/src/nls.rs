use std::path::Path;
use std::time::Instant;

use anyhow::bail;
use parareal_lab::artifacts::{write_state, write_sweep_csv, RunManifest, SweepRow};
use parareal_lab::cost::speedup;
use parareal_lab::pde::{parareal_integrate, relative_error, serial_integrate};
use parareal_lab::{CostModel, Error, ImexTableau, IterationPolicy, NlsProblem, PararealRunConfig, RunStats, SpectralState};
use serde::Serialize;

use crate::args::{load_method, BlockArgs, Format, NlsRunArgs, NlsSweepArgs, PolicyArgs};
use crate::output::{emit, emit_json};

#[derive(Serialize)]
struct Methods {
    coarse: String,
    fine: String,
    reference: Option<String>,
}

#[derive(Serialize)]
struct Block {
    #[serde(rename = "Np")]
    np: usize,
    #[serde(rename = "Nf")]
    nf: usize,
    #[serde(rename = "Ng")]
    ng: usize,
    #[serde(rename = "NT")]
    nt: usize,
}

#[derive(Serialize)]
struct NlsConfig<'a> {
    problem: &'a NlsProblem,
    methods: Methods,
    block: Option<Block>,
    #[serde(rename = "Nb")]
    nb: Option<usize>,
    #[serde(rename = "Ns")]
    ns: Vec<usize>,
    policy: Option<IterationPolicy>,
    serial: bool,
    reference_ns: Option<usize>,
    threads: usize,
    out: &'a Path,
}

fn block_of(b: &BlockArgs, np: usize) -> Block {
    Block {
        np,
        nf: b.nf,
        ng: b.ng,
        nt: np * b.nf,
    }
}

fn require_policy(p: &PolicyArgs) -> anyhow::Result<IterationPolicy> {
    match p.policy() {
        Some(policy) => Ok(policy),
        None => bail!("a Parareal run needs --k or --adaptive with --kmax"),
    }
}

fn run_config(coarse: &ImexTableau, fine: &ImexTableau, b: &BlockArgs, np: usize, nb: usize, policy: IterationPolicy) -> anyhow::Result<PararealRunConfig> {
    let cfg = PararealRunConfig {
        coarse: coarse.clone(),
        fine: fine.clone(),
        np,
        nf: b.nf,
        ng: b.ng,
        nb,
        policy,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Number of blocks for `ns` total steps with `nt` steps per block.
fn blocks_for(ns: usize, nt: usize) -> anyhow::Result<usize> {
    if ns == 0 || ns % nt != 0 {
        bail!("Ns = {ns} is not a positive multiple of NT = {nt}");
    }
    Ok(ns / nt)
}

#[derive(Serialize)]
struct RunResult {
    t: f64,
    #[serde(rename = "Ns")]
    ns: usize,
    runtime_s: f64,
    stats: Option<RunStats>,
    #[serde(rename = "K_bar")]
    k_bar: Option<f64>,
    relative_error: Option<f64>,
}

pub fn run(a: &NlsRunArgs, out: &Path, manifest: &mut RunManifest) -> anyhow::Result<()> {
    let problem = a.problem.problem()?;
    let (coarse, fine) = (load_method(&a.methods.coarse)?, load_method(&a.methods.fine)?);
    let reference_method = match a.reference_ns {
        Some(_) => Some(load_method(&a.reference_method)?),
        None => None,
    };

    // A serial run needs only Ns; Parareal needs the full block structure.
    let (block, nb, ns) = if a.serial && a.block.np.is_none() && a.block.nt.is_none() {
        match a.ns {
            Some(ns) if ns > 0 => (None, None, ns),
            _ => bail!("a serial run needs --ns or a block structure"),
        }
    } else {
        let np = a.block.resolve_np()?;
        let nt = np * a.block.nf;
        let nb = match (a.nb, a.ns) {
            (Some(nb), Some(ns)) if ns != nb * nt => {
                bail!("inconsistent step count: Ns = {ns} but Np·Nf·Nb = {}", nb * nt)
            }
            (Some(nb), _) if nb > 0 => nb,
            (Some(_), _) => bail!("--nb must be at least 1"),
            (None, Some(ns)) => blocks_for(ns, nt)?,
            (None, None) => bail!("one of --nb or --ns is required"),
        };
        (Some(np), Some(nb), nb * nt)
    };
    let policy = if a.serial { None } else { Some(require_policy(&a.policy)?) };

    manifest.config = serde_json::to_value(NlsConfig {
        problem: &problem,
        methods: Methods {
            coarse: coarse.id.clone(),
            fine: fine.id.clone(),
            reference: reference_method.as_ref().map(|t| t.id.clone()),
        },
        block: block.map(|np| block_of(&a.block, np)),
        nb,
        ns: vec![ns],
        policy,
        serial: a.serial,
        reference_ns: a.reference_ns,
        threads: rayon::current_num_threads(),
        out,
    })?;

    let start = Instant::now();
    let (state, stats) = match (policy, block, nb) {
        (Some(policy), Some(np), Some(nb)) => {
            let cfg = run_config(&coarse, &fine, &a.block, np, nb, policy)?;
            let (s, st) = parareal_integrate(&cfg, &problem)?;
            (s, Some(st))
        }
        _ => (serial_integrate(&fine, &problem, ns)?, None),
    };
    let runtime_s = start.elapsed().as_secs_f64();

    let error = match (a.reference_ns, &reference_method) {
        (Some(n), Some(t)) => Some(relative_error(&state, &serial_integrate(t, &problem, n)?)),
        _ => None,
    };

    emit(out, "nls_run.state", manifest, |w| write_state(w, &state))?;
    let k_bar = stats.as_ref().map(RunStats::kbar);
    emit_json(
        out,
        "nls_run.json",
        manifest,
        &RunResult {
            t: state.t,
            ns,
            runtime_s,
            stats,
            k_bar,
            relative_error: error,
        },
    )?;

    print!("Ns={ns} t={} runtime {runtime_s:.3} s", state.t);
    if let Some(k) = k_bar {
        print!(" K_bar={k}");
    }
    if let Some(e) = error {
        print!(" relative error {e:.6e}");
    }
    println!();
    Ok(())
}

/// Runs that blow up are recorded with infinite error; any other failure
/// aborts the sweep.
fn timed<T>(f: impl FnOnce() -> parareal_lab::Result<T>) -> anyhow::Result<(Option<T>, f64)> {
    let start = Instant::now();
    let r = f();
    let secs = start.elapsed().as_secs_f64();
    match r {
        Ok(v) => Ok((Some(v), secs)),
        Err(Error::BlowUp { .. }) => Ok((None, secs)),
        Err(e) => Err(e.into()),
    }
}

fn error_of(state: Option<&SpectralState>, reference: &SpectralState) -> f64 {
    state.map_or(f64::INFINITY, |s| relative_error(s, reference))
}

pub fn sweep(a: &NlsSweepArgs, out: &Path, manifest: &mut RunManifest) -> anyhow::Result<()> {
    let problem = a.problem.problem()?;
    let (coarse, fine) = (load_method(&a.methods.coarse)?, load_method(&a.methods.fine)?);
    let reference_method = load_method(&a.reference_method)?;
    let np = a.block.resolve_np()?;
    let nt = np * a.block.nf;
    let policy = if a.serial { None } else { Some(require_policy(&a.policy)?) };
    let configs = match policy {
        Some(policy) => a
            .ns
            .iter()
            .map(|&ns| run_config(&coarse, &fine, &a.block, np, blocks_for(ns, nt)?, policy))
            .collect::<anyhow::Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    if a.reference_ns == 0 {
        bail!("--reference-ns must be at least 1");
    }

    manifest.config = serde_json::to_value(NlsConfig {
        problem: &problem,
        methods: Methods {
            coarse: coarse.id.clone(),
            fine: fine.id.clone(),
            reference: Some(reference_method.id.clone()),
        },
        block: Some(block_of(&a.block, np)),
        nb: None,
        ns: a.ns.clone(),
        policy,
        serial: a.serial,
        reference_ns: Some(a.reference_ns),
        threads: rayon::current_num_threads(),
        out,
    })?;

    let reference = serial_integrate(&reference_method, &problem, a.reference_ns)?;
    let mut rows = Vec::with_capacity(a.ns.len());
    for (i, &ns) in a.ns.iter().enumerate() {
        let (serial, serial_s) = timed(|| serial_integrate(&fine, &problem, ns))?;
        let row = match configs.get(i) {
            None => SweepRow {
                ns,
                error: error_of(serial.as_ref(), &reference),
                runtime_s: serial_s,
                theoretical_runtime_s: serial_s,
                k_bar: None,
            },
            Some(cfg) => {
                let (result, runtime_s) = timed(|| parareal_integrate(cfg, &problem))?;
                let kbar = result
                    .as_ref()
                    .map_or(cfg.policy.max_iterations() as f64, |(_, st)| st.kbar());
                let cost = CostModel::with_stage_costs(&coarse, &fine, np, a.block.nf, a.block.ng, cfg.nb, kbar)?;
                SweepRow {
                    ns,
                    error: error_of(result.as_ref().map(|(s, _)| s), &reference),
                    runtime_s,
                    theoretical_runtime_s: serial_s / speedup(&cost)?,
                    k_bar: result.as_ref().map(|(_, st)| st.kbar()),
                }
            }
        };
        let kbar = row.k_bar.map(|k| format!(" K_bar={k}")).unwrap_or_default();
        println!("Ns={ns:<8} error {:.6e}  runtime {:.3} s{kbar}", row.error, row.runtime_s);
        rows.push(row);
    }

    match a.output.format {
        Format::Csv => emit(&a.output.out, "nls_sweep.csv", manifest, |w| write_sweep_csv(w, &rows)),
        Format::Json => emit_json(&a.output.out, "nls_sweep.json", manifest, &rows),
    }
}
