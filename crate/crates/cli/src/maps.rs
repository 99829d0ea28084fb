use std::io::Write;
use std::path::Path;

use anyhow::bail;
use parareal_lab::artifacts::{write_region_csv, RegionSidecar, RunManifest, SpecSummary};
use parareal_lab::cost::{efficiency, speedup, speedup_table as table};
use parareal_lab::regions::{accuracy_grid, compute_grid, imexrk_amplitude_grid, Window};
use parareal_lab::{CostModel, MethodPairSpec, RegionClass, RegionGrid};
use serde::Serialize;

use crate::args::{load_method, AccuracyArgs, Format, MapArgs, OutputArgs, SpeedupArgs, SurfaceArgs};
use crate::output::{emit, emit_json};

#[derive(Serialize)]
struct MapConfig<'a> {
    spec: SpecSummary,
    #[serde(rename = "NT")]
    nt: usize,
    window: Window,
    res: usize,
    fine_only: Option<bool>,
    format: Format,
    threads: usize,
    out: &'a Path,
}

#[derive(Serialize)]
struct GridDocument<'a> {
    #[serde(flatten)]
    meta: &'a RegionSidecar,
    cells: &'a [parareal_lab::RegionCell],
}

fn check_res(res: usize) -> anyhow::Result<()> {
    if res < 2 {
        bail!("--res must be at least 2");
    }
    Ok(())
}

fn resolve_spec(a: &MapArgs) -> anyhow::Result<MethodPairSpec> {
    let np = a.block.resolve_np()?;
    let spec = MethodPairSpec {
        coarse: load_method(&a.methods.coarse)?,
        fine: load_method(&a.methods.fine)?,
        np,
        nf: a.block.nf,
        ng: a.block.ng,
        k: a.k,
    };
    spec.validate()?;
    Ok(spec)
}

fn write_grid(
    out: &OutputArgs,
    stem: &str,
    grid: &RegionGrid,
    meta: &RegionSidecar,
    manifest: &mut RunManifest,
) -> anyhow::Result<()> {
    match out.format {
        Format::Csv => {
            emit(&out.out, &format!("{stem}.csv"), manifest, |w| write_region_csv(w, grid))?;
            emit_json(&out.out, &format!("{stem}.json"), manifest, meta)
        }
        Format::Json => emit_json(
            &out.out,
            &format!("{stem}.json"),
            manifest,
            &GridDocument { meta, cells: &grid.cells },
        ),
    }
}

fn print_counts(grid: &RegionGrid) {
    for class in [
        RegionClass::ConvStable,
        RegionClass::ConvUnstable,
        RegionClass::NoConvStable,
        RegionClass::NoConvUnstable,
    ] {
        println!("{:<16} {:>8} ({:.4})", class.token(), grid.count(class), grid.fraction(class));
    }
}

fn pair_map(a: &MapArgs, fine_only: Option<bool>, stem: &str, manifest: &mut RunManifest) -> anyhow::Result<()> {
    check_res(a.res)?;
    let spec = resolve_spec(a)?;
    let window = a.window.over(Window::near_origin(spec.nt()))?;
    manifest.config = serde_json::to_value(MapConfig {
        spec: SpecSummary::from(&spec),
        nt: spec.nt(),
        window,
        res: a.res,
        fine_only,
        format: a.output.format,
        threads: rayon::current_num_threads(),
        out: &a.output.out,
    })?;

    let (z1, z2) = window.axes(a.res, a.res);
    let grid = match fine_only {
        None => compute_grid(&spec, &z1, &z2)?,
        Some(f) => accuracy_grid(&spec, &z1, &z2, f)?,
    };
    let cost = CostModel::with_stage_costs(&spec.coarse, &spec.fine, spec.np, spec.nf, spec.ng, 1, spec.k as f64)?;
    let (s, e) = (speedup(&cost)?, efficiency(&cost)?);
    let meta = RegionSidecar::new(&grid, Some(&spec), Some(s), Some(e));
    write_grid(&a.output, stem, &grid, &meta, manifest)?;

    println!(
        "{} / {}  NT={} Np={} Nf={} Ng={} K={}  S={s:.2} E={e:.4}",
        spec.coarse.id,
        spec.fine.id,
        spec.nt(),
        spec.np,
        spec.nf,
        spec.ng,
        spec.k
    );
    if fine_only.is_none() {
        print_counts(&grid);
    } else {
        let worst = grid.cells.iter().map(|c| c.accuracy_err).fold(0.0, f64::max);
        println!("max accuracy error {worst:.3e}");
    }
    Ok(())
}

pub fn stability_map(a: &MapArgs, _out: &Path, manifest: &mut RunManifest) -> anyhow::Result<()> {
    pair_map(a, None, "stability_map", manifest)
}

pub fn accuracy_map(a: &AccuracyArgs, _out: &Path, manifest: &mut RunManifest) -> anyhow::Result<()> {
    let stem = if a.fine_only { "accuracy_map_fine" } else { "accuracy_map" };
    pair_map(&a.map, Some(a.fine_only), stem, manifest)
}

#[derive(Serialize)]
struct SurfaceConfig<'a> {
    method: &'a str,
    window: Window,
    res: usize,
    format: Format,
    threads: usize,
    out: &'a Path,
}

pub fn amp_surface(a: &SurfaceArgs, _out: &Path, manifest: &mut RunManifest) -> anyhow::Result<()> {
    check_res(a.res)?;
    let t = load_method(&a.method)?;
    let window = a.window.over(Window::single_method())?;
    manifest.config = serde_json::to_value(SurfaceConfig {
        method: &t.id,
        window,
        res: a.res,
        format: a.output.format,
        threads: rayon::current_num_threads(),
        out: &a.output.out,
    })?;
    let (z1, z2) = window.axes(a.res, a.res);
    let grid = imexrk_amplitude_grid(&t, &z1, &z2)?;
    let meta = RegionSidecar::new(&grid, None, None, None);
    write_grid(&a.output, "amp_surface", &grid, &meta, manifest)?;
    let stable = grid.cells.iter().filter(|c| c.class.is_stable()).count();
    println!("{}: {stable} of {} cells with |R| <= 1", t.id, grid.cells.len());
    Ok(())
}

#[derive(Serialize)]
struct SpeedupConfig {
    coarse: String,
    fine: String,
    #[serde(rename = "Np")]
    np: usize,
    #[serde(rename = "Nf")]
    nf: usize,
    #[serde(rename = "Ng")]
    ng: usize,
    #[serde(rename = "K_bar")]
    kbar: f64,
    cf: f64,
    cg: f64,
    #[serde(rename = "Ns")]
    ns: Vec<usize>,
    format: Format,
}

/// `NT, 2·NT, 4·NT, …` up to `2^18`, or just `NT` when it is larger.
fn default_ns(nt: usize) -> Vec<usize> {
    let mut v = vec![nt];
    while let Some(&last) = v.last() {
        if last * 2 > 1 << 18 {
            break;
        }
        v.push(last * 2);
    }
    v
}

pub fn speedup_table(a: &SpeedupArgs, _out: &Path, manifest: &mut RunManifest) -> anyhow::Result<()> {
    let np = a.block.resolve_np()?;
    let (coarse, fine) = (load_method(&a.methods.coarse)?, load_method(&a.methods.fine)?);
    let nt = np * a.block.nf;
    let ns = if a.ns.is_empty() { default_ns(nt) } else { a.ns.clone() };
    let mut base = CostModel::with_stage_costs(&coarse, &fine, np, a.block.nf, a.block.ng, 1, a.k)?;
    base.cf = a.cf.unwrap_or(base.cf);
    base.cg = a.cg.unwrap_or(base.cg);
    base.validate()?;
    manifest.config = serde_json::to_value(SpeedupConfig {
        coarse: coarse.id.clone(),
        fine: fine.id.clone(),
        np,
        nf: a.block.nf,
        ng: a.block.ng,
        kbar: a.k,
        cf: base.cf,
        cg: base.cg,
        ns: ns.clone(),
        format: a.output.format,
    })?;

    let rows = table(&base, &ns)?;
    match a.output.format {
        Format::Csv => emit(&a.output.out, "speedup_table.csv", manifest, |w| {
            writeln!(w, "Ns,speedup,efficiency")?;
            for r in &rows {
                writeln!(w, "{},{:.16e},{:.16e}", r.ns, r.speedup, r.efficiency)?;
            }
            Ok(())
        })?,
        Format::Json => emit_json(&a.output.out, "speedup_table.json", manifest, &rows)?,
    }

    println!(
        "{} / {}  Np={np} Nf={} Ng={} K_bar={}  (cg, cf) = ({}, {})",
        coarse.id, fine.id, a.block.nf, a.block.ng, a.k, base.cg, base.cf
    );
    println!("{:>8}  {:>8}  {:>8}", "Ns", "S", "E");
    for r in &rows {
        println!("{:>8}  {:>8.2}  {:>8.4}", r.ns, r.speedup, r.efficiency);
    }
    Ok(())
}
