//! On-disk formats: region grids as CSV with a JSON sidecar, NLS sweep CSVs,
//! run manifests, and a binary dump of spectral states.
//!
//! Floating point columns are written with 17 significant digits so reruns of
//! the same configuration produce byte-identical files.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::SpectralState;
use crate::regions::{MethodPairSpec, RegionGrid};

pub const REGION_CSV_HEADER: &str = "z1,z2,abs_R,norm_E_inf,accuracy_err,class";
pub const SWEEP_CSV_HEADER: &str = "Ns,error,runtime_s,theoretical_runtime_s,K_bar";

/// Magic bytes opening a state dump.
pub const STATE_MAGIC: [u8; 8] = *b"PLSTATE\0";
pub const STATE_VERSION: u32 = 1;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_region_csv<W: Write>(mut w: W, grid: &RegionGrid) -> io::Result<()> {
    writeln!(w, "{REGION_CSV_HEADER}")?;
    for c in &grid.cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(c.z1),
            num(c.z2),
            num(c.abs_r),
            num(c.norm_e_inf),
            num(c.accuracy_err),
            c.class.token()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisInfo {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl AxisInfo {
    pub fn of(axis: &[f64]) -> Self {
        Self {
            min: axis.first().copied().unwrap_or(0.0),
            max: axis.last().copied().unwrap_or(0.0),
            n: axis.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axes {
    pub z1: AxisInfo,
    pub z2: AxisInfo,
}

/// Method pairing as echoed in sidecars and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecSummary {
    pub coarse: String,
    pub fine: String,
    #[serde(rename = "Np")]
    pub np: usize,
    #[serde(rename = "Nf")]
    pub nf: usize,
    #[serde(rename = "Ng")]
    pub ng: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

impl From<&MethodPairSpec> for SpecSummary {
    fn from(s: &MethodPairSpec) -> Self {
        Self {
            coarse: s.coarse.id.clone(),
            fine: s.fine.id.clone(),
            np: s.np,
            nf: s.nf,
            ng: s.ng,
            k: s.k,
        }
    }
}

/// Metadata written next to a region CSV. Speedup and efficiency are absent
/// for single-method maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSidecar {
    pub spec: Option<SpecSummary>,
    pub axes: Axes,
    #[serde(rename = "NT")]
    pub nt: usize,
    pub speedup: Option<f64>,
    pub efficiency: Option<f64>,
}

impl RegionSidecar {
    pub fn new(grid: &RegionGrid, spec: Option<&MethodPairSpec>, speedup: Option<f64>, efficiency: Option<f64>) -> Self {
        Self {
            spec: spec.map(SpecSummary::from),
            axes: Axes {
                z1: AxisInfo::of(&grid.z1_axis),
                z2: AxisInfo::of(&grid.z2_axis),
            },
            nt: grid.nt,
            speedup,
            efficiency,
        }
    }
}

/// One line of an NLS step-count sweep. `k_bar` is `None` for serial runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ns: usize,
    pub error: f64,
    pub runtime_s: f64,
    pub theoretical_runtime_s: f64,
    pub k_bar: Option<f64>,
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        let kbar = r.k_bar.map(num).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            r.ns,
            num(r.error),
            num(r.runtime_s),
            num(r.theoretical_runtime_s),
            kbar
        )?;
    }
    Ok(())
}

/// Record of one CLI invocation: the resolved configuration and the files it
/// produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    /// Seed of the fixed random stream, for commands that sample; `null` otherwise.
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub status: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Self {
        Self {
            tool: "parareal-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            seed: None,
            outputs: Vec::new(),
            status: "ok".into(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

/// Binary state dump, little-endian:
///
/// | bytes | content |
/// |-------|---------|
/// | 8     | magic `PLSTATE\0` |
/// | 4     | u32 format version (1) |
/// | 4     | u32 reserved, zero |
/// | 8     | u64 M |
/// | 8     | f64 domain length L |
/// | 8     | f64 time t |
/// | 8·M   | M pairs of f32 (re, im) of the normalized coefficients |
pub fn write_state<W: Write>(mut w: W, s: &SpectralState) -> io::Result<()> {
    w.write_all(&STATE_MAGIC)?;
    w.write_u32::<LittleEndian>(STATE_VERSION)?;
    w.write_u32::<LittleEndian>(0)?;
    w.write_u64::<LittleEndian>(s.m as u64)?;
    w.write_f64::<LittleEndian>(s.length)?;
    w.write_f64::<LittleEndian>(s.t)?;
    for z in &s.uhat {
        w.write_f32::<LittleEndian>(z.re as f32)?;
        w.write_f32::<LittleEndian>(z.im as f32)?;
    }
    Ok(())
}

pub fn read_state<R: Read>(mut r: R) -> Result<SpectralState> {
    let bad = |msg: &str| Error::InvalidConfig(format!("state dump: {msg}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != STATE_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != STATE_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    r.read_u32::<LittleEndian>()?;
    let m = usize::try_from(r.read_u64::<LittleEndian>()?).map_err(|_| bad("M out of range"))?;
    let length = r.read_f64::<LittleEndian>()?;
    let t = r.read_f64::<LittleEndian>()?;
    let mut uhat = Vec::with_capacity(m.min(1 << 24));
    for _ in 0..m {
        let re = r.read_f32::<LittleEndian>()?;
        let im = r.read_f32::<LittleEndian>()?;
        uhat.push(Complex64::new(re as f64, im as f64));
    }
    Ok(SpectralState { uhat, m, length, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{compute_grid, linspace};
    use crate::tableaux::MethodId;

    #[test]
    fn region_csv_layout() {
        let spec = MethodPairSpec::from_block_size(
            MethodId::ImexRk3.tableau(),
            MethodId::ImexRk4.tableau(),
            64,
            16,
            1,
            2,
        )
        .unwrap();
        let grid = compute_grid(&spec, &linspace(-0.1, 0.0, 3), &linspace(0.0, 0.1, 2)).unwrap();
        let mut buf = Vec::new();
        write_region_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], REGION_CSV_HEADER);
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("-1.0000000000000001e-1,0.0000000000000000e0,"));
        assert!(lines[1].ends_with("STABLE"));

        let side = RegionSidecar::new(&grid, Some(&spec), Some(2.0), Some(0.5));
        let json = serde_json::to_value(&side).unwrap();
        assert_eq!(json["NT"], 64);
        assert_eq!(json["axes"]["z1"]["n"], 3);
        assert_eq!(json["spec"]["coarse"], "imex-rk3");
    }

    #[test]
    fn sweep_csv_leaves_kbar_blank_for_serial() {
        let rows = [
            SweepRow {
                ns: 4096,
                error: 1.5e-4,
                runtime_s: 0.25,
                theoretical_runtime_s: 0.25,
                k_bar: None,
            },
            SweepRow {
                ns: 4096,
                error: f64::INFINITY,
                runtime_s: 0.5,
                theoretical_runtime_s: 0.03,
                k_bar: Some(3.0),
            },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert!(lines[1].ends_with(','));
        assert!(lines[2].contains(",inf,"));
        assert!(lines[2].ends_with("3.0000000000000000e0"));
    }

    #[test]
    fn state_roundtrip() {
        let s = SpectralState {
            uhat: vec![Complex64::new(1.0, -0.5), Complex64::new(0.25, 0.125)],
            m: 2,
            length: 8.0 * std::f64::consts::PI,
            t: 15.0,
        };
        let mut buf = Vec::new();
        write_state(&mut buf, &s).unwrap();
        assert_eq!(buf.len(), 40 + 16);
        assert_eq!(&buf[..8], b"PLSTATE\0");
        assert_eq!(read_state(&buf[..]).unwrap(), s);

        buf[0] = b'X';
        assert!(read_state(&buf[..]).is_err());
    }
}
