//! Persistence: atomic writes, JSON/CSV/binary dumps, gnuplot scripts and the
//! spectral-data cache.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never sees a partial file. CSV values carry 17 significant digits;
//! JSON numbers use the shortest representation that parses back to the same
//! double.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentReport, Table};
use crate::grid::{Grid, GridFunction};
use crate::linop::{compute_spectrum, Linearization, SpectralData, SpectralRecord, SpectralTolerances};
use crate::profiles::SolitonContext;

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    write_atomic(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, table.to_csv().as_bytes())
}

/// Table with an `x` column followed by one column per field.
pub fn fields_table(fields: &[(&str, &GridFunction)]) -> Result<Table> {
    let Some((_, first)) = fields.first() else {
        return Err(Error::Domain("no fields to dump".into()));
    };
    let grid = *first.grid();
    for (_, f) in fields {
        grid.ensure_same(f.grid())?;
    }
    let mut cols = vec!["x"];
    cols.extend(fields.iter().map(|f| f.0));
    let mut t = Table::new(&cols);
    for j in 0..grid.n_points() {
        let mut row = vec![grid.x(j)];
        row.extend(fields.iter().map(|f| f.1.values()[j]));
        t.push(row);
    }
    Ok(t)
}

/// Raw little-endian `f64` values, no header; the grid goes in the JSON
/// record next to it.
pub fn write_field_binary(path: &Path, f: &GridFunction) -> Result<()> {
    let bytes: Vec<u8> = f.values().iter().flat_map(|v| v.to_le_bytes()).collect();
    write_atomic(path, &bytes)
}

pub fn read_field_binary(path: &Path, grid: Grid) -> Result<GridFunction> {
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * grid.n_points() {
        return Err(Error::Domain(format!(
            "{}: {} bytes, expected {} for N = {}",
            path.display(),
            bytes.len(),
            8 * grid.n_points(),
            grid.n_points()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GridFunction::new(grid, values)
}

/// Gnuplot script drawing columns `ys` of `csv` against column `x`.
pub fn gnuplot_script(csv: &str, title: &str, x: &str, ys: &[&str], log_y: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
    s.push_str(&format!("set title '{title}'\nset xlabel '{x}'\n"));
    if log_y {
        s.push_str("set logscale y\nset format y '%.0e'\n");
    }
    let plots: Vec<String> = ys
        .iter()
        .map(|y| format!("'{csv}' using (column('{x}')):(column('{y}')) with lines title '{y}'"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

/// Writes `report.json`, one CSV per table and, if asked, a plot script per
/// table. Returns the written paths, which are also listed in the report.
pub fn write_report(dir: &Path, report: &mut ExperimentReport, plots: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, table) in &report.tables {
        let csv = dir.join(format!("{name}.csv"));
        write_csv(&csv, table)?;
        written.push(csv);
        if plots && table.columns.len() >= 2 {
            let file = format!("{name}.csv");
            let x = table.columns[0].as_str();
            let ys: Vec<&str> = table.columns[1..].iter().map(String::as_str).collect();
            let gp = dir.join(format!("{name}.gp"));
            write_atomic(&gp, gnuplot_script(&file, name, x, &ys, true).as_bytes())?;
            written.push(gp);
        }
    }
    let json = dir.join("report.json");
    report.artifacts = written
        .iter()
        .chain(std::iter::once(&json))
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    write_json(&json, report)?;
    written.push(json);
    Ok(written)
}

// ---------------------------------------------------------------- spectral cache

/// Cached spectral data: the summary record plus the four eigenfunctions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoredSpectrum {
    pub record: SpectralRecord,
    pub eigenvalues: Vec<Complex64>,
    pub y_plus: Vec<f64>,
    pub y_minus: Vec<f64>,
    pub z_plus: Vec<f64>,
    pub z_minus: Vec<f64>,
}

impl StoredSpectrum {
    pub fn from_data(sd: &SpectralData) -> Self {
        Self {
            record: sd.record(),
            eigenvalues: sd.eigenvalues.clone(),
            y_plus: sd.y_plus.values().to_vec(),
            y_minus: sd.y_minus.values().to_vec(),
            z_plus: sd.z_plus.values().to_vec(),
            z_minus: sd.z_minus.values().to_vec(),
        }
    }

    pub fn into_data(self, ctx: &SolitonContext) -> Result<SpectralData> {
        let r = self.record;
        if r.p != ctx.p {
            return Err(Error::Domain(format!("stored spectrum is for p = {}, requested p = {}", r.p, ctx.p)));
        }
        let grid = Grid::new(r.half_length, r.n_points)?;
        let f = |v: Vec<f64>| GridFunction::new(grid, v);
        Ok(SpectralData {
            e0: r.e0,
            y_plus: f(self.y_plus)?,
            y_minus: f(self.y_minus)?,
            z_plus: f(self.z_plus)?,
            z_minus: f(self.z_minus)?,
            residual_plus: r.residual_plus,
            residual_minus: r.residual_minus,
            adjoint_residual_plus: r.adjoint_residual_plus,
            adjoint_residual_minus: r.adjoint_residual_minus,
            mu: r.mu,
            certificate: r.certificate,
            eta: r.eta,
            e0_dense: r.e0_dense,
            e0_mirror: r.e0_mirror,
            reflection_defect: r.reflection_defect,
            max_essential_real: r.max_essential_real,
            kernel_cluster: r.kernel_cluster.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
            spectral_radius: r.spectral_radius,
            eigenvalues: self.eigenvalues,
            tolerances: r.tolerances,
            op: Linearization::new(ctx, grid),
        })
    }
}

/// Directory of spectral computations keyed by a content hash of
/// `(p, L, N, tolerances)`.
#[derive(Clone, Debug)]
pub struct SpectralCache {
    dir: PathBuf,
}

#[derive(Serialize)]
struct CacheKey<'a> {
    p: u32,
    half_length: f64,
    n_points: usize,
    tolerances: &'a SpectralTolerances,
}

/// Whether [`SpectralCache::get_or_compute`] reused a stored result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Computed,
}

impl SpectralCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn key(p: u32, grid: &Grid, tol: &SpectralTolerances) -> String {
        let key = CacheKey {
            p,
            half_length: grid.half_length(),
            n_points: grid.n_points(),
            tolerances: tol,
        };
        let bytes = serde_json::to_vec(&key).expect("cache key serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn path(&self, p: u32, grid: &Grid, tol: &SpectralTolerances) -> PathBuf {
        self.dir.join(format!("spectrum-{}.json", Self::key(p, grid, tol)))
    }

    /// The stored entry, if present and matching the request exactly.
    pub fn load(&self, ctx: &SolitonContext, grid: &Grid, tol: &SpectralTolerances) -> Option<SpectralData> {
        let stored: StoredSpectrum = read_json(&self.path(ctx.p, grid, tol)).ok()?;
        let r = &stored.record;
        let matches = r.p == ctx.p
            && r.half_length == grid.half_length()
            && r.n_points == grid.n_points()
            && r.tolerances == *tol
            && stored.y_plus.len() == grid.n_points();
        if !matches {
            return None;
        }
        stored.into_data(ctx).ok()
    }

    pub fn store(&self, sd: &SpectralData) -> Result<PathBuf> {
        let path = self.path(sd.op.p(), sd.grid(), &sd.tolerances);
        write_json(&path, &StoredSpectrum::from_data(sd))?;
        Ok(path)
    }

    pub fn get_or_compute(&self, ctx: &SolitonContext, grid: Grid, tol: SpectralTolerances) -> Result<(SpectralData, CacheOutcome)> {
        if let Some(sd) = self.load(ctx, &grid, &tol) {
            return Ok((sd, CacheOutcome::Hit));
        }
        let sd = compute_spectrum(ctx, grid, tol)?;
        self.store(&sd)?;
        Ok((sd, CacheOutcome::Computed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/a.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn binary_field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(5.0, 64).unwrap();
        let f = grid.sample(|x| (-x * x).exp() / 3.0);
        let path = dir.path().join("f.bin");
        write_field_binary(&path, &f).unwrap();
        assert_eq!(read_field_binary(&path, grid).unwrap(), f);
        assert!(read_field_binary(&path, Grid::new(5.0, 32).unwrap()).is_err());
    }

    #[test]
    fn cache_key_depends_on_every_input() {
        let tol = SpectralTolerances::default();
        let g = Grid::new(40.0, 256).unwrap();
        let k = SpectralCache::key(6, &g, &tol);
        assert_eq!(k.len(), 64);
        assert_eq!(k, SpectralCache::key(6, &g, &tol));
        assert_ne!(k, SpectralCache::key(7, &g, &tol));
        assert_ne!(k, SpectralCache::key(6, &Grid::new(40.0, 512).unwrap(), &tol));
        assert_ne!(k, SpectralCache::key(6, &Grid::new(30.0, 256).unwrap(), &tol));
        let tol2 = SpectralTolerances {
            kernel_tol: 2e-3,
            ..tol
        };
        assert_ne!(k, SpectralCache::key(6, &g, &tol2));
    }

    #[test]
    fn gnuplot_script_mentions_columns() {
        let s = gnuplot_script("r.csv", "decay", "t", &["r", "s"], true);
        assert!(s.contains("logscale y") && s.contains("column('r')") && s.contains("column('s')"));
    }
}
