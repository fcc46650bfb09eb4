//! On-disk formats: binary control fields, quiver CSVs, histogram dumps and
//! run reports.
//!
//! Control file layout (little endian):
//!
//! ```text
//! b"KCF1"  u32 n_t  u32 n_x  u32 n_v
//! (n_t + 1) * n_x * n_v  f64   u[k][i][j]
//! n_x * n_v              f64   u_bar[i][j]
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::SimConfig;
use crate::control::ControlField;
use crate::domain::{GridField, GridSpec};
use crate::error::{Error, Result};
use crate::forward::ForwardRun;
use crate::objective::{cost_estimate, mean, orbit_residuals};

const MAGIC: &[u8; 4] = b"KCF1";
const HEADER: usize = 16;

pub fn encode_control(control: &ControlField) -> Vec<u8> {
    let cells = control.n_x() * control.n_v();
    let mut out = Vec::with_capacity(HEADER + 8 * cells * (control.n_t() + 2));
    out.extend_from_slice(MAGIC);
    for n in [control.n_t(), control.n_x(), control.n_v()] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for field in control.steps().iter().chain(std::iter::once(control.mean())) {
        for v in field.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_control(bytes: &[u8]) -> Result<ControlField> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(Error::ControlFormat("missing KCF1 header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (n_t, n_x, n_v) = (word(4), word(8), word(12));
    if n_x < 2 || n_v < 2 {
        return Err(Error::ControlFormat(format!("degenerate mesh {n_x}x{n_v}")));
    }
    let cells = n_x * n_v;
    let expected = (n_t + 2)
        .checked_mul(cells)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER))
        .ok_or_else(|| Error::ControlFormat("header sizes overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::ControlFormat(format!(
            "expected {expected} bytes for {n_t} steps on {n_x}x{n_v}, found {}",
            bytes.len()
        )));
    }
    let mut fields = bytes[HEADER..]
        .chunks_exact(8 * cells)
        .map(|chunk| {
            let values = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            GridField::from_values(n_x, n_v, values)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = fields.pop().expect("size checked above");
    ControlField::from_parts(fields, mean)
}

pub fn write_control(path: impl AsRef<Path>, control: &ControlField) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_control(control)).map_err(|e| Error::io(path, e))
}

pub fn read_control(path: impl AsRef<Path>) -> Result<ControlField> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_control(&bytes)
}

/// Quiver data of the controlled velocity field `(v, u)` at the cell
/// centres, one row per cell.
pub fn quiver_csv(field: &GridField, grid: &GridSpec) -> String {
    let mut s = String::from("x,v,arrow_x,arrow_v\n");
    for i in 0..grid.n_x() {
        for j in 0..grid.n_v() {
            let (x, v) = grid.cell_center(i, j);
            let _ = writeln!(s, "{x},{v},{v},{}", field.get(i, j));
        }
    }
    s
}

/// Writes `quiver_mean.csv` and one `quiver_kNNNN.csv` per level into `dir`.
pub fn emit_quiver(dir: impl AsRef<Path>, control: &ControlField, grid: &GridSpec) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    if !control.matches(grid) {
        return Err(Error::DimensionMismatch(format!(
            "control is {}x{}, mesh is {}x{}",
            control.n_x(),
            control.n_v(),
            grid.n_x(),
            grid.n_v()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(control.n_t() + 2);
    let mut put = |name: String, field: &GridField| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, quiver_csv(field, grid)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    put("quiver_mean.csv".into(), control.mean())?;
    for (k, field) in control.steps().iter().enumerate() {
        put(format!("quiver_k{k:04}.csv"), field)?;
    }
    Ok(written)
}

/// Histogram `k` as `k,i,j,count` rows (zero-based cell indices).
pub fn histogram_csv(k: usize, hist: &GridField) -> String {
    let mut s = String::from("k,i,j,count\n");
    for i in 0..hist.n_x() {
        for j in 0..hist.n_v() {
            let _ = writeln!(s, "{k},{i},{j},{}", hist.get(i, j));
        }
    }
    s
}

/// Writes `hist_kNNNN.csv` for every level into `dir`.
pub fn write_histograms(dir: impl AsRef<Path>, histograms: &[GridField]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (k, hist) in histograms.iter().enumerate() {
        let path = dir.join(format!("hist_k{k:04}.csv"));
        fs::write(&path, histogram_csv(k, hist)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Summary of one forward simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub cost: f64,
    pub counts: Vec<usize>,
    pub residual_mean: f64,
    pub residual_median: f64,
    pub residual_max: f64,
    pub collisions: u64,
    pub wall_clock_secs: f64,
}

impl RunReport {
    pub fn from_run(cfg: &SimConfig, run: &ForwardRun, control: &ControlField, wall_clock_secs: f64) -> Result<Self> {
        let grid = cfg.grid()?;
        let cost = cost_estimate(
            &run.ensembles,
            Some(control),
            &grid,
            &cfg.objective(),
            &cfg.orbit(),
            run.initial_count(),
        );
        let mut res = orbit_residuals(run.last(), &cfg.orbit(), cfg.n_t);
        res.sort_by(f64::total_cmp);
        let median = match res.len() {
            0 => f64::NAN,
            n if n % 2 == 1 => res[n / 2],
            n => 0.5 * (res[n / 2 - 1] + res[n / 2]),
        };
        Ok(Self {
            cost,
            counts: run.counts(),
            residual_mean: mean(&res),
            residual_median: median,
            residual_max: res.last().copied().unwrap_or(f64::NAN),
            collisions: run.collisions.iter().sum(),
            wall_clock_secs,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cost = {}", self.cost);
        let _ = writeln!(s, "particles_initial = {}", self.counts.first().copied().unwrap_or(0));
        let _ = writeln!(s, "particles_final = {}", self.counts.last().copied().unwrap_or(0));
        let _ = writeln!(s, "orbit_residual_mean = {}", self.residual_mean);
        let _ = writeln!(s, "orbit_residual_median = {}", self.residual_median);
        let _ = writeln!(s, "orbit_residual_max = {}", self.residual_max);
        let _ = writeln!(s, "collisions = {}", self.collisions);
        let _ = writeln!(s, "wall_clock_secs = {:.3}", self.wall_clock_secs);
        let counts: Vec<String> = self.counts.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "counts = {}", counts.join(","));
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PhaseDomain;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(3, 4, &PhaseDomain::new(10.0, 5.0, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn header_layout() {
        let c = ControlField::zeros(2, &grid());
        let bytes = encode_control(&c);
        assert_eq!(&bytes[..4], b"KCF1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 4);
        assert_eq!(bytes.len(), 16 + 8 * 12 * 4);
    }

    #[test]
    fn rejects_truncated_and_foreign() {
        let bytes = encode_control(&ControlField::zeros(2, &grid()));
        assert!(matches!(
            decode_control(&bytes[..bytes.len() - 1]),
            Err(Error::ControlFormat(_))
        ));
        assert!(matches!(
            decode_control(b"KCF2aaaaaaaaaaaa"),
            Err(Error::ControlFormat(_))
        ));
        assert!(matches!(decode_control(b"KC"), Err(Error::ControlFormat(_))));
    }

    #[test]
    fn quiver_rows() {
        let g = grid();
        let u = GridField::from_fn(&g, |x, v| x + v);
        let csv = quiver_csv(&u, &g);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,v,arrow_x,arrow_v"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
        let (x, v) = g.cell_center(0, 0);
        assert_eq!(first, vec![x, v, v, x + v]);
        assert_eq!(csv.lines().count(), 1 + 12);
    }

    #[test]
    fn histogram_rows() {
        let g = grid();
        let h = GridField::from_fn(&g, |_, _| 2.0);
        let csv = histogram_csv(5, &h);
        assert!(csv.starts_with("k,i,j,count\n5,0,0,2\n"));
    }

    proptest! {
        #[test]
        fn control_round_trip_is_bitwise(
            n_t in 0usize..4,
            n_x in 2usize..5,
            n_v in 2usize..5,
            seed in any::<u64>(),
        ) {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits(state) // any bit pattern, NaNs included
            };
            let steps: Vec<GridField> = (0..=n_t)
                .map(|_| GridField::from_values(n_x, n_v, (0..n_x * n_v).map(|_| next()).collect()).unwrap())
                .collect();
            let mean = GridField::from_values(n_x, n_v, (0..n_x * n_v).map(|_| next()).collect()).unwrap();
            let c = ControlField::from_parts(steps, mean).unwrap();
            let back = decode_control(&encode_control(&c)).unwrap();
            prop_assert_eq!(encode_control(&back), encode_control(&c));
        }
    }
}
