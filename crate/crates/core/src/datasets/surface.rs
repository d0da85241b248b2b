use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csvio::format_float;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// The three-bump "peaks" terrain.
pub fn peaks(x: f64, y: f64) -> f64 {
    3.0 * (1.0 - x).powi(2) * (-x * x - (y + 1.0).powi(2)).exp()
        - 10.0 * (x / 5.0 - x.powi(3) - y.powi(5)) * (-x * x - y * y).exp()
        - (1.0 / 3.0) * (-(x + 1.0).powi(2) - y * y).exp()
}

/// Parameters of a synthetic terrain with two points hovering above it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSpec {
    /// Grid points per side; the surface has `grid_side²` points.
    pub grid_side: usize,
    /// Lower and upper bound of both coordinates.
    pub bounds: (f64, f64),
    /// Height of the anomalies above the terrain; `None` means half the terrain's z-range.
    pub delta: Option<f64>,
    /// Minimum `(x, y)` distance between the two anomalies (default: half the default
    /// domain width).
    pub min_separation: f64,
    pub seed: u64,
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self {
            grid_side: 50,
            bounds: (-3.0, 3.0),
            delta: None,
            min_separation: 3.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceInstance {
    /// `(grid_side² + 2) × 3` rows of `(x, y, z)`, anomalies last.
    pub data: DenseMatrix,
    pub reference: usize,
    pub target: usize,
    pub delta: f64,
}

impl SurfaceInstance {
    /// CSV with header `x,y,z`, one row per point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,y,z")?;
        for i in 0..self.data.rows() {
            let r = self.data.row(i);
            writeln!(
                out,
                "{},{},{}",
                format_float(r[0]),
                format_float(r[1]),
                format_float(r[2])
            )?;
        }
        Ok(())
    }
}

const MAX_PLACEMENT_DRAWS: usize = 100_000;

pub fn generate_surface(spec: &SurfaceSpec) -> Result<SurfaceInstance> {
    let g = spec.grid_side;
    let (lo, hi) = spec.bounds;
    if g < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid side must be at least 2, got {g}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "invalid bounds [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (g - 1) as f64;
    let coord = |i: usize| lo + step * i as f64;

    let n = g * g;
    let mut rows = Vec::with_capacity(n + 2);
    for ix in 0..g {
        for iy in 0..g {
            let (x, y) = (coord(ix), coord(iy));
            rows.push([x, y, peaks(x, y)]);
        }
    }
    let (zmin, zmax) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r[2]), b.max(r[2]))
        });
    let delta = spec.delta.unwrap_or(0.5 * (zmax - zmin));
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "anomaly height must be positive, got {delta}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let first = rng.random_range(0..n);
    let mut second = None;
    for _ in 0..MAX_PLACEMENT_DRAWS {
        let cand = rng.random_range(0..n);
        let (a, b) = (rows[first], rows[cand]);
        if cand != first && (a[0] - b[0]).hypot(a[1] - b[1]) >= spec.min_separation {
            second = Some(cand);
            break;
        }
    }
    let second = second.ok_or_else(|| {
        Error::InvalidParameter(format!(
            "could not place anomalies {} apart",
            spec.min_separation
        ))
    })?;
    for cell in [first, second] {
        let [x, y, z] = rows[cell];
        rows.push([x, y, z + delta]);
    }

    Ok(SurfaceInstance {
        data: DenseMatrix::from_rows(&rows)?,
        reference: n,
        target: n + 1,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_surface_has_2502_rows() {
        let s = generate_surface(&SurfaceSpec::default()).unwrap();
        assert_eq!(s.data.rows(), 2502);
        assert_eq!(s.data.cols(), 3);
        assert_eq!((s.reference, s.target), (2500, 2501));
    }

    #[test]
    fn anomalies_hover_by_delta() {
        for seed in 0..5 {
            let s = generate_surface(&SurfaceSpec {
                grid_side: 10,
                min_separation: 0.0,
                seed,
                ..Default::default()
            })
            .unwrap();
            let mut offsets: Vec<f64> = (0..s.data.rows())
                .map(|i| {
                    let r = s.data.row(i);
                    r[2] - peaks(r[0], r[1])
                })
                .collect();
            for &i in &[s.reference, s.target] {
                assert!((offsets[i] - s.delta).abs() <= 1e-12 * s.delta.max(1.0));
            }
            assert_ne!(s.data.row(s.reference)[..2], s.data.row(s.target)[..2]);
            offsets.truncate(100);
            assert!(offsets.iter().all(|&o| o == 0.0));
        }
    }

    #[test]
    fn separation_is_respected() {
        let spec = SurfaceSpec {
            grid_side: 20,
            min_separation: 3.0,
            ..Default::default()
        };
        for seed in 0..10 {
            let s = generate_surface(&SurfaceSpec { seed, ..spec }).unwrap();
            let (a, b) = (s.data.row(s.reference), s.data.row(s.target));
            assert!((a[0] - b[0]).hypot(a[1] - b[1]) >= 3.0);
        }
        let impossible = SurfaceSpec {
            min_separation: 100.0,
            ..spec
        };
        assert!(generate_surface(&impossible).is_err());
    }

    #[test]
    fn csv_export_has_header_and_all_rows() {
        let s = generate_surface(&SurfaceSpec {
            grid_side: 3,
            ..Default::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,z\n"));
        assert_eq!(text.lines().count(), 12);
    }
}
