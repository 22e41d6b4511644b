use super::AnalysisError;
use crate::geometry::{Rect, P2};

/// Softening of inverse-distance weights, m.
pub const KNN_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Density,
    KnnScore,
}

impl GridKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridKind::Density => "density",
            GridKind::KnnScore => "knn_score",
        }
    }
}

/// Row-major grid: `values[j * nx + i]`, row `j = 0` at `bounds.min.y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    pub kind: GridKind,
    pub bounds: Rect,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    /// Points that fell outside `bounds` (density grids only).
    pub overflow: usize,
}

impl ScoreGrid {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (
            self.bounds.width() / self.nx as f64,
            self.bounds.height() / self.ny as f64,
        )
    }

    pub fn cell_center(&self, i: usize, j: usize) -> P2 {
        let (w, h) = self.cell_size();
        P2::new(
            self.bounds.min.x + (i as f64 + 0.5) * w,
            self.bounds.min.y + (j as f64 + 0.5) * h,
        )
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn check_grid(bounds: &Rect, nx: usize, ny: usize) -> Result<(), AnalysisError> {
    if nx == 0 || ny == 0 {
        return Err(AnalysisError::InvalidArgument(
            "bins must be ≥ 1 on each axis".into(),
        ));
    }
    if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
        return Err(AnalysisError::InvalidArgument("empty bounds".into()));
    }
    Ok(())
}

/// Bin index of `v` in `[lo, hi]` split into `n` cells; shared edges go to
/// the lower cell.
fn bin(v: f64, lo: f64, hi: f64, n: usize) -> Option<usize> {
    if !(lo..=hi).contains(&v) {
        return None;
    }
    let u = (v - lo) / (hi - lo) * n as f64;
    let k = u.ceil() as usize;
    Some(k.saturating_sub(1).min(n - 1))
}

pub fn density_heatmap(
    points: &[P2],
    bounds: &Rect,
    nx: usize,
    ny: usize,
) -> Result<ScoreGrid, AnalysisError> {
    check_grid(bounds, nx, ny)?;
    let mut values = vec![0.0; nx * ny];
    let mut overflow = 0;
    for p in points {
        match (
            bin(p.x, bounds.min.x, bounds.max.x, nx),
            bin(p.y, bounds.min.y, bounds.max.y, ny),
        ) {
            (Some(i), Some(j)) => values[j * nx + i] += 1.0,
            _ => overflow += 1,
        }
    }
    Ok(ScoreGrid {
        kind: GridKind::Density,
        bounds: *bounds,
        nx,
        ny,
        values,
        overflow,
    })
}

/// Inverse-distance weighted mean of the `k` nearest samples at every cell
/// centre. Ties in distance are broken by sample order.
pub fn knn_score_map(
    samples: &[(P2, f64)],
    k: usize,
    bounds: &Rect,
    nx: usize,
    ny: usize,
) -> Result<ScoreGrid, AnalysisError> {
    check_grid(bounds, nx, ny)?;
    if k == 0 {
        return Err(AnalysisError::InvalidArgument("k must be ≥ 1".into()));
    }
    if samples.is_empty() {
        return Err(AnalysisError::InsufficientData(
            "kNN map needs samples".into(),
        ));
    }
    let k = k.min(samples.len());
    let mut grid = ScoreGrid {
        kind: GridKind::KnnScore,
        bounds: *bounds,
        nx,
        ny,
        values: vec![0.0; nx * ny],
        overflow: 0,
    };
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.cell_center(i, j);
            dist.clear();
            dist.extend(
                samples
                    .iter()
                    .enumerate()
                    .map(|(n, (p, _))| ((p - c).norm(), n)),
            );
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < dist.len() {
                dist.select_nth_unstable_by(k - 1, cmp);
            }
            let nearest = &mut dist[..k];
            nearest.sort_by(cmp);
            let (mut num, mut den) = (0.0, 0.0);
            for &(d, n) in nearest.iter() {
                let w = 1.0 / (KNN_EPSILON + d);
                num += w * samples[n].1;
                den += w;
            }
            grid.values[j * nx + i] = num / den;
        }
    }
    Ok(grid)
}
