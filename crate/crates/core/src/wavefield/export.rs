use std::io::{self, Write};

use num_complex::Complex64;

use super::array::SpeakerArray;
use super::driving::{DrivingSet, VirtualSource};
use super::field::{fit_scale, grid_points};
use super::WavefieldError;
use crate::geometry::Rect;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCell {
    pub x: f64,
    pub y: f64,
    pub syn_magnitude: f64,
    pub ideal_magnitude: f64,
    /// This point's share of the squared normalized error; cells sum to `error²`.
    pub contribution: f64,
}

/// Reconstruction error over a grid, with per-point contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMap {
    pub bounds: Rect,
    pub nx: usize,
    pub ny: usize,
    pub frequency: f64,
    pub scale: Complex64,
    pub error: f64,
    pub cells: Vec<ErrorCell>,
}

#[allow(clippy::too_many_arguments)]
pub fn error_map(
    source: &VirtualSource,
    array: &SpeakerArray,
    driving: &DrivingSet,
    bounds: Rect,
    nx: usize,
    ny: usize,
    frequency: f64,
    speed_of_sound: f64,
) -> Result<ErrorMap, WavefieldError> {
    if nx == 0 || ny == 0 {
        return Err(WavefieldError::InvalidArgument(
            "grid needs at least one cell".into(),
        ));
    }
    let zone = grid_points(&bounds, nx, ny, array.height());
    let fit = fit_scale(source, array, driving, &zone, frequency, speed_of_sound)?;
    let mut total = 0.0;
    let cells: Vec<ErrorCell> = zone
        .iter()
        .zip(fit.syn.iter().zip(&fit.ideal))
        .map(|(p, (s, i))| {
            let contribution = (fit.scale * s - i).norm_sqr() / fit.ideal_energy;
            total += contribution;
            ErrorCell {
                x: p.x,
                y: p.y,
                syn_magnitude: (fit.scale * s).norm(),
                ideal_magnitude: i.norm(),
                contribution,
            }
        })
        .collect();
    Ok(ErrorMap {
        bounds,
        nx,
        ny,
        frequency,
        scale: fit.scale,
        error: total.sqrt().clamp(0.0, 1.0),
        cells,
    })
}

impl ErrorMap {
    pub fn mean_contribution(&self) -> f64 {
        self.cells.iter().map(|c| c.contribution).sum::<f64>() / self.cells.len() as f64
    }
}

/// CSV with `#`-prefixed metadata lines followed by a header and one row per point.
pub fn write_error_map_csv<W: Write>(map: &ErrorMap, label: &str, mut w: W) -> io::Result<()> {
    writeln!(w, "# kind=field_error")?;
    writeln!(w, "# label={label}")?;
    writeln!(
        w,
        "# bounds={},{},{},{}",
        map.bounds.min.x, map.bounds.min.y, map.bounds.max.x, map.bounds.max.y
    )?;
    writeln!(w, "# bins={},{}", map.nx, map.ny)?;
    writeln!(w, "# frequency={}", map.frequency)?;
    writeln!(w, "# error={}", map.error)?;
    writeln!(w, "x,y,syn_abs,ideal_abs,contribution")?;
    for c in &map.cells {
        writeln!(
            w,
            "{},{},{},{},{}",
            c.x, c.y, c.syn_magnitude, c.ideal_magnitude, c.contribution
        )?;
    }
    Ok(())
}

/// One row per active speaker: index, side, position, delay, gain.
pub fn write_speaker_listing_csv<W: Write>(
    driving: &DrivingSet,
    array: &SpeakerArray,
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "speaker,side,index_on_side,x,y,delay_s,gain")?;
    for i in driving.active_indices() {
        let s = &array.speakers()[i];
        let e = &driving.entries[i];
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            i, s.side_id, s.index_on_side, s.position.x, s.position.y, e.delay, e.gain
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{P2, P3, SPEED_OF_SOUND};
    use crate::wavefield::{classify_source, driving_functions, reconstruction_error, RenderMode};

    #[test]
    fn contributions_sum_to_squared_error() {
        let a = SpeakerArray::standard(1.6);
        let src = classify_source(P3::new(0.4, -1.8, 1.6), &a);
        let d = driving_functions(&src, &a, None, RenderMode::Static, &Default::default()).unwrap();
        let bounds = Rect::square(P2::origin(), 1.0);
        let m = error_map(&src, &a, &d, bounds, 9, 7, 600.0, SPEED_OF_SOUND).unwrap();
        let zone = grid_points(&bounds, 9, 7, 1.6);
        let e = reconstruction_error(&src, &a, &d, &zone, 600.0, SPEED_OF_SOUND).unwrap();
        assert!((m.error - e).abs() < 1e-12);
        assert_eq!(m.cells.len(), 63);

        let mut buf = Vec::new();
        write_error_map_csv(&m, "static", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# kind=field_error\n"));
        assert!(text.contains("# bins=9,7\n"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 64);
    }
}
